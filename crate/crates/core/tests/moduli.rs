use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemelab::moduli::*;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Random point of `V`: pick `x₁, x₂`, solve `x₃ = −(x₁ + x₂)/(1 + x₁x₂)`.
fn on_variety(rng: &mut ChaCha8Rng) -> TotallyMarkedPoint {
    loop {
        let x1 = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let x2 = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let den = ONE + x1 * x2;
        if den.norm() > 0.1 {
            return TotallyMarkedPoint([x1, x2, -(x1 + x2) / den]);
        }
    }
}

#[test]
fn forward_examples() {
    let t = c(0.7, -1.3);
    let l = lambdas_from_x(TotallyMarkedPoint([t, -t, c(0.0, 0.0)])).unwrap().0;
    assert!((l[0] - ONE).norm() < 1e-15);
    assert!((l[1] - ONE).norm() < 1e-15);
    assert!((l[2] - (ONE - t * t)).norm() < 1e-15);
    assert!(matches!(
        lambdas_from_x(TotallyMarkedPoint([ONE, ONE, ONE])),
        Err(ModuliError::OffVariety { .. })
    ));
}

#[test]
fn variety_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let x = on_variety(&mut rng);
        let l = lambdas_from_x(x).unwrap().0;
        let scale = 1.0 + l.iter().map(|z| z.norm()).fold(0.0, f64::max).powi(3);
        assert!(m2fm_residual(l).norm() < 1e-11 * scale);
        for h in 0..3 {
            let (j, k) = ((h + 1) % 3, (h + 2) % 3);
            let lhs = x.0[h] * x.0[h];
            assert!((lhs - (ONE - l[j] * l[k])).norm() < 1e-11 * scale);
        }
    }
}

#[test]
fn round_trip_and_sign_classes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let x = on_variety(&mut rng);
        let l = lambdas_from_x(x).unwrap();
        let [a, b] = x_from_lambdas(l).unwrap();
        let close = |p: &TotallyMarkedPoint, q: &TotallyMarkedPoint| (0..3).all(|i| (p.0[i] - q.0[i]).norm() < 1e-8);
        assert!(close(&a, &x) || close(&b, &x));
        for y in [a, b] {
            assert!(qtm_residual(y.0).norm() < 1e-9);
            let back = lambdas_from_x(y).unwrap().0;
            for i in 0..3 {
                assert!((back[i] - l.0[i]).norm() < 1e-8);
            }
        }
    }
    let zero = x_from_lambdas(MultiplierTriple([ONE; 3])).unwrap();
    assert_eq!(zero[0].0, [c(0.0, 0.0); 3]);
}

#[test]
fn equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let x = on_variety(&mut rng);
        let l = lambdas_from_x(x).unwrap().0;
        let neg = lambdas_from_x(TotallyMarkedPoint(x.0.map(|v| -v))).unwrap().0;
        assert_eq!(l, neg);
        // Cyclic (even) permutation of the x's permutes the λ's the same way.
        let rot = lambdas_from_x(TotallyMarkedPoint([x.0[1], x.0[2], x.0[0]])).unwrap().0;
        for i in 0..3 {
            assert!((rot[i] - l[(i + 1) % 3]).norm() < 1e-12);
        }
    }
}

#[test]
fn index_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let l = [0, 1, 2].map(|_| c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)));
        let lhs = m2fm_residual(l);
        let rhs = (ONE - l[0]) * (ONE - l[1]) * (ONE - l[2]) * (index_sum(&l).unwrap() - 1.0);
        assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let l = lambdas_from_x(on_variety(&mut rng)).unwrap().0;
        if l.iter().all(|v| (ONE - v).norm() > 1e-3) {
            assert!((index_sum(&l).unwrap() - ONE).norm() < 1e-8);
        }
    }
    assert_eq!(index_sum(&[ONE]), Err(ModuliError::DegenerateMultiplier));
}

#[test]
fn cubic_relation_from_polynomials() {
    // Fixed points of z³ + a z² + b z + e and their multipliers, computed directly.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let b = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let e = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let fixed = schemelab::poly::roots(&[e, b - ONE, a, ONE]).unwrap();
        let l: Vec<C64> = fixed.iter().map(|&z| 3.0 * z * z + 2.0 * a * z + b).collect();
        assert!(cubic_relation_residual([l[0], l[1], l[2]]).norm() < 1e-9);
    }
}

#[test]
fn normal_form_properties() {
    let f = normal_form(c(0.0, 0.0), c(0.0, 0.0)).unwrap();
    assert_eq!(f.eval(c(0.3, 0.4)), c(0.3, 0.4) * c(0.3, 0.4));
    let cp = critical_points_nf(c(0.0, 0.0), c(0.0, 0.0)).unwrap();
    assert_eq!(cp, [SpherePoint::Finite(c(0.0, 0.0)), SpherePoint::Infinity]);
    let cp = critical_points_nf(c(0.6, 0.2), c(0.0, 0.0)).unwrap();
    assert!((cp[0].finite().unwrap() - c(-0.3, -0.1)).norm() < 1e-15);
    assert_eq!(normal_form(c(2.0, 0.0), c(0.5, 0.0)), Err(ModuliError::CrashedFixedPoints));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let alpha = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let beta = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let f = normal_form(alpha, beta).unwrap();
        // Multiplier at 0 and at ∞ (via w = 1/z: g(w) = 1/f(1/w), g'(0) = β).
        assert!((f.derivative(c(0.0, 0.0)) - alpha).norm() < 1e-12);
        let w = c(1e-7, 0.0);
        let g = |w: C64| ONE / f.eval(ONE / w);
        assert!(((g(w) - g(-w)) / (2.0 * w) - beta).norm() < 1e-5);
        for cp in critical_points_nf(alpha, beta).unwrap() {
            let z = cp.finite().unwrap();
            assert!(f.derivative(z).norm() < 1e-10 * (1.0 + z.norm()).powi(2));
        }
        let z3 = third_fixed_point(alpha, beta).unwrap().finite().unwrap();
        assert!((f.eval(z3) - z3).norm() < 1e-10 * (1.0 + z3.norm()));
        let gamma = third_multiplier(alpha, beta).unwrap();
        assert!((f.derivative(z3) - gamma).norm() < 1e-8 * (1.0 + gamma.norm()));
        assert!(m2fm_residual([alpha, beta, gamma]).norm() < 1e-10 * (1.0 + gamma.norm()));
    }
}

#[test]
fn cross_ratio_examples() {
    assert_eq!(cross_ratios(TotallyMarkedPoint([c(0.0, 0.0); 3])).unwrap(), [ONE; 3]);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let r = cross_ratios(on_variety(&mut rng)).unwrap();
        assert!((r[0] * r[1] * r[2] - ONE).norm() < 1e-12 * (1.0 + r.iter().map(|v| v.norm()).product::<f64>()));
    }
    assert_eq!(
        cross_ratios(TotallyMarkedPoint([-ONE, ONE, c(0.0, 0.0)])),
        Err(ModuliError::CrossRatioPole)
    );
}

#[test]
fn fixed_point_data_example() {
    let q = [ONE, c(0.0, 0.0), ONE];
    let f = from_fixed_point_data(&q, &[c(0.0, 0.0), ONE, -ONE]).unwrap();
    assert!((f.num[0]).norm() < 1e-15);
    assert!((f.num[1] - c(2.0, 0.0)).norm() < 1e-15);
    assert!(f.num[2..].iter().all(|v| v.norm() < 1e-15));
    for z in [c(0.0, 0.0), ONE, -ONE] {
        assert!((f.eval(z) - z).norm() < 1e-14);
    }
    assert_eq!(
        from_fixed_point_data(&q, &[c(0.0, 1.0), ONE, -ONE]),
        Err(ModuliError::FixedPointOnPoleSet { index: 0 })
    );
}

proptest! {
    #[test]
    fn fixed_point_identity(seed in 0u64..10_000, d in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q: Vec<C64> = (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        q.push(ONE);
        let fixed: Vec<C64> = (0..=d).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        prop_assume!(fixed.iter().all(|&z| schemelab::poly::eval(&q, z).norm() > 1e-3));
        let f = from_fixed_point_data(&q, &fixed).unwrap();
        for &z in &fixed {
            prop_assert!((f.eval(z) - z).norm() < 1e-9 * (1.0 + z.norm()));
        }
        for i in 0..64 {
            let z = C64::from_polar(1.5, std::f64::consts::TAU * i as f64 / 64.0);
            let lhs = z * schemelab::poly::eval(&f.den, z) - schemelab::poly::eval(&f.num, z);
            let rhs: C64 = fixed.iter().map(|&w| z - w).product();
            prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
        }
    }
}
