use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemelab::dynamics::{classify, label_basins, default_windows, Fate, FiberMap, GenPolyMap, Label};
use schemelab::parallel::Execution;
use schemelab::poly;
use schemelab::render::*;
use schemelab::window::Window;
use schemelab::MappingScheme;
use std::collections::HashMap;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn quadratic(k: C64) -> GenPolyMap {
    GenPolyMap::new(MappingScheme::from_pairs(&[(1, 0)]).unwrap(), vec![vec![k]]).unwrap()
}

#[test]
fn parameter_examples() {
    assert_eq!(classify_parameter(Family::Top, c(0.0, 0.0), 1000).unwrap(), PixelClass::AllBounded);
    assert_eq!(classify_parameter(Family::Tricorn, c(0.0, 0.0), 1000).unwrap(), PixelClass::AllBounded);
    assert_eq!(classify_parameter(Family::Tricorn, c(2.0, 0.0), 1000).unwrap(), PixelClass::AllEscape);
    // c₂ = 1: 0, 1, 2, 5, ... escapes under w² + 1, which then carries the other orbit too.
    assert_ne!(classify_parameter(Family::Capture, c(0.0, 1.0), 1000).unwrap(), PixelClass::AllBounded);
    // Capture with a bounded c₂ but c₁ far out: only the first critical orbit escapes.
    assert_eq!(classify_parameter(Family::Capture, c(5.0, 0.0), 1000).unwrap(), PixelClass::PartialEscape);
    assert_eq!(classify_parameter(Family::CubicSlice, c(0.0, 0.0), 1000).unwrap(), PixelClass::AllBounded);
    assert_eq!(classify_parameter(Family::CubicSlice, c(3.0, 0.0), 1000).unwrap(), PixelClass::AllEscape);
}

#[test]
fn rational_family() {
    assert_eq!(classify_parameter(Family::RationalA, c(1.0, 0.0), 100).unwrap(), PixelClass::Excluded);
    // a = 0 is 1/z², whose free critical point is 0 itself.
    assert_eq!(classify_parameter(Family::RationalA, c(0.0, 0.0), 100).unwrap(), PixelClass::Absorbed);
    // a = 3: the fixed point 1 has multiplier (2 − a)/(a − 1) = −1/2 and catches a/2.
    assert_eq!(classify_parameter(Family::RationalA, c(3.0, 0.0), 1000).unwrap(), PixelClass::Other);
    // Critical points ∞ and a/2, and f(1) = 1.
    for a in [c(0.3, 0.2), c(-2.0, 1.0), c(3.0, -0.5)] {
        assert!((rational_a(a, c(1.0, 0.0)) - 1.0).norm() < 1e-14);
        let h = 1e-6;
        let d = (rational_a(a, a / 2.0 + h) - rational_a(a, a / 2.0 - h)) / (2.0 * h);
        assert!(d.norm() < 1e-4);
    }
    let w = Window::new(0.5, 1.5, -0.5, 0.5).unwrap();
    let img = render_parameter_plane(Family::RationalA, &w, 5, 5, 200, Execution::Sequential).unwrap();
    assert_eq!(img.get(2, 2), PixelClass::Excluded);
}

#[test]
fn filled_disk_area() {
    let f = GenPolyMap::base(&MappingScheme::from_pairs(&[(1, 0)]).unwrap());
    let w = Window::square(c(0.0, 0.0), 2.0);
    let n = 256;
    let img = render_dynamical_plane(&f, 0, &w, n, n, 200, Execution::default()).unwrap();
    let ratio = img.count(PixelClass::AllBounded) as f64 / (n * n) as f64;
    let pixel_error = 4.0 * std::f64::consts::PI * 2.0 / (4.0 * n as f64);
    assert!((ratio - std::f64::consts::PI / 16.0).abs() < pixel_error, "{ratio}");
}

#[test]
fn chebyshev_segment_is_thin() {
    let f = quadratic(c(-2.0, 0.0));
    let w = Window::square(c(0.0, 0.0), 2.0);
    let img = render_dynamical_plane(&f, 0, &w, 512, 512, 1000, Execution::default()).unwrap();
    let ratio = img.count(PixelClass::AllBounded) as f64 / (512.0 * 512.0);
    assert!(ratio <= 0.03, "{ratio}");
}

#[test]
fn basilica_largest_components() {
    let f = quadratic(c(-1.0, 0.0));
    let labels = label_basins(&f, &default_windows(&f), 256, 1000, Execution::default()).unwrap();
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for l in &labels.labels[0] {
        if let Label::Basin { component, .. } = l {
            *sizes.entry(*component).or_default() += 1;
        }
    }
    let mut by_size: Vec<(usize, usize)> = sizes.into_iter().map(|(k, v)| (v, k)).collect();
    by_size.sort_unstable_by(|a, b| b.cmp(a));
    let comp = |z: C64| match labels.label_at(0, z) {
        Some(Label::Basin { component, .. }) => component,
        other => panic!("{other:?}"),
    };
    assert_eq!(by_size[0].1, comp(c(0.0, 0.0)));
    // The components of −1 and +1 are mirror images, so second place is shared.
    let size = |k: usize| by_size.iter().find(|p| p.1 == k).unwrap().0;
    assert_eq!(size(comp(c(-1.0, 0.0))), by_size[1].0);
    assert_eq!(size(comp(c(1.0, 0.0))), by_size[1].0);
}

#[test]
fn ppm_format() {
    let img = RasterImage::filled(1, 1, PixelClass::AllEscape);
    assert_eq!(img.ppm_bytes(), b"P6\n1 1\n255\n\xff\xff\xff".to_vec());
    assert_eq!(img.ppm_bytes().len(), 14);
    let dir = std::env::temp_dir().join(format!("schemelab-ppm-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("one.ppm");
    write_ppm(&img, &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), img.ppm_bytes());
    assert!(matches!(write_ppm(&img, &dir.join("missing/x.ppm")), Err(RenderError::Io(_))));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn rendering_is_deterministic_and_mode_independent() {
    for family in Family::ALL {
        let w = family.default_window();
        let a = render_parameter_plane(family, &w, 40, 30, 200, Execution::Parallel).unwrap();
        let b = render_parameter_plane(family, &w, 40, 30, 200, Execution::Sequential).unwrap();
        let again = render_parameter_plane(family, &w, 40, 30, 200, Execution::Parallel).unwrap();
        assert_eq!(a.ppm_bytes(), b.ppm_bytes(), "{}", family.name());
        assert_eq!(a.ppm_bytes(), again.ppm_bytes());
        assert_eq!((a.width, a.height, a.classes.len()), (40, 30, 1200));
    }
}

#[test]
fn bad_inputs() {
    let bad = Window { x0: 1.0, x1: 0.0, y0: 0.0, y1: 1.0 };
    assert!(matches!(
        render_parameter_plane(Family::Top, &bad, 4, 4, 10, Execution::Sequential),
        Err(RenderError::BadWindow(_))
    ));
    let ok = Family::Top.default_window();
    assert!(matches!(
        render_parameter_plane(Family::Top, &ok, 0, 4, 10, Execution::Sequential),
        Err(RenderError::BadResolution)
    ));
    assert!("nope".parse::<Family>().is_err());
    for f in Family::ALL {
        assert_eq!(f.name().parse::<Family>().unwrap(), f);
    }
}

#[test]
fn tricorn_rotation_sample() {
    let eta = C64::from_polar(1.0, std::f64::consts::TAU / 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut agree = 0;
    for _ in 0..500 {
        let p = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let a = classify_parameter(Family::Tricorn, p, 500).unwrap();
        let b = classify_parameter(Family::Tricorn, eta * p, 500).unwrap();
        agree += usize::from(a == b);
    }
    assert!(agree >= 495, "{agree}");
}

#[test]
fn tricorn_cardioid_multiplier() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let t = C64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..std::f64::consts::TAU));
        let p = t / 2.0 - t.conj() * t.conj() / 4.0;
        let f = Family::Tricorn.poly_map(p).unwrap();
        let cls = classify(&f, 1000, f.escape_radius()).unwrap();
        for fate in &cls.fates {
            match fate.fate {
                Fate::Attracted { period, multiplier, .. } => {
                    assert_eq!(period, 2);
                    assert!((multiplier - t * t.conj()).norm() < 1e-6);
                }
                other => panic!("{other:?}"),
            }
        }
    }
}

#[test]
fn product_locus_is_a_square() {
    let inside = |x: f64| (-2.0..=0.25).contains(&x);
    for i in 0..10 {
        for j in 0..10 {
            let x = -2.6 + 0.35 * i as f64 + 0.013;
            let y = -2.6 + 0.35 * j as f64 + 0.021;
            let class = classify_parameter(Family::Product, c(x, y), 1000).unwrap();
            assert_eq!(class == PixelClass::AllBounded, inside(x) && inside(y), "({x}, {y})");
        }
    }
}

proptest! {
    #[test]
    fn top_second_iterate(c1 in -2.0f64..1.0, c2 in -2.0f64..1.0) {
        let f = Family::Top.poly_map(c(c1, c2)).unwrap();
        let g = poly::compose(f.poly(1), f.poly(0));
        let want = [c(c1 * c1 + c2, 0.0), c(0.0, 0.0), c(2.0 * c1, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        prop_assert_eq!(g.len(), 5);
        for k in 0..5 {
            prop_assert!((g[k] - want[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn real_cubics_commute_with_reflection(a in -1.5f64..2.0, b in -2.0f64..2.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let z = c(x, y);
        let plus = Family::RealCubicPlus.poly_map(c(a, b)).unwrap();
        let (_, w) = plus.step(0, z.conj());
        prop_assert!((w - plus.step(0, z).1.conj()).norm() < 1e-12 * (1.0 + w.norm()));
        // In the conjugated chart of −x³ − 3Ax + b the real line becomes the imaginary axis.
        let minus = Family::RealCubicMinus.poly_map(c(a, b)).unwrap();
        let refl = |u: C64| -u.conj();
        let (_, w) = minus.step(0, refl(z));
        prop_assert!((w - refl(minus.step(0, z).1)).norm() < 1e-12 * (1.0 + w.norm()));
        // And it is conjugate to the original map by z ↦ iz.
        let orig = -(c(0.0, 1.0) * z).powi(3) - 3.0 * a * c(0.0, 1.0) * z + b;
        prop_assert!((c(0.0, 1.0) * minus.step(0, z).1 - orig).norm() < 1e-12 * (1.0 + orig.norm()));
    }
}
