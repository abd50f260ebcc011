//! Fixed-point multipliers of quadratic rational maps and cubic polynomials,
//! and the totally marked coordinates `x₁ + x₂ + x₃ + x₁x₂x₃ = 0`.

use crate::poly::{self, C64};
use thiserror::Error;

pub const VARIETY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModuliError {
    #[error("multiplier equal to 1")]
    DegenerateMultiplier,
    #[error("point is off the variety (residual {residual:e})")]
    OffVariety { residual: f64 },
    #[error("cross-ratio pole at x = -1")]
    CrossRatioPole,
    #[error("fixed points collide (alpha * beta = 1)")]
    CrashedFixedPoints,
    #[error("fixed point {index} is a root of the denominator")]
    FixedPointOnPoleSet { index: usize },
    #[error("expected {expected} fixed points, found {found}")]
    BadFixedPointCount { expected: usize, found: usize },
}

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Multipliers at the three marked fixed points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierTriple(pub [C64; 3]);

/// Coordinates on `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotallyMarkedPoint(pub [C64; 3]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(C64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(self) -> Option<C64> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }
}

/// `p/q` with ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap {
    pub num: Vec<C64>,
    pub den: Vec<C64>,
}

impl RationalMap {
    pub fn eval(&self, z: C64) -> C64 {
        poly::eval(&self.num, z) / poly::eval(&self.den, z)
    }

    pub fn derivative(&self, z: C64) -> C64 {
        let (p, dp) = poly::eval_d(&self.num, z);
        let (q, dq) = poly::eval_d(&self.den, z);
        (dp * q - p * dq) / (q * q)
    }
}

/// `αβγ − α − β − γ + 2`.
pub fn m2fm_residual(l: [C64; 3]) -> C64 {
    let [a, b, g] = l;
    a * b * g - a - b - g + 2.0
}

/// `3 − 2(α + β + γ) + (αβ + αγ + βγ)`.
pub fn cubic_relation_residual(l: [C64; 3]) -> C64 {
    let [a, b, g] = l;
    3.0 - 2.0 * (a + b + g) + (a * b + a * g + b * g)
}

/// `Σ 1/(1 − λ_j)`.
pub fn index_sum(lambdas: &[C64]) -> Result<C64, ModuliError> {
    lambdas.iter().try_fold(C64::new(0.0, 0.0), |acc, &l| {
        if (ONE - l).norm() < 1e-300 {
            Err(ModuliError::DegenerateMultiplier)
        } else {
            Ok(acc + 1.0 / (ONE - l))
        }
    })
}

pub fn qtm_residual(x: [C64; 3]) -> C64 {
    x[0] + x[1] + x[2] + x[0] * x[1] * x[2]
}

fn scale_of(v: &[C64]) -> f64 {
    1.0 + v.iter().map(|z| z.norm()).fold(0.0, f64::max).powi(3)
}

/// `λ_k = 1 + x_h x_j`.
pub fn lambdas_from_x(x: TotallyMarkedPoint) -> Result<MultiplierTriple, ModuliError> {
    let x = x.0;
    let residual = qtm_residual(x).norm();
    if residual > VARIETY_TOL * scale_of(&x) {
        return Err(ModuliError::OffVariety { residual });
    }
    Ok(MultiplierTriple([
        ONE + x[1] * x[2],
        ONE + x[0] * x[2],
        ONE + x[0] * x[1],
    ]))
}

/// Both preimages `±x` of a multiplier triple, from `x_h² = 1 − λ_j λ_k`.
pub fn x_from_lambdas(l: MultiplierTriple) -> Result<[TotallyMarkedPoint; 2], ModuliError> {
    let l = l.0;
    let residual = m2fm_residual(l).norm();
    if residual > VARIETY_TOL * scale_of(&l) {
        return Err(ModuliError::OffVariety { residual });
    }
    let sq = [ONE - l[1] * l[2], ONE - l[0] * l[2], ONE - l[0] * l[1]];
    let h = (0..3)
        .max_by(|&a, &b| sq[a].norm().total_cmp(&sq[b].norm()))
        .expect("three entries");
    let mut x = [C64::new(0.0, 0.0); 3];
    if sq[h].norm() > 1e-300 {
        let (j, k) = ((h + 1) % 3, (h + 2) % 3);
        x[h] = sq[h].sqrt();
        // λ_k = 1 + x_h x_j and λ_j = 1 + x_h x_k.
        x[j] = (l[k] - ONE) / x[h];
        x[k] = (l[j] - ONE) / x[h];
    }
    let back = lambdas_from_x(TotallyMarkedPoint(x))?.0;
    let err = (0..3).map(|i| (back[i] - l[i]).norm()).fold(0.0, f64::max);
    if err > 1e-8 * scale_of(&l) {
        return Err(ModuliError::OffVariety { residual: err });
    }
    Ok([TotallyMarkedPoint(x), TotallyMarkedPoint([-x[0], -x[1], -x[2]])])
}

/// `r_h = (1 − x_h)/(1 + x_h)`.
pub fn cross_ratios(x: TotallyMarkedPoint) -> Result<[C64; 3], ModuliError> {
    let mut r = [C64::new(0.0, 0.0); 3];
    for (i, &xi) in x.0.iter().enumerate() {
        let den = ONE + xi;
        if den.norm() < 1e-300 {
            return Err(ModuliError::CrossRatioPole);
        }
        r[i] = (ONE - xi) / den;
    }
    Ok(r)
}

fn check_crash(alpha: C64, beta: C64) -> Result<(), ModuliError> {
    if (alpha * beta - ONE).norm() < 1e-12 {
        Err(ModuliError::CrashedFixedPoints)
    } else {
        Ok(())
    }
}

/// `f(z) = z (z + α)/(β z + 1)`: fixed points 0 (multiplier α) and ∞ (multiplier β).
pub fn normal_form(alpha: C64, beta: C64) -> Result<RationalMap, ModuliError> {
    check_crash(alpha, beta)?;
    Ok(RationalMap {
        num: vec![C64::new(0.0, 0.0), alpha, ONE],
        den: vec![ONE, beta],
    })
}

/// Roots of `β z² + 2z + α`: `c₁ = −α/(1 + x)`, `c₂ = −(1 + x)/β` with `x = √(1 − αβ)`.
pub fn critical_points_nf(alpha: C64, beta: C64) -> Result<[SpherePoint; 2], ModuliError> {
    check_crash(alpha, beta)?;
    let x = (ONE - alpha * beta).sqrt();
    let c1 = SpherePoint::Finite(-alpha / (ONE + x));
    let c2 = if beta.norm() == 0.0 {
        SpherePoint::Infinity
    } else {
        SpherePoint::Finite(-(ONE + x) / beta)
    };
    Ok([c1, c2])
}

/// `(1 − α)/(1 − β)`.
pub fn third_fixed_point(alpha: C64, beta: C64) -> Result<SpherePoint, ModuliError> {
    check_crash(alpha, beta)?;
    if (ONE - beta).norm() == 0.0 {
        return Ok(SpherePoint::Infinity);
    }
    Ok(SpherePoint::Finite((ONE - alpha) / (ONE - beta)))
}

/// `γ = (α + β − 2)/(αβ − 1)`.
pub fn third_multiplier(alpha: C64, beta: C64) -> Result<C64, ModuliError> {
    check_crash(alpha, beta)?;
    Ok((alpha + beta - 2.0) / (alpha * beta - ONE))
}

/// `p = z q − Π (z − z_j)` for monic `q` of degree `d` and `d + 1` fixed points.
pub fn from_fixed_point_data(q: &[C64], fixed: &[C64]) -> Result<RationalMap, ModuliError> {
    let d = poly::trim(q).len().saturating_sub(1);
    if fixed.len() != d + 1 {
        return Err(ModuliError::BadFixedPointCount {
            expected: d + 1,
            found: fixed.len(),
        });
    }
    let lead = q[d];
    let q: Vec<C64> = q[..=d].iter().map(|c| c / lead).collect();
    for (index, &z) in fixed.iter().enumerate() {
        if poly::eval(&q, z).norm() < 1e-12 {
            return Err(ModuliError::FixedPointOnPoleSet { index });
        }
    }
    let mut zq = vec![C64::new(0.0, 0.0)];
    zq.extend_from_slice(&q);
    let mut p = poly::add(&zq, &poly::scale(&poly::from_roots(fixed), -ONE));
    p.truncate(d + 1);
    Ok(RationalMap { num: p, den: q })
}
