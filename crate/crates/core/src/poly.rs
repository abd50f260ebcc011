//! Dense complex polynomials (ascending coefficients) and an Aberth–Ehrlich root finder.

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("root finder did not converge after {sweeps} sweeps (residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("zero polynomial has no well-defined roots")]
    ZeroPolynomial,
}

pub const ROOT_TOL: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 200;

/// Horner evaluation of `c[0] + c[1] z + ... + c[n] z^n`.
pub fn eval(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Value and first derivative in one Horner pass.
pub fn eval_d(c: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

pub fn derivative(c: &[C64]) -> Vec<C64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(j, &a)| a * j as f64)
        .collect()
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            a.get(i).copied().unwrap_or_default() + b.get(i).copied().unwrap_or_default()
        })
        .collect()
}

pub fn scale(a: &[C64], k: C64) -> Vec<C64> {
    a.iter().map(|&x| x * k).collect()
}

/// `p(q(z))`.
pub fn compose(p: &[C64], q: &[C64]) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::new();
    for &a in p.iter().rev() {
        out = add(&mul(&out, q), &[a]);
    }
    out
}

/// Monic polynomial with the given roots.
pub fn from_roots(roots: &[C64]) -> Vec<C64> {
    roots.iter().fold(vec![C64::new(1.0, 0.0)], |acc, &r| {
        mul(&acc, &[-r, C64::new(1.0, 0.0)])
    })
}

/// Drops trailing coefficients that are exactly zero.
pub fn trim(c: &[C64]) -> &[C64] {
    let mut n = c.len();
    while n > 0 && c[n - 1] == C64::new(0.0, 0.0) {
        n -= 1;
    }
    &c[..n]
}

/// All complex roots with multiplicity. Exact zero roots are split off first,
/// the remainder goes through Aberth–Ehrlich.
pub fn roots(c: &[C64]) -> Result<Vec<C64>, RootError> {
    let c = trim(c);
    if c.is_empty() {
        return Err(RootError::ZeroPolynomial);
    }
    let zeros = c.iter().take_while(|a| **a == C64::new(0.0, 0.0)).count();
    let mut out = vec![C64::new(0.0, 0.0); zeros];
    out.extend(aberth(&c[zeros..])?);
    Ok(out)
}

fn aberth(c: &[C64]) -> Result<Vec<C64>, RootError> {
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    let monic: Vec<C64> = c.iter().map(|&a| a / lead).collect();
    if n == 1 {
        return Ok(vec![-monic[0]]);
    }
    let dp = derivative(&monic);
    // Fujiwara-type bound for the initial circle.
    let radius = (0..n)
        .map(|j| monic[j].norm().powf(1.0 / (n - j) as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            C64::from_polar(radius, t)
        })
        .collect();
    let mut done = vec![false; n];
    for _ in 0..MAX_SWEEPS {
        let mut moved = false;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let p = eval(&monic, z[i]);
            if p == C64::new(0.0, 0.0) {
                done[i] = true;
                continue;
            }
            let ratio = p / eval(&dp, z[i]);
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff != C64::new(0.0, 0.0) {
                        s += diff.inv();
                    }
                }
            }
            let w = ratio / (C64::new(1.0, 0.0) - ratio * s);
            if !w.is_finite() {
                z[i] += C64::new(ROOT_TOL, ROOT_TOL);
                moved = true;
                continue;
            }
            z[i] -= w;
            if w.norm() <= ROOT_TOL * (1.0 + z[i].norm()) {
                done[i] = true;
            } else {
                moved = true;
            }
        }
        if !moved {
            return Ok(z);
        }
    }
    // Clustered roots converge slowly; accept when the backward error is tiny.
    let scale: f64 = monic.iter().map(|a| a.norm()).sum();
    let residual = z
        .iter()
        .map(|&r| eval(&monic, r).norm() / (scale * (1.0 + r.norm()).powi(n as i32)))
        .fold(0.0, f64::max);
    if residual < 1e-12 {
        Ok(z)
    } else {
        Err(RootError::NoConvergence {
            sweeps: MAX_SWEEPS,
            residual,
        })
    }
}

/// Groups numerically coincident roots, returning (mean location, multiplicity).
pub fn cluster(roots: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let mut groups: Vec<(C64, usize)> = Vec::new();
    for &r in roots {
        match groups
            .iter_mut()
            .find(|(c, _)| (*c - r).norm() <= tol * (1.0 + r.norm()))
        {
            Some((c, m)) => {
                *c = (*c * *m as f64 + r) / (*m as f64 + 1.0);
                *m += 1;
            }
            None => groups.push((r, 1)),
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn quadratic_roots() {
        let mut r = roots(&[c(-2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0] + c(2f64.sqrt(), 0.0)).norm() < 1e-13);
        assert!((r[1] - c(2f64.sqrt(), 0.0)).norm() < 1e-13);
    }

    #[test]
    fn round_trip_from_roots() {
        let want = [c(0.3, 0.1), c(-0.5, 0.7), c(1.2, -0.4), c(-0.9, -0.9), c(0.0, 2.0)];
        let p = from_roots(&want);
        let got = roots(&p).unwrap();
        for w in want {
            assert!(got.iter().any(|g| (*g - w).norm() < 1e-10));
        }
    }

    #[test]
    fn exact_zero_roots_are_split() {
        let r = roots(&[c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(r, vec![c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn double_root_clusters() {
        let p = from_roots(&[c(0.5, 0.5), c(0.5, 0.5), c(-1.0, 0.0)]);
        let g = cluster(&roots(&p).unwrap(), 1e-6);
        assert_eq!(g.len(), 2);
        assert!(g.iter().any(|(z, m)| *m == 2 && (*z - c(0.5, 0.5)).norm() < 1e-7));
    }

    #[test]
    fn compose_matches_eval() {
        let p = [c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)];
        let q = [c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let pq = compose(&p, &q);
        let z = c(0.3, -0.7);
        assert!((eval(&pq, z) - eval(&p, eval(&q, z))).norm() < 1e-14);
    }
}
