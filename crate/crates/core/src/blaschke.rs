//! Finite Blaschke products and the model space of one product per scheme vertex.

use crate::poly::{self, RootError, C64};
use crate::scheme::MappingScheme;
use rand::Rng;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenteringCondition {
    Degree,
    Anchored,
    FixedPointCentered,
    ZerosCentered,
    ZeroInDisk,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlaschkeError {
    #[error("evaluation at a pole")]
    PoleHit,
    #[error("no fixed point inside the disk")]
    NoInteriorFixedPoint,
    #[error("boundary fixed point not found")]
    BoundaryFixedPointMissing,
    #[error("iteration did not converge")]
    NoConvergence,
    #[error("point outside the open unit disk")]
    OutsideDisk,
    #[error("empty point list")]
    Empty,
    #[error("vertex {vertex} violates {condition:?}")]
    CenteringViolation {
        vertex: usize,
        condition: CenteringCondition,
    },
    #[error(transparent)]
    RootFindFailure(#[from] RootError),
    #[error("no admissible radii")]
    NoValidRadii,
}

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const FP_TOL: f64 = 1e-10;

/// `μ_a(z) = k (z − a)/(1 − ā z)` with `k = (1 − ā)/(1 − a)`, so that `μ_a(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: C64,
}

impl Mobius {
    pub fn new(a: C64) -> Result<Self, BlaschkeError> {
        if !(a.norm() < 1.0) {
            return Err(BlaschkeError::OutsideDisk);
        }
        Ok(Mobius { a })
    }

    fn k(&self) -> C64 {
        (ONE - self.a.conj()) / (ONE - self.a)
    }

    pub fn eval(&self, z: C64) -> Result<C64, BlaschkeError> {
        let den = ONE - self.a.conj() * z;
        if den.norm() < 1e-300 {
            return Err(BlaschkeError::PoleHit);
        }
        Ok(self.k() * (z - self.a) / den)
    }

    pub fn derivative(&self, z: C64) -> Result<C64, BlaschkeError> {
        let den = ONE - self.a.conj() * z;
        if den.norm() < 1e-300 {
            return Err(BlaschkeError::PoleHit);
        }
        Ok(self.k() * (1.0 - self.a.norm_sqr()) / (den * den))
    }

    /// Continuous lift of the boundary map, in turns, with `ψ(0) = 0`.
    pub fn lift(&self, theta: f64) -> f64 {
        let a = self.a;
        let z = C64::from_polar(1.0, TAU * theta);
        theta - ((ONE - a).arg() + (ONE - a.conj() * z).arg()) / PI
    }
}

pub fn mobius_eval(a: C64, z: C64) -> Result<C64, BlaschkeError> {
    Mobius::new(a)?.eval(z)
}

/// Disk automorphism `z ↦ (u z + p)/(1 + p̄ u z)` with `|u| = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskAuto {
    pub u: C64,
    pub p: C64,
}

impl DiskAuto {
    /// The automorphism with `h(0) = p`, `h(1) = zeta`.
    pub fn through(p: C64, zeta: C64) -> Self {
        let u = (zeta - p) / (ONE - p.conj() * zeta);
        DiskAuto { u, p }
    }

    pub fn eval(&self, z: C64) -> C64 {
        (self.u * z + self.p) / (ONE + self.p.conj() * self.u * z)
    }

    pub fn inverse(&self, w: C64) -> C64 {
        (w - self.p) / (self.u * (ONE - self.p.conj() * w))
    }
}

/// `β(z) = rotation · Π μ_{a_j}(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeProduct {
    pub rotation: C64,
    pub zeros: Vec<C64>,
}

fn turns(z: C64) -> f64 {
    z.arg() / TAU
}

/// All `θ ∈ [0, 1)` where an increasing `h` with `h(θ + 1) = h(θ) + m` meets `level + ℤ`.
fn level_crossings(h: &dyn Fn(f64) -> f64, level: f64, samples: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let start = h(0.0);
    let period = (h(1.0) - start).round();
    let mut prev = start;
    for i in 1..=samples {
        let t1 = i as f64 / samples as f64;
        // `h(1)` may round just below `start + period`.
        let cur = if i == samples { start + period } else { h(t1) };
        let mut n = (prev - level).floor() + 1.0;
        while level + n <= cur {
            let target = level + n;
            let (mut lo, mut hi) = ((i - 1) as f64 / samples as f64, t1);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if h(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(hi.rem_euclid(1.0));
            n += 1.0;
        }
        prev = cur;
    }
    out.sort_by(f64::total_cmp);
    out
}

impl BlaschkeProduct {
    pub fn new(rotation: C64, zeros: Vec<C64>) -> Result<Self, BlaschkeError> {
        if zeros.is_empty() {
            return Err(BlaschkeError::Empty);
        }
        if zeros.iter().any(|a| !(a.norm() < 1.0)) {
            return Err(BlaschkeError::OutsideDisk);
        }
        Ok(BlaschkeProduct { rotation, zeros })
    }

    pub fn power(d: usize) -> Self {
        BlaschkeProduct {
            rotation: ONE,
            zeros: vec![ZERO; d],
        }
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn eval(&self, z: C64) -> Result<C64, BlaschkeError> {
        let mut w = self.rotation;
        for &a in &self.zeros {
            w *= Mobius { a }.eval(z)?;
        }
        Ok(w)
    }

    pub fn derivative(&self, z: C64) -> Result<C64, BlaschkeError> {
        let vals: Vec<C64> = self
            .zeros
            .iter()
            .map(|&a| Mobius { a }.eval(z))
            .collect::<Result<_, _>>()?;
        let mut total = ZERO;
        for (j, &a) in self.zeros.iter().enumerate() {
            let mut term = Mobius { a }.derivative(z)?;
            for (i, v) in vals.iter().enumerate() {
                if i != j {
                    term *= v;
                }
            }
            total += term;
        }
        Ok(self.rotation * total)
    }

    /// `β = P/Q` as ascending coefficient lists.
    pub fn numerator_denominator(&self) -> (Vec<C64>, Vec<C64>) {
        let mut p = vec![self.rotation];
        let mut q = vec![ONE];
        for &a in &self.zeros {
            let k = Mobius { a }.k();
            p = poly::mul(&p, &[-k * a, k]);
            q = poly::mul(&q, &[ONE, -a.conj()]);
        }
        (p, q)
    }

    /// Interior critical points with multiplicity.
    pub fn critical_points(&self) -> Result<Vec<C64>, BlaschkeError> {
        let d = self.degree();
        if d < 2 {
            return Ok(Vec::new());
        }
        let (p, q) = self.numerator_denominator();
        let mut num = poly::add(
            &poly::mul(&poly::derivative(&p), &q),
            &poly::scale(&poly::mul(&p, &poly::derivative(&q)), -ONE),
        );
        num.truncate(2 * d - 1);
        let roots = poly::roots(&num)?;
        Ok(roots.into_iter().filter(|r| r.norm() < 1.0).collect())
    }

    pub fn interior_fixed_points(&self) -> Result<Vec<C64>, BlaschkeError> {
        let (p, q) = self.numerator_denominator();
        let mut zq = vec![ZERO];
        zq.extend_from_slice(&q);
        let roots = poly::roots(&poly::add(&zq, &poly::scale(&p, -ONE)))?;
        Ok(roots.into_iter().filter(|r| r.norm() < 1.0 - 1e-9).collect())
    }

    /// Continuous increasing lift of the boundary map, `φ(θ + 1) = φ(θ) + d`.
    pub fn lift(&self, theta: f64) -> f64 {
        turns(self.rotation) + self.zeros.iter().map(|&a| Mobius { a }.lift(theta)).sum::<f64>()
    }

    fn samples(&self) -> usize {
        (64 * self.degree()).max(4096)
    }

    /// Angles (turns in `[0, 1)`) of the `d − 1` boundary fixed points.
    pub fn boundary_fixed_angles(&self) -> Result<Vec<f64>, BlaschkeError> {
        if self.interior_fixed_points()?.is_empty() {
            return Err(BlaschkeError::NoInteriorFixedPoint);
        }
        Ok(level_crossings(&|t| self.lift(t) - t, 0.0, self.samples()))
    }

    pub fn boundary_fixed_points(&self) -> Result<Vec<C64>, BlaschkeError> {
        Ok(self
            .boundary_fixed_angles()?
            .into_iter()
            .map(|t| C64::from_polar(1.0, TAU * t))
            .collect())
    }

    /// Boundary solutions of `β(z) = w`, as turns.
    pub fn boundary_preimage_angles(&self, w_turns: f64) -> Vec<f64> {
        level_crossings(&|t| self.lift(t), w_turns, self.samples())
    }

    /// Degree of `β` restricted to the circle, by the argument principle.
    pub fn circle_winding(&self) -> Result<i64, BlaschkeError> {
        let mut n = self.samples();
        loop {
            let mut total = 0.0;
            let mut max_step: f64 = 0.0;
            let mut prev = self.eval(ONE)?;
            for i in 1..=n {
                let cur = self.eval(C64::from_polar(1.0, TAU * i as f64 / n as f64))?;
                let step = (cur / prev).arg();
                max_step = max_step.max(step.abs());
                total += step;
                prev = cur;
            }
            if max_step < 1.0 || n > 1 << 22 {
                return Ok((total / TAU).round() as i64);
            }
            n *= 2;
        }
    }

    /// Digits `a_k` with `β^k(z)` in the arc `A_{a_k}` cut out by the preimages of the
    /// first boundary fixed point.
    pub fn circle_itinerary(&self, z: C64, n: usize) -> Result<Vec<usize>, BlaschkeError> {
        let fixed = self.boundary_fixed_angles()?;
        let &t0 = fixed.first().ok_or(BlaschkeError::BoundaryFixedPointMissing)?;
        let base = self.lift(t0);
        let d = self.degree();
        let mut t = turns(z).rem_euclid(1.0);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let mut off = (t - t0).rem_euclid(1.0);
            if off > 1.0 - 1e-12 {
                off = 0.0;
            }
            let digit = (self.lift(t0 + off) - base).floor() as i64;
            out.push(digit.clamp(0, d as i64 - 1) as usize);
            t = self.lift(t0 + off).rem_euclid(1.0);
        }
        Ok(out)
    }

    pub fn is_fixed_point_centered(&self) -> bool {
        self.eval(ZERO).is_ok_and(|w| w.norm() < FP_TOL)
    }

    pub fn zero_sum(&self) -> C64 {
        self.zeros.iter().sum()
    }
}

/// Root of `Σ (z_j − w)/(1 − w̄ z_j) = 0` by damped Newton.
pub fn conformal_barycenter(points: &[C64]) -> Result<C64, BlaschkeError> {
    if points.is_empty() {
        return Err(BlaschkeError::Empty);
    }
    if points.iter().any(|z| !(z.norm() < 1.0)) {
        return Err(BlaschkeError::OutsideDisk);
    }
    let residual = |w: C64| -> C64 {
        points
            .iter()
            .map(|&z| (z - w) / (ONE - w.conj() * z))
            .sum()
    };
    let mut w = points.iter().sum::<C64>() / points.len() as f64;
    let mut g = residual(w);
    for _ in 0..100 {
        if g.norm() < 1e-15 * points.len() as f64 {
            return Ok(w);
        }
        let mut a = ZERO;
        let mut bc = ZERO;
        for &z in points {
            let den = ONE - w.conj() * z;
            a -= ONE / den;
            bc += (z - w) * z / (den * den);
        }
        let det = a.norm_sqr() - bc.norm_sqr();
        if det.abs() < 1e-300 {
            return Err(BlaschkeError::NoConvergence);
        }
        let dw = (-g * a.conj() + bc * g.conj()) / det;
        let mut step = 1.0;
        loop {
            let cand = w + dw * step;
            if cand.norm() < 1.0 {
                let gc = residual(cand);
                if gc.norm() < g.norm() {
                    w = cand;
                    g = gc;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-12 {
                return if g.norm() < 1e-12 {
                    Ok(w)
                } else {
                    Err(BlaschkeError::NoConvergence)
                };
            }
        }
    }
    if g.norm() < 1e-12 {
        Ok(w)
    } else {
        Err(BlaschkeError::NoConvergence)
    }
}

/// Conjugates `h⁻¹ ∘ β ∘ h` with `h(0)` the interior fixed point and `h(1)` a boundary fixed point.
pub fn fixed_point_center(b: &BlaschkeProduct) -> Result<Vec<BlaschkeProduct>, BlaschkeError> {
    let p = *b
        .interior_fixed_points()?
        .first()
        .ok_or(BlaschkeError::NoInteriorFixedPoint)?;
    let (num, den) = b.numerator_denominator();
    let pre = poly::roots(&poly::add(&num, &poly::scale(&den, -p)))?;
    let mut out = Vec::new();
    for zeta in b.boundary_fixed_points()? {
        let h = DiskAuto::through(p, zeta);
        let zeros = pre.iter().map(|&a| h.inverse(a)).collect();
        out.push(BlaschkeProduct { rotation: ONE, zeros });
    }
    Ok(out)
}

/// Compositions `β ∘ h` with `h(1)` a solution of `β(z) = 1` and zeros summing to 0.
pub fn zeros_center(b: &BlaschkeProduct) -> Result<Vec<BlaschkeProduct>, BlaschkeError> {
    let w = conformal_barycenter(&b.zeros)?;
    let mut out = Vec::new();
    for t in b.boundary_preimage_angles(0.0) {
        let h = DiskAuto::through(w, C64::from_polar(1.0, TAU * t));
        let zeros = b.zeros.iter().map(|&a| h.inverse(a)).collect();
        out.push(BlaschkeProduct { rotation: ONE, zeros });
    }
    Ok(out)
}

/// One Blaschke product per vertex: an element of the model space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMap {
    pub scheme: MappingScheme,
    pub products: Vec<BlaschkeProduct>,
}

impl ModelMap {
    pub fn new(scheme: MappingScheme, products: Vec<BlaschkeProduct>) -> Result<Self, BlaschkeError> {
        let m = ModelMap { scheme, products };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), BlaschkeError> {
        let s = &self.scheme;
        let violation = |vertex, condition| BlaschkeError::CenteringViolation { vertex, condition };
        if self.products.len() != s.len() {
            return Err(violation(self.products.len().min(s.len()), CenteringCondition::Degree));
        }
        for (v, b) in self.products.iter().enumerate() {
            if b.degree() != s.degree(v) as usize {
                return Err(violation(v, CenteringCondition::Degree));
            }
            if b.zeros.iter().any(|a| !(a.norm() < 1.0)) {
                return Err(violation(v, CenteringCondition::ZeroInDisk));
            }
            if (b.rotation - ONE).norm() > FP_TOL {
                return Err(violation(v, CenteringCondition::Anchored));
            }
            if s.is_periodic(v) {
                if !b.is_fixed_point_centered() {
                    return Err(violation(v, CenteringCondition::FixedPointCentered));
                }
            } else if b.zero_sum().norm() > FP_TOL {
                return Err(violation(v, CenteringCondition::ZerosCentered));
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn eval(&self, s: usize, z: C64) -> Result<(usize, C64), BlaschkeError> {
        Ok((self.scheme.image(s), self.products[s].eval(z)?))
    }
}

/// `β₀(s, z) = (F(s), z^{d(s)})`.
pub fn center_map(s: &MappingScheme) -> ModelMap {
    let products = (0..s.len())
        .map(|v| BlaschkeProduct::power(s.degree(v) as usize))
        .collect();
    ModelMap {
        scheme: s.clone(),
        products,
    }
}

pub fn model_dimension(s: &MappingScheme) -> usize {
    2 * s.total_weight() as usize
}

fn random_in_disk<R: Rng>(rng: &mut R, radius: f64) -> C64 {
    C64::from_polar(radius * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>())
}

/// Random element of the model space: fixed-point centered on cycles, zeros centered on trees.
pub fn random_model_map<R: Rng>(s: &MappingScheme, rng: &mut R) -> ModelMap {
    let products = (0..s.len())
        .map(|v| {
            let d = s.degree(v) as usize;
            let zeros = if d == 1 {
                vec![ZERO]
            } else if s.is_periodic(v) {
                let mut z = vec![ZERO];
                z.extend((1..d).map(|_| random_in_disk(rng, 0.8)));
                z
            } else {
                let mut z: Vec<C64> = (1..d).map(|_| random_in_disk(rng, 0.9 / d as f64)).collect();
                let sum: C64 = z.iter().sum();
                z.push(-sum);
                z
            };
            BlaschkeProduct { rotation: ONE, zeros }
        })
        .collect();
    ModelMap {
        scheme: s.clone(),
        products,
    }
}

/// `q(F(s)) = β_s(q(s))`, with the angles in turns.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMarking {
    pub theta: Vec<f64>,
}

impl BoundaryMarking {
    pub fn q(&self, s: usize) -> C64 {
        C64::from_polar(1.0, TAU * self.theta[s])
    }

    pub fn residual(&self, m: &ModelMap) -> f64 {
        (0..m.scheme.len())
            .map(|v| {
                m.products[v]
                    .eval(self.q(v))
                    .map_or(f64::INFINITY, |w| (w - self.q(m.scheme.image(v))).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// All boundary markings: fixed points of the first-return map on each cycle, then
/// every preimage choice along the trees.
pub fn enumerate_boundary_markings(m: &ModelMap) -> Result<Vec<BoundaryMarking>, BlaschkeError> {
    let s = &m.scheme;
    let n = s.len();
    let dec = s.cycle_decomposition();
    let mut partial: Vec<Vec<Option<f64>>> = vec![vec![None; n]];
    for cyc in &dec.cycles {
        let composite = |t: f64| {
            let mut x = t;
            for &v in cyc {
                x = m.products[v].lift(x);
            }
            x
        };
        let deg: usize = cyc.iter().map(|&v| s.degree(v) as usize).product();
        let fixed = level_crossings(&|t| composite(t) - t, 0.0, (64 * deg).max(4096));
        let mut next = Vec::new();
        for p in &partial {
            for &t in &fixed {
                let mut q = p.clone();
                let mut x = t;
                for &v in cyc {
                    q[v] = Some(x);
                    x = m.products[v].lift(x).rem_euclid(1.0);
                }
                next.push(q);
            }
        }
        partial = next;
    }
    let mut tails: Vec<usize> = (0..n).filter(|&v| dec.tail_depth[v] > 0).collect();
    tails.sort_by_key(|&v| dec.tail_depth[v]);
    for v in tails {
        let b = &m.products[v];
        let mut next = Vec::new();
        for p in &partial {
            let target = p[s.image(v)].expect("image marked first");
            for t in b.boundary_preimage_angles(target) {
                let mut q = p.clone();
                q[v] = Some(t);
                next.push(q);
            }
        }
        partial = next;
    }
    let out: Vec<BoundaryMarking> = partial
        .into_iter()
        .map(|p| BoundaryMarking {
            theta: p.into_iter().map(|t| t.expect("marked")).collect(),
        })
        .collect();
    let worst = out.iter().map(|q| q.residual(m)).fold(0.0, f64::max);
    if !(worst < 1e-10) {
        return Err(BlaschkeError::RootFindFailure(RootError::NoConvergence {
            sweeps: 200,
            residual: worst,
        }));
    }
    Ok(out)
}

/// `max_{|z| = R} |β(z)|`: 720 samples, then golden-section refinement near the best.
pub fn max_modulus(b: &BlaschkeProduct, radius: f64) -> f64 {
    let f = |t: f64| b.eval(C64::from_polar(radius, TAU * t)).map_or(f64::INFINITY, |w| w.norm());
    let n = 720;
    let (mut best_t, mut best) = (0.0, f(0.0));
    for i in 1..n {
        let t = i as f64 / n as f64;
        let v = f(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (best_t - 1.0 / n as f64, best_t + 1.0 / n as f64);
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let c = lo + g * (hi - lo);
        if f(a) > f(c) {
            hi = c;
        } else {
            lo = a;
        }
    }
    best.max(f(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Radii {
    /// `(r(s), R(s))` per vertex.
    pub radii: Vec<(f64, f64)>,
    pub margin: f64,
}

fn critical_radius(b: &BlaschkeProduct) -> Result<f64, BlaschkeError> {
    Ok(b.critical_points()?.iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// `0 < r < R < 1`, critical points inside `r(s)`, `β_s(D_R) ⊂ D_{r(F(s))}`.
pub fn radii_valid(m: &ModelMap, radii: &[(f64, f64)]) -> bool {
    let s = &m.scheme;
    radii.len() == s.len()
        && (0..s.len()).all(|v| {
            let (r, big) = radii[v];
            0.0 < r
                && r < big
                && big < 1.0
                && critical_radius(&m.products[v]).is_ok_and(|c| c < r)
                && max_modulus(&m.products[v], big) < radii[s.image(v)].0
        })
}

/// Monotone relaxation from below for margins `0.1, 0.01, 1e−3, 1e−4`.
pub fn choose_radii(m: &ModelMap) -> Result<Radii, BlaschkeError> {
    let s = &m.scheme;
    let n = s.len();
    let crit: Vec<f64> = m
        .products
        .iter()
        .map(critical_radius)
        .collect::<Result<_, _>>()?;
    'margins: for tau in [0.1, 0.01, 1e-3, 1e-4] {
        let mut r: Vec<f64> = crit.iter().map(|c| c + tau).collect();
        for _ in 0..100_000 {
            let mut changed = false;
            for v in 0..n {
                let big = r[v] + tau;
                if big >= 1.0 {
                    continue 'margins;
                }
                let need = max_modulus(&m.products[v], big) + tau;
                let u = s.image(v);
                if need > r[u] + 1e-13 {
                    r[u] = need;
                    changed = true;
                }
            }
            if !changed {
                let radii: Vec<(f64, f64)> = r.iter().map(|&x| (x, x + tau)).collect();
                if radii_valid(m, &radii) {
                    return Ok(Radii { radii, margin: tau });
                }
                continue 'margins;
            }
        }
    }
    Err(BlaschkeError::NoValidRadii)
}
