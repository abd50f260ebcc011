//! Generalized polynomial maps `f(s, z) = (F(s), f_s(z))` with monic centered `f_s`.

use crate::parallel::{self, Execution};
use crate::poly::{self, RootError, C64};
use crate::scheme::{MappingScheme, SchemeError};
use crate::window::Window;
use petgraph::unionfind::UnionFind;
use std::collections::BTreeMap;
use thiserror::Error;

pub const OVERFLOW: f64 = 1e150;
pub const DEFAULT_MAX_ITER: usize = 1000;
pub const CYCLE_TOL: f64 = 1e-9;
pub const DEFAULT_RESOLUTION: usize = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("vertex {vertex}: expected {expected} coefficients, found {found}")]
    BadCoefficients {
        vertex: usize,
        expected: usize,
        found: usize,
    },
    #[error("orbit overflowed at vertex {vertex}")]
    Overflow { vertex: usize },
    #[error(transparent)]
    RootFindFailure(#[from] RootError),
    #[error("cycle is superattracting")]
    SuperattractingCycle,
    #[error("point is not in the basin of the cycle")]
    NotInBasin,
    #[error("map is not hyperbolic with bounded critical orbits")]
    NotHyperbolic,
    #[error("a critical or postcritical point lies within 2 pixels of a component boundary")]
    ResolutionTooCoarse,
    #[error("a critical or postcritical point lies outside the window")]
    WindowTooSmall,
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// One monic centered polynomial per vertex, coefficients `a_0..a_{d-2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenPolyMap {
    scheme: MappingScheme,
    coeffs: Vec<Vec<C64>>,
    polys: Vec<Vec<C64>>,
    dpolys: Vec<Vec<C64>>,
    ddpolys: Vec<Vec<C64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub vertex: usize,
    pub z: C64,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fate {
    Escaped { step: usize },
    Attracted {
        cycle: usize,
        period: usize,
        multiplier: C64,
    },
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalFate {
    pub vertex: usize,
    pub location: C64,
    pub multiplicity: u32,
    pub fate: Fate,
}

/// Attracting cycle in `|S| × C`; `points[k+1] = f(points[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractingCycle {
    pub points: Vec<(usize, C64)>,
    pub multiplier: C64,
}

impl AttractingCycle {
    pub fn period(&self) -> usize {
        self.points.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub fates: Vec<CriticalFate>,
    pub cycles: Vec<AttractingCycle>,
}

impl Classification {
    pub fn all_attracted(&self) -> bool {
        self.fates
            .iter()
            .all(|f| matches!(f.fate, Fate::Attracted { .. }))
    }
}

/// Fiberwise holomorphic dynamics on `|S| × C`.
pub trait FiberMap {
    fn step(&self, s: usize, z: C64) -> (usize, C64);
    /// `(f_s(z), f_s'(z), f_s''(z))`.
    fn jet(&self, s: usize, z: C64) -> (C64, C64, C64);
}

fn full_poly(c: &[C64]) -> Vec<C64> {
    let mut p = c.to_vec();
    if !p.is_empty() {
        p.push(C64::new(0.0, 0.0));
    }
    p.push(C64::new(1.0, 0.0));
    if c.is_empty() {
        // Degree one: the identity.
        p = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    }
    p
}

impl GenPolyMap {
    pub fn new(scheme: MappingScheme, coeffs: Vec<Vec<C64>>) -> Result<Self, DynamicsError> {
        if coeffs.len() != scheme.len() {
            return Err(DynamicsError::BadCoefficients {
                vertex: coeffs.len().min(scheme.len()),
                expected: scheme.len(),
                found: coeffs.len(),
            });
        }
        for (s, c) in coeffs.iter().enumerate() {
            let expected = scheme.weight(s) as usize;
            if c.len() != expected {
                return Err(DynamicsError::BadCoefficients {
                    vertex: s,
                    expected,
                    found: c.len(),
                });
            }
        }
        let polys: Vec<Vec<C64>> = coeffs.iter().map(|c| full_poly(c)).collect();
        let dpolys: Vec<Vec<C64>> = polys.iter().map(|p| poly::derivative(p)).collect();
        let ddpolys = dpolys.iter().map(|p| poly::derivative(p)).collect();
        Ok(GenPolyMap {
            scheme,
            coeffs,
            polys,
            dpolys,
            ddpolys,
        })
    }

    /// The base map `f₀(s, z) = (F(s), z^{d(s)})`.
    pub fn base(scheme: &MappingScheme) -> Self {
        let coeffs = (0..scheme.len())
            .map(|s| vec![C64::new(0.0, 0.0); scheme.weight(s) as usize])
            .collect();
        Self::new(scheme.clone(), coeffs).expect("base map coefficients")
    }

    pub fn scheme(&self) -> &MappingScheme {
        &self.scheme
    }

    pub fn coeffs(&self, s: usize) -> &[C64] {
        &self.coeffs[s]
    }

    pub fn all_coeffs(&self) -> &[Vec<C64>] {
        &self.coeffs
    }

    /// Full ascending coefficient list of `f_s`.
    pub fn poly(&self, s: usize) -> &[C64] {
        &self.polys[s]
    }

    pub fn degree(&self, s: usize) -> u32 {
        self.scheme.degree(s)
    }

    pub fn eval(&self, s: usize, z: C64) -> Result<(usize, C64), DynamicsError> {
        let w = poly::eval(&self.polys[s], z);
        if !w.is_finite() || w.norm() > OVERFLOW {
            return Err(DynamicsError::Overflow { vertex: s });
        }
        Ok((self.scheme.image(s), w))
    }

    pub fn derivative(&self, s: usize, z: C64) -> C64 {
        poly::eval(&self.dpolys[s], z)
    }

    pub fn orbit(&self, s: usize, z: C64, n: usize) -> Result<Vec<(usize, C64)>, DynamicsError> {
        let mut out = Vec::with_capacity(n + 1);
        let mut cur = (s, z);
        out.push(cur);
        for _ in 0..n {
            cur = self.eval(cur.0, cur.1)?;
            out.push(cur);
        }
        Ok(out)
    }

    /// Roots of each `f_s'`, clustered, with multiplicities summing to `w(s)`.
    pub fn critical_points(&self) -> Result<Vec<CriticalPoint>, DynamicsError> {
        let mut out = Vec::new();
        for s in 0..self.scheme.len() {
            if self.scheme.weight(s) == 0 {
                continue;
            }
            let roots = poly::roots(&self.dpolys[s])?;
            for (z, m) in poly::cluster(&roots, 1e-6) {
                out.push(CriticalPoint {
                    vertex: s,
                    z,
                    multiplicity: m as u32,
                });
            }
        }
        Ok(out)
    }

    /// `max(2, 2(1 + max_s Σ|a_j|))`.
    pub fn escape_radius(&self) -> f64 {
        let m = self
            .coeffs
            .iter()
            .map(|c| c.iter().map(|a| a.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        f64::max(2.0, 2.0 * (1.0 + m))
    }
}

impl FiberMap for GenPolyMap {
    fn step(&self, s: usize, z: C64) -> (usize, C64) {
        (self.scheme.image(s), poly::eval(&self.polys[s], z))
    }

    fn jet(&self, s: usize, z: C64) -> (C64, C64, C64) {
        (
            poly::eval(&self.polys[s], z),
            poly::eval(&self.dpolys[s], z),
            poly::eval(&self.ddpolys[s], z),
        )
    }
}

fn close(a: (usize, C64), b: (usize, C64), tol: f64) -> bool {
    a.0 == b.0 && (a.1 - b.1).norm() <= tol * (1.0 + a.1.norm())
}

/// `f^p` at a point, with derivative and second derivative of the composite.
fn composite_jet<M: FiberMap>(m: &M, s: usize, z: C64, p: usize) -> (usize, C64, C64, C64) {
    let (mut cs, mut cz) = (s, z);
    let mut d1 = C64::new(1.0, 0.0);
    let mut d2 = C64::new(0.0, 0.0);
    for _ in 0..p {
        let (v, f1, f2) = m.jet(cs, cz);
        d2 = f2 * d1 * d1 + f1 * d2;
        d1 *= f1;
        cs = m.step(cs, cz).0;
        cz = v;
    }
    (cs, cz, d1, d2)
}

/// Newton on `f^p(z) = z`, returning the refined point if it converges nearby.
fn polish<M: FiberMap>(m: &M, s: usize, z0: C64, p: usize) -> C64 {
    let mut z = z0;
    for _ in 0..60 {
        let (_, w, d1, _) = composite_jet(m, s, z, p);
        let denom = d1 - C64::new(1.0, 0.0);
        if denom.norm() < 1e-14 {
            break;
        }
        let dz = (w - z) / denom;
        z -= dz;
        if !z.is_finite() {
            return z0;
        }
        if dz.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    if (z - z0).norm() < 1e-6 * (1.0 + z0.norm()) {
        z
    } else {
        z0
    }
}

fn trace_cycle<M: FiberMap>(m: &M, s: usize, z: C64, p: usize) -> AttractingCycle {
    let mut points = Vec::with_capacity(p);
    let mut lambda = C64::new(1.0, 0.0);
    let mut cur = (s, z);
    for _ in 0..p {
        points.push(cur);
        let (_, d1, _) = m.jet(cur.0, cur.1);
        lambda *= d1;
        cur = m.step(cur.0, cur.1);
    }
    AttractingCycle {
        points,
        multiplier: lambda,
    }
}

/// Warmup, Brent cycle detection, Newton polish and multiplier for one orbit.
fn settle<M: FiberMap>(
    m: &M,
    start: (usize, C64),
    max_iter: usize,
    radius: f64,
) -> Result<AttractingCycle, Fate> {
    let mut cur = start;
    for n in 0..10 * max_iter {
        if !(cur.1.norm() <= radius) {
            return Err(Fate::Escaped { step: n });
        }
        cur = m.step(cur.0, cur.1);
    }
    let mut power = 1;
    let mut lam = 1;
    let mut tortoise = cur;
    let mut hare = m.step(cur.0, cur.1);
    let mut steps = 0;
    while !close(tortoise, hare, CYCLE_TOL) {
        if power == lam {
            tortoise = hare;
            power *= 2;
            lam = 0;
        }
        hare = m.step(hare.0, hare.1);
        lam += 1;
        steps += 1;
        if !(hare.1.norm() <= radius) {
            return Err(Fate::Escaped {
                step: 10 * max_iter + steps,
            });
        }
        if steps > max_iter {
            return Err(Fate::Undecided);
        }
    }
    let z = polish(m, tortoise.0, tortoise.1, lam);
    let mut p = lam;
    // Brent with a tolerance can overshoot to a multiple of the period.
    for q in 1..lam {
        if lam % q == 0 {
            let (s2, w, _, _) = composite_jet(m, tortoise.0, z, q);
            if s2 == tortoise.0 && (w - z).norm() <= 1e-8 * (1.0 + z.norm()) {
                p = q;
                break;
            }
        }
    }
    let cyc = trace_cycle(m, tortoise.0, z, p);
    if cyc.multiplier.norm() >= 1.0 - CYCLE_TOL {
        return Err(Fate::Undecided);
    }
    Ok(cyc)
}

fn find_cycle(cycles: &[AttractingCycle], c: &AttractingCycle) -> Option<usize> {
    cycles.iter().position(|k| {
        k.period() == c.period()
            && k.points
                .iter()
                .any(|&pt| close(pt, c.points[0], 1e-7))
    })
}

/// Fate of every critical point; cycle ids are shared between critical points.
pub fn classify(f: &GenPolyMap, max_iter: usize, escape_radius: f64) -> Result<Classification, DynamicsError> {
    let crit = f.critical_points()?;
    let mut cycles: Vec<AttractingCycle> = Vec::new();
    let mut fates = Vec::with_capacity(crit.len());
    for cp in crit {
        let fate = match settle(f, (cp.vertex, cp.z), max_iter, escape_radius) {
            Ok(cyc) => {
                let id = match find_cycle(&cycles, &cyc) {
                    Some(id) => id,
                    None => {
                        cycles.push(cyc);
                        cycles.len() - 1
                    }
                };
                Fate::Attracted {
                    cycle: id,
                    period: cycles[id].period(),
                    multiplier: cycles[id].multiplier,
                }
            }
            Err(fate) => fate,
        };
        fates.push(CriticalFate {
            vertex: cp.vertex,
            location: cp.z,
            multiplicity: cp.multiplicity,
            fate,
        });
    }
    Ok(Classification { fates, cycles })
}

pub fn is_hyperbolic_bounded(f: &GenPolyMap) -> bool {
    classify(f, DEFAULT_MAX_ITER, f.escape_radius()).is_ok_and(|c| c.all_attracted())
}

/// Linearizing coordinate for an attracting cycle: `κ(f(z)) = ν κ(z)`, `ν^p = λ`.
/// Near `points[0]`, `κ(z) = u + b u²` with `u = z − points[0]`, before scaling.
#[derive(Debug, Clone)]
pub struct Koenigs<'a, M: FiberMap> {
    map: &'a M,
    base: (usize, C64),
    lambda: C64,
    nu: C64,
    b: C64,
    scale: C64,
    max_iter: usize,
}

const KOENIGS_RADIUS: f64 = 1e-5;

impl<'a, M: FiberMap> Koenigs<'a, M> {
    pub fn new(map: &'a M, cycle: &AttractingCycle, max_iter: usize) -> Result<Self, DynamicsError> {
        let lambda = cycle.multiplier;
        if lambda.norm() < 1e-12 {
            return Err(DynamicsError::SuperattractingCycle);
        }
        let base = cycle.points[0];
        let p = cycle.period();
        let (_, _, d1, d2) = composite_jet(map, base.0, base.1, p);
        let b = (d2 / 2.0) / (d1 * (C64::new(1.0, 0.0) - d1));
        Ok(Koenigs {
            map,
            base,
            lambda: d1,
            nu: d1.powf(1.0 / p as f64),
            b,
            scale: C64::new(1.0, 0.0),
            max_iter,
        })
    }

    pub fn multiplier(&self) -> C64 {
        self.lambda
    }

    /// The per-step factor `ν`.
    pub fn nu(&self) -> C64 {
        self.nu
    }

    /// Unscaled value and the number of steps taken to reach the linear regime.
    pub fn raw(&self, s: usize, z: C64) -> Result<(C64, usize), DynamicsError> {
        let mut cur = (s, z);
        for n in 0..=self.max_iter {
            let u = cur.1 - self.base.1;
            if cur.0 == self.base.0 && u.norm() < KOENIGS_RADIUS {
                let local = u + self.b * u * u;
                return Ok((local / self.nu.powi(n as i32), n));
            }
            if !(cur.1.norm() < 1e12) {
                break;
            }
            cur = self.map.step(cur.0, cur.1);
        }
        Err(DynamicsError::NotInBasin)
    }

    /// Rescales so that `κ(s, z) = 1`.
    pub fn normalize_at(mut self, s: usize, z: C64) -> Result<Self, DynamicsError> {
        let (k, _) = self.raw(s, z)?;
        if k.norm() == 0.0 {
            return Err(DynamicsError::NotInBasin);
        }
        self.scale = k.inv();
        Ok(self)
    }

    pub fn eval(&self, s: usize, z: C64) -> Result<C64, DynamicsError> {
        Ok(self.raw(s, z)?.0 * self.scale)
    }
}

/// Kœnigs value of `(s, z)` for `cycle`, normalized to 1 at the first critical point it attracts.
pub fn koenigs(f: &GenPolyMap, cycle: usize, s: usize, z: C64) -> Result<C64, DynamicsError> {
    let cls = classify(f, DEFAULT_MAX_ITER, f.escape_radius())?;
    let cyc = cls.cycles.get(cycle).ok_or(DynamicsError::NotInBasin)?;
    let first = cls
        .fates
        .iter()
        .find(|fa| matches!(fa.fate, Fate::Attracted { cycle: c, .. } if c == cycle))
        .ok_or(DynamicsError::NotInBasin)?;
    Koenigs::new(f, cyc, 100 * DEFAULT_MAX_ITER)?
        .normalize_at(first.vertex, first.location)?
        .eval(s, z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleCoordinates {
    pub cycle: usize,
    pub multiplier: C64,
    /// `(critical point index, κ)`; the first entry is 1.
    pub kappas: Vec<(usize, C64)>,
}

/// Multipliers and normalized Kœnigs values of the critical points, per cycle.
pub fn local_coordinates(f: &GenPolyMap) -> Result<Vec<CycleCoordinates>, DynamicsError> {
    let cls = classify(f, DEFAULT_MAX_ITER, f.escape_radius())?;
    if !cls.all_attracted() {
        return Err(DynamicsError::NotHyperbolic);
    }
    let mut out = Vec::new();
    for (id, cyc) in cls.cycles.iter().enumerate() {
        let members: Vec<usize> = (0..cls.fates.len())
            .filter(|&i| matches!(cls.fates[i].fate, Fate::Attracted { cycle, .. } if cycle == id))
            .collect();
        let first = &cls.fates[members[0]];
        let k = Koenigs::new(f, cyc, 100 * DEFAULT_MAX_ITER)?.normalize_at(first.vertex, first.location)?;
        let kappas = members
            .iter()
            .map(|&i| Ok((i, k.eval(cls.fates[i].vertex, cls.fates[i].location)?)))
            .collect::<Result<_, DynamicsError>>()?;
        out.push(CycleCoordinates {
            cycle: id,
            multiplier: cyc.multiplier,
            kappas,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitRelation {
    /// Two critical points coincide (or one is multiple).
    RepeatedCriticalPoint { first: usize, second: usize },
    /// `f^a(c_first) = f^b(c_second)` with `b − a = shift`.
    IntersectingOrbits {
        first: usize,
        second: usize,
        shift: i64,
    },
    /// A critical orbit is periodic or eventually periodic.
    PeriodicCriticalOrbit { critical: usize },
}

/// Detects a critical orbit relation; `None` means the critical points are distinct
/// with disjoint, infinite orbits.
pub fn critical_orbit_relation(f: &GenPolyMap, tol: f64) -> Result<Option<OrbitRelation>, DynamicsError> {
    let cls = classify(f, DEFAULT_MAX_ITER, f.escape_radius())?;
    if !cls.all_attracted() {
        return Err(DynamicsError::NotHyperbolic);
    }
    let fates = &cls.fates;
    for i in 0..fates.len() {
        if fates[i].multiplicity > 1 {
            return Ok(Some(OrbitRelation::RepeatedCriticalPoint {
                first: i,
                second: i,
            }));
        }
        for j in i + 1..fates.len() {
            if fates[i].vertex == fates[j].vertex && (fates[i].location - fates[j].location).norm() < tol {
                return Ok(Some(OrbitRelation::RepeatedCriticalPoint { first: i, second: j }));
            }
        }
    }
    for (id, cyc) in cls.cycles.iter().enumerate() {
        let members: Vec<usize> = (0..fates.len())
            .filter(|&i| matches!(fates[i].fate, Fate::Attracted { cycle, .. } if cycle == id))
            .collect();
        if cyc.multiplier.norm() < tol {
            let on_cycle = members.iter().copied().find(|&i| {
                cyc.points
                    .iter()
                    .any(|&(s, p)| s == fates[i].vertex && (p - fates[i].location).norm() < tol.sqrt())
            });
            return Ok(Some(OrbitRelation::PeriodicCriticalOrbit {
                critical: on_cycle.unwrap_or(members[0]),
            }));
        }
        let k = Koenigs::new(f, cyc, 100 * DEFAULT_MAX_ITER)?;
        let p = cyc.period() as i64;
        let mut vals = Vec::new();
        for &i in &members {
            let (kap, n) = k.raw(fates[i].vertex, fates[i].location)?;
            vals.push((i, kap, (-(n as i64)).rem_euclid(p)));
        }
        let scale = vals.iter().map(|v| v.1.norm()).fold(0.0, f64::max);
        for &(i, kap, _) in &vals {
            if kap.norm() <= tol * scale {
                return Ok(Some(OrbitRelation::PeriodicCriticalOrbit { critical: i }));
            }
        }
        let ln_nu = k.nu().norm().ln();
        for a in 0..vals.len() {
            for b in a + 1..vals.len() {
                let (i, ki, pi) = vals[a];
                let (j, kj, pj) = vals[b];
                let r = ki / kj;
                let shift = (r.norm().ln() / ln_nu).round();
                let target = k.nu().powi(shift as i32);
                let phase_ok = (pi - pj - shift as i64).rem_euclid(p) == 0;
                if phase_ok && (r / target - 1.0).norm() < tol {
                    return Ok(Some(OrbitRelation::IntersectingOrbits {
                        first: i,
                        second: j,
                        shift: shift as i64,
                    }));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Escaped,
    Undecided,
    Basin {
        cycle: usize,
        phase: usize,
        component: usize,
    },
}

/// Per-vertex pixel grids of basin labels.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinLabels {
    pub windows: Vec<Window>,
    pub width: usize,
    pub height: usize,
    /// `labels[s][row * width + col]`.
    pub labels: Vec<Vec<Label>>,
    pub cycles: Vec<AttractingCycle>,
    pub components: usize,
}

impl BasinLabels {
    pub fn label_at(&self, s: usize, z: C64) -> Option<Label> {
        let (i, j) = self.windows[s].pixel_of(z, self.width, self.height)?;
        Some(self.labels[s][j * self.width + i])
    }
}

/// Default per-vertex windows: squares of the escape radius about 0.
pub fn default_windows(f: &GenPolyMap) -> Vec<Window> {
    let r = f.escape_radius();
    vec![Window::square(C64::new(0.0, 0.0), r); f.scheme().len()]
}

const CAPTURE_RADIUS: f64 = 1e-4;

fn pixel_fate(
    f: &GenPolyMap,
    cycles: &[AttractingCycle],
    radius: f64,
    max_iter: usize,
    s: usize,
    z: C64,
) -> Option<(usize, usize)> {
    let mut cur = (s, z);
    for n in 0..=max_iter {
        if !(cur.1.norm() <= radius) {
            return None;
        }
        for (id, cyc) in cycles.iter().enumerate() {
            for (j, &(cs, p)) in cyc.points.iter().enumerate() {
                if cs == cur.0 && (cur.1 - p).norm() < CAPTURE_RADIUS {
                    let per = cyc.period();
                    let phase = (j + per - n % per) % per;
                    return Some((id, phase));
                }
            }
        }
        cur = f.step(cur.0, cur.1);
    }
    Some((usize::MAX, 0))
}

/// Labels pixels by attracting cycle and phase, then splits each label into
/// 4-connected components.
pub fn label_basins(
    f: &GenPolyMap,
    windows: &[Window],
    resolution: usize,
    max_iter: usize,
    exec: Execution,
) -> Result<BasinLabels, DynamicsError> {
    let radius = f.escape_radius();
    let cls = classify(f, max_iter, radius)?;
    let cycles = cls.cycles;
    let (w, h) = (resolution, resolution);
    let n = f.scheme().len();
    let mut raw: Vec<Vec<Option<(usize, usize)>>> = Vec::with_capacity(n);
    for s in 0..n {
        let win = windows[s];
        let rows = parallel::map_range(exec, h, |j| {
            (0..w)
                .map(|i| pixel_fate(f, &cycles, radius, max_iter, s, win.pixel_center(i, j, w, h)))
                .collect::<Vec<_>>()
        });
        raw.push(rows.into_iter().flatten().collect());
    }
    let total = n * w * h;
    let mut uf = UnionFind::<usize>::new(total);
    for s in 0..n {
        let grid = &raw[s];
        let off = s * w * h;
        for j in 0..h {
            for i in 0..w {
                let k = j * w + i;
                let Some(lab) = grid[k] else { continue };
                if lab.0 == usize::MAX {
                    continue;
                }
                if i + 1 < w && grid[k + 1] == Some(lab) {
                    uf.union(off + k, off + k + 1);
                }
                if j + 1 < h && grid[k + w] == Some(lab) {
                    uf.union(off + k, off + k + w);
                }
            }
        }
    }
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut labels = Vec::with_capacity(n);
    for s in 0..n {
        let off = s * w * h;
        let grid: Vec<Label> = raw[s]
            .iter()
            .enumerate()
            .map(|(k, lab)| match lab {
                None => Label::Escaped,
                Some((c, _)) if *c == usize::MAX => Label::Undecided,
                Some((cycle, phase)) => {
                    let root = uf.find(off + k);
                    let next = ids.len();
                    let component = *ids.entry(root).or_insert(next);
                    Label::Basin {
                        cycle: *cycle,
                        phase: *phase,
                        component,
                    }
                }
            })
            .collect();
        labels.push(grid);
    }
    Ok(BasinLabels {
        windows: windows.to_vec(),
        width: w,
        height: h,
        labels,
        cycles,
        components: ids.len(),
    })
}

fn component_at(labels: &BasinLabels, s: usize, z: C64) -> Result<usize, DynamicsError> {
    let (w, h) = (labels.width, labels.height);
    let (i, j) = labels.windows[s]
        .pixel_of(z, w, h)
        .ok_or(DynamicsError::WindowTooSmall)?;
    let grid = &labels.labels[s];
    let Label::Basin { component, .. } = grid[j * w + i] else {
        return Err(DynamicsError::ResolutionTooCoarse);
    };
    for jj in j.saturating_sub(2)..=(j + 2).min(h - 1) {
        for ii in i.saturating_sub(2)..=(i + 2).min(w - 1) {
            match grid[jj * w + ii] {
                Label::Basin { component: c, .. } if c == component => {}
                _ => return Err(DynamicsError::ResolutionTooCoarse),
            }
        }
    }
    Ok(component)
}

/// Full and reduced schemes read off a basin labeling.
pub fn extract_schemes(f: &GenPolyMap, labels: &BasinLabels) -> Result<(MappingScheme, MappingScheme), DynamicsError> {
    let crit = f.critical_points()?;
    let mut image: BTreeMap<usize, usize> = BTreeMap::new();
    let mut weight: BTreeMap<usize, u32> = BTreeMap::new();
    for cp in &crit {
        let mut comp = component_at(labels, cp.vertex, cp.z)?;
        *weight.entry(comp).or_insert(0) += cp.multiplicity;
        let mut cur = (cp.vertex, cp.z);
        for _ in 0..=labels.components {
            cur = f.eval(cur.0, cur.1)?;
            let next = component_at(labels, cur.0, cur.1)?;
            match image.insert(comp, next) {
                Some(prev) if prev != next => return Err(DynamicsError::ResolutionTooCoarse),
                Some(_) => break,
                None => {}
            }
            if image.contains_key(&next) {
                break;
            }
            comp = next;
        }
    }
    let verts: Vec<usize> = image.keys().copied().collect();
    let index: BTreeMap<usize, usize> = verts.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut pairs = Vec::with_capacity(verts.len());
    for c in &verts {
        let img = *index.get(&image[c]).ok_or(DynamicsError::ResolutionTooCoarse)?;
        pairs.push((weight.get(c).copied().unwrap_or(0), img));
    }
    let full = MappingScheme::from_pairs(&pairs)?;
    let reduced = full.reduce();
    Ok((full, reduced))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(c: C64) -> GenPolyMap {
        GenPolyMap::new(MappingScheme::from_pairs(&[(1, 0)]).unwrap(), vec![vec![c]]).unwrap()
    }

    #[test]
    fn base_map_is_power_map() {
        let s = MappingScheme::from_pairs(&[(2, 1), (1, 0)]).unwrap();
        let f = GenPolyMap::base(&s);
        let z = C64::new(0.3, 0.4);
        let (t, w) = f.eval(0, z).unwrap();
        assert_eq!(t, 1);
        assert!((w - z * z * z).norm() < 1e-15);
    }

    #[test]
    fn basilica_orbit() {
        let f = quad(C64::new(-1.0, 0.0));
        let o = f.orbit(0, C64::new(0.0, 0.0), 4).unwrap();
        let re: Vec<f64> = o.iter().map(|p| p.1.re).collect();
        assert_eq!(re, vec![0.0, -1.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn escape_and_attraction() {
        let cls = classify(&quad(C64::new(1.0, 0.0)), 100, 4.0).unwrap();
        assert_eq!(cls.fates[0].fate, Fate::Escaped { step: 3 });
        let cls = classify(&quad(C64::new(0.0, 0.0)), 100, 2.0).unwrap();
        assert!(matches!(cls.fates[0].fate, Fate::Attracted { period: 1, multiplier, .. } if multiplier.norm() == 0.0));
    }

    #[test]
    fn overflow_is_reported() {
        let f = quad(C64::new(0.0, 0.0));
        assert_eq!(
            f.eval(0, C64::new(1e80, 0.0)),
            Err(DynamicsError::Overflow { vertex: 0 })
        );
    }
}
