//! Symmetry groups of a scheme and antilinear involutions commuting with the base map.
//!
//! Roots of unity are stored as exact rotation numbers in `[0, 1)`.

use crate::dynamics::GenPolyMap;
use crate::poly::C64;
use crate::scheme::MappingScheme;
use nalgebra::DMatrix;
use num_rational::Ratio;
use petgraph::unionfind::UnionFind;
use std::f64::consts::TAU;

/// Rotation number `p/q` standing for `e^{2πi p/q}`.
pub type Turn = Ratio<i64>;

pub fn turn(p: i64, q: i64) -> Turn {
    reduce_turn(Ratio::new(p, q))
}

/// Representative in `[0, 1)`.
pub fn reduce_turn(t: Turn) -> Turn {
    t - t.floor()
}

pub fn turn_to_complex(t: Turn) -> C64 {
    let x = *t.numer() as f64 / *t.denom() as f64;
    C64::from_polar(1.0, TAU * x)
}

fn zero() -> Turn {
    Ratio::from_integer(0)
}

/// `g(s, z) = (s, ρ_s z)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymmetryElement {
    pub rho: Vec<Turn>,
}

impl SymmetryElement {
    pub fn identity(n: usize) -> Self {
        SymmetryElement { rho: vec![zero(); n] }
    }

    pub fn compose(&self, other: &Self) -> Self {
        SymmetryElement {
            rho: self
                .rho
                .iter()
                .zip(&other.rho)
                .map(|(a, b)| reduce_turn(a + b))
                .collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        SymmetryElement {
            rho: self.rho.iter().map(|a| reduce_turn(-a)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rho.iter().all(|r| *r == zero())
    }

    /// `ρ_s^{d(s)} = ρ_{F(s)}` for every vertex.
    pub fn satisfies(&self, s: &MappingScheme) -> bool {
        self.rho.len() == s.len()
            && (0..s.len()).all(|v| {
                reduce_turn(self.rho[v] * s.degree(v) as i64) == self.rho[s.image(v)]
            })
    }

    /// True when `g` commutes with every map in the family.
    pub fn acts_trivially(&self, s: &MappingScheme) -> bool {
        (0..s.len()).all(|v| {
            (0..s.weight(v) as i64)
                .all(|j| reduce_turn(self.rho[v] * j - self.rho[s.image(v)]) == zero())
        })
    }
}

/// `γ(s, z) = (ι(s), α(s) z̄)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AntilinearInvolution {
    pub vertex_involution: Vec<usize>,
    pub alpha: Vec<Turn>,
}

impl AntilinearInvolution {
    pub fn apply(&self, s: usize, z: C64) -> (usize, C64) {
        (self.vertex_involution[s], turn_to_complex(self.alpha[s]) * z.conj())
    }

    pub fn is_valid(&self, s: &MappingScheme) -> bool {
        let iota = &self.vertex_involution;
        iota.len() == s.len()
            && self.alpha.len() == s.len()
            && (0..s.len()).all(|v| {
                iota[iota[v]] == v
                    && s.degree(iota[v]) == s.degree(v)
                    && s.image(iota[v]) == iota[s.image(v)]
                    && self.alpha[iota[v]] == self.alpha[v]
                    && reduce_turn(self.alpha[v] * s.degree(v) as i64) == self.alpha[s.image(v)]
            })
    }
}

/// Leading-coefficient signs of an equivalent real form with `γ(s, z) = (ι(s), z̄)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedSchemeForm {
    pub sigma: Vec<i8>,
    pub vertex_involution: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealFormClass {
    pub representative: AntilinearInvolution,
    pub members: usize,
    pub signs: SignedSchemeForm,
}

/// `Π_components (d₁···d_k − 1)·d_{k+1}···d_ℓ`.
pub fn gamma_order(s: &MappingScheme) -> u64 {
    let dec = s.cycle_decomposition();
    let mut order = 1u64;
    for set in s.component_vertex_sets() {
        let cyc = dec
            .cycles
            .iter()
            .find(|c| set.contains(&c[0]))
            .expect("component has a cycle");
        let d_cycle: u64 = cyc.iter().map(|&v| s.degree(v) as u64).product();
        let d_tail: u64 = set
            .iter()
            .filter(|v| !cyc.contains(v))
            .map(|&v| s.degree(v) as u64)
            .product();
        order *= (d_cycle - 1) * d_tail;
    }
    order
}

/// All solutions of `ρ_s^{d(s)} = ρ_{F(s)}`, sorted.
pub fn enumerate_gamma(s: &MappingScheme) -> Vec<SymmetryElement> {
    let n = s.len();
    let dec = s.cycle_decomposition();
    let mut partial: Vec<Vec<Option<Turn>>> = vec![vec![None; n]];
    for cyc in &dec.cycles {
        let d: i64 = cyc.iter().map(|&v| s.degree(v) as i64).product();
        let mut next = Vec::new();
        for p in &partial {
            for j in 0..d - 1 {
                let mut q = p.clone();
                let mut r = turn(j, d - 1);
                for &v in cyc {
                    q[v] = Some(r);
                    r = reduce_turn(r * s.degree(v) as i64);
                }
                next.push(q);
            }
        }
        partial = next;
    }
    let mut tails: Vec<usize> = (0..n).filter(|&v| dec.tail_depth[v] > 0).collect();
    tails.sort_by_key(|&v| dec.tail_depth[v]);
    for v in tails {
        let d = s.degree(v) as i64;
        let img = s.image(v);
        let mut next = Vec::new();
        for p in &partial {
            let target = p[img].expect("image assigned first");
            for k in 0..d {
                let mut q = p.clone();
                q[v] = Some(reduce_turn((target + k) / d));
                next.push(q);
            }
        }
        partial = next;
    }
    let mut out: Vec<SymmetryElement> = partial
        .into_iter()
        .map(|p| SymmetryElement {
            rho: p.into_iter().map(|r| r.expect("assigned")).collect(),
        })
        .collect();
    out.sort();
    out
}

/// `ρ = ±1` at free vertices of degree two, `+1` elsewhere.
pub fn gamma0(s: &MappingScheme) -> Vec<SymmetryElement> {
    let free: Vec<usize> = s
        .cycle_decomposition()
        .free_vertices
        .into_iter()
        .filter(|&v| s.degree(v) == 2)
        .collect();
    let mut out = Vec::with_capacity(1 << free.len());
    for mask in 0u64..(1 << free.len()) {
        let mut g = SymmetryElement::identity(s.len());
        for (i, &v) in free.iter().enumerate() {
            if mask >> i & 1 == 1 {
                g.rho[v] = turn(1, 2);
            }
        }
        out.push(g);
    }
    out.sort();
    out
}

/// Weight-preserving bijections commuting with `F`; `perm[v]` is the image of `v`.
pub fn aut(s: &MappingScheme) -> Vec<Vec<usize>> {
    let n = s.len();
    let dec = s.cycle_decomposition();
    let indeg: Vec<usize> = s.preimages().iter().map(Vec::len).collect();
    let compatible = |a: usize, b: usize| {
        s.weight(a) == s.weight(b)
            && indeg[a] == indeg[b]
            && dec.tail_depth[a] == dec.tail_depth[b]
    };
    let mut out = Vec::new();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        v: usize,
        s: &MappingScheme,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
        compatible: &dyn Fn(usize, usize) -> bool,
    ) {
        let n = s.len();
        if v == n {
            out.push(perm.clone());
            return;
        }
        for t in 0..n {
            if used[t] || !compatible(v, t) {
                continue;
            }
            perm[v] = t;
            let consistent = (0..=v).all(|u| {
                let fu = s.image(u);
                fu > v || perm[fu] == s.image(perm[u])
            });
            if consistent {
                used[t] = true;
                go(v + 1, s, perm, used, out, compatible);
                used[t] = false;
            }
        }
        perm[v] = usize::MAX;
    }
    go(0, s, &mut perm, &mut used, &mut out, &compatible);
    out.sort();
    out
}

/// Pairs `(φ, ρ)` acting by `(s, z) ↦ (φ(s), ρ_s z)`.
pub fn extended_group(s: &MappingScheme) -> Vec<(Vec<usize>, SymmetryElement)> {
    let gamma = enumerate_gamma(s);
    let mut out = Vec::new();
    for phi in aut(s) {
        for g in &gamma {
            out.push((phi.clone(), g.clone()));
        }
    }
    out
}

/// `f^g(s, z) = ((ρ_s z)^d + Σ a_j (ρ_s z)^j) / ρ_{F(s)}`.
pub fn act_on_map(g: &SymmetryElement, f: &GenPolyMap) -> GenPolyMap {
    let s = f.scheme();
    let coeffs = (0..s.len())
        .map(|v| {
            f.coeffs(v)
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    a * turn_to_complex(reduce_turn(g.rho[v] * j as i64 - g.rho[s.image(v)]))
                })
                .collect()
        })
        .collect();
    GenPolyMap::new(s.clone(), coeffs).expect("same shape")
}

/// `γ ∘ f ∘ γ`.
pub fn conjugate_by_involution(inv: &AntilinearInvolution, f: &GenPolyMap) -> GenPolyMap {
    let s = f.scheme();
    let coeffs = (0..s.len())
        .map(|v| {
            let u = inv.vertex_involution[v];
            f.coeffs(u)
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    a.conj()
                        * turn_to_complex(reduce_turn(
                            inv.alpha[s.image(v)] - inv.alpha[v] * j as i64,
                        ))
                })
                .collect()
        })
        .collect();
    GenPolyMap::new(s.clone(), coeffs).expect("same shape")
}

/// All antilinear involutions commuting with the base map.
pub fn enumerate_antilinear(s: &MappingScheme) -> Vec<AntilinearInvolution> {
    let gamma = enumerate_gamma(s);
    let mut out = Vec::new();
    for iota in aut(s) {
        if (0..s.len()).any(|v| iota[iota[v]] != v) {
            continue;
        }
        for g in &gamma {
            if (0..s.len()).all(|v| g.rho[iota[v]] == g.rho[v]) {
                out.push(AntilinearInvolution {
                    vertex_involution: iota.clone(),
                    alpha: g.rho.clone(),
                });
            }
        }
    }
    out.sort();
    out
}

fn sigma_for(s: &MappingScheme, b: &[Turn]) -> Vec<i8> {
    (0..s.len())
        .map(|v| {
            let t = reduce_turn(b[v] * s.degree(v) as i64 - b[s.image(v)]);
            if t == zero() {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Signs `σ(s) β(F(s)) = β(s)^{d(s)}` with `β(s)² = α(s)`, `β(s') = β(s)`.
/// Among the admissible square roots, the one with fewest `−1` signs is used.
pub fn sign_normalize(s: &MappingScheme, inv: &AntilinearInvolution) -> SignedSchemeForm {
    let iota = &inv.vertex_involution;
    let base: Vec<Turn> = inv.alpha.iter().map(|a| a / 2).collect();
    let orbits: Vec<usize> = (0..s.len()).filter(|&v| iota[v] >= v).collect();
    let mut best = sigma_for(s, &base);
    if orbits.len() <= 16 {
        for mask in 1u32..(1 << orbits.len()) {
            let mut b = base.clone();
            for (i, &v) in orbits.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    b[v] = reduce_turn(b[v] + turn(1, 2));
                    b[iota[v]] = b[v];
                }
            }
            let sig = sigma_for(s, &b);
            let neg = |x: &Vec<i8>| x.iter().filter(|&&c| c < 0).count();
            if (neg(&sig), std::cmp::Reverse(sig.clone())) < (neg(&best), std::cmp::Reverse(best.clone())) {
                best = sig;
            }
        }
    }
    SignedSchemeForm {
        sigma: best,
        vertex_involution: iota.clone(),
    }
}

fn conjugate_involution(
    inv: &AntilinearInvolution,
    phi: &[usize],
    g: &SymmetryElement,
) -> AntilinearInvolution {
    let n = phi.len();
    let mut phi_inv = vec![0; n];
    for (v, &t) in phi.iter().enumerate() {
        phi_inv[t] = v;
    }
    let iota: Vec<usize> = (0..n)
        .map(|v| phi_inv[inv.vertex_involution[phi[v]]])
        .collect();
    let alpha = (0..n)
        .map(|v| reduce_turn(inv.alpha[phi[v]] - g.rho[v] - g.rho[iota[v]]))
        .collect();
    AntilinearInvolution {
        vertex_involution: iota,
        alpha,
    }
}

/// Classes of involutions under composition with `Γ₀` and conjugation by the
/// extended group; representatives are the least members.
pub fn real_form_classes(s: &MappingScheme) -> Vec<RealFormClass> {
    let invs = enumerate_antilinear(s);
    let index = |x: &AntilinearInvolution| invs.binary_search(x).ok();
    let mut uf = UnionFind::<usize>::new(invs.len());
    let g0 = gamma0(s);
    let ext = extended_group(s);
    for (i, inv) in invs.iter().enumerate() {
        for g in &g0 {
            let moved = AntilinearInvolution {
                vertex_involution: inv.vertex_involution.clone(),
                alpha: inv
                    .alpha
                    .iter()
                    .zip(&g.rho)
                    .map(|(a, r)| reduce_turn(a - r))
                    .collect(),
            };
            if let Some(j) = index(&moved) {
                uf.union(i, j);
            }
        }
        for (phi, g) in &ext {
            if let Some(j) = index(&conjugate_involution(inv, phi, g)) {
                uf.union(i, j);
            }
        }
    }
    let mut classes: Vec<RealFormClass> = Vec::new();
    let mut root_of_class: Vec<usize> = Vec::new();
    for (i, inv) in invs.iter().enumerate() {
        let r = uf.find(i);
        match root_of_class.iter().position(|&x| x == r) {
            Some(k) => classes[k].members += 1,
            None => {
                root_of_class.push(r);
                classes.push(RealFormClass {
                    representative: inv.clone(),
                    members: 1,
                    signs: sign_normalize(s, inv),
                });
            }
        }
    }
    classes
}

/// Real dimension of the set of maps commuting with `γ`.
pub fn fixed_space_dimension(s: &MappingScheme, inv: &AntilinearInvolution) -> usize {
    let mut slots = Vec::new();
    for v in 0..s.len() {
        for j in 0..s.weight(v) as usize {
            slots.push((v, j));
        }
    }
    let n = slots.len();
    if n == 0 {
        return 0;
    }
    let pos = |v: usize, j: usize| slots.iter().position(|&x| x == (v, j)).expect("slot");
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for (k, &(v, j)) in slots.iter().enumerate() {
        let u = inv.vertex_involution[v];
        let a = turn_to_complex(reduce_turn(inv.alpha[s.image(v)] - inv.alpha[v] * j as i64));
        let l = pos(u, j);
        m[(2 * k, 2 * l)] = a.re;
        m[(2 * k, 2 * l + 1)] = a.im;
        m[(2 * k + 1, 2 * l)] = a.im;
        m[(2 * k + 1, 2 * l + 1)] = -a.re;
    }
    let m = m - DMatrix::<f64>::identity(2 * n, 2 * n);
    2 * n - m.rank(1e-9)
}

/// Dimension of the standard real form `γ(s, z) = (s, z̄)`.
pub fn real_form_dimension(s: &MappingScheme) -> usize {
    let inv = AntilinearInvolution {
        vertex_involution: (0..s.len()).collect(),
        alpha: vec![zero(); s.len()],
    };
    fixed_space_dimension(s, &inv)
}
