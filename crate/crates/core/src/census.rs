//! Counting and listing reduced schemes by total weight.

use crate::parallel::{self, Execution};
use crate::scheme::MappingScheme;
use std::collections::BTreeMap;
use thiserror::Error;

pub const DEFAULT_CAP: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CensusError {
    #[error("weight {weight} exceeds the configured cap {cap}")]
    CapExceeded { weight: u32, cap: u32 },
    #[error("weight must be at least 1")]
    ZeroWeight,
}

/// A rooted tree; node 0 is the root (weight 0), every other node has a positive weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedTree {
    pub nodes: Vec<(Option<usize>, u32)>,
}

impl WeightedTree {
    pub fn weight(&self) -> u32 {
        self.nodes.iter().map(|n| n.1).sum()
    }

    pub fn trunks(&self) -> usize {
        self.nodes.iter().filter(|n| n.0 == Some(0)).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CensusRow {
    pub w: u32,
    pub n_trees: u64,
    pub n1_trees: u64,
    pub n_connected: u64,
    pub n_total: u64,
}

fn binom_multiset(n: u64, k: u64) -> u64 {
    // C(n + k - 1, k)
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n + i) as u128 / (i + 1) as u128;
    }
    r as u64
}

/// Number of multisets of total size `w`, given `kinds[n]` kinds of items of size `n`.
pub fn multiset_count(kinds: &[u64], w: u32) -> u64 {
    fn go(kinds: &[u64], rest: u32, max_part: u32) -> u64 {
        if rest == 0 {
            return 1;
        }
        let mut total = 0;
        for n in (1..=max_part.min(rest)).rev() {
            let avail = kinds.get(n as usize).copied().unwrap_or(0);
            for k in 1..=rest / n {
                total += binom_multiset(avail, k as u64) * go(kinds, rest - k * n, n - 1);
            }
        }
        total
    }
    go(kinds, w, w)
}

/// `(N_tree(w), N1(w))` from the trunk recursion and the partition formula.
pub fn count_trees(w: u32) -> (u64, u64) {
    let mut n_tree = vec![1u64];
    let mut n1 = vec![0u64];
    for v in 1..=w {
        let one: u64 = n_tree.iter().sum();
        n1.push(one);
        n_tree.push(multiset_count(&n1, v));
    }
    (n_tree[w as usize], n1[w as usize])
}

/// Trees encoded as sorted multisets of trunks; a trunk is (weight, index of the tree above it).
#[derive(Default)]
struct TreeCatalog {
    trees: Vec<Vec<Vec<(u32, usize)>>>,
    trunks: Vec<Vec<(u32, usize)>>,
}

impl TreeCatalog {
    fn upto(w: u32) -> Self {
        let mut cat = TreeCatalog::default();
        for v in 0..=w {
            let trunks: Vec<(u32, usize)> = (1..=v)
                .flat_map(|k| (0..cat.trees[(v - k) as usize].len()).map(move |i| (k, i)))
                .collect();
            cat.trunks.push(trunks);
            let mut out = Vec::new();
            let mut cur = Vec::new();
            cat.multisets(v, (u32::MAX, usize::MAX), &mut cur, &mut out);
            cat.trees.push(out);
        }
        cat
    }

    /// Trunk ids are (trunk weight, position in `trunks[weight]`), chosen non-increasing.
    fn multisets(
        &self,
        rest: u32,
        bound: (u32, usize),
        cur: &mut Vec<(u32, usize)>,
        out: &mut Vec<Vec<(u32, usize)>>,
    ) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for n in (1..=rest.min(bound.0)).rev() {
            let count = self.trunks.get(n as usize).map_or(0, |t| t.len());
            let top = if n == bound.0 { bound.1 + 1 } else { count };
            for i in (0..top.min(count)).rev() {
                cur.push((n, i));
                self.multisets(rest - n, (n, i), cur, out);
                cur.pop();
            }
        }
    }

    /// Appends tree `(w, idx)` below `root` into a parent list.
    fn build(&self, w: u32, idx: usize, root: usize, nodes: &mut Vec<(Option<usize>, u32)>) {
        for &(n, t) in &self.trees[w as usize][idx] {
            let (k, above) = self.trunks[n as usize][t];
            let id = nodes.len();
            nodes.push((Some(root), k));
            self.build(n - k, above, id, nodes);
        }
    }

    fn tree(&self, w: u32, idx: usize) -> WeightedTree {
        let mut nodes = vec![(None, 0)];
        self.build(w, idx, 0, &mut nodes);
        WeightedTree { nodes }
    }
}

pub fn enumerate_trees(w: u32) -> Vec<WeightedTree> {
    let cat = TreeCatalog::upto(w);
    (0..cat.trees[w as usize].len())
        .map(|i| cat.tree(w, i))
        .collect()
}

/// Compositions of `w` that are lexicographically minimal among their rotations.
pub fn necklaces(w: u32) -> Vec<Vec<u32>> {
    fn comps(rest: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for k in 1..=rest {
            cur.push(k);
            comps(rest - k, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    comps(w, &mut Vec::new(), &mut all);
    all.into_iter()
        .filter(|c| (1..c.len()).all(|r| {
            let rot: Vec<u32> = c[r..].iter().chain(&c[..r]).copied().collect();
            *c <= rot
        }))
        .collect()
}

/// Every way to write `total` as an ordered sum of `k` non-negative parts.
fn distributions(total: u32, k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in distributions(total - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Cycle `cyc` with tree (weight, index) pasted onto each cycle vertex.
fn assemble(cat: &TreeCatalog, cyc: &[u32], trees: &[(u32, usize)]) -> MappingScheme {
    let k = cyc.len();
    let mut weights: Vec<u32> = cyc.to_vec();
    let mut images: Vec<usize> = (0..k).map(|i| (i + 1) % k).collect();
    for (i, &(tw, ti)) in trees.iter().enumerate() {
        let t = cat.tree(tw, ti);
        let base = weights.len();
        for (j, &(parent, w)) in t.nodes.iter().enumerate().skip(1) {
            let p = parent.unwrap();
            weights.push(w);
            images.push(if p == 0 { i } else { base + p - 1 });
            debug_assert_eq!(base + j - 1, weights.len() - 1);
        }
    }
    let pairs: Vec<(u32, usize)> = weights.into_iter().zip(images).collect();
    MappingScheme::from_pairs(&pairs).expect("assembled scheme is valid")
}

fn cell_candidates(cat: &TreeCatalog, cycle_weight: u32, tree_weight: u32) -> Vec<MappingScheme> {
    let mut out = Vec::new();
    for cyc in necklaces(cycle_weight) {
        for dist in distributions(tree_weight, cyc.len()) {
            let mut choice: Vec<(u32, usize)> = dist.iter().map(|&t| (t, 0)).collect();
            loop {
                out.push(assemble(cat, &cyc, &choice));
                // Odometer over tree indices.
                let mut i = 0;
                loop {
                    if i == choice.len() {
                        break;
                    }
                    choice[i].1 += 1;
                    if choice[i].1 < cat.trees[choice[i].0 as usize].len() {
                        break;
                    }
                    choice[i].1 = 0;
                    i += 1;
                }
                if i == choice.len() {
                    break;
                }
            }
        }
    }
    out
}

/// Deduplicates by canonical bytes, returning schemes sorted by those bytes.
fn dedup(exec: Execution, schemes: Vec<MappingScheme>) -> Vec<MappingScheme> {
    let keyed = parallel::map_vec(exec, schemes, |s| {
        let cf = s.canonical_form();
        (cf.bytes, s.relabel(&cf.relabeling))
    });
    let unique: BTreeMap<Vec<u8>, MappingScheme> = keyed.into_iter().collect();
    unique.into_values().collect()
}

/// Generator with a weight cap and an execution mode.
#[derive(Debug, Clone, Copy)]
pub struct Census {
    pub cap: u32,
    pub exec: Execution,
}

impl Default for Census {
    fn default() -> Self {
        Census {
            cap: DEFAULT_CAP,
            exec: Execution::default(),
        }
    }
}

impl Census {
    fn check(&self, w: u32) -> Result<(), CensusError> {
        if w == 0 {
            return Err(CensusError::ZeroWeight);
        }
        if w > self.cap {
            return Err(CensusError::CapExceeded {
                weight: w,
                cap: self.cap,
            });
        }
        Ok(())
    }

    pub fn connected_cell(&self, cycle_weight: u32, tree_weight: u32) -> Result<Vec<MappingScheme>, CensusError> {
        self.check(cycle_weight + tree_weight)?;
        let cat = TreeCatalog::upto(tree_weight);
        Ok(dedup(self.exec, cell_candidates(&cat, cycle_weight, tree_weight)))
    }

    pub fn connected(&self, w: u32) -> Result<Vec<MappingScheme>, CensusError> {
        self.check(w)?;
        let cat = TreeCatalog::upto(w);
        let cands: Vec<MappingScheme> = (1..=w)
            .flat_map(|c| cell_candidates(&cat, c, w - c))
            .collect();
        Ok(dedup(self.exec, cands))
    }

    pub fn all(&self, w: u32) -> Result<Vec<MappingScheme>, CensusError> {
        self.check(w)?;
        let comps: Vec<Vec<MappingScheme>> = std::iter::once(Ok(Vec::new()))
            .chain((1..=w).map(|v| self.connected(v)))
            .collect::<Result<_, _>>()?;
        let mut sums = Vec::new();
        let mut cur: Vec<(u32, usize)> = Vec::new();
        collect_sums(&comps, w, (w, usize::MAX), &mut cur, &mut sums);
        Ok(dedup(self.exec, sums))
    }

    pub fn table(&self, max_w: u32) -> Result<Vec<CensusRow>, CensusError> {
        if max_w > self.cap {
            return Err(CensusError::CapExceeded {
                weight: max_w,
                cap: self.cap,
            });
        }
        let mut rows = Vec::new();
        for w in 0..=max_w {
            let (n_trees, n1_trees) = count_trees(w);
            let (n_connected, n_total) = if w == 0 {
                (0, 0)
            } else {
                (self.connected(w)?.len() as u64, self.all(w)?.len() as u64)
            };
            rows.push(CensusRow {
                w,
                n_trees,
                n1_trees,
                n_connected,
                n_total,
            });
        }
        Ok(rows)
    }
}

fn collect_sums(
    comps: &[Vec<MappingScheme>],
    rest: u32,
    bound: (u32, usize),
    cur: &mut Vec<(u32, usize)>,
    out: &mut Vec<MappingScheme>,
) {
    if rest == 0 {
        let mut it = cur.iter().map(|&(w, i)| &comps[w as usize][i]);
        let first = it.next().expect("non-empty sum").clone();
        out.push(it.fold(first, |acc, s| acc.disjoint_sum(s)));
        return;
    }
    for n in (1..=rest.min(bound.0)).rev() {
        let count = comps[n as usize].len();
        let top = if n == bound.0 { bound.1.saturating_add(1) } else { count };
        for i in (0..top.min(count)).rev() {
            cur.push((n, i));
            collect_sums(comps, rest - n, (n, i), cur, out);
            cur.pop();
        }
    }
}

pub fn count_connected_cell(cycle_weight: u32, tree_weight: u32) -> Result<u64, CensusError> {
    Ok(Census::default()
        .connected_cell(cycle_weight, tree_weight)?
        .len() as u64)
}

pub fn enumerate_connected(w: u32) -> Result<Vec<MappingScheme>, CensusError> {
    Census::default().connected(w)
}

pub fn enumerate_all(w: u32) -> Result<Vec<MappingScheme>, CensusError> {
    Census::default().all(w)
}

pub fn census_table(max_w: u32) -> Result<Vec<CensusRow>, CensusError> {
    Census::default().table(max_w)
}

/// All reduced schemes with `1 <= w(S) <= max_w`, in weight order.
pub fn enumerate_upto(max_w: u32) -> Result<Vec<MappingScheme>, CensusError> {
    let c = Census::default();
    let mut out = Vec::new();
    for w in 1..=max_w {
        out.extend(c.all(w)?);
    }
    Ok(out)
}
