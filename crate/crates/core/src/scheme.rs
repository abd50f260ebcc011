//! Mapping schemes: a finite set with a self-map `F` and a critical weight per vertex.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("scheme has no vertices")]
    Empty,
    #[error("vertex {vertex} maps to {image}, which is out of range")]
    BadIndex { vertex: usize, image: usize },
    #[error("vertex {0} has weight zero but is not a forward image of a weighted vertex")]
    OrphanZeroVertex(usize),
    #[error("cycle through vertex {0} carries no weight")]
    AllZeroCycle(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One vertex record before validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RawVertex {
    pub weight: u32,
    pub image: usize,
}

/// A validated mapping scheme. Vertex `i` has weight `weights[i]` and image `images[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MappingScheme {
    weights: Vec<u32>,
    images: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleDecomposition {
    /// Each cycle in `F`-order, starting from its smallest vertex; cycles sorted by that vertex.
    pub cycles: Vec<Vec<usize>>,
    /// Number of steps until the orbit enters its cycle (0 on cycles).
    pub tail_depth: Vec<usize>,
    /// Vertices outside `F(|S|)`, ascending.
    pub free_vertices: Vec<usize>,
    /// Index into `cycles` of the cycle each vertex eventually reaches.
    pub cycle_of: Vec<usize>,
}

/// `relabeling[old] = new`; schemes are isomorphic iff their `bytes` agree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub bytes: Vec<u8>,
    pub relabeling: Vec<usize>,
}

impl MappingScheme {
    pub fn validate(raw: &[RawVertex]) -> Result<Self, SchemeError> {
        let n = raw.len();
        if n == 0 {
            return Err(SchemeError::Empty);
        }
        for (v, r) in raw.iter().enumerate() {
            if r.image >= n {
                return Err(SchemeError::BadIndex {
                    vertex: v,
                    image: r.image,
                });
            }
        }
        let s = MappingScheme {
            weights: raw.iter().map(|r| r.weight).collect(),
            images: raw.iter().map(|r| r.image).collect(),
        };
        let cd = s.cycle_decomposition();
        for cyc in &cd.cycles {
            if cyc.iter().all(|&v| s.weights[v] == 0) {
                return Err(SchemeError::AllZeroCycle(cyc[0]));
            }
        }
        let mut reached = vec![false; n];
        for v in 0..n {
            if s.weights[v] > 0 {
                let mut u = s.images[v];
                while !reached[u] {
                    reached[u] = true;
                    u = s.images[u];
                }
            }
        }
        if let Some(v) = (0..n).find(|&v| s.weights[v] == 0 && !reached[v]) {
            return Err(SchemeError::OrphanZeroVertex(v));
        }
        Ok(s)
    }

    /// Convenience constructor from `(weight, image)` pairs.
    pub fn from_pairs(pairs: &[(u32, usize)]) -> Result<Self, SchemeError> {
        let raw: Vec<RawVertex> = pairs
            .iter()
            .map(|&(weight, image)| RawVertex { weight, image })
            .collect();
        Self::validate(&raw)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, s: usize) -> u32 {
        self.weights[s]
    }

    pub fn image(&self, s: usize) -> usize {
        self.images[s]
    }

    pub fn degree(&self, s: usize) -> u32 {
        self.weights[s] + 1
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn raw(&self) -> Vec<RawVertex> {
        self.weights
            .iter()
            .zip(&self.images)
            .map(|(&weight, &image)| RawVertex { weight, image })
            .collect()
    }

    pub fn total_weight(&self) -> u32 {
        self.weights.iter().sum()
    }

    pub fn is_reduced(&self) -> bool {
        self.weights.iter().all(|&w| w > 0)
    }

    pub fn preimages(&self) -> Vec<Vec<usize>> {
        let mut pre = vec![Vec::new(); self.len()];
        for (v, &u) in self.images.iter().enumerate() {
            pre[u].push(v);
        }
        pre
    }

    pub fn is_periodic(&self, s: usize) -> bool {
        let mut u = self.images[s];
        for _ in 0..self.len() {
            if u == s {
                return true;
            }
            u = self.images[u];
        }
        false
    }

    pub fn cycle_decomposition(&self) -> CycleDecomposition {
        let n = self.len();
        let periodic: Vec<bool> = (0..n).map(|v| self.is_periodic(v)).collect();
        let mut cycles = Vec::new();
        let mut cycle_of = vec![usize::MAX; n];
        for v in 0..n {
            if periodic[v] && cycle_of[v] == usize::MAX {
                let id = cycles.len();
                let mut cyc = vec![v];
                cycle_of[v] = id;
                let mut u = self.images[v];
                while u != v {
                    cycle_of[u] = id;
                    cyc.push(u);
                    u = self.images[u];
                }
                cycles.push(cyc);
            }
        }
        let mut tail_depth = vec![0; n];
        for v in 0..n {
            let mut u = v;
            let mut k = 0;
            while !periodic[u] {
                u = self.images[u];
                k += 1;
            }
            tail_depth[v] = k;
            cycle_of[v] = cycle_of[u];
        }
        let mut hit = vec![false; n];
        for &u in &self.images {
            hit[u] = true;
        }
        let free_vertices = (0..n).filter(|&v| !hit[v]).collect();
        CycleDecomposition {
            cycles,
            tail_depth,
            free_vertices,
            cycle_of,
        }
    }

    /// Collapses degree-one edges: keeps weighted vertices, `F̄(s)` is the first
    /// weighted vertex on the orbit of `F(s)`.
    pub fn reduce(&self) -> MappingScheme {
        let keep: Vec<usize> = (0..self.len()).filter(|&v| self.weights[v] > 0).collect();
        let mut new_id = vec![usize::MAX; self.len()];
        for (i, &v) in keep.iter().enumerate() {
            new_id[v] = i;
        }
        let images = keep
            .iter()
            .map(|&v| {
                let mut u = self.images[v];
                while self.weights[u] == 0 {
                    u = self.images[u];
                }
                new_id[u]
            })
            .collect();
        MappingScheme {
            weights: keep.iter().map(|&v| self.weights[v]).collect(),
            images,
        }
    }

    /// Applies a relabeling `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> MappingScheme {
        let n = self.len();
        let mut weights = vec![0; n];
        let mut images = vec![0; n];
        for v in 0..n {
            weights[perm[v]] = self.weights[v];
            images[perm[v]] = perm[self.images[v]];
        }
        MappingScheme { weights, images }
    }

    pub fn disjoint_sum(&self, other: &MappingScheme) -> MappingScheme {
        let off = self.len();
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        let mut images = self.images.clone();
        images.extend(other.images.iter().map(|&u| u + off));
        MappingScheme { weights, images }
    }

    /// Components ordered by smallest vertex, each compacted preserving order.
    pub fn connected_components(&self) -> Vec<MappingScheme> {
        self.component_vertex_sets()
            .into_iter()
            .map(|vs| self.induced(&vs))
            .collect()
    }

    pub fn component_vertex_sets(&self) -> Vec<Vec<usize>> {
        let cd = self.cycle_decomposition();
        let mut sets = vec![Vec::new(); cd.cycles.len()];
        for v in 0..self.len() {
            sets[cd.cycle_of[v]].push(v);
        }
        sets.sort();
        sets
    }

    /// Sub-scheme on a forward-closed vertex set, listed in ascending order.
    pub(crate) fn induced(&self, vs: &[usize]) -> MappingScheme {
        let mut idx = BTreeMap::new();
        for (i, &v) in vs.iter().enumerate() {
            idx.insert(v, i);
        }
        MappingScheme {
            weights: vs.iter().map(|&v| self.weights[v]).collect(),
            images: vs.iter().map(|&v| idx[&self.images[v]]).collect(),
        }
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        canonical::canonical_form(self)
    }

    pub fn is_isomorphic(&self, other: &MappingScheme) -> bool {
        self.len() == other.len()
            && self.total_weight() == other.total_weight()
            && self.canonical_form().bytes == other.canonical_form().bytes
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for v in 0..self.len() {
            let _ = writeln!(out, "{} {} {}", v, self.weights[v], self.images[v]);
        }
        out
    }

    /// Parses "id weight image" lines; `#` starts a comment. Ids must be 0..n-1 in any order.
    pub fn parse(text: &str) -> Result<MappingScheme, SchemeError> {
        let mut rows: BTreeMap<usize, (usize, RawVertex)> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(SchemeError::Parse {
                    line: line_no,
                    message: format!("expected 'id weight image', found {} fields", fields.len()),
                });
            }
            let num = |s: &str, what: &str| {
                s.parse::<usize>().map_err(|_| SchemeError::Parse {
                    line: line_no,
                    message: format!("bad {what} '{s}'"),
                })
            };
            let id = num(fields[0], "id")?;
            let weight = num(fields[1], "weight")?;
            let image = num(fields[2], "image")?;
            let weight = u32::try_from(weight).map_err(|_| SchemeError::Parse {
                line: line_no,
                message: "weight too large".into(),
            })?;
            if rows.insert(id, (line_no, RawVertex { weight, image })).is_some() {
                return Err(SchemeError::Parse {
                    line: line_no,
                    message: format!("duplicate id {id}"),
                });
            }
        }
        let n = rows.len();
        for (&id, &(line, r)) in &rows {
            if id >= n {
                return Err(SchemeError::Parse {
                    line,
                    message: format!("id {id} out of range 0..{n}"),
                });
            }
            if r.image >= n {
                return Err(SchemeError::Parse {
                    line,
                    message: format!("image {} out of range 0..{n}", r.image),
                });
            }
        }
        let raw: Vec<RawVertex> = rows.values().map(|&(_, r)| r).collect();
        MappingScheme::validate(&raw)
    }

    /// DOT digraph: one edge `s -> F(s)` labelled `d(s)`; weighted vertices drawn heavy.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph scheme {\n");
        for v in 0..self.len() {
            let w = self.weights[v];
            if w > 0 {
                let _ = writeln!(
                    out,
                    "  {v} [label=\"{v}\\nw={w}\", shape=circle, style=\"filled,bold\", fillcolor=black, fontcolor=white, penwidth=2];"
                );
            } else {
                let _ = writeln!(out, "  {v} [label=\"{v}\", shape=circle, style=solid];");
            }
        }
        for v in 0..self.len() {
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{}\"];",
                v,
                self.images[v],
                self.degree(v)
            );
        }
        out.push_str("}\n");
        out
    }
}

mod canonical {
    use super::{CanonicalForm, MappingScheme};

    struct Ctx<'a> {
        s: &'a MappingScheme,
        pre: Vec<Vec<usize>>,
        indeg: Vec<usize>,
        best: Option<(Vec<u8>, Vec<usize>)>,
    }

    /// Ranks keys; equal keys share a rank, ranks follow key order.
    fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
        let mut sorted: Vec<K> = keys.to_vec();
        sorted.sort();
        sorted.dedup();
        keys.iter()
            .map(|k| sorted.binary_search(k).unwrap())
            .collect()
    }

    fn cells(col: &[usize]) -> usize {
        col.iter().max().map_or(0, |m| m + 1)
    }

    impl<'a> Ctx<'a> {
        fn refine(&self, mut col: Vec<usize>) -> Vec<usize> {
            loop {
                let before = cells(&col);
                let keys: Vec<(usize, usize, Vec<usize>)> = (0..col.len())
                    .map(|v| {
                        let mut p: Vec<usize> = self.pre[v].iter().map(|&u| col[u]).collect();
                        p.sort_unstable();
                        (col[v], col[self.s.image(v)], p)
                    })
                    .collect();
                col = rank(&keys);
                if cells(&col) == before {
                    return col;
                }
            }
        }

        fn encode(&self, col: &[usize]) -> Vec<u8> {
            let n = col.len();
            let mut order = vec![0; n];
            for v in 0..n {
                order[col[v]] = v;
            }
            let mut bytes = Vec::with_capacity(4 + 8 * n);
            bytes.extend_from_slice(&(n as u32).to_be_bytes());
            for &v in &order {
                bytes.extend_from_slice(&self.s.weight(v).to_be_bytes());
                bytes.extend_from_slice(&(col[self.s.image(v)] as u32).to_be_bytes());
            }
            bytes
        }

        fn search(&mut self, col: Vec<usize>) {
            let n = col.len();
            let k = cells(&col);
            if k == n {
                let bytes = self.encode(&col);
                if self.best.as_ref().is_none_or(|(b, _)| bytes < *b) {
                    self.best = Some((bytes, col));
                }
                return;
            }
            let mut size = vec![0usize; k];
            for &c in &col {
                size[c] += 1;
            }
            let target = (0..k).find(|&c| size[c] > 1).unwrap();
            let members: Vec<usize> = (0..n).filter(|&v| col[v] == target).collect();
            let mut tried: Vec<(u32, usize)> = Vec::new();
            for &v in &members {
                // Leaves sharing weight and image are interchangeable.
                if self.indeg[v] == 0 {
                    let key = (self.s.weight(v), self.s.image(v));
                    if tried.contains(&key) {
                        continue;
                    }
                    tried.push(key);
                }
                let keys: Vec<(usize, usize)> = (0..n)
                    .map(|u| (col[u], usize::from(u != v || col[u] != target)))
                    .collect();
                let next = self.refine(rank(&keys));
                self.search(next);
            }
        }
    }

    pub(super) fn canonical_form(s: &MappingScheme) -> CanonicalForm {
        let n = s.len();
        let pre = s.preimages();
        let indeg: Vec<usize> = pre.iter().map(|p| p.len()).collect();
        let cd = s.cycle_decomposition();
        let seed: Vec<(u32, usize, bool, usize)> = (0..n)
            .map(|v| {
                let on = cd.tail_depth[v] == 0;
                let len = if on { cd.cycles[cd.cycle_of[v]].len() } else { 0 };
                (s.weight(v), indeg[v], on, len)
            })
            .collect();
        let mut ctx = Ctx {
            s,
            pre,
            indeg,
            best: None,
        };
        let start = ctx.refine(rank(&seed));
        ctx.search(start);
        let (bytes, relabeling) = ctx.best.expect("non-empty search");
        CanonicalForm { bytes, relabeling }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_fixed() -> MappingScheme {
        MappingScheme::from_pairs(&[(1, 0)]).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(MappingScheme::from_pairs(&[(1, 0)]).is_ok());
        assert_eq!(
            MappingScheme::from_pairs(&[(1, 1), (0, 1)]),
            Err(SchemeError::AllZeroCycle(1))
        );
        assert!(MappingScheme::from_pairs(&[(1, 1), (0, 0)]).is_ok());
        assert_eq!(
            MappingScheme::from_pairs(&[(1, 0), (0, 0)]),
            Err(SchemeError::OrphanZeroVertex(1))
        );
        assert!(matches!(
            MappingScheme::from_pairs(&[(1, 3)]),
            Err(SchemeError::BadIndex { .. })
        ));
    }

    #[test]
    fn capture_decomposition() {
        let s = MappingScheme::from_pairs(&[(1, 1), (1, 1)]).unwrap();
        let cd = s.cycle_decomposition();
        assert_eq!(cd.cycles, vec![vec![1]]);
        assert_eq!(cd.free_vertices, vec![0]);
        assert_eq!(cd.tail_depth, vec![1, 0]);
    }

    #[test]
    fn reduce_collapses_weightless_vertices() {
        let s = MappingScheme::from_pairs(&[(1, 1), (0, 0)]).unwrap();
        assert_eq!(s.reduce(), single_fixed());
    }

    #[test]
    fn text_round_trip() {
        assert_eq!(single_fixed().serialize(), "0 1 0\n");
        let b = MappingScheme::parse("0 1 1\n1 1 0\n").unwrap();
        assert_eq!(b.total_weight(), 2);
        assert_eq!(
            MappingScheme::parse("0 1\n"),
            Err(SchemeError::Parse {
                line: 1,
                message: "expected 'id weight image', found 2 fields".into()
            })
        );
        let c = MappingScheme::parse("# capture\n1 1 1\n\n0 1 1 # free\n").unwrap();
        assert_eq!(c.image(0), 1);
    }

    #[test]
    fn dot_has_one_edge_per_vertex() {
        let s = MappingScheme::from_pairs(&[(1, 1), (0, 0)]).unwrap();
        let dot = s.to_dot();
        assert_eq!(dot.matches("->").count(), 2);
        assert!(dot.contains("0 -> 1 [label=\"2\"]"));
        assert!(dot.contains("1 -> 0 [label=\"1\"]"));
        assert_eq!(dot.matches("fillcolor=black").count(), 1);
    }

    #[test]
    fn bitransitive_and_capture_differ() {
        let b = MappingScheme::from_pairs(&[(1, 1), (1, 0)]).unwrap();
        let c = MappingScheme::from_pairs(&[(1, 1), (1, 1)]).unwrap();
        assert!(!b.is_isomorphic(&c));
        let c2 = MappingScheme::from_pairs(&[(1, 0), (1, 0)]).unwrap();
        assert!(c.is_isomorphic(&c2));
    }
}
