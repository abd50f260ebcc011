//! Abstract Hubbard trees: angled dynamical trees, the axiom checker, and the
//! tree realizing a reduced scheme.

use crate::scheme::{MappingScheme, RawVertex};
use crate::symmetry::{reduce_turn, turn, Turn};
use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use thiserror::Error;

const ZERO: Turn = Turn::new_raw(0, 1);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HubbardError {
    #[error("scheme is not reduced")]
    NotReduced,
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("orbit of vertex {0} meets no critical vertex")]
    NoCriticalVertex(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Fatou,
    Julia,
}

/// A finite tree with vertex dynamics, local degrees and angles `∠_v(e, e')`
/// keyed by `(v, e, e')` with `e, e'` edge indices.
#[derive(Debug, Clone, PartialEq)]
pub struct AngledTree {
    pub labels: Vec<String>,
    pub degrees: Vec<u32>,
    pub map: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub angles: BTreeMap<(usize, usize, usize), Turn>,
    incident: Vec<Vec<usize>>,
}

impl AngledTree {
    pub fn new(
        labels: Vec<String>,
        degrees: Vec<u32>,
        map: Vec<usize>,
        edges: Vec<(usize, usize)>,
        angles: BTreeMap<(usize, usize, usize), Turn>,
    ) -> Result<Self, HubbardError> {
        let n = degrees.len();
        if n == 0 || labels.len() != n || map.len() != n {
            return Err(HubbardError::NotATree("vertex arrays disagree or are empty".into()));
        }
        if let Some(v) = (0..n).find(|&v| map[v] >= n || degrees[v] == 0) {
            return Err(HubbardError::NotATree(format!("bad image or degree at vertex {v}")));
        }
        if edges.len() + 1 != n {
            return Err(HubbardError::NotATree(format!("{} edges on {n} vertices", edges.len())));
        }
        let mut incident = vec![Vec::new(); n];
        for (i, &(a, b)) in edges.iter().enumerate() {
            if a >= n || b >= n || a == b {
                return Err(HubbardError::NotATree(format!("bad edge {i}")));
            }
            incident[a].push(i);
            incident[b].push(i);
        }
        let tree = AngledTree {
            labels,
            degrees,
            map,
            edges,
            angles,
            incident,
        };
        if tree.distances_from(0).contains(&usize::MAX) {
            return Err(HubbardError::NotATree("disconnected".into()));
        }
        Ok(tree)
    }

    /// Builds all pairwise angles from a position `a_v(e)` of each edge at each vertex:
    /// `∠_v(e, e') = a_v(e') − a_v(e)`.
    pub fn from_positions(
        labels: Vec<String>,
        degrees: Vec<u32>,
        map: Vec<usize>,
        edges: Vec<(usize, usize)>,
        positions: &[Vec<(usize, Turn)>],
    ) -> Result<Self, HubbardError> {
        let mut angles = BTreeMap::new();
        for (v, pos) in positions.iter().enumerate() {
            for &(e, a) in pos {
                for &(f, b) in pos {
                    angles.insert((v, e, f), reduce_turn(b - a));
                }
            }
        }
        Self::new(labels, degrees, map, edges, angles)
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    fn other_end(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.incident[a].iter().copied().find(|&e| self.other_end(e, a) == b)
    }

    pub fn angle(&self, v: usize, e: usize, f: usize) -> Option<Turn> {
        self.angles.get(&(v, e, f)).copied()
    }

    pub fn total_degree(&self) -> u32 {
        1 + self.degrees.iter().map(|d| d - 1).sum::<u32>()
    }

    fn distances_from(&self, s: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.incident[v] {
                let u = self.other_end(e, v);
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Vertex path from `a` to `b`.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let dist = self.distances_from(b);
        let mut out = vec![a];
        let mut v = a;
        while v != b {
            v = self.incident[v]
                .iter()
                .map(|&e| self.other_end(e, v))
                .find(|&u| dist[u] + 1 == dist[v])
                .expect("tree is connected");
            out.push(v);
        }
        out
    }

    /// Shortest path between the images of the endpoints of edge `e`, oriented from `f(a)`.
    pub fn edge_image(&self, e: usize) -> Vec<usize> {
        let (a, b) = self.edges[e];
        self.path(self.map[a], self.map[b])
    }

    /// First edge of `f(e)` at `f(v)`, for `e` incident at `v`.
    fn image_germ(&self, v: usize, e: usize) -> Option<usize> {
        let u = self.other_end(e, v);
        let p = self.path(self.map[v], self.map[u]);
        (p.len() >= 2).then(|| self.edge_between(p[0], p[1]).expect("path edge"))
    }

    pub fn is_periodic(&self, v: usize) -> bool {
        let mut u = self.map[v];
        for _ in 0..self.len() {
            if u == v {
                return true;
            }
            u = self.map[u];
        }
        false
    }

    pub fn kinds(&self) -> Vec<VertexKind> {
        let n = self.len();
        let critical_cycle: Vec<bool> = (0..n)
            .map(|v| {
                self.is_periodic(v) && {
                    let mut u = v;
                    let mut hit = false;
                    loop {
                        hit |= self.degrees[u] > 1;
                        u = self.map[u];
                        if u == v {
                            break hit;
                        }
                    }
                }
            })
            .collect();
        (0..n)
            .map(|v| {
                let mut u = v;
                for _ in 0..n {
                    u = self.map[u];
                }
                if critical_cycle[u] {
                    VertexKind::Fatou
                } else {
                    VertexKind::Julia
                }
            })
            .collect()
    }

    /// `∠_v(e, f(e))` at a fixed vertex when it is the same for every incident edge.
    pub fn rotation_number(&self, v: usize) -> Option<Turn> {
        if self.map[v] != v {
            return None;
        }
        let mut out = None;
        for &e in &self.incident[v] {
            let g = self.image_germ(v, e)?;
            let a = self.angle(v, e, g)?;
            match out {
                None => out = Some(a),
                Some(b) if b != a => return None,
                _ => {}
            }
        }
        out
    }

    pub fn check_axioms(&self) -> AxiomReport {
        let n = self.len();
        let mut report = AxiomReport::default();

        let bad: Vec<usize> = (0..self.edges.len())
            .filter(|&e| {
                let (a, b) = self.edges[e];
                self.map[a] == self.map[b]
            })
            .collect();
        report.push(Axiom::EdgeSeparation, bad.is_empty(), format!("edges {bad:?}"));

        let dh = self.total_degree();
        report.push(Axiom::TotalDegree, dh >= 2, format!("d_H = {dh}"));

        let mut law = Vec::new();
        for v in 0..n {
            let inc = &self.incident[v];
            for &e in inc {
                for &f in inc {
                    let Some(a) = self.angle(v, e, f) else {
                        law.push(format!("missing angle at {v}"));
                        continue;
                    };
                    let back = self.angle(v, f, e).unwrap_or(ZERO);
                    if reduce_turn(a + back) != ZERO || ((a == ZERO) != (e == f)) {
                        law.push(format!("skew/zero at {v}"));
                    }
                    for &g in inc {
                        if let (Some(b), Some(c)) = (self.angle(v, f, g), self.angle(v, e, g)) {
                            if reduce_turn(a + b - c) != ZERO {
                                law.push(format!("additivity at {v}"));
                            }
                        }
                    }
                }
            }
        }
        law.dedup();
        report.push(Axiom::AngleLaws, law.is_empty(), law.join("; "));

        let mut compat = Vec::new();
        if bad.is_empty() {
            for v in 0..n {
                let inc = &self.incident[v];
                let germs: Vec<usize> = inc.iter().map(|&e| self.image_germ(v, e).expect("separated")).collect();
                for (i, &e) in inc.iter().enumerate() {
                    for (j, &f) in inc.iter().enumerate() {
                        let lhs = self.angle(self.map[v], germs[i], germs[j]);
                        let rhs = self
                            .angle(v, e, f)
                            .map(|a| reduce_turn(a * i64::from(self.degrees[v])));
                        if lhs.is_none() || lhs != rhs {
                            compat.push(format!("vertex {v}, edges {e},{f}"));
                        }
                    }
                }
            }
        } else {
            compat.push("edge images undefined".into());
        }
        report.push(Axiom::AngleCompatibility, compat.is_empty(), compat.join("; "));

        let kinds = self.kinds();
        let mut norm = Vec::new();
        for v in 0..n {
            if kinds[v] == VertexKind::Julia && self.is_periodic(v) {
                let m = self.incident[v].len() as i64;
                for &e in &self.incident[v] {
                    for &f in &self.incident[v] {
                        if let Some(a) = self.angle(v, e, f) {
                            if !(a * m).is_integer() {
                                norm.push(v);
                            }
                        }
                    }
                }
            }
        }
        norm.dedup();
        report.push(Axiom::Normalized, norm.is_empty(), format!("vertices {norm:?}"));

        let dist: Vec<Vec<usize>> = (0..n).map(|v| self.distances_from(v)).collect();
        let mut stuck = Vec::new();
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if kinds[a] != VertexKind::Julia || kinds[b] != VertexKind::Julia {
                continue;
            }
            let (mut x, mut y) = (a, b);
            let mut expands = false;
            for _ in 0..n * n {
                x = self.map[x];
                y = self.map[y];
                if dist[x][y] > 1 {
                    expands = true;
                    break;
                }
            }
            if !expands {
                stuck.push(e);
            }
        }
        report.push(Axiom::Expanding, stuck.is_empty(), format!("edges {stuck:?}"));
        report
    }

    /// Graphviz source; Fatou vertices are boxes, Julia vertices circles.
    pub fn to_dot(&self) -> String {
        let kinds = self.kinds();
        let mut out = String::from("graph hubbard {\n");
        for v in 0..self.len() {
            let shape = match kinds[v] {
                VertexKind::Fatou => "box",
                VertexKind::Julia => "circle",
            };
            let _ = writeln!(
                out,
                "  {v} [label=\"{} d={} f={}\", shape={shape}];",
                self.labels[v], self.degrees[v], self.labels[self.map[v]]
            );
        }
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "  {a} -- {b};");
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    EdgeSeparation,
    TotalDegree,
    AngleLaws,
    AngleCompatibility,
    Normalized,
    Expanding,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    fn push(&mut self, axiom: Axiom, passed: bool, detail: String) {
        self.checks.push(AxiomCheck { axiom, passed, detail });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn passed(&self, axiom: Axiom) -> bool {
        self.checks.iter().any(|c| c.axiom == axiom && c.passed)
    }
}

/// Inserts `s♯` between `s` and `F̄(s)`: vertex `n + s` is `s♯`.
pub fn double_scheme(s: &MappingScheme) -> Result<MappingScheme, HubbardError> {
    if !s.is_reduced() {
        return Err(HubbardError::NotReduced);
    }
    let n = s.len();
    let mut raw: Vec<RawVertex> = (0..n).map(|v| RawVertex { weight: s.weight(v), image: n + v }).collect();
    raw.extend((0..n).map(|v| RawVertex { weight: 0, image: s.image(v) }));
    Ok(MappingScheme::validate(&raw).expect("doubling keeps the scheme valid"))
}

/// The expanding tree realizing a reduced scheme. Vertices: `0..n` the scheme
/// vertices, `n..2n` their `♯` companions, then one `p_i` per cycle, then `q`.
pub fn build_tree(s: &MappingScheme) -> Result<AngledTree, HubbardError> {
    let doubled = double_scheme(s)?;
    let n = s.len();
    let cycles = doubled.cycle_decomposition().cycles;
    let q = 2 * n + cycles.len();
    let total = q + 1;

    let mut labels: Vec<String> = (0..n).map(|v| format!("s{v}")).collect();
    labels.extend((0..n).map(|v| format!("s{v}#")));
    labels.extend((0..cycles.len()).map(|i| format!("p{i}")));
    labels.push("q".into());

    let mut degrees = vec![1; total];
    for v in 0..n {
        degrees[v] = s.degree(v);
    }
    let mut map: Vec<usize> = (0..2 * n).map(|v| doubled.image(v)).collect();
    map.extend(2 * n..total);

    let mut edges = Vec::new();
    let mut positions: Vec<Vec<(usize, Turn)>> = vec![Vec::new(); total];
    let mut add = |a: usize, b: usize, at_a: Turn, at_b: Turn, positions: &mut Vec<Vec<(usize, Turn)>>| {
        let e = edges.len();
        edges.push((a, b));
        positions[a].push((e, at_a));
        positions[b].push((e, at_b));
    };

    // Critical representatives: the lowest vertex of each cycle, then the aperiodic vertices.
    let mut reps = Vec::new();
    for (i, cyc) in cycles.iter().enumerate() {
        let p = 2 * n + i;
        let len = cyc.len() as i64;
        for (k, &v) in cyc.iter().enumerate() {
            add(p, v, turn(k as i64, len), ZERO, &mut positions);
        }
        reps.push(cyc[0]);
    }
    for v in (0..n).filter(|&v| !s.is_periodic(v)) {
        add(v, n + v, ZERO, ZERO, &mut positions);
        reps.push(v);
    }
    let m = reps.len() as i64;
    for (i, &c) in reps.iter().enumerate() {
        add(c, q, turn(1, i64::from(s.degree(c))), turn(i as i64, m), &mut positions);
    }
    AngledTree::from_positions(labels, degrees, map, edges, &positions)
}

/// Critical vertices in ascending order; `F(v)` is the first critical vertex on the forward orbit.
pub fn scheme_of_tree(t: &AngledTree) -> Result<MappingScheme, HubbardError> {
    let crit: Vec<usize> = (0..t.len()).filter(|&v| t.degrees[v] > 1).collect();
    if crit.is_empty() {
        return Err(HubbardError::NoCriticalVertex(0));
    }
    let mut id = vec![usize::MAX; t.len()];
    for (i, &v) in crit.iter().enumerate() {
        id[v] = i;
    }
    let mut raw = Vec::with_capacity(crit.len());
    for &v in &crit {
        let mut u = t.map[v];
        let mut steps = 0;
        while t.degrees[u] == 1 {
            u = t.map[u];
            steps += 1;
            if steps > t.len() {
                return Err(HubbardError::NoCriticalVertex(v));
            }
        }
        raw.push(RawVertex {
            weight: t.degrees[v] - 1,
            image: id[u],
        });
    }
    Ok(MappingScheme::validate(&raw).expect("all vertices weighted"))
}
