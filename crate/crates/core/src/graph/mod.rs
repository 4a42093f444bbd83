//! Finite marked metric graphs and the combinatorics of their universal
//! covers.
//!
//! A marking is given by a spanning tree together with one generator label
//! per edge outside the tree. The loop of generator `i` runs along the tree
//! from the basepoint to the tail of its edge, across the edge in the stated
//! orientation, and back along the tree; this identifies the free group on
//! the labels with the fundamental group at the basepoint.

mod candidates;
mod dirichlet;
mod word;

pub use candidates::{candidates, Candidate};
pub use dirichlet::{dirichlet_delta, Dirichlet};
pub use word::{ball, default_labels, parse_word, Ball, FreeWord, Letter, WordDisplay, WordError};

use std::collections::VecDeque;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::rational::{common_denominator, format_rational, Q};

/// One way in which a graph description fails to be a marked metric graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoVertices,
    Disconnected,
    ValenceBelowTwo { vertex: String, valence: usize },
    NonpositiveLength { edge: String },
    MarkingRankMismatch { rank: usize, generators: usize },
    BadSpanningTree(String),
    BadGenerator(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoVertices => write!(f, "graph has no vertices"),
            Violation::Disconnected => write!(f, "graph is disconnected"),
            Violation::ValenceBelowTwo { vertex, valence } => {
                write!(f, "vertex {vertex} has valence {valence} < 2")
            }
            Violation::NonpositiveLength { edge } => write!(f, "edge {edge} has nonpositive length"),
            Violation::MarkingRankMismatch { rank, generators } => {
                write!(f, "rank is {rank} but the marking has {generators} generators")
            }
            Violation::BadSpanningTree(s) => write!(f, "spanning tree: {s}"),
            Violation::BadGenerator(s) => write!(f, "generator: {s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid marked graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error(transparent)]
    BadWord(#[from] WordError),
    #[error("path is not connected at step {0}")]
    BrokenPath(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub from: usize,
    pub to: usize,
    pub length: Q,
}

/// A generator of the marking: the non-tree edge `edge`, crossed forward
/// (from `from` to `to`) when `forward` is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub label: String,
    pub edge: usize,
    pub forward: bool,
}

/// A directed traversal of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub edge: u32,
    pub forward: bool,
}

impl Step {
    pub fn new(edge: usize, forward: bool) -> Step {
        Step {
            edge: edge as u32,
            forward,
        }
    }

    pub fn rev(self) -> Step {
        Step {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

/// An edge path starting at `start`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgePath {
    pub start: usize,
    pub steps: Vec<Step>,
}

impl EdgePath {
    pub fn empty(start: usize) -> Self {
        EdgePath {
            start,
            steps: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

pub(crate) fn push_reduced(out: &mut Vec<Step>, s: Step) {
    if out.last() == Some(&s.rev()) {
        out.pop();
    } else {
        out.push(s);
    }
}

pub(crate) fn reverse_steps(steps: &[Step]) -> Vec<Step> {
    steps.iter().rev().map(|s| s.rev()).collect()
}

/// A connected finite metric graph with every valence at least 2, positive
/// edge lengths and a marking by a spanning tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedMetricGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    basepoint: usize,
    spanning_tree: Vec<usize>,
    generators: Vec<Generator>,
    /// Tree edge from the parent toward each vertex (`None` at the basepoint).
    parent: Vec<Option<Step>>,
    /// Generator index and orientation of each edge outside the tree.
    edge_gen: Vec<Option<(usize, bool)>>,
}

/// Checks every invariant and returns the rank `#edges - #vertices + 1`.
pub fn validate(
    vertices: &[String],
    edges: &[Edge],
    spanning_tree: &[usize],
    generators: &[Generator],
) -> Result<usize, GraphError> {
    let mut bad = Vec::new();
    let nv = vertices.len();
    if nv == 0 {
        return Err(GraphError::Invalid(vec![Violation::NoVertices]));
    }
    let mut valence = vec![0usize; nv];
    for e in edges {
        valence[e.from] += 1;
        valence[e.to] += 1;
        if !e.length.is_positive() {
            bad.push(Violation::NonpositiveLength {
                edge: e.name.clone(),
            });
        }
    }
    if components(nv, edges.iter().map(|e| (e.from, e.to))) != 1 {
        bad.push(Violation::Disconnected);
    }
    for (v, &k) in valence.iter().enumerate() {
        if k < 2 {
            bad.push(Violation::ValenceBelowTwo {
                vertex: vertices[v].clone(),
                valence: k,
            });
        }
    }
    let rank = (edges.len() + 1).saturating_sub(nv);
    let mut in_tree = vec![false; edges.len()];
    for &t in spanning_tree {
        if in_tree[t] {
            bad.push(Violation::BadSpanningTree(format!(
                "edge {} listed twice",
                edges[t].name
            )));
        }
        in_tree[t] = true;
    }
    let tree_edges: Vec<(usize, usize)> = spanning_tree
        .iter()
        .map(|&t| (edges[t].from, edges[t].to))
        .collect();
    if spanning_tree.len() + 1 != nv || components(nv, tree_edges.into_iter()) != 1 {
        bad.push(Violation::BadSpanningTree(format!(
            "{} edges do not form a spanning tree of {} vertices",
            spanning_tree.len(),
            nv
        )));
    }
    if generators.len() != rank {
        bad.push(Violation::MarkingRankMismatch {
            rank,
            generators: generators.len(),
        });
    }
    let mut gen_seen = vec![false; edges.len()];
    for (i, g) in generators.iter().enumerate() {
        if in_tree[g.edge] {
            bad.push(Violation::BadGenerator(format!(
                "{} uses tree edge {}",
                g.label, edges[g.edge].name
            )));
        }
        if gen_seen[g.edge] {
            bad.push(Violation::BadGenerator(format!(
                "edge {} carries two generators",
                edges[g.edge].name
            )));
        }
        gen_seen[g.edge] = true;
        if generators[..i].iter().any(|h| h.label == g.label) {
            bad.push(Violation::BadGenerator(format!("label {} repeated", g.label)));
        }
    }
    if bad.is_empty() {
        Ok(rank)
    } else {
        Err(GraphError::Invalid(bad))
    }
}

fn components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut count = n;
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            count -= 1;
        }
    }
    count
}

impl MarkedMetricGraph {
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<Edge>,
        basepoint: usize,
        spanning_tree: Vec<usize>,
        generators: Vec<Generator>,
    ) -> Result<Self, GraphError> {
        let nv = vertices.len();
        if basepoint >= nv.max(1) {
            return Err(GraphError::UnknownVertex(basepoint.to_string()));
        }
        for e in &edges {
            if e.from >= nv || e.to >= nv {
                return Err(GraphError::Invalid(vec![Violation::BadSpanningTree(format!(
                    "edge {} has an unknown endpoint",
                    e.name
                ))]));
            }
        }
        if let Some(&t) = spanning_tree.iter().find(|&&t| t >= edges.len()) {
            return Err(GraphError::UnknownEdge(t.to_string()));
        }
        if let Some(g) = generators.iter().find(|g| g.edge >= edges.len()) {
            return Err(GraphError::UnknownEdge(g.edge.to_string()));
        }
        validate(&vertices, &edges, &spanning_tree, &generators)?;
        let mut g = MarkedMetricGraph {
            parent: vec![None; nv],
            edge_gen: vec![None; edges.len()],
            vertices,
            edges,
            basepoint,
            spanning_tree,
            generators,
        };
        g.build_caches();
        Ok(g)
    }

    fn build_caches(&mut self) {
        let nv = self.vertices.len();
        let mut adj: Vec<Vec<Step>> = vec![Vec::new(); nv];
        for &t in &self.spanning_tree {
            let e = &self.edges[t];
            adj[e.from].push(Step::new(t, true));
            adj[e.to].push(Step::new(t, false));
        }
        let mut seen = vec![false; nv];
        seen[self.basepoint] = true;
        let mut queue = VecDeque::from([self.basepoint]);
        while let Some(v) = queue.pop_front() {
            for &s in &adj[v] {
                let w = self.head(s);
                if !seen[w] {
                    seen[w] = true;
                    self.parent[w] = Some(s);
                    queue.push_back(w);
                }
            }
        }
        for (i, g) in self.generators.iter().enumerate() {
            self.edge_gen[g.edge] = Some((i, g.forward));
        }
    }

    /// Builds a graph from an edge list, choosing a breadth-first spanning
    /// tree at `basepoint` and labelling the remaining edges `a, b, c, ...` in
    /// edge order, each oriented forward.
    pub fn from_edges(
        vertex_count: usize,
        edges: &[(usize, usize, Q)],
        basepoint: usize,
    ) -> Result<Self, GraphError> {
        let rank = (edges.len() + 1).saturating_sub(vertex_count);
        Self::from_edges_labeled(vertex_count, edges, basepoint, &default_labels(rank))
    }

    pub fn from_edges_labeled(
        vertex_count: usize,
        edges: &[(usize, usize, Q)],
        basepoint: usize,
        labels: &[String],
    ) -> Result<Self, GraphError> {
        let vertices: Vec<String> = (0..vertex_count).map(|i| format!("v{i}")).collect();
        let edges: Vec<Edge> = edges
            .iter()
            .enumerate()
            .map(|(i, (a, b, l))| Edge {
                name: format!("e{i}"),
                from: *a,
                to: *b,
                length: l.clone(),
            })
            .collect();
        let tree = bfs_tree(vertex_count, &edges, basepoint);
        Self::with_tree(vertices, edges, basepoint, tree, labels)
    }

    /// Marks the graph by the given spanning tree; generator `i` is the
    /// `i`-th non-tree edge in edge order, oriented forward.
    pub fn with_tree(
        vertices: Vec<String>,
        edges: Vec<Edge>,
        basepoint: usize,
        spanning_tree: Vec<usize>,
        labels: &[String],
    ) -> Result<Self, GraphError> {
        let generators: Vec<Generator> = (0..edges.len())
            .filter(|e| !spanning_tree.contains(e))
            .enumerate()
            .map(|(i, e)| Generator {
                label: labels.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1)),
                edge: e,
                forward: true,
            })
            .collect();
        Self::new(vertices, edges, basepoint, spanning_tree, generators)
    }

    /// One vertex with a loop of each given length.
    pub fn rose(lengths: &[Q]) -> Self {
        let edges: Vec<_> = lengths.iter().map(|l| (0, 0, l.clone())).collect();
        Self::from_edges(1, &edges, 0).expect("rose with positive lengths")
    }

    /// Two vertices joined by three edges; the first edge is the tree.
    pub fn theta(lengths: [Q; 3]) -> Self {
        let [x, y, z] = lengths;
        Self::from_edges(2, &[(0, 1, x), (0, 1, y), (0, 1, z)], 0).expect("theta graph")
    }

    /// Two loops `l` at `y` and `r` at `z` of length `a`, joined by a bar `s`
    /// of length `1 - 2a`; generators `x` (the loop `l`) and `y` (the bar,
    /// the loop `r`, and the bar back). Volume 1 for `0 < a < 1/2`.
    pub fn figure_five(a: &Q) -> Result<Self, GraphError> {
        let bar = Q::one() - a - a;
        let vertices = vec!["y".to_string(), "z".to_string()];
        let edges = vec![
            Edge {
                name: "l".into(),
                from: 0,
                to: 0,
                length: a.clone(),
            },
            Edge {
                name: "s".into(),
                from: 0,
                to: 1,
                length: bar,
            },
            Edge {
                name: "r".into(),
                from: 1,
                to: 1,
                length: a.clone(),
            },
        ];
        let generators = vec![
            Generator {
                label: "x".into(),
                edge: 0,
                forward: true,
            },
            Generator {
                label: "y".into(),
                edge: 2,
                forward: true,
            },
        ];
        Self::new(vertices, edges, 0, vec![1], generators)
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn spanning_tree(&self) -> &[usize] {
        &self.spanning_tree
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn labels(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.label.clone()).collect()
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.edge_gen[e].is_none()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.from == v) as usize + (e.to == v) as usize)
            .sum()
    }

    pub fn volume(&self) -> Q {
        self.edges.iter().map(|e| &e.length).sum()
    }

    /// Same marked graph with new edge lengths.
    pub fn with_lengths(&self, lengths: &[Q]) -> Result<Self, GraphError> {
        let mut edges = self.edges.clone();
        for (e, l) in edges.iter_mut().zip(lengths) {
            e.length = l.clone();
        }
        Self::new(
            self.vertices.clone(),
            edges,
            self.basepoint,
            self.spanning_tree.clone(),
            self.generators.clone(),
        )
    }

    pub fn scaled(&self, c: &Q) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.length = &e.length * c;
        }
        g
    }

    /// All lengths divided by the total volume.
    pub fn normalize_volume(&self) -> Self {
        self.scaled(&(Q::one() / self.volume()))
    }

    pub fn with_labels(&self, labels: &[String]) -> Self {
        let mut g = self.clone();
        for (gen, l) in g.generators.iter_mut().zip(labels) {
            gen.label = l.clone();
        }
        g
    }

    pub fn tail(&self, s: Step) -> usize {
        let e = &self.edges[s.edge as usize];
        if s.forward {
            e.from
        } else {
            e.to
        }
    }

    pub fn head(&self, s: Step) -> usize {
        self.tail(s.rev())
    }

    pub fn step_length(&self, s: Step) -> &Q {
        &self.edges[s.edge as usize].length
    }

    /// The generator letter read when crossing `s`, if `s` is off the tree.
    pub fn step_letter(&self, s: Step) -> Option<Letter> {
        self.edge_gen[s.edge as usize].map(|(i, fwd)| Letter::new(i, fwd != s.forward))
    }

    /// Steps leaving `v` (a loop contributes both directions).
    pub fn steps_from(&self, v: usize) -> Vec<Step> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.from == v {
                out.push(Step::new(i, true));
            }
            if e.to == v {
                out.push(Step::new(i, false));
            }
        }
        out
    }

    pub fn path_length(&self, steps: &[Step]) -> Q {
        steps.iter().map(|&s| self.step_length(s)).sum()
    }

    /// Group element of a path: the generator letters it crosses, reduced.
    pub fn path_word(&self, steps: &[Step]) -> FreeWord {
        FreeWord::from_letters(steps.iter().filter_map(|&s| self.step_letter(s)))
    }

    /// Checks that consecutive steps are incident and returns the end vertex.
    pub fn path_end(&self, path: &EdgePath) -> Result<usize, GraphError> {
        let mut v = path.start;
        for (i, &s) in path.steps.iter().enumerate() {
            if s.edge as usize >= self.edges.len() || self.tail(s) != v {
                return Err(GraphError::BrokenPath(i));
            }
            v = self.head(s);
        }
        Ok(v)
    }

    /// Tree geodesic from the basepoint to `v`.
    pub fn tree_path_from_base(&self, v: usize) -> Vec<Step> {
        let mut out = Vec::new();
        let mut cur = v;
        while let Some(s) = self.parent[cur] {
            out.push(s);
            cur = self.tail(s);
        }
        out.reverse();
        out
    }

    /// Tree geodesic from `u` to `v`.
    pub fn tree_path(&self, u: usize, v: usize) -> Vec<Step> {
        let mut a = self.tree_path_from_base(u);
        let mut b = self.tree_path_from_base(v);
        let common = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
        a.drain(..common);
        b.drain(..common);
        let mut out = reverse_steps(&a);
        out.extend(b);
        out
    }

    /// Based loop of generator `i`.
    pub fn generator_loop(&self, i: usize) -> Vec<Step> {
        let g = &self.generators[i];
        let s = Step::new(g.edge, g.forward);
        let mut out = self.tree_path_from_base(self.tail(s));
        out.push(s);
        out.extend(reverse_steps(&self.tree_path_from_base(self.head(s))));
        out
    }

    /// The reduced based loop representing `w`.
    pub fn word_to_path(&self, w: &FreeWord) -> Result<EdgePath, GraphError> {
        w.check_rank(self.rank())?;
        let mut out = Vec::new();
        for &l in w.letters() {
            let lp = self.generator_loop(l.index());
            let lp = if l.is_inverse() { reverse_steps(&lp) } else { lp };
            for s in lp {
                push_reduced(&mut out, s);
            }
        }
        Ok(EdgePath {
            start: self.basepoint,
            steps: out,
        })
    }

    /// `d(x0, w x0)` in the universal cover, `x0` the lift of the basepoint.
    pub fn displacement(&self, w: &FreeWord) -> Result<Q, GraphError> {
        Ok(self.path_length(&self.word_to_path(w)?.steps))
    }

    /// Length of the cyclically reduced loop in the free homotopy class of `w`.
    pub fn translation_length(&self, w: &FreeWord) -> Result<Q, GraphError> {
        let p = self.word_to_path(w)?;
        Ok(self.path_length(cyclic_core(&p.steps)))
    }

    /// Integer-scaled lengths for fast repeated evaluation; `None` if they do
    /// not fit in 64 bits.
    pub fn length_table(&self) -> Option<LengthTable> {
        LengthTable::new(self)
    }

    pub fn describe_steps(&self, steps: &[Step]) -> String {
        steps
            .iter()
            .map(|s| {
                let name = &self.edges[s.edge as usize].name;
                if s.forward {
                    name.clone()
                } else {
                    format!("{name}~")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for MarkedMetricGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} vertices, {} edges, rank {}, basepoint {}",
            self.vertices.len(),
            self.edges.len(),
            self.rank(),
            self.vertices[self.basepoint]
        )?;
        for (i, e) in self.edges.iter().enumerate() {
            let gen = match self.edge_gen[i] {
                Some((g, fwd)) => format!(
                    "  generator {}{}",
                    self.generators[g].label,
                    if fwd { "" } else { " (reversed)" }
                ),
                None => "  tree".to_string(),
            };
            writeln!(
                f,
                "  {}: {} -> {}  length {}{}",
                e.name,
                self.vertices[e.from],
                self.vertices[e.to],
                format_rational(&e.length),
                gen
            )?;
        }
        Ok(())
    }
}

/// Breadth-first spanning tree at `root`, preferring earlier edges.
pub fn bfs_tree(vertex_count: usize, edges: &[Edge], root: usize) -> Vec<usize> {
    let mut seen = vec![false; vertex_count];
    let mut tree = Vec::new();
    if root >= vertex_count {
        return tree;
    }
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for (i, e) in edges.iter().enumerate() {
            let other = if e.from == v {
                e.to
            } else if e.to == v {
                e.from
            } else {
                continue;
            };
            if !seen[other] {
                seen[other] = true;
                tree.push(i);
                queue.push_back(other);
            }
        }
    }
    tree.sort_unstable();
    tree
}

/// The cyclically reduced core of a reduced closed path.
pub(crate) fn cyclic_core(steps: &[Step]) -> &[Step] {
    let mut lo = 0;
    let mut hi = steps.len();
    while hi - lo >= 2 && steps[hi - 1] == steps[lo].rev() {
        lo += 1;
        hi -= 1;
    }
    &steps[lo..hi]
}

/// Edge lengths scaled by a common denominator, with tree distances between
/// the endpoints of generator edges precomputed.
///
/// For a cyclically reduced word `g1 ... gk` the cyclically reduced loop is
/// the concatenation of the generator edges joined by tree geodesics, because
/// tree segments contain no generator edge and consecutive letters never
/// cancel. This gives translation lengths without building paths.
#[derive(Debug, Clone)]
pub struct LengthTable {
    denom: Q,
    /// Start and end vertex of each letter's edge crossing.
    letter_ends: Vec<(usize, usize)>,
    letter_len: Vec<i64>,
    tree_dist: Vec<Vec<i64>>,
    base: usize,
}

impl LengthTable {
    fn new(g: &MarkedMetricGraph) -> Option<Self> {
        let d = common_denominator(g.edges.iter().map(|e| &e.length));
        let scaled: Vec<i64> = g
            .edges
            .iter()
            .map(|e| (e.length.numer() * (&d / e.length.denom())).to_i64())
            .collect::<Option<_>>()?;
        let nv = g.vertex_count();
        let mut tree_dist = vec![vec![0i64; nv]; nv];
        for (u, row) in tree_dist.iter_mut().enumerate() {
            for (v, cell) in row.iter_mut().enumerate() {
                let mut acc = 0i64;
                for s in g.tree_path(u, v) {
                    acc = acc.checked_add(scaled[s.edge as usize])?;
                }
                *cell = acc;
            }
        }
        let mut letter_ends = Vec::new();
        let mut letter_len = Vec::new();
        for gen in &g.generators {
            let s = Step::new(gen.edge, gen.forward);
            letter_ends.push((g.tail(s), g.head(s)));
            letter_ends.push((g.head(s), g.tail(s)));
            letter_len.push(scaled[gen.edge]);
            letter_len.push(scaled[gen.edge]);
        }
        Some(LengthTable {
            denom: Q::from_integer(d),
            letter_ends,
            letter_len,
            tree_dist,
            base: g.basepoint,
        })
    }

    /// Scaled translation length of a cyclically reduced word.
    pub fn scaled_translation_length(&self, w: &[Letter]) -> i64 {
        let k = w.len();
        let mut acc = 0i64;
        for i in 0..k {
            let a = w[i].0 as usize;
            let b = w[(i + 1) % k].0 as usize;
            acc += self.letter_len[a] + self.tree_dist[self.letter_ends[a].1][self.letter_ends[b].0];
        }
        acc
    }

    /// Scaled displacement of the basepoint lift by a reduced word.
    pub fn scaled_displacement(&self, w: &[Letter]) -> i64 {
        let Some(first) = w.first() else { return 0 };
        let mut acc = self.tree_dist[self.base][self.letter_ends[first.0 as usize].0];
        for i in 0..w.len() {
            let a = w[i].0 as usize;
            acc += self.letter_len[a];
            let next = match w.get(i + 1) {
                Some(b) => self.letter_ends[b.0 as usize].0,
                None => self.base,
            };
            acc += self.tree_dist[self.letter_ends[a].1][next];
        }
        acc
    }

    pub fn translation_length(&self, w: &FreeWord) -> Q {
        let c = w.cyclically_reduced();
        Q::from_integer(self.scaled_translation_length(c.letters()).into()) / &self.denom
    }

    pub fn displacement(&self, w: &FreeWord) -> Q {
        Q::from_integer(self.scaled_displacement(w.letters()).into()) / &self.denom
    }

    /// The common denominator `D`: scaled values are lengths times `D`.
    pub fn denominator(&self) -> &Q {
        &self.denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    fn rose2() -> MarkedMetricGraph {
        MarkedMetricGraph::rose(&[q(1), q(1)])
    }

    fn w(g: &MarkedMetricGraph, s: &str) -> FreeWord {
        parse_word(s, &g.labels()).unwrap()
    }

    #[test]
    fn ranks_of_small_graphs() {
        assert_eq!(rose2().rank(), 2);
        assert_eq!(MarkedMetricGraph::figure_five(&qr(1, 4)).unwrap().rank(), 2);
        assert_eq!(MarkedMetricGraph::theta([q(1), q(1), q(1)]).rank(), 2);
    }

    #[test]
    fn every_violation_is_reported() {
        let vertices = vec!["u".to_string(), "v".to_string(), "w".to_string()];
        let edges = vec![
            Edge {
                name: "e".into(),
                from: 0,
                to: 0,
                length: q(0),
            },
            Edge {
                name: "f".into(),
                from: 1,
                to: 2,
                length: q(1),
            },
        ];
        let err = validate(&vertices, &edges, &[], &[]).unwrap_err();
        let GraphError::Invalid(v) = err else { panic!() };
        assert!(v.contains(&Violation::NonpositiveLength { edge: "e".into() }));
        assert!(v.contains(&Violation::Disconnected));
        assert!(v.iter().any(|x| matches!(x, Violation::ValenceBelowTwo { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::BadSpanningTree(_))));
        let rose = rose2();
        let err = validate(
            rose.vertex_names(),
            rose.edges(),
            &[],
            &rose.generators()[..1],
        )
        .unwrap_err();
        assert_eq!(
            err,
            GraphError::Invalid(vec![Violation::MarkingRankMismatch {
                rank: 2,
                generators: 1
            }])
        );
    }

    #[test]
    fn rose_paths_and_lengths() {
        let g = rose2();
        let p = g.word_to_path(&w(&g, "a")).unwrap();
        assert_eq!(p.steps.len(), 1);
        assert_eq!(g.path_length(&p.steps), q(1));
        assert!(g.word_to_path(&w(&g, "a A")).unwrap().is_empty());
        assert_eq!(g.displacement(&w(&g, "a b")).unwrap(), q(2));
        assert_eq!(g.displacement(&w(&g, "a b A")).unwrap(), q(3));
        assert_eq!(g.displacement(&FreeWord::identity()).unwrap(), q(0));
        assert_eq!(g.translation_length(&w(&g, "a b A")).unwrap(), q(1));
        assert!(matches!(
            g.word_to_path(&FreeWord::gen(2)),
            Err(GraphError::BadWord(_))
        ));
    }

    #[test]
    fn figure_five_lengths() {
        let a = qr(1, 4);
        let g = MarkedMetricGraph::figure_five(&a).unwrap();
        let y = g.word_to_path(&w(&g, "y")).unwrap();
        assert_eq!(g.describe_steps(&y.steps), "s r s~");
        assert_eq!(g.path_length(&y.steps), q(2) * (q(1) - q(2) * &a) + &a);
        assert_eq!(g.translation_length(&w(&g, "y")).unwrap(), a);
        assert_eq!(
            g.translation_length(&w(&g, "x y")).unwrap(),
            q(2) - q(2) * &a
        );
        assert_eq!(g.volume(), q(1));
        assert_eq!(g.normalize_volume(), g);
    }

    #[test]
    fn normalize_rose() {
        let g = rose2().normalize_volume();
        assert_eq!(g.edges()[0].length, qr(1, 2));
        assert_eq!(g.volume(), q(1));
    }

    #[test]
    fn table_agrees_with_paths() {
        let graphs = [
            MarkedMetricGraph::figure_five(&qr(1, 3)).unwrap(),
            MarkedMetricGraph::theta([qr(1, 2), qr(2, 3), qr(5, 4)]),
            rose2(),
        ];
        for g in &graphs {
            let t = g.length_table().unwrap();
            for u in ball(2, 5, false) {
                assert_eq!(t.translation_length(&u), g.translation_length(&u).unwrap());
                assert_eq!(t.displacement(&u), g.displacement(&u).unwrap());
            }
        }
    }

    #[test]
    fn tree_paths() {
        let g = MarkedMetricGraph::figure_five(&qr(1, 4)).unwrap();
        assert_eq!(g.tree_path(1, 0), vec![Step::new(1, false)]);
        assert!(g.tree_path(1, 1).is_empty());
        assert_eq!(g.step_letter(Step::new(2, false)), Some(Letter::new(1, true)));
        assert_eq!(g.step_letter(Step::new(1, true)), None);
    }
}
