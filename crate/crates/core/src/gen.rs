//! Random instances for property suites and self-checks.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::bruhat_tits::{lambda, MatSL2};
use crate::graph::{Edge, MarkedMetricGraph};
use crate::padic::Prime;
use crate::rational::{q, Q};
use crate::stretch::{Automorphism, MarkedPoint, Representation};

/// `p^e * u` with `e` in `[-3, 3]` and `u` a small nonzero integer.
fn elementary_entry<R: Rng>(rng: &mut R, p: Prime, min_exp: i64) -> Q {
    let e = rng.gen_range(min_exp..=3);
    let u: i64 = rng.gen_range(1..=5) * if rng.gen() { 1 } else { -1 };
    p.pow(e) * q(u)
}

/// A product of `factors` elementary matrices with entries `p^e * u`.
pub fn random_matrix<R: Rng>(rng: &mut R, p: Prime, factors: usize) -> MatSL2 {
    let mut acc = MatSL2::identity(p);
    for _ in 0..factors {
        let x = elementary_entry(rng, p, -3);
        let m = if rng.gen() {
            MatSL2::upper(x, p)
        } else {
            MatSL2::lower(x, p)
        };
        acc = &acc * &m;
    }
    acc
}

/// A random element of SL2(Z_p).
pub fn random_k<R: Rng>(rng: &mut R, p: Prime) -> MatSL2 {
    let mut acc = MatSL2::identity(p);
    for _ in 0..4 {
        let x = elementary_entry(rng, p, 0);
        let m = match rng.gen_range(0..3) {
            0 => MatSL2::upper(x, p),
            1 => MatSL2::lower(x, p),
            _ => MatSL2::weyl(p),
        };
        acc = &acc * &m;
    }
    acc
}

/// A random matrix with positive translation length.
pub fn random_hyperbolic<R: Rng>(rng: &mut R, p: Prime) -> MatSL2 {
    loop {
        let factors = rng.gen_range(2..=4);
        let g = random_matrix(rng, p, factors);
        if lambda(&g) > 0 {
            return g;
        }
    }
}

/// A positive rational with denominator at most `max_denom`, at most 2.
pub fn random_length<R: Rng>(rng: &mut R, max_denom: i64) -> Q {
    let d = rng.gen_range(1..=max_denom);
    let n = rng.gen_range(1..=2 * d);
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// A connected graph of the given rank on at most `max_vertices` vertices,
/// every valence at least 2, lengths with denominators at most `max_denom`,
/// marked by a breadth-first tree.
pub fn random_graph<R: Rng>(rng: &mut R, rank: usize, max_vertices: usize, max_denom: i64) -> MarkedMetricGraph {
    loop {
        let nv = rng.gen_range(1..=max_vertices.max(1));
        let mut edges: Vec<(usize, usize, Q)> = Vec::new();
        for v in 1..nv {
            edges.push((rng.gen_range(0..v), v, random_length(rng, max_denom)));
        }
        for _ in 0..rank {
            edges.push((rng.gen_range(0..nv), rng.gen_range(0..nv), random_length(rng, max_denom)));
        }
        edges.shuffle(rng);
        let base = rng.gen_range(0..nv);
        if let Ok(g) = MarkedMetricGraph::from_edges(nv, &edges, base) {
            return g;
        }
    }
}

/// A uniformly shuffled spanning tree (Kruskal on a random edge order).
pub fn random_spanning_tree<R: Rng>(rng: &mut R, g: &MarkedMetricGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.edges().len()).collect();
    order.shuffle(rng);
    let mut parent: Vec<usize> = (0..g.vertex_count()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut tree = Vec::new();
    for e in order {
        let Edge { from, to, .. } = &g.edges()[e];
        let (a, b) = (find(&mut parent, *from), find(&mut parent, *to));
        if a != b {
            parent[a] = b;
            tree.push(e);
        }
    }
    tree.sort_unstable();
    tree
}

/// A random point of Outer space of the given rank, volume 1.
pub fn random_point<R: Rng>(rng: &mut R, rank: usize, max_vertices: usize, max_denom: i64) -> MarkedPoint {
    let g = random_graph(rng, rank, max_vertices, max_denom).normalize_volume();
    let moves = rng.gen_range(0..=4);
    MarkedPoint::with_marking(g, Automorphism::random(rng, rank, moves)).expect("same rank")
}

/// The same point described by another spanning tree and basepoint.
pub fn isometric_remarking<R: Rng>(rng: &mut R, p: &MarkedPoint) -> MarkedPoint {
    let tree = random_spanning_tree(rng, &p.graph);
    let base = rng.gen_range(0..p.graph.vertex_count());
    p.remarked(tree, base).expect("valid spanning tree")
}

/// Source graph and a remarking representation into a random target graph.
pub fn random_graph_instance<R: Rng>(
    rng: &mut R,
    rank: usize,
    max_denom: i64,
) -> (MarkedMetricGraph, Representation) {
    let src = random_graph(rng, rank, 4, max_denom);
    let tgt = random_graph(rng, rank, 4, max_denom);
    let moves = rng.gen_range(0..=5);
    let b = MarkedPoint::with_marking(tgt, Automorphism::random(rng, rank, moves)).expect("rank");
    let rep = MarkedPoint::new(src.clone())
        .representation_to(&b)
        .expect("same rank");
    (src, rep)
}

/// Complete bipartite graph `K_{m,n}` with unit lengths.
pub fn complete_bipartite(m: usize, n: usize) -> MarkedMetricGraph {
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..n {
            edges.push((i, m + j, q(1)));
        }
    }
    MarkedMetricGraph::from_edges(m + n, &edges, 0).expect("complete bipartite graph")
}

/// A connected `v`-regular multigraph (loops count twice) with `vertices`
/// vertices, from a random perfect matching of half-edges.
pub fn random_regular<R: Rng>(rng: &mut R, v: usize, vertices: usize) -> Option<MarkedMetricGraph> {
    if (v * vertices) % 2 != 0 || vertices == 0 {
        return None;
    }
    for _ in 0..1000 {
        let mut stubs: Vec<usize> = (0..vertices).flat_map(|x| std::iter::repeat_n(x, v)).collect();
        stubs.shuffle(rng);
        let edges: Vec<(usize, usize, Q)> = stubs.chunks(2).map(|c| (c[0], c[1], q(1))).collect();
        if let Ok(g) = MarkedMetricGraph::from_edges(vertices, &edges, 0) {
            return Some(g);
        }
    }
    None
}
