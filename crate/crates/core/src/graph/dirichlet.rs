//! The Dirichlet domain `D` of the basepoint lift `x0` in the universal
//! cover, the set `F` of nontrivial elements whose translates of `D` meet
//! `D`, and the distance `delta` from `D` to the complement of the union of
//! `D` and its `F`-translates.
//!
//! A point of the cover is in `g D` exactly when `g x0` is among its nearest
//! orbit points. Nearest orbit points of a vertex lift are read off the
//! shortest paths to the basepoint in the quotient graph; along an edge they
//! are those of the nearer endpoint, with a tie at one interior point when the
//! two endpoint distances differ by less than the edge length. Both `F` and
//! `delta` therefore come from shortest-path data plus a walk outward from
//! `x0` that stops as soon as the walk leaves the union. `D` is convex, so
//! along each ray the distance to `D` is the length travelled since leaving
//! it. The walk never goes beyond twice the largest generator displacement.

use std::collections::HashSet;

use num_traits::Zero;

use super::{FreeWord, MarkedMetricGraph, Step};
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dirichlet {
    pub delta: Q,
    /// Sorted by length, then lexicographically.
    pub f: Vec<FreeWord>,
}

struct Data<'a> {
    g: &'a MarkedMetricGraph,
    dist: Vec<Q>,
    /// Words of the shortest paths from the basepoint to each vertex.
    sp: Vec<Vec<FreeWord>>,
    members: HashSet<FreeWord>,
    out_steps: Vec<Vec<Step>>,
    radius: Q,
}

/// Distances from `root` in the quotient graph.
pub(crate) fn distances(g: &MarkedMetricGraph, root: usize) -> Vec<Option<Q>> {
    let n = g.vertex_count();
    let mut dist: Vec<Option<Q>> = vec![None; n];
    dist[root] = Some(Q::zero());
    let mut done = vec![false; n];
    for _ in 0..n {
        let Some(u) = (0..n)
            .filter(|&v| !done[v] && dist[v].is_some())
            .min_by(|&a, &b| dist[a].cmp(&dist[b]))
        else {
            break;
        };
        done[u] = true;
        let du = dist[u].clone().expect("reached");
        for s in g.steps_from(u) {
            let v = g.head(s);
            let cand = &du + g.step_length(s);
            if dist[v].as_ref().is_none_or(|d| cand < *d) {
                dist[v] = Some(cand);
            }
        }
    }
    dist
}

fn shortest_path_words(g: &MarkedMetricGraph, dist: &[Q]) -> Vec<Vec<FreeWord>> {
    let n = g.vertex_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dist[a].cmp(&dist[b]));
    let mut sp: Vec<Vec<FreeWord>> = vec![Vec::new(); n];
    sp[g.basepoint()] = vec![FreeWord::identity()];
    for &v in &order {
        if v == g.basepoint() {
            continue;
        }
        let mut words = Vec::new();
        for s in g.steps_from(v) {
            // s leaves v; its reverse enters v from u.
            let u = g.head(s);
            if &dist[u] + g.step_length(s) == dist[v] {
                let letter = g.path_word(&[s.rev()]);
                for p in &sp[u] {
                    words.push(p.mul(&letter));
                }
            }
        }
        sp[v] = words;
    }
    sp
}

pub fn dirichlet_delta(g: &MarkedMetricGraph) -> Dirichlet {
    let dist: Vec<Q> = distances(g, g.basepoint())
        .into_iter()
        .map(|d| d.expect("connected graph"))
        .collect();
    let sp = shortest_path_words(g, &dist);

    let mut f: HashSet<FreeWord> = HashSet::new();
    for words in &sp {
        for p in words {
            for q in words {
                if p != q {
                    f.insert(p.mul(&q.inverse()));
                }
            }
        }
    }
    for (i, e) in g.edges().iter().enumerate() {
        let gap = &dist[e.from] - &dist[e.to];
        let gap = if gap < Q::zero() { -gap } else { gap };
        if gap >= e.length {
            continue;
        }
        let letter = g.path_word(&[Step::new(i, true)]);
        for pa in &sp[e.from] {
            for pb in &sp[e.to] {
                let w = pa.mul(&letter).mul(&pb.inverse());
                f.insert(w.inverse());
                f.insert(w);
            }
        }
    }
    f.remove(&FreeWord::identity());

    let max_disp = (0..g.rank())
        .map(|i| g.displacement(&FreeWord::gen(i)).expect("generator"))
        .max()
        .unwrap_or_else(Q::zero);
    let mut members = f.clone();
    members.insert(FreeWord::identity());
    let data = Data {
        g,
        out_steps: (0..g.vertex_count()).map(|v| g.steps_from(v)).collect(),
        dist,
        sp,
        members,
        radius: &max_disp + &max_disp,
    };
    let mut best: Option<Q> = None;
    explore(
        &data,
        g.basepoint(),
        &FreeWord::identity(),
        &Q::zero(),
        None,
        None,
        &mut best,
    );
    let mut f: Vec<FreeWord> = f.into_iter().collect();
    f.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Dirichlet {
        delta: best.unwrap_or_else(Q::zero),
        f,
    }
}

impl Data<'_> {
    fn in_d(&self, v: usize, w: &FreeWord) -> bool {
        self.sp[v].contains(w)
    }

    fn in_union(&self, v: usize, w: &FreeWord) -> bool {
        self.sp[v]
            .iter()
            .any(|q| self.members.contains(&w.mul(&q.inverse())))
    }
}

/// Walks outward from the lift `(a, w)` at distance `depth` from `x0`;
/// `d_exit` is where the current ray left `D`, if it has.
fn explore(
    data: &Data,
    a: usize,
    w: &FreeWord,
    depth: &Q,
    came_by: Option<Step>,
    d_exit: Option<&Q>,
    best: &mut Option<Q>,
) {
    if *depth > data.radius {
        return;
    }
    let a_in_d = d_exit.is_none() && data.in_d(a, w);
    for &s in &data.out_steps[a] {
        if came_by.map(|c| c.rev()) == Some(s) {
            continue;
        }
        let b = data.g.head(s);
        let len = data.g.step_length(s);
        let w2 = w.mul(&data.g.path_word(&[s]));
        let tie = (&data.dist[b] + len - &data.dist[a]) / Q::from_integer(2.into());
        let split = depth + &tie;
        let exit_here;
        let d_exit_next: Option<Q> = match d_exit {
            Some(x) => Some(x.clone()),
            None if a_in_d && data.in_d(b, &w2) => None,
            None => {
                exit_here = split.clone();
                Some(exit_here)
            }
        };
        if data.in_union(b, &w2) {
            explore(data, b, &w2, &(depth + len), Some(s), d_exit_next.as_ref(), best);
        } else {
            let from = d_exit_next.unwrap_or_else(|| split.clone());
            let cand = &split - &from;
            if best.as_ref().is_none_or(|b| cand < *b) {
                *best = Some(cand);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_word;
    use crate::rational::{q, qr};

    #[test]
    fn unit_rose() {
        let g = MarkedMetricGraph::rose(&[q(1), q(1)]);
        let d = dirichlet_delta(&g);
        assert_eq!(d.delta, q(1));
        let labels = g.labels();
        let f: Vec<_> = d.f.iter().map(|w| w.display(&labels).to_string()).collect();
        assert_eq!(f, ["a", "A", "b", "B"]);
    }

    #[test]
    fn scaled_rose() {
        let g = MarkedMetricGraph::rose(&[q(2), q(2)]);
        assert_eq!(dirichlet_delta(&g).delta, q(2));
        let g = MarkedMetricGraph::rose(&[q(1), q(3)]);
        // The short loop's neighbours cover one unit past D on that side.
        assert_eq!(dirichlet_delta(&g).delta, q(1));
    }

    #[test]
    fn figure_five_at_left_vertex() {
        let g = MarkedMetricGraph::figure_five(&qr(1, 4)).unwrap();
        let d = dirichlet_delta(&g);
        let labels = g.labels();
        let y = parse_word("y", &labels).unwrap();
        let x = parse_word("x", &labels).unwrap();
        assert!(d.f.contains(&x) && d.f.contains(&y));
        assert!(d.delta > Q::zero());
    }
}
