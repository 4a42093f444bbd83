use std::collections::BTreeMap;

use super::word::least_rotation;
use super::{reverse_steps, FreeWord, MarkedMetricGraph, Step};
use crate::rational::Q;

/// A closed non-backtracking edge loop with every vertex visited at most
/// twice, together with the conjugacy class it represents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// Least rotation of the loop, oriented so that it reads `word`.
    pub steps: Vec<Step>,
    /// Canonical cyclic form of the represented class.
    pub word: FreeWord,
    pub length: Q,
}

/// All candidate loops up to rotation and reversal, sorted by word.
pub fn candidates(g: &MarkedMetricGraph) -> Vec<Candidate> {
    let mut found: BTreeMap<Vec<Step>, ()> = BTreeMap::new();
    let nv = g.vertex_count();
    let out_steps: Vec<Vec<Step>> = (0..nv).map(|v| g.steps_from(v)).collect();
    for v0 in 0..nv {
        let mut visits = vec![0u8; nv];
        let mut path = Vec::new();
        search(g, &out_steps, v0, v0, &mut visits, &mut path, &mut found);
    }
    let mut out: Vec<Candidate> = found
        .into_keys()
        .map(|steps| {
            let word = g.path_word(&steps).canonical_cyclic();
            let steps = if g.path_word(&steps).conjugacy_canonical() == word {
                steps
            } else {
                least_rotation(&reverse_steps(&steps))
            };
            Candidate {
                length: g.path_length(&steps),
                word,
                steps,
            }
        })
        .collect();
    out.sort_by(|a, b| a.word.cmp(&b.word));
    out
}

fn search(
    g: &MarkedMetricGraph,
    out_steps: &[Vec<Step>],
    v0: usize,
    cur: usize,
    visits: &mut [u8],
    path: &mut Vec<Step>,
    found: &mut BTreeMap<Vec<Step>, ()>,
) {
    if visits[cur] >= 2 {
        return;
    }
    visits[cur] += 1;
    for &s in &out_steps[cur] {
        if path.last() == Some(&s.rev()) {
            continue;
        }
        let next = g.head(s);
        if next < v0 {
            continue;
        }
        path.push(s);
        if next == v0 && path[0] != s.rev() {
            found.insert(canonical_cycle(path), ());
        }
        search(g, out_steps, v0, next, visits, path, found);
        path.pop();
    }
    visits[cur] -= 1;
}

fn canonical_cycle(steps: &[Step]) -> Vec<Step> {
    least_rotation(steps).min(least_rotation(&reverse_steps(steps)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_word;
    use crate::rational::{q, qr};

    fn words(g: &MarkedMetricGraph) -> Vec<String> {
        let labels = g.labels();
        candidates(g)
            .iter()
            .map(|c| c.word.display(&labels).to_string())
            .collect()
    }

    #[test]
    fn rose_candidates() {
        let g = MarkedMetricGraph::rose(&[q(1), q(1)]);
        assert_eq!(words(&g), ["a", "a a", "a b", "a B", "b", "b b"]);
    }

    #[test]
    fn figure_five_candidates() {
        let g = MarkedMetricGraph::figure_five(&qr(1, 4)).unwrap();
        assert_eq!(words(&g), ["x", "x x", "x y", "x Y", "y", "y y"]);
        let xy = candidates(&g)
            .into_iter()
            .find(|c| c.word == parse_word("x y", &g.labels()).unwrap())
            .unwrap();
        assert_eq!(xy.length, q(2) - qr(1, 2));
    }

    #[test]
    fn theta_candidates() {
        let g = MarkedMetricGraph::theta([q(1), q(1), q(1)]);
        let c = candidates(&g);
        // The three two-edge circuits, each with every vertex visited once.
        let simple: Vec<_> = c.iter().filter(|c| c.steps.len() == 2).collect();
        assert_eq!(simple.len(), 3);
        for cand in &c {
            assert!(cand.steps.len() <= 4);
            assert!(cand.word.is_cyclically_reduced());
            assert_eq!(g.path_word(&cand.steps).conjugacy_canonical(), cand.word);
        }
    }

    #[test]
    fn candidates_visit_vertices_at_most_twice() {
        let g = MarkedMetricGraph::from_edges(
            3,
            &[(0, 1, q(1)), (1, 2, q(2)), (2, 0, q(1)), (0, 0, q(3)), (1, 2, q(1))],
            0,
        )
        .unwrap();
        for c in candidates(&g) {
            let mut count = vec![0; 3];
            for &s in &c.steps {
                count[g.tail(s)] += 1;
            }
            assert!(count.iter().all(|&k| k <= 2));
            let n = c.steps.len();
            for i in 0..n {
                assert_ne!(c.steps[(i + 1) % n], c.steps[i].rev());
            }
            assert_eq!(c.length, g.translation_length(&c.word).unwrap());
        }
    }
}
