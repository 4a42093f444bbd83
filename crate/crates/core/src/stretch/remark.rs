use num_traits::One;
use rand::Rng;
use serde::Serialize;

use super::{stretch_factor, Representation, StretchError, StretchReport};
use crate::graph::{reverse_steps, FreeWord, MarkedMetricGraph};
use crate::rational::{serde_q, Q};

/// An automorphism of a free group, stored with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automorphism {
    images: Vec<FreeWord>,
    inverse: Vec<FreeWord>,
}

impl Automorphism {
    pub fn identity(rank: usize) -> Self {
        let images: Vec<_> = (0..rank).map(FreeWord::gen).collect();
        Automorphism {
            inverse: images.clone(),
            images,
        }
    }

    /// From images and inverse images; fails unless they compose to the identity.
    pub fn new(images: Vec<FreeWord>, inverse: Vec<FreeWord>) -> Option<Self> {
        let a = Automorphism { images, inverse };
        a.is_consistent().then_some(a)
    }

    fn is_consistent(&self) -> bool {
        let n = self.images.len();
        self.inverse.len() == n
            && (0..n).all(|i| {
                let g = FreeWord::gen(i);
                self.apply(&self.invert_word(&g)) == g && self.invert_word(&self.apply(&g)) == g
            })
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[FreeWord] {
        &self.images
    }

    pub fn inverse_images(&self) -> &[FreeWord] {
        &self.inverse
    }

    pub fn apply(&self, w: &FreeWord) -> FreeWord {
        w.substitute(&self.images)
    }

    pub fn invert_word(&self, w: &FreeWord) -> FreeWord {
        w.substitute(&self.inverse)
    }

    pub fn inverse(&self) -> Automorphism {
        Automorphism {
            images: self.inverse.clone(),
            inverse: self.images.clone(),
        }
    }

    /// `self after other`: `w -> self(other(w))`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism {
            images: other.images.iter().map(|w| self.apply(w)).collect(),
            inverse: self.inverse.iter().map(|w| other.invert_word(w)).collect(),
        }
    }

    /// `x_i -> x_i x_j^e` (or `x_j^e x_i` when `left`), `e = -1` if `inverted`.
    pub fn transvection(rank: usize, i: usize, j: usize, left: bool, inverted: bool) -> Self {
        assert_ne!(i, j);
        let mut images: Vec<_> = (0..rank).map(FreeWord::gen).collect();
        let mut inverse = images.clone();
        let xj = FreeWord::gen(j).pow(if inverted { -1 } else { 1 });
        let xi = FreeWord::gen(i);
        if left {
            images[i] = xj.mul(&xi);
            inverse[i] = xj.inverse().mul(&xi);
        } else {
            images[i] = xi.mul(&xj);
            inverse[i] = xi.mul(&xj.inverse());
        }
        Automorphism { images, inverse }
    }

    pub fn inversion(rank: usize, i: usize) -> Self {
        let mut images: Vec<_> = (0..rank).map(FreeWord::gen).collect();
        images[i] = images[i].inverse();
        Automorphism {
            inverse: images.clone(),
            images,
        }
    }

    pub fn permutation(perm: &[usize]) -> Self {
        let images: Vec<_> = perm.iter().map(|&p| FreeWord::gen(p)).collect();
        let mut inverse = vec![FreeWord::identity(); perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = FreeWord::gen(i);
        }
        Automorphism { images, inverse }
    }

    /// A product of `moves` random Nielsen moves.
    pub fn random<R: Rng>(rng: &mut R, rank: usize, moves: usize) -> Self {
        let mut acc = Automorphism::identity(rank);
        for _ in 0..moves {
            let step = if rank >= 2 && rng.gen_bool(0.8) {
                let i = rng.gen_range(0..rank);
                let mut j = rng.gen_range(0..rank - 1);
                if j >= i {
                    j += 1;
                }
                Automorphism::transvection(rank, i, j, rng.gen(), rng.gen())
            } else {
                Automorphism::inversion(rank, rng.gen_range(0..rank))
            };
            acc = step.compose(&acc);
        }
        acc
    }
}

/// A point of Outer space: a marked metric graph whose marking is precomposed
/// with an automorphism, so the abstract generator `x_i` acts as the loop of
/// the graph word `marking(x_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedPoint {
    pub graph: MarkedMetricGraph,
    pub marking: Automorphism,
}

impl MarkedPoint {
    pub fn new(graph: MarkedMetricGraph) -> Self {
        let marking = Automorphism::identity(graph.rank());
        MarkedPoint { graph, marking }
    }

    pub fn with_marking(graph: MarkedMetricGraph, marking: Automorphism) -> Result<Self, StretchError> {
        if marking.rank() != graph.rank() {
            return Err(StretchError::RankMismatch {
                expected: graph.rank(),
                found: marking.rank(),
            });
        }
        Ok(MarkedPoint { graph, marking })
    }

    pub fn normalize_volume(&self) -> Self {
        MarkedPoint {
            graph: self.graph.normalize_volume(),
            marking: self.marking.clone(),
        }
    }

    /// Length of the abstract class `w` at this point.
    pub fn length(&self, w: &FreeWord) -> Result<Q, StretchError> {
        Ok(self.graph.translation_length(&self.marking.apply(w))?)
    }

    /// The same point of Outer space described with another spanning tree and
    /// basepoint: translation lengths of every abstract class are unchanged.
    pub fn remarked(&self, spanning_tree: Vec<usize>, basepoint: usize) -> Result<Self, StretchError> {
        let old = &self.graph;
        let new = MarkedMetricGraph::with_tree(
            old.vertex_names().to_vec(),
            old.edges().to_vec(),
            basepoint,
            spanning_tree,
            &old.labels(),
        )?;
        // sigma runs from the new basepoint to the old one.
        let sigma = new.tree_path(basepoint, old.basepoint());
        let conj = |inner: Vec<crate::graph::Step>, outer: &[crate::graph::Step]| {
            let mut p = outer.to_vec();
            p.extend(inner);
            p.extend(reverse_steps(outer));
            p
        };
        let forward: Vec<FreeWord> = (0..old.rank())
            .map(|i| new.path_word(&conj(old.generator_loop(i), &sigma)))
            .collect();
        let back: Vec<FreeWord> = (0..new.rank())
            .map(|j| old.path_word(&conj(new.generator_loop(j), &reverse_steps(&sigma))))
            .collect();
        let change = Automorphism::new(forward, back)
            .ok_or_else(|| StretchError::InconsistentMap("spanning tree change".into()))?;
        Ok(MarkedPoint {
            graph: new,
            marking: change.compose(&self.marking),
        })
    }

    /// The representation from this point's universal cover to `other`'s:
    /// generator `i` of this graph maps to `other.marking(self.marking^-1(x_i))`.
    pub fn representation_to(&self, other: &MarkedPoint) -> Result<Representation, StretchError> {
        if self.graph.rank() != other.graph.rank() {
            return Err(StretchError::RankMismatch {
                expected: self.graph.rank(),
                found: other.graph.rank(),
            });
        }
        let images = self
            .marking
            .inverse_images()
            .iter()
            .map(|w| other.marking.apply(w))
            .collect();
        Representation::graph(self.graph.rank(), other.graph.clone(), images)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OsDistance {
    /// `C = exp(L)`.
    #[serde(with = "serde_q")]
    pub ratio: Q,
    pub witness_label: String,
    /// Whether either input had to be rescaled to volume 1.
    pub normalized: bool,
    #[serde(skip)]
    pub report: StretchReport,
}

/// The asymmetric distance `L(A, B) = log C`, reported as the exact ratio `C`;
/// inputs are rescaled to volume 1 first.
pub fn os_distance(a: &MarkedPoint, b: &MarkedPoint) -> Result<OsDistance, StretchError> {
    let normalized = !a.graph.volume().is_one() || !b.graph.volume().is_one();
    let a = a.normalize_volume();
    let b = b.normalize_volume();
    let report = stretch_factor(&a.graph, &a.representation_to(&b)?)?;
    Ok(OsDistance {
        ratio: report.value.clone(),
        witness_label: report.witness_label.clone(),
        normalized,
        report,
    })
}

/// [`os_distance`] for two graphs whose generators are identified by label
/// (by position when the label sets differ).
pub fn os_distance_graphs(
    a: &MarkedMetricGraph,
    b: &MarkedMetricGraph,
) -> Result<OsDistance, StretchError> {
    if a.rank() != b.rank() {
        return Err(StretchError::RankMismatch {
            expected: a.rank(),
            found: b.rank(),
        });
    }
    let la = a.labels();
    let lb = b.labels();
    let perm: Vec<usize> = match la
        .iter()
        .map(|l| lb.iter().position(|m| m == l))
        .collect::<Option<Vec<_>>>()
    {
        Some(p) => p,
        None => (0..a.rank()).collect(),
    };
    let pb = MarkedPoint::with_marking(b.clone(), Automorphism::permutation(&perm))?;
    os_distance(&MarkedPoint::new(a.clone()), &pb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ball;
    use crate::rational::{q, qr};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_automorphisms_are_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for rank in 1..4 {
            for _ in 0..20 {
                let a = Automorphism::random(&mut rng, rank, 6);
                assert!(a.is_consistent());
                let b = Automorphism::random(&mut rng, rank, 4);
                assert!(a.compose(&b).is_consistent());
                assert!(a.inverse().compose(&a) == Automorphism::identity(rank));
            }
        }
    }

    #[test]
    fn figure_five_distances() {
        let y1 = MarkedMetricGraph::figure_five(&qr(1, 4)).unwrap();
        let y2 = MarkedMetricGraph::figure_five(&qr(1, 3)).unwrap();
        let d = os_distance_graphs(&y1, &y2).unwrap();
        assert_eq!(d.ratio, qr(4, 3));
        assert!(!d.normalized);
        assert_eq!(os_distance_graphs(&y2, &y1).unwrap().ratio, qr(9, 8));
        assert_eq!(os_distance_graphs(&y1, &y1).unwrap().ratio, q(1));
    }

    #[test]
    fn remarking_preserves_lengths() {
        let g = MarkedMetricGraph::theta([qr(1, 3), qr(1, 4), qr(5, 12)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = MarkedPoint::with_marking(g, Automorphism::random(&mut rng, 2, 5)).unwrap();
        let p2 = p.remarked(vec![2], 1).unwrap();
        for w in ball(2, 4, false) {
            assert_eq!(p.length(&w).unwrap(), p2.length(&w).unwrap());
        }
        assert_eq!(os_distance(&p, &p2).unwrap().ratio, q(1));
        assert_eq!(os_distance(&p2, &p).unwrap().ratio, q(1));
    }

    #[test]
    fn auto_normalization() {
        let a = MarkedMetricGraph::rose(&[q(1), q(1)]);
        let b = MarkedMetricGraph::rose(&[q(1), q(3)]);
        let d = os_distance_graphs(&a, &b).unwrap();
        assert!(d.normalized);
        assert_eq!(d.ratio, qr(3, 2));
    }
}
