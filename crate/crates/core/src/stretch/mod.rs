//! Equivariant stretch factors between trees with free-group actions.
//!
//! The stretch factor of a representation `rho` from the universal cover of a
//! marked graph to a target tree is the supremum over nontrivial classes of
//! `lambda(rho(g)) / lambda(g)`. It is attained on the finitely many candidate
//! loops of the source graph, which is what [`stretch_factor`] evaluates;
//! [`stretch_oracle`] scans every conjugacy class up to a word length.

mod plmap;
mod remark;

pub use plmap::{lipschitz_of_pl_map, PlMap};
pub use remark::{os_distance, os_distance_graphs, Automorphism, MarkedPoint, OsDistance};

use std::cmp::Ordering;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bruhat_tits::{lambda, mu, MatSL2, TreeError};
use crate::graph::{ball, candidates, FreeWord, GraphError, LengthTable, MarkedMetricGraph};
use crate::padic::Prime;
use crate::rational::{serde_q, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StretchError {
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("expected {expected} generator images, found {found}")]
    ImageCount { expected: usize, found: usize },
    #[error("inconsistent map: {0}")]
    InconsistentMap(String),
    #[error("operation needs a graph target")]
    NotGraphTarget,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

impl From<crate::graph::WordError> for StretchError {
    fn from(e: crate::graph::WordError) -> Self {
        StretchError::Graph(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    /// The universal cover of a marked graph; images are words in its generators.
    Graph {
        graph: MarkedMetricGraph,
        images: Vec<FreeWord>,
    },
    /// The Bruhat-Tits tree of SL2(Q_p).
    Sl2 { prime: Prime, images: Vec<MatSL2> },
}

/// A homomorphism from the free group of rank `source_rank` to the isometry
/// group of a tree, given on generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representation {
    source_rank: usize,
    target: Target,
}

impl Representation {
    pub fn graph(
        source_rank: usize,
        graph: MarkedMetricGraph,
        images: Vec<FreeWord>,
    ) -> Result<Self, StretchError> {
        if images.len() != source_rank {
            return Err(StretchError::ImageCount {
                expected: source_rank,
                found: images.len(),
            });
        }
        for w in &images {
            w.check_rank(graph.rank())?;
        }
        Ok(Representation {
            source_rank,
            target: Target::Graph { graph, images },
        })
    }

    pub fn sl2(source_rank: usize, prime: Prime, images: Vec<MatSL2>) -> Result<Self, StretchError> {
        if images.len() != source_rank {
            return Err(StretchError::ImageCount {
                expected: source_rank,
                found: images.len(),
            });
        }
        if let Some(m) = images.iter().find(|m| m.prime() != prime) {
            return Err(TreeError::PrimeMismatch(prime.get(), m.prime().get()).into());
        }
        Ok(Representation {
            source_rank,
            target: Target::Sl2 { prime, images },
        })
    }

    /// The marking-preserving identity onto `graph` (possibly with other lengths).
    pub fn identity(graph: &MarkedMetricGraph) -> Self {
        let images = (0..graph.rank()).map(FreeWord::gen).collect();
        Representation {
            source_rank: graph.rank(),
            target: Target::Graph {
                graph: graph.clone(),
                images,
            },
        }
    }

    pub fn source_rank(&self) -> usize {
        self.source_rank
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn target_graph(&self) -> Option<(&MarkedMetricGraph, &[FreeWord])> {
        match &self.target {
            Target::Graph { graph, images } => Some((graph, images)),
            Target::Sl2 { .. } => None,
        }
    }

    /// Every target length multiplied by `c`; matrix targets are unchanged.
    pub fn scaled(&self, c: &Q) -> Self {
        match &self.target {
            Target::Graph { graph, images } => Representation {
                source_rank: self.source_rank,
                target: Target::Graph {
                    graph: graph.scaled(c),
                    images: images.clone(),
                },
            },
            Target::Sl2 { .. } => self.clone(),
        }
    }

    /// `rho(w)` as a target word; `None` for matrix targets.
    pub fn image_word(&self, w: &FreeWord) -> Result<Option<FreeWord>, StretchError> {
        w.check_rank(self.source_rank)?;
        Ok(match &self.target {
            Target::Graph { images, .. } => Some(w.substitute(images)),
            Target::Sl2 { .. } => None,
        })
    }

    /// `rho(w)` as a matrix; `None` for graph targets.
    pub fn image_matrix(&self, w: &FreeWord) -> Result<Option<MatSL2>, StretchError> {
        w.check_rank(self.source_rank)?;
        Ok(match &self.target {
            Target::Graph { .. } => None,
            Target::Sl2 { prime, images } => Some(matrix_of(w, *prime, images)),
        })
    }

    /// Translation length of `rho(w)` on the target tree; 0 for elliptic images.
    pub fn image_translation_length(&self, w: &FreeWord) -> Result<Q, StretchError> {
        w.check_rank(self.source_rank)?;
        Ok(match &self.target {
            Target::Graph { graph, images } => graph.translation_length(&w.substitute(images))?,
            Target::Sl2 { prime, images } => {
                Q::from_integer(lambda(&matrix_of(w, *prime, images)).into())
            }
        })
    }

    /// Displacement of the target base vertex by `rho(w)`.
    pub fn image_displacement(&self, w: &FreeWord) -> Result<Q, StretchError> {
        w.check_rank(self.source_rank)?;
        Ok(match &self.target {
            Target::Graph { graph, images } => graph.displacement(&w.substitute(images))?,
            Target::Sl2 { prime, images } => Q::from_integer(mu(&matrix_of(w, *prime, images)).into()),
        })
    }

    fn check_source(&self, src: &MarkedMetricGraph) -> Result<(), StretchError> {
        if src.rank() != self.source_rank {
            return Err(StretchError::RankMismatch {
                expected: src.rank(),
                found: self.source_rank,
            });
        }
        Ok(())
    }
}

pub(crate) fn matrix_of(w: &FreeWord, prime: Prime, images: &[MatSL2]) -> MatSL2 {
    let mut acc = MatSL2::identity(prime);
    for l in w.letters() {
        let m = &images[l.index()];
        acc = if l.is_inverse() {
            &acc * &m.inverse()
        } else {
            &acc * m
        };
    }
    acc
}

/// One row of a stretch table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioRow {
    #[serde(skip)]
    pub word: FreeWord,
    #[serde(rename = "class")]
    pub label: String,
    #[serde(with = "serde_q")]
    pub source: Q,
    #[serde(with = "serde_q")]
    pub target: Q,
    #[serde(with = "serde_q")]
    pub ratio: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StretchReport {
    #[serde(with = "serde_q")]
    pub value: Q,
    #[serde(skip)]
    pub witness: FreeWord,
    pub witness_label: String,
    pub candidate_count: usize,
    pub table: Vec<RatioRow>,
}

/// Larger ratio first; ties go to the lexicographically least word.
fn better(a: (&Q, &FreeWord), b: (&Q, &FreeWord)) -> Ordering {
    b.0.cmp(a.0).then_with(|| a.1.cmp(b.1))
}

/// Fast evaluation of source and target translation lengths.
struct Evaluator<'a> {
    src: &'a MarkedMetricGraph,
    src_table: Option<LengthTable>,
    rep: &'a Representation,
    tgt_table: Option<LengthTable>,
}

impl<'a> Evaluator<'a> {
    fn new(src: &'a MarkedMetricGraph, rep: &'a Representation) -> Self {
        let tgt_table = rep.target_graph().and_then(|(g, _)| g.length_table());
        Evaluator {
            src,
            src_table: src.length_table(),
            rep,
            tgt_table,
        }
    }

    fn source(&self, w: &FreeWord) -> Q {
        match &self.src_table {
            Some(t) => t.translation_length(w),
            None => self.src.translation_length(w).expect("word in source rank"),
        }
    }

    fn target(&self, w: &FreeWord) -> Q {
        match (&self.rep.target, &self.tgt_table) {
            (Target::Graph { images, .. }, Some(t)) => t.translation_length(&w.substitute(images)),
            _ => self
                .rep
                .image_translation_length(w)
                .expect("word in source rank"),
        }
    }

    /// `(lambda_target, ratio)`; elliptic images give ratio 0.
    fn ratio(&self, w: &FreeWord, source: &Q) -> (Q, Q) {
        let target = self.target(w);
        let ratio = if target.is_zero() {
            Q::zero()
        } else {
            &target / source
        };
        (target, ratio)
    }

    fn row(&self, w: &FreeWord, source: Q) -> RatioRow {
        let (target, ratio) = self.ratio(w, &source);
        RatioRow {
            word: w.clone(),
            label: w.display(&self.src.labels()).to_string(),
            source,
            target,
            ratio,
        }
    }
}

/// `C = max over candidate loops of lambda_target / lambda_source`.
pub fn stretch_factor(
    src: &MarkedMetricGraph,
    rep: &Representation,
) -> Result<StretchReport, StretchError> {
    rep.check_source(src)?;
    let eval = Evaluator::new(src, rep);
    let cands = candidates(src);
    let table: Vec<RatioRow> = cands
        .par_iter()
        .map(|c| eval.row(&c.word, c.length.clone()))
        .collect();
    let best = table
        .iter()
        .min_by(|a, b| better((&a.ratio, &a.word), (&b.ratio, &b.word)))
        .expect("a graph of positive rank has candidates");
    Ok(StretchReport {
        value: best.ratio.clone(),
        witness: best.word.clone(),
        witness_label: best.label.clone(),
        candidate_count: table.len(),
        table,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    #[serde(with = "serde_q")]
    pub value: Q,
    #[serde(skip)]
    pub witness: FreeWord,
    pub witness_label: String,
    pub max_len: usize,
    pub classes_checked: usize,
}

/// Maximum ratio over every conjugacy class (up to inversion) with a
/// cyclically reduced representative of length at most `max_len`.
pub fn stretch_oracle(
    src: &MarkedMetricGraph,
    rep: &Representation,
    max_len: usize,
) -> Result<OracleReport, StretchError> {
    rep.check_source(src)?;
    let eval = Evaluator::new(src, rep);
    let words: Vec<FreeWord> = ball(src.rank(), max_len, true).collect();
    let best = words
        .par_iter()
        .map(|w| (eval.ratio(w, &eval.source(w)).1, w.clone()))
        .min_by(|a, b| better((&a.0, &a.1), (&b.0, &b.1)))
        .unwrap_or_else(|| (Q::zero(), FreeWord::identity()));
    Ok(OracleReport {
        witness_label: best.1.display(&src.labels()).to_string(),
        value: best.0,
        witness: best.1,
        max_len,
        classes_checked: words.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_word;
    use crate::rational::{q, qr};

    fn fig(a: Q) -> MarkedMetricGraph {
        MarkedMetricGraph::figure_five(&a).unwrap()
    }

    #[test]
    fn figure_five_both_directions() {
        let y1 = fig(qr(1, 4));
        let y2 = fig(qr(1, 3));
        let r = stretch_factor(&y1, &Representation::identity(&y2)).unwrap();
        assert_eq!(r.value, qr(4, 3));
        assert_eq!(r.witness_label, "x");
        let r = stretch_factor(&y2, &Representation::identity(&y1)).unwrap();
        assert_eq!(r.value, qr(9, 8));
        assert_eq!(r.witness_label, "x y");
        assert_eq!(r.candidate_count, 6);
    }

    #[test]
    fn identity_has_all_ratios_one() {
        let g = fig(qr(1, 5));
        let r = stretch_factor(&g, &Representation::identity(&g)).unwrap();
        assert_eq!(r.value, q(1));
        assert!(r.table.iter().all(|row| row.ratio == q(1)));
        let o = stretch_oracle(&g, &Representation::identity(&g), 4).unwrap();
        assert_eq!(o.value, q(1));
    }

    #[test]
    fn oracle_matches_figure_five() {
        let y1 = fig(qr(1, 4));
        let y2 = fig(qr(1, 3));
        let o = stretch_oracle(&y1, &Representation::identity(&y2), 4).unwrap();
        assert_eq!(o.value, qr(4, 3));
        assert_eq!(o.witness_label, "x");
    }

    #[test]
    fn matrix_target() {
        let p = Prime::new(2).unwrap();
        let rose = MarkedMetricGraph::rose(&[q(1), q(1)]);
        let rep = Representation::sl2(
            2,
            p,
            vec![MatSL2::diag(q(2), p), MatSL2::identity(p)],
        )
        .unwrap();
        let a3 = parse_word("a a a", &rose.labels()).unwrap();
        assert_eq!(rep.image_translation_length(&a3).unwrap(), q(6));
        let r = stretch_factor(&rose, &rep).unwrap();
        assert_eq!(r.value, q(2));
        assert_eq!(r.witness_label, "a");
        assert_eq!(
            rep.image_translation_length(&FreeWord::identity()).unwrap(),
            q(0)
        );
    }

    #[test]
    fn elliptic_everywhere_gives_zero() {
        let p = Prime::new(3).unwrap();
        let rose = MarkedMetricGraph::rose(&[q(1), q(2)]);
        let rep = Representation::sl2(2, p, vec![MatSL2::identity(p), MatSL2::identity(p)]).unwrap();
        let r = stretch_factor(&rose, &rep).unwrap();
        assert_eq!(r.value, q(0));
        assert_eq!(r.witness_label, "a");
    }

    #[test]
    fn rank_mismatch() {
        let rose = MarkedMetricGraph::rose(&[q(1), q(1)]);
        let rep = Representation::identity(&MarkedMetricGraph::rose(&[q(1)]));
        assert_eq!(
            stretch_factor(&rose, &rep),
            Err(StretchError::RankMismatch {
                expected: 2,
                found: 1
            })
        );
    }
}
