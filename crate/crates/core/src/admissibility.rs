//! Admissibility of a representation of a free group: the exact criterion
//! `C < 1`, a sufficient test through the Dirichlet constant, and empirical
//! gap profiles.

use std::collections::HashSet;

use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bruhat_tits::{mu, MatSL2, TreeError};
use crate::graph::{ball, dirichlet_delta, FreeWord, MarkedMetricGraph};
use crate::rational::{serde_q, Q};
use crate::stretch::{matrix_of, stretch_factor, Representation, StretchError, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Kobayashi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Admissible,
    NotAdmissible,
    /// The sufficient test failed; nothing follows.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarginRow {
    #[serde(rename = "class")]
    pub label: String,
    #[serde(with = "serde_q")]
    pub target_displacement: Q,
    pub below_delta: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdmissibilityReport {
    pub method: Method,
    pub verdict: Verdict,
    pub admissible: bool,
    #[serde(with = "serde_q::option")]
    pub c_rho: Option<Q>,
    pub witness: Option<String>,
    #[serde(with = "serde_q::option")]
    pub delta: Option<Q>,
    pub kobayashi_margin: Option<Vec<MarginRow>>,
}

/// Exact verdict: admissible iff `C < 1`, compared in exact arithmetic.
pub fn admissible(
    src: &MarkedMetricGraph,
    rep: &Representation,
) -> Result<AdmissibilityReport, StretchError> {
    let r = stretch_factor(src, rep)?;
    let ok = r.value < Q::one();
    Ok(AdmissibilityReport {
        method: Method::Exact,
        verdict: if ok {
            Verdict::Admissible
        } else {
            Verdict::NotAdmissible
        },
        admissible: ok,
        c_rho: Some(r.value),
        witness: Some(r.witness_label),
        delta: None,
        kobayashi_margin: None,
    })
}

/// Sufficient test: every element of `F` moves the target base vertex by
/// less than `delta`.
pub fn kobayashi_sufficient(
    src: &MarkedMetricGraph,
    rep: &Representation,
) -> Result<AdmissibilityReport, StretchError> {
    if src.rank() != rep.source_rank() {
        return Err(StretchError::RankMismatch {
            expected: src.rank(),
            found: rep.source_rank(),
        });
    }
    let d = dirichlet_delta(src);
    let labels = src.labels();
    let rows: Vec<MarginRow> = d
        .f
        .par_iter()
        .map(|w| {
            let t = rep.image_displacement(w)?;
            Ok(MarginRow {
                label: w.display(&labels).to_string(),
                below_delta: t < d.delta,
                target_displacement: t,
            })
        })
        .collect::<Result<_, StretchError>>()?;
    let ok = rows.iter().all(|r| r.below_delta);
    let witness = rows.iter().find(|r| !r.below_delta).map(|r| r.label.clone());
    Ok(AdmissibilityReport {
        method: Method::Kobayashi,
        verdict: if ok {
            Verdict::Admissible
        } else {
            Verdict::Inconclusive
        },
        admissible: ok,
        c_rho: None,
        witness,
        delta: Some(d.delta),
        kobayashi_margin: Some(rows),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Holds,
    Violated,
    /// The breadth-first search hit its state limit before deciding.
    SearchLimit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordLengthRow {
    #[serde(rename = "word")]
    pub label: String,
    /// Word length over `F`, when found within the bound.
    pub f_length: Option<usize>,
    #[serde(with = "serde_q")]
    pub bound: Q,
    pub status: BoundStatus,
}

const BFS_STATE_LIMIT: usize = 2_000_000;

/// Checks `l_F(g) <= d(x0, g x0) / delta + 1` for each sampled word, where
/// `l_F` is the word length over the generating set `F` of the Dirichlet
/// construction.
pub fn word_length_bound_check(
    src: &MarkedMetricGraph,
    sample: &[FreeWord],
) -> Result<Vec<WordLengthRow>, StretchError> {
    let d = dirichlet_delta(src);
    let labels = src.labels();
    sample
        .iter()
        .map(|w| {
            let bound = src.displacement(w)? / &d.delta + Q::one();
            let depth = bound.floor().to_integer().to_usize().unwrap_or(usize::MAX);
            let (f_length, status) = match f_word_length(&d.f, w, depth) {
                Search::Found(k) => (Some(k), BoundStatus::Holds),
                Search::Beyond => (None, BoundStatus::Violated),
                Search::Limit => (None, BoundStatus::SearchLimit),
            };
            Ok(WordLengthRow {
                label: w.display(&labels).to_string(),
                f_length,
                bound,
                status,
            })
        })
        .collect()
}

enum Search {
    Found(usize),
    Beyond,
    Limit,
}

fn f_word_length(f: &[FreeWord], target: &FreeWord, max_depth: usize) -> Search {
    if target.is_identity() {
        return Search::Found(0);
    }
    let mut seen: HashSet<FreeWord> = HashSet::from([FreeWord::identity()]);
    let mut frontier = vec![FreeWord::identity()];
    for depth in 1..=max_depth {
        let mut next = Vec::new();
        for w in &frontier {
            for s in f {
                let u = w.mul(s);
                if &u == target {
                    return Search::Found(depth);
                }
                if seen.insert(u.clone()) {
                    next.push(u);
                }
            }
        }
        if seen.len() > BFS_STATE_LIMIT {
            return Search::Limit;
        }
        frontier = next;
    }
    Search::Beyond
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShellRow {
    pub length: usize,
    pub words: usize,
    /// `min (d_src(x0, g x0) - d_target(y0, rho(g) y0))` over the shell.
    #[serde(with = "serde_q")]
    pub min_gap: Q,
    pub argmin: String,
    #[serde(with = "serde_q")]
    pub min_source_displacement: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Profile {
    #[serde(with = "serde_q")]
    pub c_rho: Q,
    pub shells: Vec<ShellRow>,
    /// First shell from which every observed gap is positive.
    pub positive_from: Option<usize>,
    /// Whether the minimal gaps never decrease over the observed shells.
    pub nondecreasing: bool,
}

/// Per word length, the least gap between source and target displacement.
/// A finite scan can only suggest properness; the exact verdict comes from
/// [`admissible`].
pub fn admissibility_profile(
    src: &MarkedMetricGraph,
    rep: &Representation,
    max_len: usize,
) -> Result<Profile, StretchError> {
    let c_rho = stretch_factor(src, rep)?.value;
    let src_table = src.length_table();
    let tgt_table = rep.target_graph().and_then(|(g, _)| g.length_table());
    let labels = src.labels();
    let words: Vec<FreeWord> = ball(src.rank(), max_len, false).collect();
    let gaps: Vec<(usize, Q, Q, &FreeWord)> = words
        .par_iter()
        .map(|w| {
            let s = match &src_table {
                Some(t) => t.displacement(w),
                None => src.displacement(w)?,
            };
            let t = match (rep.target(), &tgt_table) {
                (Target::Graph { images, .. }, Some(tt)) => tt.displacement(&w.substitute(images)),
                _ => rep.image_displacement(w)?,
            };
            Ok((w.len(), &s - &t, s, w))
        })
        .collect::<Result<_, StretchError>>()?;
    let mut shells = Vec::new();
    for k in 1..=max_len {
        let shell: Vec<_> = gaps.iter().filter(|g| g.0 == k).collect();
        let Some(best) = shell
            .iter()
            .min_by(|a, b| a.1.cmp(&b.1).then_with(|| a.3.cmp(b.3)))
        else {
            continue;
        };
        let min_src = shell.iter().map(|g| &g.2).min().cloned().unwrap_or_else(Q::zero);
        shells.push(ShellRow {
            length: k,
            words: shell.len(),
            min_gap: best.1.clone(),
            argmin: best.3.display(&labels).to_string(),
            min_source_displacement: min_src,
        });
    }
    Ok(summarize(c_rho, shells))
}

fn summarize(c_rho: Q, shells: Vec<ShellRow>) -> Profile {
    let positive_from = shells
        .iter()
        .rposition(|s| s.min_gap <= Q::zero())
        .map_or(Some(1), |i| shells.get(i + 1).map(|s| s.length));
    let nondecreasing = shells.windows(2).all(|w| w[0].min_gap <= w[1].min_gap);
    Profile {
        c_rho,
        shells,
        positive_from,
        nondecreasing,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchottkyRow {
    pub length: usize,
    pub words: usize,
    pub min_mu: u64,
    pub argmin: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchottkyProfile {
    pub mu_g: u64,
    pub shells: Vec<SchottkyRow>,
}

/// Matrix mode: for a subgroup of SL2(Q_p) given by generators `sigma`, a
/// matrix representation `rho` of the same free group and a matrix `g`, the
/// least `mu(sigma(w) g rho(w)^-1)` over each word-length shell.
pub fn schottky_profile(
    sigma: &[MatSL2],
    rep: &Representation,
    g: &MatSL2,
    max_len: usize,
) -> Result<SchottkyProfile, StretchError> {
    let Target::Sl2 { prime, images } = rep.target() else {
        return Err(StretchError::NotGraphTarget);
    };
    if sigma.len() != rep.source_rank() {
        return Err(StretchError::ImageCount {
            expected: rep.source_rank(),
            found: sigma.len(),
        });
    }
    if let Some(m) = sigma.iter().chain([g]).find(|m| m.prime() != *prime) {
        return Err(TreeError::PrimeMismatch(prime.get(), m.prime().get()).into());
    }
    let labels = crate::graph::default_labels(rep.source_rank());
    let words: Vec<FreeWord> = ball(rep.source_rank(), max_len, false).collect();
    let vals: Vec<(usize, u64, &FreeWord)> = words
        .par_iter()
        .map(|w| {
            let s = matrix_of(w, *prime, sigma);
            let r = matrix_of(w, *prime, images);
            (w.len(), mu(&(&(&s * g) * &r.inverse())), w)
        })
        .collect();
    let mut shells = Vec::new();
    for k in 1..=max_len {
        let shell: Vec<_> = vals.iter().filter(|v| v.0 == k).collect();
        if let Some(best) = shell.iter().min_by(|a, b| a.1.cmp(&b.1).then_with(|| a.2.cmp(b.2))) {
            shells.push(SchottkyRow {
                length: k,
                words: shell.len(),
                min_mu: best.1,
                argmin: best.2.display(&labels).to_string(),
            });
        }
    }
    Ok(SchottkyProfile {
        mu_g: mu(g),
        shells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_word;
    use crate::padic::Prime;
    use crate::rational::{q, qr};

    fn rose(l: i64) -> MarkedMetricGraph {
        MarkedMetricGraph::rose(&[q(l), q(l)])
    }

    fn p2() -> Prime {
        Prime::new(2).unwrap()
    }

    #[test]
    fn exact_verdicts() {
        let trivial = Representation::sl2(2, p2(), vec![MatSL2::identity(p2()); 2]).unwrap();
        let r = admissible(&rose(1), &trivial).unwrap();
        assert!(r.admissible);
        assert_eq!(r.c_rho, Some(q(0)));
        let rep = Representation::sl2(
            2,
            p2(),
            vec![MatSL2::diag(q(2), p2()), MatSL2::identity(p2())],
        )
        .unwrap();
        let r = admissible(&rose(1), &rep).unwrap();
        assert_eq!(r.verdict, Verdict::NotAdmissible);
        assert_eq!(r.c_rho, Some(q(2)));
        assert_eq!(r.witness.as_deref(), Some("a"));
        let g = rose(1);
        let r = admissible(&g, &Representation::identity(&g)).unwrap();
        assert_eq!(r.c_rho, Some(q(1)));
        assert!(!r.admissible);
    }

    #[test]
    fn kobayashi_verdicts() {
        let rep = Representation::sl2(
            2,
            p2(),
            vec![MatSL2::diag(q(2), p2()), MatSL2::diag(qr(1, 2), p2())],
        )
        .unwrap();
        let r = kobayashi_sufficient(&rose(3), &rep).unwrap();
        assert_eq!(r.delta, Some(q(3)));
        assert_eq!(r.verdict, Verdict::Admissible);
        let r = kobayashi_sufficient(&rose(1), &rep).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let trivial = Representation::sl2(2, p2(), vec![MatSL2::identity(p2()); 2]).unwrap();
        assert!(kobayashi_sufficient(&rose(1), &trivial).unwrap().admissible);
    }

    #[test]
    fn word_length_bounds() {
        let g = rose(1);
        let l = g.labels();
        let sample: Vec<FreeWord> = ["a", "a b a b a b", "1"]
            .iter()
            .map(|s| parse_word(s, &l).unwrap())
            .collect();
        let rows = word_length_bound_check(&g, &sample).unwrap();
        assert_eq!(rows[0].f_length, Some(1));
        assert_eq!(rows[0].bound, q(2));
        assert_eq!(rows[1].f_length, Some(6));
        assert_eq!(rows[1].bound, q(7));
        assert_eq!(rows[2].f_length, Some(0));
        assert!(rows.iter().all(|r| r.status == BoundStatus::Holds));
    }

    #[test]
    fn profiles() {
        let g = rose(1);
        let trivial = Representation::sl2(2, p2(), vec![MatSL2::identity(p2()); 2]).unwrap();
        let p = admissibility_profile(&g, &trivial, 5).unwrap();
        let gaps: Vec<Q> = p.shells.iter().map(|s| s.min_gap.clone()).collect();
        assert_eq!(gaps, [q(1), q(2), q(3), q(4), q(5)]);
        assert_eq!(p.positive_from, Some(1));
        let p = admissibility_profile(&g, &Representation::identity(&g), 5).unwrap();
        assert!(p.shells.iter().all(|s| s.min_gap == q(0)));
        assert_eq!(p.positive_from, None);
        let half = Representation::identity(&MarkedMetricGraph::rose(&[qr(1, 2), qr(1, 2)]));
        let p = admissibility_profile(&g, &half, 6).unwrap();
        for s in &p.shells {
            assert!(s.min_gap >= Q::from_integer((s.length as i64).into()) / q(2));
        }
    }

    #[test]
    fn schottky_mode() {
        let sigma = vec![MatSL2::diag(q(4), p2()), MatSL2::parse("[[1,0],[4,1]]", p2()).unwrap()];
        let rep = Representation::sl2(2, p2(), vec![MatSL2::identity(p2()); 2]).unwrap();
        let g = MatSL2::diag(q(2), p2());
        let prof = schottky_profile(&sigma, &rep, &g, 3).unwrap();
        assert_eq!(prof.mu_g, 2);
        assert_eq!(prof.shells.len(), 3);
    }
}
