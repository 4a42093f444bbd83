use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use treestretch::gen::random_graph_instance;
use treestretch::graph::MarkedMetricGraph;
use treestretch::rational::{format_rational, qr};
use treestretch::stretch::{os_distance_graphs, stretch_factor, stretch_oracle};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

const DEFAULT_SEED: u64 = 0x7265_6573;

fn seed() -> u64 {
    std::env::var("TREESTRETCH_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

fn golden() -> Check {
    let name = "figure-5 distances";
    let run = || -> Result<(String, String), String> {
        let y1 = MarkedMetricGraph::figure_five(&qr(1, 4)).map_err(|e| e.to_string())?;
        let y2 = MarkedMetricGraph::figure_five(&qr(1, 3)).map_err(|e| e.to_string())?;
        let a = os_distance_graphs(&y1, &y2).map_err(|e| e.to_string())?;
        let b = os_distance_graphs(&y2, &y1).map_err(|e| e.to_string())?;
        Ok((format_rational(&a.ratio), format_rational(&b.ratio)))
    };
    match run() {
        Ok((a, b)) => Check {
            name,
            passed: a == "4/3" && b == "9/8",
            detail: format!("C(Y1,Y2) = {a}, C(Y2,Y1) = {b} (expected 4/3, 9/8)"),
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: e,
        },
    }
}

fn oracle_agreement(seed: u64) -> Check {
    let name = "candidates vs oracle";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = 20;
    for i in 0..total {
        let rank = 2 + i % 2;
        let (src, rep) = random_graph_instance(&mut rng, rank, 12);
        let s = stretch_factor(&src, &rep);
        let o = stretch_oracle(&src, &rep, 6);
        match (s, o) {
            (Ok(s), Ok(o)) if s.value == o.value => {}
            (Ok(s), Ok(o)) => {
                return Check {
                    name,
                    passed: false,
                    detail: format!(
                        "instance {i}: candidates give {}, oracle {} at {}",
                        format_rational(&s.value),
                        format_rational(&o.value),
                        o.witness_label
                    ),
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                return Check {
                    name,
                    passed: false,
                    detail: format!("instance {i}: {e}"),
                }
            }
        }
    }
    Check {
        name,
        passed: true,
        detail: format!("{total} random instances agree at word length 6 (seed {seed})"),
    }
}

pub fn run() -> Vec<Check> {
    vec![golden(), oracle_agreement(seed())]
}
