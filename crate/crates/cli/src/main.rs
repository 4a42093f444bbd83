use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use treestretch::admissibility::{
    admissibility_profile, admissible, kobayashi_sufficient, schottky_profile, AdmissibilityReport, Verdict,
};
use treestretch::bruhat_tits::{
    act_vertex, boundary_dist, cartan, fixed_ends, lambda, mu, vertex_dist, zeta_minus, BTVertex, BoundaryPoint,
    MatSL2, TreeError,
};
use treestretch::graph::{candidates, dirichlet_delta, parse_word, GraphError, MarkedMetricGraph};
use treestretch::io::{parse_graph, parse_pl_map, parse_representation, IoError};
use treestretch::padic::{PadicError, Prime};
use treestretch::rational::{format_rational, to_f64, Q};
use treestretch::stretch::{lipschitz_of_pl_map, os_distance_graphs, stretch_factor, stretch_oracle, StretchError};

mod selftest;

#[derive(Parser)]
#[command(name = "treestretch", version, about = "Cartan projections on Bruhat-Tits trees and stretch factors between marked graphs")]
struct Cli {
    /// Prime for matrix and tree commands.
    #[arg(long, global = true, default_value_t = 2)]
    p: u64,
    /// p-adic digits for approximate fixed ends.
    #[arg(long, global = true, default_value_t = 20)]
    precision: u32,
    /// Word length for oracle scans and profiles.
    #[arg(long, global = true, default_value_t = 6)]
    max_len: usize,
    /// Worker threads for parallel scans (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Print JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    /// Also print decimal approximations of the main values.
    #[arg(long, global = true)]
    float: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cartan projection d(x0, g x0).
    Mu { matrix: String },
    /// Translation length.
    Lambda { matrix: String },
    /// g = k1 z k2 with k1, k2 in SL2(Z_p).
    Cartan { matrix: String },
    /// Image of a vertex `(n; u)` under a matrix.
    Act { matrix: String, vertex: String },
    /// Distance between two vertices.
    Vdist { v: String, w: String },
    /// Visual distance p^(-r) between two ends `[x:y]`.
    Bdist { xi: String, eta: String },
    /// The end k2^-1 [0:1] read off the Cartan decomposition.
    Zeta { matrix: String },
    /// Attracting and repelling fixed ends of a hyperbolic matrix.
    Ends { matrix: String },
    /// Translation length of a word in a marked graph.
    Tl { graph: String, word: String },
    /// Displacement of the base lift by a word.
    Disp { graph: String, word: String },
    /// Candidate loops of a graph.
    Candidates { graph: String },
    /// Dirichlet constant and its generating set.
    Delta { graph: String },
    /// Stretch factor over the candidate loops.
    Stretch { graph: String, rep: String },
    /// Stretch factor by scanning every class up to --max-len.
    StretchOracle { graph: String, rep: String },
    /// Lipschitz constant of a PL map realizing a representation.
    Lip { graph: String, rep: String, map: String },
    /// Asymmetric distance between two marked graphs, as the ratio exp(L).
    OsDist { a: String, b: String },
    /// Exact admissibility verdict.
    Admissible { graph: String, rep: String },
    /// Sufficient admissibility test.
    Kobayashi { graph: String, rep: String },
    /// Per-shell displacement gaps; with --sigma and --g, the matrix mode.
    Profile {
        graph: String,
        rep: String,
        /// Generators of a matrix subgroup (repeat once per generator).
        #[arg(long)]
        sigma: Vec<String>,
        /// Matrix conjugated by the shells in matrix mode.
        #[arg(long)]
        g: Option<String>,
    },
    /// Golden case and reduced oracle agreement suite.
    Selftest,
}

/// A failure with its exit code: 1 for unreadable input, 2 for a violated
/// precondition.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn precondition(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

fn tree_code(e: &TreeError) -> u8 {
    match e {
        TreeError::Parse(_) => 1,
        _ => 2,
    }
}

fn graph_code(e: &GraphError) -> u8 {
    match e {
        GraphError::Invalid(_) | GraphError::BrokenPath(_) => 2,
        _ => 1,
    }
}

fn stretch_code(e: &StretchError) -> u8 {
    match e {
        StretchError::Graph(g) => graph_code(g),
        StretchError::Tree(t) => tree_code(t),
        _ => 2,
    }
}

impl From<TreeError> for Failure {
    fn from(e: TreeError) -> Self {
        Failure {
            code: tree_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        Failure {
            code: graph_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<StretchError> for Failure {
    fn from(e: StretchError) -> Self {
        Failure {
            code: stretch_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<PadicError> for Failure {
    fn from(e: PadicError) -> Self {
        Failure::precondition(e.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match &e {
            IoError::Graph(g) => graph_code(g),
            IoError::Tree(t) => tree_code(t),
            IoError::Stretch(s) => stretch_code(s),
            _ if e.is_precondition() => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// The contents of `arg` if it names a file, else `arg` itself.
fn literal_or_file(arg: &str) -> Result<String, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| Failure::parse(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

fn read_file(arg: &str) -> Result<String, Failure> {
    std::fs::read_to_string(arg).map_err(|e| Failure::parse(format!("{arg}: {e}")))
}

struct Ctx {
    prime: Prime,
    precision: u32,
    max_len: usize,
    float: bool,
}

/// Plain text and JSON renderings of a result, plus the exit code.
struct Output {
    text: String,
    json: Value,
    code: u8,
}

impl Output {
    fn new(text: String, json: Value) -> Self {
        Output { text, json, code: 0 }
    }
}

impl Ctx {
    fn matrix(&self, s: &str) -> Result<MatSL2, Failure> {
        Ok(MatSL2::parse(literal_or_file(s)?.trim(), self.prime)?)
    }

    fn graph(&self, s: &str) -> Result<MarkedMetricGraph, Failure> {
        Ok(parse_graph(&read_file(s)?)?)
    }

    fn rep(&self, graph: &MarkedMetricGraph, s: &str) -> Result<treestretch::stretch::Representation, Failure> {
        Ok(parse_representation(&read_file(s)?, &graph.labels())?)
    }

    /// `x`, followed by a labeled decimal approximation under `--float`.
    fn num(&self, x: &Q) -> String {
        if self.float {
            format!("{} (approx {:.6})", format_rational(x), to_f64(x))
        } else {
            format_rational(x)
        }
    }

    /// JSON object for a headline value: the exact string, and the decimal
    /// approximation under `--float`.
    fn attach_float(&self, mut v: Value, key: &str, x: &Q) -> Value {
        if self.float {
            v[format!("{key}_approx")] = json!(to_f64(x));
        }
        v
    }
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let ctx = Ctx {
        prime: Prime::new(cli.p)?,
        precision: cli.precision,
        max_len: cli.max_len,
        float: cli.float,
    };
    let p = ctx.prime;
    Ok(match cli.command {
        Command::Mu { matrix } => {
            let v = mu(&ctx.matrix(&matrix)?);
            Output::new(v.to_string(), json!({ "mu": v }))
        }
        Command::Lambda { matrix } => {
            let v = lambda(&ctx.matrix(&matrix)?);
            Output::new(v.to_string(), json!({ "lambda": v }))
        }
        Command::Cartan { matrix } => {
            let c = cartan(&ctx.matrix(&matrix)?);
            Output::new(
                format!("k1 = {}\nz = {}\nk2 = {}\nm = {}", c.k1, c.z, c.k2, c.m),
                json!({ "k1": c.k1.to_string(), "z": c.z.to_string(), "k2": c.k2.to_string(), "m": c.m }),
            )
        }
        Command::Act { matrix, vertex } => {
            let g = ctx.matrix(&matrix)?;
            let v = BTVertex::parse(&vertex, p)?;
            let w = act_vertex(&g, &v)?;
            Output::new(w.to_string(), json!({ "vertex": w.to_string() }))
        }
        Command::Vdist { v, w } => {
            let d = vertex_dist(&BTVertex::parse(&v, p)?, &BTVertex::parse(&w, p)?)?;
            Output::new(d.to_string(), json!({ "distance": d }))
        }
        Command::Bdist { xi, eta } => {
            let d = boundary_dist(&BoundaryPoint::parse(&xi, p)?, &BoundaryPoint::parse(&eta, p)?)?;
            let value = d.value(p);
            let shown = value.as_ref().map_or("unknown".to_string(), |v| ctx.num(v));
            let r = d.r_lower_bound();
            Output::new(
                format!("{shown} ({d})"),
                json!({
                    "distance": value.map(|v| format_rational(&v)),
                    "r": r,
                }),
            )
        }
        Command::Zeta { matrix } => {
            let z = zeta_minus(&ctx.matrix(&matrix)?)?;
            Output::new(z.to_string(), json!({ "zeta": z.to_string() }))
        }
        Command::Ends { matrix } => {
            let e = fixed_ends(&ctx.matrix(&matrix)?, ctx.precision)?;
            Output::new(
                format!("plus = {}\nminus = {}", e.plus, e.minus),
                json!({ "plus": e.plus.to_string(), "minus": e.minus.to_string(), "precision": ctx.precision }),
            )
        }
        Command::Tl { graph, word } => {
            let g = ctx.graph(&graph)?;
            let w = parse_word(&literal_or_file(&word)?, &g.labels()).map_err(GraphError::from)?;
            let v = g.translation_length(&w)?;
            Output::new(ctx.num(&v), ctx.attach_float(json!({ "translation_length": format_rational(&v) }), "translation_length", &v))
        }
        Command::Disp { graph, word } => {
            let g = ctx.graph(&graph)?;
            let w = parse_word(&literal_or_file(&word)?, &g.labels()).map_err(GraphError::from)?;
            let v = g.displacement(&w)?;
            Output::new(ctx.num(&v), ctx.attach_float(json!({ "displacement": format_rational(&v) }), "displacement", &v))
        }
        Command::Candidates { graph } => {
            let g = ctx.graph(&graph)?;
            let labels = g.labels();
            let cands = candidates(&g);
            let mut text = String::new();
            let mut rows = Vec::new();
            for c in &cands {
                let class = c.word.display(&labels).to_string();
                let path = g.describe_steps(&c.steps);
                let _ = writeln!(text, "{class}\t{}\t{path}", format_rational(&c.length));
                rows.push(json!({ "class": class, "length": format_rational(&c.length), "path": path }));
            }
            Output::new(text.trim_end().to_string(), json!({ "candidates": rows }))
        }
        Command::Delta { graph } => {
            let g = ctx.graph(&graph)?;
            let labels = g.labels();
            let d = dirichlet_delta(&g);
            let f: Vec<String> = d.f.iter().map(|w| w.display(&labels).to_string()).collect();
            Output::new(
                format!("delta = {}\nF = {}", ctx.num(&d.delta), f.join(", ")),
                ctx.attach_float(json!({ "delta": format_rational(&d.delta), "f": f }), "delta", &d.delta),
            )
        }
        Command::Stretch { graph, rep } => {
            let g = ctx.graph(&graph)?;
            let r = stretch_factor(&g, &ctx.rep(&g, &rep)?)?;
            let mut text = format!("{}\nwitness: {}\n", ctx.num(&r.value), r.witness_label);
            for row in &r.table {
                let _ = writeln!(
                    text,
                    "  {}\t{} / {} = {}",
                    row.label,
                    format_rational(&row.target),
                    format_rational(&row.source),
                    format_rational(&row.ratio)
                );
            }
            let j = serde_json::to_value(&r).expect("serializable");
            Output::new(text.trim_end().to_string(), ctx.attach_float(j, "value", &r.value))
        }
        Command::StretchOracle { graph, rep } => {
            let g = ctx.graph(&graph)?;
            let r = stretch_oracle(&g, &ctx.rep(&g, &rep)?, ctx.max_len)?;
            Output::new(
                format!(
                    "{}\nwitness: {}\nclasses checked: {} (length <= {})",
                    ctx.num(&r.value),
                    r.witness_label,
                    r.classes_checked,
                    r.max_len
                ),
                ctx.attach_float(serde_json::to_value(&r).expect("serializable"), "value", &r.value),
            )
        }
        Command::Lip { graph, rep, map } => {
            let g = ctx.graph(&graph)?;
            let rep = ctx.rep(&g, &rep)?;
            let m = parse_pl_map(&read_file(&map)?, &g, &rep)?;
            let v = lipschitz_of_pl_map(&g, &rep, &m)?;
            Output::new(ctx.num(&v), ctx.attach_float(json!({ "lipschitz": format_rational(&v) }), "lipschitz", &v))
        }
        Command::OsDist { a, b } => {
            let d = os_distance_graphs(&ctx.graph(&a)?, &ctx.graph(&b)?)?;
            let mut text = format!("{}\nwitness: {}", ctx.num(&d.ratio), d.witness_label);
            if d.normalized {
                text.push_str("\n(rescaled to volume 1)");
            }
            Output::new(
                text,
                ctx.attach_float(serde_json::to_value(&d).expect("serializable"), "ratio", &d.ratio),
            )
        }
        Command::Admissible { graph, rep } => {
            let g = ctx.graph(&graph)?;
            verdict_output(&ctx, admissible(&g, &ctx.rep(&g, &rep)?)?)
        }
        Command::Kobayashi { graph, rep } => {
            let g = ctx.graph(&graph)?;
            verdict_output(&ctx, kobayashi_sufficient(&g, &ctx.rep(&g, &rep)?)?)
        }
        Command::Profile { graph, rep, sigma, g } => {
            let src = ctx.graph(&graph)?;
            let rep = ctx.rep(&src, &rep)?;
            match g {
                Some(gm) => {
                    let sigma = sigma.iter().map(|s| ctx.matrix(s)).collect::<Result<Vec<_>, _>>()?;
                    let prof = schottky_profile(&sigma, &rep, &ctx.matrix(&gm)?, ctx.max_len)?;
                    let mut text = format!("mu(g) = {}\n", prof.mu_g);
                    for s in &prof.shells {
                        let _ = writeln!(text, "  {}\t{} words\tmin mu = {}\tat {}", s.length, s.words, s.min_mu, s.argmin);
                    }
                    Output::new(text.trim_end().to_string(), serde_json::to_value(&prof).expect("serializable"))
                }
                None if !sigma.is_empty() => return Err(Failure::parse("--sigma needs --g")),
                None => {
                    let prof = admissibility_profile(&src, &rep, ctx.max_len)?;
                    let mut text = format!("C = {}\n", ctx.num(&prof.c_rho));
                    for s in &prof.shells {
                        let _ = writeln!(
                            text,
                            "  {}\t{} words\tmin gap = {}\tat {}",
                            s.length,
                            s.words,
                            format_rational(&s.min_gap),
                            s.argmin
                        );
                    }
                    let _ = write!(
                        text,
                        "positive from: {}\nnondecreasing: {}",
                        prof.positive_from.map_or("never".into(), |k| k.to_string()),
                        prof.nondecreasing
                    );
                    Output::new(text, serde_json::to_value(&prof).expect("serializable"))
                }
            }
        }
        Command::Selftest => {
            let lines = selftest::run();
            let ok = lines.iter().all(|l| l.passed);
            let text = lines
                .iter()
                .map(|l| format!("{} {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail))
                .collect::<Vec<_>>()
                .join("\n");
            let j = json!({
                "passed": ok,
                "checks": lines.iter().map(|l| json!({ "name": l.name, "passed": l.passed, "detail": l.detail })).collect::<Vec<_>>(),
            });
            Output {
                text,
                json: j,
                code: if ok { 0 } else { 2 },
            }
        }
    })
}

fn verdict_output(ctx: &Ctx, r: AdmissibilityReport) -> Output {
    let code = match r.verdict {
        Verdict::Admissible => 0,
        Verdict::NotAdmissible => 3,
        Verdict::Inconclusive => 4,
    };
    let mut text = match r.verdict {
        Verdict::Admissible => "admissible".to_string(),
        Verdict::NotAdmissible => "not admissible".to_string(),
        Verdict::Inconclusive => "inconclusive".to_string(),
    };
    if let Some(c) = &r.c_rho {
        let _ = write!(text, "\nC = {}", ctx.num(c));
    }
    if let Some(w) = &r.witness {
        let _ = write!(text, "\nwitness: {w}");
    }
    if let Some(d) = &r.delta {
        let _ = write!(text, "\ndelta = {}", ctx.num(d));
    }
    for row in r.kobayashi_margin.iter().flatten() {
        let _ = write!(
            text,
            "\n  {}\t{}\t{}",
            row.label,
            format_rational(&row.target_displacement),
            if row.below_delta { "< delta" } else { ">= delta" }
        );
    }
    let mut j = serde_json::to_value(&r).expect("serializable");
    if let Some(c) = &r.c_rho {
        j = ctx.attach_float(j, "c_rho", c);
    }
    Output { text, json: j, code }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let json = cli.json;
    match run(cli) {
        Ok(out) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("serializable"));
            } else {
                println!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            if json {
                println!("{}", json!({ "error": f.message, "exit_code": f.code }));
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
