//! JSON formats for graphs, representations and PL maps.
//!
//! Graph:
//! `{"vertices": [ids], "edges": [{"id", "from", "to", "length": "num/den"}],
//!   "basepoint": id, "spanning_tree": [edge ids],
//!   "generators": [{"label", "edge": id, "orientation": 1 | -1}]}`.
//! Ids may be strings or integers. Without `spanning_tree` and `generators`
//! the graph is marked by a breadth-first tree with labels `a, b, c, ...`.
//!
//! Representation:
//! `{"source_rank": n, "target": {"kind": "graph", "graph": {...}} | {"kind": "sl2", "p": 2},
//!   "images": {"a": "word or [[a,b],[c,d]]", ...}}`.
//!
//! PL map: `{"vertex_images": {src vertex: tgt vertex},
//!   "edge_paths": {src edge: "e f~ g"}, "base_path": "..."}` where `~` marks a
//! backward traversal.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bruhat_tits::{MatSL2, TreeError};
use crate::graph::{
    bfs_tree, default_labels, parse_word, Edge, EdgePath, Generator, GraphError, MarkedMetricGraph, Step,
};
use crate::padic::{PadicError, Prime};
use crate::rational::{format_rational, parse_rational, ParseRationalError};
use crate::stretch::{PlMap, Representation, StretchError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Stretch(#[from] StretchError),
}

impl IoError {
    /// Whether the input is well formed but violates a mathematical
    /// precondition (invalid graph, non-prime modulus, rank mismatch...).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            IoError::Graph(GraphError::Invalid(_))
                | IoError::Padic(_)
                | IoError::Tree(TreeError::NotSl2(_))
                | IoError::Tree(TreeError::PrimeMismatch(..))
                | IoError::Stretch(StretchError::RankMismatch { .. })
                | IoError::Stretch(StretchError::ImageCount { .. })
                | IoError::Stretch(StretchError::InconsistentMap(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Id {
    Num(i64),
    Str(String),
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Id::Num(n) => write!(f, "{n}"),
            Id::Str(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: Id,
    pub from: Id,
    pub to: Id,
    pub length: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub label: String,
    pub edge: Id,
    #[serde(default = "one")]
    pub orientation: i8,
}

fn one() -> i8 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<Id>,
    pub edges: Vec<EdgeJson>,
    pub basepoint: Id,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spanning_tree: Option<Vec<Id>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<GeneratorJson>>,
}

fn length_value(v: &Value) -> Result<crate::rational::Q, IoError> {
    match v {
        Value::String(s) => Ok(parse_rational(s)?),
        Value::Number(n) if n.is_i64() => Ok(crate::rational::q(n.as_i64().expect("i64"))),
        other => Err(IoError::Format(format!("length must be \"num/den\", got {other}"))),
    }
}

impl GraphJson {
    pub fn to_graph(&self) -> Result<MarkedMetricGraph, IoError> {
        let vertices: Vec<String> = self.vertices.iter().map(|v| v.to_string()).collect();
        let vindex = |id: &Id| {
            let s = id.to_string();
            vertices
                .iter()
                .position(|v| *v == s)
                .ok_or(GraphError::UnknownVertex(s))
        };
        let mut edges = Vec::new();
        for e in &self.edges {
            edges.push(Edge {
                name: e.id.to_string(),
                from: vindex(&e.from)?,
                to: vindex(&e.to)?,
                length: length_value(&e.length)?,
            });
        }
        let eindex = |id: &Id| {
            let s = id.to_string();
            edges
                .iter()
                .position(|e| e.name == s)
                .ok_or(GraphError::UnknownEdge(s))
        };
        let basepoint = vindex(&self.basepoint)?;
        let tree = match &self.spanning_tree {
            Some(t) => t.iter().map(eindex).collect::<Result<Vec<_>, _>>()?,
            None => bfs_tree(vertices.len(), &edges, basepoint),
        };
        let g = match &self.generators {
            Some(gens) => {
                let mut out = Vec::new();
                for gj in gens {
                    let forward = match gj.orientation {
                        1 => true,
                        -1 => false,
                        o => return Err(IoError::Format(format!("orientation must be 1 or -1, got {o}"))),
                    };
                    out.push(Generator {
                        label: gj.label.clone(),
                        edge: eindex(&gj.edge)?,
                        forward,
                    });
                }
                MarkedMetricGraph::new(vertices, edges, basepoint, tree, out)?
            }
            None => {
                let rank = (edges.len() + 1).saturating_sub(vertices.len());
                MarkedMetricGraph::with_tree(vertices, edges, basepoint, tree, &default_labels(rank))?
            }
        };
        Ok(g)
    }

    pub fn from_graph(g: &MarkedMetricGraph) -> Self {
        let names = g.vertex_names();
        GraphJson {
            vertices: names.iter().map(|v| Id::Str(v.clone())).collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeJson {
                    id: Id::Str(e.name.clone()),
                    from: Id::Str(names[e.from].clone()),
                    to: Id::Str(names[e.to].clone()),
                    length: Value::String(format_rational(&e.length)),
                })
                .collect(),
            basepoint: Id::Str(names[g.basepoint()].clone()),
            spanning_tree: Some(
                g.spanning_tree()
                    .iter()
                    .map(|&t| Id::Str(g.edges()[t].name.clone()))
                    .collect(),
            ),
            generators: Some(
                g.generators()
                    .iter()
                    .map(|gen| GeneratorJson {
                        label: gen.label.clone(),
                        edge: Id::Str(g.edges()[gen.edge].name.clone()),
                        orientation: if gen.forward { 1 } else { -1 },
                    })
                    .collect(),
            ),
        }
    }
}

pub fn parse_graph(json: &str) -> Result<MarkedMetricGraph, IoError> {
    serde_json::from_str::<GraphJson>(json)?.to_graph()
}

pub fn graph_to_json(g: &MarkedMetricGraph) -> String {
    serde_json::to_string_pretty(&GraphJson::from_graph(g)).expect("serializable")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetJson {
    Graph { graph: GraphJson },
    Sl2 { p: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepresentationJson {
    pub source_rank: usize,
    pub target: TargetJson,
    pub images: BTreeMap<String, String>,
}

/// Parses a representation whose image keys are the source generator labels.
pub fn parse_representation(json: &str, source_labels: &[String]) -> Result<Representation, IoError> {
    let rj: RepresentationJson = serde_json::from_str(json)?;
    if rj.source_rank != source_labels.len() {
        return Err(StretchError::RankMismatch {
            expected: source_labels.len(),
            found: rj.source_rank,
        }
        .into());
    }
    let image_of = |label: &String| {
        rj.images
            .get(label)
            .ok_or_else(|| IoError::Format(format!("no image for generator `{label}`")))
    };
    if let Some(extra) = rj.images.keys().find(|k| !source_labels.contains(k)) {
        return Err(IoError::Format(format!("image given for unknown generator `{extra}`")));
    }
    match &rj.target {
        TargetJson::Graph { graph } => {
            let g = graph.to_graph()?;
            let labels = g.labels();
            let images = source_labels
                .iter()
                .map(|l| Ok(parse_word(image_of(l)?, &labels).map_err(GraphError::from)?))
                .collect::<Result<Vec<_>, IoError>>()?;
            Ok(Representation::graph(rj.source_rank, g, images)?)
        }
        TargetJson::Sl2 { p } => {
            let prime = Prime::new(*p)?;
            let images = source_labels
                .iter()
                .map(|l| Ok(MatSL2::parse(image_of(l)?, prime)?))
                .collect::<Result<Vec<_>, IoError>>()?;
            Ok(Representation::sl2(rj.source_rank, prime, images)?)
        }
    }
}

pub fn representation_to_json(rep: &Representation, source_labels: &[String]) -> String {
    use crate::stretch::Target;
    let (target, images): (TargetJson, BTreeMap<String, String>) = match rep.target() {
        Target::Graph { graph, images } => {
            let labels = graph.labels();
            (
                TargetJson::Graph {
                    graph: GraphJson::from_graph(graph),
                },
                source_labels
                    .iter()
                    .zip(images)
                    .map(|(l, w)| (l.clone(), w.display(&labels).to_string()))
                    .collect(),
            )
        }
        Target::Sl2 { prime, images } => (
            TargetJson::Sl2 { p: prime.get() },
            source_labels
                .iter()
                .zip(images)
                .map(|(l, m)| (l.clone(), m.to_string()))
                .collect(),
        ),
    };
    serde_json::to_string_pretty(&RepresentationJson {
        source_rank: rep.source_rank(),
        target,
        images,
    })
    .expect("serializable")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlMapJson {
    pub vertex_images: BTreeMap<String, Id>,
    pub edge_paths: BTreeMap<String, String>,
    #[serde(default)]
    pub base_path: Option<String>,
}

fn parse_steps(s: &str, g: &MarkedMetricGraph) -> Result<Vec<Step>, IoError> {
    s.split_whitespace()
        .map(|tok| {
            let (name, forward) = match tok.strip_suffix('~') {
                Some(n) => (n, false),
                None => (tok, true),
            };
            let e = g
                .edge_index(name)
                .ok_or_else(|| GraphError::UnknownEdge(name.to_string()))?;
            Ok(Step::new(e, forward))
        })
        .collect()
}

pub fn parse_pl_map(
    json: &str,
    src: &MarkedMetricGraph,
    rep: &Representation,
) -> Result<PlMap, IoError> {
    let (tgt, _) = rep.target_graph().ok_or(StretchError::NotGraphTarget)?;
    let mj: PlMapJson = serde_json::from_str(json)?;
    let mut vertex_images = Vec::new();
    for name in src.vertex_names() {
        let img = mj
            .vertex_images
            .get(name)
            .ok_or_else(|| IoError::Format(format!("no image for vertex `{name}`")))?
            .to_string();
        vertex_images.push(
            tgt.vertex_index(&img)
                .ok_or(GraphError::UnknownVertex(img))?,
        );
    }
    let mut edge_paths = Vec::new();
    for e in src.edges() {
        let s = mj
            .edge_paths
            .get(&e.name)
            .ok_or_else(|| IoError::Format(format!("no image for edge `{}`", e.name)))?;
        edge_paths.push(EdgePath {
            start: vertex_images[e.from],
            steps: parse_steps(s, tgt)?,
        });
    }
    let base_path = mj.base_path.as_deref().map(|s| parse_steps(s, tgt)).transpose()?;
    Ok(PlMap {
        vertex_images,
        edge_paths,
        base_path,
    })
}
