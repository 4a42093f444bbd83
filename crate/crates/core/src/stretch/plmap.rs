use num_traits::Zero;

use super::{Representation, StretchError};
use crate::graph::{push_reduced, reverse_steps, EdgePath, FreeWord, MarkedMetricGraph, Step};
use crate::rational::Q;

/// A piecewise-linear map between marked graphs: each source vertex goes to a
/// target vertex and each source edge, traversed forward, to an edge path
/// between the images of its endpoints, run at constant speed.
///
/// `base_path` runs in the target from its basepoint to the image of the
/// source basepoint; it fixes the lift and hence the equivariance. When absent
/// the target tree geodesic is used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlMap {
    pub vertex_images: Vec<usize>,
    pub edge_paths: Vec<EdgePath>,
    pub base_path: Option<Vec<Step>>,
}

impl PlMap {
    /// The map with the given vertex images that sends tree edges of the
    /// source to target tree geodesics and each generator edge to the
    /// reduced path forced by equivariance.
    pub fn with_vertex_images(
        src: &MarkedMetricGraph,
        rep: &Representation,
        vertex_images: Vec<usize>,
    ) -> Result<Self, StretchError> {
        let (tgt, images) = rep.target_graph().ok_or(StretchError::NotGraphTarget)?;
        if vertex_images.len() != src.vertex_count()
            || vertex_images.iter().any(|&v| v >= tgt.vertex_count())
        {
            return Err(StretchError::InconsistentMap("bad vertex images".into()));
        }
        let f = |v: usize| vertex_images[v];
        let tau = tgt.tree_path(tgt.basepoint(), f(src.basepoint()));
        let mut edge_paths: Vec<Option<EdgePath>> = vec![None; src.edges().len()];
        for &t in src.spanning_tree() {
            let e = &src.edges()[t];
            edge_paths[t] = Some(EdgePath {
                start: f(e.from),
                steps: tgt.tree_path(f(e.from), f(e.to)),
            });
        }
        let tree_images: Vec<Vec<Step>> = (0..src.vertex_count())
            .map(|v| {
                let mut out = Vec::new();
                for s in src.tree_path_from_base(v) {
                    let img = &edge_paths[s.edge as usize].as_ref().expect("tree edge").steps;
                    if s.forward {
                        out.extend_from_slice(img);
                    } else {
                        out.extend(reverse_steps(img));
                    }
                }
                out
            })
            .collect();
        let tree_image = |v: usize| tree_images[v].clone();
        for (i, gen) in src.generators().iter().enumerate() {
            let s = Step::new(gen.edge, gen.forward);
            let (u, v) = (src.tail(s), src.head(s));
            let mut lead = tau.clone();
            lead.extend(tree_image(u));
            let mut path = Vec::new();
            for st in reverse_steps(&lead)
                .into_iter()
                .chain(tgt.word_to_path(&images[i])?.steps)
                .chain(tau.iter().copied())
                .chain(tree_image(v))
            {
                push_reduced(&mut path, st);
            }
            let (path, start) = if gen.forward {
                (path, f(u))
            } else {
                (reverse_steps(&path), f(v))
            };
            edge_paths[gen.edge] = Some(EdgePath { start, steps: path });
        }
        Ok(PlMap {
            vertex_images,
            edge_paths: edge_paths.into_iter().map(|p| p.expect("every edge")).collect(),
            base_path: Some(tau),
        })
    }
}

/// `max over source edges of length(image path) / length(edge)`, after
/// checking that the map realizes `rep`: the image of each generator loop,
/// conjugated by the base path, must read the generator's image word.
pub fn lipschitz_of_pl_map(
    src: &MarkedMetricGraph,
    rep: &Representation,
    map: &PlMap,
) -> Result<Q, StretchError> {
    let (tgt, images) = rep.target_graph().ok_or(StretchError::NotGraphTarget)?;
    if rep.source_rank() != src.rank() {
        return Err(StretchError::RankMismatch {
            expected: src.rank(),
            found: rep.source_rank(),
        });
    }
    let bad = |msg: String| StretchError::InconsistentMap(msg);
    if map.vertex_images.len() != src.vertex_count() || map.edge_paths.len() != src.edges().len() {
        return Err(bad("map size does not match the source graph".into()));
    }
    if let Some(&v) = map.vertex_images.iter().find(|&&v| v >= tgt.vertex_count()) {
        return Err(bad(format!("vertex image {v} is not a target vertex")));
    }
    for (i, (e, p)) in src.edges().iter().zip(&map.edge_paths).enumerate() {
        let end = tgt.path_end(p).map_err(|_| bad(format!("image of edge {} is not a path", e.name)))?;
        if p.start != map.vertex_images[e.from] || end != map.vertex_images[e.to] {
            return Err(bad(format!("image of edge {} has the wrong endpoints", src.edges()[i].name)));
        }
    }
    let base_image = map.vertex_images[src.basepoint()];
    let tau = match &map.base_path {
        Some(t) => t.clone(),
        None => tgt.tree_path(tgt.basepoint(), base_image),
    };
    if tgt.path_end(&EdgePath {
        start: tgt.basepoint(),
        steps: tau.clone(),
    })
    .ok()
        != Some(base_image)
    {
        return Err(bad("base path does not end at the image of the basepoint".into()));
    }
    for i in 0..src.rank() {
        let mut full = tau.clone();
        for s in src.generator_loop(i) {
            let img = &map.edge_paths[s.edge as usize].steps;
            if s.forward {
                full.extend_from_slice(img);
            } else {
                full.extend(reverse_steps(img));
            }
        }
        full.extend(reverse_steps(&tau));
        let word: FreeWord = tgt.path_word(&full);
        if word != images[i] {
            return Err(bad(format!(
                "generator {} maps to {} but the representation says {}",
                src.generators()[i].label,
                word.display(&tgt.labels()),
                images[i].display(&tgt.labels())
            )));
        }
    }
    let mut best = Q::zero();
    for (e, p) in src.edges().iter().zip(&map.edge_paths) {
        let r = tgt.path_length(&p.steps) / &e.length;
        if r > best {
            best = r;
        }
    }
    Ok(best)
}
