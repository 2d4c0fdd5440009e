use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, MetricGraph, NodeId};

/// Radial profile `s ↦ φ(s)` of a map `x ↦ c + φ(|x-c|) (x-c)/|x-c|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    /// `φ(s) = scale · s^alpha`.
    Power { alpha: f64, scale: f64 },
    /// `φ(s) = inner + s (1 - inner/outer)` for `s < outer`, identity beyond.
    /// Blows the center up to the sphere of radius `inner`.
    Collar { inner: f64, outer: f64 },
}

impl RadialProfile {
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            RadialProfile::Power { alpha, scale } => scale * s.powf(alpha),
            RadialProfile::Collar { inner, outer } => {
                if s < outer {
                    inner + s * (1.0 - inner / outer)
                } else {
                    s
                }
            }
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match *self {
            RadialProfile::Power { alpha, scale } => scale * alpha * s.powf(alpha - 1.0),
            RadialProfile::Collar { inner, outer } => {
                if s < outer {
                    1.0 - inner / outer
                } else {
                    1.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            RadialProfile::Power { alpha, scale } if alpha > 0.0 && scale > 0.0 => Ok(()),
            RadialProfile::Collar { inner, outer } if inner > 0.0 && inner < outer => Ok(()),
            _ => Err(Error::arg(format!("invalid radial profile {self:?}"))),
        }
    }
}

/// The map `f` carrying a graph onto its image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VertexMap {
    Identity,
    /// `x ↦ diag · x`.
    Linear { diag: Vec<f64> },
    Radial { center: Vec<f64>, profile: RadialProfile },
    /// Explicit image coordinates, one row per node.
    Table { images: Vec<Vec<f64>> },
    /// Node relabeling `v ↦ target[v]`; lengths and measures travel with
    /// the edges.
    Permutation { target: Vec<NodeId> },
}

impl VertexMap {
    /// Index of `f(v)` in the image graph.
    pub fn node_image(&self, v: NodeId) -> NodeId {
        match self {
            VertexMap::Permutation { target } => target[v],
            _ => v,
        }
    }

    pub fn map_point(&self, p: &[f64]) -> Option<Vec<f64>> {
        match self {
            VertexMap::Identity => Some(p.to_vec()),
            VertexMap::Linear { diag } => (diag.len() == p.len())
                .then(|| p.iter().zip(diag).map(|(x, a)| x * a).collect()),
            VertexMap::Radial { center, profile } => {
                if center.len() != p.len() {
                    return None;
                }
                let v: Vec<f64> = p.iter().zip(center).map(|(x, c)| x - c).collect();
                let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if s == 0.0 {
                    return Some(center.clone());
                }
                let k = profile.value(s) / s;
                Some(center.iter().zip(&v).map(|(c, x)| c + k * x).collect())
            }
            VertexMap::Table { .. } | VertexMap::Permutation { .. } => None,
        }
    }

    /// `|det Df(p)|` where it is known in closed form.
    pub fn jacobian_det(&self, p: &[f64]) -> Option<f64> {
        match self {
            VertexMap::Identity => Some(1.0),
            VertexMap::Linear { diag } => Some(diag.iter().product::<f64>().abs()),
            VertexMap::Radial { center, profile } => {
                let s = p
                    .iter()
                    .zip(center)
                    .map(|(x, c)| (x - c) * (x - c))
                    .sum::<f64>()
                    .sqrt();
                if s == 0.0 {
                    return None;
                }
                let d = p.len() as i32;
                Some((profile.derivative(s) * (profile.value(s) / s).powi(d - 1)).abs())
            }
            VertexMap::Table { .. } | VertexMap::Permutation { .. } => None,
        }
    }

    fn validate(&self, g: &MetricGraph) -> Result<()> {
        let n = g.node_count();
        match self {
            VertexMap::Identity => Ok(()),
            VertexMap::Linear { diag } => {
                if diag.len() != g.dim() || diag.iter().any(|a| !(a.is_finite() && *a != 0.0)) {
                    Err(Error::arg("linear map needs one nonzero factor per coordinate"))
                } else {
                    Ok(())
                }
            }
            VertexMap::Radial { center, profile } => {
                if center.len() != g.dim() {
                    return Err(Error::arg("radial map center has the wrong dimension"));
                }
                profile.validate()
            }
            VertexMap::Table { images } => {
                if images.len() != n {
                    return Err(Error::arg(format!("map table has {} rows for {n} nodes", images.len())));
                }
                let d = images.first().map_or(0, Vec::len);
                if d == 0 || images.iter().any(|r| r.len() != d || r.iter().any(|x| !x.is_finite())) {
                    return Err(Error::arg("map table rows must be finite and of equal length"));
                }
                Ok(())
            }
            VertexMap::Permutation { target } => {
                if target.len() != n {
                    return Err(Error::arg(format!("permutation has {} entries for {n} nodes", target.len())));
                }
                let mut seen = vec![false; n];
                for &t in target {
                    if t >= n || std::mem::replace(&mut seen[t], true) {
                        return Err(Error::NonBijective(format!("permutation repeats or exceeds node {t}")));
                    }
                }
                Ok(())
            }
        }
    }
}

/// How edge measures are assigned on the image graph.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureRule {
    /// `σ' = ℓ'^dim`.
    #[default]
    LengthPower,
    /// `σ' = σ · |det Df|` at the source edge midpoint (push-forward of
    /// the measure).
    Jacobian,
    Preserve,
    Explicit { sigma: Vec<f64> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MapOptions {
    pub measure: MeasureRule,
    pub require_bijective: bool,
}

/// Image graph: same combinatorics, node coordinates replaced by their
/// images, lengths recomputed as Euclidean distances between image
/// coordinates and measures assigned by `opts.measure`.
pub fn apply_vertex_map(g: &MetricGraph, map: &VertexMap, opts: &MapOptions) -> Result<MetricGraph> {
    map.validate(g)?;
    let n = g.node_count();

    if let VertexMap::Permutation { target } = map {
        let dim = g.dim();
        let mut coords = vec![0.0; n * dim];
        for v in 0..n {
            if let Some(c) = g.coords(v) {
                coords[target[v] * dim..(target[v] + 1) * dim].copy_from_slice(c);
            }
        }
        let sigma = explicit_or(&opts.measure, g)?;
        let edges = g
            .edges()
            .iter()
            .zip(sigma)
            .map(|(e, s)| Edge::new(target[e.a], target[e.b], e.length, s))
            .collect();
        return MetricGraph::new(n, dim, coords, edges);
    }
    if *map == VertexMap::Identity
        && (!g.has_coords() || matches!(opts.measure, MeasureRule::Preserve | MeasureRule::Jacobian))
    {
        return Ok(g.clone());
    }

    let images: Vec<Vec<f64>> = match map {
        VertexMap::Table { images } => images.clone(),
        _ => {
            if !g.has_coords() {
                return Err(Error::arg("coordinate map applied to a graph without coordinates"));
            }
            (0..n)
                .map(|v| map.map_point(g.coords(v).unwrap()).unwrap())
                .collect()
        }
    };
    if opts.require_bijective {
        check_distinct(&images)?;
    }
    let dim = images[0].len();

    let mut edges = Vec::with_capacity(g.edge_count());
    for (i, e) in g.edges().iter().enumerate() {
        let length = images[e.a]
            .iter()
            .zip(&images[e.b])
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        if !(length > 0.0) {
            return Err(Error::NonBijective(format!(
                "edge {i} collapses to a point under the map"
            )));
        }
        let sigma = match &opts.measure {
            MeasureRule::LengthPower => length.powi(dim as i32),
            MeasureRule::Preserve => e.sigma,
            MeasureRule::Explicit { sigma } => {
                *sigma.get(i).ok_or_else(|| Error::arg("explicit sigma list is too short"))?
            }
            MeasureRule::Jacobian => {
                let (pa, pb) = (g.coords(e.a), g.coords(e.b));
                let mid: Vec<f64> = match (pa, pb) {
                    (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect(),
                    _ => return Err(Error::arg("jacobian rule needs source coordinates")),
                };
                let det = map
                    .jacobian_det(&mid)
                    .ok_or_else(|| Error::arg("jacobian unavailable for this map at an edge midpoint"))?;
                e.sigma * det
            }
        };
        edges.push(Edge::new(e.a, e.b, length, sigma));
    }
    MetricGraph::new(n, dim, images.concat(), edges)
}

fn explicit_or(rule: &MeasureRule, g: &MetricGraph) -> Result<Vec<f64>> {
    match rule {
        MeasureRule::Explicit { sigma } if sigma.len() == g.edge_count() => Ok(sigma.clone()),
        MeasureRule::Explicit { .. } => Err(Error::arg("explicit sigma list has the wrong length")),
        _ => Ok(g.edges().iter().map(|e| e.sigma).collect()),
    }
}

fn check_distinct(images: &[Vec<f64>]) -> Result<()> {
    let mut order: Vec<usize> = (0..images.len()).collect();
    let key = |i: &usize| images[*i].clone();
    order.sort_by(|a, b| {
        key(a)
            .iter()
            .zip(key(b).iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for w in order.windows(2) {
        let d2: f64 = images[w[0]]
            .iter()
            .zip(&images[w[1]])
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        if d2 <= 1e-24 {
            return Err(Error::NonBijective(format!(
                "nodes {} and {} have the same image",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}
