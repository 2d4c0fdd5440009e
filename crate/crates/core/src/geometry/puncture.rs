use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::qc::image_family;
use super::{ring_modulus_curve, ExperimentSolver, RingDecayFit};
use crate::error::{Error, Result};
use crate::generators::{apply_vertex_map, MapOptions, MeasureRule, VertexMap};
use crate::graph::{MetricGraph, NodeId, NodeSet};
use crate::modulus::{CurveFamilySpec, SolveStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PointLike,
    ContinuumLike,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PunctureOptions {
    pub map: Option<VertexMap>,
    /// Measure on the image graph.
    pub measure: MeasureRule,
    /// Point-like threshold as a multiple of the median image edge length.
    pub threshold_factor: f64,
}

impl Default for PunctureOptions {
    fn default() -> Self {
        PunctureOptions {
            map: None,
            measure: MeasureRule::Jacobian,
            threshold_factor: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PunctureSample {
    pub r: f64,
    pub mod_source: f64,
    pub gap_source: f64,
    pub status_source: SolveStatus,
    /// `C₁ log(r0/r)^{1-Q}` from the ring fit.
    pub bound: f64,
    pub mod_image: Option<f64>,
    pub cluster_diameter: f64,
    pub cluster_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PunctureReport {
    pub center: NodeId,
    pub r0: f64,
    pub q: f64,
    /// Strictly decreasing.
    pub samples: Vec<PunctureSample>,
    pub ring: RingDecayFit,
    pub strictly_decreasing: bool,
    pub within_bound: bool,
    pub mesh: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    /// Smallest image modulus over the radii, when a map was given.
    pub mod_image_floor: Option<f64>,
}

impl PunctureReport {
    pub fn radii(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.r).collect()
    }

    pub fn mod_source(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.mod_source).collect()
    }

    pub fn mod_image(&self) -> Option<Vec<f64>> {
        self.samples.iter().map(|s| s.mod_image).collect()
    }

    pub fn cluster_diameter(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.cluster_diameter).collect()
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Euclidean diameter of the image coordinates, or the graph diameter of
/// the set when the image carries no coordinates.
fn cluster_diameter(g_img: &MetricGraph, set: &NodeSet) -> Result<f64> {
    if !g_img.has_coords() {
        return g_img.set_diameter(set);
    }
    let pts: Vec<&[f64]> = set.iter().map(|v| g_img.coords(v).unwrap()).collect();
    let mut diam: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let d2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            diam = diam.max(d2);
        }
    }
    Ok(diam.sqrt())
}

/// Modulus chain around a puncture at `x0`.
///
/// The punctured ball is `U = B̄(x0, r0) ∖ {x0}`; its outer boundary `∂B`
/// is the set of nodes of `U` with a neighbor beyond `r0`. For each radius
/// `rᵢ`, `Γᵢ` joins `∂B` to `B̄(x0, rᵢ) ∖ {x0}` inside `U`. With a map, the
/// image families are solved on the image graph and the cluster set is
/// approximated by the images of `B̄(x0, rᵢ) ∖ {x0}`; the verdict is
/// point-like when that approximation at the smallest radius has diameter
/// at most `threshold_factor` times the median image edge length in `U`.
pub fn puncture_experiment(
    g: &MetricGraph,
    x0: NodeId,
    r0: f64,
    radii: &[f64],
    q: f64,
    opts: &PunctureOptions,
    solver: &ExperimentSolver,
) -> Result<PunctureReport> {
    g.check_node(x0)?;
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::arg("radii must be positive and nonempty"));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::arg("radii must be strictly decreasing"));
    }
    if !(2.0 * radii[0] < r0) {
        return Err(Error::arg(format!("largest radius {} violates 2r < r0 = {r0}", radii[0])));
    }
    if !(opts.threshold_factor > 0.0) {
        return Err(Error::arg("threshold_factor must be positive"));
    }
    let n = g.node_count();
    let d = g.distances_from(x0);
    let domain: NodeSet = (0..n).filter(|&v| v != x0 && d[v] <= r0).collect();
    let outer: NodeSet = domain
        .iter()
        .filter(|&v| g.neighbors(v).iter().any(|&(w, _)| d[w] > r0))
        .collect();
    if outer.is_empty() {
        return Err(Error::arg(format!("the ball of radius {r0} has no outer boundary; x0 is not interior")));
    }

    let ring = ring_modulus_curve(g, x0, radii, r0, q, solver)?;

    let image = match &opts.map {
        Some(map) => {
            let mo = MapOptions {
                measure: opts.measure.clone(),
                require_bijective: true,
            };
            Some((map, apply_vertex_map(g, map, &mo)?))
        }
        None => None,
    };
    let (mesh_graph, img_of): (&MetricGraph, Box<dyn Fn(NodeId) -> NodeId + Sync>) = match &image {
        Some((map, gi)) => (gi, Box::new(move |v| map.node_image(v))),
        None => (g, Box::new(|v| v)),
    };
    let dmask = domain.mask(n);
    let mesh = median(
        g.edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| dmask[e.a] && dmask[e.b])
            .map(|(i, _)| match &image {
                Some((_, gi)) => gi.edge(i).length,
                None => g.edge(i).length,
            })
            .collect(),
    );
    let threshold = opts.threshold_factor * mesh;

    let samples = radii
        .par_iter()
        .map(|&r| {
            let inner: NodeSet = domain.iter().filter(|&v| d[v] <= r).collect();
            if inner.is_empty() {
                return Err(Error::ScaleTooFine(format!("no node within {r} of the puncture")));
            }
            let fam = CurveFamilySpec::new(inner.clone(), outer.clone()).within(domain.clone());
            let src = solver.solve(g, &fam, q)?;
            let mod_image = match &image {
                Some((map, gi)) => Some(solver.solve(gi, &image_family(map, &fam), q)?.value),
                None => None,
            };
            let cluster: NodeSet = inner.iter().map(&img_of).collect();
            Ok(PunctureSample {
                r,
                mod_source: src.value,
                gap_source: src.gap,
                status_source: src.status,
                bound: ring.bound(r),
                mod_image,
                cluster_diameter: cluster_diameter(mesh_graph, &cluster)?,
                cluster_size: cluster.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let strictly_decreasing = samples.windows(2).all(|w| w[1].mod_source < w[0].mod_source);
    let within_bound = samples
        .iter()
        .all(|s| s.mod_source <= s.bound * (1.0 + solver.tol) + solver.tol);
    let last = samples.last().unwrap();
    let verdict = if last.cluster_diameter <= threshold {
        Verdict::PointLike
    } else {
        Verdict::ContinuumLike
    };
    let mod_image_floor = samples
        .iter()
        .filter_map(|s| s.mod_image)
        .reduce(f64::min);
    Ok(PunctureReport {
        center: x0,
        r0,
        q,
        samples,
        ring,
        strictly_decreasing,
        within_bound,
        mesh,
        threshold,
        verdict,
        mod_image_floor,
    })
}
