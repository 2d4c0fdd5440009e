use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentSolver;
use crate::error::{Error, Result};
use crate::generators::VertexMap;
use crate::graph::{MetricGraph, NodeId, NodeSet};
use crate::modulus::CurveFamilySpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyRatio {
    pub family: usize,
    pub mod_source: f64,
    pub mod_image: f64,
    /// `max(Mod fΓ / Mod Γ, Mod Γ / Mod fΓ)`; absent for skipped families.
    pub ratio: Option<f64>,
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    /// Worst two-sided modulus ratio over the tested families.
    pub modulus_ratio_k: f64,
    /// Metric dilatation, when it was measured.
    pub dilatation_h: Option<f64>,
    pub q: f64,
    pub families: Vec<FamilyRatio>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilatationSample {
    pub r: f64,
    pub max_inner: f64,
    pub min_outer: f64,
    /// `max_inner / min_outer`; absent when a comparison set was empty.
    pub quotient: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilatationReport {
    pub h: f64,
    pub center: NodeId,
    pub outer_factor: f64,
    pub samples: Vec<DilatationSample>,
}

fn map_set(map: &VertexMap, s: &NodeSet) -> NodeSet {
    s.iter().map(|v| map.node_image(v)).collect()
}

/// Image family `f(Γ)`: endpoints and domain carried through the map.
pub(crate) fn image_family(map: &VertexMap, fam: &CurveFamilySpec) -> CurveFamilySpec {
    CurveFamilySpec {
        e: map_set(map, &fam.e),
        f: map_set(map, &fam.f),
        domain: fam.domain.as_ref().map(|u| map_set(map, u)),
    }
}

/// Two-sided modulus distortion of `map` over `families`, with the image
/// families evaluated on `g_img`. Vacuous families are skipped and noted.
pub fn modulus_ratio(
    g: &MetricGraph,
    g_img: &MetricGraph,
    map: &VertexMap,
    families: &[CurveFamilySpec],
    q: f64,
    solver: &ExperimentSolver,
) -> Result<DistortionReport> {
    if g.node_count() != g_img.node_count() {
        return Err(Error::NonBijective(format!(
            "source has {} nodes but image has {}",
            g.node_count(),
            g_img.node_count()
        )));
    }
    if families.is_empty() {
        return Err(Error::arg("no families to compare"));
    }
    let rows = families
        .par_iter()
        .enumerate()
        .map(|(i, fam)| {
            let src = solver.solve(g, fam, q)?;
            let img = solver.solve(g_img, &image_family(map, fam), q)?;
            let skipped = if src.vacuous || img.vacuous {
                Some("vacuous family".to_string())
            } else if src.value <= 0.0 || img.value <= 0.0 {
                Some("zero modulus".to_string())
            } else {
                None
            };
            let ratio = skipped
                .is_none()
                .then(|| (img.value / src.value).max(src.value / img.value));
            Ok(FamilyRatio {
                family: i,
                mod_source: src.value,
                mod_image: img.value,
                ratio,
                skipped,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let k = rows
        .iter()
        .filter_map(|r| r.ratio)
        .reduce(f64::max)
        .ok_or_else(|| Error::arg("every family was vacuous"))?;
    Ok(DistortionReport {
        modulus_ratio_k: k,
        dilatation_h: None,
        q,
        families: rows,
    })
}

/// `max_r  max{d'(fx, fy) : d(x, y) ≤ r} / min{d'(fx, fy) : r ≤ d(x, y) ≤ c r}`
/// with `c = outer_factor`. Radii with an empty comparison set are skipped.
pub fn metric_dilatation_report(
    g: &MetricGraph,
    g_img: &MetricGraph,
    map: &VertexMap,
    x: NodeId,
    r_values: &[f64],
    outer_factor: f64,
) -> Result<DilatationReport> {
    g.check_node(x)?;
    if g.node_count() != g_img.node_count() {
        return Err(Error::NonBijective("source and image sizes differ".into()));
    }
    if !(outer_factor >= 1.0) {
        return Err(Error::arg("outer_factor must be at least 1"));
    }
    if r_values.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::arg("radii must be positive"));
    }
    let r_max = r_values.iter().copied().fold(0.0, f64::max);
    let d = g.distances_within(x, outer_factor * r_max);
    let d_img = g_img.distances_from(map.node_image(x));
    let samples: Vec<DilatationSample> = r_values
        .iter()
        .map(|&r| {
            let mut max_inner: f64 = 0.0;
            let mut min_outer = f64::INFINITY;
            for y in (0..g.node_count()).filter(|&y| y != x) {
                let dy = d[y];
                let di = d_img[map.node_image(y)];
                if dy <= r {
                    max_inner = max_inner.max(di);
                }
                if dy >= r && dy <= outer_factor * r {
                    min_outer = min_outer.min(di);
                }
            }
            let quotient = (max_inner > 0.0 && min_outer.is_finite() && min_outer > 0.0)
                .then(|| max_inner / min_outer);
            DilatationSample {
                r,
                max_inner,
                min_outer,
                quotient,
            }
        })
        .collect();
    let h = samples
        .iter()
        .filter_map(|s| s.quotient)
        .reduce(f64::max)
        .ok_or_else(|| Error::arg("no radius produced a comparison"))?;
    Ok(DilatationReport {
        h,
        center: x,
        outer_factor,
        samples,
    })
}

/// Metric dilatation at `x` with the default outer cutoff `4r`.
pub fn metric_dilatation(
    g: &MetricGraph,
    g_img: &MetricGraph,
    map: &VertexMap,
    x: NodeId,
    r_values: &[f64],
) -> Result<f64> {
    Ok(metric_dilatation_report(g, g_img, map, x, r_values, 4.0)?.h)
}
