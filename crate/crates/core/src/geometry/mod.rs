//! Geometric experiments built on the modulus solver: ring decay, Loewner
//! and bounded-geometry profiles, distortion under vertex maps, and the
//! puncture chain.

mod loewner;
mod puncture;
mod qc;
mod ring;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, NodeSet};
use crate::modulus::{compute_modulus_with, CurveFamilySpec, ModulusResult, SolverOptions};

pub use loewner::{
    bounded_geometry_probe, loewner_profile, BoundedGeometryParams, LoewnerEstimate, PairSample, ProfilePoint,
    SamplerOptions,
};
pub use puncture::{puncture_experiment, PunctureOptions, PunctureReport, PunctureSample, Verdict};
pub use qc::{
    metric_dilatation, metric_dilatation_report, modulus_ratio, DilatationReport, DilatationSample,
    DistortionReport, FamilyRatio,
};
pub use ring::{ring_modulus_curve, RingDecayFit, RingSample};

/// Solver settings shared by the experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSolver {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ExperimentSolver {
    fn default() -> Self {
        ExperimentSolver {
            tol: 1e-3,
            max_iter: 200_000,
        }
    }
}

impl ExperimentSolver {
    pub(crate) fn solve(&self, g: &MetricGraph, fam: &CurveFamilySpec, p: f64) -> Result<ModulusResult> {
        compute_modulus_with(g, fam, p, &SolverOptions::new(self.tol, self.max_iter))
    }
}

/// `dist(E, F) / min(diam E, diam F)` for disjoint connected node sets with
/// at least two nodes each.
pub fn relative_separation(g: &MetricGraph, e: &NodeSet, f: &NodeSet) -> Result<f64> {
    let n = g.node_count();
    e.validate(n)?;
    f.validate(n)?;
    if !e.is_disjoint(f) {
        return Err(Error::arg("continua must be disjoint"));
    }
    let de = continuum_diameter(g, e)?;
    let df = continuum_diameter(g, f)?;
    Ok(g.set_distance(e, f)? / de.min(df))
}

fn continuum_diameter(g: &MetricGraph, s: &NodeSet) -> Result<f64> {
    if s.len() < 2 {
        return Err(Error::DegenerateContinuum(format!("set of {} node(s)", s.len())));
    }
    if !g.is_connected_set(s) {
        return Err(Error::DegenerateContinuum("set is not connected".into()));
    }
    g.set_diameter(s)
}

/// Running minimum over the available entries, leaving gaps untouched.
pub(crate) fn running_min(raw: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut best = f64::INFINITY;
    raw.iter()
        .map(|x| {
            x.map(|v| {
                best = best.min(v);
                best
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{euclidean_grid, GridSpec};
    use crate::graph::Edge;

    #[test]
    fn two_edges_at_unit_distance() {
        // 0-1 and 2-3 unit edges joined by a unit edge 1-2.
        let edges = (0..3).map(|i| Edge::new(i, i + 1, 1.0, 1.0)).collect();
        let g = MetricGraph::new(4, 0, vec![], edges).unwrap();
        let s = relative_separation(&g, &NodeSet::new(vec![0, 1]), &NodeSet::new(vec![2, 3])).unwrap();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn shifted_segments_quarter() {
        // Vertical segments of length 2 at horizontal offset 0.5.
        let g = euclidean_grid(&GridSpec::new(2, 5, 0.5)).unwrap();
        let spec = GridSpec::new(2, 5, 0.5);
        let e: NodeSet = (0..5).map(|j| spec.index(&[0, j])).collect();
        let f: NodeSet = (0..5).map(|j| spec.index(&[1, j])).collect();
        assert_eq!(relative_separation(&g, &e, &f).unwrap(), 0.25);
    }

    #[test]
    fn degenerate_sets_rejected() {
        let g = euclidean_grid(&GridSpec::new(2, 4, 1.0)).unwrap();
        let single = NodeSet::singleton(0);
        let pair = NodeSet::new(vec![5, 6]);
        assert!(matches!(
            relative_separation(&g, &single, &pair),
            Err(Error::DegenerateContinuum(_))
        ));
        let split = NodeSet::new(vec![0, 2]);
        assert!(matches!(
            relative_separation(&g, &split, &pair),
            Err(Error::DegenerateContinuum(_))
        ));
        assert!(relative_separation(&g, &pair, &pair).is_err());
    }

    #[test]
    fn running_min_skips_gaps() {
        let env = running_min(&[Some(3.0), None, Some(4.0), Some(1.0)]);
        assert_eq!(env, vec![Some(3.0), None, Some(3.0), Some(1.0)]);
    }
}
