use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentSolver;
use crate::error::{Error, Result};
use crate::graph::{fit_power_law, MetricGraph, NodeId, NodeSet};
use crate::modulus::{CurveFamilySpec, SolveStatus};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingSample {
    pub r: f64,
    pub log_ratio: f64,
    pub modulus: f64,
    pub gap: f64,
    pub status: SolveStatus,
}

/// Ring moduli `Mod_Q Γ(B̄(x0, r), X ∖ B(x0, R), X)` and their fit against
/// `C₁ log(R/r)^{1-Q}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingDecayFit {
    /// Ordered by increasing `log(R/r)`.
    pub samples: Vec<RingSample>,
    /// Slope of `log Mod` against `log log(R/r)`.
    pub fitted_exponent: f64,
    /// Smallest `C₁` with `Mod ≤ C₁ log(R/r)^{1-Q}` at every sample.
    pub fitted_c1: f64,
    /// `exp` of the regression intercept.
    pub intercept_c1: f64,
    pub rms_residual: f64,
    pub q: f64,
    pub big_r: f64,
    pub center: NodeId,
    /// Whether moduli are nonincreasing in `log(R/r)` within the solver
    /// tolerance.
    pub monotone: bool,
}

impl RingDecayFit {
    /// `C₁ log(R/r)^{1-Q}` with the fitted constant.
    pub fn bound(&self, r: f64) -> f64 {
        self.fitted_c1 * (self.big_r / r).ln().powf(1.0 - self.q)
    }
}

pub fn ring_modulus_curve(
    g: &MetricGraph,
    x0: NodeId,
    r_values: &[f64],
    big_r: f64,
    q: f64,
    solver: &ExperimentSolver,
) -> Result<RingDecayFit> {
    g.check_node(x0)?;
    if r_values.len() < 3 {
        return Err(Error::arg("ring fit needs at least three radii"));
    }
    if let Some(r) = r_values.iter().find(|&&r| !(r > 0.0 && 2.0 * r < big_r)) {
        return Err(Error::arg(format!("radius {r} violates 0 < 2r < R = {big_r}")));
    }
    let d = g.distances_from(x0);
    let outer: NodeSet = (0..g.node_count()).filter(|&v| d[v] >= big_r).collect();
    if outer.is_empty() {
        return Err(Error::arg(format!("no node lies at distance {big_r} or more from the center")));
    }
    let mut radii = r_values.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    radii.dedup();

    let samples = radii
        .par_iter()
        .map(|&r| {
            let inner: NodeSet = (0..g.node_count()).filter(|&v| d[v] <= r).collect();
            if inner.len() < 2 {
                return Err(Error::ScaleTooFine(format!("closed ball of radius {r} holds no edge")));
            }
            let res = solver.solve(g, &CurveFamilySpec::new(inner, outer.clone()), q)?;
            Ok(RingSample {
                r,
                log_ratio: (big_r / r).ln(),
                modulus: res.value,
                gap: res.gap,
                status: res.status,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.log_ratio.ln(), s.modulus.ln()))
        .collect();
    let fit = fit_power_law(&pts)?;
    let fitted_c1 = samples
        .iter()
        .map(|s| s.modulus * s.log_ratio.powf(q - 1.0))
        .fold(0.0, f64::max);
    let monotone = samples
        .windows(2)
        .all(|w| w[1].modulus <= w[0].modulus * (1.0 + solver.tol) + solver.tol);

    Ok(RingDecayFit {
        samples,
        fitted_exponent: fit.slope,
        fitted_c1,
        intercept_c1: fit.intercept.exp(),
        rms_residual: fit.rms_residual,
        q,
        big_r,
        center: x0,
        monotone,
    })
}
