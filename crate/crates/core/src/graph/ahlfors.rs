use serde::{Deserialize, Serialize};

use super::{MetricGraph, NodeSet};
use crate::error::{Error, Result};

/// Fitted Ahlfors regularity data: `c⁻¹ r^q ≤ μ(B(x, r)) ≤ c r^q` on the
/// sampled range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsFit {
    pub q_hat: f64,
    /// Smallest `c ≥ 1` for which the two-sided bound with exponent `q_hat`
    /// holds at every sample.
    pub c_hat: f64,
    pub r_range: (f64, f64),
    /// Root-mean-square residual of the log-log regression.
    pub residual: f64,
    /// `exp(intercept)` of the regression line.
    pub prefactor: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Ordinary least squares line through `(x, y)` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub max_abs_residual: f64,
}

/// Least-squares fit of `y = intercept + slope · x`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 2 {
        return Err(Error::arg("regression needs at least two points"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::arg("regression abscissae are all equal"));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = points
        .iter()
        .map(|p| p.1 - intercept - slope * p.0)
        .collect();
    Ok(PowerLawFit {
        slope,
        intercept,
        rms_residual: (res.iter().map(|r| r * r).sum::<f64>() / n).sqrt(),
        max_abs_residual: res.iter().fold(0.0, |m, r| f64::max(m, r.abs())),
    })
}

/// Fits `q` and `c` by pooled log-log regression of `μ(B(x, r))` over
/// `n_radii` geometrically spaced radii in `[r_min, r_max]`.
pub fn ahlfors_fit(
    g: &MetricGraph,
    samples: &NodeSet,
    r_min: f64,
    r_max: f64,
    n_radii: usize,
) -> Result<AhlforsFit> {
    if !(r_min > 0.0 && r_min < r_max) {
        return Err(Error::arg(format!(
            "need 0 < r_min < r_max, got [{r_min}, {r_max}]"
        )));
    }
    if n_radii < 3 {
        return Err(Error::arg("n_radii must be at least 3"));
    }
    let diam = g.diameter_estimate();
    if r_max > diam / 2.0 {
        return Err(Error::arg(format!(
            "r_max = {r_max} exceeds half the diameter ({diam})"
        )));
    }
    let ratio = (r_max / r_min).powf(1.0 / (n_radii - 1) as f64);
    let radii: Vec<f64> = (0..n_radii)
        .map(|k| if k + 1 == n_radii { r_max } else { r_min * ratio.powi(k as i32) })
        .collect();
    ahlfors_fit_at_radii(g, samples, &radii)
}

/// Same fit at caller-chosen radii.
pub fn ahlfors_fit_at_radii(g: &MetricGraph, samples: &NodeSet, radii: &[f64]) -> Result<AhlforsFit> {
    if samples.is_empty() {
        return Err(Error::arg("no sample nodes"));
    }
    samples.validate(g.node_count())?;
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::arg("radii must be positive"));
    }
    let r_lo = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let r_hi = radii.iter().copied().fold(0.0, f64::max);

    let mut pts = Vec::with_capacity(samples.len() * radii.len());
    let mut raw = Vec::with_capacity(pts.capacity());
    for x in samples.iter() {
        let dist = g.distances_within(x, r_hi);
        for &r in radii {
            let mu: f64 = (0..g.node_count())
                .filter(|&v| dist[v] < r)
                .map(|v| g.node_measure(v))
                .sum();
            if mu <= 0.0 {
                return Err(Error::ScaleTooFine(format!(
                    "ball around node {x} of radius {r} has zero measure"
                )));
            }
            pts.push((r.ln(), mu.ln()));
            raw.push((r, mu));
        }
    }
    let fit = fit_power_law(&pts)?;
    let q = fit.slope;
    if !(q > 0.0) {
        return Err(Error::arg(format!("fitted dimension {q} is not positive")));
    }
    let log_c = pts.iter().fold(0.0, |m: f64, &(lr, lm)| m.max((lm - q * lr).abs()));
    Ok(AhlforsFit {
        q_hat: q,
        c_hat: log_c.exp(),
        r_range: (r_lo, r_hi),
        residual: fit.rms_residual,
        prefactor: fit.intercept.exp(),
        samples: raw,
    })
}
