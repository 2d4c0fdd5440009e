//! Restricted program over finitely many curves.
//!
//! For paths `γ` with multipliers `λ_γ ≥ 0` and per-edge aggregates
//! `Λ(e) = Σ_{γ∋e} λ_γ`, stationarity of the Lagrangian gives
//! `ρ(e) = (Λ(e) ℓ(e) / (p σ(e)))^{1/(p-1)}`. The dual function is
//! `D(λ) = Σ λ_γ − (p−1) Σ_e σ(e) ρ(e)^p`, and `∂D/∂λ_γ = 1 − L_γ(ρ)` where
//! `L_γ` is the ρ-length of `γ`. Dual coordinate ascent solves
//! `L_γ = 1` one path at a time, clamping at `λ_γ = 0`.

use super::Density;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, MetricGraph};

/// Dual value of multipliers `lambdas` attached to `paths`.
pub fn dual_lower_bound(g: &MetricGraph, paths: &[Vec<EdgeId>], lambdas: &[f64], p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::arg(format!("p must exceed 1, got {p}")));
    }
    if paths.len() != lambdas.len() {
        return Err(Error::arg("one multiplier per path is required"));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::arg(format!("multipliers must be nonnegative, got {l}")));
    }
    let mut agg = vec![0.0; g.edge_count()];
    for (path, &l) in paths.iter().zip(lambdas) {
        for &e in path {
            agg[e] += l;
        }
    }
    let q = p / (p - 1.0);
    let energy: f64 = g
        .edges()
        .iter()
        .zip(&agg)
        .filter(|(_, &a)| a > 0.0)
        .map(|(e, &a)| e.sigma * (a * e.length / (p * e.sigma)).powf(q))
        .sum();
    Ok(lambdas.iter().sum::<f64>() - (p - 1.0) * energy)
}

/// Snapshot of the restricted problem at the current multipliers.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RestrictedStats {
    /// `Σ σ ρ^p` at `ρ(λ)`.
    pub energy: f64,
    pub dual: f64,
    /// Smallest ρ-length among the active paths.
    pub min_length: f64,
}

impl RestrictedStats {
    /// Objective of `ρ(λ)` rescaled to satisfy every active constraint.
    pub fn upper(&self, p: f64) -> f64 {
        if self.min_length > 0.0 {
            self.energy / self.min_length.powf(p)
        } else {
            f64::INFINITY
        }
    }

    pub fn gap(&self, p: f64) -> f64 {
        self.upper(p) - self.dual
    }

    /// Whether the gap is within `eps` relative to `max(upper, 1)`.
    pub fn within(&self, p: f64, eps: f64) -> bool {
        let upper = self.upper(p);
        upper.is_finite() && upper - self.dual <= eps * upper.max(1.0)
    }
}

/// Active path set with warm-started dual coordinate ascent.
#[derive(Clone, Debug)]
pub(crate) struct PathSystem<'g> {
    g: &'g MetricGraph,
    p: f64,
    paths: Vec<Vec<EdgeId>>,
    lambda: Vec<f64>,
    agg: Vec<f64>,
    rho: Vec<f64>,
    /// `ℓ(e) / (p σ(e))`.
    coef: Vec<f64>,
    support: Vec<EdgeId>,
    in_support: Vec<bool>,
    exponent: f64,
}

impl<'g> PathSystem<'g> {
    pub fn new(g: &'g MetricGraph, p: f64) -> Self {
        let m = g.edge_count();
        PathSystem {
            g,
            p,
            paths: Vec::new(),
            lambda: Vec::new(),
            agg: vec![0.0; m],
            rho: vec![0.0; m],
            coef: g.edges().iter().map(|e| e.length / (p * e.sigma)).collect(),
            support: Vec::new(),
            in_support: vec![false; m],
            exponent: 1.0 / (p - 1.0),
        }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn paths(&self) -> &[Vec<EdgeId>] {
        &self.paths
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn add_path(&mut self, path: Vec<EdgeId>) {
        for &e in &path {
            if !self.in_support[e] {
                self.in_support[e] = true;
                self.support.push(e);
            }
        }
        self.paths.push(path);
        self.lambda.push(0.0);
    }

    #[inline]
    fn rho_of(&self, e: EdgeId, agg: f64) -> f64 {
        if agg <= 0.0 {
            0.0
        } else if self.p == 2.0 {
            agg * self.coef[e]
        } else {
            (agg * self.coef[e]).powf(self.exponent)
        }
    }

    pub fn path_length(&self, i: usize) -> f64 {
        self.paths[i]
            .iter()
            .map(|&e| self.rho[e] * self.g.edge(e).length)
            .sum()
    }

    /// ρ-length of path `i` after shifting its multiplier by `delta`.
    fn shifted_length(&self, i: usize, delta: f64) -> f64 {
        self.paths[i]
            .iter()
            .map(|&e| self.rho_of(e, self.agg[e] + delta) * self.g.edge(e).length)
            .sum()
    }

    fn shifted_slope(&self, i: usize, delta: f64) -> f64 {
        // d/dδ of (a c)^{1/(p-1)} ℓ = ℓ c /(p-1) (a c)^{1/(p-1) - 1}
        self.paths[i]
            .iter()
            .map(|&e| {
                let a = self.agg[e] + delta;
                if a <= 0.0 {
                    return f64::INFINITY;
                }
                let c = self.coef[e];
                self.g.edge(e).length * c * self.exponent * (a * c).powf(self.exponent - 1.0)
            })
            .sum()
    }

    /// Multiplier shift `δ ≥ -λ_i` that makes path `i` exactly tight, or
    /// that drops `λ_i` to zero if the path is slack there.
    fn coordinate_step(&self, i: usize) -> f64 {
        let lo_bound = -self.lambda[i];
        if self.p == 2.0 {
            let slope: f64 = self.paths[i]
                .iter()
                .map(|&e| self.coef[e] * self.g.edge(e).length)
                .sum();
            let delta = (1.0 - self.path_length(i)) / slope;
            return delta.max(lo_bound);
        }
        if self.shifted_length(i, lo_bound) >= 1.0 {
            return lo_bound;
        }
        let current = self.shifted_length(i, 0.0);
        // Bracket [lo, hi] with length(lo) < 1 <= length(hi).
        let (mut lo, mut hi) = if current < 1.0 {
            let mut step = self.lambda[i].max(1e-12).max(
                self.paths[i]
                    .iter()
                    .map(|&e| self.agg[e])
                    .fold(0.0, f64::max),
            );
            let mut lo = 0.0;
            loop {
                if self.shifted_length(i, step) >= 1.0 {
                    break (lo, step);
                }
                lo = step;
                step *= 2.0;
                if !step.is_finite() {
                    return lo;
                }
            }
        } else {
            (lo_bound, 0.0)
        };
        let mut x = if current < 1.0 { lo } else { hi };
        for _ in 0..100 {
            let f = self.shifted_length(i, x) - 1.0;
            if f.abs() <= 1e-15 {
                return x;
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = self.shifted_slope(i, x);
            let newton = x - f / slope;
            x = if slope.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 1e-16 * hi.abs().max(1e-300) {
                break;
            }
        }
        x
    }

    fn apply_step(&mut self, i: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        self.lambda[i] += delta;
        if self.lambda[i] < 0.0 {
            self.lambda[i] = 0.0;
        }
        for k in 0..self.paths[i].len() {
            let e = self.paths[i][k];
            let a = (self.agg[e] + delta).max(0.0);
            self.agg[e] = a;
            self.rho[e] = self.rho_of(e, a);
        }
    }

    /// One cyclic pass of coordinate ascent over all paths.
    pub fn sweep(&mut self) {
        for i in 0..self.paths.len() {
            let delta = self.coordinate_step(i);
            self.apply_step(i, delta);
        }
    }

    /// Recompute aggregates from scratch to shed accumulated rounding.
    pub fn refresh(&mut self) {
        for &e in &self.support {
            self.agg[e] = 0.0;
        }
        for (path, &l) in self.paths.iter().zip(&self.lambda) {
            for &e in path {
                self.agg[e] += l;
            }
        }
        for k in 0..self.support.len() {
            let e = self.support[k];
            self.rho[e] = self.rho_of(e, self.agg[e]);
        }
    }

    pub fn stats(&self) -> RestrictedStats {
        let energy: f64 = self
            .support
            .iter()
            .map(|&e| self.g.edge(e).sigma * self.rho[e].powf(self.p))
            .sum();
        let min_length = (0..self.paths.len())
            .map(|i| self.path_length(i))
            .fold(f64::INFINITY, f64::min);
        RestrictedStats {
            energy,
            dual: self.lambda.iter().sum::<f64>() - (self.p - 1.0) * energy,
            min_length,
        }
    }

    /// Sweeps until the restricted duality gap is at most
    /// `eps · max(upper, 1)` or `max_sweeps` passes have run. Returns the
    /// final statistics and whether the target was met.
    pub fn solve(&mut self, eps: f64, max_sweeps: usize) -> (RestrictedStats, bool, usize) {
        let mut stats = self.stats();
        let mut sweeps = 0;
        while sweeps < max_sweeps {
            if stats.within(self.p, eps) {
                return (stats, true, sweeps);
            }
            self.sweep();
            sweeps += 1;
            if sweeps % 64 == 0 {
                self.refresh();
            }
            stats = self.stats();
        }
        let ok = stats.within(self.p, eps);
        (stats, ok, sweeps)
    }
}

pub(crate) const DEFAULT_MAX_SWEEPS: usize = 20_000;

/// Minimizes `Σ σ ρ^p` subject to unit ρ-length on every given path.
/// The returned density is exactly feasible for the given paths (rescaled
/// by their minimum ρ-length) and within `tol` of optimal in duality gap.
pub fn inner_minimize(g: &MetricGraph, paths: &[Vec<EdgeId>], p: f64, tol: f64) -> Result<Density> {
    if paths.is_empty() {
        return Err(Error::arg("inner_minimize needs at least one path"));
    }
    if !(p > 1.0) {
        return Err(Error::arg(format!("p must exceed 1, got {p}")));
    }
    if !(tol > 0.0) {
        return Err(Error::arg("tol must be positive"));
    }
    if let Some(e) = paths.iter().flatten().find(|&&e| e >= g.edge_count()) {
        return Err(Error::arg(format!("path references missing edge {e}")));
    }
    if paths.iter().any(Vec::is_empty) {
        return Err(Error::arg("paths must contain at least one edge"));
    }
    let mut sys = PathSystem::new(g, p);
    for path in paths {
        sys.add_path(path.clone());
    }
    let (stats, ok, sweeps) = sys.solve(tol, DEFAULT_MAX_SWEEPS);
    let scale = if stats.min_length > 0.0 { 1.0 / stats.min_length } else { 0.0 };
    let rho = Density::new(sys.rho().iter().map(|r| r * scale).collect());
    if ok {
        Ok(rho)
    } else {
        Err(Error::InnerSolveFailed {
            residual: stats.gap(p),
            sweeps,
            best: Box::new(rho),
        })
    }
}
