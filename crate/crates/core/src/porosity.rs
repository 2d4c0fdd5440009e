//! Spherical t-porosity of finite point sets.
//!
//! At a point `x` and scale `r`, the test passes when no point of the set
//! lies at distance `d` with `r/t ≤ d < t r` (closed inner threshold, open
//! outer one). A set passes at `t` when every point passes at least `m`
//! scales of a geometric schedule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, NodeSet};

/// Finite metric space of points indexed `0..len`.
pub trait PointMetric: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn distances_from(&self, i: usize) -> Vec<f64>;
}

/// Points of `ℝ^d` under the Euclidean metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanPoints(pub Vec<Vec<f64>>);

impl EuclideanPoints {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(first) = points.first() {
            if first.is_empty() || points.iter().any(|p| p.len() != first.len()) {
                return Err(Error::arg("points must share one positive dimension"));
            }
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::arg("point coordinates must be finite"));
        }
        Ok(EuclideanPoints(points))
    }

    pub fn from_reals(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| vec![x]).collect())
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl PointMetric for EuclideanPoints {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn distances_from(&self, i: usize) -> Vec<f64> {
        self.0.iter().map(|p| euclid(&self.0[i], p)).collect()
    }
}

/// Nodes of a graph under its path metric.
pub struct GraphPoints<'g> {
    pub graph: &'g MetricGraph,
    pub nodes: NodeSet,
}

impl PointMetric for GraphPoints<'_> {
    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn distances_from(&self, i: usize) -> Vec<f64> {
        let d = self.graph.distances_from(self.nodes.as_slice()[i]);
        self.nodes.iter().map(|v| d[v]).collect()
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 1.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("t must exceed 1, got {t}")))
    }
}

fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::arg("scales must be positive"));
    }
    Ok(())
}

/// Per-scale results given sorted distances from `x` to the set.
fn annulus_empty(sorted: &[f64], t: f64, scales: &[f64]) -> Vec<bool> {
    scales
        .iter()
        .map(|&r| {
            let lo = r / t;
            let hi = t * r;
            let first = sorted.partition_point(|&d| d < lo);
            first == sorted.len() || sorted[first] >= hi
        })
        .collect()
}

/// Annulus test at `x ∈ ℝ^d` against the Euclidean set `points`.
pub fn porosity_check(points: &[Vec<f64>], x: &[f64], t: f64, scales: &[f64]) -> Result<Vec<bool>> {
    check_t(t)?;
    check_scales(scales)?;
    let mut d: Vec<f64> = points.iter().map(|p| euclid(x, p)).collect();
    d.sort_by(f64::total_cmp);
    Ok(annulus_empty(&d, t, scales))
}

/// Annulus test at point `i` of a finite metric space.
pub fn porosity_check_at(space: &dyn PointMetric, i: usize, t: f64, scales: &[f64]) -> Result<Vec<bool>> {
    check_t(t)?;
    check_scales(scales)?;
    if i >= space.len() {
        return Err(Error::arg(format!("point {i} out of range")));
    }
    let mut d = space.distances_from(i);
    d.sort_by(f64::total_cmp);
    Ok(annulus_empty(&d, t, scales))
}

/// Geometric scale schedule `r0 · factor^j`, `j = 0..count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub r0: f64,
    pub factor: f64,
    pub count: usize,
}

impl ScaleSchedule {
    pub fn scales(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.r0 * self.factor.powi(j as i32)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointPorosity {
    pub index: usize,
    pub scales_passed: Vec<f64>,
    pub scales_failed: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PorosityReport {
    pub t: f64,
    pub m: usize,
    /// Every point passed at least `m` scales.
    pub verdict: bool,
    pub min_passes: usize,
    pub per_point: Vec<PointPorosity>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PorosityScan {
    pub schedule: ScaleSchedule,
    pub reports: Vec<PorosityReport>,
    pub smallest_passing_t: Option<f64>,
}

pub fn porosity_scan(
    space: &dyn PointMetric,
    t_grid: &[f64],
    schedule: ScaleSchedule,
    m: usize,
) -> Result<PorosityScan> {
    if !(schedule.factor > 0.0 && schedule.factor < 1.0) {
        return Err(Error::arg(format!("factor must lie in (0, 1), got {}", schedule.factor)));
    }
    if !(schedule.r0 > 0.0 && schedule.r0.is_finite()) {
        return Err(Error::arg("r0 must be positive"));
    }
    if m < 1 || schedule.count < m {
        return Err(Error::arg(format!("need count >= m >= 1, got count {} and m {m}", schedule.count)));
    }
    if t_grid.is_empty() {
        return Err(Error::arg("t grid must be nonempty"));
    }
    for &t in t_grid {
        check_t(t)?;
    }
    if space.is_empty() {
        return Err(Error::arg("point set is empty"));
    }
    let scales = schedule.scales();
    let sorted: Vec<Vec<f64>> = (0..space.len())
        .into_par_iter()
        .map(|i| {
            let mut d = space.distances_from(i);
            d.sort_by(f64::total_cmp);
            d
        })
        .collect();
    let reports: Vec<PorosityReport> = t_grid
        .iter()
        .map(|&t| {
            let per_point: Vec<PointPorosity> = sorted
                .par_iter()
                .enumerate()
                .map(|(index, d)| {
                    let ok = annulus_empty(d, t, &scales);
                    let (mut scales_passed, mut scales_failed) = (Vec::new(), Vec::new());
                    for (&r, pass) in scales.iter().zip(ok) {
                        if pass {
                            scales_passed.push(r);
                        } else {
                            scales_failed.push(r);
                        }
                    }
                    PointPorosity {
                        index,
                        scales_passed,
                        scales_failed,
                    }
                })
                .collect();
            let min_passes = per_point.iter().map(|p| p.scales_passed.len()).min().unwrap_or(0);
            PorosityReport {
                t,
                m,
                verdict: min_passes >= m,
                min_passes,
                per_point,
            }
        })
        .collect();
    let smallest_passing_t = reports
        .iter()
        .filter(|r| r.verdict)
        .map(|r| r.t)
        .reduce(f64::min);
    Ok(PorosityScan {
        schedule,
        reports,
        smallest_passing_t,
    })
}
