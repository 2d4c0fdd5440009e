use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{relative_separation, running_min, ExperimentSolver};
use crate::error::{Error, Result};
use crate::graph::search::SearchLimits;
use crate::graph::{MetricGraph, NodeId, NodeSet, ShortestPathTree};
use crate::modulus::{CurveFamilySpec, SolveStatus};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerOptions {
    pub pairs_per_t: usize,
    /// Rejection-sampling budget per `t`, as a multiple of `pairs_per_t`.
    pub attempts_per_pair: usize,
    pub seed: u64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            pairs_per_t: 8,
            attempts_per_pair: 200,
            seed: 0,
        }
    }
}

/// One sampled continuum pair and its modulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub t: f64,
    pub pair: usize,
    pub e_size: usize,
    pub f_size: usize,
    pub separation: f64,
    pub modulus: f64,
    pub gap: f64,
    pub status: SolveStatus,
    /// Modulus of the same pair with curves allowed anywhere in the graph;
    /// only filled by the bounded-geometry probe.
    pub unconstrained: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub t: f64,
    /// Minimum modulus over the pairs sampled at this `t`.
    pub raw: Option<f64>,
    /// Running minimum of `raw` over `t' ≤ t`.
    pub envelope: Option<f64>,
    pub pairs: usize,
    pub attempts: usize,
    /// Set when the sampler found no admissible pair within its budget.
    pub flagged: bool,
}

/// Sampled estimate of the Loewner function `φ(t)`. Values are minima over
/// finitely many pairs, hence upper estimates of the true infimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoewnerEstimate {
    pub q: f64,
    pub profile: Vec<ProfilePoint>,
    pub samples: Vec<PairSample>,
    pub sampler: SamplerOptions,
}

impl LoewnerEstimate {
    /// `(t, φ̂(t))` with the envelope applied; flagged `t` are omitted.
    pub fn phi_hat(&self) -> Vec<(f64, f64)> {
        self.profile
            .iter()
            .filter_map(|p| p.envelope.map(|v| (p.t, v)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedGeometryParams {
    pub c0: f64,
    pub lambda: f64,
    pub r: f64,
    pub q: f64,
    pub center: NodeId,
    /// `(radius, μ(B(x0, radius)))`.
    pub c0_samples: Vec<(f64, f64)>,
    pub psi_samples: Vec<ProfilePoint>,
    /// Minimum unconstrained modulus over the same pairs, per `t`.
    pub unconstrained_min: Vec<Option<f64>>,
    pub samples: Vec<PairSample>,
    pub sampler: SamplerOptions,
}

/// Where continua are drawn from.
struct Region<'a> {
    nodes: Vec<NodeId>,
    mask: Vec<bool>,
    bbox: Option<(Vec<f64>, Vec<f64>)>,
    g: &'a MetricGraph,
}

impl<'a> Region<'a> {
    fn new(g: &'a MetricGraph, nodes: Vec<NodeId>) -> Self {
        let mask = NodeSet::new(nodes.clone()).mask(g.node_count());
        let bbox = g.has_coords().then(|| {
            let d = g.dim();
            let mut lo = vec![f64::INFINITY; d];
            let mut hi = vec![f64::NEG_INFINITY; d];
            for &v in &nodes {
                for (k, x) in g.coords(v).unwrap().iter().enumerate() {
                    lo[k] = lo[k].min(*x);
                    hi[k] = hi[k].max(*x);
                }
            }
            (lo, hi)
        });
        Region { nodes, mask, bbox, g }
    }

    /// Random node: a uniform point of the bounding box snapped to the
    /// nearest region node, or a uniform node without coordinates. Drawing
    /// box fractions keeps samples comparable across refinements.
    fn random_node(&self, rng: &mut ChaCha8Rng) -> NodeId {
        match &self.bbox {
            Some((lo, hi)) => {
                let p: Vec<f64> = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| a + rng.random::<f64>() * (b - a))
                    .collect();
                let dist2 = |v: NodeId| {
                    self.g
                        .coords(v)
                        .unwrap()
                        .iter()
                        .zip(&p)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                };
                *self
                    .nodes
                    .iter()
                    .min_by(|&&a, &&b| dist2(a).total_cmp(&dist2(b)).then(a.cmp(&b)))
                    .unwrap()
            }
            None => self.nodes[rng.random_range(0..self.nodes.len())],
        }
    }

    fn geodesic(&self, a: NodeId, b: NodeId) -> Option<NodeSet> {
        let tree = ShortestPathTree::search(
            self.g,
            &[a],
            |e| self.g.edge(e).length,
            SearchLimits {
                allowed: Some(&self.mask),
                target: Some(b),
                ..Default::default()
            },
        );
        tree.dist[b].is_finite().then(|| NodeSet::new(tree.path_to(b).1))
    }

    /// Disjoint geodesic segments with relative separation at most `t`.
    fn sample_pair(&self, t: f64, rng: &mut ChaCha8Rng) -> Option<(NodeSet, NodeSet, f64)> {
        let (a, b, c, d) = (
            self.random_node(rng),
            self.random_node(rng),
            self.random_node(rng),
            self.random_node(rng),
        );
        let e = self.geodesic(a, b)?;
        let f = self.geodesic(c, d)?;
        if e.len() < 2 || f.len() < 2 || !e.is_disjoint(&f) {
            return None;
        }
        let sep = relative_separation(self.g, &e, &f).ok()?;
        (sep <= t).then_some((e, f, sep))
    }
}

struct Drawn {
    t_index: usize,
    pair: usize,
    e: NodeSet,
    f: NodeSet,
    separation: f64,
}

fn check_t_values(t_values: &[f64]) -> Result<()> {
    if t_values.is_empty() {
        return Err(Error::arg("t_values must be nonempty"));
    }
    if t_values.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::arg("t values must be positive"));
    }
    if t_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::arg("t values must be strictly increasing"));
    }
    Ok(())
}

/// Draws pairs for every `t` from per-`t` seeded streams. Returns the pairs
/// and the attempts spent per `t`.
fn draw_pairs(region: &Region, t_values: &[f64], opts: &SamplerOptions) -> (Vec<Drawn>, Vec<usize>) {
    let mut drawn = Vec::new();
    let mut attempts = Vec::with_capacity(t_values.len());
    let budget = opts.pairs_per_t * opts.attempts_per_pair;
    for (ti, &t) in t_values.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(ti as u64);
        let mut found = 0;
        let mut tries = 0;
        while found < opts.pairs_per_t && tries < budget {
            tries += 1;
            if let Some((e, f, separation)) = region.sample_pair(t, &mut rng) {
                drawn.push(Drawn {
                    t_index: ti,
                    pair: found,
                    e,
                    f,
                    separation,
                });
                found += 1;
            }
        }
        attempts.push(tries);
    }
    (drawn, attempts)
}

fn profile(t_values: &[f64], samples: &[PairSample], attempts: &[usize]) -> Vec<ProfilePoint> {
    let raw: Vec<Option<f64>> = t_values
        .iter()
        .map(|&t| {
            samples
                .iter()
                .filter(|s| s.t == t)
                .map(|s| s.modulus)
                .reduce(f64::min)
        })
        .collect();
    let env = running_min(&raw);
    t_values
        .iter()
        .zip(raw.iter().zip(env))
        .zip(attempts)
        .map(|((&t, (&raw, envelope)), &attempts)| ProfilePoint {
            t,
            raw,
            envelope,
            pairs: samples.iter().filter(|s| s.t == t).count(),
            attempts,
            flagged: raw.is_none(),
        })
        .collect()
}

pub fn loewner_profile(
    g: &MetricGraph,
    q: f64,
    t_values: &[f64],
    sampler: &SamplerOptions,
    solver: &ExperimentSolver,
) -> Result<LoewnerEstimate> {
    check_t_values(t_values)?;
    if sampler.pairs_per_t == 0 {
        return Err(Error::arg("pairs_per_t must be positive"));
    }
    if !g.is_connected_set(&NodeSet::full(g.node_count())) {
        return Err(Error::DisconnectedDomain("graph is not connected".into()));
    }
    let region = Region::new(g, (0..g.node_count()).collect());
    let (drawn, attempts) = draw_pairs(&region, t_values, sampler);
    let samples = drawn
        .par_iter()
        .map(|d| {
            let res = solver.solve(g, &CurveFamilySpec::new(d.e.clone(), d.f.clone()), q)?;
            Ok(PairSample {
                t: t_values[d.t_index],
                pair: d.pair,
                e_size: d.e.len(),
                f_size: d.f.len(),
                separation: d.separation,
                modulus: res.value,
                gap: res.gap,
                status: res.status,
                unconstrained: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LoewnerEstimate {
        q,
        profile: profile(t_values, &samples, &attempts),
        samples,
        sampler: sampler.clone(),
    })
}

/// Probes the volume bound `μ(B(x0, s)) ≤ C₀ s^Q` for `r/2 ≤ s ≤ r` and the lower
/// modulus bound `ψ(t)` for continua in `B(x0, λr)` with curves confined to
/// `B(x0, r)`.
#[allow(clippy::too_many_arguments)]
pub fn bounded_geometry_probe(
    g: &MetricGraph,
    x0: NodeId,
    r: f64,
    lambda: f64,
    q: f64,
    t_values: &[f64],
    sampler: &SamplerOptions,
    solver: &ExperimentSolver,
) -> Result<BoundedGeometryParams> {
    g.check_node(x0)?;
    check_t_values(t_values)?;
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::arg(format!("lambda must lie in (0, 1], got {lambda}")));
    }
    let r_min = 0.5 * r;
    if !(r_min >= 2.0 * g.max_edge_length()) {
        return Err(Error::ScaleTooFine(format!(
            "radius {r} is below four times the largest edge length"
        )));
    }
    const N_RADII: usize = 8;
    let c0_samples = (0..=N_RADII)
        .map(|k| {
            let s = r_min + (r - r_min) * k as f64 / N_RADII as f64;
            Ok((s, g.ball_measure(x0, s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let c0 = c0_samples
        .iter()
        .map(|(s, m)| m / s.powf(q))
        .fold(0.0, f64::max);

    let ball = g.metric_ball(x0, r)?;
    let inner = g.metric_ball(x0, lambda * r)?;
    if inner.len() < 4 {
        return Err(Error::ScaleTooFine(format!(
            "ball of radius {} holds too few nodes for two continua",
            lambda * r
        )));
    }
    let region = Region::new(g, inner.as_slice().to_vec());
    let (drawn, attempts) = draw_pairs(&region, t_values, sampler);
    let samples = drawn
        .par_iter()
        .map(|d| {
            let fam = CurveFamilySpec::new(d.e.clone(), d.f.clone());
            let confined = solver.solve(g, &fam.clone().within(ball.clone()), q)?;
            let free = solver.solve(g, &fam, q)?;
            Ok(PairSample {
                t: t_values[d.t_index],
                pair: d.pair,
                e_size: d.e.len(),
                f_size: d.f.len(),
                separation: d.separation,
                modulus: confined.value,
                gap: confined.gap,
                status: confined.status,
                unconstrained: Some(free.value),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let unconstrained_min = t_values
        .iter()
        .map(|&t| {
            samples
                .iter()
                .filter(|s| s.t == t)
                .filter_map(|s| s.unconstrained)
                .reduce(f64::min)
        })
        .collect();
    Ok(BoundedGeometryParams {
        c0,
        lambda,
        r,
        q,
        center: x0,
        c0_samples,
        psi_samples: profile(t_values, &samples, &attempts),
        unconstrained_min,
        samples,
        sampler: sampler.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{euclidean_grid, GridSpec};

    #[test]
    fn profile_is_positive_and_monotone() {
        let g = euclidean_grid(&GridSpec::new(2, 13, 1.0)).unwrap();
        let sampler = SamplerOptions {
            pairs_per_t: 3,
            ..Default::default()
        };
        let est = loewner_profile(&g, 2.0, &[0.5, 1.0, 2.0], &sampler, &ExperimentSolver::default()).unwrap();
        let phi = est.phi_hat();
        assert_eq!(phi.len(), 3);
        assert!(phi.iter().all(|(_, v)| *v > 0.0));
        assert!(phi.windows(2).all(|w| w[1].1 <= w[0].1));
        for s in &est.samples {
            assert!(s.separation <= s.t);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = euclidean_grid(&GridSpec::new(2, 9, 1.0)).unwrap();
        let sampler = SamplerOptions {
            pairs_per_t: 2,
            seed: 7,
            ..Default::default()
        };
        let s = ExperimentSolver::default();
        let a = loewner_profile(&g, 2.0, &[1.0, 3.0], &sampler, &s).unwrap();
        let b = loewner_profile(&g, 2.0, &[1.0, 3.0], &sampler, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_t_values() {
        let g = euclidean_grid(&GridSpec::new(2, 5, 1.0)).unwrap();
        let s = ExperimentSolver::default();
        let o = SamplerOptions::default();
        assert!(loewner_profile(&g, 2.0, &[2.0, 1.0], &o, &s).is_err());
        assert!(loewner_profile(&g, 2.0, &[0.0, 1.0], &o, &s).is_err());
        assert!(loewner_profile(&g, 2.0, &[], &o, &s).is_err());
    }

    #[test]
    fn probe_volume_constant_near_four() {
        let g = euclidean_grid(&GridSpec::new(2, 41, 1.0)).unwrap();
        let sampler = SamplerOptions {
            pairs_per_t: 2,
            ..Default::default()
        };
        let p = bounded_geometry_probe(&g, g.central_node(), 12.0, 0.5, 2.0, &[1.0, 4.0], &sampler, &ExperimentSolver::default())
            .unwrap();
        assert!(p.c0 > 3.5 && p.c0 < 4.5, "{}", p.c0);
        for (psi, free) in p.psi_samples.iter().zip(&p.unconstrained_min) {
            if let (Some(a), Some(b)) = (psi.raw, free) {
                assert!(a > 0.0);
                assert!(a <= *b + 1e-3 * b.max(1.0));
            }
        }
    }
}
