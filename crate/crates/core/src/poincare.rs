//! Upper gradients and Poincaré constants on graph balls.
//!
//! Node measures follow the half-incident convention of
//! [`MetricGraph::node_measure`]; gradient averages over `τB` use the edges
//! with both endpoints in `τB`, weighted by `σ`. Balls are closed.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, NodeId, NodeSet};

/// Relative slack of the per-edge upper-gradient test, absorbing rounding
/// in `|Δu| / ℓ · ℓ`.
const GRADIENT_SLACK: f64 = 1e-12;

fn check_field(g: &MetricGraph, u: &[f64]) -> Result<()> {
    if u.len() != g.node_count() {
        return Err(Error::arg(format!("field has {} values for {} nodes", u.len(), g.node_count())));
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::arg("field values must be finite"));
    }
    Ok(())
}

fn check_gradient(g: &MetricGraph, grad: &[f64]) -> Result<()> {
    if grad.len() != g.edge_count() {
        return Err(Error::arg(format!("gradient has {} values for {} edges", grad.len(), g.edge_count())));
    }
    if grad.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
        return Err(Error::arg("gradient values must be finite and nonnegative"));
    }
    Ok(())
}

/// `g(e) = |u(a) - u(b)| / ℓ(e)`: the smallest edge-constant upper gradient.
pub fn minimal_upper_gradient(g: &MetricGraph, u: &[f64]) -> Result<Vec<f64>> {
    check_field(g, u)?;
    Ok(g.edges()
        .iter()
        .map(|e| (u[e.a] - u[e.b]).abs() / e.length)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperGradientCheck {
    pub ok: bool,
    /// Node sequence of a path on which the inequality fails.
    pub witness: Option<Vec<NodeId>>,
}

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + GRADIENT_SLACK * lhs.abs().max(rhs.abs()).max(1.0)
}

/// Checks `|u(start) - u(end)| ≤ Σ g ℓ` on every edge, which covers every
/// path by telescoping, and again on `n_paths` random walks.
pub fn verify_upper_gradient(
    g: &MetricGraph,
    u: &[f64],
    grad: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<UpperGradientCheck> {
    check_field(g, u)?;
    check_gradient(g, grad)?;
    for (i, e) in g.edges().iter().enumerate() {
        if !holds((u[e.a] - u[e.b]).abs(), grad[i] * e.length) {
            return Ok(UpperGradientCheck {
                ok: false,
                witness: Some(vec![e.a, e.b]),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_paths {
        let start = rng.random_range(0..g.node_count());
        let steps = rng.random_range(1..=32);
        let mut nodes = vec![start];
        let mut cur = start;
        let mut integral = 0.0;
        for _ in 0..steps {
            let nb = g.neighbors(cur);
            if nb.is_empty() {
                break;
            }
            let (w, e) = nb[rng.random_range(0..nb.len())];
            integral += grad[e] * g.edge(e).length;
            cur = w;
            nodes.push(w);
        }
        if !holds((u[start] - u[cur]).abs(), integral) {
            return Ok(UpperGradientCheck {
                ok: false,
                witness: Some(nodes),
            });
        }
    }
    Ok(UpperGradientCheck { ok: true, witness: None })
}

/// Ball and inflated ball with their measures, validated.
struct Balls {
    ball: NodeSet,
    big: NodeSet,
    big_edges: Vec<usize>,
}

impl Balls {
    fn new(g: &MetricGraph, center: NodeId, r: f64, tau: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::arg(format!("ball radius must be positive, got {r}")));
        }
        if !(tau >= 1.0) {
            return Err(Error::arg(format!("tau must be at least 1, got {tau}")));
        }
        let ball = g.closed_ball(center, r)?;
        let big = g.closed_ball(center, tau * r)?;
        let mask = big.mask(g.node_count());
        let big_edges: Vec<usize> = (0..g.edge_count())
            .filter(|&i| mask[g.edge(i).a] && mask[g.edge(i).b])
            .collect();
        if big_edges.is_empty() {
            return Err(Error::ScaleTooFine(format!("inflated ball of radius {} holds no edge", tau * r)));
        }
        Ok(Balls { ball, big, big_edges })
    }

    fn mean_deviation(&self, g: &MetricGraph, u: &[f64]) -> f64 {
        let mass: f64 = self.ball.iter().map(|v| g.node_measure(v)).sum();
        let mean = self.ball.iter().map(|v| g.node_measure(v) * u[v]).sum::<f64>() / mass;
        self.ball
            .iter()
            .map(|v| g.node_measure(v) * (u[v] - mean).abs())
            .sum::<f64>()
            / mass
    }

    fn gradient_mean(&self, g: &MetricGraph, grad: &[f64], p: f64) -> f64 {
        let mass: f64 = self.big_edges.iter().map(|&e| g.edge(e).sigma).sum();
        let s: f64 = self
            .big_edges
            .iter()
            .map(|&e| g.edge(e).sigma * grad[e].powf(p))
            .sum();
        (s / mass).powf(1.0 / p)
    }
}

/// Smallest `C` with `⨍_B |u - u_B| ≤ C r (⨍_{τB} g^p)^{1/p}` for this
/// `(u, g)`, where `B` is the closed ball of radius `r` at `center`.
/// Returns `+∞` when the gradient vanishes on `τB` while `u` oscillates on
/// `B`, which signals inconsistent inputs.
pub fn poincare_ratio(
    g: &MetricGraph,
    center: NodeId,
    r: f64,
    u: &[f64],
    grad: &[f64],
    p: f64,
    tau: f64,
) -> Result<f64> {
    check_field(g, u)?;
    check_gradient(g, grad)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::arg(format!("p must be a finite real of at least 1, got {p}")));
    }
    let balls = Balls::new(g, center, r, tau)?;
    Ok(ratio_in(g, &balls, r, u, grad, p))
}

fn ratio_in(g: &MetricGraph, balls: &Balls, r: f64, u: &[f64], grad: &[f64], p: f64) -> f64 {
    let lhs = balls.mean_deviation(g, u);
    let rhs = balls.gradient_mean(g, grad, p);
    if rhs > 0.0 {
        lhs / (r * rhs)
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoincareStrategy {
    /// Extremal value of the mean-square deviation against the Dirichlet
    /// energy; `p = 2` only.
    ExactQuadratic,
    /// Maximum over `n` smoothed random fields.
    Sampled { n: usize, seed: u64, smoothing: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoincareMethod {
    ExactQuadratic,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub c_hat: f64,
    pub tau: f64,
    pub p: f64,
    pub center: NodeId,
    pub r: f64,
    pub method: PoincareMethod,
    /// True for sampled estimates, which bound the best constant from below.
    pub lower_bound: bool,
    /// Field attaining `c_hat`.
    pub witness: Vec<f64>,
    /// `poincare_ratio` of the witness with its minimal gradient.
    pub witness_ratio: f64,
    pub fields: usize,
}

pub fn poincare_constant(
    g: &MetricGraph,
    center: NodeId,
    r: f64,
    p: f64,
    tau: f64,
    strategy: &PoincareStrategy,
) -> Result<PoincareReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::arg(format!("p must be a finite real of at least 1, got {p}")));
    }
    let balls = Balls::new(g, center, r, tau)?;
    let (c_hat, witness, method, fields) = match *strategy {
        PoincareStrategy::ExactQuadratic => {
            if p != 2.0 {
                return Err(Error::arg("the exact quadratic strategy requires p = 2"));
            }
            let (c, w) = exact_quadratic(g, &balls, r)?;
            (c, w, PoincareMethod::ExactQuadratic, 0)
        }
        PoincareStrategy::Sampled { n, seed, smoothing } => {
            if n == 0 {
                return Err(Error::arg("sampled strategy needs at least one field"));
            }
            let (c, w) = sampled(g, &balls, r, p, n, seed, smoothing);
            (c, w, PoincareMethod::Sampled, n)
        }
    };
    let grad = minimal_upper_gradient(g, &witness)?;
    Ok(PoincareReport {
        c_hat,
        tau,
        p,
        center,
        r,
        method,
        lower_bound: method == PoincareMethod::Sampled,
        witness_ratio: ratio_in(g, &balls, r, &witness, &grad, p),
        witness,
        fields,
    })
}

/// `sqrt(λ_max) / r` for the pencil (mean-square deviation on `B`,
/// averaged Dirichlet energy on `τB`). By Jensen the mean absolute
/// deviation never exceeds the root-mean-square one, so this bounds the
/// `p = 2` ratio of every field from above; the two agree when `|u - u_B|`
/// is constant on `B`.
fn exact_quadratic(g: &MetricGraph, balls: &Balls, r: f64) -> Result<(f64, Vec<f64>)> {
    let nodes = balls.big.as_slice();
    let k = nodes.len();
    let mut local = vec![usize::MAX; g.node_count()];
    for (i, &v) in nodes.iter().enumerate() {
        local[v] = i;
    }

    // Dirichlet form on τB, normalized by its edge mass.
    let emass: f64 = balls.big_edges.iter().map(|&e| g.edge(e).sigma).sum();
    let mut dmat = DMatrix::<f64>::zeros(k, k);
    for &e in &balls.big_edges {
        let ed = g.edge(e);
        let w = ed.sigma / (ed.length * ed.length) / emass;
        let (a, b) = (local[ed.a], local[ed.b]);
        dmat[(a, a)] += w;
        dmat[(b, b)] += w;
        dmat[(a, b)] -= w;
        dmat[(b, a)] -= w;
    }
    let induced_connected = g.component_size(nodes[0], &balls.big.mask(g.node_count())) == k;
    if !induced_connected {
        return Err(Error::DisconnectedDomain("inflated ball is not connected".into()));
    }

    // Mean-square deviation on B: diag(m)/M - m mᵀ/M².
    let bmass: f64 = balls.ball.iter().map(|v| g.node_measure(v)).sum();
    let mvec: Vec<(usize, f64)> = balls
        .ball
        .iter()
        .map(|v| (local[v], g.node_measure(v) / bmass))
        .collect();
    let mut nmat = DMatrix::<f64>::zeros(k, k);
    for &(i, wi) in &mvec {
        nmat[(i, i)] += wi;
        for &(j, wj) in &mvec {
            nmat[(i, j)] -= wi * wj;
        }
    }

    // Both forms ignore constants, so lifting the constant direction in the
    // Dirichlet form makes it definite without changing the maximum.
    let lift = dmat.diagonal().max() / k as f64;
    dmat.add_scalar_mut(lift);
    let chol = dmat
        .cholesky()
        .ok_or_else(|| Error::arg("Dirichlet form is not positive definite"))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::arg("singular Cholesky factor"))?;
    let mut sym = &linv * &nmat * linv.transpose();
    sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let (imax, lmax) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let y = eig.eigenvectors.column(imax);
    let x = linv.transpose() * y;

    let mut witness = vec![0.0; g.node_count()];
    let mean: f64 = mvec.iter().map(|&(i, w)| w * x[i]).sum();
    let scale = x.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    for (i, &v) in nodes.iter().enumerate() {
        witness[v] = if scale > 0.0 { (x[i] - mean) / scale } else { 0.0 };
    }
    Ok((lmax.max(0.0).sqrt() / r, witness))
}

fn sampled(
    g: &MetricGraph,
    balls: &Balls,
    r: f64,
    p: f64,
    n: usize,
    seed: u64,
    smoothing: usize,
) -> (f64, Vec<f64>) {
    let mask = balls.big.mask(g.node_count());
    let results: Vec<(f64, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut u = vec![0.0f64; g.node_count()];
            for v in balls.big.iter() {
                u[v] = rng.sample(StandardNormal);
            }
            for _ in 0..smoothing {
                let prev = u.clone();
                for v in balls.big.iter() {
                    let (mut s, mut c) = (prev[v], 1.0);
                    for &(w, _) in g.neighbors(v) {
                        if mask[w] {
                            s += prev[w];
                            c += 1.0;
                        }
                    }
                    u[v] = s / c;
                }
            }
            let grad: Vec<f64> = g
                .edges()
                .iter()
                .map(|e| (u[e.a] - u[e.b]).abs() / e.length)
                .collect();
            (ratio_in(g, balls, r, &u, &grad, p), u)
        })
        .collect();
    results
        .into_iter()
        .fold((f64::NEG_INFINITY, Vec::new()), |best, cur| if cur.0 > best.0 { cur } else { best })
}
