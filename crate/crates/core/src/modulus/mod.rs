//! Discrete p-modulus of curve families.
//!
//! `Mod_p Γ = inf Σ σ(e) ρ(e)^p` over densities `ρ ≥ 0` whose ρ-length
//! `Σ_{e∈γ} ρ(e) ℓ(e)` is at least one on every curve `γ` of the family.
//! Families are all simple edge paths from `E` to `F` running inside `U`;
//! since `ρ ≥ 0`, revisiting nodes never shortens a curve, so nothing is
//! lost by the restriction.
//!
//! [`compute_modulus`] runs constraint generation: it solves the program
//! restricted to an active set of paths, asks a shortest-path oracle for the
//! most violated family curve, and stops once the rescaled iterate and the
//! restricted dual agree.

mod inner;
mod oracle;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, MetricGraph, NodeId, NodeSet};

pub use inner::{dual_lower_bound, inner_minimize};
pub use oracle::{admissibility_violation, shortest_family_curve};

use inner::PathSystem;
use oracle::{tree_path, FamilyMasks};

/// Curves joining `e` to `f` inside `domain` (the whole graph when `None`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveFamilySpec {
    pub e: NodeSet,
    pub f: NodeSet,
    pub domain: Option<NodeSet>,
}

impl CurveFamilySpec {
    pub fn new(e: NodeSet, f: NodeSet) -> Self {
        CurveFamilySpec { e, f, domain: None }
    }

    pub fn within(mut self, domain: NodeSet) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn validate(&self, g: &MetricGraph) -> Result<()> {
        let n = g.node_count();
        if self.e.is_empty() || self.f.is_empty() {
            return Err(Error::arg("E and F must be nonempty"));
        }
        self.e.validate(n)?;
        self.f.validate(n)?;
        if !self.e.is_disjoint(&self.f) {
            return Err(Error::arg("E and F must be disjoint"));
        }
        if let Some(u) = &self.domain {
            u.validate(n)?;
            if !self.e.is_subset(u) || !self.f.is_subset(u) {
                return Err(Error::arg("E and F must lie inside the domain U"));
            }
        }
        Ok(())
    }
}

/// Edge density `ρ ≥ 0`, indexed by edge id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Density(Vec<f64>);

impl Density {
    pub fn new(values: Vec<f64>) -> Self {
        Density(values)
    }

    pub fn zeros(m: usize) -> Self {
        Density(vec![0.0; m])
    }

    pub fn constant(m: usize, value: f64) -> Self {
        Density(vec![value; m])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn validate(&self, g: &MetricGraph) -> Result<()> {
        if self.0.len() != g.edge_count() {
            return Err(Error::arg(format!(
                "density has {} entries for {} edges",
                self.0.len(),
                g.edge_count()
            )));
        }
        if let Some(r) = self.0.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::arg(format!("density values must be finite and nonnegative, got {r}")));
        }
        Ok(())
    }

    /// `Σ σ(e) ρ(e)^p`.
    pub fn energy(&self, g: &MetricGraph, p: f64) -> f64 {
        g.edges()
            .iter()
            .zip(&self.0)
            .filter(|(_, r)| **r > 0.0)
            .map(|(e, r)| e.sigma * r.powf(p))
            .sum()
    }

    /// ρ-length of an edge path.
    pub fn length_of(&self, g: &MetricGraph, path: &[EdgeId]) -> f64 {
        path.iter().map(|&e| self.0[e] * g.edge(e).length).sum()
    }

    pub fn scaled(&self, c: f64) -> Density {
        Density(self.0.iter().map(|r| r * c).collect())
    }
}

/// A curve as its edges and the nodes it visits, starting in `E`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgePath {
    pub edges: Vec<EdgeId>,
    pub nodes: Vec<NodeId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    IterationLimit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ActivePath {
    pub path: EdgePath,
    /// ρ-length under the returned density.
    pub rho_length: f64,
    pub multiplier: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulusResult {
    /// `Σ σ ρ^p` at the returned density.
    pub value: f64,
    pub rho: Density,
    /// Paths carrying positive multipliers at termination.
    pub active_paths: Vec<ActivePath>,
    pub dual_bound: f64,
    pub gap: f64,
    /// Outer constraint-generation rounds.
    pub iterations: usize,
    pub p: f64,
    pub status: SolveStatus,
    /// Set when no family curve exists; the value is then 0.
    pub vacuous: bool,
    /// Smallest family ρ-length of the returned density, from the oracle.
    pub min_rho_length: f64,
    /// Number of constraints generated.
    pub paths_generated: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Most violated curves added per round, taken from one shortest-path
    /// tree toward distinct targets.
    pub paths_per_round: usize,
    /// Restricted-problem gap target as a fraction of `tol`.
    pub inner_fraction: f64,
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-4,
            max_iter: 10_000,
            paths_per_round: 1,
            inner_fraction: 0.25,
            max_sweeps: inner::DEFAULT_MAX_SWEEPS,
        }
    }
}

impl SolverOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        SolverOptions {
            tol,
            max_iter,
            ..Default::default()
        }
    }
}

pub fn compute_modulus(
    g: &MetricGraph,
    fam: &CurveFamilySpec,
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ModulusResult> {
    compute_modulus_with(g, fam, p, &SolverOptions::new(tol, max_iter))
}

pub fn compute_modulus_with(
    g: &MetricGraph,
    fam: &CurveFamilySpec,
    p: f64,
    opts: &SolverOptions,
) -> Result<ModulusResult> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::arg(format!("p must be a finite real above 1, got {p}")));
    }
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return Err(Error::arg(format!("tol must lie in (0, 1), got {}", opts.tol)));
    }
    if opts.paths_per_round == 0 {
        return Err(Error::arg("paths_per_round must be at least 1"));
    }
    let masks = FamilyMasks::new(g, fam)?;
    let tol = opts.tol;
    let m = g.edge_count();

    let zero = vec![0.0; m];
    let tree = masks.tree(g, &zero);
    let ranked = masks.ranked_targets(&tree);
    if ranked.is_empty() {
        return Ok(ModulusResult {
            value: 0.0,
            rho: Density::zeros(m),
            active_paths: Vec::new(),
            dual_bound: 0.0,
            gap: 0.0,
            iterations: 0,
            p,
            status: SolveStatus::Converged,
            vacuous: true,
            min_rho_length: f64::INFINITY,
            paths_generated: 0,
        });
    }

    let mut sys = PathSystem::new(g, p);
    let mut seen: HashSet<Vec<EdgeId>> = HashSet::new();
    let add_threshold = 1.0 - tol / (4.0 * p);
    let push = |sys: &mut PathSystem, seen: &mut HashSet<Vec<EdgeId>>, path: Vec<EdgeId>| -> bool {
        if seen.insert(path.clone()) {
            sys.add_path(path);
            true
        } else {
            false
        }
    };
    for &v in ranked.iter().take(opts.paths_per_round) {
        push(&mut sys, &mut seen, tree_path(&tree, v).edges);
    }

    let eps_in = opts.inner_fraction * tol;
    // Early restricted problems only need to be as accurate as the current
    // outer gap; the certificate does not depend on inner accuracy.
    let mut eps_cur = eps_in.max(0.01);
    let mut iterations = 0;
    let mut best: Option<(f64, f64, f64, Vec<f64>)> = None;
    let mut status = SolveStatus::IterationLimit;
    while iterations < opts.max_iter {
        iterations += 1;
        let (stats, inner_ok, _) = sys.solve(eps_cur, opts.max_sweeps);
        let tight = eps_cur <= eps_in;
        let tree = masks.tree(g, sys.rho());
        let ranked = masks.ranked_targets(&tree);
        let min_len = tree.dist[ranked[0]];
        let upper = if min_len > 0.0 {
            stats.energy / min_len.powf(p)
        } else {
            f64::INFINITY
        };
        let dual = stats.dual;
        if upper.is_finite() && best.as_ref().is_none_or(|b| upper - dual < b.0 - b.1) {
            best = Some((upper, dual, min_len, sys.rho().to_vec()));
        }
        if inner_ok && min_len >= 1.0 - tol && upper - dual <= tol * upper.max(1.0) {
            status = SolveStatus::Converged;
            break;
        }
        if upper.is_finite() {
            eps_cur = eps_in.max(0.1 * (upper - dual) / upper.max(1.0)).min(eps_cur);
        }

        let mut added = 0;
        for &v in &ranked {
            if added >= opts.paths_per_round || tree.dist[v] >= add_threshold {
                break;
            }
            if push(&mut sys, &mut seen, tree_path(&tree, v).edges) {
                added += 1;
            }
        }
        if added == 0 && !tight {
            eps_cur = eps_in;
            continue;
        }
        if added == 0 && inner_ok {
            // No new constraint and the restricted problem is solved: the
            // remaining gap is pure rescaling slack, which the tolerance
            // already absorbs.
            status = SolveStatus::Converged;
            break;
        }
    }

    let (_, dual, min_len, raw) = match best {
        Some(b) => b,
        None => {
            let stats = sys.stats();
            (f64::INFINITY, stats.dual, 0.0, sys.rho().to_vec())
        }
    };
    let scale = if min_len > 0.0 { 1.0 / min_len } else { 1.0 };
    let rho = Density::new(raw.iter().map(|r| r * scale).collect());
    let value = rho.energy(g, p);
    let dual_bound = dual.min(value).max(0.0);
    let min_rho_length = if min_len > 0.0 { 1.0 } else { 0.0 };

    let lambdas = sys.lambdas();
    let active_paths = sys
        .paths()
        .iter()
        .zip(lambdas)
        .filter(|(_, &l)| l > 0.0)
        .map(|(edges, &l)| ActivePath {
            rho_length: rho.length_of(g, edges),
            path: EdgePath {
                nodes: path_nodes(g, edges, &masks.sources),
                edges: edges.clone(),
            },
            multiplier: l,
        })
        .collect();

    Ok(ModulusResult {
        value,
        rho,
        active_paths,
        dual_bound,
        gap: value - dual_bound,
        iterations,
        p,
        status,
        vacuous: false,
        min_rho_length,
        paths_generated: sys.len(),
    })
}

/// Recovers the node sequence of an edge path that starts in `sources`.
fn path_nodes(g: &MetricGraph, edges: &[EdgeId], sources: &[NodeId]) -> Vec<NodeId> {
    let Some(&first) = edges.first() else {
        return Vec::new();
    };
    let e0 = g.edge(first);
    let mut cur = if sources.binary_search(&e0.a).is_ok() {
        e0.a
    } else {
        e0.b
    };
    let mut nodes = vec![cur];
    for &e in edges {
        cur = g.edge(e).other(cur);
        nodes.push(cur);
    }
    nodes
}
