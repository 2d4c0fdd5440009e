//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
//! below. Runs as a plain binary so the lines always reach the terminal;
//! pass criterion numbers as arguments to run a subset.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use common::{conductance, energy, min_family_length, random_connected_graph, random_disjoint_sets, simple_paths};
use modlab::generators::{
    cantor_points, euclidean_grid, heisenberg_grid, heisenberg_node, GridSpec, MeasureRule, RadialProfile, VertexMap,
};
use modlab::geometry::{
    loewner_profile, modulus_ratio, puncture_experiment, ring_modulus_curve, ExperimentSolver, PunctureOptions,
    SamplerOptions, Verdict,
};
use modlab::graph::{ahlfors_fit, Edge, MetricGraph, NodeSet};
use modlab::modulus::{compute_modulus, CurveFamilySpec, SolveStatus};
use modlab::poincare::{poincare_constant, PoincareStrategy};
use modlab::porosity::{porosity_scan, EuclideanPoints, ScaleSchedule};

// Tolerances and budgets.
const EXACT_EDGE_TOL: f64 = 1e-9;
const EXACT_TOL: f64 = 1e-6;
const BRUTE_TOL: f64 = 1e-6;
const BRUTE_INSTANCES: usize = 200;
const CERT_INSTANCES: usize = 500;
const CERT_SOLVER_TOL: f64 = 1e-4;
const MONO_PAIRS: usize = 200;
const MONO_TOL: f64 = 1e-6;
const RING_EXPONENT: (f64, f64) = (-1.0, 0.15);
const RING_CONTINUUM_REL: f64 = 0.20;
const QC_STRETCH_K: (f64, f64) = (1.7, 2.5);
const QC_IDENTITY_K: (f64, f64) = (1.0 - 1e-6, 1.0 + 1e-2);
const AHLFORS_1D: (f64, f64) = (1.0, 0.1);
const AHLFORS_2D: (f64, f64) = (2.0, 0.1);
const AHLFORS_HEIS: (f64, f64) = (4.0, 0.3);
const LOEWNER_T: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
const LOEWNER_REFINE_REL: f64 = 0.30;
const POINCARE_TWO_POINT_TOL: f64 = 1e-9;
const POINCARE_REFINE_REL: f64 = 0.10;
const POROSITY_T: [f64; 5] = [1.2, 1.4, 1.6, 1.8, 2.0];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(x: f64, (center, tol): (f64, f64)) -> bool {
    (x - center).abs() <= tol
}

fn grid(side: usize, spacing: f64) -> MetricGraph {
    euclidean_grid(&GridSpec::new(2, side, spacing)).unwrap()
}

fn side(g: &MetricGraph, axis: usize, max: bool) -> NodeSet {
    let target = if max {
        (0..g.node_count()).map(|v| g.coords(v).unwrap()[axis]).fold(f64::MIN, f64::max)
    } else {
        0.0
    };
    (0..g.node_count())
        .filter(|&v| (g.coords(v).unwrap()[axis] - target).abs() < 1e-9)
        .collect()
}

fn solve(g: &MetricGraph, fam: &CurveFamilySpec, p: f64, tol: f64) -> modlab::modulus::ModulusResult {
    compute_modulus(g, fam, p, tol, 1_000_000).unwrap()
}

/// Single unit edge, two-edge series, three parallel unit edges.
fn exact_small() -> Outcome {
    let one = MetricGraph::new(2, 0, vec![], vec![Edge::new(0, 1, 1.0, 1.0)]).unwrap();
    let series = MetricGraph::new(3, 0, vec![], vec![Edge::new(0, 1, 1.0, 1.0), Edge::new(1, 2, 1.0, 1.0)]).unwrap();
    let parallel = MetricGraph::new(2, 0, vec![], vec![Edge::new(0, 1, 1.0, 1.0); 3]).unwrap();
    let fam = |a, b| CurveFamilySpec::new(NodeSet::singleton(a), NodeSet::singleton(b));
    let m1 = solve(&one, &fam(0, 1), 2.0, 1e-12).value;
    let m2 = solve(&series, &fam(0, 2), 2.0, 1e-10).value;
    let m3 = solve(&parallel, &fam(0, 1), 2.0, 1e-10).value;
    check(
        (m1 - 1.0).abs() <= EXACT_EDGE_TOL && (m2 - 0.5).abs() <= EXACT_TOL && (m3 - 3.0).abs() <= EXACT_TOL,
        format!("edge {m1:.12} (1 ± {EXACT_EDGE_TOL:e}), series {m2:.9} (0.5 ± {EXACT_TOL:e}), parallel {m3:.9} (3 ± {EXACT_TOL:e})"),
    )
}

/// Random connected unit graphs on at most 8 nodes against the quadratic
/// program over all enumerated simple paths. Its optimum is the effective
/// conductance: the potential-drop density is admissible on every
/// enumerated path and its energy matches the Thomson lower bound.
fn brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut total_paths = 0;
    for _ in 0..BRUTE_INSTANCES {
        let n = rng.random_range(2..=8);
        let density = rng.random_range(0.1..0.7);
        let g = random_connected_graph(&mut rng, n, density, true);
        let (e, f) = random_disjoint_sets(&mut rng, n, 2);
        let paths = simple_paths(&g, &e, &f, 1_000_000).unwrap();
        total_paths += paths.len();
        let (oracle, rho_star) = conductance(&g, &e, &f);
        let admissible = paths
            .iter()
            .map(|p| p.iter().map(|&id| rho_star[id] * g.edge(id).length).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        if admissible < 1.0 - 1e-9 {
            return Err(format!("oracle density not admissible ({admissible}) on an enumerated path"));
        }
        let m = solve(&g, &CurveFamilySpec::new(e, f), 2.0, 1e-9);
        worst = worst.max((m.value - oracle).abs());
    }
    check(
        worst <= BRUTE_TOL,
        format!("{BRUTE_INSTANCES} graphs, {total_paths} enumerated paths, max |Δ| = {worst:.2e} (≤ {BRUTE_TOL:e})"),
    )
}

/// Duality gap and independently verified admissibility on random
/// instances with random lengths, measures, exponents and domains.
fn certificates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut converged, mut vacuous) = (0, 0);
    let mut failures = Vec::new();
    for i in 0..CERT_INSTANCES {
        let n = rng.random_range(3..=24);
        let density = rng.random_range(0.05..0.4);
        let g = random_connected_graph(&mut rng, n, density, false);
        let (e, f) = random_disjoint_sets(&mut rng, n, 3);
        let mut fam = CurveFamilySpec::new(e.clone(), f.clone());
        if rng.random_bool(0.3) {
            let keep: NodeSet = (0..n).filter(|&v| e.contains(v) || f.contains(v) || rng.random_bool(0.7)).collect();
            fam = fam.within(keep);
        }
        let p = rng.random_range(1.3..4.0);
        let m = solve(&g, &fam, p, CERT_SOLVER_TOL);
        if m.vacuous {
            vacuous += 1;
            continue;
        }
        if m.status != SolveStatus::Converged {
            continue;
        }
        converged += 1;
        let rho = m.rho.values();
        let len = min_family_length(&g, rho, &fam.e, &fam.f, fam.domain.as_ref());
        let en = energy(&g, rho, p);
        let gap_ok = m.value - m.dual_bound <= CERT_SOLVER_TOL * m.value.max(1.0);
        let adm_ok = len >= 1.0 - CERT_SOLVER_TOL;
        let en_ok = (en - m.value).abs() <= 1e-9 * en.max(1.0);
        if !(gap_ok && adm_ok && en_ok) {
            failures.push(format!("#{i}: gap {} len {len} energy {en} vs {}", m.value - m.dual_bound, m.value));
        }
    }
    check(
        failures.is_empty() && converged + vacuous == CERT_INSTANCES,
        format!(
            "{converged} converged + {vacuous} vacuous of {CERT_INSTANCES}; gap ≤ tol·max(value,1), oracle length ≥ 1 − tol (tol {CERT_SOLVER_TOL:e}){}",
            failures.first().map(|f| format!("; first failure {f}")).unwrap_or_default()
        ),
    )
}

/// Nested families (larger endpoint sets or domain) and subcurve overflow
/// (every left-right crossing contains a crossing of an inner strip).
fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..MONO_PAIRS {
        let side_len = rng.random_range(5..=9);
        let g = grid(side_len, 1.0);
        let col = |c: usize| -> NodeSet { (0..side_len).map(|r| r * side_len + c).collect() };
        let subset = |rng: &mut ChaCha8Rng, s: &NodeSet| -> NodeSet {
            let v: Vec<usize> = s.iter().filter(|_| rng.random_bool(0.6)).collect();
            if v.is_empty() {
                NodeSet::singleton(s.as_slice()[0])
            } else {
                NodeSet::new(v)
            }
        };
        let p = rng.random_range(2.0..3.0);
        let (small, large) = match k % 3 {
            0 => {
                let e = subset(&mut rng, &col(0));
                let f = subset(&mut rng, &col(side_len - 1));
                let e_big = e.union(&subset(&mut rng, &col(0)));
                (CurveFamilySpec::new(e, f.clone()), CurveFamilySpec::new(e_big, f))
            }
            1 => {
                let e = subset(&mut rng, &col(0));
                let f = subset(&mut rng, &col(side_len - 1));
                let blocked: NodeSet = (0..g.node_count()).filter(|_| rng.random_bool(0.15)).collect();
                let u = NodeSet::full(g.node_count()).difference(&blocked).union(&e).union(&f);
                (CurveFamilySpec::new(e.clone(), f.clone()).within(u), CurveFamilySpec::new(e, f))
            }
            _ => {
                let e = subset(&mut rng, &col(0));
                let f = subset(&mut rng, &col(side_len - 1));
                let a = rng.random_range(0..side_len - 1);
                let b = rng.random_range(a + 1..side_len);
                let strip: NodeSet = (a..=b).flat_map(|c| col(c).as_slice().to_vec()).collect();
                (
                    CurveFamilySpec::new(e, f),
                    CurveFamilySpec::new(col(a), col(b)).within(strip),
                )
            }
        };
        let lo = solve(&g, &small, p, 1e-8).value;
        let hi = solve(&g, &large, p, 1e-8).value;
        worst = worst.max(lo - hi);
    }
    check(
        worst <= MONO_TOL,
        format!("{MONO_PAIRS} pairs, max Mod(smaller) − Mod(larger) = {worst:.2e} (≤ {MONO_TOL:e})"),
    )
}

/// Ring decay on a 129² grid against `2π / log(R/r)`.
fn ring_decay() -> Outcome {
    let g = grid(129, 1.0);
    let fit = ring_modulus_curve(
        &g,
        g.central_node(),
        &[2.0, 3.0, 4.0, 6.0, 8.0, 12.0],
        48.0,
        2.0,
        &ExperimentSolver::default(),
    )
    .unwrap();
    let worst = fit
        .samples
        .iter()
        .map(|s| (s.modulus * s.log_ratio / (2.0 * PI) - 1.0).abs())
        .fold(0.0, f64::max);
    let converged = fit.samples.iter().all(|s| s.status == SolveStatus::Converged);
    check(
        within(fit.fitted_exponent, RING_EXPONENT) && worst <= RING_CONTINUUM_REL && converged,
        format!(
            "exponent {:.4} (−1 ± {}), max |Mod·log(R/r)/2π − 1| = {worst:.3} (≤ {RING_CONTINUUM_REL}), C₁ {:.3}",
            fit.fitted_exponent, RING_EXPONENT.1, fit.fitted_c1
        ),
    )
}

/// Puncture chain on a 129² grid with the identity and a collar blow-up.
fn puncture() -> Outcome {
    let g = grid(129, 1.0);
    let c = g.central_node();
    let radii = [8.0, 4.0, 2.0, 1.0];
    let s = ExperimentSolver::default();
    let ident = PunctureOptions {
        map: Some(VertexMap::Identity),
        ..Default::default()
    };
    let blow = PunctureOptions {
        map: Some(VertexMap::Radial {
            center: g.coords(c).unwrap().to_vec(),
            profile: RadialProfile::Collar {
                inner: 8.0,
                outer: 32.0,
            },
        }),
        ..Default::default()
    };
    let a = puncture_experiment(&g, c, 32.0, &radii, 2.0, &ident, &s).unwrap();
    let b = puncture_experiment(&g, c, 32.0, &radii, 2.0, &blow, &s).unwrap();
    let floor = b.mod_image_floor.unwrap();
    let mods: Vec<String> = a.mod_source().iter().map(|m| format!("{m:.3}")).collect();
    check(
        a.strictly_decreasing
            && a.within_bound
            && a.verdict == Verdict::PointLike
            && b.verdict == Verdict::ContinuumLike
            && floor > 0.5,
        format!(
            "Mod₂Γᵢ [{}] strictly decreasing {} within C₁ bound {}; identity {:?} (diam {:.2} vs {:.2}); collar {:?} (diam {:.2}), image floor {floor:.3}",
            mods.join(", "),
            a.strictly_decreasing,
            a.within_bound,
            a.verdict,
            a.samples.last().unwrap().cluster_diameter,
            a.threshold,
            b.verdict,
            b.samples.last().unwrap().cluster_diameter,
        ),
    )
}

/// Side-to-side families on a 33² grid under `diag(1, 2)` and the identity.
fn quasi_invariance() -> Outcome {
    use modlab::generators::{apply_vertex_map, MapOptions};
    let g = grid(33, 1.0);
    let fams = vec![
        CurveFamilySpec::new(side(&g, 0, false), side(&g, 0, true)),
        CurveFamilySpec::new(side(&g, 1, false), side(&g, 1, true)),
    ];
    let opts = MapOptions {
        measure: MeasureRule::Jacobian,
        require_bijective: true,
    };
    let s = ExperimentSolver {
        tol: 1e-6,
        ..Default::default()
    };
    let stretch = VertexMap::Linear { diag: vec![1.0, 2.0] };
    let k_stretch = modulus_ratio(&g, &apply_vertex_map(&g, &stretch, &opts).unwrap(), &stretch, &fams, 2.0, &s)
        .unwrap()
        .modulus_ratio_k;
    let id = VertexMap::Identity;
    let k_id = modulus_ratio(&g, &apply_vertex_map(&g, &id, &opts).unwrap(), &id, &fams, 2.0, &s)
        .unwrap()
        .modulus_ratio_k;
    check(
        k_stretch >= QC_STRETCH_K.0 && k_stretch <= QC_STRETCH_K.1 && k_id >= QC_IDENTITY_K.0 && k_id <= QC_IDENTITY_K.1,
        format!(
            "stretch K {k_stretch:.4} in [{}, {}] (continuum 2); identity K {k_id:.9} in [1 − 1e-6, 1 + 1e-2]",
            QC_STRETCH_K.0, QC_STRETCH_K.1
        ),
    )
}

/// Word-metric ball counts on the Heisenberg lattice by breadth-first
/// search over `(i, j, k)` triples, regressed on log-log scale.
fn heisenberg_count_exponent(radii: &[usize]) -> f64 {
    use std::collections::{HashMap, VecDeque};
    let r_max = *radii.iter().max().unwrap() as i64;
    let mut dist: HashMap<(i64, i64, i64), i64> = HashMap::new();
    let mut queue = VecDeque::from([(0i64, 0i64, 0i64)]);
    dist.insert((0, 0, 0), 0);
    while let Some((i, j, k)) = queue.pop_front() {
        let d = dist[&(i, j, k)];
        if d == r_max {
            continue;
        }
        for nb in [(i + 1, j, k), (i - 1, j, k), (i, j + 1, k - i), (i, j - 1, k + i)] {
            dist.entry(nb).or_insert_with(|| {
                queue.push_back(nb);
                d + 1
            });
        }
    }
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            let count = dist.values().filter(|&&d| d <= r as i64).count();
            ((r as f64).ln(), (count as f64).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}

fn ahlfors() -> Outcome {
    let path = euclidean_grid(&GridSpec::new(1, 401, 1.0)).unwrap();
    let q1 = ahlfors_fit(&path, &NodeSet::singleton(path.central_node()), 4.0, 64.0, 8).unwrap().q_hat;
    let g2 = grid(129, 1.0);
    let q2 = ahlfors_fit(&g2, &NodeSet::singleton(g2.central_node()), 4.0, 32.0, 8).unwrap().q_hat;
    let hs = 31;
    let h = heisenberg_grid(hs, 1.0).unwrap();
    let o = heisenberg_node(hs, 0, 0, 0).unwrap();
    let q4 = ahlfors_fit(&h, &NodeSet::singleton(o), 4.0, 10.0, 8).unwrap().q_hat;
    let lattice = heisenberg_count_exponent(&[4, 5, 6, 7, 8, 9, 10]);
    check(
        within(q1, AHLFORS_1D) && within(q2, AHLFORS_2D) && within(q4, AHLFORS_HEIS),
        format!(
            "path {q1:.4} (1 ± {}), grid {q2:.4} (2 ± {}), Heisenberg {q4:.4} (4 ± {}; lattice-count slope {lattice:.4})",
            AHLFORS_1D.1, AHLFORS_2D.1, AHLFORS_HEIS.1
        ),
    )
}

fn loewner() -> Outcome {
    let sampler = SamplerOptions {
        seed: 11,
        ..Default::default()
    };
    let s = ExperimentSolver::default();
    let profile = |g: &MetricGraph| loewner_profile(g, 2.0, &LOEWNER_T, &sampler, &s).unwrap().phi_hat();
    let coarse = profile(&grid(17, 1.0 / 16.0));
    let fine = profile(&grid(33, 1.0 / 32.0));
    let torus = profile(&euclidean_grid(&GridSpec::new(2, 33, 1.0 / 32.0).periodic()).unwrap());
    let complete = |p: &[(f64, f64)]| p.len() == LOEWNER_T.len();
    let positive = |p: &[(f64, f64)]| p.iter().all(|&(_, v)| v > 0.0);
    let monotone = |p: &[(f64, f64)]| p.windows(2).all(|w| w[1].1 <= w[0].1);
    let drift = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a.1 - b.1).abs() / b.1)
        .fold(0.0, f64::max);
    let fmt = |p: &[(f64, f64)]| p.iter().map(|(_, v)| format!("{v:.3}")).collect::<Vec<_>>().join(", ");
    check(
        [&coarse, &fine, &torus].iter().all(|p| complete(p) && positive(p) && monotone(p)) && drift <= LOEWNER_REFINE_REL,
        format!(
            "phi_hat grid 33² [{}], torus 33² [{}], 17² [{}]; refinement drift {drift:.3} (≤ {LOEWNER_REFINE_REL})",
            fmt(&fine),
            fmt(&torus),
            fmt(&coarse)
        ),
    )
}

fn poincare() -> Outcome {
    let two = MetricGraph::new(2, 1, vec![0.0, 1.0], vec![Edge::new(0, 1, 1.0, 1.0)]).unwrap();
    let c2 = poincare_constant(&two, 0, 1.0, 2.0, 1.0, &PoincareStrategy::ExactQuadratic).unwrap().c_hat;
    let exact = |side: usize, r: f64| {
        let g = grid(side, 1.0 / (side - 1) as f64);
        poincare_constant(&g, g.central_node(), r, 2.0, 2.0, &PoincareStrategy::ExactQuadratic)
            .unwrap()
            .c_hat
    };
    let (coarse, fine) = (exact(17, 0.25), exact(33, 0.25));
    let drift = (coarse - fine).abs() / fine;
    let mut sampled_ok = true;
    let mut worst_margin = f64::INFINITY;
    for (side_len, r) in [(9usize, 0.25), (17, 0.25), (17, 0.4), (33, 0.2)] {
        let g = grid(side_len, 1.0 / (side_len - 1) as f64);
        let x = g.central_node();
        let ex = poincare_constant(&g, x, r, 2.0, 2.0, &PoincareStrategy::ExactQuadratic).unwrap().c_hat;
        for seed in 0..3 {
            let sm = poincare_constant(
                &g,
                x,
                r,
                2.0,
                2.0,
                &PoincareStrategy::Sampled {
                    n: 32,
                    seed,
                    smoothing: 3,
                },
            )
            .unwrap()
            .c_hat;
            worst_margin = worst_margin.min(ex - sm);
            sampled_ok &= sm <= ex * (1.0 + 1e-12);
        }
    }
    check(
        (c2 - 0.5).abs() <= POINCARE_TWO_POINT_TOL && drift <= POINCARE_REFINE_REL && sampled_ok,
        format!(
            "two-point {c2:.12} (0.5 ± {POINCARE_TWO_POINT_TOL:e}); grid 17² {coarse:.4} vs 33² {fine:.4}, drift {drift:.3} (≤ {POINCARE_REFINE_REL}); min(exact − sampled) {worst_margin:.3e} over 12 runs"
        ),
    )
}

fn porosity() -> Outcome {
    let cantor = EuclideanPoints::from_reals(&cantor_points(8, 1.0 / 3.0).unwrap()).unwrap();
    let full = ScaleSchedule {
        r0: 0.5,
        factor: 0.9,
        count: 60,
    };
    let scan = porosity_scan(&cantor, &POROSITY_T, full, 4).unwrap();
    let xs: Vec<f64> = (0..1024).map(|i| i as f64 / 1023.0).collect();
    let equi = EuclideanPoints::from_reals(&xs).unwrap();
    // Coarse scales stop near eight point spacings.
    let coarse = ScaleSchedule { count: 40, ..full };
    let eq = porosity_scan(&equi, &POROSITY_T, coarse, 4).unwrap();
    let eq_fail = eq.reports.iter().all(|r| !r.verdict);
    let eq_any_pass = eq
        .reports
        .iter()
        .flat_map(|r| &r.per_point)
        .map(|p| p.scales_passed.len())
        .max()
        .unwrap();
    check(
        scan.smallest_passing_t.is_some_and(|t| t <= 2.0) && eq_fail,
        format!(
            "Cantor depth 8 smallest passing t {:?} (m = 4); 1024 equispaced fail for all t ≤ 2, most coarse scales passed by any point {eq_any_pass}",
            scan.smallest_passing_t
        ),
    )
}

fn strip_timestamp(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

/// Runs each command from flags, again from flags, and from the echoed
/// config of the first run; outputs must agree byte for byte apart from
/// the timestamp.
fn reproducibility() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_modlab");
    let dir = tempfile::tempdir().unwrap();
    let runs: &[(&str, &[&str])] = &[
        ("modulus", &["--gen", "grid dim=2 side=9", "--E", "side 0 min", "--F", "ball mid 1", "--p", "2.5"]),
        ("ring", &["--gen", "grid dim=2 side=33", "--R", "12", "--r", "1,2,3", "--tol", "1e-3"]),
        ("loewner", &["--gen", "grid dim=2 side=13", "--t", "1,2", "--pairs", "3", "--seed", "7"]),
        ("poincare", &["--gen", "grid dim=2 side=13", "--r", "3", "--strategy", "sampled", "--seed", "5"]),
        ("porosity", &["--point_gen", "cantor depth=6", "--t", "1.4,2"]),
        ("puncture", &["--gen", "grid dim=2 side=25", "--r0", "8", "--radii", "3,2,1", "--map", "collar inner=2 outer=8"]),
    ];
    let mut mismatches = Vec::new();
    for (cmd, args) in runs {
        let outputs: Vec<(Value, Vec<u8>)> = (0..3)
            .map(|k| {
                let json = dir.path().join(format!("{cmd}{k}.json"));
                let csv = dir.path().join(format!("{cmd}{k}.csv"));
                let mut c = Command::new(bin);
                c.arg(cmd);
                if k == 2 {
                    c.arg("--config").arg(dir.path().join(format!("{cmd}0.json")));
                } else {
                    c.args(*args);
                }
                let st = c.arg("--out").arg(&json).arg("--csv").arg(&csv).status().unwrap();
                assert!(st.success(), "{cmd} run {k} failed");
                (strip_timestamp(&json), std::fs::read(&csv).unwrap())
            })
            .collect();
        if outputs.iter().any(|o| o != &outputs[0]) {
            mismatches.push(*cmd);
        }
    }
    check(
        mismatches.is_empty(),
        format!("{} commands rerun from flags and from the echoed config; mismatches {mismatches:?}", runs.len()),
    )
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let minutes = |m: u64| Duration::from_secs(60 * m);
    let criteria = [
        Criterion { id: 1, name: "exact small-instance moduli", budget: Duration::from_secs(1), run: exact_small },
        Criterion { id: 2, name: "brute-force equivalence", budget: minutes(2), run: brute_force },
        Criterion { id: 3, name: "certificate soundness", budget: minutes(5), run: certificates },
        Criterion { id: 4, name: "monotonicity and overflow", budget: minutes(5), run: monotonicity },
        Criterion { id: 5, name: "ring decay exponent", budget: minutes(10), run: ring_decay },
        Criterion { id: 6, name: "puncture chain", budget: minutes(15), run: puncture },
        Criterion { id: 7, name: "quasi-invariance", budget: minutes(5), run: quasi_invariance },
        Criterion { id: 8, name: "Ahlfors fits", budget: minutes(5), run: ahlfors },
        Criterion { id: 9, name: "Loewner positivity", budget: minutes(10), run: loewner },
        Criterion { id: 10, name: "Poincare constants", budget: minutes(5), run: poincare },
        Criterion { id: 11, name: "porosity", budget: minutes(1), run: porosity },
        Criterion { id: 12, name: "reproducibility", budget: minutes(5), run: reproducibility },
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let start = Instant::now();
        let out = std::panic::catch_unwind(c.run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let (ok, detail) = match out {
            Ok(d) if took <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over budget")),
            Err(d) => (false, d),
        };
        failed += !ok as usize;
        println!(
            "criterion {:>2} {} {}: {detail} [{:.1}s, budget {}s]",
            c.id,
            if ok { "PASS" } else { "FAIL" },
            c.name,
            took.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
