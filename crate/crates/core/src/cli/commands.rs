use serde::Serialize;
use serde_json::{json, Value};

use super::grammar::{build_generator, build_points, parse_map, parse_node, parse_selector};
use super::{CliError, Outcome, Resolved, Table};
use crate::generators::{apply_vertex_map, MapOptions, MeasureRule};
use crate::geometry::{
    bounded_geometry_probe, loewner_profile, metric_dilatation_report, modulus_ratio, puncture_experiment,
    ring_modulus_curve, ExperimentSolver, PairSample, PunctureOptions, SamplerOptions,
};
use crate::graph::io::{parse_points, read_graph, write_graph};
use crate::graph::{ahlfors_fit, MetricGraph};
use crate::modulus::{compute_modulus_with, CurveFamilySpec, SolverOptions};
use crate::poincare::{poincare_constant, PoincareStrategy};
use crate::porosity::{porosity_scan, EuclideanPoints, ScaleSchedule};

type CmdResult = Result<Outcome, CliError>;

pub(super) fn run(res: &Resolved) -> CmdResult {
    match res.command.as_str() {
        "gen" => gen(res),
        "modulus" => modulus(res),
        "ring" => ring(res),
        "loewner" => loewner(res),
        "qc" => qc(res),
        "puncture" => puncture(res),
        "poincare" => poincare(res),
        "porosity" => porosity(res),
        other => Err(CliError::Config(format!("unknown command '{other}'"))),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn status<T: Serialize>(s: &T) -> String {
    to_value(s).as_str().unwrap_or_default().to_string()
}

fn load_graph(res: &Resolved) -> Result<MetricGraph, CliError> {
    match (res.get("graph"), res.get("gen")) {
        (Some(_), Some(_)) => Err(CliError::Config("give either 'graph' or 'gen', not both".into())),
        (Some(path), None) => read_graph(path).map_err(|e| match e {
            crate::Error::Io(io) => super::io_err(path, io),
            other => other.into(),
        }),
        (None, Some(spec)) => Ok(build_generator(spec)?),
        (None, None) => Err(CliError::Config("missing graph: set 'graph' or 'gen'".into())),
    }
}

fn solver(res: &Resolved) -> Result<ExperimentSolver, CliError> {
    let tol = res.real("tol")?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::Config(format!("tol must lie in (0, 1), got {tol}")));
    }
    Ok(ExperimentSolver {
        tol,
        max_iter: res.int("max_iter")?,
    })
}

fn measure(res: &Resolved) -> Result<MeasureRule, CliError> {
    match res.req("measure")? {
        "jacobian" => Ok(MeasureRule::Jacobian),
        "length_power" => Ok(MeasureRule::LengthPower),
        "preserve" => Ok(MeasureRule::Preserve),
        other => Err(CliError::Config(format!(
            "measure: expected jacobian, length_power or preserve, got '{other}'"
        ))),
    }
}

fn graph_summary(g: &MetricGraph) -> Value {
    json!({
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "dim": g.dim(),
        "total_measure": g.total_measure(),
        "min_edge_length": g.min_edge_length(),
        "max_edge_length": g.max_edge_length(),
        "diameter_estimate": g.diameter_estimate(),
    })
}

fn gen(res: &Resolved) -> CmdResult {
    let g = load_graph(res)?;
    let mut result = json!({ "graph": graph_summary(&g) });
    let mut csv = None;
    if res.flag("fit")? {
        let samples = parse_selector(&g, res.req("fit_samples")?)?;
        let r_min = match res.get("fit_rmin") {
            Some(_) => res.real("fit_rmin")?,
            None => 2.0 * g.max_edge_length(),
        };
        let r_max = match res.get("fit_rmax") {
            Some(_) => res.real("fit_rmax")?,
            None => 0.25 * g.diameter_estimate(),
        };
        let fit = ahlfors_fit(&g, &samples, r_min, r_max, res.int("fit_radii")?)?;
        let mut t = Table::new(vec!["r", "ball_measure"]);
        for &(r, m) in &fit.samples {
            t.push(vec![num(r), num(m)]);
        }
        csv = Some(t);
        result["ahlfors"] = to_value(&fit);
    }
    let dumps = match res.output("write") {
        Some(_) => vec![("write", write_graph(&g))],
        None => Vec::new(),
    };
    Ok(Outcome { result, csv, dumps })
}

fn modulus(res: &Resolved) -> CmdResult {
    let g = load_graph(res)?;
    let e = parse_selector(&g, res.req("E")?)?;
    let f = parse_selector(&g, res.req("F")?)?;
    let mut fam = CurveFamilySpec::new(e, f);
    if res.req("U")? != "all" {
        fam = fam.within(parse_selector(&g, res.req("U")?)?);
    }
    let p = res.real("p")?;
    let s = solver(res)?;
    let opts = SolverOptions {
        paths_per_round: res.int("paths_per_round")?,
        ..SolverOptions::new(s.tol, s.max_iter)
    };
    let m = compute_modulus_with(&g, &fam, p, &opts)?;

    let mut t = Table::new(vec!["path", "edges", "rho_length", "multiplier", "first_node", "last_node"]);
    for (i, a) in m.active_paths.iter().enumerate() {
        let nodes = &a.path.nodes;
        t.push(vec![
            i.to_string(),
            a.path.edges.len().to_string(),
            num(a.rho_length),
            num(a.multiplier),
            nodes.first().map(|v| v.to_string()).unwrap_or_default(),
            nodes.last().map(|v| v.to_string()).unwrap_or_default(),
        ]);
    }
    let mut density = String::new();
    for (edge, r) in g.edges().iter().zip(m.rho.values()) {
        density.push_str(&format!("edge {} {} {}\n", edge.a, edge.b, r));
    }
    let result = json!({
        "value": m.value,
        "dual_bound": m.dual_bound,
        "gap": m.gap,
        "iterations": m.iterations,
        "p": m.p,
        "status": m.status,
        "vacuous": m.vacuous,
        "min_rho_length": m.min_rho_length,
        "paths_generated": m.paths_generated,
        "active_paths": m.active_paths.len(),
        "e_size": fam.e.len(),
        "f_size": fam.f.len(),
        "graph": graph_summary(&g),
    });
    Ok(Outcome {
        result,
        csv: Some(t),
        dumps: vec![("density", density)],
    })
}

fn ring(res: &Resolved) -> CmdResult {
    let g = load_graph(res)?;
    let center = parse_node(&g, res.req("center")?)?;
    let q = res.real("Q")?;
    let fit = ring_modulus_curve(&g, center, &res.list("r")?, res.real("R")?, q, &solver(res)?)?;
    let mut t = Table::new(vec!["r", "log_ratio", "modulus", "gap", "status", "scaled"]);
    for s in &fit.samples {
        t.push(vec![
            num(s.r),
            num(s.log_ratio),
            num(s.modulus),
            num(s.gap),
            status(&s.status),
            num(s.modulus * s.log_ratio.powf(q - 1.0)),
        ]);
    }
    Ok(Outcome {
        result: to_value(&fit),
        csv: Some(t),
        dumps: Vec::new(),
    })
}

fn pair_table(samples: &[PairSample]) -> Table {
    let mut t = Table::new(vec![
        "t",
        "pair",
        "e_size",
        "f_size",
        "separation",
        "modulus",
        "gap",
        "status",
        "unconstrained",
    ]);
    for s in samples {
        t.push(vec![
            num(s.t),
            s.pair.to_string(),
            s.e_size.to_string(),
            s.f_size.to_string(),
            num(s.separation),
            num(s.modulus),
            num(s.gap),
            status(&s.status),
            opt(s.unconstrained),
        ]);
    }
    t
}

fn loewner(res: &Resolved) -> CmdResult {
    let g = load_graph(res)?;
    let q = res.real("Q")?;
    let ts = res.list("t")?;
    let sampler = SamplerOptions {
        pairs_per_t: res.int("pairs")?,
        attempts_per_pair: res.int("attempts")?,
        seed: res.int("seed")?,
    };
    let s = solver(res)?;
    if res.get("probe_r").is_some() {
        let center = parse_node(&g, res.req("probe_center")?)?;
        let probe = bounded_geometry_probe(
            &g,
            center,
            res.real("probe_r")?,
            res.real("lambda")?,
            q,
            &ts,
            &sampler,
            &s,
        )?;
        let t = pair_table(&probe.samples);
        let mut result = to_value(&probe);
        result["mode"] = json!("bounded_geometry");
        return Ok(Outcome {
            result,
            csv: Some(t),
            dumps: Vec::new(),
        });
    }
    let est = loewner_profile(&g, q, &ts, &sampler, &s)?;
    let t = pair_table(&est.samples);
    let mut result = to_value(&est);
    result["mode"] = json!("profile");
    result["phi_hat"] = to_value(&est.phi_hat());
    Ok(Outcome {
        result,
        csv: Some(t),
        dumps: Vec::new(),
    })
}

fn families(g: &MetricGraph, spec: &str) -> Result<Vec<CurveFamilySpec>, CliError> {
    spec.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|f| {
            let parts: Vec<&str> = f.split('|').collect();
            let fam = match parts.as_slice() {
                [e, f] => CurveFamilySpec::new(parse_selector(g, e)?, parse_selector(g, f)?),
                [e, f, u] => {
                    CurveFamilySpec::new(parse_selector(g, e)?, parse_selector(g, f)?).within(parse_selector(g, u)?)
                }
                _ => return Err(CliError::Config(format!("family '{f}': expected 'E|F' or 'E|F|U'"))),
            };
            Ok(fam)
        })
        .collect()
}

fn qc(res: &Resolved) -> CmdResult {
    let g = load_graph(res)?;
    let center = parse_node(&g, res.req("center")?)?;
    let map = parse_map(&g, res.req("map")?, center)?
        .ok_or_else(|| CliError::Config("qc needs a map other than 'none'".into()))?;
    let img = apply_vertex_map(
        &g,
        &map,
        &MapOptions {
            measure: measure(res)?,
            require_bijective: true,
        },
    )?;
    let fams = families(&g, res.req("families")?)?;
    if fams.is_empty() {
        return Err(CliError::Config("no families given".into()));
    }
    let mut report = modulus_ratio(&g, &img, &map, &fams, res.real("Q")?, &solver(res)?)?;
    let dil = metric_dilatation_report(
        &g,
        &img,
        &map,
        center,
        &res.list("dilatation_r")?,
        res.real("outer_factor")?,
    )?;
    report.dilatation_h = Some(dil.h);
    let mut t = Table::new(vec!["family", "mod_source", "mod_image", "ratio", "skipped"]);
    for f in &report.families {
        t.push(vec![
            f.family.to_string(),
            num(f.mod_source),
            num(f.mod_image),
            opt(f.ratio),
            f.skipped.clone().unwrap_or_default(),
        ]);
    }
    Ok(Outcome {
        result: json!({ "distortion": report, "dilatation": dil }),
        csv: Some(t),
        dumps: Vec::new(),
    })
}

fn puncture(res: &Resolved) -> CmdResult {
    let g = load_graph(res)?;
    let center = parse_node(&g, res.req("center")?)?;
    let opts = PunctureOptions {
        map: parse_map(&g, res.req("map")?, center)?,
        measure: measure(res)?,
        threshold_factor: res.real("threshold_factor")?,
    };
    let rep = puncture_experiment(
        &g,
        center,
        res.real("r0")?,
        &res.list("radii")?,
        res.real("Q")?,
        &opts,
        &solver(res)?,
    )?;
    let mut t = Table::new(vec![
        "r",
        "mod_source",
        "gap_source",
        "status_source",
        "bound",
        "mod_image",
        "cluster_diameter",
        "cluster_size",
    ]);
    for s in &rep.samples {
        t.push(vec![
            num(s.r),
            num(s.mod_source),
            num(s.gap_source),
            status(&s.status_source),
            num(s.bound),
            opt(s.mod_image),
            num(s.cluster_diameter),
            s.cluster_size.to_string(),
        ]);
    }
    Ok(Outcome {
        result: to_value(&rep),
        csv: Some(t),
        dumps: Vec::new(),
    })
}

fn poincare(res: &Resolved) -> CmdResult {
    let g = load_graph(res)?;
    let center = parse_node(&g, res.req("center")?)?;
    let strategy = match res.req("strategy")? {
        "exact" => PoincareStrategy::ExactQuadratic,
        "sampled" => PoincareStrategy::Sampled {
            n: res.int("n")?,
            seed: res.int("seed")?,
            smoothing: res.int("smoothing")?,
        },
        other => return Err(CliError::Config(format!("strategy: expected exact or sampled, got '{other}'"))),
    };
    let rep = poincare_constant(
        &g,
        center,
        res.real("r")?,
        res.real("p")?,
        res.real("tau")?,
        &strategy,
    )?;
    let witness: String = rep
        .witness
        .iter()
        .enumerate()
        .map(|(v, u)| format!("node {v} {u}\n"))
        .collect();
    let mut t = Table::new(vec!["node", "u"]);
    for (v, u) in rep.witness.iter().enumerate() {
        t.push(vec![v.to_string(), num(*u)]);
    }
    let mut result = to_value(&rep);
    if let Some(obj) = result.as_object_mut() {
        obj.remove("witness");
    }
    Ok(Outcome {
        result,
        csv: Some(t),
        dumps: vec![("witness", witness)],
    })
}

fn porosity(res: &Resolved) -> CmdResult {
    let pts = match (res.get("points"), res.get("point_gen")) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either 'points' or 'point_gen', not both".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| super::io_err(path, e))?;
            parse_points(&text)?
        }
        (None, Some(spec)) => build_points(spec)?,
        (None, None) => return Err(CliError::Config("missing points: set 'points' or 'point_gen'".into())),
    };
    let space = EuclideanPoints::new(pts)?;
    let schedule = ScaleSchedule {
        r0: res.real("r0")?,
        factor: res.real("factor")?,
        count: res.int("count")?,
    };
    let scan = porosity_scan(&space, &res.list("t")?, schedule, res.int("m")?)?;
    let mut t = Table::new(vec!["t", "point", "passed", "failed"]);
    for r in &scan.reports {
        for p in &r.per_point {
            t.push(vec![
                num(r.t),
                p.index.to_string(),
                p.scales_passed.len().to_string(),
                p.scales_failed.len().to_string(),
            ]);
        }
    }
    let reports: Vec<Value> = scan
        .reports
        .iter()
        .map(|r| json!({ "t": r.t, "m": r.m, "verdict": r.verdict, "min_passes": r.min_passes }))
        .collect();
    Ok(Outcome {
        result: json!({
            "points": space.0.len(),
            "schedule": scan.schedule,
            "reports": reports,
            "smallest_passing_t": scan.smallest_passing_t,
        }),
        csv: Some(t),
        dumps: Vec::new(),
    })
}
