//! The `modlab` command line.
//!
//! Every subcommand reads flat `key value` parameters from flags and an
//! optional `--config` file (either `key = value` lines or the JSON summary
//! of an earlier run), fills defaults, and echoes the resolved parameters
//! into its JSON summary. Re-running with `--config <summary.json>`
//! reproduces the run.

mod commands;
pub mod grammar;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, Command};
use serde_json::{json, Value};

use crate::error::Error;

/// Version of the JSON summary and CSV layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Config(m) => ("config", m),
            CliError::Io(m) => ("io", m),
        };
        json!({"error": kind, "code": self.code(), "message": msg}).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn io_err(path: &str, e: std::io::Error) -> CliError {
    CliError::Io(format!("{path}: {e}"))
}

/// One parameter of a subcommand.
struct Param {
    key: &'static str,
    default: Option<&'static str>,
    help: &'static str,
    /// Output locations are not part of the echoed configuration.
    output: bool,
}

const fn p(key: &'static str, default: Option<&'static str>, help: &'static str) -> Param {
    Param {
        key,
        default,
        help,
        output: false,
    }
}

const fn out(key: &'static str, help: &'static str) -> Param {
    Param {
        key,
        default: None,
        help,
        output: true,
    }
}

const COMMANDS: &[(&str, &str)] = &[
    ("gen", "Build or load a graph, summarize it, optionally fit Ahlfors regularity"),
    ("modulus", "Compute the p-modulus of the curve family joining E to F inside U"),
    ("ring", "Ring moduli around a center and their logarithmic decay fit"),
    ("loewner", "Sampled Loewner profile, or a bounded-geometry probe with --probe_r"),
    ("qc", "Modulus distortion and metric dilatation of a vertex map"),
    ("puncture", "Modulus chain around a puncture, optionally through a vertex map"),
    ("poincare", "Poincare constant of a ball"),
    ("porosity", "Spherical porosity scan of a point set"),
];

fn graph_params() -> Vec<Param> {
    vec![
        p("graph", None, "graph file"),
        p("gen", None, "generator spec, e.g. 'grid dim=2 side=33'"),
    ]
}

fn solver_params(tol: &'static str) -> Vec<Param> {
    vec![
        p("tol", Some(tol), "solver tolerance"),
        p("max_iter", Some("200000"), "constraint-generation round cap"),
    ]
}

fn params_for(cmd: &str) -> Vec<Param> {
    let mut v = Vec::new();
    match cmd {
        "gen" => {
            v.extend(graph_params());
            v.push(p("fit", Some("false"), "run an Ahlfors fit"));
            v.push(p("fit_rmin", None, "smallest fit radius (default: twice the longest edge)"));
            v.push(p("fit_rmax", None, "largest fit radius (default: a quarter of the diameter)"));
            v.push(p("fit_radii", Some("8"), "number of fit radii"));
            v.push(p("fit_samples", Some("nodes mid"), "ball centers for the fit"));
            v.push(out("write", "write the graph to this file"));
        }
        "modulus" => {
            v.extend(graph_params());
            v.push(p("E", None, "node selector for E"));
            v.push(p("F", None, "node selector for F"));
            v.push(p("U", Some("all"), "node selector for the domain"));
            v.push(p("p", Some("2"), "exponent p > 1"));
            v.extend(solver_params("1e-4"));
            v.push(p("paths_per_round", Some("1"), "curves added per round"));
            v.push(out("density", "dump the density as 'edge a b rho' lines"));
        }
        "ring" => {
            v.extend(graph_params());
            v.push(p("center", Some("mid"), "ring center"));
            v.push(p("R", None, "outer radius"));
            v.push(p("r", None, "inner radii, comma separated"));
            v.push(p("Q", Some("2"), "exponent"));
            v.extend(solver_params("1e-3"));
        }
        "loewner" => {
            v.extend(graph_params());
            v.push(p("Q", Some("2"), "exponent"));
            v.push(p("t", Some("0.5,1,2,4"), "relative separations"));
            v.push(p("pairs", Some("8"), "continuum pairs per t"));
            v.push(p("attempts", Some("200"), "sampling attempts per pair"));
            v.push(p("seed", Some("0"), "random seed"));
            v.push(p("probe_center", Some("mid"), "bounded-geometry ball center"));
            v.push(p("probe_r", None, "bounded-geometry ball radius; enables the probe"));
            v.push(p("lambda", Some("0.5"), "continua lie in the ball of radius lambda * probe_r"));
            v.extend(solver_params("1e-3"));
        }
        "qc" => {
            v.extend(graph_params());
            v.push(p("map", None, "vertex map, e.g. 'linear 1,2'"));
            v.push(p("measure", Some("jacobian"), "image measure: jacobian, length_power, preserve"));
            v.push(p(
                "families",
                Some("side 0 min|side 0 max;side 1 min|side 1 max"),
                "families 'E|F[|U]' separated by ';'",
            ));
            v.push(p("Q", Some("2"), "exponent"));
            v.push(p("center", Some("mid"), "dilatation center"));
            v.push(p("dilatation_r", Some("1,2"), "dilatation radii"));
            v.push(p("outer_factor", Some("4"), "outer cutoff multiple of r"));
            v.extend(solver_params("1e-3"));
        }
        "puncture" => {
            v.extend(graph_params());
            v.push(p("center", Some("mid"), "puncture"));
            v.push(p("r0", None, "outer radius"));
            v.push(p("radii", None, "strictly decreasing inner radii"));
            v.push(p("Q", Some("2"), "exponent"));
            v.push(p("map", Some("none"), "vertex map, e.g. 'collar inner=8 outer=32'"));
            v.push(p("measure", Some("jacobian"), "image measure"));
            v.push(p("threshold_factor", Some("3"), "point-like threshold in median image edge lengths"));
            v.extend(solver_params("1e-3"));
        }
        "poincare" => {
            v.extend(graph_params());
            v.push(p("center", Some("mid"), "ball center"));
            v.push(p("r", None, "ball radius"));
            v.push(p("p", Some("2"), "exponent p >= 1"));
            v.push(p("tau", Some("2"), "ball inflation"));
            v.push(p("strategy", Some("exact"), "exact or sampled"));
            v.push(p("n", Some("64"), "sampled fields"));
            v.push(p("smoothing", Some("3"), "smoothing steps for sampled fields"));
            v.push(p("seed", Some("0"), "random seed"));
            v.push(out("witness", "dump the witness as 'node id u' lines"));
        }
        "porosity" => {
            v.push(p("points", None, "point file ('point x ...' lines)"));
            v.push(p("point_gen", None, "point generator, e.g. 'cantor depth=8'"));
            v.push(p("t", Some("1.2,1.4,2"), "t grid"));
            v.push(p("r0", Some("0.5"), "first scale"));
            v.push(p("factor", Some("0.9"), "scale ratio"));
            v.push(p("count", Some("60"), "number of scales"));
            v.push(p("m", Some("4"), "required passing scales per point"));
        }
        _ => unreachable!("unknown command {cmd}"),
    }
    v.push(out("out", "JSON summary path (default: stdout)"));
    v.push(out("csv", "CSV samples path"));
    v
}

fn build_cli() -> Command {
    let mut app = Command::new("modlab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Discrete p-modulus laboratory")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about) in COMMANDS {
        let mut sub = Command::new(*name).about(*about);
        for prm in params_for(name) {
            let mut arg = Arg::new(prm.key)
                .long(prm.key)
                .num_args(1)
                .allow_hyphen_values(true)
                .help(prm.help);
            if let Some(d) = prm.default {
                arg = arg.default_value(d);
            }
            sub = sub.arg(arg);
        }
        sub = sub
            .arg(
                Arg::new("config")
                    .long("config")
                    .num_args(1)
                    .help("parameter file: 'key = value' lines or an earlier JSON summary"),
            )
            .arg(
                Arg::new("threads")
                    .long("threads")
                    .num_args(1)
                    .value_parser(clap::value_parser!(usize))
                    .help("worker threads (default: MODLAB_THREADS or all cores)"),
            )
            .arg(Arg::new("quiet").long("quiet").action(ArgAction::SetTrue).help("do not print the summary"));
        app = app.subcommand(sub);
    }
    app
}

/// Parameters after merging defaults, config file, and flags.
pub struct Resolved {
    pub command: String,
    values: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl Resolved {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|s| !s.is_empty())
    }

    pub fn output(&self, key: &str) -> Option<&str> {
        self.outputs.get(key).map(String::as_str).filter(|s| !s.is_empty())
    }

    pub fn req(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Config(format!("missing required parameter '{key}'")))
    }

    pub fn real(&self, key: &str) -> Result<f64, CliError> {
        Ok(grammar::parse_real(self.req(key)?).map_err(|e| CliError::Config(format!("{key}: {e}")))?)
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let l = grammar::parse_list(self.req(key)?).map_err(|e| CliError::Config(format!("{key}: {e}")))?;
        if l.is_empty() {
            return Err(CliError::Config(format!("{key}: empty list")));
        }
        Ok(l)
    }

    pub fn int<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let s = self.req(key)?;
        s.trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{key}: invalid integer '{s}'")))
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        grammar::parse_bool(self.req(key)?).map_err(|e| CliError::Config(format!("{key}: {e}")))
    }

    fn echo(&self) -> Value {
        Value::Object(
            self.values
                .iter()
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect(),
        )
    }
}

/// Reads a parameter file: a JSON object (optionally the summary of an
/// earlier run, whose `config` member is used) or `key = value` lines.
fn read_config(path: &str) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    if text.trim_start().starts_with('{') {
        let v: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{path}: invalid JSON: {e}")))?;
        let obj = v.get("config").unwrap_or(&v);
        let obj = obj
            .as_object()
            .ok_or_else(|| CliError::Config(format!("{path}: expected a JSON object")))?;
        return obj
            .iter()
            .map(|(k, v)| {
                let s = match v {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => n.to_string(),
                    Value::Bool(b) => b.to_string(),
                    _ => return Err(CliError::Config(format!("{path}: value of '{k}' must be a scalar"))),
                };
                Ok((k.clone(), s))
            })
            .collect();
    }
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{path}:{}: expected 'key = value'", i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn resolve(command: &str, m: &clap::ArgMatches) -> Result<Resolved, CliError> {
    let params = params_for(command);
    let file = match m.get_one::<String>("config") {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    for k in file.keys() {
        if !params.iter().any(|p| p.key == k) {
            return Err(CliError::Config(format!("unknown parameter '{k}' in config for '{command}'")));
        }
    }
    let mut values = BTreeMap::new();
    let mut outputs = BTreeMap::new();
    for prm in &params {
        let from_flag = m.value_source(prm.key) == Some(ValueSource::CommandLine);
        let v = if from_flag {
            m.get_one::<String>(prm.key).cloned()
        } else {
            file.get(prm.key)
                .cloned()
                .or_else(|| m.get_one::<String>(prm.key).cloned())
        };
        if let Some(v) = v {
            if prm.output {
                outputs.insert(prm.key.to_string(), v);
            } else {
                values.insert(prm.key.to_string(), v);
            }
        }
    }
    Ok(Resolved {
        command: command.to_string(),
        values,
        outputs,
    })
}

fn configure_threads(m: &clap::ArgMatches) -> Result<(), CliError> {
    let n = match m.get_one::<usize>("threads") {
        Some(&n) => Some(n),
        None => match std::env::var("MODLAB_THREADS") {
            Ok(s) if !s.trim().is_empty() => Some(
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("MODLAB_THREADS: invalid integer '{s}'")))?,
            ),
            _ => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Config("thread count must be positive".into()));
        }
        // A pool may already exist when called repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn write_file(path: &str, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = Path::new(path).parent() {
        if !dir.as_os_str().is_empty() && !dir.exists() {
            return Err(CliError::Io(format!("{path}: directory does not exist")));
        }
    }
    std::fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn execute(command: &str, m: &clap::ArgMatches) -> Result<(), CliError> {
    configure_threads(m)?;
    let res = resolve(command, m)?;
    let outcome = commands::run(&res)?;

    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "timestamp": timestamp,
        "config": res.echo(),
        "result": outcome.result,
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');

    if let Some(path) = res.output("csv") {
        match &outcome.csv {
            Some(table) => write_file(path, &table.to_bytes()?)?,
            None => return Err(CliError::Config(format!("'{command}' produces no CSV"))),
        }
    }
    for (key, body) in &outcome.dumps {
        if let Some(path) = res.output(key) {
            write_file(path, body.as_bytes())?;
        }
    }
    match res.output("out") {
        Some(path) => write_file(path, text.as_bytes())?,
        None if !m.get_flag("quiet") => print!("{text}"),
        None => {}
    }
    Ok(())
}

/// CSV rows with a leading `schema_version` column.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let werr = |e: csv::Error| CliError::Io(e.to_string());
        let mut head = vec!["schema_version"];
        head.extend(&self.header);
        w.write_record(&head).map_err(werr)?;
        let version = SCHEMA_VERSION.to_string();
        for row in &self.rows {
            w.write_record(std::iter::once(&version).chain(row)).map_err(werr)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// What a subcommand produced.
pub struct Outcome {
    pub result: Value,
    pub csv: Option<Table>,
    /// Text bodies keyed by the output parameter naming their path.
    pub dumps: Vec<(&'static str, String)>,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match build_cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                let _ = e.print();
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ")
                .to_string();
            eprintln!("{}", CliError::Config(first).line());
            return EXIT_CONFIG;
        }
    };
    let (command, sub) = matches.subcommand().expect("subcommand is required");
    match execute(command, sub) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.line());
            e.code()
        }
    }
}
