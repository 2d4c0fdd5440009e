//! Small text grammars used by the command line: generator specs, node
//! selectors, and vertex-map specs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::generators::{euclidean_grid, heisenberg_grid_with_budget, GridSpec, RadialProfile, VertexMap};
use crate::graph::{MetricGraph, NodeId, NodeSet};

fn bad(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

/// Parses a real, accepting simple fractions such as `1/3`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad(format!("invalid number '{s}'")))?;
            let b: f64 = b.trim().parse().map_err(|_| bad(format!("invalid number '{s}'")))?;
            a / b
        }
        None => s.parse().map_err(|_| bad(format!("invalid number '{s}'")))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(format!("number '{s}' is not finite")))
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_real)
        .collect()
}

pub fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(bad(format!("invalid boolean '{other}'"))),
    }
}

/// `name key=value ...` split into the name and its parameters.
fn keyed(spec: &str) -> Result<(String, BTreeMap<String, String>)> {
    let mut toks = spec.split_whitespace();
    let name = toks.next().ok_or_else(|| bad("empty spec"))?.to_string();
    let mut params = BTreeMap::new();
    for t in toks {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value in '{spec}', got '{t}'")))?;
        if params.insert(k.to_string(), v.to_string()).is_some() {
            return Err(bad(format!("duplicate key '{k}' in '{spec}'")));
        }
    }
    Ok((name, params))
}

struct Params {
    spec: String,
    map: BTreeMap<String, String>,
}

impl Params {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn real(&mut self, key: &str, default: f64) -> Result<f64> {
        self.take(key).map_or(Ok(default), |v| parse_real(&v))
    }

    fn usize(&mut self, key: &str, default: Option<usize>) -> Result<usize> {
        match (self.take(key), default) {
            (Some(v), _) => v.parse().map_err(|_| bad(format!("invalid integer '{v}' for {key}"))),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(bad(format!("'{}' requires {key}=", self.spec))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(bad(format!("unknown key '{k}' in '{}'", self.spec))),
            None => Ok(()),
        }
    }
}

fn params(spec: &str) -> Result<(String, Params)> {
    let (name, map) = keyed(spec)?;
    Ok((
        name,
        Params {
            spec: spec.to_string(),
            map,
        },
    ))
}

/// Builds a graph from `grid dim=D side=N [spacing=h] [periodic=bool]
/// [budget=B]`, `path n=N [spacing=h]`, or `heisenberg side=N [spacing=h]
/// [budget=B]`.
pub fn build_generator(spec: &str) -> Result<MetricGraph> {
    let (name, mut p) = params(spec)?;
    let g = match name.as_str() {
        "grid" => {
            let dim = p.usize("dim", Some(2))?;
            let side = p.usize("side", None)?;
            let mut gs = GridSpec::new(dim, side, p.real("spacing", 1.0)?);
            if let Some(v) = p.take("periodic") {
                if parse_bool(&v)? {
                    gs = gs.periodic();
                }
            }
            if let Some(b) = p.take("budget") {
                gs.node_budget = b.parse().map_err(|_| bad(format!("invalid budget '{b}'")))?;
            }
            p.finish()?;
            euclidean_grid(&gs)?
        }
        "path" => {
            let n = p.usize("n", None)?;
            let gs = GridSpec::new(1, n, p.real("spacing", 1.0)?);
            p.finish()?;
            euclidean_grid(&gs)?
        }
        "heisenberg" => {
            let side = p.usize("side", None)?;
            let spacing = p.real("spacing", 1.0)?;
            let budget = p.usize("budget", Some(crate::generators::DEFAULT_NODE_BUDGET))?;
            p.finish()?;
            heisenberg_grid_with_budget(side, spacing, budget)?
        }
        other => return Err(bad(format!("unknown generator '{other}'"))),
    };
    Ok(g)
}

/// Point sets: `cantor depth=D [ratio=r]` or `equispaced n=N [lo=a] [hi=b]`.
pub fn build_points(spec: &str) -> Result<Vec<Vec<f64>>> {
    let (name, mut p) = params(spec)?;
    let xs = match name.as_str() {
        "cantor" => {
            let depth = p.usize("depth", None)?;
            let ratio = p.real("ratio", 1.0 / 3.0)?;
            p.finish()?;
            crate::generators::cantor_points(depth as u32, ratio)?
        }
        "equispaced" => {
            let n = p.usize("n", None)?;
            let lo = p.real("lo", 0.0)?;
            let hi = p.real("hi", 1.0)?;
            p.finish()?;
            if n < 2 || !(hi > lo) {
                return Err(bad("equispaced needs n >= 2 and hi > lo"));
            }
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        }
        other => return Err(bad(format!("unknown point generator '{other}'"))),
    };
    Ok(xs.into_iter().map(|x| vec![x]).collect())
}

/// Node reference: an index, `mid` for the central node, or `@x:y:...` for
/// the node nearest to a point.
pub fn parse_node(g: &MetricGraph, s: &str) -> Result<NodeId> {
    let s = s.trim();
    if s == "mid" {
        return Ok(g.central_node());
    }
    if let Some(pt) = s.strip_prefix('@') {
        let p = pt.split(':').map(parse_real).collect::<Result<Vec<_>>>()?;
        if p.len() != g.dim() {
            return Err(bad(format!("point '{s}' has the wrong dimension")));
        }
        return g
            .nearest_node(&p)
            .ok_or_else(|| bad("graph has no coordinates for '@' references"));
    }
    let v: NodeId = s.parse().map_err(|_| bad(format!("invalid node reference '{s}'")))?;
    if v >= g.node_count() {
        return Err(bad(format!("node {v} out of range")));
    }
    Ok(v)
}

/// Node selectors:
///
/// ```text
/// all
/// nodes <ref>,<ref>,...
/// ball <ref> <r>          open ball
/// cball <ref> <r>         closed ball
/// side <axis> min|max     nodes on a coordinate face
/// complement <selector>
/// ```
pub fn parse_selector(g: &MetricGraph, s: &str) -> Result<NodeSet> {
    let s = s.trim();
    let (head, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
    let rest = rest.trim();
    let args: Vec<&str> = rest.split_whitespace().collect();
    match head {
        "all" if rest.is_empty() => Ok(NodeSet::full(g.node_count())),
        "nodes" => rest
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| parse_node(g, t))
            .collect::<Result<Vec<_>>>()
            .map(NodeSet::new),
        "ball" | "cball" if args.len() == 2 => {
            let x = parse_node(g, args[0])?;
            let r = parse_real(args[1])?;
            if head == "ball" {
                g.metric_ball(x, r)
            } else {
                g.closed_ball(x, r)
            }
        }
        "side" if args.len() == 2 => {
            let axis: usize = args[0].parse().map_err(|_| bad(format!("invalid axis '{}'", args[0])))?;
            if !g.has_coords() || axis >= g.dim() {
                return Err(bad(format!("axis {axis} unavailable")));
            }
            let vals: Vec<f64> = (0..g.node_count()).map(|v| g.coords(v).unwrap()[axis]).collect();
            let target = match args[1] {
                "min" => vals.iter().copied().fold(f64::INFINITY, f64::min),
                "max" => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                other => return Err(bad(format!("side must be min or max, got '{other}'"))),
            };
            let span = vals.iter().copied().fold(0.0, |m: f64, x| m.max(x.abs())).max(1.0);
            Ok((0..g.node_count())
                .filter(|&v| (vals[v] - target).abs() <= 1e-9 * span)
                .collect())
        }
        "complement" if !rest.is_empty() => {
            Ok(NodeSet::full(g.node_count()).difference(&parse_selector(g, rest)?))
        }
        _ => Err(bad(format!("invalid node selector '{s}'"))),
    }
}

/// Vertex maps: `none`, `identity`, `linear a,b,...`,
/// `collar inner=a outer=b [center=<ref>]`,
/// `power alpha=a [scale=s] [center=<ref>]`. Radial maps default to the
/// coordinates of `default_center`.
pub fn parse_map(g: &MetricGraph, s: &str, default_center: NodeId) -> Result<Option<VertexMap>> {
    let s = s.trim();
    if s == "none" {
        return Ok(None);
    }
    if s == "identity" {
        return Ok(Some(VertexMap::Identity));
    }
    if let Some(rest) = s.strip_prefix("linear ") {
        return Ok(Some(VertexMap::Linear { diag: parse_list(rest)? }));
    }
    let (name, mut p) = params(s)?;
    let center_node = match p.take("center") {
        Some(c) => parse_node(g, &c)?,
        None => default_center,
    };
    let center = g
        .coords(center_node)
        .ok_or_else(|| bad("radial maps need node coordinates"))?
        .to_vec();
    let profile = match name.as_str() {
        "collar" => RadialProfile::Collar {
            inner: p.real("inner", f64::NAN)?,
            outer: p.real("outer", f64::NAN)?,
        },
        "power" => RadialProfile::Power {
            alpha: p.real("alpha", f64::NAN)?,
            scale: p.real("scale", 1.0)?,
        },
        other => return Err(bad(format!("unknown map '{other}'"))),
    };
    p.finish()?;
    Ok(Some(VertexMap::Radial { center, profile }))
}
