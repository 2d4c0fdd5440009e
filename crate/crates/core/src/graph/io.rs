//! Line-oriented text formats.
//!
//! Graph files:
//!
//! ```text
//! nodes N edges M dim D
//! node <id> <x_1> ... <x_D>      (N lines)
//! edge <a> <b> <length> <sigma>  (M lines)
//! ```
//!
//! Point files hold one `point <x_1> ... <x_d>` per line. Blank lines and
//! lines starting with `#` are ignored in both.

use std::fmt::Write as _;
use std::path::Path;

use super::{Edge, MetricGraph};
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

fn real(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let x: f64 = num(tok, line, what)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(parse_err(line, format!("non-finite {what}")))
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_graph(text: &str) -> Result<MetricGraph> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty graph file"))?;
    let mut h = header.split_whitespace();
    let mut expect = |kw: &str| -> Result<usize> {
        match h.next() {
            Some(t) if t == kw => num(h.next(), hline, kw),
            _ => Err(parse_err(hline, format!("header must read 'nodes N edges M dim D' (missing '{kw}')"))),
        }
    };
    let n = expect("nodes")?;
    let m = expect("edges")?;
    let dim = expect("dim")?;
    if h.next().is_some() {
        return Err(parse_err(hline, "trailing tokens in header"));
    }

    let mut coords = vec![0.0; n * dim];
    let mut seen = vec![false; n];
    let mut edges = Vec::with_capacity(m);
    let mut nodes_read = 0;
    for (ln, l) in lines {
        let mut tok = l.split_whitespace();
        match tok.next() {
            Some("node") => {
                let id: usize = num(tok.next(), ln, "node id")?;
                if id >= n {
                    return Err(parse_err(ln, format!("node id {id} out of range")));
                }
                if seen[id] {
                    return Err(parse_err(ln, format!("duplicate node {id}")));
                }
                seen[id] = true;
                for k in 0..dim {
                    coords[id * dim + k] = real(tok.next(), ln, "coordinate")?;
                }
                if tok.next().is_some() {
                    return Err(parse_err(ln, "too many coordinates"));
                }
                nodes_read += 1;
            }
            Some("edge") => {
                let a = num(tok.next(), ln, "edge endpoint")?;
                let b = num(tok.next(), ln, "edge endpoint")?;
                let length = real(tok.next(), ln, "length")?;
                let sigma = real(tok.next(), ln, "sigma")?;
                if length <= 0.0 {
                    return Err(parse_err(ln, format!("edge length must be positive, got {length}")));
                }
                if sigma <= 0.0 {
                    return Err(parse_err(ln, format!("edge sigma must be positive, got {sigma}")));
                }
                if tok.next().is_some() {
                    return Err(parse_err(ln, "trailing tokens after edge"));
                }
                edges.push(Edge::new(a, b, length, sigma));
            }
            Some(other) => return Err(parse_err(ln, format!("unknown record '{other}'"))),
            None => unreachable!(),
        }
    }
    if nodes_read != n {
        return Err(parse_err(0, format!("expected {n} node lines, found {nodes_read}")));
    }
    if edges.len() != m {
        return Err(parse_err(0, format!("expected {m} edge lines, found {}", edges.len())));
    }
    MetricGraph::new(n, dim, coords, edges)
}

/// Serializes with shortest round-trip decimal formatting, so
/// `parse_graph(&write_graph(g))` reproduces `g` exactly.
pub fn write_graph(g: &MetricGraph) -> String {
    let mut out = String::new();
    let dim = g.dim();
    writeln!(out, "nodes {} edges {} dim {}", g.node_count(), g.edge_count(), dim).unwrap();
    for v in 0..g.node_count() {
        out.push_str("node ");
        out.push_str(&v.to_string());
        if let Some(c) = g.coords(v) {
            for x in c {
                write!(out, " {x}").unwrap();
            }
        }
        out.push('\n');
    }
    for e in g.edges() {
        writeln!(out, "edge {} {} {} {}", e.a, e.b, e.length, e.sigma).unwrap();
    }
    out
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<MetricGraph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn write_graph_file(g: &MetricGraph, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_graph(g))?;
    Ok(())
}

pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for (ln, l) in content_lines(text) {
        let mut tok = l.split_whitespace();
        if tok.next() != Some("point") {
            return Err(parse_err(ln, "expected 'point <coords>'"));
        }
        let p = tok
            .map(|t| real(Some(t), ln, "coordinate"))
            .collect::<Result<Vec<f64>>>()?;
        if p.is_empty() {
            return Err(parse_err(ln, "point without coordinates"));
        }
        if let Some(first) = pts.first() {
            if first.len() != p.len() {
                return Err(parse_err(ln, "points must share one dimension"));
            }
        }
        pts.push(p);
    }
    Ok(pts)
}

pub fn write_points(points: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for p in points {
        out.push_str("point");
        for x in p {
            write!(out, " {x}").unwrap();
        }
        out.push('\n');
    }
    out
}
