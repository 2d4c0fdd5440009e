//! Constructors for the test spaces: Euclidean grids and tori, induced
//! subdomains, a first Heisenberg group lattice, Cantor sets, and image
//! graphs under vertex maps.

mod maps;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, MetricGraph, NodeId, NodeSet};

pub use maps::{apply_vertex_map, MapOptions, MeasureRule, RadialProfile, VertexMap};

pub const DEFAULT_NODE_BUDGET: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    /// Nodes per axis.
    pub side: usize,
    pub spacing: f64,
    /// Wrap each axis into a cycle.
    pub periodic: bool,
    pub node_budget: usize,
}

impl GridSpec {
    pub fn new(dim: usize, side: usize, spacing: f64) -> Self {
        GridSpec {
            dim,
            side,
            spacing,
            periodic: false,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn periodic(mut self) -> Self {
        self.periodic = true;
        self
    }

    /// Index of the node with integer coordinates `c` (first axis fastest).
    pub fn index(&self, c: &[usize]) -> NodeId {
        c.iter().rev().fold(0, |acc, &x| acc * self.side + x)
    }

    fn validate(&self) -> Result<usize> {
        if self.dim == 0 {
            return Err(Error::arg("grid dimension must be at least 1"));
        }
        if self.side < 2 {
            return Err(Error::arg("grid side must be at least 2"));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::arg(format!("grid spacing must be positive, got {}", self.spacing)));
        }
        let n = (0..self.dim).try_fold(1usize, |acc, _| acc.checked_mul(self.side));
        match n {
            Some(n) if n <= self.node_budget => Ok(n),
            _ => Err(Error::TooLarge {
                nodes: n.unwrap_or(usize::MAX),
                budget: self.node_budget,
            }),
        }
    }
}

/// Axis-aligned nearest-neighbor lattice with `ℓ = spacing` and
/// `σ = spacing^dim` on every edge.
pub fn euclidean_grid(spec: &GridSpec) -> Result<MetricGraph> {
    let n = spec.validate()?;
    let (dim, side, h) = (spec.dim, spec.side, spec.spacing);
    let sigma = h.powi(dim as i32);
    let mut coords = Vec::with_capacity(n * dim);
    let mut edges = Vec::with_capacity(n * dim);
    let mut c = vec![0usize; dim];
    for v in 0..n {
        let mut rest = v;
        for x in c.iter_mut() {
            *x = rest % side;
            rest /= side;
        }
        coords.extend(c.iter().map(|&x| x as f64 * h));
        let mut stride = 1;
        for &x in c.iter() {
            if x + 1 < side {
                edges.push(Edge::new(v, v + stride, h, sigma));
            } else if spec.periodic && side > 2 {
                edges.push(Edge::new(v - (side - 1) * stride, v, h, sigma));
            }
            stride *= side;
        }
    }
    MetricGraph::new(n, dim, coords, edges)
}

/// Induced subgraph together with the index maps in both directions.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub graph: MetricGraph,
    /// `old_of_new[i]` is the original index of new node `i`.
    pub old_of_new: Vec<NodeId>,
    pub new_of_old: Vec<Option<NodeId>>,
}

impl Restriction {
    pub fn map_set(&self, set: &NodeSet) -> NodeSet {
        set.iter().filter_map(|v| self.new_of_old[v]).collect()
    }
}

/// Subgraph induced by `keep`, inheriting `ℓ` and `σ`.
pub fn subgraph_restrict(g: &MetricGraph, keep: &NodeSet) -> Result<Restriction> {
    keep.validate(g.node_count())?;
    if keep.is_empty() {
        return Err(Error::DisconnectedDomain("empty node set".into()));
    }
    if !g.is_connected_set(keep) {
        return Err(Error::DisconnectedDomain(format!(
            "the {} kept nodes do not induce a connected subgraph",
            keep.len()
        )));
    }
    let mut new_of_old = vec![None; g.node_count()];
    for (i, v) in keep.iter().enumerate() {
        new_of_old[v] = Some(i);
    }
    let dim = g.dim();
    let mut coords = Vec::with_capacity(keep.len() * dim);
    for v in keep.iter() {
        if let Some(c) = g.coords(v) {
            coords.extend_from_slice(c);
        }
    }
    let edges = g
        .edges()
        .iter()
        .filter_map(|e| match (new_of_old[e.a], new_of_old[e.b]) {
            (Some(a), Some(b)) => Some(Edge::new(a, b, e.length, e.sigma)),
            _ => None,
        })
        .collect();
    Ok(Restriction {
        graph: MetricGraph::new(keep.len(), dim, coords, edges)?,
        old_of_new: keep.as_slice().to_vec(),
        new_of_old,
    })
}

/// Half-widths `(horizontal, vertical)` of the Heisenberg lattice box.
pub fn heisenberg_extent(side: usize) -> (i64, i64) {
    let h = ((side - 1) / 2) as i64;
    (h, h.max((h * h + 3) / 4))
}

/// Discrete first Heisenberg group: lattice points `(i, j, k)` with
/// horizontal moves `(i±1, j, k)` and `(i, j±1, k∓i)`.
///
/// The box is `|i|, |j| ≤ h` with `h = (side-1)/2` and `|k| ≤ max(h, ⌈h²/4⌉)`,
/// which contains every word-metric ball of radius about `h` around the
/// origin. Coordinates follow the homogeneous dilation `(i s, j s, k s²)`;
/// `ℓ = s` and `σ = s⁴`.
pub fn heisenberg_grid(side: usize, spacing: f64) -> Result<MetricGraph> {
    heisenberg_grid_with_budget(side, spacing, DEFAULT_NODE_BUDGET)
}

pub fn heisenberg_grid_with_budget(side: usize, spacing: f64, budget: usize) -> Result<MetricGraph> {
    if side < 3 {
        return Err(Error::arg("heisenberg side must be at least 3"));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::arg(format!("spacing must be positive, got {spacing}")));
    }
    let (h, hv) = heisenberg_extent(side);
    let (w, wv) = ((2 * h + 1) as usize, (2 * hv + 1) as usize);
    let n = w * w * wv;
    if n > budget {
        return Err(Error::TooLarge { nodes: n, budget });
    }
    let index = |i: i64, j: i64, k: i64| -> Option<NodeId> {
        (i.abs() <= h && j.abs() <= h && k.abs() <= hv)
            .then(|| (((k + hv) as usize * w + (j + h) as usize) * w) + (i + h) as usize)
    };
    let sigma = spacing.powi(4);
    let mut coords = Vec::with_capacity(3 * n);
    let mut edges = Vec::with_capacity(2 * n);
    for k in -hv..=hv {
        for j in -h..=h {
            for i in -h..=h {
                let v = index(i, j, k).unwrap();
                coords.extend([i as f64 * spacing, j as f64 * spacing, k as f64 * spacing * spacing]);
                if let Some(u) = index(i + 1, j, k) {
                    edges.push(Edge::new(v, u, spacing, sigma));
                }
                if let Some(u) = index(i, j + 1, k - i) {
                    edges.push(Edge::new(v, u, spacing, sigma));
                }
            }
        }
    }
    MetricGraph::new(n, 3, coords, edges)
}

/// Node of the Heisenberg lattice at integer coordinates `(i, j, k)`.
pub fn heisenberg_node(side: usize, i: i64, j: i64, k: i64) -> Option<NodeId> {
    let (h, hv) = heisenberg_extent(side);
    let w = (2 * h + 1) as usize;
    (i.abs() <= h && j.abs() <= h && k.abs() <= hv)
        .then(|| (((k + hv) as usize * w + (j + h) as usize) * w) + (i + h) as usize)
}

/// Endpoints of the `depth`-th generation intervals of the Cantor
/// construction keeping the outer `ratio` of each interval, sorted.
/// Returns `2^(depth+1)` points.
pub fn cantor_points(depth: u32, ratio: f64) -> Result<Vec<f64>> {
    if depth < 1 {
        return Err(Error::arg("cantor depth must be at least 1"));
    }
    if !(ratio > 0.0 && ratio < 0.5) {
        return Err(Error::arg(format!("cantor ratio must lie in (0, 1/2), got {ratio}")));
    }
    if depth > 24 {
        return Err(Error::TooLarge {
            nodes: 1 << 25,
            budget: DEFAULT_NODE_BUDGET,
        });
    }
    let mut intervals = vec![(0.0f64, 1.0f64)];
    for _ in 0..depth {
        intervals = intervals
            .into_iter()
            .flat_map(|(a, b)| {
                let len = (b - a) * ratio;
                [(a, a + len), (b - len, b)]
            })
            .collect();
    }
    Ok(intervals.into_iter().flat_map(|(a, b)| [a, b]).collect())
}
