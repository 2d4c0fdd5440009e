//! Discrete metric measure spaces.
//!
//! A [`MetricGraph`] stands in for a space `(X, d, μ)`: the metric `d` is the
//! shortest-path distance under edge lengths `ℓ(e)`, and the measure `μ` lives
//! on edges through the weights `σ(e)`. Line integrals of an edge density
//! become `Σ ρ(e) ℓ(e)` and volume integrals become `Σ ρ(e)^p σ(e)`.

mod ahlfors;
pub mod io;
pub(crate) mod search;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ahlfors::{ahlfors_fit, ahlfors_fit_at_radii, fit_power_law, AhlforsFit, PowerLawFit};
pub use search::{ShortestPathTree, NO_PRED};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub length: f64,
    pub sigma: f64,
}

impl Edge {
    pub fn new(a: NodeId, b: NodeId, length: f64, sigma: f64) -> Self {
        Edge { a, b, length, sigma }
    }

    /// The endpoint opposite to `v`.
    #[inline]
    pub fn other(&self, v: NodeId) -> NodeId {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }
}

/// Sorted, deduplicated set of node indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn new(mut nodes: Vec<NodeId>) -> Self {
        nodes.sort_unstable();
        nodes.dedup();
        NodeSet(nodes)
    }

    pub fn singleton(v: NodeId) -> Self {
        NodeSet(vec![v])
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        NodeSet(
            mask.iter()
                .enumerate()
                .filter_map(|(i, &m)| m.then_some(i))
                .collect(),
        )
    }

    pub fn full(n: usize) -> Self {
        NodeSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.0 {
            m[v] = true;
        }
        m
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        NodeSet::new(v)
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.0.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&v) if v >= n => Err(Error::arg(format!("node {v} out of range (n = {n})"))),
            _ => Ok(()),
        }
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        NodeSet::new(iter.into_iter().collect())
    }
}

impl From<Vec<NodeId>> for NodeSet {
    fn from(v: Vec<NodeId>) -> Self {
        NodeSet::new(v)
    }
}

/// Weighted, connected metric graph. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph {
    n: usize,
    dim: usize,
    coords: Vec<f64>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    adj: Vec<(NodeId, EdgeId)>,
}

impl MetricGraph {
    /// Builds a graph on nodes `0..n`. `coords` holds `n * dim` values in
    /// node order (`dim = 0` for graphs without coordinates). Parallel edges
    /// are allowed, self-loops are not, and the result must be connected.
    pub fn new(n: usize, dim: usize, coords: Vec<f64>, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("graph must have at least one node"));
        }
        if coords.len() != n * dim {
            return Err(Error::arg(format!(
                "expected {} coordinates for {n} nodes of dimension {dim}, got {}",
                n * dim,
                coords.len()
            )));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::arg(format!("non-finite coordinate {c}")));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.a >= n || e.b >= n {
                return Err(Error::arg(format!("edge {i} references a missing node")));
            }
            if e.a == e.b {
                return Err(Error::arg(format!("edge {i} is a self-loop at node {}", e.a)));
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::arg(format!("edge {i} has invalid length {}", e.length)));
            }
            if !(e.sigma.is_finite() && e.sigma > 0.0) {
                return Err(Error::arg(format!("edge {i} has invalid measure {}", e.sigma)));
            }
        }

        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.a] += 1;
            degree[e.b] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets.clone();
        let mut adj = vec![(0, 0); offsets[n]];
        for (id, e) in edges.iter().enumerate() {
            adj[fill[e.a]] = (e.b, id);
            fill[e.a] += 1;
            adj[fill[e.b]] = (e.a, id);
            fill[e.b] += 1;
        }

        let g = MetricGraph {
            n,
            dim,
            coords,
            edges,
            offsets,
            adj,
        };
        let mask = vec![true; n];
        if g.component_size(0, &mask) != n {
            return Err(Error::DisconnectedDomain("graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_coords(&self) -> bool {
        self.dim > 0
    }

    pub fn coords(&self, v: NodeId) -> Option<&[f64]> {
        (self.dim > 0).then(|| &self.coords[v * self.dim..(v + 1) * self.dim])
    }

    pub fn all_coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    /// `(neighbor, edge)` pairs incident to `v`.
    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn total_measure(&self) -> f64 {
        self.edges.iter().map(|e| e.sigma).sum()
    }

    /// Half the measure of the incident edges; node measures sum to the
    /// total edge measure.
    pub fn node_measure(&self, v: NodeId) -> f64 {
        0.5 * self
            .neighbors(v)
            .iter()
            .map(|&(_, e)| self.edges[e].sigma)
            .sum::<f64>()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min)
    }

    /// Node nearest (Euclidean, in coordinates) to the centroid of all nodes;
    /// node 0 for coordinate-free graphs.
    pub fn central_node(&self) -> NodeId {
        if self.dim == 0 {
            return 0;
        }
        let mut centroid = vec![0.0; self.dim];
        for v in 0..self.n {
            for (c, x) in centroid.iter_mut().zip(self.coords(v).unwrap()) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= self.n as f64);
        self.nearest_node(&centroid).unwrap_or(0)
    }

    /// Node whose coordinates are closest to `point`; ties go to the lower
    /// index.
    pub fn nearest_node(&self, point: &[f64]) -> Option<NodeId> {
        if self.dim == 0 || point.len() != self.dim {
            return None;
        }
        let mut best = (f64::INFINITY, 0);
        for v in 0..self.n {
            let d2: f64 = self
                .coords(v)
                .unwrap()
                .iter()
                .zip(point)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d2 < best.0 {
                best = (d2, v);
            }
        }
        Some(best.1)
    }

    /// Number of nodes reachable from `start` through nodes with `mask` set.
    pub(crate) fn component_size(&self, start: NodeId, mask: &[bool]) -> usize {
        if !mask[start] {
            return 0;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 0;
        while let Some(v) = stack.pop() {
            count += 1;
            for &(w, _) in self.neighbors(v) {
                if mask[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        count
    }

    /// Whether `set` induces a connected subgraph.
    pub fn is_connected_set(&self, set: &NodeSet) -> bool {
        match set.as_slice().first() {
            None => false,
            Some(&s) => self.component_size(s, &set.mask(self.n)) == set.len(),
        }
    }

    pub(crate) fn check_node(&self, v: NodeId) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::arg(format!("node {v} out of range (n = {})", self.n)))
        }
    }

    // ---- metric queries ----

    /// Shortest-path distance under `ℓ`.
    pub fn graph_distance(&self, a: NodeId, b: NodeId) -> Result<f64> {
        self.check_node(a)?;
        self.check_node(b)?;
        if a == b {
            return Ok(0.0);
        }
        let tree = ShortestPathTree::build(self, &[a], |e| self.edges[e].length, None, Some(b), None);
        let d = tree.dist[b];
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::Disconnected { a, b })
        }
    }

    /// Distances from `src` to every node.
    pub fn distances_from(&self, src: NodeId) -> Vec<f64> {
        self.distances_from_set(&[src])
    }

    /// Distances from the nearest of `sources` to every node.
    pub fn distances_from_set(&self, sources: &[NodeId]) -> Vec<f64> {
        ShortestPathTree::build(self, sources, |e| self.edges[e].length, None, None, None).dist
    }

    /// Distances from `src`, computed only up to `cutoff` (inclusive);
    /// nodes beyond are reported as infinity.
    pub fn distances_within(&self, src: NodeId, cutoff: f64) -> Vec<f64> {
        ShortestPathTree::build(self, &[src], |e| self.edges[e].length, None, None, Some(cutoff)).dist
    }

    /// Open ball `{y : d(x0, y) < r}`.
    pub fn metric_ball(&self, x0: NodeId, r: f64) -> Result<NodeSet> {
        self.check_node(x0)?;
        if !(r >= 0.0) {
            return Err(Error::arg(format!("ball radius must be nonnegative, got {r}")));
        }
        let d = self.distances_within(x0, r);
        Ok(NodeSet((0..self.n).filter(|&v| d[v] < r).collect()))
    }

    /// Closed ball `{y : d(x0, y) <= r}`.
    pub fn closed_ball(&self, x0: NodeId, r: f64) -> Result<NodeSet> {
        self.check_node(x0)?;
        if !(r >= 0.0) {
            return Err(Error::arg(format!("ball radius must be nonnegative, got {r}")));
        }
        let d = self.distances_within(x0, r);
        Ok(NodeSet((0..self.n).filter(|&v| d[v] <= r).collect()))
    }

    /// `min d(s, t)` over `s ∈ S`, `t ∈ T`.
    pub fn set_distance(&self, s: &NodeSet, t: &NodeSet) -> Result<f64> {
        if s.is_empty() || t.is_empty() {
            return Err(Error::arg("set_distance requires nonempty sets"));
        }
        s.validate(self.n)?;
        t.validate(self.n)?;
        let d = self.distances_from_set(s.as_slice());
        Ok(t.iter().map(|v| d[v]).fold(f64::INFINITY, f64::min))
    }

    /// `max d(s, s')` over pairs in `S`.
    pub fn set_diameter(&self, s: &NodeSet) -> Result<f64> {
        if s.is_empty() {
            return Err(Error::arg("set_diameter requires a nonempty set"));
        }
        s.validate(self.n)?;
        let mut diam: f64 = 0.0;
        for a in s.iter() {
            let d = self.distances_from(a);
            diam = s.iter().map(|b| d[b]).fold(diam, f64::max);
        }
        Ok(diam)
    }

    /// `μ(B(x0, r))`: edges inside the open ball count fully, edges with one
    /// endpoint inside count half. Equivalently the sum of node measures over
    /// the ball.
    pub fn ball_measure(&self, x0: NodeId, r: f64) -> Result<f64> {
        let ball = self.metric_ball(x0, r)?;
        Ok(self.set_measure(&ball))
    }

    /// Sum of node measures over `set`.
    pub fn set_measure(&self, set: &NodeSet) -> f64 {
        set.iter().map(|v| self.node_measure(v)).sum()
    }

    /// Lower bound on the diameter from repeated double sweeps; exact on
    /// grids and trees.
    pub fn diameter_estimate(&self) -> f64 {
        let mut start = 0;
        let mut best: f64 = 0.0;
        for _ in 0..4 {
            let d = self.distances_from(start);
            let (far, &dist) = d
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .unwrap();
            if dist <= best {
                break;
            }
            best = dist;
            start = far;
        }
        best
    }
}
