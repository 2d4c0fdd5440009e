use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{EdgeId, MetricGraph, NodeId};

pub const NO_PRED: usize = usize::MAX;

#[derive(Clone, Copy, Debug)]
struct Entry {
    dist: f64,
    hops: u32,
    node: NodeId,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so that BinaryHeap pops the smallest (dist, hops, node).
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.hops.cmp(&self.hops))
            .then(other.node.cmp(&self.node))
    }
}

/// Dijkstra tree with deterministic tie-breaking: among equal distances the
/// path with fewer edges wins, then the lower-indexed predecessor.
#[derive(Clone, Debug)]
pub struct ShortestPathTree {
    pub dist: Vec<f64>,
    pub hops: Vec<u32>,
    pub pred_edge: Vec<EdgeId>,
    pub pred_node: Vec<NodeId>,
}

#[derive(Clone, Copy, Default)]
pub(crate) struct SearchLimits<'a> {
    /// Only nodes with the mask set are visited.
    pub allowed: Option<&'a [bool]>,
    /// Reached but never expanded.
    pub terminal: Option<&'a [bool]>,
    pub target: Option<NodeId>,
    pub cutoff: Option<f64>,
}

impl ShortestPathTree {
    pub fn build(
        g: &MetricGraph,
        sources: &[NodeId],
        weight: impl Fn(EdgeId) -> f64,
        allowed: Option<&[bool]>,
        target: Option<NodeId>,
        cutoff: Option<f64>,
    ) -> Self {
        Self::search(
            g,
            sources,
            weight,
            SearchLimits {
                allowed,
                terminal: None,
                target,
                cutoff,
            },
        )
    }

    pub(crate) fn search(
        g: &MetricGraph,
        sources: &[NodeId],
        weight: impl Fn(EdgeId) -> f64,
        limits: SearchLimits<'_>,
    ) -> Self {
        let n = g.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut hops = vec![u32::MAX; n];
        let mut pred_edge = vec![NO_PRED; n];
        let mut pred_node = vec![NO_PRED; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        let allowed = |v: NodeId| limits.allowed.map_or(true, |m| m[v]);
        let cutoff = limits.cutoff.unwrap_or(f64::INFINITY);

        for &s in sources {
            if allowed(s) && dist[s] != 0.0 {
                dist[s] = 0.0;
                hops[s] = 0;
                heap.push(Entry {
                    dist: 0.0,
                    hops: 0,
                    node: s,
                });
            }
        }

        while let Some(Entry { dist: d, hops: h, node: v }) = heap.pop() {
            if done[v] || d > dist[v] || (d == dist[v] && h > hops[v]) {
                continue;
            }
            done[v] = true;
            if limits.target == Some(v) {
                break;
            }
            if limits.terminal.is_some_and(|t| t[v]) {
                continue;
            }
            for &(w, e) in g.neighbors(v) {
                if done[w] || !allowed(w) {
                    continue;
                }
                let nd = d + weight(e);
                if nd > cutoff {
                    continue;
                }
                let nh = h + 1;
                let better = match nd.total_cmp(&dist[w]) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => nh < hops[w] || (nh == hops[w] && v < pred_node[w]),
                };
                if better {
                    dist[w] = nd;
                    hops[w] = nh;
                    pred_edge[w] = e;
                    pred_node[w] = v;
                    heap.push(Entry {
                        dist: nd,
                        hops: nh,
                        node: w,
                    });
                }
            }
        }

        ShortestPathTree {
            dist,
            hops,
            pred_edge,
            pred_node,
        }
    }

    /// Edges and nodes of the tree path ending at `v`, ordered from its source.
    pub fn path_to(&self, v: NodeId) -> (Vec<EdgeId>, Vec<NodeId>) {
        let mut edges = Vec::new();
        let mut nodes = vec![v];
        let mut cur = v;
        while self.pred_edge[cur] != NO_PRED {
            edges.push(self.pred_edge[cur]);
            cur = self.pred_node[cur];
            nodes.push(cur);
        }
        edges.reverse();
        nodes.reverse();
        (edges, nodes)
    }
}
