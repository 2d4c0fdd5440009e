//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solver.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use modlab::graph::{Edge, MetricGraph, NodeSet};

/// Random connected multigraph-free graph on `n` nodes: a random spanning
/// tree plus each remaining pair with probability `extra`. With `unit`
/// set, every edge has `ℓ = σ = 1`; otherwise both are drawn from
/// `[0.5, 2]`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: f64, unit: bool) -> MetricGraph {
    let mut pairs = Vec::new();
    for v in 1..n {
        pairs.push((rng.random_range(0..v), v));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !pairs.contains(&(a, b)) && rng.random_bool(extra) {
                pairs.push((a, b));
            }
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(a, b)| {
            if unit {
                Edge::new(a, b, 1.0, 1.0)
            } else {
                Edge::new(a, b, rng.random_range(0.5..2.0), rng.random_range(0.5..2.0))
            }
        })
        .collect();
    MetricGraph::new(n, 0, Vec::new(), edges).unwrap()
}

/// Two disjoint nonempty random node sets of size at most `max`.
pub fn random_disjoint_sets<R: Rng>(rng: &mut R, n: usize, max: usize) -> (NodeSet, NodeSet) {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let ke = rng.random_range(1..=max.min(n - 1));
    let kf = rng.random_range(1..=max.min(n - ke));
    (
        NodeSet::new(perm[..ke].to_vec()),
        NodeSet::new(perm[ke..ke + kf].to_vec()),
    )
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0)
    }
}

/// Smallest `Σ ρ(e) ℓ(e)` over walks from `e` to `f` that stay in `domain`.
pub fn min_family_length(g: &MetricGraph, rho: &[f64], e: &NodeSet, f: &NodeSet, domain: Option<&NodeSet>) -> f64 {
    let n = g.node_count();
    let inside = |v: usize| domain.is_none_or(|u| u.contains(v));
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for v in e.iter().filter(|&v| inside(v)) {
        dist[v] = 0.0;
        heap.push(Item(0.0, v));
    }
    while let Some(Item(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        if f.contains(v) {
            return d;
        }
        for &(w, id) in g.neighbors(v) {
            if !inside(w) {
                continue;
            }
            let nd = d + rho[id] * g.edge(id).length;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Item(nd, w));
            }
        }
    }
    f64::INFINITY
}

/// `Σ σ ρ^p`.
pub fn energy(g: &MetricGraph, rho: &[f64], p: f64) -> f64 {
    g.edges().iter().zip(rho).map(|(e, r)| e.sigma * r.powf(p)).sum()
}

/// Effective conductance between `e` and `f` with edge conductances
/// `σ/ℓ²`, together with the extremal potential drop `|Δφ|/ℓ` per edge.
/// For `p = 2` this density is the extremal one and the conductance is the
/// modulus.
pub fn conductance(g: &MetricGraph, e: &NodeSet, f: &NodeSet) -> (f64, Vec<f64>) {
    let n = g.node_count();
    let fixed = |v: usize| -> Option<f64> {
        if e.contains(v) {
            Some(0.0)
        } else if f.contains(v) {
            Some(1.0)
        } else {
            None
        }
    };
    let free: Vec<usize> = (0..n).filter(|&v| fixed(v).is_none()).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in free.iter().enumerate() {
        slot[v] = i;
    }
    let k = free.len();
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut b = DVector::<f64>::zeros(k);
    for edge in g.edges() {
        let c = edge.sigma / (edge.length * edge.length);
        for (x, y) in [(edge.a, edge.b), (edge.b, edge.a)] {
            if slot[x] == usize::MAX {
                continue;
            }
            a[(slot[x], slot[x])] += c;
            match fixed(y) {
                Some(val) => b[slot[x]] += c * val,
                None => a[(slot[x], slot[y])] -= c,
            }
        }
    }
    // Nodes cut off from both sets float; pin them to keep the system regular.
    for i in 0..k {
        if a[(i, i)] == 0.0 {
            a[(i, i)] = 1.0;
        }
    }
    let sol = if k > 0 {
        a.lu().solve(&b).expect("regular Dirichlet system")
    } else {
        DVector::zeros(0)
    };
    let phi: Vec<f64> = (0..n).map(|v| fixed(v).unwrap_or_else(|| sol[slot[v]])).collect();
    let mut total = 0.0;
    let rho = g
        .edges()
        .iter()
        .map(|edge| {
            let drop = (phi[edge.a] - phi[edge.b]).abs();
            total += edge.sigma / (edge.length * edge.length) * drop * drop;
            drop / edge.length
        })
        .collect();
    (total, rho)
}

/// Every simple path from `e` to `f` (as edge lists) whose interior avoids
/// both sets, up to `cap` paths.
pub fn simple_paths(g: &MetricGraph, e: &NodeSet, f: &NodeSet, cap: usize) -> Option<Vec<Vec<usize>>> {
    fn walk(
        g: &MetricGraph,
        v: usize,
        f: &NodeSet,
        e: &NodeSet,
        seen: &mut Vec<bool>,
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        for &(w, id) in g.neighbors(v) {
            if seen[w] || e.contains(w) {
                continue;
            }
            stack.push(id);
            if f.contains(w) {
                out.push(stack.clone());
                if out.len() > cap {
                    return false;
                }
            } else {
                seen[w] = true;
                if !walk(g, w, f, e, seen, stack, out, cap) {
                    return false;
                }
                seen[w] = false;
            }
            stack.pop();
        }
        true
    }
    let mut out = Vec::new();
    let mut seen = vec![false; g.node_count()];
    for s in e.iter() {
        seen[s] = true;
        if !walk(g, s, f, e, &mut seen, &mut Vec::new(), &mut out, cap) {
            return None;
        }
        seen[s] = false;
    }
    Some(out)
}
