use super::{CurveFamilySpec, Density, EdgePath};
use crate::error::Result;
use crate::graph::search::SearchLimits;
use crate::graph::{MetricGraph, NodeId, ShortestPathTree};

/// Node masks describing a validated family.
#[derive(Clone, Debug)]
pub(crate) struct FamilyMasks {
    pub sources: Vec<NodeId>,
    pub in_domain: Vec<bool>,
    pub is_target: Vec<bool>,
    pub targets: Vec<NodeId>,
}

impl FamilyMasks {
    pub fn new(g: &MetricGraph, fam: &CurveFamilySpec) -> Result<Self> {
        fam.validate(g)?;
        let n = g.node_count();
        let in_domain = match &fam.domain {
            Some(u) => u.mask(n),
            None => vec![true; n],
        };
        Ok(FamilyMasks {
            sources: fam.e.as_slice().to_vec(),
            in_domain,
            is_target: fam.f.mask(n),
            targets: fam.f.as_slice().to_vec(),
        })
    }

    /// Shortest-path tree from `E` under edge weights `ρ(e) ℓ(e)`, confined
    /// to `U` and never expanding nodes of `F`.
    pub fn tree(&self, g: &MetricGraph, rho: &[f64]) -> ShortestPathTree {
        ShortestPathTree::search(
            g,
            &self.sources,
            |e| rho[e] * g.edge(e).length,
            SearchLimits {
                allowed: Some(&self.in_domain),
                terminal: Some(&self.is_target),
                target: None,
                cutoff: None,
            },
        )
    }

    /// Reachable targets ordered by (ρ-length, edge count, node index).
    pub fn ranked_targets(&self, tree: &ShortestPathTree) -> Vec<NodeId> {
        let mut t: Vec<NodeId> = self
            .targets
            .iter()
            .copied()
            .filter(|&v| tree.dist[v].is_finite())
            .collect();
        t.sort_by(|&a, &b| {
            tree.dist[a]
                .total_cmp(&tree.dist[b])
                .then(tree.hops[a].cmp(&tree.hops[b]))
                .then(a.cmp(&b))
        });
        t
    }
}

pub(crate) fn tree_path(tree: &ShortestPathTree, v: NodeId) -> EdgePath {
    let (edges, nodes) = tree.path_to(v);
    EdgePath { edges, nodes }
}

/// Family curve of least ρ-length, or `None` when the family is empty.
pub fn shortest_family_curve(
    g: &MetricGraph,
    rho: &Density,
    fam: &CurveFamilySpec,
) -> Result<Option<(EdgePath, f64)>> {
    let masks = FamilyMasks::new(g, fam)?;
    let tree = masks.tree(g, rho.values());
    Ok(masks
        .ranked_targets(&tree)
        .first()
        .map(|&v| (tree_path(&tree, v), tree.dist[v])))
}

/// Returns a family curve of minimal ρ-length when that length is below
/// `1 - tol`, i.e. a witness that `ρ` is not admissible.
///
/// Ties are broken by fewest edges, then by lower node indices.
pub fn admissibility_violation(
    g: &MetricGraph,
    rho: &Density,
    fam: &CurveFamilySpec,
    tol: f64,
) -> Result<Option<(EdgePath, f64)>> {
    Ok(shortest_family_curve(g, rho, fam)?.filter(|(_, len)| *len < 1.0 - tol))
}
