use std::collections::{BTreeMap, BTreeSet};

use super::{EdgeId, GraphError, InstanceGraph, NodeId, Result};

/// A graph together with injective, type-preserving embeddings into two
/// graphs `a` and `b`. Elements sharing a preimage are identified by
/// [`union_over`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrossoverPoint {
    pub graph: InstanceGraph,
    pub nodes_a: BTreeMap<NodeId, NodeId>,
    pub edges_a: BTreeMap<EdgeId, EdgeId>,
    pub nodes_b: BTreeMap<NodeId, NodeId>,
    pub edges_b: BTreeMap<EdgeId, EdgeId>,
}

impl CrossoverPoint {
    /// `graph` embedded identically into both sides.
    pub fn identity(graph: InstanceGraph) -> Self {
        let nodes: BTreeMap<_, _> = graph.node_ids().map(|n| (n, n)).collect();
        let edges: BTreeMap<_, _> = graph.edge_ids().map(|e| (e, e)).collect();
        Self { graph, nodes_a: nodes.clone(), edges_a: edges.clone(), nodes_b: nodes, edges_b: edges }
    }

    /// The same crossover point with the roles of `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            graph: self.graph.clone(),
            nodes_a: self.nodes_b.clone(),
            edges_a: self.edges_b.clone(),
            nodes_b: self.nodes_a.clone(),
            edges_b: self.edges_a.clone(),
        }
    }

    /// Checks that both maps are total, injective, typing-compatible graph
    /// morphisms into `a` and `b`.
    pub fn validate(&self, a: &InstanceGraph, b: &InstanceGraph) -> Result<()> {
        check_embedding(&self.graph, &self.nodes_a, &self.edges_a, a, "a")?;
        check_embedding(&self.graph, &self.nodes_b, &self.edges_b, b, "b")
    }
}

fn check_embedding(
    cp: &InstanceGraph,
    nodes: &BTreeMap<NodeId, NodeId>,
    edges: &BTreeMap<EdgeId, EdgeId>,
    target: &InstanceGraph,
    side: &str,
) -> Result<()> {
    let bad = |msg: String| Err(GraphError::CrossoverPoint(format!("map into {side}: {msg}")));
    let mut seen = BTreeSet::new();
    for (n, ty) in cp.nodes() {
        let Some(&img) = nodes.get(&n) else { return bad(format!("node {n} unmapped")) };
        if target.node_type(img) != Some(ty) {
            return bad(format!("node {n} maps to {img} of a different type"));
        }
        if !seen.insert(img) {
            return bad(format!("node {img} hit twice"));
        }
    }
    if nodes.len() != cp.node_count() {
        return bad("maps nodes outside the crossover point".into());
    }
    let mut seen = BTreeSet::new();
    for (e, edge) in cp.edges() {
        let Some(&img) = edges.get(&e) else { return bad(format!("edge {e} unmapped")) };
        let Some(t) = target.edge(img) else { return bad(format!("edge {e} maps to missing {img}")) };
        if t.ty != edge.ty || t.src != nodes[&edge.src] || t.tar != nodes[&edge.tar] {
            return bad(format!("edge {e} is not mapped compatibly"));
        }
        if !seen.insert(img) {
            return bad(format!("edge {img} hit twice"));
        }
    }
    if edges.len() != cp.edge_count() {
        return bad("maps edges outside the crossover point".into());
    }
    Ok(())
}

/// Result of [`union_over_mapped`]: the union plus where `b`'s elements
/// ended up. `a`'s elements keep their IDs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Union {
    pub graph: InstanceGraph,
    pub b_nodes: BTreeMap<NodeId, NodeId>,
    pub b_edges: BTreeMap<EdgeId, EdgeId>,
}

/// Union of `a` and `b` over `cp`: elements with a common preimage in `cp`
/// appear once. `a` keeps its IDs; unidentified elements of `b` receive
/// fresh IDs in ascending `b` order.
pub fn union_over(a: &InstanceGraph, b: &InstanceGraph, cp: &CrossoverPoint) -> Result<InstanceGraph> {
    union_over_mapped(a, b, cp).map(|u| u.graph)
}

pub fn union_over_mapped(a: &InstanceGraph, b: &InstanceGraph, cp: &CrossoverPoint) -> Result<Union> {
    cp.validate(a, b)?;
    let b_to_a_nodes: BTreeMap<NodeId, NodeId> = cp.nodes_b.iter().map(|(c, nb)| (*nb, cp.nodes_a[c])).collect();
    let b_to_a_edges: BTreeMap<EdgeId, EdgeId> = cp.edges_b.iter().map(|(c, eb)| (*eb, cp.edges_a[c])).collect();

    let mut out = a.clone();
    let mut next_node = a.fresh_node_id().0;
    let mut next_edge = a.fresh_edge_id().0;
    let mut b_nodes = BTreeMap::new();
    for (n, ty) in b.nodes() {
        let img = match b_to_a_nodes.get(&n) {
            Some(&an) => an,
            None => {
                let id = NodeId(next_node);
                next_node += 1;
                out.add_node(id, ty)?;
                id
            }
        };
        b_nodes.insert(n, img);
    }
    let mut b_edges = BTreeMap::new();
    for (e, edge) in b.edges() {
        let img = match b_to_a_edges.get(&e) {
            Some(&ae) => ae,
            None => {
                let id = EdgeId(next_edge);
                next_edge += 1;
                out.add_edge(id, edge.ty, b_nodes[&edge.src], b_nodes[&edge.tar])?;
                id
            }
        };
        b_edges.insert(e, img);
    }
    Ok(Union { graph: out, b_nodes, b_edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cra;
    use crate::graph::{isomorphic_over_problem, problem_graph_of};

    #[test]
    fn full_identification_reproduces_input() {
        let fx = cra::fixtures();
        let cp = CrossoverPoint::identity(fx.g.clone());
        let u = union_over(&fx.g, &fx.g, &cp).unwrap();
        assert_eq!(u, fx.g);
    }

    #[test]
    fn problem_only_point_counts() {
        let fx = cra::fixtures();
        let pip = problem_graph_of(&fx.g, &fx.tg);
        let cp = CrossoverPoint::identity(pip.clone());
        let u = union_over(&fx.g, &fx.h, &cp).unwrap();
        assert_eq!(u.node_count(), fx.g.node_count() + fx.h.node_count() - pip.node_count());
        assert_eq!(u.edge_count(), fx.g.edge_count() + fx.h.edge_count() - pip.edge_count());
    }

    #[test]
    fn example_point_yields_desirable_offspring() {
        let fx = cra::fixtures();
        let (g1, _g2, _h1, h2, cp) = cra::example2_split();
        let u = union_over(&g1, &h2, &cp).unwrap();
        assert!(isomorphic_over_problem(&u, &fx.g1h2, &fx.tg));
    }

    #[test]
    fn non_injective_point_is_rejected() {
        let fx = cra::fixtures();
        let pip = problem_graph_of(&fx.g, &fx.tg);
        let mut cp = CrossoverPoint::identity(pip);
        let f1 = fx.f1;
        cp.nodes_a.insert(fx.f2, f1);
        assert!(matches!(union_over(&fx.g, &fx.h, &cp), Err(GraphError::CrossoverPoint(_))));
    }

    #[test]
    fn mistyped_point_is_rejected() {
        let fx = cra::fixtures();
        let pip = problem_graph_of(&fx.g, &fx.tg);
        let mut cp = CrossoverPoint::identity(pip);
        cp.nodes_b.insert(fx.f1, NodeId(20));
        assert!(union_over(&fx.g, &fx.h, &cp).is_err());
    }
}
