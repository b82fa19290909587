//! Generic crossover: split both parents at random, pick a crossover point
//! inside both split points and unite the parts crosswise.
//!
//! Offspring share the parents' problem graph but may violate
//! multiplicities.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{problem_graph_of, same_search_space, union_over, CrossoverPoint, InstanceGraph, NodeId, TypeGraph};
use crate::trace::{Decider, DecisionTrace};
use crate::CrossoverError;

const PART1: u64 = 0;
const PART2: u64 = 1;
const BOTH: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenericConfig {
    pub p_part1_only: f64,
    pub p_part2_only: f64,
    pub p_both: f64,
    pub p_identify_node: f64,
    pub p_identify_edge: f64,
}

impl Default for GenericConfig {
    fn default() -> Self {
        Self { p_part1_only: 0.25, p_part2_only: 0.25, p_both: 0.5, p_identify_node: 0.3, p_identify_edge: 0.3 }
    }
}

impl GenericConfig {
    pub fn validate(&self) -> Result<(), CrossoverError> {
        let ps = [self.p_part1_only, self.p_part2_only, self.p_both, self.p_identify_node, self.p_identify_edge];
        if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(CrossoverError::Config("probabilities must lie in [0,1]".into()));
        }
        if self.p_part1_only + self.p_part2_only + self.p_both <= 0.0 {
            return Err(CrossoverError::Config("part probabilities must not all be zero".into()));
        }
        Ok(())
    }

    fn weights(&self) -> [f64; 3] {
        [self.p_part1_only, self.p_part2_only, self.p_both]
    }
}

/// Two parts covering a graph; both contain its problem graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub part1: InstanceGraph,
    pub part2: InstanceGraph,
    pub split_point: InstanceGraph,
}

fn in_part1(v: u64) -> bool {
    v != PART2
}

fn in_part2(v: u64) -> bool {
    v != PART1
}

/// Assigns every non-problem element of `g` to part1, part2 or both. An edge
/// only goes to parts holding both of its endpoints; an edge whose endpoints
/// share no part is put into part1 together with its endpoints.
pub fn random_split(g: &InstanceGraph, tg: &TypeGraph, side: &str, cfg: &GenericConfig, d: &mut Decider) -> Split {
    let weights = cfg.weights();
    let mut node_part: BTreeMap<NodeId, u64> = BTreeMap::new();
    for (n, ty) in g.nodes() {
        let v = if tg.is_problem_node_type(ty) {
            BOTH
        } else {
            d.weighted(&format!("split.{side}.node:{n}", n = n.0), &weights).unwrap_or(BOTH)
        };
        node_part.insert(n, v);
    }
    let mut edge_part = BTreeMap::new();
    for (e, edge) in g.edges() {
        let v = if tg.is_problem_edge_type(edge.ty) {
            BOTH
        } else {
            let (a, b) = (node_part[&edge.src], node_part[&edge.tar]);
            let p1 = in_part1(a) && in_part1(b);
            let p2 = in_part2(a) && in_part2(b);
            let allowed = [
                if p1 { weights[0] } else { 0.0 },
                if p2 { weights[1] } else { 0.0 },
                if p1 && p2 { weights[2] } else { 0.0 },
            ];
            match d.weighted(&format!("split.{side}.edge:{}", e.0), &allowed) {
                Some(v) => v,
                None if p1 => PART1,
                None if p2 => PART2,
                None => {
                    for n in [edge.src, edge.tar] {
                        let cur = node_part[&n];
                        if !in_part1(cur) {
                            node_part.insert(n, BOTH);
                        }
                    }
                    PART1
                }
            }
        };
        edge_part.insert(e, v);
    }
    let build = |keep: fn(u64) -> bool| {
        let mut part = InstanceGraph::new();
        for (n, ty) in g.nodes() {
            if keep(node_part[&n]) {
                part.add_node(n, ty).unwrap();
            }
        }
        for (e, edge) in g.edges() {
            if keep(edge_part[&e]) {
                part.add_edge(e, edge.ty, edge.src, edge.tar).unwrap();
            }
        }
        part
    };
    Split { part1: build(in_part1), part2: build(in_part2), split_point: build(|v| v == BOTH) }
}

/// Crossover point between the split points `gi` and `hi`: the problem
/// graph, plus greedily identified same-typed node pairs and edges between
/// identified nodes. The point's own IDs are those of `gi`.
pub fn random_crossover_point(
    gi: &InstanceGraph,
    hi: &InstanceGraph,
    tg: &TypeGraph,
    cfg: &GenericConfig,
    d: &mut Decider,
) -> CrossoverPoint {
    let mut cp = CrossoverPoint::identity(problem_graph_of(gi, tg));
    let mut used_h: BTreeSet<NodeId> = BTreeSet::new();
    for (n, ty) in gi.nodes() {
        if tg.is_problem_node_type(ty) {
            continue;
        }
        let Some(m) = hi.nodes().find(|&(m, mt)| mt == ty && !used_h.contains(&m)).map(|(m, _)| m) else {
            continue;
        };
        if d.flip(&format!("gcp.node:{}", n.0), cfg.p_identify_node) {
            used_h.insert(m);
            cp.graph.add_node(n, ty).unwrap();
            cp.nodes_a.insert(n, n);
            cp.nodes_b.insert(n, m);
        }
    }
    let mut used_he = BTreeSet::new();
    for (e, edge) in gi.edges() {
        if tg.is_problem_edge_type(edge.ty)
            || !cp.nodes_b.contains_key(&edge.src)
            || !cp.nodes_b.contains_key(&edge.tar)
        {
            continue;
        }
        let (hs, ht) = (cp.nodes_b[&edge.src], cp.nodes_b[&edge.tar]);
        let Some(f) = hi
            .edges()
            .find(|(f, he)| he.ty == edge.ty && he.src == hs && he.tar == ht && !used_he.contains(f))
            .map(|(f, _)| f)
        else {
            continue;
        };
        if d.flip(&format!("gcp.edge:{}", e.0), cfg.p_identify_edge) {
            used_he.insert(f);
            cp.graph.add_edge(e, edge.ty, edge.src, edge.tar).unwrap();
            cp.edges_a.insert(e, e);
            cp.edges_b.insert(e, f);
        }
    }
    cp
}

#[derive(Debug, Clone)]
pub struct GenericOutcome {
    /// Union of the first part of `g` and the second part of `h`.
    pub offspring1: InstanceGraph,
    /// Union of the second part of `g` and the first part of `h`.
    pub offspring2: InstanceGraph,
    pub split_g: Split,
    pub split_h: Split,
    pub cp: CrossoverPoint,
    pub trace: DecisionTrace,
}

pub fn generic_crossover(
    g: &InstanceGraph,
    h: &InstanceGraph,
    tg: &TypeGraph,
    cfg: &GenericConfig,
    mut d: Decider,
) -> Result<GenericOutcome, CrossoverError> {
    cfg.validate()?;
    g.check_typing(tg)?;
    h.check_typing(tg)?;
    if !same_search_space(g, h, tg) {
        return Err(CrossoverError::SearchSpace);
    }
    let split_g = random_split(g, tg, "g", cfg, &mut d);
    let split_h = random_split(h, tg, "h", cfg, &mut d);
    let cp = random_crossover_point(&split_g.split_point, &split_h.split_point, tg, cfg, &mut d);
    let offspring1 = union_over(&split_g.part1, &split_h.part2, &cp)?;
    let offspring2 = union_over(&split_g.part2, &split_h.part1, &cp)?;
    let trace = d.finish()?;
    Ok(GenericOutcome { offspring1, offspring2, split_g, split_h, cp, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cra;
    use crate::graph::{check_multiplicities, isomorphic_over_problem, BoundKind, EdgeId};

    fn forced(trace: &DecisionTrace) -> Decider {
        Decider::forced(trace, 0)
    }

    #[test]
    fn problem_graph_splits_trivially() {
        let fx = cra::fixtures();
        let pip = problem_graph_of(&fx.g, &fx.tg);
        let s = random_split(&pip, &fx.tg, "g", &GenericConfig::default(), &mut Decider::from_seed(1));
        assert_eq!(s.part1, pip);
        assert_eq!(s.part2, pip);
        let out = generic_crossover(&pip, &pip, &fx.tg, &GenericConfig::default(), Decider::from_seed(1)).unwrap();
        assert_eq!(out.offspring1, pip);
        assert_eq!(out.offspring2, pip);
    }

    #[test]
    fn all_both_split_is_identity() {
        let fx = cra::fixtures();
        let cfg = GenericConfig { p_part1_only: 0.0, p_part2_only: 0.0, p_both: 1.0, ..Default::default() };
        let s = random_split(&fx.g, &fx.tg, "g", &cfg, &mut Decider::from_seed(4));
        assert_eq!(s.part1, fx.g);
        assert_eq!(s.part2, fx.g);
        assert_eq!(s.split_point, fx.g);
    }

    #[test]
    fn parts_cover_the_input() {
        let fx = cra::fixtures();
        for seed in 0..200 {
            let s = random_split(&fx.h, &fx.tg, "h", &GenericConfig::default(), &mut Decider::from_seed(seed));
            for (n, _) in fx.h.nodes() {
                assert!(s.part1.contains_node(n) || s.part2.contains_node(n));
            }
            for (e, _) in fx.h.edges() {
                assert!(s.part1.contains_edge(e) || s.part2.contains_edge(e));
            }
            for p in [&s.part1, &s.part2, &s.split_point] {
                assert!(same_search_space(p, &fx.h, &fx.tg));
                p.check_typing(&fx.tg).unwrap();
            }
        }
    }

    #[test]
    fn worked_example_splits() {
        let fx = cra::fixtures();
        let mut d = forced(&fx.generic_trace);
        let s = random_split(&fx.g, &fx.tg, "g", &GenericConfig::default(), &mut d);
        let (g1, g2, _, _, _) = cra::example2_split();
        assert!(!s.part1.contains_edge(fx.c1_f3));
        assert_eq!(s.part1, g1);
        assert_eq!(s.part2, g2);
    }

    #[test]
    fn worked_example_offspring() {
        let fx = cra::fixtures();
        let out =
            generic_crossover(&fx.g, &fx.h, &fx.tg, &GenericConfig::default(), forced(&fx.generic_trace)).unwrap();
        let (_, _, _, _, cp) = cra::example2_split();
        assert_eq!(out.cp, cp);
        assert!(isomorphic_over_problem(&out.offspring1, &fx.g1h2, &fx.tg));
        assert!(check_multiplicities(&out.offspring1, &fx.tg).unwrap().is_empty());

        let report = check_multiplicities(&out.offspring2, &fx.tg).unwrap();
        let lower: Vec<_> = report.lower().collect();
        let upper: Vec<_> = report.upper().collect();
        // an empty Class and a doubly assigned Feature
        assert_eq!(lower.len(), 1);
        assert_eq!(out.offspring2.node_type(lower[0].node), Some(cra::CLASS));
        assert_eq!(lower[0].observed, 0);
        assert_eq!(upper.len(), 1);
        assert_eq!(upper[0].node, fx.f2);
        assert_eq!((upper[0].observed, upper[0].kind), (2, BoundKind::Upper));
    }

    #[test]
    fn problem_only_point_count() {
        let fx = cra::fixtures();
        let cfg = GenericConfig {
            p_part1_only: 0.0,
            p_part2_only: 0.0,
            p_both: 1.0,
            p_identify_node: 0.0,
            p_identify_edge: 0.0,
        };
        let out = generic_crossover(&fx.g, &fx.h, &fx.tg, &cfg, Decider::from_seed(0)).unwrap();
        let pip = problem_graph_of(&fx.g, &fx.tg);
        assert_eq!(out.offspring1.node_count(), fx.g.node_count() + fx.h.node_count() - pip.node_count());
    }

    #[test]
    fn rejects_different_problems() {
        let fx = cra::fixtures();
        let mut other = fx.h.clone();
        other.remove_edge(EdgeId(1));
        let r = generic_crossover(&fx.g, &other, &fx.tg, &GenericConfig::default(), Decider::from_seed(0));
        assert_eq!(r.unwrap_err(), CrossoverError::SearchSpace);
    }

    #[test]
    fn replay_reproduces_offspring() {
        let fx = cra::fixtures();
        for seed in 0..50 {
            let a =
                generic_crossover(&fx.g, &fx.h, &fx.tg, &GenericConfig::default(), Decider::from_seed(seed)).unwrap();
            let b =
                generic_crossover(&fx.g, &fx.h, &fx.tg, &GenericConfig::default(), Decider::replay(&a.trace)).unwrap();
            assert_eq!(a.offspring1, b.offspring1);
            assert_eq!(a.offspring2, b.offspring2);
        }
    }
}
