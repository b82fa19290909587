use std::collections::{BTreeMap, BTreeSet};

use multicross::cra::{cra_fitness, random_problem, random_solution};
use multicross::graph::{
    check_multiplicities, isomorphic_over_problem, parse_instance, parse_type_graph, union_over_mapped, write_instance,
    write_type_graph, BoundKind, CrossoverPoint, Direction, EdgeId, InstanceGraph, NodeId, TypeGraph,
};
use multicross::secure::{check_conformance, check_non_worsening, secure_crossover_seeded, SecureConfig};
use multicross::synth::{perturb, random_type_graph, random_typed_graph, workable_type_graph};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Violations found by counting every edge from scratch.
fn brute_violations(g: &InstanceGraph, tg: &TypeGraph) -> BTreeSet<(NodeId, u32, Direction, BoundKind, usize)> {
    let mut out = BTreeSet::new();
    for (n, ty) in g.nodes() {
        for (t, et) in tg.edge_types() {
            for dir in Direction::BOTH {
                if et.end(dir) != ty {
                    continue;
                }
                let count = g.edges().filter(|(_, e)| e.ty == t && e.end(dir) == n).count();
                let m = tg.bound(t, dir);
                if count < m.lb as usize {
                    out.insert((n, t.0, dir, BoundKind::Lower, count));
                }
                if m.ub.is_some_and(|ub| count > ub as usize) {
                    out.insert((n, t.0, dir, BoundKind::Upper, count));
                }
            }
        }
    }
    out
}

/// `a` and `b` sharing a random common part `c`; `b` renames every element
/// of `c` by adding 1000.
fn overlapping_pair(seed: u64) -> (InstanceGraph, InstanceGraph, CrossoverPoint) {
    let mut r = rng(seed);
    let tg = random_type_graph(4, &mut r);
    let c = random_typed_graph(&tg, 5, &mut r);
    let mut a = c.clone();
    let mut b = InstanceGraph::new();
    let mut cp = CrossoverPoint { graph: c.clone(), ..Default::default() };
    for (n, t) in c.nodes() {
        b.add_node(NodeId(n.0 + 1000), t).unwrap();
        cp.nodes_a.insert(n, n);
        cp.nodes_b.insert(n, NodeId(n.0 + 1000));
    }
    for (id, e) in c.edges() {
        b.add_edge(EdgeId(id.0 + 1000), e.ty, NodeId(e.src.0 + 1000), NodeId(e.tar.0 + 1000)).unwrap();
        cp.edges_a.insert(id, id);
        cp.edges_b.insert(id, EdgeId(id.0 + 1000));
    }
    for g in [&mut a, &mut b] {
        let extra = random_typed_graph(&tg, 5, &mut r);
        let base = g.fresh_node_id().0;
        for (n, t) in extra.nodes() {
            g.add_node(NodeId(base + n.0), t).unwrap();
        }
        let nodes: Vec<(NodeId, _)> = g.nodes().collect();
        for (_, e) in extra.edges() {
            let ends: Vec<NodeId> = [e.src, e.tar]
                .iter()
                .map(|end| {
                    let ty = extra.node_type(*end).unwrap();
                    // reattach some extra edges to nodes of the common part
                    let same: Vec<NodeId> = nodes.iter().filter(|(_, t)| *t == ty).map(|(n, _)| *n).collect();
                    if r.gen_bool(0.5) {
                        NodeId(base + end.0)
                    } else {
                        *same.choose(&mut r).unwrap()
                    }
                })
                .collect();
            let id = g.fresh_edge_id();
            g.add_edge(id, e.ty, ends[0], ends[1]).unwrap();
        }
    }
    (a, b, cp)
}

fn relabel(g: &InstanceGraph, seed: u64) -> InstanceGraph {
    let mut r = rng(seed);
    let mut ids: Vec<u32> = (0..g.node_count() as u32 * 3 + 1).collect();
    ids.shuffle(&mut r);
    let map: BTreeMap<NodeId, NodeId> = g.node_ids().zip(ids.iter().map(|&i| NodeId(i))).collect();
    let mut out = InstanceGraph::new();
    for (n, t) in g.nodes() {
        out.add_node(map[&n], t).unwrap();
    }
    let mut eids: Vec<u32> = (0..g.edge_count() as u32 * 2 + 1).collect();
    eids.shuffle(&mut r);
    for ((_, e), id) in g.edges().zip(eids) {
        out.add_edge(EdgeId(id), e.ty, map[&e.src], map[&e.tar]).unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn multiplicity_check_matches_recount(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tg = random_type_graph(6, &mut r);
        let g = random_typed_graph(&tg, 12, &mut r);
        let report = check_multiplicities(&g, &tg).unwrap();
        let found: BTreeSet<_> =
            report.entries.iter().map(|v| (v.node, v.etype.0, v.dir, v.kind, v.observed)).collect();
        prop_assert_eq!(found.len(), report.len());
        prop_assert_eq!(found, brute_violations(&g, &tg));
    }

    #[test]
    fn union_is_a_pushout(seed in any::<u64>()) {
        let (a, b, cp) = overlapping_pair(seed);
        let u = union_over_mapped(&a, &b, &cp).unwrap();
        let g = &u.graph;
        prop_assert_eq!(g.node_count(), a.node_count() + b.node_count() - cp.graph.node_count());
        prop_assert_eq!(g.edge_count(), a.edge_count() + b.edge_count() - cp.graph.edge_count());
        // a sits in the union unchanged
        for (n, t) in a.nodes() {
            prop_assert_eq!(g.node_type(n), Some(t));
        }
        for (id, e) in a.edges() {
            prop_assert_eq!(g.edge(id), Some(e));
        }
        // b's elements land on images that respect edges, and shared ones
        // land on their a counterpart
        for (id, e) in b.edges() {
            let img = g.edge(u.b_edges[&id]).unwrap();
            prop_assert_eq!(img.ty, e.ty);
            prop_assert_eq!(img.src, u.b_nodes[&e.src]);
            prop_assert_eq!(img.tar, u.b_nodes[&e.tar]);
        }
        for (c, na) in &cp.nodes_a {
            prop_assert_eq!(u.b_nodes[&cp.nodes_b[c]], *na);
        }
    }

    #[test]
    fn union_is_symmetric(seed in any::<u64>()) {
        let (a, b, cp) = overlapping_pair(seed);
        let u1 = union_over_mapped(&a, &b, &cp).unwrap();
        let u2 = union_over_mapped(&b, &a, &cp.swapped()).unwrap();
        // the canonical maps of both unions induce a bijection u1 -> u2
        let mut nodes: BTreeMap<NodeId, NodeId> = BTreeMap::new();
        for n in a.node_ids() {
            nodes.insert(n, u2.b_nodes[&n]);
        }
        for n in b.node_ids() {
            let prev = nodes.insert(u1.b_nodes[&n], n);
            prop_assert!(prev.is_none_or(|p| p == n));
        }
        prop_assert_eq!(nodes.len(), u1.graph.node_count());
        prop_assert_eq!(nodes.values().collect::<BTreeSet<_>>().len(), u2.graph.node_count());
        let mut edges: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
        for e in a.edge_ids() {
            edges.insert(e, u2.b_edges[&e]);
        }
        for e in b.edge_ids() {
            edges.insert(u1.b_edges[&e], e);
        }
        prop_assert_eq!(edges.len(), u2.graph.edge_count());
        for (e1, e2) in edges {
            let (x, y) = (u1.graph.edge(e1).unwrap(), u2.graph.edge(e2).unwrap());
            prop_assert_eq!(x.ty, y.ty);
            prop_assert_eq!(nodes[&x.src], y.src);
            prop_assert_eq!(nodes[&x.tar], y.tar);
        }
    }

    #[test]
    fn instance_and_type_graph_files_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tg = random_type_graph(6, &mut r);
        let g = random_typed_graph(&tg, 20, &mut r);
        let text = write_instance(&g, "t.typegraph");
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back.graph, &g);
        prop_assert_eq!(back.typegraph, "t.typegraph");
        prop_assert_eq!(write_instance(&back.graph, "t.typegraph"), text);
        let tg_text = write_type_graph(&tg);
        let tg_back = parse_type_graph(&tg_text).unwrap();
        prop_assert_eq!(write_type_graph(&tg_back), tg_text);
        prop_assert_eq!(tg_back, tg);
    }

    #[test]
    fn cra_fitness_ignores_labels(seed in any::<u64>(), features in 1usize..25) {
        let mut r = rng(seed);
        let p = random_problem(features, 0.2, &mut r);
        let g = random_solution(&p, &mut r);
        let h = relabel(&g, seed ^ 1);
        prop_assert_eq!(cra_fitness(&g), cra_fitness(&h));
    }

    #[test]
    fn secure_offspring_of_feasible_parents_is_feasible(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (tg, g, h) = workable_type_graph(6, 20, &mut r);
        let out = secure_crossover_seeded(&g, &h, &tg, &SecureConfig::default(), seed).unwrap();
        let report = check_multiplicities(&out.offspring, &tg).unwrap();
        prop_assert!(report.is_empty(), "{}", report);
        prop_assert!(check_conformance(&g, &h, &tg, &out).is_ok());
        prop_assert!(out.max_visits() <= 3);
    }

    #[test]
    fn secure_offspring_never_worsens(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (tg, g, h) = workable_type_graph(6, 20, &mut r);
        let (g, h) = (perturb(&g, &tg, &mut r), perturb(&h, &tg, &mut r));
        let out = secure_crossover_seeded(&g, &h, &tg, &SecureConfig::default(), seed).unwrap();
        let failures = check_non_worsening(&g, &h, &tg, &out);
        prop_assert!(failures.is_empty(), "{:?}", failures);
    }

    #[test]
    fn declining_every_draw_returns_gsub(seed in any::<u64>()) {
        // nothing from h is taken, so the offspring is gsub, which keeps
        // every node of g
        let mut r = rng(seed);
        let (tg, g, h) = workable_type_graph(6, 20, &mut r);
        let cfg = SecureConfig {
            p_node_gsub: 1.0,
            p_node_hsub: 0.0,
            p_edge_hsub: 0.0,
            p_swap: 0.0,
            p_node_cp: 0.0,
            p_edge_cp: 0.0,
            p_free_node_cp: 0.0,
            compute_second_offspring: false,
        };
        let out = secure_crossover_seeded(&g, &h, &tg, &cfg, seed).unwrap();
        prop_assert!(isomorphic_over_problem(&out.offspring, &out.gsub, &tg));
        prop_assert_eq!(out.gsub.node_count(), g.node_count());
    }
}
