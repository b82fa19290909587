//! Random type graphs and instances for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{
    check_multiplicities, problem_graph_of, Direction, EdgeType, EdgeTypeId, InstanceGraph, Multiplicity, NodeId,
    NodeTypeId, TypeGraph,
};

/// Bounds used for solution edge types.
pub const BOUND_POOL: [Multiplicity; 6] = [
    Multiplicity::at_least(0),
    Multiplicity::bounded(0, 1),
    Multiplicity::bounded(1, 1),
    Multiplicity::at_least(1),
    Multiplicity::bounded(1, 2),
    Multiplicity::bounded(2, 3),
];

/// A type graph with 2 to `max_node_types` node types (1 or 2 of them
/// problem types), problem edge types bounded `[0,*]`, and solution edge
/// types whose bounds are drawn from [`BOUND_POOL`].
pub fn random_type_graph(max_node_types: usize, rng: &mut impl Rng) -> TypeGraph {
    let k = rng.gen_range(2..=max_node_types.max(2));
    let problem = rng.gen_range(1..=2.min(k - 1));
    let mut tg = TypeGraph::new();
    for i in 0..k {
        let p = i < problem;
        tg.add_node_type(NodeTypeId(i as u32), format!("{}{i}", if p { "P" } else { "S" }), p).unwrap();
    }
    let mut next = 0u32;
    for _ in 0..rng.gen_range(0..=problem) {
        let src = NodeTypeId(rng.gen_range(0..problem) as u32);
        let tar = NodeTypeId(rng.gen_range(0..problem) as u32);
        let ty = EdgeType {
            name: format!("p{next}"),
            src,
            tar,
            m_src: Multiplicity::ANY,
            m_tar: Multiplicity::ANY,
            problem: true,
        };
        tg.add_edge_type(EdgeTypeId(next), ty).unwrap();
        next += 1;
    }
    // every solution node type gets at least one edge type
    for s in problem..k {
        let other = NodeTypeId(rng.gen_range(0..k) as u32);
        let me = NodeTypeId(s as u32);
        let (src, tar) = if rng.gen_bool(0.5) { (me, other) } else { (other, me) };
        add_solution_edge_type(&mut tg, &mut next, src, tar, rng);
    }
    for _ in 0..rng.gen_range(0..=k) {
        let src = NodeTypeId(rng.gen_range(0..k) as u32);
        let tar = NodeTypeId(rng.gen_range(0..k) as u32);
        add_solution_edge_type(&mut tg, &mut next, src, tar, rng);
    }
    tg
}

fn add_solution_edge_type(tg: &mut TypeGraph, next: &mut u32, src: NodeTypeId, tar: NodeTypeId, rng: &mut impl Rng) {
    let ty = EdgeType {
        name: format!("s{next}"),
        src,
        tar,
        m_src: *BOUND_POOL.choose(rng).unwrap(),
        m_tar: *BOUND_POOL.choose(rng).unwrap(),
        problem: false,
    };
    tg.add_edge_type(EdgeTypeId(*next), ty).unwrap();
    *next += 1;
}

/// A problem graph with 1 to `max_per_type` nodes per problem node type and
/// random problem edges.
pub fn random_problem_graph(tg: &TypeGraph, max_per_type: usize, rng: &mut impl Rng) -> InstanceGraph {
    let mut g = InstanceGraph::new();
    let mut id = 0u32;
    for (t, nt) in tg.node_types() {
        if nt.problem {
            for _ in 0..rng.gen_range(1..=max_per_type.max(1)) {
                g.add_node(NodeId(id), t).unwrap();
                id += 1;
            }
        }
    }
    let problem_edges: Vec<(EdgeTypeId, EdgeType)> =
        tg.edge_types().filter(|(_, t)| t.problem).map(|(i, t)| (i, t.clone())).collect();
    for (et, t) in problem_edges {
        let srcs = nodes_of(&g, t.src);
        let tars = nodes_of(&g, t.tar);
        for _ in 0..rng.gen_range(0..=2) {
            let (s, d) = (*srcs.choose(rng).unwrap(), *tars.choose(rng).unwrap());
            let e = g.fresh_edge_id();
            g.add_edge(e, et, s, d).unwrap();
        }
    }
    g
}

fn nodes_of(g: &InstanceGraph, t: NodeTypeId) -> Vec<NodeId> {
    g.nodes().filter(|(_, nt)| *nt == t).map(|(n, _)| n).collect()
}

fn spare(g: &InstanceGraph, tg: &TypeGraph, n: NodeId, t: EdgeTypeId, dir: Direction) -> bool {
    g.count_at(n, t, dir) < tg.bound(t, dir).ub_count()
}

/// First (node, edge type, direction) below its lower bound, if any.
fn first_deficit(g: &InstanceGraph, tg: &TypeGraph) -> Option<(NodeId, EdgeTypeId, Direction)> {
    for (n, ty) in g.nodes() {
        for dir in Direction::BOTH {
            for t in tg.incident_types(ty, dir) {
                if g.count_at(n, t, dir) < tg.bound(t, dir).lb as usize {
                    return Some((n, t, dir));
                }
            }
        }
    }
    None
}

/// Extends `pip` by solution elements until every multiplicity holds, with
/// at most `max_nodes` nodes in total. Gives up (returning `None`) when the
/// lower bounds cannot be met within that size.
pub fn complete_feasible(
    tg: &TypeGraph,
    pip: &InstanceGraph,
    max_nodes: usize,
    rng: &mut impl Rng,
) -> Option<InstanceGraph> {
    let mut g = pip.clone();
    let solution_types: Vec<NodeTypeId> = tg.node_types().filter(|(_, t)| !t.problem).map(|(i, _)| i).collect();
    for &t in &solution_types {
        for _ in 0..rng.gen_range(0..=2) {
            if g.node_count() < max_nodes {
                let n = g.fresh_node_id();
                g.add_node(n, t).unwrap();
            }
        }
    }
    let solution_edges: Vec<(EdgeTypeId, NodeTypeId, NodeTypeId)> =
        tg.edge_types().filter(|(_, t)| !t.problem).map(|(i, t)| (i, t.src, t.tar)).collect();
    for _ in 0..rng.gen_range(0..=g.node_count()) {
        let Some(&(et, st, tt)) = solution_edges.choose(rng) else { break };
        let srcs: Vec<_> = nodes_of(&g, st).into_iter().filter(|&n| spare(&g, tg, n, et, Direction::Src)).collect();
        let tars: Vec<_> = nodes_of(&g, tt).into_iter().filter(|&n| spare(&g, tg, n, et, Direction::Tar)).collect();
        if let (Some(&s), Some(&d)) = (srcs.choose(rng), tars.choose(rng)) {
            let e = g.fresh_edge_id();
            g.add_edge(e, et, s, d).unwrap();
        }
    }
    for _ in 0..4 * max_nodes + 20 {
        let Some((n, t, dir)) = first_deficit(&g, tg) else {
            debug_assert!(check_multiplicities(&g, tg).unwrap().is_empty());
            return Some(g);
        };
        let et = tg.edge_type(t).unwrap();
        let far_type = et.end(dir.opposite());
        let far: Vec<NodeId> =
            nodes_of(&g, far_type).into_iter().filter(|&u| u != n && spare(&g, tg, u, t, dir.opposite())).collect();
        let can_create = !tg.is_problem_node_type(far_type) && g.node_count() < max_nodes;
        let u = match far.choose(rng) {
            Some(&u) if !can_create || rng.gen_bool(0.7) => u,
            _ if can_create => {
                let u = g.fresh_node_id();
                g.add_node(u, far_type).unwrap();
                u
            }
            _ => return None,
        };
        let e = g.fresh_edge_id();
        match dir {
            Direction::Src => g.add_edge(e, t, n, u).unwrap(),
            Direction::Tar => g.add_edge(e, t, u, n).unwrap(),
        }
    }
    None
}

/// Two feasible solutions of one random problem graph, each with at most
/// `max_nodes` nodes.
pub fn feasible_pair(tg: &TypeGraph, max_nodes: usize, rng: &mut impl Rng) -> Option<(InstanceGraph, InstanceGraph)> {
    for _ in 0..20 {
        let pip = random_problem_graph(tg, 3, rng);
        let Some(g) = complete_feasible(tg, &pip, max_nodes, rng) else { continue };
        let Some(h) = complete_feasible(tg, &pip, max_nodes, rng) else { continue };
        return Some((g, h));
    }
    None
}

/// A random type graph for which [`feasible_pair`] succeeds, with one such
/// pair.
pub fn workable_type_graph(
    max_node_types: usize,
    max_nodes: usize,
    rng: &mut impl Rng,
) -> (TypeGraph, InstanceGraph, InstanceGraph) {
    loop {
        let tg = random_type_graph(max_node_types, rng);
        if let Some((g, h)) = feasible_pair(&tg, max_nodes, rng) {
            return (tg, g, h);
        }
    }
}

/// Damages `g` without touching its problem graph: removes some solution
/// edges and adds some well-typed edges regardless of the bounds.
pub fn perturb(g: &InstanceGraph, tg: &TypeGraph, rng: &mut impl Rng) -> InstanceGraph {
    let mut out = g.clone();
    let removable: Vec<_> = out.edges().filter(|(_, e)| !tg.is_problem_edge_type(e.ty)).map(|(id, _)| id).collect();
    for e in removable {
        if rng.gen_bool(0.25) {
            out.remove_edge(e);
        }
    }
    let solution_edges: Vec<(EdgeTypeId, NodeTypeId, NodeTypeId)> =
        tg.edge_types().filter(|(_, t)| !t.problem).map(|(i, t)| (i, t.src, t.tar)).collect();
    for _ in 0..rng.gen_range(1..=4) {
        let Some(&(et, st, tt)) = solution_edges.choose(rng) else { break };
        let srcs = nodes_of(&out, st);
        let tars = nodes_of(&out, tt);
        if let (Some(&s), Some(&d)) = (srcs.choose(rng), tars.choose(rng)) {
            let e = out.fresh_edge_id();
            out.add_edge(e, et, s, d).unwrap();
        }
    }
    debug_assert_eq!(problem_graph_of(&out, tg), problem_graph_of(g, tg));
    out
}

/// Any well-typed graph over `tg` with at most `max_nodes` nodes; bounds
/// are ignored.
pub fn random_typed_graph(tg: &TypeGraph, max_nodes: usize, rng: &mut impl Rng) -> InstanceGraph {
    let types: Vec<NodeTypeId> = tg.node_types().map(|(i, _)| i).collect();
    let mut g = InstanceGraph::new();
    for i in 0..rng.gen_range(0..=max_nodes) {
        g.add_node(NodeId(i as u32), *types.choose(rng).unwrap()).unwrap();
    }
    let edge_types: Vec<(EdgeTypeId, NodeTypeId, NodeTypeId)> =
        tg.edge_types().map(|(i, t)| (i, t.src, t.tar)).collect();
    for _ in 0..rng.gen_range(0..=2 * g.node_count()) {
        let Some(&(et, st, tt)) = edge_types.choose(rng) else { break };
        let (srcs, tars) = (nodes_of(&g, st), nodes_of(&g, tt));
        if let (Some(&s), Some(&d)) = (srcs.choose(rng), tars.choose(rng)) {
            let e = g.fresh_edge_id();
            g.add_edge(e, et, s, d).unwrap();
        }
    }
    g
}
