use std::collections::{BTreeSet, VecDeque};

use super::{CrossoverState, SecureConfig};
use crate::graph::{Direction, NodeId};
use crate::trace::Decider;

/// Builds `gsub`: every node of `g` is kept with probability `p_node_gsub`
/// (problem nodes always), and each kept node gets enough adjacent edges
/// to meet `min(lb, available)` for every edge type and direction.
pub fn create_gsub(state: &mut CrossoverState<'_>, cfg: &SecureConfig, d: &mut Decider) {
    let g = state.g;
    let mut processed = BTreeSet::new();
    let mut backlog = VecDeque::new();
    for x in g.node_ids() {
        if !state.gsub_nodes.contains(&x) {
            if !d.flip(&format!("gsub.include:{}", x.0), cfg.p_node_gsub) {
                continue;
            }
            state.gsub_nodes.insert(x);
        }
        processed.insert(x);
        for added in include_adjacent_edges(state, x, d) {
            if added < x {
                backlog.push_back(added);
            }
        }
    }
    // nodes pulled in after their turn in the main pass
    while let Some(x) = backlog.pop_front() {
        if !processed.insert(x) {
            continue;
        }
        backlog.extend(include_adjacent_edges(state, x, d));
    }
}

/// Includes a uniformly drawn number `n` of edges per solution edge type and
/// direction at `x`, with `n` between `min(lb, available)` and
/// `min(ub, available)`; edges already in `gsub` count towards `n`. Returns
/// the far endpoints that were newly added to `gsub`.
pub fn include_adjacent_edges(state: &mut CrossoverState<'_>, x: NodeId, d: &mut Decider) -> Vec<NodeId> {
    let (g, tg) = (state.g, state.tg);
    let ty = g.node_type(x).expect("node of g");
    let mut added = Vec::new();
    for dir in Direction::BOTH {
        for t in tg.incident_types(ty, dir).collect::<Vec<_>>() {
            if tg.is_problem_edge_type(t) {
                continue;
            }
            let m = tg.bound(t, dir);
            let available = g.typed_edges_at(x, t, dir);
            let lo = (m.lb as usize).min(available.len());
            let hi = m.ub_count().min(available.len());
            let mut have = available.iter().filter(|e| state.gsub_edges.contains(e)).count();
            if have >= hi {
                continue;
            }
            let site = format!("{}:{}:{}", x.0, t.0, dir);
            let n = d.int_in(&format!("gsub.count:{site}"), lo as u64, hi as u64) as usize;
            while have < n {
                let open: Vec<u64> =
                    available.iter().filter(|e| !state.gsub_edges.contains(e)).map(|e| e.0 as u64).collect();
                let e = d.pick(&format!("gsub.pick:{site}"), &open).expect("n never exceeds the available edges");
                let e = crate::graph::EdgeId(e as u32);
                state.gsub_edges.insert(e);
                let y = g.edge(e).unwrap().end(dir.opposite());
                if state.gsub_nodes.insert(y) {
                    added.push(y);
                }
                have += 1;
            }
        }
    }
    added
}
