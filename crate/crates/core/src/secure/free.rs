use std::collections::BTreeSet;

use super::{CrossoverState, SecureConfig};
use crate::graph::{Direction, EdgeId, NodeId};
use crate::trace::Decider;

/// Gives every `h` node not decided on so far a chance to join `hsub`, and
/// makes every `hsub` node outside the crossover point either join it or
/// meet its minimum. Nodes that cannot meet their minimum are removed.
pub fn process_free_nodes(state: &mut CrossoverState<'_>, cfg: &SecureConfig, d: &mut Decider) {
    let h = state.h;
    let mut pending: BTreeSet<NodeId> = BTreeSet::new();
    state.queue.clear();
    for x in h.node_ids() {
        let undecided = !state.hsub_nodes.contains(&x) && !state.decided.contains(&x);
        if undecided || state.is_free(x) {
            state.queue.push_back(x);
            pending.insert(x);
        }
    }
    while let Some(x) = state.queue.pop_front() {
        pending.remove(&x);
        if state.dead.contains(&x) || state.in_cp(x) {
            continue;
        }
        state.visit(x);
        if !state.hsub_nodes.contains(&x) {
            if state.rejected.contains(&x) || !d.flip(&format!("free.include:{}", x.0), cfg.p_node_hsub) {
                state.rejected.insert(x);
                continue;
            }
            state.hsub_nodes.insert(x);
        }
        if try_free_node_to_cp(state, cfg, d, x) {
            let added = include_more_edges(state, cfg, d, x);
            enqueue(state, &mut pending, added);
        } else {
            let (ok, added) = ensure_minimum_free_node(state, x);
            enqueue(state, &mut pending, added);
            if ok {
                state.settled.insert(x);
            } else {
                state.cascade_remove(x);
            }
        }
    }
}

fn enqueue(state: &mut CrossoverState<'_>, pending: &mut BTreeSet<NodeId>, nodes: Vec<NodeId>) {
    for n in nodes {
        if pending.insert(n) {
            state.queue.push_back(n);
        }
    }
}

fn try_free_node_to_cp(state: &mut CrossoverState<'_>, cfg: &SecureConfig, d: &mut Decider, x: NodeId) -> bool {
    if !d.flip(&format!("free.to_cp:{}", x.0), cfg.p_free_node_cp) {
        return false;
    }
    let ty = state.h.node_type(x).unwrap();
    let cands: Vec<u64> = state
        .unpaired_gsub_nodes(ty)
        .into_iter()
        .filter(|&z| state.verify_inclusion(x, z))
        .map(|z| z.0 as u64)
        .collect();
    match d.pick(&format!("free.to_cp_pick:{}", x.0), &cands) {
        Some(z) => {
            state.pair_nodes(x, NodeId(z as u32));
            true
        }
        None => false,
    }
}

/// Can `e` join `hsub` without pushing a crossover node at either end past
/// its cap?
fn can_add(state: &CrossoverState<'_>, e: EdgeId) -> bool {
    let edge = state.h.edge(e).unwrap();
    Direction::BOTH.iter().all(|&dir| {
        let n = edge.end(dir);
        !state.in_cp(n) || state.fits(state.image_of_h(n), edge.ty, dir, 1)
    })
}

fn blocked(state: &CrossoverState<'_>, u: NodeId) -> bool {
    state.dead.contains(&u) || state.rejected.contains(&u)
}

/// Adds `e` and its endpoints to `hsub`; returns the endpoints that were
/// new.
fn add_edge(state: &mut CrossoverState<'_>, e: EdgeId) -> Vec<NodeId> {
    state.hsub_edges.insert(e);
    let edge = state.h.edge(e).unwrap();
    let mut added = Vec::new();
    for n in [edge.src, edge.tar] {
        if state.hsub_nodes.insert(n) {
            added.push(n);
        }
    }
    added
}

/// After `x` joined the crossover point, each further `h` edge at `x` joins
/// `hsub` with probability `p_edge_hsub` as long as no cap is exceeded.
pub fn include_more_edges(
    state: &mut CrossoverState<'_>,
    cfg: &SecureConfig,
    d: &mut Decider,
    x: NodeId,
) -> Vec<NodeId> {
    let h = state.h;
    let mut added = Vec::new();
    for e in h.incident_edges(x).collect::<Vec<_>>() {
        if state.hsub_edges.contains(&e) {
            continue;
        }
        let edge = h.edge(e).unwrap();
        if blocked(state, edge.src) || blocked(state, edge.tar) {
            continue;
        }
        if d.flip(&format!("free.more:{}", e.0), cfg.p_edge_hsub) && can_add(state, e) {
            added.extend(add_edge(state, e));
        }
    }
    added
}

/// Adds `h` edges at the free node `x`, in ID order, until every edge type
/// and direction reaches `min(lb, count in h)`. Edges that would push a
/// crossover node past its cap are passed over. Returns whether all targets
/// were met, and the nodes newly added to `hsub`.
pub fn ensure_minimum_free_node(state: &mut CrossoverState<'_>, x: NodeId) -> (bool, Vec<NodeId>) {
    let (h, tg) = (state.h, state.tg);
    let ty = h.node_type(x).unwrap();
    let mut added = Vec::new();
    for dir in Direction::BOTH {
        for t in tg.incident_types(ty, dir).collect::<Vec<_>>() {
            let target = state.h_floor(x, t, dir);
            let mut have = state.hsub_count(x, t, dir);
            for e in h.typed_edges_at(x, t, dir) {
                if have >= target {
                    break;
                }
                if state.hsub_edges.contains(&e) || blocked(state, h.edge(e).unwrap().end(dir.opposite())) {
                    continue;
                }
                if can_add(state, e) {
                    added.extend(add_edge(state, e));
                    have += 1;
                }
            }
            if have < target {
                return (false, added);
            }
        }
    }
    (true, added)
}
