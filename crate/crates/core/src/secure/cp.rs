use super::{CrossoverState, SecureConfig, Swap};
use crate::graph::{border, problem_graph_of, Direction, EdgeId, EdgeTypeId, NodeId};
use crate::trace::Decider;

fn ids<T: Copy>(v: &[T], f: impl Fn(T) -> u32) -> Vec<u64> {
    v.iter().map(|&x| f(x) as u64).collect()
}

/// Grows `hsub` and the crossover point breadth-first from the border of
/// the problem graph in `h`.
pub fn construct_cp(state: &mut CrossoverState<'_>, cfg: &SecureConfig, d: &mut Decider) {
    let (h, tg) = (state.h, state.tg);
    let pip = problem_graph_of(h, tg);
    state.queue = border(&pip, h).into();
    while let Some(x) = state.queue.pop_front() {
        state.visit(x);
        let ty = h.node_type(x).unwrap();
        for dir in Direction::BOTH {
            for t in tg.incident_types(ty, dir).collect::<Vec<_>>() {
                for e_h in h.typed_edges_at(x, t, dir) {
                    if !handle_edge(state, cfg, d, x, e_h, t, dir) {
                        break;
                    }
                }
            }
        }
    }
}

/// Treats one `h` edge at the crossover node `x`. Returns false when the
/// rest of this edge type at `x` is to be skipped.
fn handle_edge(
    state: &mut CrossoverState<'_>,
    cfg: &SecureConfig,
    d: &mut Decider,
    x: NodeId,
    e_h: EdgeId,
    t: EdgeTypeId,
    dir: Direction,
) -> bool {
    let y = state.h.edge(e_h).unwrap().end(dir.opposite());
    let site = e_h.0;
    let mut included_cp = false;
    if state.hsub_nodes.contains(&y) {
        if state.hsub_edges.contains(&e_h) {
            return true;
        }
        included_cp = state.in_cp(y);
    } else {
        state.decided.insert(y);
        if !d.flip(&format!("cp.node:{site}"), cfg.p_node_hsub) {
            return true;
        }
    }

    let edge_included = d.flip(&format!("cp.edge:{site}"), cfg.p_edge_hsub);
    let mut swapped = false;
    if edge_included {
        if included_cp && !state.fits(state.image_of_h(y), t, dir.opposite(), 1) {
            include_into_cp(state, d, x, y, e_h, t, dir);
            return true;
        }
        swapped = random_edge_swap(state, cfg, d, x, e_h, t, dir);
        if !swapped && !state.fits(state.image_of_h(x), t, dir, 1) && !resolve_breach(state, d, x, e_h, t, dir) {
            return false;
        }
        state.hsub_edges.insert(e_h);
    }
    state.hsub_nodes.insert(y);

    let now_cp = random_node_to_cp(state, cfg, d, y, e_h);
    if edge_included && now_cp && !swapped {
        random_edge_to_cp(state, cfg, d, x, y, e_h, t, dir);
    }
    true
}

/// Includes `e_h` by pairing it with a `gsub` edge between the partners of
/// `x` and `y`; without such an edge `e_h` stays out.
pub fn include_into_cp(
    state: &mut CrossoverState<'_>,
    d: &mut Decider,
    x: NodeId,
    y: NodeId,
    e_h: EdgeId,
    t: EdgeTypeId,
    dir: Direction,
) -> bool {
    let (Some(x_g), Some(y_g)) = (state.partner(x), state.partner(y)) else { return false };
    let cands = state.unpaired_gsub_edges(x_g, t, dir, Some(y_g));
    match d.pick(&format!("cp.into_cp_pick:{}", e_h.0), &ids(&cands, |e| e.0)) {
        Some(e_g) => {
            state.pair_edges(e_h, EdgeId(e_g as u32));
            true
        }
        None => false,
    }
}

/// Possibly removes a same-typed `gsub` edge at the partner of `x` so that
/// `e_h` can take its place. Only edges whose removal keeps the lower bound
/// at their far end are eligible.
pub fn random_edge_swap(
    state: &mut CrossoverState<'_>,
    cfg: &SecureConfig,
    d: &mut Decider,
    x: NodeId,
    e_h: EdgeId,
    t: EdgeTypeId,
    dir: Direction,
) -> bool {
    if !d.flip(&format!("cp.swap:{}", e_h.0), cfg.p_swap) {
        return false;
    }
    let Some(x_g) = state.partner(x) else { return false };
    let eh = state.h.edge(e_h).unwrap();
    if eh.src == eh.tar {
        return false;
    }
    let cands: Vec<EdgeId> = state
        .unpaired_gsub_edges(x_g, t, dir, None)
        .into_iter()
        .filter(|&e| {
            let w = state.g.edge(e).unwrap().end(dir.opposite());
            w != x_g && state.stable_count(w, t, dir.opposite()) > state.g_floor(w, t, dir.opposite())
        })
        .collect();
    let Some(e_g) = d.pick(&format!("cp.swap_pick:{}", e_h.0), &ids(&cands, |e| e.0)) else { return false };
    let e_g = EdgeId(e_g as u32);
    state.gsub_edges.remove(&e_g);
    state.swaps.insert(e_h, Swap { e_g, e_h, x_g, dir });
    true
}

/// Includes `e_h` without raising the count at `x` by identifying it with a
/// `gsub` edge at the partner of `x`: directly if `y` is already in the
/// crossover point, otherwise by merging `y` with a suitable far end `z`.
pub fn resolve_breach(
    state: &mut CrossoverState<'_>,
    d: &mut Decider,
    x: NodeId,
    e_h: EdgeId,
    t: EdgeTypeId,
    dir: Direction,
) -> bool {
    let y = state.h.edge(e_h).unwrap().end(dir.opposite());
    if state.in_cp(y) {
        return include_into_cp(state, d, x, y, e_h, t, dir);
    }
    let Some(x_g) = state.partner(x) else { return false };
    let mut zs: Vec<NodeId> = state
        .unpaired_gsub_edges(x_g, t, dir, None)
        .into_iter()
        .map(|e| state.g.edge(e).unwrap().end(dir.opposite()))
        .filter(|&z| !state.node_g2h.contains_key(&z) && state.verify_inclusion(y, z))
        .collect();
    zs.sort();
    zs.dedup();
    let Some(z) = d.pick(&format!("cp.breach_pick:{}", e_h.0), &ids(&zs, |n| n.0)) else { return false };
    let z = NodeId(z as u32);
    let e_g = state.unpaired_gsub_edges(x_g, t, dir, Some(z))[0];
    state.pair_nodes(y, z);
    state.pair_edges(e_h, e_g);
    state.queue.push_back(y);
    true
}

/// Possibly merges `y` with a `gsub` node of its type that passes
/// [`CrossoverState::verify_inclusion`]. Returns whether `y` ends up in the
/// crossover point.
pub fn random_node_to_cp(
    state: &mut CrossoverState<'_>,
    cfg: &SecureConfig,
    d: &mut Decider,
    y: NodeId,
    e_h: EdgeId,
) -> bool {
    if state.in_cp(y) {
        return true;
    }
    if !d.flip(&format!("cp.node_to_cp:{}", e_h.0), cfg.p_node_cp) {
        return false;
    }
    let ty = state.h.node_type(y).unwrap();
    let cands: Vec<NodeId> =
        state.unpaired_gsub_nodes(ty).into_iter().filter(|&z| state.verify_inclusion(y, z)).collect();
    let Some(z) = d.pick(&format!("cp.node_to_cp_pick:{}", e_h.0), &ids(&cands, |n| n.0)) else { return false };
    state.pair_nodes(y, NodeId(z as u32));
    state.queue.push_back(y);
    true
}

/// Possibly identifies the raw edge `e_h` with a `gsub` edge between the
/// partners of its endpoints.
#[allow(clippy::too_many_arguments)]
pub fn random_edge_to_cp(
    state: &mut CrossoverState<'_>,
    cfg: &SecureConfig,
    d: &mut Decider,
    x: NodeId,
    y: NodeId,
    e_h: EdgeId,
    t: EdgeTypeId,
    dir: Direction,
) {
    if state.edge_h2g.contains_key(&e_h) || state.swaps.contains_key(&e_h) {
        return;
    }
    let (Some(x_g), Some(y_g)) = (state.partner(x), state.partner(y)) else { return };
    let cands = state.unpaired_gsub_edges(x_g, t, dir, Some(y_g));
    if cands.is_empty() || !d.flip(&format!("cp.edge_to_cp:{}", e_h.0), cfg.p_edge_cp) {
        return;
    }
    if let Some(e_g) = d.pick(&format!("cp.edge_to_cp_pick:{}", e_h.0), &ids(&cands, |e| e.0)) {
        state.pair_edges(e_h, EdgeId(e_g as u32));
    }
}
