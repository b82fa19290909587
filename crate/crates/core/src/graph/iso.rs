use std::collections::{BTreeMap, BTreeSet};

use super::{Direction, EdgeTypeId, InstanceGraph, NodeId, NodeTypeId, TypeGraph};

type Signature = BTreeMap<(EdgeTypeId, bool), usize>;

/// Isomorphism test for two solutions of the same problem instance: problem
/// elements must coincide by ID, and the remaining nodes are matched by a
/// backtracking search. Intended for small graphs.
pub fn isomorphic_over_problem(a: &InstanceGraph, b: &InstanceGraph, tg: &TypeGraph) -> bool {
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let mut map: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut free_a = Vec::new();
    let mut free_b: BTreeMap<NodeTypeId, Vec<NodeId>> = BTreeMap::new();
    for (n, ty) in a.nodes() {
        if tg.is_problem_node_type(ty) {
            if b.node_type(n) != Some(ty) {
                return false;
            }
            map.insert(n, n);
        } else {
            free_a.push(n);
        }
    }
    for (n, ty) in b.nodes() {
        if tg.is_problem_node_type(ty) {
            if a.node_type(n) != Some(ty) {
                return false;
            }
        } else {
            free_b.entry(ty).or_default().push(n);
        }
    }
    if free_a.len() != free_b.values().map(Vec::len).sum::<usize>() {
        return false;
    }
    let sig_a: BTreeMap<NodeId, Signature> = a.node_ids().map(|n| (n, signature(a, n))).collect();
    let sig_b: BTreeMap<NodeId, Signature> = b.node_ids().map(|n| (n, signature(b, n))).collect();
    // problem nodes are their own images
    let mut used: BTreeSet<NodeId> = map.values().copied().collect();
    search(a, b, &free_a, 0, &free_b, &sig_a, &sig_b, &mut map, &mut used) && edges_match(a, b, &map)
}

fn signature(g: &InstanceGraph, n: NodeId) -> Signature {
    let mut s = Signature::new();
    for e in g.edges_at(n, Direction::Src) {
        *s.entry((g.edge(e).unwrap().ty, true)).or_default() += 1;
    }
    for e in g.edges_at(n, Direction::Tar) {
        *s.entry((g.edge(e).unwrap().ty, false)).or_default() += 1;
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Other {
    Loop,
    Mapped(NodeId),
}

/// Edges between `x` and already-placed nodes, keyed by (type, other
/// endpoint, direction at `x`). `place` returns the b-side name of a placed
/// node, or `None` when the node is not placed yet.
fn link_profile(
    g: &InstanceGraph,
    x: NodeId,
    place: impl Fn(NodeId) -> Option<NodeId>,
) -> BTreeMap<(EdgeTypeId, Other, Direction), usize> {
    let mut p = BTreeMap::new();
    for dir in Direction::BOTH {
        for e in g.edges_at(x, dir) {
            let edge = g.edge(e).expect("indexed");
            let other = edge.end(dir.opposite());
            let key = if other == x {
                Other::Loop
            } else {
                match place(other) {
                    Some(o) => Other::Mapped(o),
                    None => continue,
                }
            };
            *p.entry((edge.ty, key, dir)).or_default() += 1;
        }
    }
    p
}

#[allow(clippy::too_many_arguments)]
fn search(
    a: &InstanceGraph,
    b: &InstanceGraph,
    order: &[NodeId],
    idx: usize,
    free_b: &BTreeMap<NodeTypeId, Vec<NodeId>>,
    sig_a: &BTreeMap<NodeId, Signature>,
    sig_b: &BTreeMap<NodeId, Signature>,
    map: &mut BTreeMap<NodeId, NodeId>,
    used: &mut BTreeSet<NodeId>,
) -> bool {
    let Some(&x) = order.get(idx) else { return true };
    let ty = a.node_type(x).unwrap();
    let Some(cands) = free_b.get(&ty) else { return false };
    let want = link_profile(a, x, |o| map.get(&o).copied());
    for &y in cands {
        if used.contains(&y) || sig_a[&x] != sig_b[&y] {
            continue;
        }
        let have = link_profile(b, y, |o| used.contains(&o).then_some(o));
        if have != want {
            continue;
        }
        map.insert(x, y);
        used.insert(y);
        if search(a, b, order, idx + 1, free_b, sig_a, sig_b, map, used) {
            return true;
        }
        map.remove(&x);
        used.remove(&y);
    }
    false
}

fn edges_match(a: &InstanceGraph, b: &InstanceGraph, map: &BTreeMap<NodeId, NodeId>) -> bool {
    let mut ca: BTreeMap<(EdgeTypeId, NodeId, NodeId), usize> = BTreeMap::new();
    for (_, e) in a.edges() {
        *ca.entry((e.ty, map[&e.src], map[&e.tar])).or_default() += 1;
    }
    let mut cb: BTreeMap<(EdgeTypeId, NodeId, NodeId), usize> = BTreeMap::new();
    for (_, e) in b.edges() {
        *cb.entry((e.ty, e.src, e.tar)).or_default() += 1;
    }
    ca == cb
}
