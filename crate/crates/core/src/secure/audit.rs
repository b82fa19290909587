//! Structural and bound checks on a finished secure crossover run.

use super::SecureOutcome;
use crate::graph::{problem_graph_of, Direction, InstanceGraph, TypeGraph};

fn is_subgraph(sub: &InstanceGraph, of: &InstanceGraph) -> bool {
    sub.nodes().all(|(n, ty)| of.node_type(n) == Some(ty)) && sub.edges().all(|(e, edge)| of.edge(e) == Some(edge))
}

/// Checks that the run is an instance of generic crossover: `gsub` and
/// `hsub` are subgraphs of their parents containing the problem graph, the
/// crossover point embeds into both, and the offspring carries exactly the
/// parents' problem graph.
pub fn check_conformance(
    g: &InstanceGraph,
    h: &InstanceGraph,
    tg: &TypeGraph,
    out: &SecureOutcome,
) -> Result<(), String> {
    let pip = problem_graph_of(g, tg);
    if !is_subgraph(&out.gsub, g) {
        return Err("gsub is not a subgraph of g".into());
    }
    if !is_subgraph(&out.hsub, h) {
        return Err("hsub is not a subgraph of h".into());
    }
    for (name, part) in [("gsub", &out.gsub), ("hsub", &out.hsub), ("crossover point", &out.cp.graph)] {
        if !is_subgraph(&pip, part) {
            return Err(format!("{name} does not contain the problem graph"));
        }
    }
    out.cp.validate(&out.gsub, &out.hsub).map_err(|e| e.to_string())?;
    for n in pip.node_ids() {
        if out.cp.nodes_a.get(&n) != Some(&n) || out.cp.nodes_b.get(&n) != Some(&n) {
            return Err(format!("problem node {n} is not mapped identically"));
        }
    }
    if problem_graph_of(&out.offspring, tg) != pip {
        return Err("offspring problem graph differs from the parents'".into());
    }
    out.offspring.check_typing(tg).map_err(|e| e.to_string())?;
    Ok(())
}

/// Checks every offspring node against its parent nodes: at least
/// `min(lb, parent count)` and at most `max(ub, parent count)` edges per
/// edge type and direction, where the parent is the `g` node if there is
/// one and the `h` node otherwise. Returns one line per failure.
pub fn check_non_worsening(g: &InstanceGraph, h: &InstanceGraph, tg: &TypeGraph, out: &SecureOutcome) -> Vec<String> {
    let mut failures = Vec::new();
    for (n, ty) in out.offspring.nodes() {
        let Some(origin) = out.origins.get(&n) else {
            failures.push(format!("offspring node {n} has no origin"));
            continue;
        };
        let (parent, p) = match (origin.g, origin.h) {
            (Some(x), _) => (g, x),
            (None, Some(x)) => (h, x),
            (None, None) => {
                failures.push(format!("offspring node {n} has no origin"));
                continue;
            }
        };
        for dir in Direction::BOTH {
            for t in tg.incident_types(ty, dir) {
                let m = tg.bound(t, dir);
                let have = out.offspring.count_at(n, t, dir);
                let before = parent.count_at(p, t, dir);
                let lo = (m.lb as usize).min(before);
                let hi = m.ub_count().max(before);
                if have < lo || have > hi {
                    failures.push(format!(
                        "node {n} type {t} {dir}: {have} edges, allowed [{lo},{}]",
                        if hi == usize::MAX { "*".to_string() } else { hi.to_string() }
                    ));
                }
            }
        }
    }
    failures
}
