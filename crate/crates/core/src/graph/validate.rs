use std::fmt;

use super::{Direction, EdgeTypeId, InstanceGraph, NodeId, Result, TypeGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundKind {
    Lower,
    Upper,
}

/// One missed bound: `observed` edges of `etype` sit at `node` in direction
/// `dir`, but the multiplicity requires at least (or at most) `required`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub node: NodeId,
    pub etype: EdgeTypeId,
    pub dir: Direction,
    pub observed: usize,
    pub kind: BoundKind,
    pub required: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ViolationReport {
    pub entries: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn lower(&self) -> impl Iterator<Item = &Violation> {
        self.entries.iter().filter(|v| v.kind == BoundKind::Lower)
    }

    pub fn upper(&self) -> impl Iterator<Item = &Violation> {
        self.entries.iter().filter(|v| v.kind == BoundKind::Upper)
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.entries {
            let (kind, op) = match v.kind {
                BoundKind::Lower => ("lower", ">="),
                BoundKind::Upper => ("upper", "<="),
            };
            writeln!(
                f,
                "violation node={} etype={} dir={} observed={} {kind} bound: required {op} {}",
                v.node.0, v.etype.0, v.dir, v.observed, v.required
            )?;
        }
        write!(f, "{} violations", self.entries.len())
    }
}

/// Collects every (node, edge type, direction) whose incident-edge count
/// misses its multiplicity. Outgoing edges are checked against `m_tar`,
/// incoming edges against `m_src`.
pub fn check_multiplicities(g: &InstanceGraph, tg: &TypeGraph) -> Result<ViolationReport> {
    g.check_typing(tg)?;
    let mut entries = Vec::new();
    for (node, ntype) in g.nodes() {
        for dir in Direction::BOTH {
            for etype in tg.incident_types(ntype, dir) {
                let m = tg.bound(etype, dir);
                let observed = g.count_at(node, etype, dir);
                if observed < m.lb as usize {
                    entries.push(Violation { node, etype, dir, observed, kind: BoundKind::Lower, required: m.lb });
                } else if let Some(ub) = m.ub.filter(|&ub| observed > ub as usize) {
                    entries.push(Violation { node, etype, dir, observed, kind: BoundKind::Upper, required: ub });
                }
            }
        }
    }
    Ok(ViolationReport { entries })
}

/// Induced subgraph of problem-typed elements, IDs preserved.
pub fn problem_graph_of(g: &InstanceGraph, tg: &TypeGraph) -> InstanceGraph {
    let mut p = InstanceGraph::new();
    for (id, ty) in g.nodes() {
        if tg.is_problem_node_type(ty) {
            p.add_node(id, ty).expect("unique ids");
        }
    }
    for (id, e) in g.edges() {
        if tg.is_problem_edge_type(e.ty) && p.contains_node(e.src) && p.contains_node(e.tar) {
            p.add_edge(id, e.ty, e.src, e.tar).expect("endpoints present");
        }
    }
    p
}

/// True iff both graphs carry element-for-element identical problem graphs.
pub fn same_search_space(g: &InstanceGraph, h: &InstanceGraph, tg: &TypeGraph) -> bool {
    problem_graph_of(g, tg) == problem_graph_of(h, tg)
}

/// Problem nodes of `h` with an incident edge whose other endpoint is not a
/// node of `pip`, ascending.
pub fn border(pip: &InstanceGraph, h: &InstanceGraph) -> Vec<NodeId> {
    pip.node_ids()
        .filter(|&x| {
            Direction::BOTH.iter().any(|&dir| {
                h.edges_at(x, dir).any(|e| !pip.contains_node(h.edge(e).expect("indexed").end(dir.opposite())))
            })
        })
        .collect()
}
