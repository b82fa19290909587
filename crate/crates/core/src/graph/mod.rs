//! Typed graphs with edge multiplicities.
//!
//! A [`TypeGraph`] fixes the available node and edge types, marks the problem
//! part of the type graph and carries the source/target multiplicities of
//! every edge type. An [`InstanceGraph`] is a graph typed over it. Problem
//! elements are recognized by their type alone.

mod format;
mod iso;
mod union;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use format::{parse_instance, parse_type_graph, write_instance, write_type_graph, InstanceFile};
pub use iso::isomorphic_over_problem;
pub use union::{union_over, union_over_mapped, CrossoverPoint, Union};
pub use validate::{
    border, check_multiplicities, problem_graph_of, same_search_space, BoundKind, Violation, ViolationReport,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("unknown node type {0}")]
    UnknownNodeType(NodeTypeId),
    #[error("unknown edge type {0}")]
    UnknownEdgeType(EdgeTypeId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(EdgeId),
    #[error("edge {0} is not typed consistently with its endpoints")]
    Typing(EdgeId),
    #[error("invalid type graph: {0}")]
    TypeGraph(String),
    #[error("invalid crossover point: {0}")]
    CrossoverPoint(String),
}

pub type Result<T> = std::result::Result<T, GraphError>;

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(NodeId, "n");
id_type!(EdgeId, "e");
id_type!(NodeTypeId, "N");
id_type!(EdgeTypeId, "E");

/// A multiplicity `[lb, ub]`; `ub == None` is the unbounded `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Multiplicity {
    pub lb: u32,
    pub ub: Option<u32>,
}

impl Multiplicity {
    pub const ANY: Multiplicity = Multiplicity { lb: 0, ub: None };

    pub fn new(lb: u32, ub: Option<u32>) -> Result<Self> {
        match ub {
            Some(ub) if ub < lb => {
                Err(GraphError::TypeGraph(format!("multiplicity [{lb},{ub}] has upper bound below lower bound")))
            }
            _ => Ok(Self { lb, ub }),
        }
    }

    pub const fn bounded(lb: u32, ub: u32) -> Self {
        Self { lb, ub: Some(ub) }
    }

    pub const fn at_least(lb: u32) -> Self {
        Self { lb, ub: None }
    }

    pub fn satisfies(&self, n: usize) -> bool {
        n >= self.lb as usize && self.ub.is_none_or(|ub| n <= ub as usize)
    }

    pub fn exceeds_upper(&self, n: usize) -> bool {
        self.ub.is_some_and(|ub| n > ub as usize)
    }

    /// Upper bound as a count, `usize::MAX` when unbounded.
    pub fn ub_count(&self) -> usize {
        self.ub.map_or(usize::MAX, |ub| ub as usize)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ub {
            Some(ub) => write!(f, "[{},{}]", self.lb, ub),
            None => write!(f, "[{},*]", self.lb),
        }
    }
}

/// The end of an edge at which a node sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Src,
    Tar,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Src, Direction::Tar];

    pub fn opposite(self) -> Self {
        match self {
            Direction::Src => Direction::Tar,
            Direction::Tar => Direction::Src,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Src => "src",
            Direction::Tar => "tar",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeType {
    pub name: String,
    pub problem: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeType {
    pub name: String,
    pub src: NodeTypeId,
    pub tar: NodeTypeId,
    /// Bounds the number of incoming edges at a target node.
    pub m_src: Multiplicity,
    /// Bounds the number of outgoing edges at a source node.
    pub m_tar: Multiplicity,
    pub problem: bool,
}

impl EdgeType {
    pub fn end(&self, dir: Direction) -> NodeTypeId {
        match dir {
            Direction::Src => self.src,
            Direction::Tar => self.tar,
        }
    }
}

/// Type graph with a designated problem subgraph and edge multiplicities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeGraph {
    node_types: BTreeMap<NodeTypeId, NodeType>,
    edge_types: BTreeMap<EdgeTypeId, EdgeType>,
}

impl TypeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node_type(&mut self, id: NodeTypeId, name: impl Into<String>, problem: bool) -> Result<()> {
        if self.node_types.contains_key(&id) {
            return Err(GraphError::TypeGraph(format!("duplicate node type {id}")));
        }
        self.node_types.insert(id, NodeType { name: name.into(), problem });
        Ok(())
    }

    pub fn add_edge_type(&mut self, id: EdgeTypeId, ty: EdgeType) -> Result<()> {
        if self.edge_types.contains_key(&id) {
            return Err(GraphError::TypeGraph(format!("duplicate edge type {id}")));
        }
        let src = self.node_types.get(&ty.src).ok_or(GraphError::UnknownNodeType(ty.src))?;
        let tar = self.node_types.get(&ty.tar).ok_or(GraphError::UnknownNodeType(ty.tar))?;
        if ty.problem && !(src.problem && tar.problem) {
            return Err(GraphError::TypeGraph(format!("problem edge type {id} connects non-problem node types")));
        }
        self.edge_types.insert(id, ty);
        Ok(())
    }

    pub fn node_type(&self, id: NodeTypeId) -> Option<&NodeType> {
        self.node_types.get(&id)
    }

    pub fn edge_type(&self, id: EdgeTypeId) -> Option<&EdgeType> {
        self.edge_types.get(&id)
    }

    pub fn node_types(&self) -> impl Iterator<Item = (NodeTypeId, &NodeType)> {
        self.node_types.iter().map(|(k, v)| (*k, v))
    }

    pub fn edge_types(&self) -> impl Iterator<Item = (EdgeTypeId, &EdgeType)> {
        self.edge_types.iter().map(|(k, v)| (*k, v))
    }

    pub fn node_type_by_name(&self, name: &str) -> Option<NodeTypeId> {
        self.node_types.iter().find(|(_, t)| t.name == name).map(|(id, _)| *id)
    }

    pub fn edge_type_by_name(&self, name: &str) -> Option<EdgeTypeId> {
        self.edge_types.iter().find(|(_, t)| t.name == name).map(|(id, _)| *id)
    }

    pub fn is_problem_node_type(&self, id: NodeTypeId) -> bool {
        self.node_types.get(&id).is_some_and(|t| t.problem)
    }

    pub fn is_problem_edge_type(&self, id: EdgeTypeId) -> bool {
        self.edge_types.get(&id).is_some_and(|t| t.problem)
    }

    /// Multiplicity constraining edges of type `etype` at a node sitting at
    /// their `dir` end: outgoing edges are bounded by `m_tar`, incoming
    /// edges by `m_src`.
    pub fn bound(&self, etype: EdgeTypeId, dir: Direction) -> Multiplicity {
        let t = &self.edge_types[&etype];
        match dir {
            Direction::Src => t.m_tar,
            Direction::Tar => t.m_src,
        }
    }

    /// Edge types whose `dir` end has node type `ntype`, ascending.
    pub fn incident_types(&self, ntype: NodeTypeId, dir: Direction) -> impl Iterator<Item = EdgeTypeId> + '_ {
        self.edge_types.iter().filter(move |(_, t)| t.end(dir) == ntype).map(|(id, _)| *id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub ty: EdgeTypeId,
    pub src: NodeId,
    pub tar: NodeId,
}

impl Edge {
    pub fn end(&self, dir: Direction) -> NodeId {
        match dir {
            Direction::Src => self.src,
            Direction::Tar => self.tar,
        }
    }
}

/// A graph typed over a [`TypeGraph`]. Iteration is always in ascending ID
/// order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstanceGraph {
    nodes: BTreeMap<NodeId, NodeTypeId>,
    edges: BTreeMap<EdgeId, Edge>,
    outgoing: BTreeMap<NodeId, BTreeSet<EdgeId>>,
    incoming: BTreeMap<NodeId, BTreeSet<EdgeId>>,
}

impl InstanceGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: NodeId, ty: NodeTypeId) -> Result<()> {
        if self.nodes.contains_key(&id) {
            return Err(GraphError::DuplicateNode(id));
        }
        self.nodes.insert(id, ty);
        self.outgoing.insert(id, BTreeSet::new());
        self.incoming.insert(id, BTreeSet::new());
        Ok(())
    }

    pub fn add_edge(&mut self, id: EdgeId, ty: EdgeTypeId, src: NodeId, tar: NodeId) -> Result<()> {
        if self.edges.contains_key(&id) {
            return Err(GraphError::DuplicateEdge(id));
        }
        if !self.nodes.contains_key(&src) {
            return Err(GraphError::UnknownNode(src));
        }
        if !self.nodes.contains_key(&tar) {
            return Err(GraphError::UnknownNode(tar));
        }
        self.edges.insert(id, Edge { ty, src, tar });
        self.outgoing.get_mut(&src).expect("indexed").insert(id);
        self.incoming.get_mut(&tar).expect("indexed").insert(id);
        Ok(())
    }

    pub fn remove_edge(&mut self, id: EdgeId) -> Option<Edge> {
        let e = self.edges.remove(&id)?;
        self.outgoing.get_mut(&e.src).expect("indexed").remove(&id);
        self.incoming.get_mut(&e.tar).expect("indexed").remove(&id);
        Some(e)
    }

    /// Removes a node together with all incident edges.
    pub fn remove_node(&mut self, id: NodeId) -> Option<NodeTypeId> {
        let incident: Vec<EdgeId> = self.incident_edges(id).collect();
        for e in incident {
            self.remove_edge(e);
        }
        self.outgoing.remove(&id);
        self.incoming.remove(&id);
        self.nodes.remove(&id)
    }

    /// Points an existing edge at a new target node.
    pub fn retarget_edge(&mut self, id: EdgeId, tar: NodeId) -> Result<()> {
        if !self.nodes.contains_key(&tar) {
            return Err(GraphError::UnknownNode(tar));
        }
        let e = self.remove_edge(id).ok_or(GraphError::UnknownEdge(id))?;
        self.add_edge(id, e.ty, e.src, tar)
    }

    /// Points an existing edge at a new source node.
    pub fn resource_edge(&mut self, id: EdgeId, src: NodeId) -> Result<()> {
        if !self.nodes.contains_key(&src) {
            return Err(GraphError::UnknownNode(src));
        }
        let e = self.remove_edge(id).ok_or(GraphError::UnknownEdge(id))?;
        self.add_edge(id, e.ty, src, e.tar)
    }

    pub fn node_type(&self, id: NodeId) -> Option<NodeTypeId> {
        self.nodes.get(&id).copied()
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn contains_node(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.edges.contains_key(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, NodeTypeId)> + '_ {
        self.nodes.iter().map(|(k, v)| (*k, *v))
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges.iter().map(|(k, v)| (*k, v))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_node_id(&self) -> Option<NodeId> {
        self.nodes.keys().next_back().copied()
    }

    pub fn max_edge_id(&self) -> Option<EdgeId> {
        self.edges.keys().next_back().copied()
    }

    pub fn fresh_node_id(&self) -> NodeId {
        self.max_node_id().map_or(NodeId(0), |n| NodeId(n.0 + 1))
    }

    pub fn fresh_edge_id(&self) -> EdgeId {
        self.max_edge_id().map_or(EdgeId(0), |e| EdgeId(e.0 + 1))
    }

    /// Edges whose `dir` end is `node`, ascending, of any type.
    pub fn edges_at(&self, node: NodeId, dir: Direction) -> impl Iterator<Item = EdgeId> + '_ {
        let set = match dir {
            Direction::Src => self.outgoing.get(&node),
            Direction::Tar => self.incoming.get(&node),
        };
        set.into_iter().flat_map(|s| s.iter().copied())
    }

    /// All edges touching `node`, ascending, each listed once.
    pub fn incident_edges(&self, node: NodeId) -> impl Iterator<Item = EdgeId> + '_ {
        let mut all: BTreeSet<EdgeId> = self.edges_at(node, Direction::Src).collect();
        all.extend(self.edges_at(node, Direction::Tar));
        all.into_iter()
    }

    /// `edges(G, etype, dir, node)`: edges of type `etype` whose `dir` end is
    /// `node`, in ascending ID order.
    pub fn typed_edges_at(&self, node: NodeId, etype: EdgeTypeId, dir: Direction) -> Vec<EdgeId> {
        self.edges_at(node, dir).filter(|e| self.edges[e].ty == etype).collect()
    }

    /// Checked variant of [`typed_edges_at`](Self::typed_edges_at).
    pub fn edges_of(&self, tg: &TypeGraph, etype: EdgeTypeId, dir: Direction, node: NodeId) -> Result<Vec<EdgeId>> {
        if !self.contains_node(node) {
            return Err(GraphError::UnknownNode(node));
        }
        if tg.edge_type(etype).is_none() {
            return Err(GraphError::UnknownEdgeType(etype));
        }
        Ok(self.typed_edges_at(node, etype, dir))
    }

    pub fn count_at(&self, node: NodeId, etype: EdgeTypeId, dir: Direction) -> usize {
        self.edges_at(node, dir).filter(|e| self.edges[e].ty == etype).count()
    }

    /// Verifies that the typing is a graph morphism into `tg`.
    pub fn check_typing(&self, tg: &TypeGraph) -> Result<()> {
        for (_, ty) in self.nodes() {
            if tg.node_type(ty).is_none() {
                return Err(GraphError::UnknownNodeType(ty));
            }
        }
        for (id, e) in self.edges() {
            let et = tg.edge_type(e.ty).ok_or(GraphError::UnknownEdgeType(e.ty))?;
            if self.nodes[&e.src] != et.src || self.nodes[&e.tar] != et.tar {
                return Err(GraphError::Typing(id));
            }
        }
        Ok(())
    }

    pub fn is_problem_node(&self, tg: &TypeGraph, id: NodeId) -> bool {
        self.node_type(id).is_some_and(|t| tg.is_problem_node_type(t))
    }

    /// Sum of node IDs; used as a deterministic tie-breaker.
    pub fn id_sum(&self) -> u64 {
        self.nodes.keys().map(|n| n.0 as u64).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicity_satisfaction() {
        let m = Multiplicity::bounded(1, 2);
        assert!(!m.satisfies(0));
        assert!(m.satisfies(1));
        assert!(m.satisfies(2));
        assert!(!m.satisfies(3));
        assert!(Multiplicity::at_least(2).satisfies(100));
        assert!(Multiplicity::new(3, Some(2)).is_err());
        assert_eq!(Multiplicity::at_least(1).to_string(), "[1,*]");
    }

    #[test]
    fn opposite_is_involution() {
        for d in Direction::BOTH {
            assert_eq!(d.opposite().opposite(), d);
            assert_ne!(d.opposite(), d);
        }
    }

    #[test]
    fn typed_edges_fan_is_ascending() {
        let mut tg = TypeGraph::new();
        tg.add_node_type(NodeTypeId(0), "A", false).unwrap();
        tg.add_edge_type(
            EdgeTypeId(0),
            EdgeType {
                name: "r".into(),
                src: NodeTypeId(0),
                tar: NodeTypeId(0),
                m_src: Multiplicity::ANY,
                m_tar: Multiplicity::ANY,
                problem: false,
            },
        )
        .unwrap();
        let mut g = InstanceGraph::new();
        for i in 0..4 {
            g.add_node(NodeId(i), NodeTypeId(0)).unwrap();
        }
        for (id, tar) in [(7, 1), (3, 2), (5, 3)] {
            g.add_edge(EdgeId(id), EdgeTypeId(0), NodeId(0), NodeId(tar)).unwrap();
        }
        let scanned: Vec<EdgeId> =
            g.edges().filter(|(_, e)| e.src == NodeId(0) && e.ty == EdgeTypeId(0)).map(|(id, _)| id).collect();
        let fan = g.edges_of(&tg, EdgeTypeId(0), Direction::Src, NodeId(0)).unwrap();
        assert_eq!(fan, scanned);
        assert_eq!(fan, vec![EdgeId(3), EdgeId(5), EdgeId(7)]);
        assert!(g.edges_of(&tg, EdgeTypeId(0), Direction::Src, NodeId(1)).unwrap().is_empty());
        assert_eq!(
            g.edges_of(&tg, EdgeTypeId(9), Direction::Src, NodeId(0)),
            Err(GraphError::UnknownEdgeType(EdgeTypeId(9)))
        );
        assert_eq!(
            g.edges_of(&tg, EdgeTypeId(0), Direction::Src, NodeId(42)),
            Err(GraphError::UnknownNode(NodeId(42)))
        );
    }

    #[test]
    fn remove_node_drops_incident_edges() {
        let mut g = InstanceGraph::new();
        g.add_node(NodeId(0), NodeTypeId(0)).unwrap();
        g.add_node(NodeId(1), NodeTypeId(0)).unwrap();
        g.add_edge(EdgeId(0), EdgeTypeId(0), NodeId(0), NodeId(1)).unwrap();
        g.add_edge(EdgeId(1), EdgeTypeId(0), NodeId(1), NodeId(1)).unwrap();
        g.remove_node(NodeId(1));
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.edges_at(NodeId(0), Direction::Src).count(), 0);
    }
}
