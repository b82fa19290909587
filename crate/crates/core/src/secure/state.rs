use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::graph::{problem_graph_of, CrossoverPoint, Direction, EdgeId, EdgeTypeId, InstanceGraph, NodeId, TypeGraph};

/// A node of the offspring under construction, named by its `g` node when
/// it has one (that is, when it stems from `gsub`, possibly merged through
/// the crossover point) and by its `h` node otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Image {
    G(NodeId),
    H(NodeId),
}

/// An edge of `gsub` replaced by an `h` edge of the same type at the
/// crossover node `x`, whose `dir` end both edges share.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Swap {
    pub e_g: EdgeId,
    pub e_h: EdgeId,
    pub x_g: NodeId,
    pub dir: Direction,
}

/// The in-flight `(gsub, hsub, cp)` triple and its bookkeeping.
#[derive(Debug, Clone)]
pub struct CrossoverState<'a> {
    pub g: &'a InstanceGraph,
    pub h: &'a InstanceGraph,
    pub tg: &'a TypeGraph,
    pub gsub_nodes: BTreeSet<NodeId>,
    pub gsub_edges: BTreeSet<EdgeId>,
    pub hsub_nodes: BTreeSet<NodeId>,
    pub hsub_edges: BTreeSet<EdgeId>,
    pub node_h2g: BTreeMap<NodeId, NodeId>,
    pub node_g2h: BTreeMap<NodeId, NodeId>,
    pub edge_h2g: BTreeMap<EdgeId, EdgeId>,
    pub edge_g2h: BTreeMap<EdgeId, EdgeId>,
    /// Active swaps keyed by their replacement `h` edge.
    pub swaps: BTreeMap<EdgeId, Swap>,
    pub queue: VecDeque<NodeId>,
    pub visits: BTreeMap<NodeId, u32>,
    /// `h` nodes whose membership was decided while building the crossover
    /// point.
    pub decided: BTreeSet<NodeId>,
    /// `h` nodes declined while processing free nodes.
    pub rejected: BTreeSet<NodeId>,
    /// `h` nodes removed for failing their minimum.
    pub dead: BTreeSet<NodeId>,
    /// Free nodes whose minimum has been ensured.
    pub settled: BTreeSet<NodeId>,
}

impl<'a> CrossoverState<'a> {
    /// `gsub`, `hsub` and the crossover point all start as the problem
    /// graph, paired identically.
    pub fn new(g: &'a InstanceGraph, h: &'a InstanceGraph, tg: &'a TypeGraph) -> Self {
        let pip = problem_graph_of(g, tg);
        let nodes: BTreeSet<NodeId> = pip.node_ids().collect();
        let edges: BTreeSet<EdgeId> = pip.edge_ids().collect();
        let node_id: BTreeMap<NodeId, NodeId> = nodes.iter().map(|&n| (n, n)).collect();
        let edge_id: BTreeMap<EdgeId, EdgeId> = edges.iter().map(|&e| (e, e)).collect();
        Self {
            g,
            h,
            tg,
            gsub_nodes: nodes.clone(),
            gsub_edges: edges.clone(),
            hsub_nodes: nodes,
            hsub_edges: edges,
            node_h2g: node_id.clone(),
            node_g2h: node_id,
            edge_h2g: edge_id.clone(),
            edge_g2h: edge_id,
            swaps: BTreeMap::new(),
            queue: VecDeque::new(),
            visits: BTreeMap::new(),
            decided: BTreeSet::new(),
            rejected: BTreeSet::new(),
            dead: BTreeSet::new(),
            settled: BTreeSet::new(),
        }
    }

    pub fn visit(&mut self, x: NodeId) {
        *self.visits.entry(x).or_default() += 1;
        debug_assert!(self.visits[&x] <= 3, "h node {x} visited more than three times");
    }

    pub fn max_visits(&self) -> u32 {
        self.visits.values().copied().max().unwrap_or(0)
    }

    pub fn in_cp(&self, x_h: NodeId) -> bool {
        self.node_h2g.contains_key(&x_h)
    }

    pub fn partner(&self, x_h: NodeId) -> Option<NodeId> {
        self.node_h2g.get(&x_h).copied()
    }

    /// Non-problem `hsub` node outside the crossover point.
    pub fn is_free(&self, x_h: NodeId) -> bool {
        self.hsub_nodes.contains(&x_h) && !self.in_cp(x_h)
    }

    pub fn image_of_h(&self, x_h: NodeId) -> Image {
        match self.partner(x_h) {
            Some(g) => Image::G(g),
            None => Image::H(x_h),
        }
    }

    pub fn gsub_count(&self, x_g: NodeId, t: EdgeTypeId, dir: Direction) -> usize {
        self.g.edges_at(x_g, dir).filter(|e| self.gsub_edges.contains(e) && self.g.edge(*e).unwrap().ty == t).count()
    }

    pub fn hsub_count(&self, x_h: NodeId, t: EdgeTypeId, dir: Direction) -> usize {
        self.h.edges_at(x_h, dir).filter(|e| self.hsub_edges.contains(e) && self.h.edge(*e).unwrap().ty == t).count()
    }

    fn paired_count(&self, x_h: NodeId, t: EdgeTypeId, dir: Direction) -> usize {
        self.h.edges_at(x_h, dir).filter(|e| self.edge_h2g.contains_key(e) && self.h.edge(*e).unwrap().ty == t).count()
    }

    /// Edges of type `t` with their `dir` end at `n` in the offspring that
    /// the current state would produce.
    pub fn count(&self, n: Image, t: EdgeTypeId, dir: Direction) -> usize {
        match n {
            Image::G(x_g) => {
                let mut c = self.gsub_count(x_g, t, dir);
                if let Some(&x_h) = self.node_g2h.get(&x_g) {
                    c += self.hsub_count(x_h, t, dir) - self.paired_count(x_h, t, dir);
                }
                c
            }
            Image::H(x_h) => self.hsub_count(x_h, t, dir),
        }
    }

    /// Swapped-out `g` edges that would come back at `n` if their
    /// replacement were removed later on.
    pub fn phantom(&self, n: Image, t: EdgeTypeId, dir: Direction) -> usize {
        self.swaps
            .values()
            .filter(|s| {
                let eg = self.g.edge(s.e_g).unwrap();
                eg.ty == t && Image::G(eg.end(dir)) == n && self.image_of_h(self.h.edge(s.e_h).unwrap().end(dir)) != n
            })
            .count()
    }

    /// Worst-case count at `n` for upper-bound checks.
    pub fn ub_count(&self, n: Image, t: EdgeTypeId, dir: Direction) -> usize {
        self.count(n, t, dir) + self.phantom(n, t, dir)
    }

    /// Largest count tolerated at `n`: the upper bound, or the count of its
    /// parent node when that parent already exceeds it.
    pub fn cap(&self, n: Image, t: EdgeTypeId, dir: Direction) -> usize {
        let ub = self.tg.bound(t, dir).ub_count();
        let parent = match n {
            Image::G(x) => self.g.count_at(x, t, dir),
            Image::H(x) => self.h.count_at(x, t, dir),
        };
        ub.max(parent)
    }

    pub fn fits(&self, n: Image, t: EdgeTypeId, dir: Direction, extra: usize) -> bool {
        self.ub_count(n, t, dir) + extra <= self.cap(n, t, dir)
    }

    /// Edges at `x_g` that no later step can take away: its `gsub` edges
    /// plus the replacements of edges swapped out at `x_g`.
    pub fn stable_count(&self, x_g: NodeId, t: EdgeTypeId, dir: Direction) -> usize {
        self.gsub_count(x_g, t, dir)
            + self
                .swaps
                .values()
                .filter(|s| s.x_g == x_g && s.dir == dir && self.g.edge(s.e_g).unwrap().ty == t)
                .count()
    }

    /// `min(lb, count in g)`, the lower bound a node from `g` must keep.
    pub fn g_floor(&self, x_g: NodeId, t: EdgeTypeId, dir: Direction) -> usize {
        (self.tg.bound(t, dir).lb as usize).min(self.g.count_at(x_g, t, dir))
    }

    /// `min(lb, count in h)`, the lower bound a free node must reach.
    pub fn h_floor(&self, x_h: NodeId, t: EdgeTypeId, dir: Direction) -> usize {
        (self.tg.bound(t, dir).lb as usize).min(self.h.count_at(x_h, t, dir))
    }

    pub fn pair_nodes(&mut self, x_h: NodeId, x_g: NodeId) {
        debug_assert!(!self.node_h2g.contains_key(&x_h) && !self.node_g2h.contains_key(&x_g));
        debug_assert_eq!(self.h.node_type(x_h), self.g.node_type(x_g));
        self.node_h2g.insert(x_h, x_g);
        self.node_g2h.insert(x_g, x_h);
        self.hsub_nodes.insert(x_h);
    }

    pub fn pair_edges(&mut self, e_h: EdgeId, e_g: EdgeId) {
        debug_assert!(!self.edge_h2g.contains_key(&e_h) && !self.edge_g2h.contains_key(&e_g));
        debug_assert!(self.gsub_edges.contains(&e_g));
        self.edge_h2g.insert(e_h, e_g);
        self.edge_g2h.insert(e_g, e_h);
        self.hsub_edges.insert(e_h);
    }

    /// Would merging free `h` node `y` with `g` node `z` keep every count at
    /// the merged node within its cap? Check only; nothing is changed.
    pub fn verify_inclusion(&self, y: NodeId, z: NodeId) -> bool {
        let Some(ty) = self.h.node_type(y) else { return false };
        if self.g.node_type(z) != Some(ty) {
            return false;
        }
        for dir in Direction::BOTH {
            for t in self.tg.incident_types(ty, dir) {
                let n = Image::G(z);
                let merged = self.gsub_count(z, t, dir) + self.hsub_count(y, t, dir) - self.paired_count(y, t, dir)
                    + self.phantom(n, t, dir);
                if merged > self.cap(n, t, dir) {
                    return false;
                }
            }
        }
        true
    }

    /// `gsub` nodes of `ty` not yet in the crossover point, ascending.
    pub fn unpaired_gsub_nodes(&self, ty: crate::graph::NodeTypeId) -> Vec<NodeId> {
        self.gsub_nodes
            .iter()
            .copied()
            .filter(|n| self.g.node_type(*n) == Some(ty) && !self.node_g2h.contains_key(n))
            .collect()
    }

    /// Unpaired `gsub` edges of type `t` with their `dir` end at `x_g` and,
    /// if given, their other end at `y_g`.
    pub fn unpaired_gsub_edges(&self, x_g: NodeId, t: EdgeTypeId, dir: Direction, y_g: Option<NodeId>) -> Vec<EdgeId> {
        self.g
            .edges_at(x_g, dir)
            .filter(|e| {
                let edge = self.g.edge(*e).unwrap();
                edge.ty == t
                    && self.gsub_edges.contains(e)
                    && !self.edge_g2h.contains_key(e)
                    && y_g.is_none_or(|y| edge.end(dir.opposite()) == y)
            })
            .collect()
    }

    /// Removes the free node `x` and, transitively, every settled free node
    /// whose count drops below its target as a consequence. Replacements
    /// of swapped edges give their `g` edge back.
    pub fn cascade_remove(&mut self, x: NodeId) {
        let mut work = VecDeque::from([x]);
        while let Some(n) = work.pop_front() {
            if self.dead.contains(&n) || self.in_cp(n) || !self.hsub_nodes.contains(&n) {
                continue;
            }
            self.dead.insert(n);
            self.settled.remove(&n);
            self.hsub_nodes.remove(&n);
            self.visit(n);
            let edges: Vec<EdgeId> = self.h.incident_edges(n).filter(|e| self.hsub_edges.contains(e)).collect();
            let mut touched = BTreeSet::new();
            for e in edges {
                self.hsub_edges.remove(&e);
                if let Some(s) = self.swaps.remove(&e) {
                    self.gsub_edges.insert(s.e_g);
                }
                let edge = self.h.edge(e).unwrap();
                for u in [edge.src, edge.tar] {
                    if u != n {
                        touched.insert(u);
                    }
                }
            }
            for u in touched {
                if self.settled.contains(&u) && !self.meets_floor(u) {
                    work.push_back(u);
                }
            }
        }
    }

    /// Does free node `x` have at least `min(lb, count in h)` `hsub` edges
    /// of every type and direction?
    pub fn meets_floor(&self, x: NodeId) -> bool {
        let ty = self.h.node_type(x).unwrap();
        Direction::BOTH
            .iter()
            .all(|&dir| self.tg.incident_types(ty, dir).all(|t| self.hsub_count(x, t, dir) >= self.h_floor(x, t, dir)))
    }

    pub fn gsub_graph(&self) -> InstanceGraph {
        subgraph(self.g, &self.gsub_nodes, &self.gsub_edges)
    }

    pub fn hsub_graph(&self) -> InstanceGraph {
        subgraph(self.h, &self.hsub_nodes, &self.hsub_edges)
    }

    /// The crossover point, named by `g` IDs.
    pub fn crossover_point(&self) -> CrossoverPoint {
        let mut cp = CrossoverPoint::default();
        for (&x_g, &x_h) in &self.node_g2h {
            cp.graph.add_node(x_g, self.g.node_type(x_g).unwrap()).unwrap();
            cp.nodes_a.insert(x_g, x_g);
            cp.nodes_b.insert(x_g, x_h);
        }
        for (&e_g, &e_h) in &self.edge_g2h {
            let e = self.g.edge(e_g).unwrap();
            cp.graph.add_edge(e_g, e.ty, e.src, e.tar).unwrap();
            cp.edges_a.insert(e_g, e_g);
            cp.edges_b.insert(e_g, e_h);
        }
        cp
    }
}

fn subgraph(g: &InstanceGraph, nodes: &BTreeSet<NodeId>, edges: &BTreeSet<EdgeId>) -> InstanceGraph {
    let mut s = InstanceGraph::new();
    for &n in nodes {
        s.add_node(n, g.node_type(n).unwrap()).unwrap();
    }
    for &e in edges {
        let edge = g.edge(e).unwrap();
        s.add_edge(e, edge.ty, edge.src, edge.tar).unwrap();
    }
    s
}
