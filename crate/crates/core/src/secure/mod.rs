//! Secure crossover: one offspring that introduces no multiplicity
//! violation its parents did not already have.
//!
//! The operator builds a subgraph `gsub` of the first parent that keeps all
//! lower bounds, then grows a subgraph `hsub` of the second parent together
//! with the crossover point, checking every identification and every added
//! edge against the upper bounds of the offspring under construction.
//! Finally, nodes of `hsub` outside the crossover point are topped up to
//! their minimum or removed. The offspring is the union of `gsub` and
//! `hsub` over the crossover point.

mod audit;
mod cp;
mod free;
mod gsub;
mod state;

use std::collections::BTreeMap;

pub use audit::{check_conformance, check_non_worsening};
pub use cp::{construct_cp, include_into_cp, random_edge_swap, random_edge_to_cp, random_node_to_cp, resolve_breach};
pub use free::{ensure_minimum_free_node, include_more_edges, process_free_nodes};
pub use gsub::{create_gsub, include_adjacent_edges};
pub use state::{CrossoverState, Image, Swap};

use crate::graph::{
    same_search_space, union_over, union_over_mapped, CrossoverPoint, InstanceGraph, NodeId, TypeGraph,
};
use crate::trace::{Decider, DecisionTrace};
use crate::CrossoverError;

/// Probabilities of the individual random decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecureConfig {
    pub p_node_gsub: f64,
    pub p_node_hsub: f64,
    pub p_edge_hsub: f64,
    pub p_swap: f64,
    pub p_node_cp: f64,
    pub p_edge_cp: f64,
    pub p_free_node_cp: f64,
    pub compute_second_offspring: bool,
}

impl Default for SecureConfig {
    fn default() -> Self {
        Self {
            p_node_gsub: 0.5,
            p_node_hsub: 0.5,
            p_edge_hsub: 0.5,
            p_swap: 0.5,
            p_node_cp: 0.5,
            p_edge_cp: 0.5,
            p_free_node_cp: 0.3,
            compute_second_offspring: false,
        }
    }
}

impl SecureConfig {
    pub fn validate(&self) -> Result<(), CrossoverError> {
        let ps = [
            ("p_node_gsub", self.p_node_gsub),
            ("p_node_hsub", self.p_node_hsub),
            ("p_edge_hsub", self.p_edge_hsub),
            ("p_swap", self.p_swap),
            ("p_node_cp", self.p_node_cp),
            ("p_edge_cp", self.p_edge_cp),
            ("p_free_node_cp", self.p_free_node_cp),
        ];
        for (name, p) in ps {
            if !(0.0..=1.0).contains(&p) {
                return Err(CrossoverError::Config(format!("{name} = {p} is not in [0,1]")));
            }
        }
        Ok(())
    }
}

/// Where an offspring node comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Origin {
    pub g: Option<NodeId>,
    pub h: Option<NodeId>,
}

#[derive(Debug, Clone)]
pub struct SecureOutcome {
    pub offspring: InstanceGraph,
    pub offspring2: Option<InstanceGraph>,
    pub trace: DecisionTrace,
    pub gsub: InstanceGraph,
    pub hsub: InstanceGraph,
    /// Named by `g` IDs; `nodes_a`/`edges_a` map into `gsub`,
    /// `nodes_b`/`edges_b` into `hsub`.
    pub cp: CrossoverPoint,
    pub origins: BTreeMap<NodeId, Origin>,
    pub visits: BTreeMap<NodeId, u32>,
}

impl SecureOutcome {
    pub fn max_visits(&self) -> u32 {
        self.visits.values().copied().max().unwrap_or(0)
    }
}

pub fn secure_crossover(
    g: &InstanceGraph,
    h: &InstanceGraph,
    tg: &TypeGraph,
    cfg: &SecureConfig,
    mut d: Decider,
) -> Result<SecureOutcome, CrossoverError> {
    cfg.validate()?;
    g.check_typing(tg)?;
    h.check_typing(tg)?;
    if !same_search_space(g, h, tg) {
        return Err(CrossoverError::SearchSpace);
    }
    let mut state = CrossoverState::new(g, h, tg);
    create_gsub(&mut state, cfg, &mut d);
    construct_cp(&mut state, cfg, &mut d);
    process_free_nodes(&mut state, cfg, &mut d);

    let gsub = state.gsub_graph();
    let hsub = state.hsub_graph();
    let cp = state.crossover_point();
    let u = union_over_mapped(&gsub, &hsub, &cp)?;
    let mut origins: BTreeMap<NodeId, Origin> = BTreeMap::new();
    for n in gsub.node_ids() {
        origins.insert(n, Origin { g: Some(n), h: state.node_g2h.get(&n).copied() });
    }
    for (&n_h, &n_o) in &u.b_nodes {
        origins.entry(n_o).or_default().h = Some(n_h);
    }
    let offspring2 = if cfg.compute_second_offspring { Some(union_over(g, h, &cp)?) } else { None };
    let visits = state.visits.clone();
    let trace = d.finish()?;
    Ok(SecureOutcome { offspring: u.graph, offspring2, trace, gsub, hsub, cp, origins, visits })
}

/// Runs the operator with decisions drawn from `seed`.
pub fn secure_crossover_seeded(
    g: &InstanceGraph,
    h: &InstanceGraph,
    tg: &TypeGraph,
    cfg: &SecureConfig,
    seed: u64,
) -> Result<SecureOutcome, CrossoverError> {
    secure_crossover(g, h, tg, cfg, Decider::from_seed(seed))
}
