//! Crossover operators on typed graphs whose edge types carry
//! multiplicities.
//!
//! [`secure`] computes one offspring that never introduces a multiplicity
//! violation that was not already present in its parents. [`generic`] is
//! the unconstrained baseline: random splits recombined over a crossover
//! point. [`evolution`] wraps both in a small evolutionary loop, and [`cra`]
//! provides the class responsibility assignment case used throughout the
//! tests.

pub mod campaign;
pub mod cra;
pub mod evolution;
pub mod generic;
pub mod graph;
pub mod par;
pub mod secure;
pub mod synth;
pub mod trace;

pub use graph::{
    check_multiplicities, problem_graph_of, same_search_space, union_over, CrossoverPoint, Direction, EdgeId,
    EdgeTypeId, GraphError, InstanceGraph, Multiplicity, NodeId, NodeTypeId, TypeGraph, ViolationReport,
};
pub use trace::{Decider, DecisionTrace, TraceError};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CrossoverError {
    #[error("parents do not share the same problem graph")]
    SearchSpace,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}
