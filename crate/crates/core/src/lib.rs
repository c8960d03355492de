//! Synthetic relational-text datasets grounded in random causal graphs, and a
//! multiple-choice harness that scores causal-relation inference.

pub mod corpus;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod graph;
pub mod provenance;
pub mod rng;
pub mod scenario;
pub mod scorer;
pub mod verbalizer;

pub use error::{Error, Result};
pub use graph::{CausalGraph, EventId, GraphPair, RelationGraph};
