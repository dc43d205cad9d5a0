//! Solver library for linear contracts over graph-based rewards.
//!
//! A principal pays each agent a fixed fraction of the realized reward;
//! the reward of an active set is its edge count, normalized by `C(n,2)`.
//! The crate provides the exact game semantics, an exhaustive oracle, the
//! structured-set machinery (iterated pseudo-coring), oblivious degree
//! estimation, the LP relaxation with preprocessing and randomized
//! rounding, and a driver that searches over estimate and edge-count
//! guesses. Everything is deterministic under explicit seeds.

pub mod agents;
pub mod driver;
pub mod error;
pub mod estimator;
pub mod exact;
pub mod generator;
pub mod instance;
pub mod lp;
pub mod oracle;
pub mod params;
pub mod pseudocore;
pub mod report;

pub use agents::AgentSet;
pub use error::{Error, Result};
pub use instance::{Contract, Evaluation, Instance};
pub use params::{derive_params, repetition_count, PtasParams};
