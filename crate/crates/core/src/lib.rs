//! Approximate arithmetic circuit design with Cartesian genetic programming.
//!
//! A golden adder or multiplier is encoded as a CGP genome and evolved by a
//! (1+λ) strategy that minimizes estimated power under error constraints.
//! Candidates are scored by exhaustive bit-parallel simulation.

pub mod analysis;
pub mod circuit;
pub mod cost;
pub mod experiment;
pub mod golden;
pub mod metrics;
pub mod search;
pub mod simulator;
