//! Benchmark evolution for code-reasoning tasks: a Python-subset front end,
//! complexity and readability metrics, semantic-preserving and bug-injecting
//! program transformations, and a multi-objective evolution loop with
//! validation gates.

pub mod commands;
pub mod evolution;
pub mod metrics;
pub mod naming;
pub mod operators;
pub mod python;
pub mod unit;
pub mod validation;

/// Version stamped into every JSON document this crate writes.
pub const SCHEMA_VERSION: u32 = 1;
