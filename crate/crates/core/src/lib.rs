//! Time-changed Lévy processes: stochastic clocks and their crossing times,
//! enlarged-filtration strategies, and transform versus Monte Carlo pricing.
//!
//! The `examples/` directory is the main entry point; each file runs one
//! capability end to end.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod export;
pub mod filtration;
pub mod grid;
pub mod harness;
pub mod levy;
pub mod pricing;
pub mod scenario;
pub mod seed;
pub mod stats;
pub mod time_change;
