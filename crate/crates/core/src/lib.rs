//! Bacterial-agent genetic algorithm simulator.
//!
//! Candidate solutions live on plasmids inside simulated bacteria. A gene
//! circuit turns each plasmid into an inducer concentration, a fitness, a GFP
//! level and a growth rate; fitter cells divide faster, so the colony itself
//! performs the search.

// NaN must fail parameter checks, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circuit;
pub mod cli;
pub mod colony;
pub mod config;
pub mod error;
pub mod genome;
pub mod output;
pub mod plot;
pub mod problems;
pub mod sweep;

pub use error::{BagaError, Result};
