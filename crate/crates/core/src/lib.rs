//! Model-agnostic auditing of prediction models for regions of degraded
//! performance.
//!
//! The pipeline fits CART regression trees over per-sample performance
//! scores, wraps every tree node in an empirical-quantile conformal
//! interval, and flags terminal nodes whose intervals separate from all
//! others. Flagged leaves translate back into axis-aligned feature-space
//! regions ("the model underperforms for patients younger than 45 who
//! are ventilated", and so on).

pub mod cart;
pub mod cli;
pub mod conformal;
pub mod data;
pub mod error;
pub mod regions;
pub mod rng;
pub mod synthgen;

pub use error::{Error, Result};
