//! Stochastic simulation of a herding market model with fundamentalist and
//! chartist traders, plus estimators for the statistics of its returns and
//! of empirical tick data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod campaign;
pub mod config;
pub mod error;
pub mod herding;
pub mod ingest;
pub mod noise;
pub mod params;
pub mod rng;
pub mod series;
pub mod stats;

pub use error::{Error, Result};
pub use params::ModelParams;
