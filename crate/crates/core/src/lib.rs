//! Drift-diffusion models of emotion appraisal.
//!
//! A biased random walk between two boundaries stands in for the appraisal of
//! an arousing situation. Which boundary is reached picks the emotion; the
//! time taken sets its intensity. The crate simulates the walk, maps
//! experimental conditions onto walk parameters, scores simulated batches
//! against observed data, and fits model parameters by grid search.

pub mod datasets;
pub mod ddm;
pub mod error;
pub mod fitting;
pub mod replication;
pub mod scenarios;
pub mod scoring;

pub use error::{Error, Result};
