//! Benchmark harness for ground-reaction-force gait classification.
//!
//! The pipeline runs per subject: [`ingest`] loads or synthesizes 6 × 15
//! stance-phase trials, [`preprocess`] turns them into feature vectors for a
//! [`model::CombinationSpec`], [`learn`] trains the four classifiers with a
//! validation grid search, [`eval`] scores them over stratified 15-fold
//! cross-validation and [`experiment`] runs the whole grid and aggregates the
//! results.

pub mod cli;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod ingest;
pub mod learn;
pub mod model;
pub mod preprocess;

pub use error::{Error, Result};
