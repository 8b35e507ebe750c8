//! Simulates right-to-erasure usage on tabular classification data.
//!
//! Records are removed according to configurable (possibly biased) deletion
//! scenarios, the classifier suite is retrained from scratch at every deletion
//! level, and the resulting metrics are compared to undeleted baselines.
//!
//! The pipeline is `dataset` (load, encode, split) → `deletion` (weights,
//! weighted sampling, plans) → `classifiers` (fit/predict) → `metrics`, all
//! driven by `experiment` and written out by `report`.

pub mod classifiers;
pub mod config;
pub mod dataset;
pub mod deletion;
mod error;
pub mod experiment;
pub mod metrics;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
