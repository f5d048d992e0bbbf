//! Conditional anomaly detection for binary case records.
//!
//! Detects values of a target attribute that are improbable given a case's
//! other attributes: a Bayesian network is learned from a reference
//! population of past cases (optionally narrowed to the query's k best
//! matches under a weighted Mahalanobis metric), and the case is flagged when
//! the parameter-averaged predictive probability of its actual target value
//! falls below a threshold. Includes the full leave-one-out ROC/PR
//! evaluation harness.

pub mod bayes;
pub mod dataset;
pub mod error;
pub mod pipeline;
pub mod similarity;

pub use error::{Error, Result};
