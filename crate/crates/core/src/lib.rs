//! Tree-based treatment assignment for two-arm experiments with a binary
//! outcome.
//!
//! A tree partitions the covariate space and assigns each region the arm
//! with the higher observed success rate. Growth is greedy on the summed
//! node value, pruning follows a weakest-link sequence, and a holdout set
//! picks the final subtree. The [`sim`] module scores fitted policies on
//! synthetic data against random assignment and a global A/B test.

pub mod data;
pub mod error;
pub mod policy;
pub mod prune;
pub mod sim;
pub mod tree;

pub use data::{CsvOptions, Dataset, RowSubset, Schema, Treatment};
pub use error::{Error, Result};
pub use policy::{global_ab_decision, AbTestDecision, Policy};
pub use prune::{prune_sequence, select_subtree, PruneSequence, SelectionMetric};
pub use tree::{best_split, grow, GrowthConfig, NodeStats, Tree};
