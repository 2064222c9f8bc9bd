//! Adaptive binary search trees with a flat restructuring charge `C(n)`.
//!
//! The structure serves a request sequence — single keys routed from the
//! root, or (source, destination) pairs routed along the tree path — and
//! may replace the whole tree between requests for a fixed charge. This
//! crate provides:
//!
//! - [`tree`]: index-based BSTs over `1..=n` with depth/LCA/distance
//!   queries, rotations, exhaustive enumeration and preorder codes;
//! - [`cost`]: request sequences, stage-decomposed cost accounting,
//!   empirical entropy and the closed-form bound calculators;
//! - [`builders`]: weight-balanced and exact-optimal static trees, plus
//!   the matching-realizing construction;
//! - [`offline`]: the block-partition offline algorithm for both models;
//! - [`online`]: the summarizer/builder/trigger decomposition, the
//!   budget-based online algorithm and the optimal restructure DP;
//! - [`adversary`]: round-robin generators and the adaptive deepest-node
//!   and greedy-matching adversaries;
//! - [`oracle`]: exhaustive small-instance ground truth;
//! - [`trace`]: the trace-file format and seeded sequence generators.

pub mod adversary;
pub mod builders;
pub mod cost;
pub mod offline;
pub mod online;
pub mod oracle;
pub mod trace;
pub mod tree;

pub use cost::{CostParams, CostReport, CostSpec, Model, Request, RequestSequence, Schedule, Stage};
pub use tree::{Key, Tree, TreeCode};
