//! Approximate KNN graph construction over sparse user/item profiles.
//!
//! The main pipeline groups users with FastRandomHash clustering, solves
//! each cluster independently on a worker pool, and merges the partial
//! graphs. Exact, greedy and MinHash-LSH baselines, quality and recall
//! metrics, and Monte Carlo checks of the clustering guarantees are
//! provided alongside.

pub mod analysis;
pub mod baselines;
pub mod clustering;
pub mod dataset;
pub mod error;
pub mod hashing;
pub mod io;
pub mod knn;
pub mod merge;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod scheduler;
pub mod similarity;
pub mod synthetic;

/// Dense internal user id, `0..n_users`.
pub type UserId = u32;
/// Dense internal item id, `0..n_items`.
pub type ItemId = u32;

pub use clustering::{Cluster, ClusteringConfig};
pub use dataset::{Dataset, FoldSplit, InputFormat, RatingRecord};
pub use error::{Error, Result};
pub use hashing::{ExclusionChain, HashFamily};
pub use knn::{GreedyParams, GreedyVariant, KnnGraph, Neighbor, OracleMode, SimilarityOracle};
pub use pipeline::{BuildRun, C2Params};
pub use scheduler::Solver;
pub use similarity::GoldFingerSig;
