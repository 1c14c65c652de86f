//! Marginal likelihoods and structure search for Gaussian multivariate
//! regression models whose error precision matrix is Markov with respect to a
//! sparse DAG or a decomposable undirected graph.
//!
//! The scoring pipeline is built from three layers:
//!
//! * [`mnw`] — matrix-normal-Wishart conjugate machinery: sufficient
//!   statistics, normalizing constants, posterior updates, and the closed-form
//!   marginal data distribution for the full response matrix and column
//!   subsets.
//! * [`fractional`] — the objective layer: a data-based fractional prior with
//!   its propriety conditions and closed-form fractional marginal likelihoods
//!   for arbitrary response subsets.
//! * [`scorer`] — graph-level scores: the per-vertex family/parent
//!   factorization for DAGs and the clique/separator factorization for
//!   decomposable graphs, backed by a write-once subset score cache.
//!
//! [`graphs`] supplies the graph machinery (DAG validation, Markov-equivalence
//! fingerprints, chordality and junction trees) and [`search`] hill-climbs or
//! samples over structures, optionally selecting predictors jointly.
//!
//! All probability quantities are computed and stored in log space.

pub mod error;
pub mod fractional;
pub mod graphs;
pub mod linalg;
pub mod mnw;
pub mod scorer;
pub mod search;
pub mod subset;

pub use error::{Error, Result};
pub use fractional::{FractionalConfig, FractionalScorer, SubsetScore};
pub use graphs::{Dag, DecomposableGraph, EquivalenceFingerprint};
pub use mnw::{DesignMatrix, MnwHyper, PredictorPool, ResponseMatrix, SufficientStats};
pub use scorer::{ScoreCache, ScoreReport};
pub use search::{ModelPrior, SearchResult};
pub use subset::VertexSet;
