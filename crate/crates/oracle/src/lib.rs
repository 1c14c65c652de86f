//! Sampling-based certification oracles for the closed-form scores in
//! `dagscore`. Everything here exists to validate the analytic path by direct
//! integration; none of it is needed to compute scores. Explicit matrix
//! inverses and brute-force formulas are deliberate in this crate.

pub mod density;
pub mod mc;
pub mod sampling;

pub use mc::{mc_marginal_full, mc_oracle_log_ml, mc_subset_log_ml, McEstimate};
