use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Cholesky factorization hit a pivot at or below the relative tolerance.
    /// This is the definitive non-s.p.d. signal throughout the crate.
    #[error("matrix is not symmetric positive definite: pivot {index} is {pivot:.6e} (tolerance {tolerance:.6e})")]
    NotSpd {
        index: usize,
        pivot: f64,
        tolerance: f64,
    },

    #[error("design matrix is rank deficient near column(s) {columns:?}")]
    RankDeficient { columns: Vec<String> },

    #[error("Wishart degrees of freedom {dof} must exceed dimension minus one ({minimum}) for a {dim}x{dim} scale")]
    ImproperDof { dof: f64, minimum: f64, dim: usize },

    #[error("multivariate gamma argument {x} must exceed (q-1)/2 = {bound} for q = {q}")]
    GammaDomain { q: usize, x: f64, bound: f64 },

    #[error("fractional prior propriety condition {condition} fails: {detail}")]
    Propriety {
        condition: &'static str,
        detail: String,
    },

    #[error("directed graph has a cycle: {}", format_cycle(.cycle))]
    Cyclic { cycle: Vec<usize> },

    #[error("graph is not chordal: chordless cycle {}", format_cycle(.cycle))]
    NotChordal { cycle: Vec<usize> },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

fn format_cycle(cycle: &[usize]) -> String {
    cycle
        .iter()
        .map(|v| (v + 1).to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}
