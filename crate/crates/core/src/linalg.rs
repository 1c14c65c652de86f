//! Dense symmetric linear algebra helpers: Cholesky factorization with a
//! relative pivot tolerance, log-determinants, and factorized solves.
//!
//! A failed factorization is the definitive "not s.p.d." test everywhere in
//! this crate; there is no eigenvalue fallback. Explicit matrix inverses are
//! deliberately absent from this module.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative pivot floor: a pivot below `PIVOT_RTOL * max diagonal` fails the
/// factorization.
pub const PIVOT_RTOL: f64 = 1e-10;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Chol {
    lower: DMatrix<f64>,
}

impl Chol {
    /// Factorizes a symmetric matrix, failing with [`Error::NotSpd`] as soon
    /// as a pivot falls to or below `PIVOT_RTOL` times the largest diagonal
    /// entry of the input. Only the lower triangle of `a` is read.
    pub fn factor(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::Dimension(format!(
                "cholesky needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let mut max_diag: f64 = 0.0;
        for i in 0..n {
            max_diag = max_diag.max(a[(i, i)].abs());
        }
        let tol = if max_diag > 0.0 {
            PIVOT_RTOL * max_diag
        } else {
            PIVOT_RTOL
        };

        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut pivot = a[(j, j)];
            for k in 0..j {
                pivot -= l[(j, k)] * l[(j, k)];
            }
            if !pivot.is_finite() || pivot <= tol {
                return Err(Error::NotSpd {
                    index: j,
                    pivot,
                    tolerance: tol,
                });
            }
            let diag = pivot.sqrt();
            l[(j, j)] = diag;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / diag;
            }
        }
        Ok(Chol { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    /// log |A| = 2 Σ log L_jj.
    pub fn log_det(&self) -> f64 {
        2.0 * self.lower.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Solves A x = b for a matrix right-hand side via two triangular solves.
    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let y = self
            .lower
            .solve_lower_triangular(b)
            .expect("cholesky pivots are strictly positive");
        self.lower
            .tr_solve_lower_triangular(&y)
            .expect("cholesky pivots are strictly positive")
    }

    /// Solves Lᵀ x = b (useful for sampling with precision factorizations).
    pub fn solve_transpose_lower(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.lower
            .tr_solve_lower_triangular(b)
            .expect("cholesky pivots are strictly positive")
    }
}

/// (A + Aᵀ)/2, guarding downstream factorizations against rounding asymmetry.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = a.clone();
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Largest absolute entry difference, for test tolerances.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// Copies `a[rows, cols]` in the given index order.
pub fn select(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows.len(), cols.len());
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            out[(i, j)] = a[(r, c)];
        }
    }
    out
}

/// Principal submatrix `a[idx, idx]`.
pub fn principal(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    select(a, idx, idx)
}
