//! Matrix-normal-Wishart conjugate machinery for the multivariate regression
//! model `Y = X B + E`, with `E` matrix normal with identity row precision and
//! column precision `Omega ~ Wishart(a, R)`, and `B | Omega` matrix normal
//! with column precision `C`.
//!
//! Everything here is a pure function of its inputs; all probability
//! quantities live in log space, and determinants come from Cholesky
//! factorizations (a failed factorization is the definitive non-s.p.d.
//! signal).

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{principal, symmetrize, Chol};
use crate::subset::VertexSet;

const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Observations on `q` response variables, one row per observation.
#[derive(Debug, Clone)]
pub struct ResponseMatrix {
    values: DMatrix<f64>,
    labels: Vec<String>,
}

impl ResponseMatrix {
    pub fn new(values: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if values.nrows() < 1 || values.ncols() < 1 {
            return Err(Error::Dimension(
                "response matrix needs at least one row and one column".into(),
            ));
        }
        if labels.len() != values.ncols() {
            return Err(Error::Dimension(format!(
                "{} column labels for {} response columns",
                labels.len(),
                values.ncols()
            )));
        }
        for (j, l) in labels.iter().enumerate() {
            if labels[..j].contains(l) {
                return Err(Error::Invalid(format!("duplicate response label {l:?}")));
            }
        }
        check_finite(&values, "response matrix")?;
        Ok(ResponseMatrix { values, labels })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn q(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Candidate predictors, one column per predictor; designs are assembled by
/// selecting a subset of columns and prepending the intercept.
#[derive(Debug, Clone)]
pub struct PredictorPool {
    values: DMatrix<f64>,
    labels: Vec<String>,
}

impl PredictorPool {
    pub fn new(values: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.ncols() {
            return Err(Error::Dimension(format!(
                "{} labels for {} predictor columns",
                labels.len(),
                values.ncols()
            )));
        }
        for (j, l) in labels.iter().enumerate() {
            if labels[..j].contains(l) {
                return Err(Error::Invalid(format!("duplicate predictor label {l:?}")));
            }
        }
        check_finite(&values, "predictor pool")?;
        Ok(PredictorPool { values, labels })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p_star(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Design matrix with the unit vector as first column and `p` predictors.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    predictor_labels: Vec<String>,
}

impl DesignMatrix {
    pub fn new(values: DMatrix<f64>, predictor_labels: Vec<String>) -> Result<Self> {
        if values.ncols() < 1 {
            return Err(Error::Dimension(
                "design matrix needs an intercept column".into(),
            ));
        }
        if predictor_labels.len() + 1 != values.ncols() {
            return Err(Error::Dimension(format!(
                "{} predictor labels for {} design columns",
                predictor_labels.len(),
                values.ncols()
            )));
        }
        if values.column(0).iter().any(|&v| v != 1.0) {
            return Err(Error::Invalid(
                "first design column must be exactly the unit vector".into(),
            ));
        }
        check_finite(&values, "design matrix")?;
        Ok(DesignMatrix {
            values,
            predictor_labels,
        })
    }

    /// The `n x 1` all-ones design (no predictors).
    pub fn intercept_only(n: usize) -> Self {
        DesignMatrix {
            values: DMatrix::from_element(n, 1, 1.0),
            predictor_labels: Vec::new(),
        }
    }

    /// Assembles `[1 | Z_sel]` from a predictor pool; `selected` holds
    /// 0-based pool column indices in the requested order.
    pub fn from_pool(pool: &PredictorPool, selected: &[usize]) -> Result<Self> {
        let n = pool.n();
        let mut values = DMatrix::zeros(n, selected.len() + 1);
        values.column_mut(0).fill(1.0);
        let mut labels = Vec::with_capacity(selected.len());
        for (k, &j) in selected.iter().enumerate() {
            if j >= pool.p_star() {
                return Err(Error::Invalid(format!(
                    "predictor index {} out of range for pool of size {}",
                    j + 1,
                    pool.p_star()
                )));
            }
            values.set_column(k + 1, &pool.values().column(j));
            labels.push(pool.labels()[j].clone());
        }
        DesignMatrix::new(values, labels)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of predictors (columns minus the intercept).
    pub fn p(&self) -> usize {
        self.values.ncols() - 1
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn predictor_labels(&self) -> &[String] {
        &self.predictor_labels
    }

    fn column_name(&self, index: usize) -> String {
        if index == 0 {
            "(intercept)".to_string()
        } else {
            self.predictor_labels
                .get(index - 1)
                .cloned()
                .unwrap_or_else(|| format!("column {}", index + 1))
        }
    }
}

/// Sufficient statistics of the regression: cross-products, the least-squares
/// coefficient matrix, and the residual cross-product.
#[derive(Debug, Clone)]
pub struct SufficientStats {
    pub xtx: DMatrix<f64>,
    pub xty: DMatrix<f64>,
    pub bhat: DMatrix<f64>,
    pub ete: DMatrix<f64>,
    pub n: usize,
}

/// Least squares via the factorized normal equations. Rank deficiency of `X`
/// surfaces as a pivot failure in the Cholesky of `XᵀX` and is reported with
/// the offending design column named.
pub fn compute_stats(y: &ResponseMatrix, x: &DesignMatrix) -> Result<SufficientStats> {
    if y.n() != x.n() {
        return Err(Error::Dimension(format!(
            "response has {} rows but design has {}",
            y.n(),
            x.n()
        )));
    }
    let xm = x.values();
    let ym = y.values();
    let xtx = symmetrize(&(xm.transpose() * xm));
    let chol = Chol::factor(&xtx).map_err(|e| match e {
        Error::NotSpd { index, .. } => Error::RankDeficient {
            columns: vec![x.column_name(index)],
        },
        other => other,
    })?;
    let xty = xm.transpose() * ym;
    let bhat = chol.solve(&xty);
    let resid = ym - xm * &bhat;
    let ete = symmetrize(&(resid.transpose() * &resid));
    Ok(SufficientStats {
        xtx,
        xty,
        bhat,
        ete,
        n: y.n(),
    })
}

/// Matrix-normal-Wishart hyperparameters `(B, C, a, R)`: prior mean of the
/// coefficient matrix, its column precision, Wishart degrees of freedom, and
/// Wishart scale.
#[derive(Debug, Clone)]
pub struct MnwHyper {
    pub b_mean: DMatrix<f64>,
    pub c_prec: DMatrix<f64>,
    pub dof: f64,
    pub r_scale: DMatrix<f64>,
}

impl MnwHyper {
    pub fn new(
        b_mean: DMatrix<f64>,
        c_prec: DMatrix<f64>,
        dof: f64,
        r_scale: DMatrix<f64>,
    ) -> Result<Self> {
        let q = r_scale.nrows();
        if b_mean.ncols() != q {
            return Err(Error::Dimension(format!(
                "prior mean has {} columns but scale is {}x{}",
                b_mean.ncols(),
                q,
                q
            )));
        }
        if c_prec.nrows() != b_mean.nrows() || c_prec.ncols() != b_mean.nrows() {
            return Err(Error::Dimension(format!(
                "coefficient precision is {}x{} but prior mean has {} rows",
                c_prec.nrows(),
                c_prec.ncols(),
                b_mean.nrows()
            )));
        }
        if dof <= q as f64 - 1.0 {
            return Err(Error::ImproperDof {
                dof,
                minimum: q as f64 - 1.0,
                dim: q,
            });
        }
        Chol::factor(&c_prec)?;
        Chol::factor(&r_scale)?;
        Ok(MnwHyper {
            b_mean,
            c_prec,
            dof,
            r_scale,
        })
    }

    /// Response dimension `q`.
    pub fn q(&self) -> usize {
        self.r_scale.nrows()
    }

    /// Coefficient rows `p + 1`.
    pub fn p_plus_1(&self) -> usize {
        self.b_mean.nrows()
    }
}

/// log of the q-dimensional gamma function:
/// `log Γ_q(x) = (q(q-1)/4) log π + Σ_{j=1..q} log Γ(x + (1-j)/2)`.
pub fn log_multigamma(q: usize, x: f64) -> Result<f64> {
    let bound = (q as f64 - 1.0) / 2.0;
    if !(x > bound) {
        return Err(Error::GammaDomain { q, x, bound });
    }
    let mut acc = (q * (q - 1)) as f64 / 4.0 * LN_PI;
    for j in 1..=q {
        acc += ln_gamma(x + (1.0 - j as f64) / 2.0);
    }
    Ok(acc)
}

/// log of the matrix-normal-Wishart normalizing constant:
/// `log K(C, R, a) = (q(p+1)/2) log 2π + (aq/2) log 2 + log Γ_q(a/2)
///  - (q/2) log|C| - (a/2) log|R|`.
pub fn log_norm_const(hyper: &MnwHyper) -> Result<f64> {
    let q = hyper.q() as f64;
    let p1 = hyper.p_plus_1() as f64;
    let a = hyper.dof;
    let log_det_c = Chol::factor(&hyper.c_prec)?.log_det();
    let log_det_r = Chol::factor(&hyper.r_scale)?.log_det();
    Ok(q * p1 / 2.0 * (2.0 * std::f64::consts::PI).ln()
        + a * q / 2.0 * std::f64::consts::LN_2
        + log_multigamma(hyper.q(), a / 2.0)?
        - q / 2.0 * log_det_c
        - a / 2.0 * log_det_r)
}

/// Conjugate prior-to-posterior update:
/// `B ↦ (C + XᵀX)⁻¹(XᵀY + C B)`, `C ↦ C + XᵀX`, `a ↦ a + n`,
/// `R ↦ R + ÊᵀÊ + D` with `D = (B - B̂)ᵀ{C⁻¹ + (XᵀX)⁻¹}⁻¹(B - B̂)`.
///
/// `D` is evaluated through the equivalent solve-based form
/// `Δᵀ XᵀX Δ - (XᵀX Δ)ᵀ (C + XᵀX)⁻¹ (XᵀX Δ)`, which avoids forming either
/// explicit inverse.
pub fn posterior_update(hyper: &MnwHyper, stats: &SufficientStats) -> Result<MnwHyper> {
    if stats.xtx.nrows() != hyper.p_plus_1() {
        return Err(Error::Dimension(format!(
            "stats are for {} coefficient rows, hyperparameters for {}",
            stats.xtx.nrows(),
            hyper.p_plus_1()
        )));
    }
    if stats.ete.nrows() != hyper.q() {
        return Err(Error::Dimension(format!(
            "stats are for {} responses, hyperparameters for {}",
            stats.ete.nrows(),
            hyper.q()
        )));
    }
    let c_post = symmetrize(&(&hyper.c_prec + &stats.xtx));
    let chol_c_post = Chol::factor(&c_post)?;
    let b_post = chol_c_post.solve(&(&stats.xty + &hyper.c_prec * &hyper.b_mean));

    let delta = &hyper.b_mean - &stats.bhat;
    let w = &stats.xtx * &delta;
    let d = symmetrize(&(delta.transpose() * &w - w.transpose() * chol_c_post.solve(&w)));

    MnwHyper::new(
        b_post,
        c_post,
        hyper.dof + stats.n as f64,
        symmetrize(&(&hyper.r_scale + &stats.ete + d)),
    )
}

/// Closed-form log marginal data density of the full response matrix:
/// the log ratio of posterior to prior normalizing constants minus
/// `(nq/2) log 2π`.
pub fn log_marginal_full(hyper: &MnwHyper, stats: &SufficientStats) -> Result<f64> {
    let posterior = posterior_update(hyper, stats)?;
    let nq = stats.n as f64 * hyper.q() as f64;
    Ok(log_norm_const(&posterior)?
        - log_norm_const(hyper)?
        - nq / 2.0 * (2.0 * std::f64::consts::PI).ln())
}

/// Hyperparameters induced on a column subset `J`: column-selected mean,
/// unchanged coefficient precision, degrees of freedom reduced by the
/// complement size, and the principal submatrix of the scale. This is the
/// prior of `(B_J, Ω_{JJ·J̄})`, independent of the remaining blocks.
pub fn subset_hyper(hyper: &MnwHyper, subset: &VertexSet) -> Result<MnwHyper> {
    if subset.universe() != hyper.q() {
        return Err(Error::Dimension(format!(
            "subset universe {} does not match response dimension {}",
            subset.universe(),
            hyper.q()
        )));
    }
    if subset.is_empty() {
        return Err(Error::Invalid("subset must be nonempty".into()));
    }
    let idx = subset.to_vec();
    let dof = hyper.dof - subset.complement_len() as f64;
    // MnwHyper::new re-checks dof > |J| - 1, the Wishart propriety bound.
    let rows: Vec<usize> = (0..hyper.p_plus_1()).collect();
    MnwHyper::new(
        crate::linalg::select(&hyper.b_mean, &rows, &idx),
        hyper.c_prec.clone(),
        dof,
        principal(&hyper.r_scale, &idx),
    )
}

fn check_finite(values: &DMatrix<f64>, what: &str) -> Result<()> {
    for j in 0..values.ncols() {
        for i in 0..values.nrows() {
            if !values[(i, j)].is_finite() {
                return Err(Error::Invalid(format!(
                    "{what} has non-finite entry at row {}, column {}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}
