//! Direct log-density evaluators for the sampling model and the
//! matrix-normal-Wishart prior/posterior, used to verify the conjugacy
//! identity pointwise.

use dagscore::linalg::Chol;
use dagscore::mnw::{log_multigamma, MnwHyper};
use nalgebra::DMatrix;

const LN_2PI: f64 = 1.837_877_066_409_345_6;

/// Log likelihood of the regression model:
/// `(n/2) log|Ω| - (nq/2) log 2π - tr(Ω (Y-XB)ᵀ(Y-XB))/2`.
pub fn log_likelihood(
    y: &DMatrix<f64>,
    x: &DMatrix<f64>,
    b: &DMatrix<f64>,
    omega: &DMatrix<f64>,
) -> f64 {
    let n = y.nrows() as f64;
    let q = y.ncols() as f64;
    let resid = y - x * b;
    let scatter = resid.transpose() * &resid;
    let log_det = Chol::factor(omega).expect("omega must be s.p.d.").log_det();
    0.5 * n * log_det - 0.5 * n * q * LN_2PI - 0.5 * trace_product(omega, &scatter)
}

/// Log density of `Ω ~ W_q(a, R)`:
/// `-(aq/2) log 2 - log Γ_q(a/2) + (a/2) log|R| + ((a-q-1)/2) log|Ω|
///  - tr(ΩR)/2`.
pub fn log_wishart_pdf(omega: &DMatrix<f64>, dof: f64, r_scale: &DMatrix<f64>) -> f64 {
    let q = r_scale.nrows() as f64;
    let log_det_r = Chol::factor(r_scale)
        .expect("scale must be s.p.d.")
        .log_det();
    let log_det_o = Chol::factor(omega).expect("omega must be s.p.d.").log_det();
    -0.5 * dof * q * std::f64::consts::LN_2 - log_multigamma(r_scale.nrows(), dof / 2.0).unwrap()
        + 0.5 * dof * log_det_r
        + 0.5 * (dof - q - 1.0) * log_det_o
        - 0.5 * trace_product(omega, r_scale)
}

/// Log density of `B | Ω ~ N(M, C⁻¹, Ω⁻¹)` (row precision `C`, column
/// precision `Ω`).
pub fn log_matrix_normal_prec_pdf(
    b: &DMatrix<f64>,
    mean: &DMatrix<f64>,
    c_prec: &DMatrix<f64>,
    omega: &DMatrix<f64>,
) -> f64 {
    let rows = b.nrows() as f64; // p + 1
    let q = b.ncols() as f64;
    let log_det_c = Chol::factor(c_prec).expect("C must be s.p.d.").log_det();
    let log_det_o = Chol::factor(omega).expect("omega must be s.p.d.").log_det();
    let dev = b - mean;
    let scatter = dev.transpose() * c_prec * &dev;
    0.5 * q * log_det_c + 0.5 * rows * log_det_o
        - 0.5 * rows * q * LN_2PI
        - 0.5 * trace_product(omega, &scatter)
}

/// Joint log density of `(B, Ω)` under a matrix-normal-Wishart law.
pub fn log_mnw_pdf(b: &DMatrix<f64>, omega: &DMatrix<f64>, hyper: &MnwHyper) -> f64 {
    log_matrix_normal_prec_pdf(b, &hyper.b_mean, &hyper.c_prec, omega)
        + log_wishart_pdf(omega, hyper.dof, &hyper.r_scale)
}

fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}
