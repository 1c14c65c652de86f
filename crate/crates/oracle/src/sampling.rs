//! Exact samplers for the Wishart and matrix normal laws used by the Monte
//! Carlo oracles.

use dagscore::linalg::Chol;
use dagscore::mnw::MnwHyper;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

pub fn standard_normal_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Draws `Ω ~ W_q(a, R)` for the density
/// `p(Ω) ∝ |R|^{a/2} |Ω|^{(a-q-1)/2} exp(-tr(ΩR)/2)`, i.e. `E[Ω] = a R⁻¹`,
/// by the Bartlett decomposition: `Ω = T Tᵀ` with `T = L A`, `L Lᵀ = R⁻¹`,
/// `A` lower triangular with `A_jj² ~ χ²_{a-j+1}` and standard normal
/// subdiagonal.
pub struct WishartSampler {
    dim: usize,
    dof: f64,
    scale_chol: Chol, // factor of R; L = L_Rᵀ⁻¹ satisfies L Lᵀ = R⁻¹
}

impl WishartSampler {
    pub fn new(dof: f64, r_scale: &DMatrix<f64>) -> dagscore::Result<Self> {
        let dim = r_scale.nrows();
        if dof <= dim as f64 - 1.0 {
            return Err(dagscore::Error::ImproperDof {
                dof,
                minimum: dim as f64 - 1.0,
                dim,
            });
        }
        Ok(WishartSampler {
            dim,
            dof,
            scale_chol: Chol::factor(r_scale)?,
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> DMatrix<f64> {
        self.sample_with_factor(rng).0
    }

    /// Returns the draw together with its square root `T` (`Ω = T Tᵀ`), so
    /// downstream conditional sampling never refactorizes a nearly singular
    /// draw.
    pub fn sample_with_factor<R: Rng>(&self, rng: &mut R) -> (DMatrix<f64>, DMatrix<f64>) {
        let q = self.dim;
        let mut a = DMatrix::zeros(q, q);
        for j in 0..q {
            let chi = ChiSquared::new(self.dof - j as f64).expect("dof checked at construction");
            a[(j, j)] = chi.sample(rng).sqrt();
            for i in (j + 1)..q {
                a[(i, j)] = StandardNormal.sample(rng);
            }
        }
        let t = self.scale_chol.solve_transpose_lower(&a);
        (&t * t.transpose(), t)
    }
}

/// Draws `B ~ N(M, U⁻¹, V⁻¹)` given a Cholesky factor of the row precision
/// `U` and any square root `T` of the column precision (`V = T Tᵀ`):
/// `B = M + L_Uᵀ⁻¹ G T⁻¹`.
pub fn sample_matrix_normal_prec<R: Rng>(
    rng: &mut R,
    mean: &DMatrix<f64>,
    row_prec: &Chol,
    col_prec_factor: &DMatrix<f64>,
) -> DMatrix<f64> {
    let g = standard_normal_matrix(rng, mean.nrows(), mean.ncols());
    let half = row_prec.solve_transpose_lower(&g);
    let solved = col_prec_factor
        .transpose()
        .lu()
        .solve(&half.transpose())
        .expect("wishart square roots are invertible");
    mean + solved.transpose()
}

/// Joint draw `(B, Ω)` from a matrix-normal-Wishart law.
pub struct MnwSampler {
    wishart: WishartSampler,
    b_mean: DMatrix<f64>,
    c_chol: Chol,
}

impl MnwSampler {
    pub fn new(hyper: &MnwHyper) -> dagscore::Result<Self> {
        Ok(MnwSampler {
            wishart: WishartSampler::new(hyper.dof, &hyper.r_scale)?,
            b_mean: hyper.b_mean.clone(),
            c_chol: Chol::factor(&hyper.c_prec)?,
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> (DMatrix<f64>, DMatrix<f64>) {
        let (omega, factor) = self.wishart.sample_with_factor(rng);
        let b = sample_matrix_normal_prec(rng, &self.b_mean, &self.c_chol, &factor);
        (b, omega)
    }
}
