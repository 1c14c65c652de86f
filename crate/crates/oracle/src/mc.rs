//! Monte Carlo integration oracles. Each one estimates a marginal likelihood
//! by direct sampling from the relevant prior and reports the log sample mean
//! with a jackknife standard error, so the closed forms can be bracketed
//! within stated error bars.

use dagscore::fractional::FractionalConfig;
use dagscore::linalg::{principal, select, Chol};
use dagscore::mnw::{compute_stats, DesignMatrix, MnwHyper, ResponseMatrix};
use dagscore::subset::VertexSet;
use dagscore::{Dag, Error, Result};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::density::log_likelihood;
use crate::sampling::{sample_matrix_normal_prec, MnwSampler, WishartSampler};

#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub draws: usize,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn brackets(&self, value: f64, k: f64) -> bool {
        (value - self.estimate).abs() <= k * self.std_error
    }
}

/// `log((Σ exp l_i)/M)` with a leave-one-out jackknife standard error.
pub fn log_mean_exp_with_jackknife(log_weights: &[f64]) -> McEstimate {
    let m = log_weights.len();
    assert!(m >= 2, "jackknife needs at least two draws");
    let a = log_weights
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let sum_rel: f64 = log_weights.iter().map(|l| (l - a).exp()).sum();
    let log_sum = a + sum_rel.ln();
    let estimate = log_sum - (m as f64).ln();

    let ln_m1 = ((m - 1) as f64).ln();
    let mut loo = Vec::with_capacity(m);
    for (i, &l) in log_weights.iter().enumerate() {
        let rel = (l - log_sum).exp();
        let log_rest = if rel < 1.0 - 1e-12 {
            log_sum + (-rel).ln_1p()
        } else {
            // one weight carries essentially all mass; recompute exactly
            let others = log_weights
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &x)| x);
            let a2 = others.clone().fold(f64::NEG_INFINITY, f64::max);
            if a2 == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                a2 + others.map(|x| (x - a2).exp()).sum::<f64>().ln()
            }
        };
        loo.push(log_rest - ln_m1);
    }
    let mean = loo.iter().sum::<f64>() / m as f64;
    let ss: f64 = loo.iter().map(|v| (v - mean) * (v - mean)).sum();
    let std_error = ((m - 1) as f64 / m as f64 * ss).sqrt();
    McEstimate {
        estimate,
        std_error,
        draws: m,
    }
}

/// Estimates the plain conjugate marginal `m(Y)` by averaging the likelihood
/// over prior draws.
pub fn mc_marginal_full(
    hyper: &MnwHyper,
    y: &ResponseMatrix,
    x: &DesignMatrix,
    draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    let sampler = MnwSampler::new(hyper)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut logs = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (b, omega) = sampler.sample(&mut rng);
        logs.push(log_likelihood(y.values(), x.values(), &b, &omega));
    }
    Ok(log_mean_exp_with_jackknife(&logs))
}

/// Estimates the fractional marginal of a response subset by averaging the
/// `(1-b)`-power likelihood over draws from the fractional subset prior.
pub fn mc_subset_log_ml(
    config: &FractionalConfig,
    y: &ResponseMatrix,
    x: &DesignMatrix,
    subset: &VertexSet,
    draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    let stats = compute_stats(y, x)?;
    let p = x.p();
    let q = y.q();
    let frac = config.resolve(p, q, y.n())?;
    if subset.is_empty() || subset.len() >= frac.n - p {
        return Err(Error::Invalid(format!(
            "subset {subset:?} must be nonempty with fewer than n - p = {} members",
            frac.n - p
        )));
    }
    let idx = subset.to_vec();
    let rows: Vec<usize> = (0..=p).collect();
    let b_frac = frac.n0 as f64 / frac.n as f64;
    let hyper = MnwHyper::new(
        select(&stats.bhat, &rows, &idx),
        b_frac * &stats.xtx,
        frac.prior_dof() - subset.complement_len() as f64,
        b_frac * principal(&stats.ete, &idx),
    )?;
    let y_j = select(y.values(), &(0..y.n()).collect::<Vec<_>>(), &idx);
    let power = (frac.n - frac.n0) as f64 / frac.n as f64;
    let sampler = MnwSampler::new(&hyper)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut logs = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (b, omega) = sampler.sample(&mut rng);
        logs.push(power * log_likelihood(&y_j, x.values(), &b, &omega));
    }
    Ok(log_mean_exp_with_jackknife(&logs))
}

struct VertexPrior {
    m: usize,
    wishart: WishartSampler,
    bhat_f: DMatrix<f64>,
    y_col: Vec<f64>,
    y_parents: DMatrix<f64>, // n × (m-1), parent columns in sorted order
}

/// Estimates the DAG marginal likelihood by direct integration: per-vertex
/// parameters `(α_j, γ_j, λ_j)` are drawn independently from the fractional
/// priors induced on each family (the Wishart of the family precision with
/// the vertex ordered last, then the conditional matrix normal for the
/// coefficients), and the `(1-b)`-power likelihood is averaged.
///
/// Restricted to tiny instances (`q ≤ 3`, `p ≤ 1`, `n ≤ 10`); this is a
/// certification tool, not a scorer.
pub fn mc_oracle_log_ml(
    dag: &Dag,
    config: &FractionalConfig,
    y: &ResponseMatrix,
    x: &DesignMatrix,
    draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    let q = y.q();
    let n = y.n();
    let p = x.p();
    if q > 3 || p > 1 || n > 10 {
        return Err(Error::Config(format!(
            "the Monte Carlo oracle is limited to q ≤ 3, p ≤ 1, n ≤ 10 (got q={q}, p={p}, n={n})"
        )));
    }
    if draws < 2 {
        return Err(Error::Config("need at least two draws".into()));
    }
    let stats = compute_stats(y, x)?;
    let frac = config.resolve(p, q, n)?;
    let b_frac = frac.n0 as f64 / frac.n as f64;
    let power = (frac.n - frac.n0) as f64 / frac.n as f64;
    let c_prec = b_frac * &stats.xtx;
    let c_chol = Chol::factor(&c_prec)?;
    let rows: Vec<usize> = (0..=p).collect();

    let mut vertices = Vec::with_capacity(q);
    for j in 0..q {
        let mut order = dag.parents(j).to_vec();
        order.push(j); // the vertex goes last in its family
        let m = order.len();
        let a_f = frac.prior_dof() - (q - m) as f64;
        if a_f <= m as f64 - 1.0 {
            return Err(Error::ImproperDof {
                dof: a_f,
                minimum: m as f64 - 1.0,
                dim: m,
            });
        }
        let r_f = b_frac * principal(&stats.ete, &order);
        let wishart = WishartSampler::new(a_f, &r_f)?;
        let bhat_f = select(&stats.bhat, &rows, &order);
        let y_col: Vec<f64> = (0..n).map(|i| y.values()[(i, j)]).collect();
        let parent_idx: Vec<usize> = order[..m - 1].to_vec();
        let y_parents = select(y.values(), &(0..n).collect::<Vec<_>>(), &parent_idx);
        vertices.push(VertexPrior {
            m,
            wishart,
            bhat_f,
            y_col,
            y_parents,
        });
    }

    const LN_2PI: f64 = 1.837_877_066_409_345_6;
    let xm = x.values();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut logs = Vec::with_capacity(draws);
    for _ in 0..draws {
        let mut logw = 0.0;
        for v in &vertices {
            let (omega_f, factor) = v.wishart.sample_with_factor(&mut rng);
            let b_f = sample_matrix_normal_prec(&mut rng, &v.bhat_f, &c_chol, &factor);
            let m = v.m;
            let lambda = omega_f[(m - 1, m - 1)];
            // γ = -Ω_{pa,j}/λ and α = B_j + B_pa Ω_{pa,j}/λ
            let mut gamma = vec![0.0; m - 1];
            for k in 0..m - 1 {
                gamma[k] = -omega_f[(k, m - 1)] / lambda;
            }
            let mut alpha = vec![0.0; p + 1];
            for r in 0..=p {
                let mut acc = b_f[(r, m - 1)];
                for k in 0..m - 1 {
                    acc -= b_f[(r, k)] * gamma[k];
                }
                alpha[r] = acc;
            }
            let mut ll = 0.0;
            for i in 0..n {
                let mut mean = 0.0;
                for r in 0..=p {
                    mean += xm[(i, r)] * alpha[r];
                }
                for k in 0..m - 1 {
                    mean += v.y_parents[(i, k)] * gamma[k];
                }
                let dev = v.y_col[i] - mean;
                ll += 0.5 * lambda.ln() - 0.5 * LN_2PI - 0.5 * lambda * dev * dev;
            }
            logw += power * ll;
        }
        logs.push(logw);
    }
    Ok(log_mean_exp_with_jackknife(&logs))
}
