//! Certification of the closed forms by independent integration and exact
//! pointwise identities.

use dagscore::fractional::{FractionalConfig, FractionalScorer};
use dagscore::mnw::{
    compute_stats, log_marginal_full, posterior_update, DesignMatrix, MnwHyper, ResponseMatrix,
};
use dagscore::scorer::{dag_log_ml, ScoreCache};
use dagscore::{Dag, VertexSet};
use dagscore_oracle::density::{log_likelihood, log_mnw_pdf};
use dagscore_oracle::sampling::{MnwSampler, WishartSampler};
use dagscore_oracle::{mc_marginal_full, mc_oracle_log_ml, mc_subset_log_ml};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::function::gamma::gamma_lr;

fn random_problem(n: usize, q: usize, p: usize, seed: u64) -> (ResponseMatrix, DesignMatrix) {
    let mut rng = StdRng::seed_from_u64(seed);
    let y = ResponseMatrix::new(
        DMatrix::from_fn(n, q, |_, _| rng.gen_range(-1.5..1.5)),
        (0..q).map(|j| format!("Y{}", j + 1)).collect(),
    )
    .unwrap();
    let mut xv = DMatrix::from_fn(n, p + 1, |_, _| rng.gen_range(-1.0..1.0));
    xv.column_mut(0).fill(1.0);
    let x = DesignMatrix::new(xv, (0..p).map(|j| format!("Z{}", j + 1)).collect()).unwrap();
    (y, x)
}

fn random_spd(dim: usize, rng: &mut StdRng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(dim, dim) * (dim as f64)
}

fn random_hyper(p_plus_1: usize, q: usize, rng: &mut StdRng) -> MnwHyper {
    MnwHyper::new(
        DMatrix::from_fn(p_plus_1, q, |_, _| rng.gen_range(-0.5..0.5)),
        random_spd(p_plus_1, rng),
        q as f64 + rng.gen_range(0.5..3.0),
        random_spd(q, rng),
    )
    .unwrap()
}

/// `m(Y) = f(Y | B, Ω) p(B, Ω) / p(B, Ω | Y)` at any parameter point.
#[test]
fn conjugacy_identity_holds_pointwise() {
    let mut rng = StdRng::seed_from_u64(2024);
    for trial in 0..10u64 {
        let n = 5 + (trial as usize % 6); // ≤ 10
        let q = 1 + (trial as usize % 3);
        let p = trial as usize % 3;
        let (y, x) = random_problem(n, q, p, 3000 + trial);
        let stats = compute_stats(&y, &x).unwrap();
        let hyper = random_hyper(p + 1, q, &mut rng);
        let posterior = posterior_update(&hyper, &stats).unwrap();
        let closed = log_marginal_full(&hyper, &stats).unwrap();
        let sampler = MnwSampler::new(&hyper).unwrap();
        let mut draw_rng = ChaCha12Rng::seed_from_u64(7000 + trial);
        for _ in 0..3 {
            let (b, omega) = sampler.sample(&mut draw_rng);
            let identity = log_likelihood(y.values(), x.values(), &b, &omega)
                + log_mnw_pdf(&b, &omega, &hyper)
                - log_mnw_pdf(&b, &omega, &posterior);
            assert!(
                (identity - closed).abs() < 1e-8,
                "trial {trial}: identity {identity} vs closed {closed}"
            );
        }
    }
}

/// The scalar marginal is bracketed by direct prior-draw integration.
#[test]
fn marginal_full_matches_monte_carlo() {
    let (y, x) = random_problem(6, 1, 0, 42);
    let stats = compute_stats(&y, &x).unwrap();
    let hyper = MnwHyper::new(
        DMatrix::from_element(1, 1, stats.bhat[(0, 0)] + 0.3),
        DMatrix::from_element(1, 1, 1.5),
        3.0,
        DMatrix::from_element(1, 1, 2.0),
    )
    .unwrap();
    let closed = log_marginal_full(&hyper, &stats).unwrap();
    let mc = mc_marginal_full(&hyper, &y, &x, 200_000, 99).unwrap();
    assert!(
        mc.brackets(closed, 3.0),
        "closed {closed} vs mc {} ± {}",
        mc.estimate,
        mc.std_error
    );
}

/// The fractional subset marginal is the mean of the `(1-b)`-power likelihood
/// under fractional-prior draws.
#[test]
fn fractional_subset_matches_monte_carlo() {
    let (y, x) = random_problem(8, 2, 0, 77);
    let config = FractionalConfig::Recommended;
    let scorer = FractionalScorer::new(&config, &y, &x).unwrap();
    let j = VertexSet::singleton(2, 0);
    let closed = scorer.log_ml_subset(&j).log_ml.unwrap();
    let mc = mc_subset_log_ml(&config, &y, &x, &j, 200_000, 13).unwrap();
    assert!(
        mc.brackets(closed, 3.0),
        "closed {closed} vs mc {} ± {}",
        mc.estimate,
        mc.std_error
    );
}

#[test]
fn dag_oracle_scalar_base_case() {
    let (y, x) = random_problem(6, 1, 0, 5);
    let config = FractionalConfig::Recommended;
    let scorer = FractionalScorer::new(&config, &y, &x).unwrap();
    let closed = scorer
        .log_ml_subset(&VertexSet::singleton(1, 0))
        .log_ml
        .unwrap();
    let dag = Dag::empty(1);
    let mc = mc_oracle_log_ml(&dag, &config, &y, &x, 200_000, 21).unwrap();
    assert!(
        mc.brackets(closed, 3.0),
        "closed {closed} vs mc {} ± {}",
        mc.estimate,
        mc.std_error
    );
}

#[test]
fn dag_oracle_matches_closed_form_with_edge() {
    let (y, x) = random_problem(8, 2, 1, 6);
    let config = FractionalConfig::Recommended;
    let scorer = FractionalScorer::new(&config, &y, &x).unwrap();
    let cache = ScoreCache::new();
    let dag = Dag::validate(vec![VertexSet::empty(2), VertexSet::singleton(2, 0)]).unwrap();
    let closed = dag_log_ml(&dag, &scorer, &cache).log_ml.unwrap();
    let mc = mc_oracle_log_ml(&dag, &config, &y, &x, 400_000, 31).unwrap();
    assert!(
        mc.brackets(closed, 3.0),
        "closed {closed} vs mc {} ± {}",
        mc.estimate,
        mc.std_error
    );
}

#[test]
fn doubling_draws_shrinks_the_error_bar() {
    let (y, x) = random_problem(8, 2, 0, 15);
    let config = FractionalConfig::Recommended;
    let dag = Dag::validate(vec![VertexSet::empty(2), VertexSet::singleton(2, 0)]).unwrap();
    let small = mc_oracle_log_ml(&dag, &config, &y, &x, 100_000, 8).unwrap();
    let large = mc_oracle_log_ml(&dag, &config, &y, &x, 200_000, 8).unwrap();
    let ratio = large.std_error / small.std_error;
    let target = 1.0 / 2.0f64.sqrt();
    assert!(
        (ratio - target).abs() < 0.2 * target,
        "ratio {ratio} vs {target}"
    );
}

#[test]
fn oracle_rejects_oversized_instances() {
    let (y, x) = random_problem(12, 2, 0, 1);
    let dag = Dag::empty(2);
    assert!(matches!(
        mc_oracle_log_ml(&dag, &FractionalConfig::Recommended, &y, &x, 100, 0),
        Err(dagscore::Error::Config(_))
    ));
}

/// Schur complements of Wishart draws follow the marginal Wishart law:
/// for `Ω ~ W_2(a, R)`, `Ω_{11·2}` is `W_1(a-1, R_11)`, i.e. a
/// `Gamma((a-1)/2, rate R_11/2)`; checked by Kolmogorov-Smirnov.
#[test]
fn wishart_schur_marginal_law() {
    let a = 5.5;
    let r = DMatrix::from_row_slice(2, 2, &[1.8, 0.6, 0.6, 1.2]);
    let sampler = WishartSampler::new(a, &r).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(1234);
    let draws = 1_000_000usize;
    let mut samples = Vec::with_capacity(draws);
    for _ in 0..draws {
        let w = sampler.sample(&mut rng);
        samples.push(w[(0, 0)] - w[(0, 1)] * w[(0, 1)] / w[(1, 1)]);
    }
    samples.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let shape = (a - 1.0) / 2.0;
    let rate = r[(0, 0)] / 2.0;
    let mut ks: f64 = 0.0;
    for (i, &s) in samples.iter().enumerate() {
        let cdf = gamma_lr(shape, rate * s);
        let hi = (i + 1) as f64 / draws as f64;
        let lo = i as f64 / draws as f64;
        ks = ks.max((cdf - lo).abs()).max((hi - cdf).abs());
    }
    // the 0.1% critical value at 10^6 samples is ~1.95e-3
    assert!(ks < 2e-3, "KS statistic {ks}");

    // a deliberately wrong degrees-of-freedom hypothesis is far away
    let mut ks_wrong: f64 = 0.0;
    for (i, &s) in samples.iter().enumerate() {
        let cdf = gamma_lr(a / 2.0, rate * s);
        let hi = (i + 1) as f64 / draws as f64;
        ks_wrong = ks_wrong.max((cdf - hi).abs());
    }
    assert!(
        ks_wrong > 0.02,
        "wrong-dof KS unexpectedly small: {ks_wrong}"
    );
}

/// The coefficient/precision blocks named by the prior factorization are
/// uncorrelated under joint draws.
#[test]
fn prior_block_independence_spot_check() {
    let mut rng = StdRng::seed_from_u64(321);
    let hyper = random_hyper(2, 3, &mut rng);
    let sampler = MnwSampler::new(&hyper).unwrap();
    let mut draw_rng = ChaCha12Rng::seed_from_u64(654);
    let draws = 20_000usize;
    let q = 3usize;
    // block one: B_{q̄} entries and Ω_{q̄q̄·q}; block two: α_q, Ω_{q̄q}, Ω_qq
    let mut left: Vec<Vec<f64>> = Vec::new();
    let mut right: Vec<Vec<f64>> = Vec::new();
    for _ in 0..draws {
        let (b, omega) = sampler.sample(&mut draw_rng);
        let l_qq = omega[(q - 1, q - 1)];
        let mut lvec = Vec::new();
        let mut rvec = Vec::new();
        for r in 0..2 {
            for c in 0..q - 1 {
                lvec.push(b[(r, c)]);
            }
        }
        for i in 0..q - 1 {
            for j in i..q - 1 {
                lvec.push(omega[(i, j)] - omega[(i, q - 1)] * omega[(j, q - 1)] / l_qq);
            }
        }
        for r in 0..2 {
            let mut alpha = b[(r, q - 1)];
            for c in 0..q - 1 {
                alpha += b[(r, c)] * omega[(c, q - 1)] / l_qq;
            }
            rvec.push(alpha);
        }
        for i in 0..q - 1 {
            rvec.push(omega[(i, q - 1)]);
        }
        rvec.push(l_qq);
        left.push(lvec);
        right.push(rvec);
    }
    let max_corr = max_abs_cross_correlation(&left, &right);
    assert!(max_corr < 0.04, "max |corr| {max_corr}");
}

fn max_abs_cross_correlation(left: &[Vec<f64>], right: &[Vec<f64>]) -> f64 {
    let n = left.len() as f64;
    let dims_l = left[0].len();
    let dims_r = right[0].len();
    let mean = |data: &[Vec<f64>], k: usize| data.iter().map(|v| v[k]).sum::<f64>() / n;
    let mut max_corr: f64 = 0.0;
    for a in 0..dims_l {
        let ma = mean(left, a);
        let va: f64 = left.iter().map(|v| (v[a] - ma).powi(2)).sum::<f64>();
        for b in 0..dims_r {
            let mb = mean(right, b);
            let vb: f64 = right.iter().map(|v| (v[b] - mb).powi(2)).sum::<f64>();
            let cov: f64 = left
                .iter()
                .zip(right.iter())
                .map(|(l, r)| (l[a] - ma) * (r[b] - mb))
                .sum::<f64>();
            max_corr = max_corr.max((cov / (va.sqrt() * vb.sqrt())).abs());
        }
    }
    max_corr
}
