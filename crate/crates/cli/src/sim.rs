//! Synthetic data generation. Responses are drawn vertex by vertex along the
//! true DAG: each conditional is normal with mean `xᵀα_j + y_paᵀγ_j` and
//! variance `1/λ_j`, so the implied joint precision matrix is s.p.d. by
//! construction. Byte-identical outputs for a fixed seed.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use dagscore::{Dag, VertexSet};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DagSpec {
    /// One list per vertex, 1-based parent indices.
    pub parents: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimSpec {
    pub n: usize,
    pub q: usize,
    pub p_star: usize,
    pub p_true: usize,
    pub true_dag: DagSpec,
    /// 1-based predictor pool columns carrying signal.
    pub true_predictors: Vec<usize>,
    pub coefficient_scale: f64,
    /// Per-vertex conditional precisions; defaults to 1 everywhere.
    #[serde(default)]
    pub lambda: Option<Vec<f64>>,
    /// Per-vertex parent coefficients aligned with the sorted parent lists;
    /// defaults to `coefficient_scale` for every parent.
    #[serde(default)]
    pub gamma: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimFiles {
    pub y: PathBuf,
    pub z: Option<PathBuf>,
    pub truth: PathBuf,
}

pub fn read_spec(path: &Path) -> Result<SimSpec, CliError> {
    let text = crate::data::read_text(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: bad spec: {e}", path.display())))
}

fn build_dag(spec: &SimSpec) -> Result<Dag, CliError> {
    if spec.true_dag.parents.len() != spec.q {
        return Err(CliError::Validation(format!(
            "true_dag has {} vertices but q = {}",
            spec.true_dag.parents.len(),
            spec.q
        )));
    }
    let mut parent_sets = Vec::with_capacity(spec.q);
    for (j, list) in spec.true_dag.parents.iter().enumerate() {
        let mut set = VertexSet::empty(spec.q);
        for &p in list {
            if p == 0 || p > spec.q {
                return Err(CliError::Validation(format!(
                    "vertex {}: parent index {p} out of range 1..={}",
                    j + 1,
                    spec.q
                )));
            }
            set.insert(p - 1);
        }
        parent_sets.push(set);
    }
    Ok(Dag::validate(parent_sets)?)
}

fn validate(spec: &SimSpec) -> Result<(Dag, Vec<f64>, Vec<Vec<f64>>), CliError> {
    if spec.n == 0 || spec.q == 0 {
        return Err(CliError::Validation("n and q must be positive".into()));
    }
    if spec.p_true != spec.true_predictors.len() {
        return Err(CliError::Validation(format!(
            "p_true = {} but {} true predictors listed",
            spec.p_true,
            spec.true_predictors.len()
        )));
    }
    for &k in &spec.true_predictors {
        if k == 0 || k > spec.p_star {
            return Err(CliError::Validation(format!(
                "true predictor index {k} out of range 1..={}",
                spec.p_star
            )));
        }
    }
    if !spec.coefficient_scale.is_finite() {
        return Err(CliError::Validation(
            "coefficient_scale must be finite".into(),
        ));
    }
    let dag = build_dag(spec)?;
    let lambda = match &spec.lambda {
        Some(l) => {
            if l.len() != spec.q {
                return Err(CliError::Validation(format!(
                    "lambda has {} entries, expected {}",
                    l.len(),
                    spec.q
                )));
            }
            if l.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
                return Err(CliError::Validation(
                    "every lambda must be positive and finite".into(),
                ));
            }
            l.clone()
        }
        None => vec![1.0; spec.q],
    };
    let gamma = match &spec.gamma {
        Some(g) => {
            if g.len() != spec.q {
                return Err(CliError::Validation(format!(
                    "gamma has {} entries, expected {}",
                    g.len(),
                    spec.q
                )));
            }
            for (j, coefs) in g.iter().enumerate() {
                if coefs.len() != dag.parents(j).len() {
                    return Err(CliError::Validation(format!(
                        "gamma for vertex {} has {} coefficients but the vertex has {} parents",
                        j + 1,
                        coefs.len(),
                        dag.parents(j).len()
                    )));
                }
            }
            g.clone()
        }
        None => (0..spec.q)
            .map(|j| vec![spec.coefficient_scale; dag.parents(j).len()])
            .collect(),
    };
    Ok((dag, lambda, gamma))
}

#[derive(Debug, Serialize)]
struct TruthManifest<'a> {
    seed: u64,
    spec: &'a SimSpec,
    lambda: &'a [f64],
    gamma: &'a [Vec<f64>],
    /// Coefficient matrix rows carrying signal: `(1-based predictor, value)`.
    b_true: Vec<(usize, f64)>,
    files: &'a SimFiles,
}

/// Draws the predictor pool and responses, writing `Y.csv`, `Z.csv` (when
/// `p_star > 0`), and `truth.json` into `out_dir`.
pub fn simulate(spec: &SimSpec, seed: u64, out_dir: &Path) -> Result<SimFiles, CliError> {
    let (dag, lambda, gamma) = validate(spec)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let z = DMatrix::from_fn(spec.n, spec.p_star, |_, _| {
        let v: f64 = StandardNormal.sample(&mut rng);
        v
    });
    // intercept zero; every true predictor loads on every response
    let mut xb: DMatrix<f64> = DMatrix::zeros(spec.n, spec.q);
    for &k in &spec.true_predictors {
        for j in 0..spec.q {
            for i in 0..spec.n {
                xb[(i, j)] += spec.coefficient_scale * z[(i, k - 1)];
            }
        }
    }
    let mut y: DMatrix<f64> = DMatrix::zeros(spec.n, spec.q);
    for &j in dag.topological_order() {
        let parents = dag.parents(j).to_vec();
        let sd = (1.0 / lambda[j]).sqrt();
        for i in 0..spec.n {
            let mut mean = xb[(i, j)];
            for (k, &pa) in parents.iter().enumerate() {
                mean += gamma[j][k] * y[(i, pa)];
            }
            let eps: f64 = StandardNormal.sample(&mut rng);
            y[(i, j)] = mean + sd * eps;
        }
    }

    let y_path = out_dir.join("Y.csv");
    let y_labels: Vec<String> = (0..spec.q).map(|j| format!("Y{}", j + 1)).collect();
    crate::data::write_matrix_csv(&y_path, &y, &y_labels)?;
    let z_path = if spec.p_star > 0 {
        let path = out_dir.join("Z.csv");
        let z_labels: Vec<String> = (0..spec.p_star).map(|k| format!("Z{}", k + 1)).collect();
        crate::data::write_matrix_csv(&path, &z, &z_labels)?;
        Some(path)
    } else {
        None
    };
    let truth_path = out_dir.join("truth.json");
    let files = SimFiles {
        y: y_path,
        z: z_path,
        truth: truth_path.clone(),
    };
    let manifest = TruthManifest {
        seed,
        spec,
        lambda: &lambda,
        gamma: &gamma,
        b_true: spec
            .true_predictors
            .iter()
            .map(|&k| (k, spec.coefficient_scale))
            .collect(),
        files: &files,
    };
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Validation(format!("cannot serialize truth manifest: {e}")))?;
    text.push('\n');
    std::fs::write(&truth_path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", truth_path.display())))?;
    Ok(files)
}
