//! Command-line front end: data ingestion, synthetic data generation,
//! single-graph scoring, structure search, and exhaustive enumeration, all
//! reported as JSON documents with a full config echo so every run is
//! reproducible from its own output.

pub mod data;
pub mod sim;

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use dagscore::fractional::{FractionalConfig, FractionalScorer};
use dagscore::graphs::{parse_dag_text, parse_edge_list, DecomposableGraph};
use dagscore::mnw::{DesignMatrix, ResponseMatrix};
use dagscore::scorer::{dag_log_ml, decomposable_log_ml, ScoreCache, ScoreReport};
use dagscore::search::{
    exhaustive_small, greedy_dag_search, mc3_decomposable, ExhaustiveMode, ExhaustiveRow,
    GreedyOpts, Mc3Opts, ModelPrior, SearchResult,
};
use dagscore::VertexSet;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl From<dagscore::Error> for CliError {
    fn from(e: dagscore::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

/// Graph prior choice as given on the command line; `EdgeBinomialDefault`
/// resolves to `2/(q-1)` once the response dimension is known.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorSpec {
    Uniform,
    EdgeBinomialDefault,
    EdgeBinomial { edge_prob: f64 },
}

impl PriorSpec {
    pub fn resolve(&self, q: usize) -> ModelPrior {
        match *self {
            PriorSpec::Uniform => ModelPrior::Uniform,
            PriorSpec::EdgeBinomialDefault => ModelPrior::default_for(q),
            PriorSpec::EdgeBinomial { edge_prob } => ModelPrior::EdgeBinomial { edge_prob },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreConfig {
    pub y: PathBuf,
    pub z: Option<PathBuf>,
    /// 1-based predictor pool columns.
    pub predictors: Option<Vec<usize>>,
    pub graph: PathBuf,
    pub decomposable: bool,
    pub frac: FractionalConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Greedy,
    Mc3,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub y: PathBuf,
    pub z: Option<PathBuf>,
    /// Fixed design columns for mc3 (greedy selects its own predictors).
    pub predictors: Option<Vec<usize>>,
    pub mode: SearchMode,
    pub frac: FractionalConfig,
    pub prior: PriorSpec,
    pub max_parents: usize,
    pub max_predictors: usize,
    pub restarts: usize,
    pub iterations: usize,
    pub temperature: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateConfig {
    pub spec: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerateConfig {
    pub y: PathBuf,
    pub z: Option<PathBuf>,
    pub predictors: Option<Vec<usize>>,
    pub mode: ExhaustiveMode,
    pub q_max: usize,
    pub frac: FractionalConfig,
    pub prior: PriorSpec,
    pub seed: u64,
}

/// Everything a run needs; the echo of this value inside the report, plus the
/// seed it carries, reproduces all non-timing output bytes.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Score(ScoreConfig),
    Search(SearchConfig),
    Simulate(SimulateConfig),
    Enumerate(EnumerateConfig),
}

#[derive(Debug, Clone, Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
}

/// Timing and host details, segregated so reproducibility comparisons can
/// drop this key wholesale.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub timing_ms: u128,
    pub version: String,
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphEcho {
    Dag {
        parents: Vec<VertexSet>,
    },
    Decomposable {
        edges: Vec<Vec<usize>>,
        cliques: Vec<VertexSet>,
        separators: Vec<VertexSet>,
    },
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ResultPayload {
    Score {
        labels: Vec<String>,
        graph: GraphEcho,
        frac: dagscore::fractional::ResolvedFraction,
        #[serde(flatten)]
        score: ScoreReport,
    },
    Search {
        labels: Vec<String>,
        predictor_labels: Vec<String>,
        prior: ModelPrior,
        search: SearchResult,
    },
    Enumerate {
        labels: Vec<String>,
        mode: ExhaustiveMode,
        prior: ModelPrior,
        graph_count: usize,
        class_count: Option<usize>,
        rows: Vec<ExhaustiveRow>,
    },
    Simulate {
        files: sim::SimFiles,
        spec: sim::SimSpec,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub result: ResultPayload,
    pub cache: CacheStats,
    pub meta: Meta,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports are serializable");
        s.push('\n');
        s
    }
}

fn load_design(
    y: &ResponseMatrix,
    z_path: &Option<PathBuf>,
    predictors: &Option<Vec<usize>>,
) -> Result<DesignMatrix, CliError> {
    match (z_path, predictors) {
        (Some(zp), Some(chosen)) => {
            let pool = data::read_predictor_pool(zp)?;
            if pool.n() != y.n() {
                return Err(CliError::Validation(format!(
                    "predictor file has {} rows but response has {}",
                    pool.n(),
                    y.n()
                )));
            }
            let zero_based = one_based_to_zero(chosen, pool.p_star(), "predictor")?;
            Ok(DesignMatrix::from_pool(&pool, &zero_based)?)
        }
        (Some(_), None) => Err(CliError::Validation(
            "--z requires --predictors for a fixed design (search --mode greedy selects them)"
                .into(),
        )),
        (None, Some(_)) => Err(CliError::Validation("--predictors requires --z".into())),
        (None, None) => Ok(DesignMatrix::intercept_only(y.n())),
    }
}

fn one_based_to_zero(indices: &[usize], upper: usize, what: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::with_capacity(indices.len());
    for &ix in indices {
        if ix == 0 || ix > upper {
            return Err(CliError::Validation(format!(
                "{what} index {ix} out of range 1..={upper}"
            )));
        }
        out.push(ix - 1);
    }
    Ok(out)
}

/// Executes a run and assembles the report. Infeasible graphs are reported
/// with `valid = false`, not raised as errors.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    let started = Instant::now();
    let (result, cache) = match config {
        RunConfig::Score(cfg) => run_score(cfg)?,
        RunConfig::Search(cfg) => run_search(cfg)?,
        RunConfig::Simulate(cfg) => run_simulate(cfg)?,
        RunConfig::Enumerate(cfg) => run_enumerate(cfg)?,
    };
    Ok(Report {
        config: config.clone(),
        result,
        cache,
        meta: Meta {
            timing_ms: started.elapsed().as_millis(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads: rayon::current_num_threads(),
        },
    })
}

fn run_score(cfg: &ScoreConfig) -> Result<(ResultPayload, CacheStats), CliError> {
    let y = data::read_response(&cfg.y)?;
    let x = load_design(&y, &cfg.z, &cfg.predictors)?;
    let graph_text = data::read_text(&cfg.graph)?;
    let scorer = FractionalScorer::new(&cfg.frac, &y, &x)?;
    let cache = ScoreCache::new();
    let (graph, score) = if cfg.decomposable {
        let edges = parse_edge_list(&graph_text, y.q())?;
        let g = DecomposableGraph::from_edges(y.q(), &edges)?;
        let score = decomposable_log_ml(&g, &scorer, &cache);
        let echo = GraphEcho::Decomposable {
            edges: g.edges().iter().map(|&(a, b)| vec![a + 1, b + 1]).collect(),
            cliques: g.cliques().to_vec(),
            separators: g.separators().to_vec(),
        };
        (echo, score)
    } else {
        let dag = parse_dag_text(&graph_text)?;
        if dag.q() != y.q() {
            return Err(CliError::Validation(format!(
                "graph has {} vertices but response has {} columns",
                dag.q(),
                y.q()
            )));
        }
        let score = dag_log_ml(&dag, &scorer, &cache);
        (
            GraphEcho::Dag {
                parents: dag.parent_sets().to_vec(),
            },
            score,
        )
    };
    let stats = CacheStats {
        hits: cache.hits(),
        misses: cache.misses(),
    };
    Ok((
        ResultPayload::Score {
            labels: y.labels().to_vec(),
            graph,
            frac: *scorer.resolved(),
            score,
        },
        stats,
    ))
}

fn run_search(cfg: &SearchConfig) -> Result<(ResultPayload, CacheStats), CliError> {
    let y = data::read_response(&cfg.y)?;
    let prior = cfg.prior.resolve(y.q());
    let (search, predictor_labels) = match cfg.mode {
        SearchMode::Greedy => {
            if cfg.predictors.is_some() {
                return Err(CliError::Validation(
                    "greedy search selects predictors itself; drop --predictors".into(),
                ));
            }
            let pool = match &cfg.z {
                Some(zp) => Some(data::read_predictor_pool(zp)?),
                None => None,
            };
            let opts = GreedyOpts {
                max_parents: cfg.max_parents,
                max_predictors: cfg.max_predictors,
                restarts: cfg.restarts,
                seed: cfg.seed,
            };
            let result = greedy_dag_search(&y, pool.as_ref(), &cfg.frac, &prior, &opts)?;
            let labels = pool
                .as_ref()
                .map(|p| {
                    result
                        .predictors
                        .iter()
                        .map(|&k| p.labels()[k].clone())
                        .collect()
                })
                .unwrap_or_default();
            (result, labels)
        }
        SearchMode::Mc3 => {
            let x = load_design(&y, &cfg.z, &cfg.predictors)?;
            let opts = Mc3Opts {
                iterations: cfg.iterations,
                temperature: cfg.temperature,
                seed: cfg.seed,
            };
            let result = mc3_decomposable(&y, &x, &cfg.frac, &prior, &opts)?;
            (result, x.predictor_labels().to_vec())
        }
    };
    let stats = CacheStats {
        hits: search.cache_hits,
        misses: search.cache_misses,
    };
    Ok((
        ResultPayload::Search {
            labels: y.labels().to_vec(),
            predictor_labels,
            prior,
            search,
        },
        stats,
    ))
}

fn run_simulate(cfg: &SimulateConfig) -> Result<(ResultPayload, CacheStats), CliError> {
    let spec = sim::read_spec(&cfg.spec)?;
    let files = sim::simulate(&spec, cfg.seed, &cfg.out_dir)?;
    Ok((
        ResultPayload::Simulate { files, spec },
        CacheStats { hits: 0, misses: 0 },
    ))
}

fn run_enumerate(cfg: &EnumerateConfig) -> Result<(ResultPayload, CacheStats), CliError> {
    if cfg.q_max > 5 {
        return Err(CliError::Validation(format!(
            "--q-max is capped at 5, got {}",
            cfg.q_max
        )));
    }
    let y = data::read_response(&cfg.y)?;
    if y.q() > cfg.q_max {
        return Err(CliError::Validation(format!(
            "response has {} columns, above --q-max {}",
            y.q(),
            cfg.q_max
        )));
    }
    let x = load_design(&y, &cfg.z, &cfg.predictors)?;
    let prior = cfg.prior.resolve(y.q());
    let (rows, cache) = exhaustive_small(&y, &x, &cfg.frac, &prior, cfg.mode)?;
    let class_count = rows
        .iter()
        .filter_map(|r| r.class_id)
        .max()
        .map(|max_id| max_id + 1);
    let stats = CacheStats {
        hits: cache.hits(),
        misses: cache.misses(),
    };
    Ok((
        ResultPayload::Enumerate {
            labels: y.labels().to_vec(),
            mode: cfg.mode,
            prior,
            graph_count: rows.len(),
            class_count,
            rows,
        },
        stats,
    ))
}
