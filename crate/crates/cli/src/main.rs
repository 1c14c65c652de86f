use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dagscore::fractional::FractionalConfig;
use dagscore::search::ExhaustiveMode;
use dagscore_cli::{
    run, EnumerateConfig, PriorSpec, RunConfig, ScoreConfig, SearchConfig, SearchMode,
    SimulateConfig,
};

/// Marginal-likelihood scoring and structure search for Gaussian multivariate
/// regression with graph-Markov error precision.
#[derive(Parser)]
#[command(name = "dagscore", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Score one DAG or decomposable graph on a dataset.
    Score(ScoreArgs),
    /// Search structure space (greedy over DAGs + predictors, or MC3 over
    /// decomposable graphs).
    Search(SearchArgs),
    /// Generate synthetic data from a known model.
    Simulate(SimulateArgs),
    /// Score every graph on up to five responses.
    Enumerate(EnumerateArgs),
}

#[derive(Args)]
struct ScoreArgs {
    /// Response CSV (header row, one column per response variable).
    #[arg(long)]
    y: PathBuf,
    /// Predictor pool CSV.
    #[arg(long, requires = "predictors")]
    z: Option<PathBuf>,
    /// 1-based pool columns forming the design matrix.
    #[arg(long, value_delimiter = ',', requires = "z")]
    predictors: Option<Vec<usize>>,
    /// Graph file: `j: parents` lines for DAGs, `j -- k` edge lines for
    /// undirected graphs.
    #[arg(long)]
    graph: PathBuf,
    /// Treat the graph file as a decomposable undirected graph.
    #[arg(long)]
    decomposable: bool,
    /// `recommended` or `a_d=F,n0=K`.
    #[arg(long, default_value = "recommended", value_parser = parse_frac)]
    frac: FractionalConfig,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    y: PathBuf,
    #[arg(long)]
    z: Option<PathBuf>,
    /// Fixed 1-based design columns (mc3 only; greedy selects its own).
    #[arg(long, value_delimiter = ',', requires = "z")]
    predictors: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = ModeArg::Greedy)]
    mode: ModeArg,
    #[arg(long, default_value = "recommended", value_parser = parse_frac)]
    frac: FractionalConfig,
    /// `uniform`, `edge-binomial`, or `edge-binomial=P`.
    #[arg(long, default_value = "edge-binomial", value_parser = parse_prior)]
    prior: PriorSpec,
    #[arg(long, default_value_t = 3)]
    max_parents: usize,
    #[arg(long, default_value_t = 5)]
    max_predictors: usize,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    /// MC3 chain length.
    #[arg(long, default_value_t = 20000)]
    iterations: usize,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Greedy,
    Mc3,
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulation spec JSON.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for Y.csv, Z.csv, and truth.json.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    y: PathBuf,
    #[arg(long, requires = "predictors")]
    z: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', requires = "z")]
    predictors: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = EnumModeArg::Dag)]
    mode: EnumModeArg,
    /// Refuse responses wider than this (hard cap 5).
    #[arg(long, default_value_t = 5)]
    q_max: usize,
    #[arg(long, default_value = "recommended", value_parser = parse_frac)]
    frac: FractionalConfig,
    #[arg(long, default_value = "uniform", value_parser = parse_prior)]
    prior: PriorSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum EnumModeArg {
    Dag,
    Decomposable,
}

fn parse_frac(raw: &str) -> Result<FractionalConfig, String> {
    if raw == "recommended" {
        return Ok(FractionalConfig::Recommended);
    }
    let mut a_d: Option<f64> = None;
    let mut n0: Option<usize> = None;
    for part in raw.split(',') {
        match part.split_once('=') {
            Some(("a_d", v)) => a_d = Some(v.parse().map_err(|_| format!("bad a_d {v:?}"))?),
            Some(("n0", v)) => n0 = Some(v.parse().map_err(|_| format!("bad n0 {v:?}"))?),
            _ => {
                return Err(format!(
                    "expected `recommended` or `a_d=F,n0=K`, got {raw:?}"
                ))
            }
        }
    }
    match (a_d, n0) {
        (Some(a_d), Some(n0)) => Ok(FractionalConfig::Explicit { a_d, n0 }),
        _ => Err("explicit fraction needs both a_d and n0".into()),
    }
}

fn parse_prior(raw: &str) -> Result<PriorSpec, String> {
    match raw {
        "uniform" => Ok(PriorSpec::Uniform),
        "edge-binomial" => Ok(PriorSpec::EdgeBinomialDefault),
        other => match other.split_once('=') {
            Some(("edge-binomial", v)) => {
                let edge_prob: f64 = v
                    .parse()
                    .map_err(|_| format!("bad edge probability {v:?}"))?;
                Ok(PriorSpec::EdgeBinomial { edge_prob })
            }
            _ => Err(format!(
                "expected `uniform`, `edge-binomial`, or `edge-binomial=P`, got {raw:?}"
            )),
        },
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("DAGSCORE_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global();
            }
            _ => {
                eprintln!("error: DAGSCORE_THREADS must be a positive integer, got {threads:?}");
                return ExitCode::from(1);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version pseudo-errors exit cleanly
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let (config, out) = match cli.command {
        Cmd::Score(a) => (
            RunConfig::Score(ScoreConfig {
                y: a.y,
                z: a.z,
                predictors: a.predictors,
                graph: a.graph,
                decomposable: a.decomposable,
                frac: a.frac,
                seed: a.seed,
            }),
            a.out,
        ),
        Cmd::Search(a) => (
            RunConfig::Search(SearchConfig {
                y: a.y,
                z: a.z,
                predictors: a.predictors,
                mode: match a.mode {
                    ModeArg::Greedy => SearchMode::Greedy,
                    ModeArg::Mc3 => SearchMode::Mc3,
                },
                frac: a.frac,
                prior: a.prior,
                max_parents: a.max_parents,
                max_predictors: a.max_predictors,
                restarts: a.restarts,
                iterations: a.iterations,
                temperature: a.temperature,
                seed: a.seed,
            }),
            a.out,
        ),
        Cmd::Simulate(a) => (
            RunConfig::Simulate(SimulateConfig {
                spec: a.spec,
                out_dir: a.out_dir,
                seed: a.seed,
            }),
            a.out,
        ),
        Cmd::Enumerate(a) => (
            RunConfig::Enumerate(EnumerateConfig {
                y: a.y,
                z: a.z,
                predictors: a.predictors,
                mode: match a.mode {
                    EnumModeArg::Dag => ExhaustiveMode::Dag,
                    EnumModeArg::Decomposable => ExhaustiveMode::Decomposable,
                },
                q_max: a.q_max,
                frac: a.frac,
                prior: a.prior,
                seed: a.seed,
            }),
            a.out,
        ),
    };
    match run(&config) {
        Ok(report) => {
            let json = report.to_json();
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, json) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{json}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
