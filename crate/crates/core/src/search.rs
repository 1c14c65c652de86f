//! Structure search: greedy hill climbing over DAGs with joint predictor
//! selection, Metropolis-Hastings over decomposable graphs, and exhaustive
//! scoring of small model spaces as a ground-truth oracle.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractional::{FractionalConfig, FractionalScorer};
use crate::graphs::{enumerate_dags, enumerate_decomposable, fingerprint, Dag, DecomposableGraph};
use crate::mnw::{DesignMatrix, PredictorPool, ResponseMatrix};
use crate::scorer::{dag_log_ml, decomposable_log_ml, ScoreCache};
use crate::subset::VertexSet;

/// Prior over graph structures. The data do not identify one, so both choices
/// are explicit artifact defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelPrior {
    Uniform,
    /// Independent edge inclusion with the given probability:
    /// `log prior = e log ρ + (max_edges - e) log(1 - ρ)`.
    EdgeBinomial {
        edge_prob: f64,
    },
}

impl ModelPrior {
    /// Sparsity-pressure default: `ρ = 2/(q-1)`, i.e. `q` expected edges.
    /// The expression reaches 1 at `q = 3` and is undefined below, so small
    /// graphs fall back to `ρ = 1/2` (uniform when there is at most one
    /// possible edge).
    pub fn default_for(q: usize) -> Self {
        if q < 3 {
            return ModelPrior::Uniform;
        }
        let formula = 2.0 / (q as f64 - 1.0);
        ModelPrior::EdgeBinomial {
            edge_prob: if formula < 1.0 { formula } else { 0.5 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ModelPrior::EdgeBinomial { edge_prob } = self {
            if !(edge_prob.is_finite() && *edge_prob > 0.0 && *edge_prob < 1.0) {
                return Err(Error::Config(format!(
                    "edge probability must lie strictly between 0 and 1, got {edge_prob}"
                )));
            }
        }
        Ok(())
    }

    pub fn log_prior(&self, edge_count: usize, max_edges: usize) -> f64 {
        match self {
            ModelPrior::Uniform => 0.0,
            ModelPrior::EdgeBinomial { edge_prob } => {
                edge_count as f64 * edge_prob.ln()
                    + (max_edges - edge_count) as f64 * (1.0 - edge_prob).ln()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub action: String,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BestGraph {
    Dag {
        parents: Vec<VertexSet>,
    },
    Decomposable {
        #[serde(serialize_with = "ser_edges_one_based")]
        edges: Vec<(usize, usize)>,
    },
}

fn ser_one_based<S: serde::Serializer>(v: &usize, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(*v as u64 + 1)
}

fn ser_vec_one_based<S: serde::Serializer>(
    v: &Vec<usize>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&(x + 1))?;
    }
    seq.end()
}

fn ser_edges_one_based<S: serde::Serializer>(
    v: &Vec<(usize, usize)>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (a, b) in v {
        seq.serialize_element(&[a + 1, b + 1])?;
    }
    seq.end()
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeFrequency {
    #[serde(serialize_with = "ser_one_based")]
    pub a: usize,
    #[serde(serialize_with = "ser_one_based")]
    pub b: usize,
    pub frequency: f64,
}

/// Outcome of a structure search. `score` is the unnormalized log posterior
/// (data log marginal likelihood plus model log prior).
#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub graph: BestGraph,
    /// Selected predictor pool columns; 0-based in memory, 1-based in JSON.
    #[serde(serialize_with = "ser_vec_one_based")]
    pub predictors: Vec<usize>,
    pub score: f64,
    pub trace: Vec<TraceEntry>,
    /// Number of candidate scores evaluated (cache hits included).
    pub visited: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_frequencies: Option<Vec<EdgeFrequency>>,
}

impl SearchResult {
    pub fn dag(&self) -> Option<Dag> {
        match &self.graph {
            BestGraph::Dag { parents } => Dag::validate(parents.clone()).ok(),
            BestGraph::Decomposable { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GreedyOpts {
    pub max_parents: usize,
    pub max_predictors: usize,
    /// Total starts; the first is the empty model, later ones are random.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for GreedyOpts {
    fn default() -> Self {
        GreedyOpts {
            max_parents: 3,
            max_predictors: 5,
            restarts: 3,
            seed: 0,
        }
    }
}

/// Move descriptors, ordered; score ties break toward the smallest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Move {
    AddEdge(usize, usize),
    DeleteEdge(usize, usize),
    ReverseEdge(usize, usize),
    AddPredictor(usize),
    DropPredictor(usize),
}

impl Move {
    fn describe(&self) -> String {
        match self {
            Move::AddEdge(u, v) => format!("add edge {}->{}", u + 1, v + 1),
            Move::DeleteEdge(u, v) => format!("delete edge {}->{}", u + 1, v + 1),
            Move::ReverseEdge(u, v) => format!("reverse edge {}->{}", u + 1, v + 1),
            Move::AddPredictor(k) => format!("add predictor {}", k + 1),
            Move::DropPredictor(k) => format!("drop predictor {}", k + 1),
        }
    }
}

struct Context {
    scorer: FractionalScorer,
    cache: ScoreCache,
}

/// Scoring contexts per predictor subset. Each context owns its subset score
/// cache; predictor moves change the design matrix, so scores do not transfer
/// across contexts.
struct ContextPool<'a> {
    y: &'a ResponseMatrix,
    pool: Option<&'a PredictorPool>,
    config: FractionalConfig,
    contexts: HashMap<Vec<usize>, Option<Arc<Context>>>,
}

impl<'a> ContextPool<'a> {
    fn new(
        y: &'a ResponseMatrix,
        pool: Option<&'a PredictorPool>,
        config: FractionalConfig,
    ) -> Self {
        ContextPool {
            y,
            pool,
            config,
            contexts: HashMap::new(),
        }
    }

    /// Contexts for collinear designs are unavailable (`None`); moves into
    /// them are treated as illegal rather than fatal.
    fn get(&mut self, predictors: &[usize]) -> Option<Arc<Context>> {
        if let Some(ctx) = self.contexts.get(predictors) {
            return ctx.clone();
        }
        let design = match self.pool {
            Some(pool) => DesignMatrix::from_pool(pool, predictors),
            None => Ok(DesignMatrix::intercept_only(self.y.n())),
        };
        let ctx = design
            .and_then(|x| FractionalScorer::new(&self.config, self.y, &x))
            .ok()
            .map(|scorer| {
                Arc::new(Context {
                    scorer,
                    cache: ScoreCache::new(),
                })
            });
        self.contexts.insert(predictors.to_vec(), ctx.clone());
        ctx
    }

    fn cache_totals(&self) -> (u64, u64) {
        let mut hits = 0;
        let mut misses = 0;
        for ctx in self.contexts.values().flatten() {
            hits += ctx.cache.hits();
            misses += ctx.cache.misses();
        }
        (hits, misses)
    }
}

fn joint_score(dag: &Dag, ctx: &Context, prior: &ModelPrior, visited: &AtomicU64) -> f64 {
    visited.fetch_add(1, Ordering::Relaxed);
    let max_edges = dag.q() * (dag.q() - 1) / 2;
    dag_log_ml(dag, &ctx.scorer, &ctx.cache).value_or_neg_inf()
        + prior.log_prior(dag.edge_count(), max_edges)
}

/// Hill climbing over the product space of DAGs and predictor subsets:
/// every step evaluates all legal single-edge and single-predictor moves and
/// applies the best strictly improving one. Deterministic given the seed.
pub fn greedy_dag_search(
    y: &ResponseMatrix,
    pool: Option<&PredictorPool>,
    config: &FractionalConfig,
    prior: &ModelPrior,
    opts: &GreedyOpts,
) -> Result<SearchResult> {
    prior.validate()?;
    let q = y.q();
    let n = y.n();
    let p_star = pool.map_or(0, |z| z.p_star());
    if let Some(z) = pool {
        if z.n() != n {
            return Err(Error::Dimension(format!(
                "predictor pool has {} rows but response has {}",
                z.n(),
                n
            )));
        }
    }
    let max_predictors = opts.max_predictors.min(p_star);
    if n <= max_predictors + 1 {
        return Err(Error::Config(format!(
            "n = {n} must exceed max_predictors + 1 = {}",
            max_predictors + 1
        )));
    }
    if opts.max_parents + 1 >= n - max_predictors {
        return Err(Error::Config(format!(
            "max_parents = {} breaks the sparsity bound: families of size {} must stay below n - max_predictors = {}",
            opts.max_parents,
            opts.max_parents + 1,
            n - max_predictors
        )));
    }
    if opts.restarts == 0 {
        return Err(Error::Config("at least one restart is required".into()));
    }

    let mut contexts = ContextPool::new(y, pool, *config);
    let visited = AtomicU64::new(0);
    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);

    let mut best: Option<(f64, Dag, Vec<usize>, Vec<TraceEntry>)> = None;
    for restart in 0..opts.restarts {
        let (dag0, predictors0) = if restart == 0 {
            (Dag::empty(q), Vec::new())
        } else {
            random_start(q, p_star, opts, &mut rng)
        };
        let outcome = climb(
            dag0,
            predictors0,
            q,
            p_star,
            max_predictors,
            opts.max_parents,
            prior,
            &mut contexts,
            &visited,
        );
        let replace = match (&best, &outcome) {
            (None, Some(_)) => true,
            (Some((bs, ..)), Some((s, ..))) => s > bs,
            _ => false,
        };
        if replace {
            best = outcome;
        }
    }
    let (score, dag, predictors, trace) =
        best.ok_or_else(|| Error::Config("no restart produced a scoreable model".into()))?;
    let (cache_hits, cache_misses) = contexts.cache_totals();
    Ok(SearchResult {
        graph: BestGraph::Dag {
            parents: dag.parent_sets().to_vec(),
        },
        predictors,
        score,
        trace,
        visited: visited.load(Ordering::Relaxed),
        cache_hits,
        cache_misses,
        edge_frequencies: None,
    })
}

fn random_start(
    q: usize,
    p_star: usize,
    opts: &GreedyOpts,
    rng: &mut ChaCha12Rng,
) -> (Dag, Vec<usize>) {
    // random topological order, then sparse parents among predecessors
    let mut order: Vec<usize> = (0..q).collect();
    order.shuffle(rng);
    let mut parents = vec![VertexSet::empty(q); q];
    for (pos, &v) in order.iter().enumerate() {
        for &u in order[..pos].iter() {
            if parents[v].len() >= opts.max_parents {
                break;
            }
            if rng.gen_bool(0.25) {
                parents[v].insert(u);
            }
        }
    }
    let dag = Dag::validate(parents).expect("construction follows a linear order");
    let max_predictors = opts.max_predictors.min(p_star);
    let mut pool_indices: Vec<usize> = (0..p_star).collect();
    pool_indices.shuffle(rng);
    let count = if max_predictors == 0 {
        0
    } else {
        rng.gen_range(0..=max_predictors)
    };
    let mut predictors: Vec<usize> = pool_indices[..count].to_vec();
    predictors.sort_unstable();
    (dag, predictors)
}

#[allow(clippy::too_many_arguments)]
fn climb(
    mut dag: Dag,
    mut predictors: Vec<usize>,
    q: usize,
    p_star: usize,
    max_predictors: usize,
    max_parents: usize,
    prior: &ModelPrior,
    contexts: &mut ContextPool<'_>,
    visited: &AtomicU64,
) -> Option<(f64, Dag, Vec<usize>, Vec<TraceEntry>)> {
    let ctx = match contexts.get(&predictors) {
        Some(ctx) => ctx,
        None => {
            // collinear random start; fall back to no predictors
            predictors = Vec::new();
            contexts.get(&predictors)?
        }
    };
    let mut score = joint_score(&dag, &ctx, prior, visited);
    let mut trace = vec![TraceEntry {
        iteration: 0,
        action: "start".into(),
        score,
    }];
    let mut iteration = 0usize;
    loop {
        iteration += 1;
        let moves = legal_moves(&dag, &predictors, q, p_star, max_predictors, max_parents);
        // materialize candidate states first, then score them in parallel;
        // the winner is a deterministic reduction over the ordered list
        let mut candidates: Vec<(Move, Dag, Vec<usize>, Arc<Context>)> = Vec::new();
        for mv in moves {
            let (new_dag, new_predictors) = apply_move(&dag, &predictors, mv);
            let ctx = match contexts.get(&new_predictors) {
                Some(ctx) => ctx,
                None => continue,
            };
            candidates.push((mv, new_dag, new_predictors, ctx));
        }
        let scored: Vec<f64> = candidates
            .par_iter()
            .map(|(_, d, _, ctx)| joint_score(d, ctx, prior, visited))
            .collect();
        let mut winner: Option<usize> = None;
        for (i, &s) in scored.iter().enumerate() {
            if s > score {
                let better = match winner {
                    None => true,
                    Some(w) => {
                        s > scored[w] || (s == scored[w] && candidates[i].0 < candidates[w].0)
                    }
                };
                if better {
                    winner = Some(i);
                }
            }
        }
        match winner {
            Some(i) => {
                let (mv, new_dag, new_predictors, _) = candidates.swap_remove(i);
                score = scored[i];
                dag = new_dag;
                predictors = new_predictors;
                trace.push(TraceEntry {
                    iteration,
                    action: mv.describe(),
                    score,
                });
            }
            None => break,
        }
    }
    Some((score, dag, predictors, trace))
}

fn legal_moves(
    dag: &Dag,
    predictors: &[usize],
    q: usize,
    p_star: usize,
    max_predictors: usize,
    max_parents: usize,
) -> Vec<Move> {
    let mut moves = Vec::new();
    for u in 0..q {
        for v in 0..q {
            if u == v {
                continue;
            }
            if dag.has_edge(u, v) {
                moves.push(Move::DeleteEdge(u, v));
                if dag.parents(u).len() < max_parents && !reaches_without(dag, u, v) {
                    moves.push(Move::ReverseEdge(u, v));
                }
            } else if !dag.has_edge(v, u)
                && dag.parents(v).len() < max_parents
                && !dag.reaches(v, u)
            {
                moves.push(Move::AddEdge(u, v));
            }
        }
    }
    for k in 0..p_star {
        if predictors.contains(&k) {
            moves.push(Move::DropPredictor(k));
        } else if predictors.len() < max_predictors {
            moves.push(Move::AddPredictor(k));
        }
    }
    moves.sort_unstable();
    moves
}

/// Whether `from` still reaches `to` once the direct edge `from -> to` is
/// removed. Reversal legality: the flipped edge closes a cycle exactly when
/// another path remains.
fn reaches_without(dag: &Dag, from: usize, to: usize) -> bool {
    let mut parents = dag.parent_sets().to_vec();
    parents[to].remove(from);
    let stripped = Dag::validate(parents).expect("removing an edge keeps acyclicity");
    stripped.reaches(from, to)
}

fn apply_move(dag: &Dag, predictors: &[usize], mv: Move) -> (Dag, Vec<usize>) {
    let mut parents = dag.parent_sets().to_vec();
    let mut predictors = predictors.to_vec();
    match mv {
        Move::AddEdge(u, v) => parents[v].insert(u),
        Move::DeleteEdge(u, v) => parents[v].remove(u),
        Move::ReverseEdge(u, v) => {
            parents[v].remove(u);
            parents[u].insert(v);
        }
        Move::AddPredictor(k) => {
            predictors.push(k);
            predictors.sort_unstable();
        }
        Move::DropPredictor(k) => predictors.retain(|&x| x != k),
    }
    (
        Dag::validate(parents).expect("legal moves preserve acyclicity"),
        predictors,
    )
}

#[derive(Debug, Clone, Copy)]
pub struct Mc3Opts {
    pub iterations: usize,
    pub temperature: f64,
    pub seed: u64,
}

impl Default for Mc3Opts {
    fn default() -> Self {
        Mc3Opts {
            iterations: 20_000,
            temperature: 1.0,
            seed: 0,
        }
    }
}

/// Metropolis-Hastings over decomposable graphs with single-edge toggles:
/// a proposed toggle that breaks chordality is rejected, otherwise it is
/// accepted with probability `exp((Δ log score + Δ log prior)/T)`. Returns
/// the most visited graph and per-edge inclusion frequencies.
pub fn mc3_decomposable(
    y: &ResponseMatrix,
    x: &DesignMatrix,
    config: &FractionalConfig,
    prior: &ModelPrior,
    opts: &Mc3Opts,
) -> Result<SearchResult> {
    let scorer = FractionalScorer::new(config, y, x)?;
    let cache = ScoreCache::new();
    let q = y.q();
    let mut result = mc3_decomposable_with_score(
        q,
        |g| decomposable_log_ml(g, &scorer, &cache).value_or_neg_inf(),
        prior,
        opts,
    )?;
    result.cache_hits = cache.hits();
    result.cache_misses = cache.misses();
    Ok(result)
}

/// The MH engine with an injectable graph score, so stationary behaviour can
/// be exercised against a constant-score stub.
pub fn mc3_decomposable_with_score<F>(
    q: usize,
    score_fn: F,
    prior: &ModelPrior,
    opts: &Mc3Opts,
) -> Result<SearchResult>
where
    F: Fn(&DecomposableGraph) -> f64,
{
    prior.validate()?;
    if q == 0 {
        return Err(Error::Config("need at least one vertex".into()));
    }
    if !(opts.temperature.is_finite() && opts.temperature > 0.0) {
        return Err(Error::Config(format!(
            "temperature must be positive, got {}",
            opts.temperature
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..q)
        .flat_map(|i| ((i + 1)..q).map(move |j| (i, j)))
        .collect();
    let max_edges = pairs.len();
    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);

    let mut edges: Vec<(usize, usize)> = Vec::new();
    let start_graph = DecomposableGraph::from_edges(q, &edges).expect("empty graph is chordal");
    let mut memo: HashMap<Vec<(usize, usize)>, f64> = HashMap::new();
    let mut visited = 0u64;
    let score_of = |g: &DecomposableGraph,
                    key: &Vec<(usize, usize)>,
                    memo: &mut HashMap<Vec<(usize, usize)>, f64>,
                    visited: &mut u64|
     -> f64 {
        if let Some(&s) = memo.get(key) {
            return s;
        }
        *visited += 1;
        let s = score_fn(g);
        memo.insert(key.clone(), s);
        s
    };

    let mut current_total =
        score_of(&start_graph, &edges, &mut memo, &mut visited) + prior.log_prior(0, max_edges);
    let mut visit_counts: HashMap<Vec<(usize, usize)>, u64> = HashMap::new();
    let mut pair_counts = vec![0u64; max_edges];
    let mut best_seen = current_total;
    let mut trace = vec![TraceEntry {
        iteration: 0,
        action: "start".into(),
        score: current_total,
    }];

    let record = |edges: &Vec<(usize, usize)>,
                  visit_counts: &mut HashMap<Vec<(usize, usize)>, u64>,
                  pair_counts: &mut Vec<u64>,
                  pairs: &[(usize, usize)]| {
        *visit_counts.entry(edges.clone()).or_insert(0) += 1;
        for (idx, pair) in pairs.iter().enumerate() {
            if edges.binary_search(pair).is_ok() {
                pair_counts[idx] += 1;
            }
        }
    };
    record(&edges, &mut visit_counts, &mut pair_counts, &pairs);

    for it in 1..=opts.iterations {
        if max_edges > 0 {
            let toggle = pairs[rng.gen_range(0..max_edges)];
            let mut proposal = edges.clone();
            match proposal.binary_search(&toggle) {
                Ok(pos) => {
                    proposal.remove(pos);
                }
                Err(pos) => proposal.insert(pos, toggle),
            }
            if let Ok(candidate) = DecomposableGraph::from_edges(q, &proposal) {
                let cand_total = score_of(&candidate, &proposal, &mut memo, &mut visited)
                    + prior.log_prior(proposal.len(), max_edges);
                let delta = (cand_total - current_total) / opts.temperature;
                if delta >= 0.0 || rng.gen::<f64>().ln() < delta {
                    edges = proposal;
                    current_total = cand_total;
                    if current_total > best_seen {
                        best_seen = current_total;
                        trace.push(TraceEntry {
                            iteration: it,
                            action: "improve".into(),
                            score: current_total,
                        });
                    }
                }
            }
        }
        record(&edges, &mut visit_counts, &mut pair_counts, &pairs);
    }

    // most visited graph; ties break toward the smaller edge list
    let mut tally: Vec<(Vec<(usize, usize)>, u64)> = visit_counts.into_iter().collect();
    tally.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let (modal_edges, _) = tally
        .into_iter()
        .next()
        .expect("at least the initial graph");
    let modal = DecomposableGraph::from_edges(q, &modal_edges)
        .expect("only chordal graphs are ever visited");
    let modal_key = modal_edges.clone();
    let modal_total = score_of(&modal, &modal_key, &mut memo, &mut visited)
        + prior.log_prior(modal_edges.len(), max_edges);

    let samples = (opts.iterations + 1) as f64;
    let edge_frequencies = pairs
        .iter()
        .zip(pair_counts.iter())
        .map(|(&(a, b), &c)| EdgeFrequency {
            a,
            b,
            frequency: c as f64 / samples,
        })
        .collect();

    Ok(SearchResult {
        graph: BestGraph::Decomposable { edges: modal_edges },
        predictors: Vec::new(),
        score: modal_total,
        trace,
        visited,
        cache_hits: 0,
        cache_misses: 0,
        edge_frequencies: Some(edge_frequencies),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExhaustiveMode {
    Dag,
    Decomposable,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExhaustiveRow {
    pub graph: BestGraph,
    pub log_ml: Option<f64>,
    pub log_prior: f64,
    /// `log_ml + log_prior`, the sort key; invalid graphs sort last.
    pub total: Option<f64>,
    pub valid: bool,
    /// Markov equivalence class, numbered by first appearance in the sorted
    /// table (DAG mode only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_id: Option<usize>,
}

/// Scores every graph on up to five vertices and returns the table sorted by
/// total score. Ground truth for the search operations and the
/// equivalence-class checks.
pub fn exhaustive_small(
    y: &ResponseMatrix,
    x: &DesignMatrix,
    config: &FractionalConfig,
    prior: &ModelPrior,
    mode: ExhaustiveMode,
) -> Result<(Vec<ExhaustiveRow>, ScoreCache)> {
    prior.validate()?;
    let q = y.q();
    if q > 5 {
        return Err(Error::Config(format!(
            "exhaustive scoring supports at most 5 responses, got {q}"
        )));
    }
    let scorer = FractionalScorer::new(config, y, x)?;
    let cache = ScoreCache::new();
    let max_edges = q * (q - 1) / 2;
    let mut rows: Vec<(
        ExhaustiveRow,
        Option<crate::graphs::EquivalenceFingerprint>,
        Vec<u8>,
    )> = match mode {
        ExhaustiveMode::Dag => {
            let dags = enumerate_dags(q)?;
            dags.par_iter()
                .map(|d| {
                    let report = dag_log_ml(d, &scorer, &cache);
                    let log_prior = prior.log_prior(d.edge_count(), max_edges);
                    let encoding = encode_dag(d);
                    (
                        ExhaustiveRow {
                            graph: BestGraph::Dag {
                                parents: d.parent_sets().to_vec(),
                            },
                            log_ml: report.log_ml,
                            log_prior,
                            total: report.log_ml.map(|m| m + log_prior),
                            valid: report.valid,
                            class_id: None,
                        },
                        Some(fingerprint(d)),
                        encoding,
                    )
                })
                .collect()
        }
        ExhaustiveMode::Decomposable => {
            let graphs = enumerate_decomposable(q)?;
            graphs
                .par_iter()
                .map(|g| {
                    let report = decomposable_log_ml(g, &scorer, &cache);
                    let log_prior = prior.log_prior(g.edge_count(), max_edges);
                    let encoding = encode_edges(&g.edges());
                    (
                        ExhaustiveRow {
                            graph: BestGraph::Decomposable { edges: g.edges() },
                            log_ml: report.log_ml,
                            log_prior,
                            total: report.log_ml.map(|m| m + log_prior),
                            valid: report.valid,
                            class_id: None,
                        },
                        None,
                        encoding,
                    )
                })
                .collect()
        }
    };
    rows.sort_by(|a, b| {
        let ta = a.0.total.unwrap_or(f64::NEG_INFINITY);
        let tb = b.0.total.unwrap_or(f64::NEG_INFINITY);
        tb.partial_cmp(&ta)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.2.cmp(&b.2))
    });
    // assign class ids by first appearance in sorted order
    let mut class_ids: HashMap<crate::graphs::EquivalenceFingerprint, usize> = HashMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for (mut row, fp, _) in rows {
        if let Some(fp) = fp {
            let next = class_ids.len();
            row.class_id = Some(*class_ids.entry(fp).or_insert(next));
        }
        out.push(row);
    }
    Ok((out, cache))
}

fn encode_dag(d: &Dag) -> Vec<u8> {
    let mut out = Vec::new();
    for j in 0..d.q() {
        for u in d.parents(j).iter() {
            out.push(j as u8);
            out.push(u as u8);
        }
        out.push(u8::MAX);
    }
    out
}

fn encode_edges(edges: &[(usize, usize)]) -> Vec<u8> {
    let mut out = Vec::new();
    for &(a, b) in edges {
        out.push(a as u8);
        out.push(b as u8);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::rngs::StdRng;

    fn response_from(values: DMatrix<f64>) -> ResponseMatrix {
        let q = values.ncols();
        ResponseMatrix::new(values, (0..q).map(|j| format!("Y{}", j + 1)).collect()).unwrap()
    }

    fn strong_pair_data(n: usize, seed: u64) -> ResponseMatrix {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut values = DMatrix::zeros(n, 2);
        for i in 0..n {
            let y1: f64 = rng.gen_range(-1.0..1.0);
            values[(i, 0)] = y1;
            values[(i, 1)] = 1.5 * y1 + 0.1 * rng.gen_range(-1.0..1.0);
        }
        response_from(values)
    }

    #[test]
    fn greedy_finds_strong_pairwise_edge() {
        let y = strong_pair_data(200, 1);
        let opts = GreedyOpts {
            max_parents: 1,
            max_predictors: 0,
            restarts: 2,
            seed: 7,
        };
        let result = greedy_dag_search(
            &y,
            None,
            &FractionalConfig::Recommended,
            &ModelPrior::Uniform,
            &opts,
        )
        .unwrap();
        let dag = result.dag().unwrap();
        assert_eq!(dag.edge_count(), 1);

        // exhaustive check over the 3 two-vertex DAGs confirms the winner
        let x = DesignMatrix::intercept_only(200);
        let (rows, _) = exhaustive_small(
            &y,
            &x,
            &FractionalConfig::Recommended,
            &ModelPrior::Uniform,
            ExhaustiveMode::Dag,
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert!((rows[0].total.unwrap() - result.score).abs() < 1e-9);
    }

    #[test]
    fn greedy_keeps_empty_dag_on_independent_data() {
        let mut rng = StdRng::seed_from_u64(5);
        let values = DMatrix::from_fn(150, 3, |_, _| rng.gen_range(-1.0..1.0));
        let y = response_from(values);
        let prior = ModelPrior::EdgeBinomial { edge_prob: 0.1 };
        let opts = GreedyOpts {
            max_parents: 2,
            max_predictors: 0,
            restarts: 1,
            seed: 3,
        };
        let result =
            greedy_dag_search(&y, None, &FractionalConfig::Recommended, &prior, &opts).unwrap();
        let dag = result.dag().unwrap();
        assert_eq!(dag.edge_count(), 0, "trace: {:?}", result.trace);

        // the empty model must beat every single-edge neighbor
        let x = DesignMatrix::intercept_only(150);
        let (rows, _) = exhaustive_small(
            &y,
            &x,
            &FractionalConfig::Recommended,
            &prior,
            ExhaustiveMode::Dag,
        )
        .unwrap();
        let empty_total = rows
            .iter()
            .find(|r| matches!(&r.graph, BestGraph::Dag { parents } if parents.iter().all(|p| p.is_empty())))
            .unwrap()
            .total
            .unwrap();
        for row in &rows {
            if let BestGraph::Dag { parents } = &row.graph {
                let edges: usize = parents.iter().map(|p| p.len()).sum();
                if edges == 1 {
                    assert!(row.total.unwrap() < empty_total);
                }
            }
        }
    }

    #[test]
    fn greedy_is_deterministic() {
        let y = strong_pair_data(80, 11);
        let opts = GreedyOpts {
            max_parents: 1,
            max_predictors: 0,
            restarts: 3,
            seed: 42,
        };
        let a = greedy_dag_search(
            &y,
            None,
            &FractionalConfig::Recommended,
            &ModelPrior::Uniform,
            &opts,
        )
        .unwrap();
        let b = greedy_dag_search(
            &y,
            None,
            &FractionalConfig::Recommended,
            &ModelPrior::Uniform,
            &opts,
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn greedy_trace_is_strictly_increasing() {
        let y = strong_pair_data(120, 13);
        let opts = GreedyOpts {
            max_parents: 1,
            max_predictors: 0,
            restarts: 1,
            seed: 1,
        };
        let result = greedy_dag_search(
            &y,
            None,
            &FractionalConfig::Recommended,
            &ModelPrior::Uniform,
            &opts,
        )
        .unwrap();
        for w in result.trace.windows(2) {
            assert!(w[1].score > w[0].score);
        }
    }

    #[test]
    fn greedy_rejects_bad_configuration() {
        let y = strong_pair_data(6, 17);
        let opts = GreedyOpts {
            max_parents: 5,
            max_predictors: 0,
            restarts: 1,
            seed: 0,
        };
        assert!(matches!(
            greedy_dag_search(
                &y,
                None,
                &FractionalConfig::Recommended,
                &ModelPrior::Uniform,
                &opts
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn mc3_zero_iterations_returns_empty_graph() {
        let result = mc3_decomposable_with_score(
            4,
            |_| 0.0,
            &ModelPrior::Uniform,
            &Mc3Opts {
                iterations: 0,
                temperature: 1.0,
                seed: 0,
            },
        )
        .unwrap();
        match &result.graph {
            BestGraph::Decomposable { edges } => assert!(edges.is_empty()),
            _ => panic!("expected a decomposable result"),
        }
    }

    #[test]
    fn mc3_is_deterministic() {
        let y = strong_pair_data(60, 23);
        let x = DesignMatrix::intercept_only(60);
        let opts = Mc3Opts {
            iterations: 500,
            temperature: 1.0,
            seed: 9,
        };
        let a = mc3_decomposable(
            &y,
            &x,
            &FractionalConfig::Recommended,
            &ModelPrior::Uniform,
            &opts,
        )
        .unwrap();
        let b = mc3_decomposable(
            &y,
            &x,
            &FractionalConfig::Recommended,
            &ModelPrior::Uniform,
            &opts,
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn exhaustive_counts_match_known_values() {
        let y = strong_pair_data(50, 29);
        let x = DesignMatrix::intercept_only(50);
        let (rows2, _) = exhaustive_small(
            &y,
            &x,
            &FractionalConfig::Recommended,
            &ModelPrior::Uniform,
            ExhaustiveMode::Dag,
        )
        .unwrap();
        assert_eq!(rows2.len(), 3);

        let mut rng = StdRng::seed_from_u64(31);
        let values = DMatrix::from_fn(40, 4, |_, _| rng.gen_range(-1.0..1.0));
        let y4 = response_from(values);
        let x4 = DesignMatrix::intercept_only(40);
        let (rows4, _) = exhaustive_small(
            &y4,
            &x4,
            &FractionalConfig::Recommended,
            &ModelPrior::Uniform,
            ExhaustiveMode::Dag,
        )
        .unwrap();
        assert_eq!(rows4.len(), 543);
        let (dec4, _) = exhaustive_small(
            &y4,
            &x4,
            &FractionalConfig::Recommended,
            &ModelPrior::Uniform,
            ExhaustiveMode::Decomposable,
        )
        .unwrap();
        assert_eq!(dec4.len(), 61);
    }

    #[test]
    fn exhaustive_cache_sharing_is_transparent() {
        let y = strong_pair_data(45, 37);
        let x = DesignMatrix::intercept_only(45);
        let (shared, _) = exhaustive_small(
            &y,
            &x,
            &FractionalConfig::Recommended,
            &ModelPrior::Uniform,
            ExhaustiveMode::Dag,
        )
        .unwrap();
        // cold per-graph scoring agrees bit for bit
        let scorer = FractionalScorer::new(&FractionalConfig::Recommended, &y, &x).unwrap();
        for row in &shared {
            if let BestGraph::Dag { parents } = &row.graph {
                let dag = Dag::validate(parents.clone()).unwrap();
                let cold = ScoreCache::new();
                let report = dag_log_ml(&dag, &scorer, &cold);
                assert_eq!(
                    report.log_ml.map(f64::to_bits),
                    row.log_ml.map(f64::to_bits)
                );
            }
        }
    }
}
