//! Graph-level log marginal likelihoods.
//!
//! A DAG factorizes over vertices as family terms over parent terms; a
//! decomposable graph factorizes over junction-tree cliques and separators.
//! Both draw per-subset scores from one shared write-once cache, since the
//! same subsets recur across many candidate graphs during search.

use std::sync::atomic::{AtomicU64, Ordering};

use dashmap::DashMap;
use serde::{Serialize, Serializer};

use crate::fractional::{FractionalScorer, SubsetScore};
use crate::graphs::{Dag, DecomposableGraph};
use crate::subset::VertexSet;

/// Write-once concurrent map from canonical subset keys to subset scores.
/// Family and parent sets share the cache; a family is just another subset.
///
/// Hit/miss counters are derived as `lookups - distinct keys` and
/// `distinct keys`, so they stay deterministic even when concurrent callers
/// race to compute the same subset.
#[derive(Debug, Default)]
pub struct ScoreCache {
    map: DashMap<VertexSet, SubsetScore>,
    lookups: AtomicU64,
}

impl ScoreCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the cached score for `subset`, computing it on a miss.
    /// Duplicated concurrent computation is permitted (scores are pure); the
    /// first insert wins, so a key is never overwritten.
    pub fn score(&self, scorer: &FractionalScorer, subset: &VertexSet) -> SubsetScore {
        self.lookups.fetch_add(1, Ordering::Relaxed);
        if let Some(hit) = self.map.get(subset) {
            return hit.clone();
        }
        let computed = scorer.log_ml_subset(subset);
        self.map
            .entry(subset.clone())
            .or_insert(computed)
            .value()
            .clone()
    }

    pub fn lookups(&self) -> u64 {
        self.lookups.load(Ordering::Relaxed)
    }

    pub fn hits(&self) -> u64 {
        self.lookups() - self.misses()
    }

    pub fn misses(&self) -> u64 {
        self.map.len() as u64
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn ser_one_based<S: Serializer>(v: &usize, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(*v as u64 + 1)
}

/// Family and parent contributions of one vertex.
#[derive(Debug, Clone, Serialize)]
pub struct VertexTerm {
    #[serde(serialize_with = "ser_one_based")]
    pub vertex: usize,
    pub family: SubsetScore,
    pub parents: SubsetScore,
}

/// A subset that breached the sparsity bound `size < n - p`.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(serialize_with = "ser_opt_one_based")]
    pub vertex: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clique: Option<VertexSet>,
    /// Subset sizes must stay strictly below this bound.
    pub bound: usize,
    pub size: usize,
    pub reason: String,
}

fn ser_opt_one_based<S: Serializer>(
    v: &Option<usize>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&(*v + 1)),
        None => s.serialize_none(),
    }
}

/// Per-graph score breakdown.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ScoreDetail {
    Dag {
        per_vertex: Vec<VertexTerm>,
    },
    Decomposable {
        per_clique: Vec<SubsetScore>,
        per_separator: Vec<SubsetScore>,
    },
}

/// Graph-level log marginal likelihood with its decomposition and validity
/// diagnostics. Infeasible graphs are a result (`valid = false`), never an
/// error.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreReport {
    pub log_ml: Option<f64>,
    pub valid: bool,
    #[serde(flatten)]
    pub detail: ScoreDetail,
    pub violations: Vec<Violation>,
}

impl ScoreReport {
    /// Score as a search objective: invalid graphs rank below everything.
    pub fn value_or_neg_inf(&self) -> f64 {
        self.log_ml.unwrap_or(f64::NEG_INFINITY)
    }
}

/// `log m(Y | D) = Σ_j [log m(Y_fa(j)) - log m(Y_pa(j))]`, each term the
/// fractional marginal likelihood of a response subset. Vertices whose family
/// reaches `n - p` invalidate the report with a named violation.
pub fn dag_log_ml(dag: &Dag, scorer: &FractionalScorer, cache: &ScoreCache) -> ScoreReport {
    let bound = scorer.subset_size_bound();
    let mut per_vertex = Vec::with_capacity(dag.q());
    let mut violations = Vec::new();
    let mut total = 0.0;
    let mut valid = true;
    for j in 0..dag.q() {
        let family = cache.score(scorer, &dag.family(j));
        let parents = cache.score(scorer, dag.parents(j));
        for score in [&family, &parents] {
            if !score.valid {
                valid = false;
                violations.push(Violation {
                    vertex: Some(j),
                    clique: None,
                    bound,
                    size: score.subset.len(),
                    reason: score.reason.clone().unwrap_or_default(),
                });
            }
        }
        if valid {
            total += family.value_or_neg_inf() - parents.value_or_neg_inf();
        }
        per_vertex.push(VertexTerm {
            vertex: j,
            family,
            parents,
        });
    }
    ScoreReport {
        log_ml: valid.then_some(total),
        valid,
        detail: ScoreDetail::Dag { per_vertex },
        violations,
    }
}

/// `log m(Y | G) = Σ_C log m(Y_C) - Σ_S log m(Y_S)` over junction-tree
/// cliques and separators (separators with multiplicity). Equals the DAG
/// score of any directed version of `G`.
pub fn decomposable_log_ml(
    g: &DecomposableGraph,
    scorer: &FractionalScorer,
    cache: &ScoreCache,
) -> ScoreReport {
    let bound = scorer.subset_size_bound();
    let mut valid = true;
    let mut total = 0.0;
    let mut violations = Vec::new();
    let mut per_clique = Vec::with_capacity(g.cliques().len());
    for c in g.cliques() {
        let score = cache.score(scorer, c);
        if !score.valid {
            valid = false;
            violations.push(Violation {
                vertex: None,
                clique: Some(c.clone()),
                bound,
                size: c.len(),
                reason: score.reason.clone().unwrap_or_default(),
            });
        } else {
            total += score.value_or_neg_inf();
        }
        per_clique.push(score);
    }
    let mut per_separator = Vec::with_capacity(g.separators().len());
    for s in g.separators() {
        let score = cache.score(scorer, s);
        if !score.valid {
            valid = false;
            violations.push(Violation {
                vertex: None,
                clique: Some(s.clone()),
                bound,
                size: s.len(),
                reason: score.reason.clone().unwrap_or_default(),
            });
        } else {
            total -= score.value_or_neg_inf();
        }
        per_separator.push(score);
    }
    ScoreReport {
        log_ml: valid.then_some(total),
        valid,
        detail: ScoreDetail::Decomposable {
            per_clique,
            per_separator,
        },
        violations,
    }
}
