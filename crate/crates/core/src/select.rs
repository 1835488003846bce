//! Prototype selectors for the sparse-support transport objective.
//!
//! [`spot_greedy`] adds the `s` source points with the largest marginal gains
//! per iteration and keeps a `1 − e^{−1/s}` approximation guarantee (the
//! classic `1 − 1/e` for `s = 1`). [`spot_simple`] ranks points by the mass
//! they receive in the unconstrained plan. [`brute_force_optimum`] enumerates
//! subsets and is exact on tiny instances.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{uniform_weights, Dataset, SimilarityMatrix, SimplexWeights};
use crate::error::{Error, Result};
use crate::objective::{objective_of, plan_for_set, weights_from_plan, PrototypeSet, ScoreCache, TransportPlan};

/// Upper bound on the number of subsets [`brute_force_optimum`] will visit.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// When [`spot_greedy`] stops adding prototypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Select exactly `k` points.
    #[default]
    Cardinality,
    /// Keep going until an iteration increases the objective by less than `ε`.
    Epsilon,
    /// Stop at `k` points or at the first sub-`ε` iteration.
    WhicheverFirst,
}

impl fmt::Display for StopRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopRule::Cardinality => "cardinality",
            StopRule::Epsilon => "epsilon",
            StopRule::WhicheverFirst => "whichever_first",
        })
    }
}

impl FromStr for StopRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cardinality" => Ok(StopRule::Cardinality),
            "epsilon" => Ok(StopRule::Epsilon),
            "whichever_first" => Ok(StopRule::WhicheverFirst),
            other => Err(Error::InvalidConfig(format!("unknown stop rule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub k: usize,
    /// Points added per iteration.
    pub s: usize,
    pub epsilon: Option<f64>,
    pub stop_rule: StopRule,
}

impl SelectionConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            s: 1,
            epsilon: None,
            stop_rule: StopRule::Cardinality,
        }
    }

    pub fn with_batch(mut self, s: usize) -> Self {
        self.s = s;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64, stop_rule: StopRule) -> Self {
        self.epsilon = Some(epsilon);
        self.stop_rule = stop_rule;
        self
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.k > m {
            return Err(Error::InvalidConfig(format!(
                "k = {} exceeds the {m} source points",
                self.k
            )));
        }
        if self.s == 0 || self.s > self.k {
            return Err(Error::InvalidConfig(format!(
                "batch size s = {} must lie in [1, k = {}]",
                self.s, self.k
            )));
        }
        match (self.stop_rule, self.epsilon) {
            (StopRule::Cardinality, _) => Ok(()),
            (_, None) => Err(Error::InvalidConfig(format!(
                "stop rule {} needs epsilon",
                self.stop_rule
            ))),
            (_, Some(e)) if !(e >= 0.0) || !e.is_finite() => Err(Error::InvalidConfig(format!(
                "epsilon must be a non-negative number, got {e}"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub added_indices: Vec<usize>,
    /// Objective after this iteration.
    pub objective: f64,
    /// Objective increase over the previous iteration.
    pub gain: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelectionTrace {
    pub per_iteration: Vec<IterationRecord>,
    pub total: f64,
}

// gain descending, index ascending
fn by_gain_then_index(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0))
}

/// Indices of the `count` largest scores, ties to the lowest index, ordered
/// by rank.
pub(crate) fn top_by_score(mut scored: Vec<(usize, f64)>, count: usize) -> Vec<usize> {
    let count = count.min(scored.len());
    if count == 0 {
        return Vec::new();
    }
    if count < scored.len() {
        scored.select_nth_unstable_by(count - 1, by_gain_then_index);
        scored.truncate(count);
    }
    scored.sort_by(by_gain_then_index);
    scored.into_iter().map(|(i, _)| i).collect()
}

fn finish(cache: &ScoreCache<'_>, q: &SimplexWeights) -> Result<PrototypeSet> {
    let plan = cache.plan().ok_or(Error::EmptySet)?;
    let weights = weights_from_plan(&plan, q)?;
    Ok(PrototypeSet {
        indices: cache.current_set().to_vec(),
        weights: weights.values().to_vec(),
        plan: Some(plan),
        objective: cache.objective(),
    })
}

/// Greedy batch selection: each iteration scores every remaining source
/// point by its marginal gain and adds the top `s` (ties to the lowest
/// index). The last iteration adds only `k mod s` points when `s` does not
/// divide `k`. Under an epsilon rule the iteration whose increment falls
/// below `ε` (or is zero) is the last one.
pub fn spot_greedy(
    similarity: &SimilarityMatrix,
    q: &SimplexWeights,
    config: &SelectionConfig,
) -> Result<(PrototypeSet, SelectionTrace)> {
    let m = similarity.nrows();
    config.validate(m)?;
    let mut cache = ScoreCache::new(similarity, q)?;
    let limit = match config.stop_rule {
        StopRule::Epsilon => m,
        _ => config.k,
    };
    let epsilon = match config.stop_rule {
        StopRule::Cardinality => None,
        _ => config.epsilon,
    };
    let mut trace = SelectionTrace::default();
    while cache.len() < limit {
        let take = config.s.min(limit - cache.len());
        let chosen = top_by_score(cache.remaining_gains(), take);
        let before = cache.objective();
        cache.extend(&chosen)?;
        let gain = cache.objective() - before;
        trace.per_iteration.push(IterationRecord {
            iteration: trace.per_iteration.len() + 1,
            added_indices: chosen,
            objective: cache.objective(),
            gain,
        });
        if let Some(eps) = epsilon {
            if gain < eps || gain <= 0.0 {
                break;
            }
        }
    }
    trace.total = cache.objective();
    Ok((finish(&cache, q)?, trace))
}

/// Heuristic selection from the unconstrained plan: every target column sends
/// its mass to its most similar source point, and the `k` points receiving
/// the most mass are kept (ties to the lowest index). The plan and objective
/// are then recomputed on the kept set.
pub fn spot_simple(similarity: &SimilarityMatrix, q: &SimplexWeights, k: usize) -> Result<PrototypeSet> {
    let m = similarity.nrows();
    if k == 0 || k > m {
        return Err(Error::InvalidConfig(format!("k = {k} must lie in [1, {m}]")));
    }
    let all: Vec<usize> = (0..m).collect();
    let full = plan_for_set(similarity, q, &all)?;
    let mass: Vec<(usize, f64)> = full.row_sums().into_iter().enumerate().collect();
    let chosen = top_by_score(mass, k);
    prototype_set_for(similarity, q, &chosen)
}

/// Builds the prototype set for a fixed selection: optimal plan, weights and
/// objective.
pub fn prototype_set_for(similarity: &SimilarityMatrix, q: &SimplexWeights, indices: &[usize]) -> Result<PrototypeSet> {
    let plan: TransportPlan = plan_for_set(similarity, q, indices)?;
    let weights = weights_from_plan(&plan, q)?;
    Ok(PrototypeSet {
        indices: indices.to_vec(),
        weights: weights.values().to_vec(),
        objective: plan.similarity_inner(similarity),
        plan: Some(plan),
    })
}

/// `k` distinct indices drawn uniformly from `0..m`, reproducible from `seed`.
pub fn random_indices(m: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 0 || k > m {
        return Err(Error::InvalidConfig(format!("k = {k} must lie in [1, {m}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, m, k).into_vec())
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exact maximizer of `f` over subsets of size `min(k, m)`, found by
/// enumeration. Since `f` is monotone this is also the maximum over all
/// subsets of size at most `k`. Ties go to the lexicographically smallest
/// index set.
pub fn brute_force_optimum(similarity: &SimilarityMatrix, q: &SimplexWeights, k: usize) -> Result<PrototypeSet> {
    let m = similarity.nrows();
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let k = k.min(m);
    let count = binomial(m, k);
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(format!(
            "C({m}, {k}) = {count} subsets exceeds the enumeration limit {BRUTE_FORCE_LIMIT}"
        )));
    }
    let mut subset: Vec<usize> = (0..k).collect();
    let mut best = subset.clone();
    let mut best_value = objective_of(similarity, q, &subset)?;
    // lexicographic successor
    while let Some(pos) = (0..k).rev().find(|&p| subset[p] < m - k + p) {
        subset[pos] += 1;
        for p in pos + 1..k {
            subset[p] = subset[p - 1] + 1;
        }
        let value = objective_of(similarity, q, &subset)?;
        if value > best_value {
            best_value = value;
            best.clone_from(&subset);
        }
    }
    prototype_set_for(similarity, q, &best)
}

/// k-medoids as the special case source = target with uniform weights:
/// runs [`spot_greedy`] on the square self-similarity with `q = 1/n`, whose
/// objective is the k-medoids score `(1/n) Σ_j max_{z∈P} S_zj`.
pub fn k_medoids(dataset: &Dataset, similarity_self: &SimilarityMatrix, k: usize, s: usize) -> Result<PrototypeSet> {
    if !similarity_self.is_square() {
        return Err(Error::DimensionMismatch {
            context: "k-medoids needs a square self-similarity",
            left: similarity_self.nrows(),
            right: similarity_self.ncols(),
        });
    }
    if similarity_self.nrows() != dataset.len() {
        return Err(Error::DimensionMismatch {
            context: "self-similarity vs dataset size",
            left: similarity_self.nrows(),
            right: dataset.len(),
        });
    }
    let q = uniform_weights(dataset.len())?;
    let config = SelectionConfig::new(k).with_batch(s);
    spot_greedy(similarity_self, &q, &config).map(|(set, _)| set)
}

#[cfg(test)]
mod tests {
    use ndarray::{array, Array2};

    use super::*;
    use crate::data::{compute_ground_cost, to_similarity, MetricKind};

    fn worked() -> (SimilarityMatrix, SimplexWeights) {
        (
            SimilarityMatrix::from_entries(array![[3.0, 1.0], [2.0, 4.0]]).unwrap(),
            SimplexWeights::new(vec![0.5, 0.5]).unwrap(),
        )
    }

    #[test]
    fn greedy_worked_example() {
        let (s, q) = worked();
        let (p, trace) = spot_greedy(&s, &q, &SelectionConfig::new(1)).unwrap();
        assert_eq!(p.indices, vec![1]);
        assert_eq!(p.objective, 3.0);
        assert_eq!(trace.per_iteration.len(), 1);

        let (p, trace) = spot_greedy(&s, &q, &SelectionConfig::new(2)).unwrap();
        assert_eq!(p.indices, vec![1, 0]);
        assert_eq!(p.objective, 3.5);
        assert_eq!(p.weights, vec![0.5, 0.5]);
        assert_eq!(
            trace.per_iteration.iter().map(|r| r.gain).collect::<Vec<_>>(),
            vec![3.0, 0.5]
        );
        assert_eq!(trace.total, 3.5);

        let (p, trace) = spot_greedy(&s, &q, &SelectionConfig::new(2).with_batch(2)).unwrap();
        assert_eq!(p.indices, vec![1, 0]);
        assert_eq!(p.objective, 3.5);
        assert_eq!(trace.per_iteration.len(), 1);
    }

    #[test]
    fn greedy_rejects_bad_configs() {
        let (s, q) = worked();
        assert!(spot_greedy(&s, &q, &SelectionConfig::new(3)).is_err());
        assert!(spot_greedy(&s, &q, &SelectionConfig::new(1).with_batch(2)).is_err());
        assert!(spot_greedy(&s, &q, &SelectionConfig::new(0)).is_err());
        let mut c = SelectionConfig::new(1);
        c.stop_rule = StopRule::Epsilon;
        assert!(spot_greedy(&s, &q, &c).is_err());
    }

    #[test]
    fn last_batch_is_truncated() {
        let s = SimilarityMatrix::from_entries(Array2::from_shape_fn((7, 5), |(i, j)| ((i * 7 + j * 3) % 11) as f64))
            .unwrap();
        let q = uniform_weights(5).unwrap();
        let (p, trace) = spot_greedy(&s, &q, &SelectionConfig::new(5).with_batch(2)).unwrap();
        assert_eq!(p.len(), 5);
        let sizes: Vec<usize> = trace.per_iteration.iter().map(|r| r.added_indices.len()).collect();
        assert_eq!(sizes, vec![2, 2, 1]);
    }

    #[test]
    fn zero_gain_continuation() {
        // row 0 dominates every column: all later gains are 0
        let s = SimilarityMatrix::from_entries(array![[5.0, 5.0], [1.0, 1.0], [2.0, 0.0]]).unwrap();
        let q = uniform_weights(2).unwrap();
        let (p, _) = spot_greedy(&s, &q, &SelectionConfig::new(3)).unwrap();
        assert_eq!(p.indices, vec![0, 1, 2]);
        assert_eq!(p.weights, vec![1.0, 0.0, 0.0]);

        let c = SelectionConfig::new(3).with_epsilon(0.0, StopRule::WhicheverFirst);
        let (p, trace) = spot_greedy(&s, &q, &c).unwrap();
        assert_eq!(p.indices, vec![0, 1]);
        assert_eq!(trace.per_iteration.last().unwrap().gain, 0.0);
    }

    #[test]
    fn epsilon_rule_ignores_k() {
        let s = SimilarityMatrix::from_entries(array![
            [4.0, 0.0, 0.0],
            [0.0, 2.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0]
        ])
        .unwrap();
        let q = uniform_weights(3).unwrap();
        // increments are 4/3, 2/3, 1/3, 0
        let c = SelectionConfig::new(1).with_epsilon(0.5, StopRule::Epsilon);
        let (p, trace) = spot_greedy(&s, &q, &c).unwrap();
        assert_eq!(p.indices, vec![0, 1, 2]);
        assert!(trace.per_iteration.last().unwrap().gain < 0.5);

        let c = SelectionConfig::new(1).with_epsilon(0.5, StopRule::WhicheverFirst);
        let (p, _) = spot_greedy(&s, &q, &c).unwrap();
        assert_eq!(p.indices, vec![0]);
    }

    #[test]
    fn simple_worked_example() {
        let (s, q) = worked();
        let p = spot_simple(&s, &q, 2).unwrap();
        assert_eq!(p.indices, vec![0, 1]);
        assert_eq!(p.objective, 3.5);
        let p = spot_simple(&s, &q, 1).unwrap();
        assert_eq!(p.indices, vec![0]);
        assert_eq!(p.objective, 2.0);
        assert!(spot_simple(&s, &q, 3).is_err());

        let dom = SimilarityMatrix::from_entries(array![[1.0, 1.0, 1.0], [9.0, 9.0, 9.0], [2.0, 3.0, 4.0]]).unwrap();
        let q3 = uniform_weights(3).unwrap();
        assert_eq!(spot_simple(&dom, &q3, 1).unwrap().indices, vec![1]);
        assert_eq!(spot_simple(&dom, &q3, 2).unwrap().indices[0], 1);
    }

    #[test]
    fn brute_force_worked_example() {
        let (s, q) = worked();
        let p = brute_force_optimum(&s, &q, 1).unwrap();
        assert_eq!(p.indices, vec![1]);
        assert_eq!(p.objective, 3.0);
        let p = brute_force_optimum(&s, &q, 2).unwrap();
        assert_eq!(p.indices, vec![0, 1]);
        assert_eq!(p.objective, 3.5);
    }

    #[test]
    fn brute_force_guard() {
        let s = SimilarityMatrix::from_entries(Array2::ones((40, 2))).unwrap();
        let q = uniform_weights(2).unwrap();
        assert!(matches!(brute_force_optimum(&s, &q, 20), Err(Error::TooLarge(_))));
        assert_eq!(binomial(40, 20), 137_846_528_820);
    }

    #[test]
    fn kmedoids_examples() {
        let ds = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![10.0]], None, "line").unwrap();
        let cost = compute_ground_cost(&ds, &ds, MetricKind::Euclidean).unwrap();
        let sim = to_similarity(&cost, None).unwrap();
        let p = k_medoids(&ds, &sim, 1, 1).unwrap();
        assert_eq!(p.indices, vec![1]);

        let p = k_medoids(&ds, &sim, 3, 1).unwrap();
        assert!((p.objective - sim.beta().unwrap()).abs() < 1e-12);

        let twins = Dataset::from_rows(&[vec![2.0, 2.0], vec![2.0, 2.0]], None, "twins").unwrap();
        let cost = compute_ground_cost(&twins, &twins, MetricKind::SquaredEuclidean).unwrap();
        let sim = to_similarity(&cost, None).unwrap();
        assert_eq!(k_medoids(&twins, &sim, 1, 1).unwrap().indices, vec![0]);

        let rect = SimilarityMatrix::from_entries(Array2::ones((3, 2))).unwrap();
        assert!(k_medoids(&ds, &rect, 1, 1).is_err());
    }

    #[test]
    fn top_scores_break_ties_low() {
        let scored = vec![(3, 1.0), (1, 2.0), (0, 1.0), (2, 2.0)];
        assert_eq!(top_by_score(scored.clone(), 3), vec![1, 2, 0]);
        assert_eq!(top_by_score(scored, 10), vec![1, 2, 0, 3]);
    }
}
