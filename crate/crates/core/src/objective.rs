//! The sparse-support transport objective
//!
//! ```text
//! f(P) = Σ_j q_j · max_{i∈P} S_ij,      f(∅) = 0
//! ```
//!
//! which is the value of the best transport plan from a source distribution
//! supported on `P` to the target weights `q`. The optimal plan sends all of
//! target column `j` to the row of `P` with the largest similarity, so `f`
//! decomposes over target columns and can be updated incrementally through
//! the per-column maxima held in a [`ScoreCache`].

use ndarray::Array2;
use rayon::prelude::*;

use crate::data::{SimilarityMatrix, SimplexWeights};
use crate::error::{Error, Result};

const NO_ROW: usize = usize::MAX;

/// A transport plan whose row `r` carries the mass of source point
/// `row_index[r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub entries: Array2<f64>,
    pub row_index: Vec<usize>,
}

impl TransportPlan {
    /// Mass leaving each row (`γ1`).
    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.outer_iter().map(|r| r.sum()).collect()
    }

    /// Mass arriving at each target column (`γᵀ1`).
    pub fn column_sums(&self) -> Vec<f64> {
        self.entries.columns().into_iter().map(|c| c.sum()).collect()
    }

    /// `⟨S_P, γ⟩` against the rows of `similarity` named by `row_index`.
    pub fn similarity_inner(&self, similarity: &SimilarityMatrix) -> f64 {
        let mut total = 0.0;
        for (r, &i) in self.row_index.iter().enumerate() {
            let srow = similarity.row(i);
            total += self.entries.row(r).iter().zip(srow).map(|(g, s)| g * s).sum::<f64>();
        }
        total
    }

    /// `(row, col, value)` triples for the nonzero entries; `row` is the
    /// source index, not the plan row.
    pub fn nonzeros(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for ((r, c), &v) in self.entries.indexed_iter() {
            if v != 0.0 {
                out.push((self.row_index[r], c, v));
            }
        }
        out
    }

    pub fn count_nonzero(&self) -> usize {
        self.entries.iter().filter(|v| **v != 0.0).count()
    }
}

/// Selected prototypes with their learned weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    pub indices: Vec<usize>,
    /// Weight of `indices[r]`; sums to one.
    pub weights: Vec<f64>,
    pub plan: Option<TransportPlan>,
    pub objective: f64,
}

impl PrototypeSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn check_dims(similarity: &SimilarityMatrix, q: &SimplexWeights) -> Result<()> {
    if q.len() != similarity.ncols() {
        return Err(Error::DimensionMismatch {
            context: "target weights vs similarity columns",
            left: q.len(),
            right: similarity.ncols(),
        });
    }
    Ok(())
}

fn check_indices(indices: &[usize], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    for &i in indices {
        if i >= m {
            return Err(Error::IndexOutOfRange { index: i, len: m });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(())
}

/// Per-column maxima `κ_P^j` of the current selection, with the row that
/// attains each one.
///
/// Ties in a column go to the lowest source index regardless of insertion
/// order, so the recovered plan only depends on the set `P`.
#[derive(Debug, Clone)]
pub struct ScoreCache<'a> {
    similarity: &'a SimilarityMatrix,
    q: &'a SimplexWeights,
    // -inf while P is empty
    column_max: Vec<f64>,
    column_argmax: Vec<usize>,
    current_set: Vec<usize>,
    selected: Vec<bool>,
    objective: f64,
}

impl<'a> ScoreCache<'a> {
    /// The cache for `P = ∅`, whose objective is 0.
    pub fn new(similarity: &'a SimilarityMatrix, q: &'a SimplexWeights) -> Result<Self> {
        check_dims(similarity, q)?;
        let n = similarity.ncols();
        Ok(Self {
            similarity,
            q,
            column_max: vec![f64::NEG_INFINITY; n],
            column_argmax: vec![NO_ROW; n],
            current_set: Vec::new(),
            selected: vec![false; similarity.nrows()],
            objective: 0.0,
        })
    }

    pub fn similarity(&self) -> &'a SimilarityMatrix {
        self.similarity
    }

    pub fn target_weights(&self) -> &'a SimplexWeights {
        self.q
    }

    /// Selected indices in insertion order.
    pub fn current_set(&self) -> &[usize] {
        &self.current_set
    }

    pub fn len(&self) -> usize {
        self.current_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current_set.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.selected.get(i).copied().unwrap_or(false)
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// `κ_P^j` for every column, or `None` while the selection is empty.
    pub fn column_max(&self) -> Option<&[f64]> {
        (!self.is_empty()).then_some(self.column_max.as_slice())
    }

    /// The row of `P` attaining `κ_P^j`, or `None` while the selection is empty.
    pub fn column_argmax(&self) -> Option<&[usize]> {
        (!self.is_empty()).then_some(self.column_argmax.as_slice())
    }

    // Since S ≥ 0 and f(∅) = 0, clamping κ at 0 reproduces the empty-set
    // convention in every gain and update.
    fn baseline(&self) -> Vec<f64> {
        self.column_max.iter().map(|k| k.max(0.0)).collect()
    }

    #[inline]
    fn gain_against(&self, i: usize, baseline: &[f64]) -> f64 {
        let q = self.q.values();
        let row = self.similarity.row(i);
        let mut g = 0.0;
        for j in 0..row.len() {
            let d = row[j] - baseline[j];
            if d > 0.0 {
                g += q[j] * d;
            }
        }
        g
    }

    /// `f(P ∪ {i}) − f(P)` for each candidate, in O(n) per candidate.
    pub fn gains(&self, candidates: &[usize]) -> Result<Vec<f64>> {
        let m = self.similarity.nrows();
        for &i in candidates {
            if i >= m {
                return Err(Error::IndexOutOfRange { index: i, len: m });
            }
            if self.selected[i] {
                return Err(Error::AlreadySelected(i));
            }
        }
        let baseline = self.baseline();
        Ok(candidates
            .par_iter()
            .map(|&i| self.gain_against(i, &baseline))
            .collect())
    }

    /// Gains of every unselected source point as `(index, gain)`, ascending
    /// by index.
    pub fn remaining_gains(&self) -> Vec<(usize, f64)> {
        let baseline = self.baseline();
        (0..self.similarity.nrows())
            .into_par_iter()
            .filter(|&i| !self.selected[i])
            .map(|i| (i, self.gain_against(i, &baseline)))
            .collect()
    }

    /// Adds `new_indices` to the selection in O(|new|·n).
    pub fn extend(&mut self, new_indices: &[usize]) -> Result<()> {
        let m = self.similarity.nrows();
        for &i in new_indices {
            if i >= m {
                return Err(Error::IndexOutOfRange { index: i, len: m });
            }
            if self.selected[i] {
                return Err(Error::AlreadySelected(i));
            }
        }
        if new_indices.len() > 1 {
            let mut sorted = new_indices.to_vec();
            sorted.sort_unstable();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateIndex(w[0]));
            }
        }
        let q = self.q.values();
        for &i in new_indices {
            let row = self.similarity.row(i);
            for j in 0..row.len() {
                let s = row[j];
                let k = self.column_max[j];
                if s > k || (s == k && i < self.column_argmax[j]) {
                    if s > k {
                        self.objective += q[j] * (s - k.max(0.0));
                    }
                    self.column_max[j] = s;
                    self.column_argmax[j] = i;
                }
            }
            self.selected[i] = true;
            self.current_set.push(i);
        }
        Ok(())
    }

    /// The optimal plan for the current selection, read off the cached
    /// argmax rows in O(n). Rows follow insertion order.
    pub fn plan(&self) -> Option<TransportPlan> {
        if self.is_empty() {
            return None;
        }
        let mut position = vec![NO_ROW; self.similarity.nrows()];
        for (r, &i) in self.current_set.iter().enumerate() {
            position[i] = r;
        }
        let mut entries = Array2::zeros((self.current_set.len(), self.similarity.ncols()));
        for (j, (&i, &qj)) in self.column_argmax.iter().zip(self.q.values()).enumerate() {
            entries[[position[i], j]] = qj;
        }
        Some(TransportPlan {
            entries,
            row_index: self.current_set.clone(),
        })
    }
}

/// The cache for `P = ∅`.
pub fn empty_cache<'a>(similarity: &'a SimilarityMatrix, q: &'a SimplexWeights) -> Result<ScoreCache<'a>> {
    ScoreCache::new(similarity, q)
}

/// Returns a copy of `cache` with `new_indices` added.
pub fn extend_cache<'a>(cache: &ScoreCache<'a>, new_indices: &[usize]) -> Result<ScoreCache<'a>> {
    let mut next = cache.clone();
    next.extend(new_indices)?;
    Ok(next)
}

/// `f(P ∪ {i}) − f(P)` for each candidate; the cache is left untouched.
pub fn incremental_gains(cache: &ScoreCache<'_>, candidates: &[usize]) -> Result<Vec<f64>> {
    cache.gains(candidates)
}

/// Evaluates `f(P) = Σ_j q_j max_{i∈P} S_ij` directly.
pub fn objective_of(similarity: &SimilarityMatrix, q: &SimplexWeights, set: &[usize]) -> Result<f64> {
    check_dims(similarity, q)?;
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    check_indices(set, similarity.nrows())?;
    let mut colmax = similarity.row(set[0]).to_vec();
    for &i in &set[1..] {
        for (c, &s) in colmax.iter_mut().zip(similarity.row(i)) {
            if s > *c {
                *c = s;
            }
        }
    }
    Ok(colmax.iter().zip(q.values()).map(|(c, w)| w * c).sum())
}

/// The optimal plan for `P`: column `j` sends all of `q_j` to the row of `P`
/// with the largest similarity, ties going to the lowest source index. Plan
/// rows follow the order of `set`.
pub fn plan_for_set(similarity: &SimilarityMatrix, q: &SimplexWeights, set: &[usize]) -> Result<TransportPlan> {
    check_dims(similarity, q)?;
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    check_indices(set, similarity.nrows())?;
    let n = similarity.ncols();
    let mut entries = Array2::zeros((set.len(), n));
    for (j, &qj) in q.values().iter().enumerate() {
        let mut best = 0;
        for r in 1..set.len() {
            let (s, b) = (similarity.get(set[r], j), similarity.get(set[best], j));
            if s > b || (s == b && set[r] < set[best]) {
                best = r;
            }
        }
        entries[[best, j]] = qj;
    }
    Ok(TransportPlan {
        entries,
        row_index: set.to_vec(),
    })
}

/// Recovers prototype weights `w = γ1` from a plan whose column sums equal `q`.
pub fn weights_from_plan(plan: &TransportPlan, q: &SimplexWeights) -> Result<SimplexWeights> {
    if plan.entries.ncols() != q.len() {
        return Err(Error::DimensionMismatch {
            context: "plan columns vs target weights",
            left: plan.entries.ncols(),
            right: q.len(),
        });
    }
    if plan.entries.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidInput("plan has negative or NaN entries".into()));
    }
    for (j, (c, qj)) in plan.column_sums().iter().zip(q.values()).enumerate() {
        if (c - qj).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "plan column {j} carries {c}, target weight is {qj}"
            )));
        }
    }
    SimplexWeights::new(plan.row_sums())
}

/// Submodularity ratio of the pair `(L, S)`:
///
/// ```text
/// α_{L,S} = Σ_{i∈S} [f(L∪{i}) − f(L)] / [f(L∪S) − f(L)]
/// ```
///
/// `None` when the joint increment is zero and the ratio is undefined.
pub fn submodularity_ratio(
    similarity: &SimilarityMatrix,
    q: &SimplexWeights,
    base: &[usize],
    added: &[usize],
) -> Result<Option<f64>> {
    let mut cache = ScoreCache::new(similarity, q)?;
    cache.extend(base)?;
    let singles: f64 = cache.gains(added)?.iter().sum();
    let before = cache.objective();
    cache.extend(added)?;
    let joint = cache.objective() - before;
    Ok((joint > 0.0).then(|| singles / joint))
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;
    use crate::data::uniform_weights;

    fn worked() -> (SimilarityMatrix, SimplexWeights) {
        (
            SimilarityMatrix::from_entries(array![[3.0, 1.0], [2.0, 4.0]]).unwrap(),
            SimplexWeights::new(vec![0.5, 0.5]).unwrap(),
        )
    }

    #[test]
    fn empty_cache_has_zero_objective() {
        let (s, q) = worked();
        let c = empty_cache(&s, &q).unwrap();
        assert_eq!(c.objective(), 0.0);
        assert!(c.is_empty());
        assert!(c.column_max().is_none());

        let bad = uniform_weights(3).unwrap();
        assert!(matches!(empty_cache(&s, &bad), Err(Error::DimensionMismatch { .. })));

        let s1 = SimilarityMatrix::from_entries(array![[1.0], [2.0]]).unwrap();
        let q1 = uniform_weights(1).unwrap();
        let c = empty_cache(&s1, &q1).unwrap();
        assert_eq!(c.column_max, vec![f64::NEG_INFINITY]);
        assert_eq!(c.objective(), 0.0);
    }

    #[test]
    fn objective_worked_example() {
        let (s, q) = worked();
        assert_eq!(objective_of(&s, &q, &[0]).unwrap(), 2.0);
        assert_eq!(objective_of(&s, &q, &[1]).unwrap(), 3.0);
        assert_eq!(objective_of(&s, &q, &[0, 1]).unwrap(), 3.5);
        assert_eq!(objective_of(&s, &q, &[1, 0]).unwrap(), 3.5);
        assert!(matches!(objective_of(&s, &q, &[]), Err(Error::EmptySet)));
        assert!(matches!(objective_of(&s, &q, &[2]), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(objective_of(&s, &q, &[0, 0]), Err(Error::DuplicateIndex(0))));
    }

    #[test]
    fn gains_worked_example() {
        let (s, q) = worked();
        let empty = empty_cache(&s, &q).unwrap();
        // P = ∅: gain is the row inner product with q
        assert_eq!(empty.gains(&[0, 1]).unwrap(), vec![2.0, 3.0]);

        let c = extend_cache(&empty, &[0]).unwrap();
        assert_eq!(incremental_gains(&c, &[1]).unwrap(), vec![1.5]);
        assert!(matches!(c.gains(&[0]), Err(Error::AlreadySelected(0))));
        assert!(empty.is_empty(), "extend_cache must not touch its input");
    }

    #[test]
    fn extend_worked_example() {
        let (s, q) = worked();
        let c0 = empty_cache(&s, &q).unwrap();
        let c1 = extend_cache(&c0, &[0]).unwrap();
        assert_eq!(c1.column_max().unwrap(), &[3.0, 1.0]);
        assert_eq!(c1.objective(), 2.0);
        let c2 = extend_cache(&c1, &[1]).unwrap();
        assert_eq!(c2.column_max().unwrap(), &[3.0, 4.0]);
        assert_eq!(c2.column_argmax().unwrap(), &[0, 1]);
        assert_eq!(c2.objective(), 3.5);

        let same = extend_cache(&c2, &[]).unwrap();
        assert_eq!(same.objective(), c2.objective());
        assert_eq!(same.current_set(), c2.current_set());

        assert!(matches!(extend_cache(&c2, &[1]), Err(Error::AlreadySelected(1))));
        assert!(matches!(extend_cache(&c0, &[1, 1]), Err(Error::DuplicateIndex(1))));
    }

    #[test]
    fn plan_worked_example() {
        let (s, q) = worked();
        let p = plan_for_set(&s, &q, &[0, 1]).unwrap();
        assert_eq!(p.entries, array![[0.5, 0.0], [0.0, 0.5]]);
        assert_eq!(p.similarity_inner(&s), 3.5);

        let p = plan_for_set(&s, &q, &[0]).unwrap();
        assert_eq!(p.entries, array![[0.5, 0.5]]);

        let tie = SimilarityMatrix::from_entries(array![[2.0, 1.0], [2.0, 4.0]]).unwrap();
        let p = plan_for_set(&tie, &q, &[1, 0]).unwrap();
        // rows follow the order of the set: row 0 is source 1
        assert_eq!(p.entries, array![[0.0, 0.5], [0.5, 0.0]]);

        assert!(matches!(plan_for_set(&s, &q, &[]), Err(Error::EmptySet)));
    }

    #[test]
    fn cache_plan_matches_plan_for_set_with_ties() {
        let tie = SimilarityMatrix::from_entries(array![[2.0, 1.0, 5.0], [2.0, 4.0, 5.0], [2.0, 4.0, 1.0]]).unwrap();
        let q = uniform_weights(3).unwrap();
        for order in [[0, 1, 2], [2, 1, 0], [1, 2, 0]] {
            let mut c = empty_cache(&tie, &q).unwrap();
            for i in order {
                c.extend(&[i]).unwrap();
            }
            assert_eq!(c.column_argmax().unwrap(), &[0, 1, 0]);
            assert_eq!(c.plan().unwrap(), plan_for_set(&tie, &q, &order).unwrap());
        }
    }

    #[test]
    fn weights_from_plans() {
        let (s, q) = worked();
        let p = plan_for_set(&s, &q, &[0, 1]).unwrap();
        assert_eq!(weights_from_plan(&p, &q).unwrap().values(), &[0.5, 0.5]);
        let p = plan_for_set(&s, &q, &[0]).unwrap();
        assert_eq!(weights_from_plan(&p, &q).unwrap().values(), &[1.0]);

        let bad = TransportPlan {
            entries: array![[0.7, 0.0], [0.0, 0.3]],
            row_index: vec![0, 1],
        };
        assert!(weights_from_plan(&bad, &q).is_err());
    }

    #[test]
    fn ratio_of_single_element_is_one() {
        let (s, q) = worked();
        assert_eq!(submodularity_ratio(&s, &q, &[0], &[1]).unwrap(), Some(1.0));
        // nothing left to gain
        assert_eq!(submodularity_ratio(&s, &q, &[0, 1], &[]).unwrap(), None);
    }
}
