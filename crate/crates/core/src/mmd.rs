//! MMD-based baseline selectors.
//!
//! Both baselines maximize the weighted kernel score
//!
//! ```text
//! l(w) = μᵀw − ½ wᵀKw,   μ_i = (1/n) Σ_j k(x_i, y_j),   K_ab = k(x_a, x_b)
//! ```
//!
//! MMD-Critic fixes every selected weight to `1/|P|`; ProtoDash picks by
//! gradient and refits non-negative weights on the support.

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::data::{Dataset, GroundCost, SimplexWeights};
use crate::error::{Error, Result};
use crate::transport::{OtProblem, OtSolution, OtSolver};

/// Kernel widths tried when the width is cross-validated.
pub const SIGMA_GRID: [f64; 5] = [0.1, 0.5, 1.0, 5.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    /// `K_ab` over source points.
    pub gram: Array2<f64>,
    /// `μ_i`, the mean kernel value between source `i` and the target.
    pub cross_mean: Array1<f64>,
    pub kernel_width: f64,
}

impl KernelMatrix {
    pub fn len(&self) -> usize {
        self.cross_mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cross_mean.is_empty()
    }
}

fn gaussian(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>, two_sigma_sq: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-d2 / two_sigma_sq).exp()
}

/// Gaussian kernel `exp(−‖x − x'‖² / 2σ²)` over the source points plus the
/// source-to-target kernel means.
pub fn gaussian_kernel(source: &Dataset, target: &Dataset, sigma: f64) -> Result<KernelMatrix> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "kernel width must be positive, got {sigma}"
        )));
    }
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            context: "source vs target feature dimension",
            left: source.dim(),
            right: target.dim(),
        });
    }
    let m = source.len();
    let n = target.len();
    let two_sigma_sq = 2.0 * sigma * sigma;
    let rows: Vec<(Vec<f64>, f64)> = (0..m)
        .into_par_iter()
        .map(|a| {
            let x = source.point(a);
            let gram_row = (0..m).map(|b| gaussian(x, source.point(b), two_sigma_sq)).collect();
            let mean = (0..n).map(|j| gaussian(x, target.point(j), two_sigma_sq)).sum::<f64>() / n as f64;
            (gram_row, mean)
        })
        .collect();
    let mut gram = Array2::zeros((m, m));
    let mut cross_mean = Array1::zeros(m);
    for (a, (row, mean)) in rows.into_iter().enumerate() {
        gram.row_mut(a).assign(&Array1::from(row));
        cross_mean[a] = mean;
    }
    // exact symmetry
    for a in 0..m {
        for b in 0..a {
            gram[[a, b]] = gram[[b, a]];
        }
    }
    Ok(KernelMatrix {
        gram,
        cross_mean,
        kernel_width: sigma,
    })
}

/// `l(w) = μᵀw − ½ wᵀKw` for a non-negative weight vector over all source points.
pub fn mmd_objective(kernel: &KernelMatrix, w: &[f64]) -> Result<f64> {
    if w.len() != kernel.len() {
        return Err(Error::DimensionMismatch {
            context: "weights vs kernel size",
            left: w.len(),
            right: kernel.len(),
        });
    }
    if let Some(v) = w.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidInput(format!("weights must be non-negative, found {v}")));
    }
    let w = ndarray::ArrayView1::from(w);
    Ok(kernel.cross_mean.dot(&w) - 0.5 * w.dot(&kernel.gram.dot(&w)))
}

fn sparse_score(kernel: &KernelMatrix, indices: &[usize], weights: &[f64]) -> f64 {
    let linear: f64 = indices
        .iter()
        .zip(weights)
        .map(|(&i, w)| kernel.cross_mean[i] * w)
        .sum();
    let mut quad = 0.0;
    for (&a, wa) in indices.iter().zip(weights) {
        for (&b, wb) in indices.iter().zip(weights) {
            quad += wa * kernel.gram[[a, b]] * wb;
        }
    }
    linear - 0.5 * quad
}

/// Gradient `μ − Kw` of [`mmd_objective`].
pub fn mmd_gradient(kernel: &KernelMatrix, w: &[f64]) -> Result<Vec<f64>> {
    if w.len() != kernel.len() {
        return Err(Error::DimensionMismatch {
            context: "weights vs kernel size",
            left: w.len(),
            right: kernel.len(),
        });
    }
    let w = ndarray::ArrayView1::from(w);
    Ok((&kernel.cross_mean - &kernel.gram.dot(&w)).to_vec())
}

/// Output of an MMD baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct MmdSelection {
    pub indices: Vec<usize>,
    /// Weight of `indices[r]`.
    pub weights: Vec<f64>,
    /// `l(w)` at the returned weights.
    pub score: f64,
    /// `l(w)` after each greedy step.
    pub history: Vec<f64>,
}

impl MmdSelection {
    /// Dense weight vector over all `m` source points.
    pub fn dense_weights(&self, m: usize) -> Vec<f64> {
        let mut w = vec![0.0; m];
        for (&i, &x) in self.indices.iter().zip(&self.weights) {
            w[i] = x;
        }
        w
    }
}

fn check_k(kernel: &KernelMatrix, k: usize) -> Result<()> {
    if k > kernel.len() {
        return Err(Error::InvalidConfig(format!(
            "k = {k} exceeds the {} source points",
            kernel.len()
        )));
    }
    Ok(())
}

/// Greedy MMD-Critic selection with all weights equal to `1/|P|`. Each step
/// adds the point whose inclusion maximizes `l` at uniform weights over
/// `P ∪ {i}`; ties go to the lowest index.
pub fn mmd_critic_select(kernel: &KernelMatrix, k: usize) -> Result<MmdSelection> {
    check_k(kernel, k)?;
    let m = kernel.len();
    let mu = &kernel.cross_mean;
    let gram = &kernel.gram;
    let mut chosen = vec![false; m];
    let mut indices = Vec::with_capacity(k);
    let mut history = Vec::with_capacity(k);
    // Σ_{a∈P} μ_a, Σ_{a,b∈P} K_ab and Σ_{a∈P} K_ai for every i
    let mut sum_mu = 0.0;
    let mut sum_gram = 0.0;
    let mut to_set = vec![0.0; m];
    while indices.len() < k {
        let t = (indices.len() + 1) as f64;
        let mut best: Option<(usize, f64)> = None;
        for i in (0..m).filter(|&i| !chosen[i]) {
            let lin = (sum_mu + mu[i]) / t;
            let quad = (sum_gram + 2.0 * to_set[i] + gram[[i, i]]) / (t * t);
            let score = lin - 0.5 * quad;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        let (i, score) = best.expect("k <= m leaves a candidate");
        chosen[i] = true;
        indices.push(i);
        sum_mu += mu[i];
        sum_gram += 2.0 * to_set[i] + gram[[i, i]];
        for (acc, g) in to_set.iter_mut().zip(gram.row(i)) {
            *acc += g;
        }
        history.push(score);
    }
    let weights = vec![1.0 / indices.len().max(1) as f64; indices.len()];
    let score = if indices.is_empty() {
        0.0
    } else {
        sparse_score(kernel, &indices, &weights)
    };
    Ok(MmdSelection {
        indices,
        weights,
        score,
        history,
    })
}

/// Settings for the ProtoDash weight refit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefitConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for RefitConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            grad_tol: 1e-8,
        }
    }
}

/// Projected gradient ascent of `l` over non-negative weights on `support`,
/// starting at `w`. The step `1/L` uses the row-sum norm of the restricted
/// gram matrix, which bounds its largest eigenvalue, so `l` never decreases.
/// Returns `l` after every iteration.
pub fn refit_weights(kernel: &KernelMatrix, support: &[usize], w: &mut [f64], cfg: &RefitConfig) -> Result<Vec<f64>> {
    if support.len() != w.len() {
        return Err(Error::DimensionMismatch {
            context: "support vs weights",
            left: support.len(),
            right: w.len(),
        });
    }
    if let Some(&i) = support.iter().find(|&&i| i >= kernel.len()) {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: kernel.len(),
        });
    }
    let sub = |a: usize, b: usize| kernel.gram[[support[a], support[b]]];
    let s = support.len();
    let lipschitz = (0..s)
        .map(|a| (0..s).map(|b| sub(a, b).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut scores = Vec::new();
    if !(lipschitz > 0.0) {
        return Ok(scores);
    }
    for _ in 0..cfg.max_iters {
        let grad: Vec<f64> = (0..s)
            .map(|a| kernel.cross_mean[support[a]] - (0..s).map(|b| sub(a, b) * w[b]).sum::<f64>())
            .collect();
        let mut moved = 0.0;
        for (x, g) in w.iter_mut().zip(&grad) {
            let next = (*x + g / lipschitz).max(0.0);
            moved += (next - *x) * (next - *x);
            *x = next;
        }
        scores.push(sparse_score(kernel, support, w));
        // norm of the projected gradient step, rescaled to gradient units
        if moved.sqrt() * lipschitz < cfg.grad_tol {
            break;
        }
    }
    Ok(scores)
}

/// ProtoDash: at each step add the unselected point with the largest
/// gradient `(μ − Kw)_i` (ties to the lowest index), then refit the weights
/// on the support.
pub fn protodash_select(kernel: &KernelMatrix, k: usize) -> Result<MmdSelection> {
    protodash_select_with(kernel, k, &RefitConfig::default())
}

pub fn protodash_select_with(kernel: &KernelMatrix, k: usize, refit_cfg: &RefitConfig) -> Result<MmdSelection> {
    check_k(kernel, k)?;
    let m = kernel.len();
    let mut chosen = vec![false; m];
    let mut indices: Vec<usize> = Vec::with_capacity(k);
    let mut weights: Vec<f64> = Vec::with_capacity(k);
    let mut history = Vec::with_capacity(k);
    while indices.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..m).filter(|&i| !chosen[i]) {
            let kw: f64 = indices
                .iter()
                .zip(&weights)
                .map(|(&a, w)| kernel.gram[[i, a]] * w)
                .sum();
            let grad = kernel.cross_mean[i] - kw;
            if best.is_none_or(|(_, b)| grad > b) {
                best = Some((i, grad));
            }
        }
        let (i, _) = best.expect("k <= m leaves a candidate");
        chosen[i] = true;
        indices.push(i);
        weights.push(0.0);
        refit_weights(kernel, &indices, &mut weights, refit_cfg)?;
        history.push(sparse_score(kernel, &indices, &weights));
    }
    let score = history.last().copied().unwrap_or(0.0);
    Ok(MmdSelection {
        indices,
        weights,
        score,
        history,
    })
}

/// Transports the selected prototypes, weighted by their normalized
/// weights, onto the target weights `q`. `cost` is the full source-by-target
/// ground cost; plan rows follow `selection.indices`.
pub fn compose_with_ot(
    selection: &MmdSelection,
    cost: &GroundCost,
    q: &SimplexWeights,
    solver: OtSolver,
) -> Result<OtSolution> {
    if selection.indices.is_empty() {
        return Err(Error::EmptySet);
    }
    let p = SimplexWeights::normalized(selection.weights.clone())?;
    let restricted = cost.select_rows(&selection.indices)?;
    let problem = OtProblem::new(restricted.entries().clone(), p, q.clone())?;
    let mut solution = solver.solve(&problem)?;
    solution.plan.row_index = selection.indices.clone();
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;
    use crate::data::{compute_ground_cost, uniform_weights, MetricKind};

    fn kernel(gram: Array2<f64>, mu: Vec<f64>) -> KernelMatrix {
        KernelMatrix {
            gram,
            cross_mean: Array1::from(mu),
            kernel_width: 1.0,
        }
    }

    #[test]
    fn gaussian_kernel_values() {
        let sigma = 0.7;
        // ‖x0 − x1‖² = 2σ²
        let x = Dataset::from_rows(&[vec![0.0, 0.0], vec![sigma * 2f64.sqrt(), 0.0]], None, "x").unwrap();
        let km = gaussian_kernel(&x, &x, sigma).unwrap();
        assert_eq!(km.gram[[0, 0]], 1.0);
        assert!((km.gram[[0, 1]] - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(km.gram[[0, 1]], km.gram[[1, 0]]);

        let one = Dataset::from_rows(&[vec![1.0, 2.0]], None, "one").unwrap();
        assert_eq!(gaussian_kernel(&one, &one, 1.0).unwrap().cross_mean[0], 1.0);
        assert!(gaussian_kernel(&one, &one, 0.0).is_err());
        assert!(gaussian_kernel(&one, &one, -1.0).is_err());
    }

    #[test]
    fn objective_values() {
        let km = kernel(array![[1.0]], vec![0.5]);
        assert_eq!(mmd_objective(&km, &[0.0]).unwrap(), 0.0);
        assert_eq!(mmd_objective(&km, &[0.5]).unwrap(), 0.125);
        assert!(mmd_objective(&km, &[-0.1]).is_err());

        let km = kernel(array![[1.0, 0.3], [0.3, 0.8]], vec![0.4, 0.9]);
        assert_eq!(mmd_objective(&km, &[0.0, 1.0]).unwrap(), 0.9 - 0.5 * 0.8);
    }

    #[test]
    fn critic_basics() {
        let km = kernel(array![[1.0]], vec![0.3]);
        let sel = mmd_critic_select(&km, 1).unwrap();
        assert_eq!(sel.indices, vec![0]);
        assert_eq!(sel.weights, vec![1.0]);

        let sel = mmd_critic_select(&km, 0).unwrap();
        assert!(sel.indices.is_empty());
        assert_eq!(sel.score, 0.0);
        assert!(mmd_critic_select(&km, 2).is_err());
    }

    #[test]
    fn critic_prefers_distinct_point_over_duplicate() {
        // points 0 and 1 coincide, point 2 is far from both; equal μ
        let pts = Dataset::from_rows(&[vec![0.0], vec![0.0], vec![5.0]], None, "p").unwrap();
        let mut km = gaussian_kernel(&pts, &pts, 1.0).unwrap();
        km.cross_mean = Array1::from(vec![0.5, 0.5, 0.5]);
        let sel = mmd_critic_select(&km, 2).unwrap();
        assert_eq!(sel.indices, vec![0, 2]);
        // exhaustive check of the second step
        let l = |a: usize, b: usize| {
            let mut w = vec![0.0; 3];
            w[a] = 0.5;
            w[b] = 0.5;
            mmd_objective(&km, &w).unwrap()
        };
        assert!(l(0, 2) > l(0, 1));
    }

    #[test]
    fn protodash_cases() {
        let km = kernel(array![[2.0]], vec![0.6]);
        let sel = protodash_select(&km, 1).unwrap();
        assert!((sel.weights[0] - 0.3).abs() < 1e-12);

        let km = kernel(
            array![[1.0, 0.2, 0.1], [0.2, 1.0, 0.4], [0.1, 0.4, 1.0]],
            vec![0.2, 0.7, 0.4],
        );
        let sel = protodash_select(&km, 2).unwrap();
        assert_eq!(sel.indices[0], 1);
        assert!(sel.history.windows(2).all(|w| w[1] >= w[0]));

        let zero = kernel(array![[1.0, 0.5], [0.5, 1.0]], vec![0.0, 0.0]);
        let sel = protodash_select(&zero, 2).unwrap();
        assert_eq!(sel.weights, vec![0.0, 0.0]);
        assert_eq!(sel.score, 0.0);
    }

    #[test]
    fn compose_cases() {
        let src = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], None, "s").unwrap();
        let cost = compute_ground_cost(&src, &src, MetricKind::SquaredEuclidean).unwrap();
        let q = uniform_weights(3).unwrap();

        let single = MmdSelection {
            indices: vec![1],
            weights: vec![0.4],
            score: 0.0,
            history: vec![],
        };
        let sol = compose_with_ot(&single, &cost, &q, OtSolver::Exact).unwrap();
        assert_eq!(sol.plan.entries.row(0).to_vec(), q.values().to_vec());

        let all = MmdSelection {
            indices: vec![0, 1, 2],
            weights: vec![1.0; 3],
            score: 0.0,
            history: vec![],
        };
        let sol = compose_with_ot(&all, &cost, &q, OtSolver::Exact).unwrap();
        for ((i, j), &v) in sol.plan.entries.indexed_iter() {
            let expected = if i == j { 1.0 / 3.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-12);
        }

        let lopsided = MmdSelection {
            indices: vec![0, 2],
            weights: vec![1.0, 0.0],
            score: 0.0,
            history: vec![],
        };
        let sol = compose_with_ot(&lopsided, &cost, &q, OtSolver::Exact).unwrap();
        assert!(sol.plan.entries.row(1).iter().all(|&v| v == 0.0));
        assert_eq!(sol.plan.row_index, vec![0, 2]);

        let dead = MmdSelection {
            indices: vec![0],
            weights: vec![0.0],
            score: 0.0,
            history: vec![],
        };
        assert!(compose_with_ot(&dead, &cost, &q, OtSolver::Exact).is_err());
    }
}
