//! Classical optimal transport between two simplex-weighted point sets.
//!
//! [`solve_exact`] runs the transportation simplex (north-west corner start,
//! MODI potentials, Bland's pivoting rule) and returns a vertex of the
//! transport polytope. [`solve_sinkhorn`] computes the entropic plan
//! `diag(u) exp(−C/λ) diag(v)`, switching to log-domain updates when `λ` is
//! small compared to the cost range.

use std::collections::VecDeque;
use std::fmt;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SimplexWeights, SIMPLEX_TOL};
use crate::error::{Error, Result};
use crate::objective::TransportPlan;

/// Largest `k·n` accepted by [`solve_exact`].
pub const EXACT_CELL_LIMIT: usize = 400;

/// Below this `λ / max C` the Sinkhorn iterations run in the log domain.
pub const LOG_DOMAIN_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct OtProblem {
    pub cost: Array2<f64>,
    pub p: SimplexWeights,
    pub q: SimplexWeights,
}

impl OtProblem {
    pub fn new(cost: Array2<f64>, p: SimplexWeights, q: SimplexWeights) -> Result<Self> {
        if cost.nrows() != p.len() {
            return Err(Error::DimensionMismatch {
                context: "cost rows vs source weights",
                left: cost.nrows(),
                right: p.len(),
            });
        }
        if cost.ncols() != q.len() {
            return Err(Error::DimensionMismatch {
                context: "cost columns vs target weights",
                left: cost.ncols(),
                right: q.len(),
            });
        }
        if let Some(v) = cost.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!("cost entry {v} is negative or non-finite")));
        }
        Ok(Self { cost, p, q })
    }

    pub fn max_cost(&self) -> f64 {
        self.cost.iter().copied().fold(0.0, f64::max)
    }

    /// `⟨C, γ⟩`.
    pub fn cost_of(&self, plan: ArrayView2<'_, f64>) -> f64 {
        self.cost.iter().zip(plan.iter()).map(|(c, g)| c * g).sum()
    }

    /// `max(‖γ1 − p‖₁, ‖γᵀ1 − q‖₁)`.
    pub fn marginal_violation(&self, plan: ArrayView2<'_, f64>) -> f64 {
        let rows: f64 = plan
            .outer_iter()
            .zip(self.p.values())
            .map(|(r, p)| (r.sum() - p).abs())
            .sum();
        let cols: f64 = plan
            .columns()
            .into_iter()
            .zip(self.q.values())
            .map(|(c, q)| (c.sum() - q).abs())
            .sum();
        rows.max(cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinkhornConfig {
    /// Entropic regularization strength.
    pub reg: f64,
    pub max_iters: usize,
    /// Target L1 marginal violation.
    pub tol: f64,
}

impl SinkhornConfig {
    /// `λ = 0.1 · max C`, 10 000 iterations, tolerance `1e-6`.
    pub fn default_for(problem: &OtProblem) -> Self {
        let max = problem.max_cost();
        Self {
            reg: if max > 0.0 { 0.1 * max } else { 1.0 },
            max_iters: 10_000,
            tol: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reg > 0.0) || !self.reg.is_finite() {
            return Err(Error::InvalidConfig(format!("reg must be positive, got {}", self.reg)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Exact,
    Sinkhorn,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Exact => "exact",
            SolverKind::Sinkhorn => "sinkhorn",
        })
    }
}

/// A solved transport problem with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct OtSolution {
    pub plan: TransportPlan,
    /// Unregularized cost `⟨C, γ⟩`.
    pub objective: f64,
    pub marginal_violation: f64,
    pub solver: SolverKind,
    pub reg: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn finish(
    problem: &OtProblem,
    entries: Array2<f64>,
    solver: SolverKind,
    reg: Option<f64>,
    iterations: usize,
    converged: bool,
) -> OtSolution {
    let objective = problem.cost_of(entries.view());
    let marginal_violation = problem.marginal_violation(entries.view());
    OtSolution {
        plan: TransportPlan {
            row_index: (0..entries.nrows()).collect(),
            entries,
        },
        objective,
        marginal_violation,
        solver,
        reg,
        iterations,
        converged,
    }
}

/// Spanning-tree basis of the transportation simplex. Rows are nodes
/// `0..k`, columns are nodes `k..k+n`.
struct Basis {
    k: usize,
    n: usize,
    flow: Array2<f64>,
    basic: Array2<bool>,
}

impl Basis {
    fn north_west(p: &[f64], q: &[f64]) -> Self {
        let (k, n) = (p.len(), q.len());
        let mut flow = Array2::zeros((k, n));
        let mut basic = Array2::from_elem((k, n), false);
        let mut supply = p.to_vec();
        let mut demand = q.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let x = supply[i].min(demand[j]).max(0.0);
            flow[[i, j]] = x;
            basic[[i, j]] = true;
            supply[i] -= x;
            demand[j] -= x;
            if i == k - 1 && j == n - 1 {
                break;
            }
            // advance exactly one index per cell, keeping k + n − 1 basics
            if j == n - 1 || (i < k - 1 && supply[i] <= demand[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { k, n, flow, basic }
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.k + self.n];
        for ((i, j), &b) in self.basic.indexed_iter() {
            if b {
                adj[i].push(self.k + j);
                adj[self.k + j].push(i);
            }
        }
        adj
    }

    /// Dual potentials with `u_0 = 0` and `u_i + v_j = c_ij` on basic cells.
    fn potentials(&self, cost: &Array2<f64>, adj: &[Vec<usize>]) -> (Vec<f64>, Vec<f64>) {
        let mut pot = vec![f64::NAN; self.k + self.n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a] {
                if pot[b].is_nan() {
                    pot[b] = if a < self.k {
                        cost[[a, b - self.k]] - pot[a]
                    } else {
                        cost[[b, a - self.k]] - pot[a]
                    };
                    queue.push_back(b);
                }
            }
        }
        let v = pot.split_off(self.k);
        (pot, v)
    }

    /// Tree path from row node `i` to column node `k + j`.
    fn path(&self, adj: &[Vec<usize>], i: usize, j: usize) -> Vec<usize> {
        let target = self.k + j;
        let mut parent = vec![usize::MAX; self.k + self.n];
        parent[i] = i;
        let mut queue = VecDeque::from([i]);
        while let Some(a) = queue.pop_front() {
            if a == target {
                break;
            }
            for &b in &adj[a] {
                if parent[b] == usize::MAX {
                    parent[b] = a;
                    queue.push_back(b);
                }
            }
        }
        let mut nodes = vec![target];
        let mut cur = target;
        while cur != i {
            cur = parent[cur];
            nodes.push(cur);
        }
        nodes.reverse();
        nodes
    }

    fn cell(&self, a: usize, b: usize) -> (usize, usize) {
        if a < self.k {
            (a, b - self.k)
        } else {
            (b, a - self.k)
        }
    }
}

/// Exact optimal transport for problems with at most
/// [`EXACT_CELL_LIMIT`] cells.
pub fn solve_exact(problem: &OtProblem) -> Result<OtSolution> {
    let (k, n) = problem.cost.dim();
    if k * n > EXACT_CELL_LIMIT {
        return Err(Error::TooLarge(format!(
            "{k}x{n} = {} cells exceeds the exact-solver limit {EXACT_CELL_LIMIT}",
            k * n
        )));
    }
    let (p, q) = (problem.p.values(), problem.q.values());
    let imbalance = (p.iter().sum::<f64>() - q.iter().sum::<f64>()).abs();
    assert!(imbalance <= 2.0 * SIMPLEX_TOL, "simplex marginals must balance");

    let cost = &problem.cost;
    let scale = 1.0 + problem.max_cost();
    let tol = 1e-12 * scale;
    let mut basis = Basis::north_west(p, q);
    let max_pivots = 50 * (k + n) * (k + n) + 1000;
    let mut pivots = 0;
    loop {
        let adj = basis.adjacency();
        let (u, v) = basis.potentials(cost, &adj);
        // Bland: first improving cell in row-major order
        let entering = basis
            .basic
            .indexed_iter()
            .filter(|(_, &b)| !b)
            .map(|(cell, _)| cell)
            .find(|&(i, j)| cost[[i, j]] - u[i] - v[j] < -tol);
        let Some((ei, ej)) = entering else {
            break;
        };
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Solver(format!("no convergence after {max_pivots} pivots")));
        }
        let nodes = basis.path(&adj, ei, ej);
        let edges: Vec<(usize, usize)> = nodes.windows(2).map(|w| basis.cell(w[0], w[1])).collect();
        let last = edges.len();
        // the entering cell gains; path cells alternate starting with a loss
        // at the column end
        let losing = |t: usize| (last - 1 - t).is_multiple_of(2);
        let (mut theta, mut leave) = (f64::INFINITY, (usize::MAX, usize::MAX));
        for (t, &(i, j)) in edges.iter().enumerate() {
            if losing(t) {
                let x = basis.flow[[i, j]];
                if x < theta || (x == theta && (i, j) < leave) {
                    theta = x;
                    leave = (i, j);
                }
            }
        }
        for (t, &(i, j)) in edges.iter().enumerate() {
            if losing(t) {
                basis.flow[[i, j]] -= theta;
            } else {
                basis.flow[[i, j]] += theta;
            }
        }
        basis.flow[[ei, ej]] = theta;
        basis.flow[leave] = 0.0;
        basis.basic[[ei, ej]] = true;
        basis.basic[leave] = false;
    }
    let entries = basis.flow.mapv(|x| x.max(0.0));
    Ok(finish(problem, entries, SolverKind::Exact, None, pivots, true))
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Entropic optimal transport by alternating marginal scaling. Stops once
/// both L1 marginal violations fall below `tol`; hitting `max_iters` first
/// returns the plan with `converged = false`.
pub fn solve_sinkhorn(problem: &OtProblem, config: &SinkhornConfig) -> Result<OtSolution> {
    config.validate()?;
    let max_cost = problem.max_cost();
    if max_cost > 0.0 && config.reg / max_cost < LOG_DOMAIN_THRESHOLD {
        sinkhorn_log(problem, config)
    } else {
        sinkhorn_plain(problem, config)
    }
}

fn sinkhorn_plain(problem: &OtProblem, config: &SinkhornConfig) -> Result<OtSolution> {
    let (k, n) = problem.cost.dim();
    let (p, q) = (problem.p.values(), problem.q.values());
    let kernel = problem.cost.mapv(|c| (-c / config.reg).exp());
    let overflow = || {
        Error::Overflow(format!(
            "Sinkhorn scaling left the floating-point range at reg = {}; use a larger reg",
            config.reg
        ))
    };
    let mut u = vec![1.0; k];
    let mut v = vec![1.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iters {
        iterations += 1;
        for i in 0..k {
            let kv: f64 = (0..n).map(|j| kernel[[i, j]] * v[j]).sum();
            u[i] = if p[i] == 0.0 { 0.0 } else { p[i] / kv };
        }
        for j in 0..n {
            let ku: f64 = (0..k).map(|i| kernel[[i, j]] * u[i]).sum();
            v[j] = if q[j] == 0.0 { 0.0 } else { q[j] / ku };
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(overflow());
        }
        // column marginals are exact after the v-update
        let row_violation: f64 = (0..k)
            .map(|i| (u[i] * (0..n).map(|j| kernel[[i, j]] * v[j]).sum::<f64>() - p[i]).abs())
            .sum();
        if row_violation < config.tol {
            converged = true;
            break;
        }
    }
    let plan = Array2::from_shape_fn((k, n), |(i, j)| u[i] * kernel[[i, j]] * v[j]);
    if plan.iter().any(|x| !x.is_finite()) {
        return Err(overflow());
    }
    let mut sol = finish(
        problem,
        plan,
        SolverKind::Sinkhorn,
        Some(config.reg),
        iterations,
        converged,
    );
    sol.converged = converged && sol.marginal_violation < config.tol;
    Ok(sol)
}

fn sinkhorn_log(problem: &OtProblem, config: &SinkhornConfig) -> Result<OtSolution> {
    let (k, n) = problem.cost.dim();
    let reg = config.reg;
    let log_p: Vec<f64> = problem.p.values().iter().map(|x| x.ln()).collect();
    let log_q: Vec<f64> = problem.q.values().iter().map(|x| x.ln()).collect();
    let cost = &problem.cost;
    let mut f = vec![0.0; k];
    let mut g = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    let log_plan = |f: &[f64], g: &[f64], i: usize, j: usize| (f[i] + g[j] - cost[[i, j]]) / reg;
    while iterations < config.max_iters {
        iterations += 1;
        for i in 0..k {
            f[i] = if log_p[i] == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                reg * (log_p[i] - log_sum_exp((0..n).map(|j| (g[j] - cost[[i, j]]) / reg)))
            };
        }
        for j in 0..n {
            g[j] = if log_q[j] == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                reg * (log_q[j] - log_sum_exp((0..k).map(|i| (f[i] - cost[[i, j]]) / reg)))
            };
        }
        if f.iter().chain(&g).any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::Overflow(format!(
                "log-domain Sinkhorn diverged at reg = {reg}; use a larger reg"
            )));
        }
        let row_violation: f64 = (0..k)
            .map(|i| {
                let mass: f64 = (0..n).map(|j| log_plan(&f, &g, i, j).exp()).sum();
                (mass - problem.p.values()[i]).abs()
            })
            .sum();
        if row_violation < config.tol {
            converged = true;
            break;
        }
    }
    let plan = Array2::from_shape_fn((k, n), |(i, j)| log_plan(&f, &g, i, j).exp());
    let mut sol = finish(problem, plan, SolverKind::Sinkhorn, Some(reg), iterations, converged);
    sol.converged = converged && sol.marginal_violation < config.tol;
    Ok(sol)
}

/// Solver choice for callers that do not care which method runs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum OtSolver {
    Exact,
    Sinkhorn(Option<SinkhornConfig>),
    /// Exact within [`EXACT_CELL_LIMIT`], Sinkhorn with defaults beyond it.
    #[default]
    Auto,
}

impl OtSolver {
    pub fn solve(&self, problem: &OtProblem) -> Result<OtSolution> {
        let cells = problem.cost.len();
        match self {
            OtSolver::Exact => solve_exact(problem),
            OtSolver::Sinkhorn(cfg) => {
                solve_sinkhorn(problem, &cfg.unwrap_or_else(|| SinkhornConfig::default_for(problem)))
            }
            OtSolver::Auto if cells <= EXACT_CELL_LIMIT => solve_exact(problem),
            OtSolver::Auto => solve_sinkhorn(problem, &SinkhornConfig::default_for(problem)),
        }
    }
}

/// Image of each plan row in target space, `Σ_j γ_ij y_j / Σ_j γ_ij`.
/// Rows without mass map to `None`.
pub fn barycentric_map(plan: &TransportPlan, target: &Dataset) -> Result<Vec<Option<Vec<f64>>>> {
    if plan.entries.ncols() != target.len() {
        return Err(Error::DimensionMismatch {
            context: "plan columns vs target points",
            left: plan.entries.ncols(),
            right: target.len(),
        });
    }
    Ok(plan
        .entries
        .outer_iter()
        .map(|row| {
            let mass = row.sum();
            if !(mass > 0.0) {
                return None;
            }
            let mut image = vec![0.0; target.dim()];
            for (j, &g) in row.iter().enumerate() {
                if g != 0.0 {
                    for (acc, y) in image.iter_mut().zip(target.point(j)) {
                        *acc += g * y;
                    }
                }
            }
            image.iter_mut().for_each(|x| *x /= mass);
            Some(image)
        })
        .collect())
}
