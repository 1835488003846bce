//! Prototype selection by sparse-support optimal transport.
//!
//! Given a source dataset `X` and a target dataset `Y`, pick a small weighted
//! subset of `X` whose optimal transport plan to `Y` has maximal similarity.
//! The objective is monotone and submodular, so greedy selection carries a
//! deterministic approximation guarantee.
//!
//! ```
//! use ndarray::array;
//! use spot::{spot_greedy, SelectionConfig, SimilarityMatrix, SimplexWeights};
//!
//! let s = SimilarityMatrix::from_entries(array![[3.0, 1.0], [2.0, 4.0]]).unwrap();
//! let q = SimplexWeights::new(vec![0.5, 0.5]).unwrap();
//! let (set, _) = spot_greedy(&s, &q, &SelectionConfig::new(1)).unwrap();
//! assert_eq!(set.indices, vec![1]);
//! assert_eq!(set.objective, 3.0);
//! ```

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod eval;
pub mod io;
pub mod mmd;
pub mod objective;
pub mod select;
pub mod synth;
pub mod transport;

pub use data::{
    compute_ground_cost, load_cost_matrix, load_dataset, to_similarity, uniform_weights, write_dataset, Dataset,
    GroundCost, MetricKind, SimilarityMatrix, SimplexWeights,
};
pub use error::{Error, Result};
pub use eval::{
    build_skewed_target, nearest_prototype_classify, run_experiment, select_criticisms, Classification, Criticism,
    CurvePoint, ExperimentConfig, ExperimentResult, KernelWidth, Method, PrototypeClassifier, SkewSpec, TargetSpec,
};
pub use mmd::{
    compose_with_ot, gaussian_kernel, mmd_critic_select, mmd_gradient, mmd_objective, protodash_select,
    protodash_select_with, refit_weights, KernelMatrix, MmdSelection, RefitConfig, SIGMA_GRID,
};
pub use objective::{
    empty_cache, extend_cache, incremental_gains, objective_of, plan_for_set, submodularity_ratio, weights_from_plan,
    PrototypeSet, ScoreCache, TransportPlan,
};
pub use select::{
    brute_force_optimum, k_medoids, prototype_set_for, random_indices, spot_greedy, spot_simple, IterationRecord,
    SelectionConfig, SelectionTrace, StopRule,
};
pub use synth::gaussian_blobs;
pub use transport::{
    barycentric_map, solve_exact, solve_sinkhorn, OtProblem, OtSolution, OtSolver, SinkhornConfig, SolverKind,
};
