//! Evaluation harness: nearest-prototype classification, skewed targets,
//! criticisms and the accuracy/objective curve runner.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{
    compute_ground_cost, to_similarity, uniform_weights, Dataset, MetricKind, SimilarityMatrix, SimplexWeights,
};
use crate::error::{Error, Result};
use crate::mmd::{
    compose_with_ot, gaussian_kernel, mmd_critic_select, protodash_select, KernelMatrix, MmdSelection, SIGMA_GRID,
};
use crate::objective::{objective_of, PrototypeSet};
use crate::select::{random_indices, spot_greedy, spot_simple, SelectionConfig};
use crate::transport::{barycentric_map, OtSolver};

/// 1-NN classifier over a fixed list of labelled prototype points. Ties go
/// to the earliest prototype in the list.
#[derive(Debug, Clone)]
pub struct PrototypeClassifier {
    points: Dataset,
    labels: Vec<String>,
    metric: MetricKind,
}

impl PrototypeClassifier {
    pub fn new(points: Dataset, labels: Vec<String>, metric: MetricKind) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        if labels.len() != points.len() {
            return Err(Error::DimensionMismatch {
                context: "prototype labels vs points",
                left: labels.len(),
                right: points.len(),
            });
        }
        if metric == MetricKind::Precomputed {
            return Err(Error::InvalidInput("classification needs a pointwise metric".into()));
        }
        Ok(Self { points, labels, metric })
    }

    pub fn predict_one(&self, x: ndarray::ArrayView1<'_, f64>) -> &str {
        let mut best = (0, f64::INFINITY);
        for r in 0..self.points.len() {
            let d = self.metric.distance(x, self.points.point(r)).expect("pointwise metric");
            if d < best.1 {
                best = (r, d);
            }
        }
        &self.labels[best.0]
    }

    pub fn classify(&self, test: &Dataset) -> Result<Classification> {
        if test.dim() != self.points.dim() {
            return Err(Error::DimensionMismatch {
                context: "test vs prototype dimension",
                left: test.dim(),
                right: self.points.dim(),
            });
        }
        let truth = test.labels().ok_or(Error::MissingLabels)?;
        let predictions: Vec<String> = (0..test.len())
            .into_par_iter()
            .map(|i| self.predict_one(test.point(i)).to_owned())
            .collect();
        let correct = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
        let accuracy = if test.is_empty() {
            0.0
        } else {
            correct as f64 / test.len() as f64
        };
        Ok(Classification { predictions, accuracy })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub predictions: Vec<String>,
    pub accuracy: f64,
}

/// Labels `test` with the label of its nearest prototype. Equidistant
/// prototypes resolve to the lowest source index.
pub fn nearest_prototype_classify(
    prototypes: &PrototypeSet,
    source: &Dataset,
    test: &Dataset,
    metric: MetricKind,
) -> Result<Classification> {
    let labels = source.labels().ok_or(Error::MissingLabels)?;
    let mut order = prototypes.indices.clone();
    order.sort_unstable();
    let points = source.subset(&order, "prototypes")?;
    let proto_labels = order.iter().map(|&i| labels[i].clone()).collect();
    PrototypeClassifier::new(points, proto_labels, metric)?.classify(test)
}

/// Target construction where `skew_class` makes up `z_percent` of the
/// points and the other classes share the rest equally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewSpec {
    pub skew_class: String,
    pub z_percent: f64,
    pub seed: u64,
}

fn classes_of(pool: &Dataset) -> Result<BTreeMap<&str, Vec<usize>>> {
    let labels = pool.labels().ok_or(Error::MissingLabels)?;
    let mut classes: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        classes.entry(l.as_str()).or_default().push(i);
    }
    Ok(classes)
}

/// Per-class counts `(skew, each other)` of the largest feasible target.
///
/// Non-skew classes get `⌊(100 − z)% · |Y| / (C − 1)⌋` points each and the
/// skew class takes the exact residual.
pub fn skew_counts(
    skew_available: usize,
    other_available: usize,
    classes: usize,
    z_percent: f64,
) -> Result<(usize, usize)> {
    if !(0.0..=100.0).contains(&z_percent) {
        return Err(Error::InvalidInput(format!(
            "skew percent {z_percent} outside [0, 100]"
        )));
    }
    if classes < 2 {
        return Err(Error::InfeasibleProportions("need at least two classes".into()));
    }
    let others = classes - 1;
    let upper = skew_available + others * other_available;
    for total in (1..=upper).rev() {
        let other = ((100.0 - z_percent) * total as f64 / (100.0 * others as f64) + 1e-9).floor() as usize;
        let skew = total - others * other;
        if skew <= skew_available && other <= other_available {
            if z_percent < 100.0 && other == 0 {
                break;
            }
            if z_percent > 0.0 && skew == 0 {
                break;
            }
            return Ok((skew, other));
        }
    }
    Err(Error::InfeasibleProportions(format!(
        "{z_percent}% skew with {skew_available} skew-class and {other_available} other-class points"
    )))
}

/// Samples a skewed target from `pool` without replacement. The output is
/// grouped by class in label order.
pub fn build_skewed_target(pool: &Dataset, spec: &SkewSpec) -> Result<Dataset> {
    let classes = classes_of(pool)?;
    let skew_idx = classes
        .get(spec.skew_class.as_str())
        .ok_or_else(|| Error::UnknownClass(spec.skew_class.clone()))?;
    let other_available = classes
        .iter()
        .filter(|(l, _)| **l != spec.skew_class)
        .map(|(_, v)| v.len())
        .min()
        .unwrap_or(0);
    let (skew, other) = skew_counts(skew_idx.len(), other_available, classes.len(), spec.z_percent)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut picked = Vec::with_capacity(skew + other * (classes.len() - 1));
    for (label, members) in &classes {
        let count = if *label == spec.skew_class { skew } else { other };
        let mut members = members.clone();
        members.shuffle(&mut rng);
        picked.extend_from_slice(&members[..count]);
    }
    pool.subset(
        &picked,
        format!("{}-skew{}-{}", pool.name, spec.z_percent, spec.skew_class),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criticism {
    pub index: usize,
    pub witness: f64,
}

/// Pool points worst explained by the prototypes, by the magnitude of the
/// witness `μ_x − Σ_{i∈P} w_i k(x, p_i)`. Prototype indices refer to the
/// pool, and `kernel` is built over the pool against the target. Returns
/// `count` non-prototype points by descending `|witness|`, ties to the
/// lowest index.
pub fn select_criticisms(
    prototypes: &PrototypeSet,
    pool: &Dataset,
    kernel: &KernelMatrix,
    count: usize,
) -> Result<Vec<Criticism>> {
    if kernel.len() != pool.len() {
        return Err(Error::DimensionMismatch {
            context: "kernel vs pool size",
            left: kernel.len(),
            right: pool.len(),
        });
    }
    let mut is_proto = vec![false; pool.len()];
    for &i in &prototypes.indices {
        if i >= pool.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: pool.len(),
            });
        }
        is_proto[i] = true;
    }
    let available = is_proto.iter().filter(|p| !**p).count();
    if count > available {
        return Err(Error::InvalidInput(format!(
            "{count} criticisms requested but only {available} non-prototype points exist"
        )));
    }
    let mut scored: Vec<Criticism> = (0..pool.len())
        .filter(|&x| !is_proto[x])
        .map(|x| {
            let fit: f64 = prototypes
                .indices
                .iter()
                .zip(&prototypes.weights)
                .map(|(&p, w)| w * kernel.gram[[x, p]])
                .sum();
            Criticism {
                index: x,
                witness: kernel.cross_mean[x] - fit,
            }
        })
        .collect();
    scored.sort_by(|a, b| {
        b.witness
            .abs()
            .partial_cmp(&a.witness.abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.index.cmp(&b.index))
    });
    scored.truncate(count);
    Ok(scored)
}

/// Selection methods compared by [`run_experiment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "spot_greedy")]
    SpotGreedy,
    #[serde(rename = "spot_simple")]
    SpotSimple,
    #[serde(rename = "mmd_critic")]
    MmdCritic,
    #[serde(rename = "protodash")]
    Protodash,
    #[serde(rename = "mmd_critic+ot")]
    MmdCriticOt,
    #[serde(rename = "protodash+ot")]
    ProtodashOt,
    #[serde(rename = "random")]
    Random,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::SpotGreedy,
        Method::SpotSimple,
        Method::MmdCritic,
        Method::Protodash,
        Method::MmdCriticOt,
        Method::ProtodashOt,
        Method::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::SpotGreedy => "spot_greedy",
            Method::SpotSimple => "spot_simple",
            Method::MmdCritic => "mmd_critic",
            Method::Protodash => "protodash",
            Method::MmdCriticOt => "mmd_critic+ot",
            Method::ProtodashOt => "protodash+ot",
            Method::Random => "random",
        }
    }

    fn uses_kernel(self) -> bool {
        matches!(
            self,
            Method::MmdCritic | Method::Protodash | Method::MmdCriticOt | Method::ProtodashOt
        )
    }

    fn with_ot(self) -> bool {
        matches!(self, Method::MmdCriticOt | Method::ProtodashOt)
    }

    pub fn names() -> String {
        Self::ALL.map(Method::as_str).join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method '{s}' (valid: {})", Self::names())))
    }
}

/// How the target set of each run is obtained.
#[derive(Debug, Clone)]
pub enum TargetSpec {
    /// Resample a skewed target from `pool` in every run.
    Skewed {
        pool: Dataset,
        skew_class: String,
        z_percent: f64,
    },
    /// A fixed target, e.g. another domain.
    Fixed(Dataset),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelWidth {
    Fixed(f64),
    /// Pick from [`SIGMA_GRID`] by 1-NN accuracy on a held-out half of the target.
    CrossValidate,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub k_grid: Vec<usize>,
    pub runs: usize,
    pub seed: u64,
    pub metric: MetricKind,
    pub beta: Option<f64>,
    /// Batch size for spot_greedy.
    pub batch: usize,
    pub kernel_width: KernelWidth,
    pub ot_solver: OtSolver,
    /// Map SPOT prototypes into target space through their plans before
    /// classifying. The "+OT" baselines are always mapped.
    pub map_to_target: bool,
}

impl ExperimentConfig {
    pub fn new(methods: Vec<Method>, k_grid: Vec<usize>) -> Self {
        Self {
            methods,
            k_grid,
            runs: 10,
            seed: 0,
            metric: MetricKind::SquaredEuclidean,
            beta: None,
            batch: 1,
            kernel_width: KernelWidth::Fixed(1.0),
            ot_solver: OtSolver::Auto,
            map_to_target: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub acc_mean: f64,
    pub acc_std: f64,
    /// Mean SPOT objective of the selected indices.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub method: Method,
    pub runs: usize,
    pub curve: Vec<CurvePoint>,
    /// Selector time summed over runs and k.
    pub wall_time_s: f64,
}

impl ExperimentResult {
    pub fn per_k_accuracy(&self) -> Vec<(usize, f64, f64)> {
        self.curve.iter().map(|c| (c.k, c.acc_mean, c.acc_std)).collect()
    }

    pub fn per_k_objective(&self) -> Vec<(usize, f64)> {
        self.curve.iter().map(|c| (c.k, c.objective)).collect()
    }
}

struct RunContext<'a> {
    source: &'a Dataset,
    target: Dataset,
    cost: crate::data::GroundCost,
    similarity: SimilarityMatrix,
    q: SimplexWeights,
    config: &'a ExperimentConfig,
    seed: u64,
}

struct Picked {
    indices: Vec<usize>,
    /// Prototype points used by the classifier, with their labels.
    points: Vec<Vec<f64>>,
    labels: Vec<String>,
    seconds: f64,
}

fn mix(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RunContext<'_> {
    fn source_points(&self, indices: &[usize]) -> (Vec<Vec<f64>>, Vec<String>) {
        let labels = self.source.labels().expect("checked before the run");
        indices
            .iter()
            .map(|&i| (self.source.point(i).to_vec(), labels[i].clone()))
            .unzip()
    }

    fn mapped_points(&self, plan: &crate::objective::TransportPlan) -> Result<(Vec<Vec<f64>>, Vec<String>)> {
        let labels = self.source.labels().expect("checked before the run");
        let images = barycentric_map(plan, &self.target)?;
        Ok(plan
            .row_index
            .iter()
            .zip(images)
            .filter_map(|(&i, img)| img.map(|p| (p, labels[i].clone())))
            .unzip())
    }

    fn kernel_select(&self, method: Method, kernel: &KernelMatrix, k: usize) -> Result<MmdSelection> {
        match method {
            Method::MmdCritic | Method::MmdCriticOt => mmd_critic_select(kernel, k),
            _ => protodash_select(kernel, k),
        }
    }

    fn sigma_for(&self, method: Method, k: usize) -> Result<f64> {
        match self.config.kernel_width {
            KernelWidth::Fixed(s) => Ok(s),
            KernelWidth::CrossValidate => {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(self.seed, 0xC0FFEE));
                let mut order: Vec<usize> = (0..self.target.len()).collect();
                order.shuffle(&mut rng);
                let half = order.len() / 2;
                if half == 0 {
                    return Ok(1.0);
                }
                let fit = self.target.subset(&order[..half], "fit")?;
                let val = self.target.subset(&order[half..], "validation")?;
                let mut best = (SIGMA_GRID[0], f64::NEG_INFINITY);
                for sigma in SIGMA_GRID {
                    let kernel = gaussian_kernel(self.source, &fit, sigma)?;
                    let sel = self.kernel_select(method, &kernel, k.min(self.source.len()))?;
                    let (points, labels) = self.source_points(&sel.indices);
                    if points.is_empty() {
                        continue;
                    }
                    let protos = Dataset::from_rows(&points, None, "protos")?;
                    let acc = PrototypeClassifier::new(protos, labels, self.config.metric)?
                        .classify(&val)?
                        .accuracy;
                    if acc > best.1 {
                        best = (sigma, acc);
                    }
                }
                Ok(best.0)
            }
        }
    }

    fn pick(&self, method: Method, k: usize, kernel: Option<&KernelMatrix>) -> Result<Picked> {
        let start = Instant::now();
        let (indices, points, labels) = match method {
            Method::SpotGreedy | Method::SpotSimple => {
                let set = if method == Method::SpotGreedy {
                    let cfg = SelectionConfig::new(k).with_batch(self.config.batch.min(k));
                    spot_greedy(&self.similarity, &self.q, &cfg)?.0
                } else {
                    spot_simple(&self.similarity, &self.q, k)?
                };
                let (points, labels) = match (&set.plan, self.config.map_to_target) {
                    (Some(plan), true) => self.mapped_points(plan)?,
                    _ => self.source_points(&set.indices),
                };
                (set.indices, points, labels)
            }
            Method::Random => {
                let indices = random_indices(self.source.len(), k, mix(self.seed, k as u64))?;
                let (points, labels) = self.source_points(&indices);
                (indices, points, labels)
            }
            _ => {
                let kernel = kernel.expect("kernel built for kernel methods");
                let sel = self.kernel_select(method, kernel, k)?;
                let (points, labels) = if method.with_ot() && sel.weights.iter().any(|w| *w > 0.0) {
                    let sol = compose_with_ot(&sel, &self.cost, &self.q, self.config.ot_solver)?;
                    self.mapped_points(&sol.plan)?
                } else {
                    self.source_points(&sel.indices)
                };
                (sel.indices, points, labels)
            }
        };
        Ok(Picked {
            indices,
            points,
            labels,
            seconds: start.elapsed().as_secs_f64(),
        })
    }
}

struct RunOutcome {
    // [method][k] -> (accuracy, objective)
    scores: Vec<Vec<(f64, f64)>>,
    seconds: Vec<f64>,
}

fn run_once(source: &Dataset, target_spec: &TargetSpec, config: &ExperimentConfig, run: usize) -> Result<RunOutcome> {
    let seed = mix(config.seed, run as u64 + 1);
    let target = match target_spec {
        TargetSpec::Skewed {
            pool,
            skew_class,
            z_percent,
        } => build_skewed_target(
            pool,
            &SkewSpec {
                skew_class: skew_class.clone(),
                z_percent: *z_percent,
                seed,
            },
        )?,
        TargetSpec::Fixed(t) => t.clone(),
    };
    if target.labels().is_none() {
        return Err(Error::MissingLabels);
    }
    let cost = compute_ground_cost(source, &target, config.metric)?;
    let similarity = to_similarity(&cost, config.beta)?;
    let q = uniform_weights(target.len())?;
    let ctx = RunContext {
        source,
        target,
        cost,
        similarity,
        q,
        config,
        seed,
    };
    let max_k = config.k_grid.iter().copied().max().unwrap_or(1);
    let mut scores = Vec::with_capacity(config.methods.len());
    let mut seconds = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let kernel = if method.uses_kernel() {
            Some(gaussian_kernel(source, &ctx.target, ctx.sigma_for(method, max_k)?)?)
        } else {
            None
        };
        let mut per_k = Vec::with_capacity(config.k_grid.len());
        let mut total = 0.0;
        for &k in &config.k_grid {
            let picked = ctx.pick(method, k, kernel.as_ref())?;
            total += picked.seconds;
            let accuracy = if picked.points.is_empty() {
                0.0
            } else {
                let protos = Dataset::from_rows(&picked.points, None, "prototypes")?;
                PrototypeClassifier::new(protos, picked.labels, config.metric)?
                    .classify(&ctx.target)?
                    .accuracy
            };
            let objective = if picked.indices.is_empty() {
                0.0
            } else {
                objective_of(&ctx.similarity, &ctx.q, &picked.indices)?
            };
            per_k.push((accuracy, objective));
        }
        scores.push(per_k);
        seconds.push(total);
    }
    Ok(RunOutcome { scores, seconds })
}

/// Runs every method over `k_grid` for `config.runs` randomized runs and
/// aggregates accuracy mean / sample standard deviation and mean objective
/// per `k`. Runs execute in parallel and are joined by run index, so results
/// depend only on the inputs and `config.seed`.
pub fn run_experiment(
    source: &Dataset,
    target: &TargetSpec,
    config: &ExperimentConfig,
) -> Result<Vec<ExperimentResult>> {
    if source.labels().is_none() {
        return Err(Error::MissingLabels);
    }
    if config.runs == 0 {
        return Err(Error::InvalidConfig("runs must be at least 1".into()));
    }
    if config.methods.is_empty() || config.k_grid.is_empty() {
        return Err(Error::InvalidConfig("need at least one method and one k".into()));
    }
    if let Some(&k) = config.k_grid.iter().find(|&&k| k == 0 || k > source.len()) {
        return Err(Error::InvalidConfig(format!(
            "k = {k} must lie in [1, {}]",
            source.len()
        )));
    }
    let outcomes: Vec<RunOutcome> = (0..config.runs)
        .into_par_iter()
        .map(|run| run_once(source, target, config, run).map_err(|e| Error::InvalidInput(format!("run {run}: {e}"))))
        .collect::<Result<_>>()?;

    let runs = config.runs as f64;
    Ok(config
        .methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let curve = config
                .k_grid
                .iter()
                .enumerate()
                .map(|(ki, &k)| {
                    let accs: Vec<f64> = outcomes.iter().map(|o| o.scores[mi][ki].0).collect();
                    let acc_mean = accs.iter().sum::<f64>() / runs;
                    let acc_std = if accs.len() > 1 {
                        (accs.iter().map(|a| (a - acc_mean).powi(2)).sum::<f64>() / (runs - 1.0)).sqrt()
                    } else {
                        0.0
                    };
                    let objective = outcomes.iter().map(|o| o.scores[mi][ki].1).sum::<f64>() / runs;
                    CurvePoint {
                        k,
                        acc_mean,
                        acc_std,
                        objective,
                    }
                })
                .collect();
            ExperimentResult {
                method,
                runs: config.runs,
                curve,
                wall_time_s: outcomes.iter().map(|o| o.seconds[mi]).sum(),
            }
        })
        .collect())
}
