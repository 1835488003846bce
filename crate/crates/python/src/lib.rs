//! Python bindings. Matrices cross the boundary as lists of rows.

use ndarray::Array2;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spot::{Error, SelectionConfig, SimilarityMatrix, SimplexWeights, StopRule};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<Array2<f64>> {
    let n = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(PyValueError::new_err(format!(
            "row {bad} has {} entries, expected {n}",
            rows[bad].len()
        )));
    }
    Array2::from_shape_vec((rows.len(), n), rows.concat()).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

fn similarity(s: &[Vec<f64>]) -> PyResult<SimilarityMatrix> {
    SimilarityMatrix::from_entries(matrix(s)?).map_err(to_py)
}

/// `q` or uniform weights over `n` columns.
fn weights(q: Option<Vec<f64>>, n: usize) -> PyResult<SimplexWeights> {
    match q {
        Some(q) => SimplexWeights::new(q),
        None => spot::uniform_weights(n),
    }
    .map_err(to_py)
}

/// A point set with optional string labels.
#[pyclass(module = "pyspot", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Dataset {
    inner: spot::Dataset,
}

#[pymethods]
impl Dataset {
    #[new]
    #[pyo3(signature = (points, labels=None, name="data"))]
    fn new(points: Vec<Vec<f64>>, labels: Option<Vec<String>>, name: &str) -> PyResult<Self> {
        let inner = spot::Dataset::new(matrix(&points)?, labels, name).map_err(to_py)?;
        Ok(Dataset { inner })
    }

    /// Reads a CSV with a header row.
    #[staticmethod]
    #[pyo3(signature = (path, label_column=None))]
    fn load(path: &str, label_column: Option<&str>) -> PyResult<Self> {
        Ok(Dataset {
            inner: spot::load_dataset(path, label_column).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        spot::write_dataset(&self.inner, path).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(name={:?}, len={}, dim={})",
            self.inner.name,
            self.inner.len(),
            self.inner.dim()
        )
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn points(&self) -> Vec<Vec<f64>> {
        rows(self.inner.points())
    }

    #[getter]
    fn labels(&self) -> Option<Vec<String>> {
        self.inner.labels().map(<[String]>::to_vec)
    }

    fn subset(&self, indices: Vec<usize>) -> PyResult<Self> {
        let name = format!("{}-subset", self.inner.name);
        Ok(Dataset {
            inner: self.inner.subset(&indices, name).map_err(to_py)?,
        })
    }
}

/// Selected prototypes: source indices, simplex weights, objective and the
/// optimal plan (rows follow `indices`).
#[pyclass(module = "pyspot", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PrototypeSet {
    inner: spot::PrototypeSet,
}

#[pymethods]
impl PrototypeSet {
    #[getter]
    fn indices(&self) -> Vec<usize> {
        self.inner.indices.clone()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights.clone()
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn plan(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.plan.as_ref().map(|p| rows(&p.entries))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "PrototypeSet(indices={:?}, objective={})",
            self.inner.indices, self.inner.objective
        )
    }

    fn to_json(&self) -> PyResult<String> {
        spot::io::to_json_string(&spot::io::PrototypeSetRecord::from(&self.inner)).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let rec: spot::io::PrototypeSetRecord = spot::io::from_json_str(text).map_err(to_py)?;
        Ok(PrototypeSet {
            inner: rec.try_into().map_err(to_py)?,
        })
    }
}

fn metric(name: &str) -> PyResult<spot::MetricKind> {
    name.parse().map_err(to_py)
}

/// Pairwise ground cost between two datasets.
#[pyfunction]
#[pyo3(signature = (source, target, metric_name="squared_euclidean"))]
fn ground_cost(source: &Dataset, target: &Dataset, metric_name: &str) -> PyResult<Vec<Vec<f64>>> {
    let c = spot::compute_ground_cost(&source.inner, &target.inner, metric(metric_name)?).map_err(to_py)?;
    Ok(rows(c.entries()))
}

/// `(beta - C, beta)` with beta defaulting to the largest cost plus one.
#[pyfunction]
#[pyo3(signature = (cost, beta=None))]
fn similarity_from_cost(cost: Vec<Vec<f64>>, beta: Option<f64>) -> PyResult<(Vec<Vec<f64>>, f64)> {
    let c = spot::GroundCost::new(matrix(&cost)?, spot::MetricKind::Precomputed).map_err(to_py)?;
    let s = spot::to_similarity(&c, beta).map_err(to_py)?;
    Ok((rows(s.entries()), s.beta().unwrap_or(f64::NAN)))
}

#[pyfunction]
#[pyo3(signature = (similarity_matrix, indices, q=None))]
fn objective(similarity_matrix: Vec<Vec<f64>>, indices: Vec<usize>, q: Option<Vec<f64>>) -> PyResult<f64> {
    let s = similarity(&similarity_matrix)?;
    let q = weights(q, s.ncols())?;
    spot::objective_of(&s, &q, &indices).map_err(to_py)
}

/// Greedy batch selection. Returns the prototype set and the per-iteration
/// trace as a list of dicts.
#[pyfunction]
#[pyo3(signature = (similarity_matrix, k, q=None, s=1, epsilon=None, stop_rule="cardinality"))]
fn spot_greedy<'py>(
    py: Python<'py>,
    similarity_matrix: Vec<Vec<f64>>,
    k: usize,
    q: Option<Vec<f64>>,
    s: usize,
    epsilon: Option<f64>,
    stop_rule: &str,
) -> PyResult<(PrototypeSet, Vec<Bound<'py, PyDict>>)> {
    let sim = similarity(&similarity_matrix)?;
    let q = weights(q, sim.ncols())?;
    let rule: StopRule = stop_rule.parse().map_err(to_py)?;
    let mut cfg = SelectionConfig::new(k).with_batch(s);
    cfg.stop_rule = rule;
    cfg.epsilon = epsilon;
    let (set, trace) = py.detach(|| spot::spot_greedy(&sim, &q, &cfg)).map_err(to_py)?;
    let records = trace
        .per_iteration
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("iteration", r.iteration)?;
            d.set_item("added_indices", r.added_indices.clone())?;
            d.set_item("objective", r.objective)?;
            d.set_item("gain", r.gain)?;
            Ok(d)
        })
        .collect::<PyResult<_>>()?;
    Ok((PrototypeSet { inner: set }, records))
}

#[pyfunction]
#[pyo3(signature = (similarity_matrix, k, q=None))]
fn spot_simple(similarity_matrix: Vec<Vec<f64>>, k: usize, q: Option<Vec<f64>>) -> PyResult<PrototypeSet> {
    let s = similarity(&similarity_matrix)?;
    let q = weights(q, s.ncols())?;
    Ok(PrototypeSet {
        inner: spot::spot_simple(&s, &q, k).map_err(to_py)?,
    })
}

/// Exact optimum by enumeration; only for tiny instances.
#[pyfunction]
#[pyo3(signature = (similarity_matrix, k, q=None))]
fn brute_force_optimum(similarity_matrix: Vec<Vec<f64>>, k: usize, q: Option<Vec<f64>>) -> PyResult<PrototypeSet> {
    let s = similarity(&similarity_matrix)?;
    let q = weights(q, s.ncols())?;
    Ok(PrototypeSet {
        inner: spot::brute_force_optimum(&s, &q, k).map_err(to_py)?,
    })
}

#[pyfunction]
#[pyo3(signature = (similarity_matrix, base, added, q=None))]
fn submodularity_ratio(
    similarity_matrix: Vec<Vec<f64>>,
    base: Vec<usize>,
    added: Vec<usize>,
    q: Option<Vec<f64>>,
) -> PyResult<Option<f64>> {
    let s = similarity(&similarity_matrix)?;
    let q = weights(q, s.ncols())?;
    spot::submodularity_ratio(&s, &q, &base, &added).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (dataset, k, s=1, metric_name="squared_euclidean", beta=None))]
fn k_medoids(dataset: &Dataset, k: usize, s: usize, metric_name: &str, beta: Option<f64>) -> PyResult<PrototypeSet> {
    let c = spot::compute_ground_cost(&dataset.inner, &dataset.inner, metric(metric_name)?).map_err(to_py)?;
    let sim = spot::to_similarity(&c, beta).map_err(to_py)?;
    Ok(PrototypeSet {
        inner: spot::k_medoids(&dataset.inner, &sim, k, s).map_err(to_py)?,
    })
}

fn mmd_result(py: Python<'_>, sel: spot::MmdSelection) -> PyResult<Bound<'_, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("indices", sel.indices)?;
    d.set_item("weights", sel.weights)?;
    d.set_item("score", sel.score)?;
    d.set_item("history", sel.history)?;
    Ok(d)
}

/// MMD-Critic selection with equal weights under a Gaussian kernel.
#[pyfunction]
#[pyo3(signature = (source, target, k, sigma=1.0))]
fn mmd_critic<'py>(
    py: Python<'py>,
    source: &Dataset,
    target: &Dataset,
    k: usize,
    sigma: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let km = spot::gaussian_kernel(&source.inner, &target.inner, sigma).map_err(to_py)?;
    mmd_result(py, spot::mmd_critic_select(&km, k).map_err(to_py)?)
}

/// ProtoDash selection with non-negative refitted weights.
#[pyfunction]
#[pyo3(signature = (source, target, k, sigma=1.0))]
fn protodash<'py>(
    py: Python<'py>,
    source: &Dataset,
    target: &Dataset,
    k: usize,
    sigma: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let km = spot::gaussian_kernel(&source.inner, &target.inner, sigma).map_err(to_py)?;
    mmd_result(py, spot::protodash_select(&km, k).map_err(to_py)?)
}

fn ot_result(py: Python<'_>, sol: spot::OtSolution) -> PyResult<Bound<'_, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("plan", rows(&sol.plan.entries))?;
    d.set_item("objective", sol.objective)?;
    d.set_item("marginal_violation", sol.marginal_violation)?;
    d.set_item("solver", sol.solver.to_string())?;
    d.set_item("reg", sol.reg)?;
    d.set_item("iterations", sol.iterations)?;
    d.set_item("converged", sol.converged)?;
    Ok(d)
}

fn ot_problem(cost: Vec<Vec<f64>>, p: Vec<f64>, q: Vec<f64>) -> PyResult<spot::OtProblem> {
    let p = SimplexWeights::new(p).map_err(to_py)?;
    let q = SimplexWeights::new(q).map_err(to_py)?;
    spot::OtProblem::new(matrix(&cost)?, p, q).map_err(to_py)
}

/// Exact transport by the transportation simplex.
#[pyfunction]
fn solve_exact(py: Python<'_>, cost: Vec<Vec<f64>>, p: Vec<f64>, q: Vec<f64>) -> PyResult<Bound<'_, PyDict>> {
    let problem = ot_problem(cost, p, q)?;
    ot_result(py, spot::solve_exact(&problem).map_err(to_py)?)
}

/// Entropic transport; `reg` defaults to a tenth of the largest cost.
#[pyfunction]
#[pyo3(signature = (cost, p, q, reg=None, max_iters=10_000, tol=1e-6))]
fn solve_sinkhorn(
    py: Python<'_>,
    cost: Vec<Vec<f64>>,
    p: Vec<f64>,
    q: Vec<f64>,
    reg: Option<f64>,
    max_iters: usize,
    tol: f64,
) -> PyResult<Bound<'_, PyDict>> {
    let problem = ot_problem(cost, p, q)?;
    let mut cfg = spot::SinkhornConfig::default_for(&problem);
    if let Some(r) = reg {
        cfg.reg = r;
    }
    cfg.max_iters = max_iters;
    cfg.tol = tol;
    ot_result(py, spot::solve_sinkhorn(&problem, &cfg).map_err(to_py)?)
}

/// Image of each plan row in target space; `None` for rows without mass.
#[pyfunction]
fn barycentric_map(plan: Vec<Vec<f64>>, target: &Dataset) -> PyResult<Vec<Option<Vec<f64>>>> {
    let entries = matrix(&plan)?;
    let plan = spot::TransportPlan {
        row_index: (0..entries.nrows()).collect(),
        entries,
    };
    spot::barycentric_map(&plan, &target.inner).map_err(to_py)
}

/// 1-NN accuracy of `test` against the labelled source prototypes.
#[pyfunction]
#[pyo3(signature = (prototypes, source, test, metric_name="squared_euclidean"))]
fn nearest_prototype_accuracy(
    prototypes: &PrototypeSet,
    source: &Dataset,
    test: &Dataset,
    metric_name: &str,
) -> PyResult<(f64, Vec<String>)> {
    let c = spot::nearest_prototype_classify(&prototypes.inner, &source.inner, &test.inner, metric(metric_name)?)
        .map_err(to_py)?;
    Ok((c.accuracy, c.predictions))
}

/// `(index, witness)` pairs for the `count` pool points with the largest
/// absolute witness.
#[pyfunction]
#[pyo3(signature = (prototypes, pool, target, count, sigma=1.0))]
fn criticisms(
    prototypes: &PrototypeSet,
    pool: &Dataset,
    target: &Dataset,
    count: usize,
    sigma: f64,
) -> PyResult<Vec<(usize, f64)>> {
    let km = spot::gaussian_kernel(&pool.inner, &target.inner, sigma).map_err(to_py)?;
    let crit = spot::select_criticisms(&prototypes.inner, &pool.inner, &km, count).map_err(to_py)?;
    Ok(crit.into_iter().map(|c| (c.index, c.witness)).collect())
}

#[pyfunction]
#[pyo3(signature = (pool, skew_class, z_percent, seed=0))]
fn skewed_target(pool: &Dataset, skew_class: String, z_percent: f64, seed: u64) -> PyResult<Dataset> {
    let spec = spot::SkewSpec {
        skew_class,
        z_percent,
        seed,
    };
    Ok(Dataset {
        inner: spot::build_skewed_target(&pool.inner, &spec).map_err(to_py)?,
    })
}

#[pyfunction]
#[pyo3(signature = (classes, per_class, dim, separation=6.0, sigma=1.0, seed=0))]
fn gaussian_blobs(
    classes: usize,
    per_class: usize,
    dim: usize,
    separation: f64,
    sigma: f64,
    seed: u64,
) -> PyResult<Dataset> {
    Ok(Dataset {
        inner: spot::gaussian_blobs(classes, per_class, dim, separation, sigma, seed).map_err(to_py)?,
    })
}

/// Accuracy/objective curves. With `skew_class` or `skew_percent` the target
/// is a pool resampled per run; otherwise it is used as is. Returns the
/// curves as CSV text.
#[pyfunction]
#[pyo3(signature = (source, target, methods, k_grid, runs=10, seed=0, skew_class=None, skew_percent=None))]
#[allow(clippy::too_many_arguments)]
fn run_experiment(
    py: Python<'_>,
    source: &Dataset,
    target: &Dataset,
    methods: Vec<String>,
    k_grid: Vec<usize>,
    runs: usize,
    seed: u64,
    skew_class: Option<String>,
    skew_percent: Option<f64>,
) -> PyResult<String> {
    let methods = methods
        .iter()
        .map(|m| m.parse::<spot::Method>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    let spec = if skew_class.is_some() || skew_percent.is_some() {
        let mut classes: Vec<String> = target
            .inner
            .labels()
            .ok_or_else(|| to_py(Error::MissingLabels))?
            .to_vec();
        classes.sort();
        classes.dedup();
        spot::TargetSpec::Skewed {
            pool: target.inner.clone(),
            z_percent: skew_percent.unwrap_or(100.0 / classes.len() as f64),
            skew_class: skew_class.unwrap_or_else(|| classes[0].clone()),
        }
    } else {
        spot::TargetSpec::Fixed(target.inner.clone())
    };
    let mut cfg = spot::ExperimentConfig::new(methods, k_grid);
    cfg.runs = runs;
    cfg.seed = seed;
    let results = py
        .detach(|| spot::run_experiment(&source.inner, &spec, &cfg))
        .map_err(to_py)?;
    spot::io::experiment_csv(&results).map_err(to_py)
}

#[pymodule]
fn pyspot(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<PrototypeSet>()?;
    m.add_function(wrap_pyfunction!(ground_cost, m)?)?;
    m.add_function(wrap_pyfunction!(similarity_from_cost, m)?)?;
    m.add_function(wrap_pyfunction!(objective, m)?)?;
    m.add_function(wrap_pyfunction!(spot_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(spot_simple, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(submodularity_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(k_medoids, m)?)?;
    m.add_function(wrap_pyfunction!(mmd_critic, m)?)?;
    m.add_function(wrap_pyfunction!(protodash, m)?)?;
    m.add_function(wrap_pyfunction!(solve_exact, m)?)?;
    m.add_function(wrap_pyfunction!(solve_sinkhorn, m)?)?;
    m.add_function(wrap_pyfunction!(barycentric_map, m)?)?;
    m.add_function(wrap_pyfunction!(nearest_prototype_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(criticisms, m)?)?;
    m.add_function(wrap_pyfunction!(skewed_target, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_blobs, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
