//! JSON and CSV encodings of results.
//!
//! Plans are stored sparsely as `(row, col, value)` triples where `row` is
//! the source index, together with `rows` (source indices in plan order) and
//! the dense `shape`.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{Criticism, CurvePoint, ExperimentResult, Method};
use crate::mmd::MmdSelection;
use crate::objective::{PrototypeSet, TransportPlan};
use crate::select::{IterationRecord, SelectionTrace};
use crate::transport::{OtSolution, SolverKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsePlan {
    pub shape: [usize; 2],
    pub rows: Vec<usize>,
    pub entries: Vec<PlanEntry>,
}

impl From<&TransportPlan> for SparsePlan {
    fn from(plan: &TransportPlan) -> Self {
        SparsePlan {
            shape: [plan.entries.nrows(), plan.entries.ncols()],
            rows: plan.row_index.clone(),
            entries: plan
                .nonzeros()
                .into_iter()
                .map(|(row, col, value)| PlanEntry { row, col, value })
                .collect(),
        }
    }
}

impl TryFrom<&SparsePlan> for TransportPlan {
    type Error = Error;

    fn try_from(sparse: &SparsePlan) -> Result<Self> {
        let [k, n] = sparse.shape;
        if sparse.rows.len() != k {
            return Err(Error::DimensionMismatch {
                context: "plan rows vs shape",
                left: sparse.rows.len(),
                right: k,
            });
        }
        let mut entries = Array2::zeros((k, n));
        for e in &sparse.entries {
            let r = sparse
                .rows
                .iter()
                .position(|&i| i == e.row)
                .ok_or_else(|| Error::InvalidInput(format!("plan entry row {} not among plan rows", e.row)))?;
            if e.col >= n {
                return Err(Error::IndexOutOfRange { index: e.col, len: n });
            }
            entries[[r, e.col]] = e.value;
        }
        Ok(TransportPlan {
            entries,
            row_index: sparse.rows.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeSetRecord {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub objective: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<SparsePlan>,
}

impl From<&PrototypeSet> for PrototypeSetRecord {
    fn from(set: &PrototypeSet) -> Self {
        PrototypeSetRecord {
            indices: set.indices.clone(),
            weights: set.weights.clone(),
            objective: set.objective,
            plan: set.plan.as_ref().map(SparsePlan::from),
        }
    }
}

impl TryFrom<PrototypeSetRecord> for PrototypeSet {
    type Error = Error;

    fn try_from(rec: PrototypeSetRecord) -> Result<Self> {
        if rec.indices.len() != rec.weights.len() {
            return Err(Error::DimensionMismatch {
                context: "indices vs weights",
                left: rec.indices.len(),
                right: rec.weights.len(),
            });
        }
        Ok(PrototypeSet {
            plan: rec.plan.as_ref().map(TransportPlan::try_from).transpose()?,
            indices: rec.indices,
            weights: rec.weights,
            objective: rec.objective,
        })
    }
}

/// Selection output as written by the CLI. It reads back as a
/// [`PrototypeSetRecord`]; the extra fields are informational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutput {
    pub method: String,
    #[serde(flatten)]
    pub prototypes: PrototypeSetRecord,
    /// Kernel score of MMD selections.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport: Option<TransportSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<IterationRecord>>,
}

impl SelectionOutput {
    pub fn new(method: impl Into<String>, set: &PrototypeSet, trace: Option<&SelectionTrace>) -> Self {
        SelectionOutput {
            method: method.into(),
            prototypes: set.into(),
            score: None,
            transport: None,
            trace: trace.map(|t| t.per_iteration.clone()),
        }
    }
}

/// Solver metadata of a transport solution, without the plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSummary {
    pub objective: f64,
    pub marginal_violation: f64,
    pub solver: SolverKind,
    pub reg: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl From<&OtSolution> for TransportSummary {
    fn from(sol: &OtSolution) -> Self {
        TransportSummary {
            objective: sol.objective,
            marginal_violation: sol.marginal_violation,
            solver: sol.solver,
            reg: sol.reg,
            iterations: sol.iterations,
            converged: sol.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtSolutionRecord {
    pub objective: f64,
    pub marginal_violation: f64,
    pub solver: SolverKind,
    pub reg: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub plan: SparsePlan,
}

impl From<&OtSolution> for OtSolutionRecord {
    fn from(sol: &OtSolution) -> Self {
        OtSolutionRecord {
            objective: sol.objective,
            marginal_violation: sol.marginal_violation,
            solver: sol.solver,
            reg: sol.reg,
            iterations: sol.iterations,
            converged: sol.converged,
            plan: (&sol.plan).into(),
        }
    }
}

impl TryFrom<OtSolutionRecord> for OtSolution {
    type Error = Error;

    fn try_from(rec: OtSolutionRecord) -> Result<Self> {
        Ok(OtSolution {
            plan: (&rec.plan).try_into()?,
            objective: rec.objective,
            marginal_violation: rec.marginal_violation,
            solver: rec.solver,
            reg: rec.reg,
            iterations: rec.iterations,
            converged: rec.converged,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmdSelectionRecord {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub score: f64,
}

impl From<&MmdSelection> for MmdSelectionRecord {
    fn from(sel: &MmdSelection) -> Self {
        MmdSelectionRecord {
            indices: sel.indices.clone(),
            weights: sel.weights.clone(),
            score: sel.score,
        }
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    write_text(&to_json_string(value)?, path)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json_str(&text)
}

pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_text(text: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(text.as_bytes()).map_err(io_err)
}

pub fn load_prototype_set(path: impl AsRef<Path>) -> Result<PrototypeSet> {
    read_json::<PrototypeSetRecord>(path)?.try_into()
}

pub fn save_prototype_set(set: &PrototypeSet, path: impl AsRef<Path>) -> Result<()> {
    write_json(&PrototypeSetRecord::from(set), path)
}

pub fn load_ot_solution(path: impl AsRef<Path>) -> Result<OtSolution> {
    read_json::<OtSolutionRecord>(path)?.try_into()
}

pub fn save_ot_solution(sol: &OtSolution, path: impl AsRef<Path>) -> Result<()> {
    write_json(&OtSolutionRecord::from(sol), path)
}

/// Prototype set as CSV: `index,weight`.
pub fn prototype_set_csv(set: &PrototypeSet) -> String {
    let mut out = String::from("index,weight\n");
    for (i, w) in set.indices.iter().zip(&set.weights) {
        out.push_str(&format!("{i},{w:?}\n"));
    }
    out
}

pub fn criticisms_csv(crit: &[Criticism]) -> String {
    let mut out = String::from("index,witness\n");
    for c in crit {
        out.push_str(&format!("{},{:?}\n", c.index, c.witness));
    }
    out
}

const CURVE_HEADER: [&str; 5] = ["method", "k", "acc_mean", "acc_std", "objective"];

/// Curves as CSV with one row per `(method, k)`. Floats use the shortest
/// representation that round-trips, so identical results give identical bytes.
pub fn experiment_csv(results: &[ExperimentResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidInput(e.to_string());
    w.write_record(CURVE_HEADER).map_err(csv_err)?;
    for r in results {
        for c in &r.curve {
            w.write_record([
                r.method.as_str().to_owned(),
                c.k.to_string(),
                format!("{:?}", c.acc_mean),
                format!("{:?}", c.acc_std),
                format!("{:?}", c.objective),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads curves written by [`experiment_csv`]. `runs` and wall time are not
/// part of the CSV and come back as 0.
pub fn parse_experiment_csv(text: &str) -> Result<Vec<ExperimentResult>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let bad = |msg: String| Error::InvalidInput(format!("experiment csv: {msg}"));
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().ne(CURVE_HEADER) {
        return Err(bad(format!("unexpected header {headers:?}")));
    }
    let mut out: Vec<ExperimentResult> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let method: Method = rec[0].parse()?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("'{}': {e}", &rec[i])));
        let point = CurvePoint {
            k: rec[1].parse().map_err(|e| bad(format!("'{}': {e}", &rec[1])))?,
            acc_mean: num(2)?,
            acc_std: num(3)?,
            objective: num(4)?,
        };
        match out.last_mut() {
            Some(last) if last.method == method => last.curve.push(point),
            _ => out.push(ExperimentResult {
                method,
                runs: 0,
                curve: vec![point],
                wall_time_s: 0.0,
            }),
        }
    }
    Ok(out)
}
