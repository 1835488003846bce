//! Datasets, ground costs, similarity matrices and simplex weights.
//!
//! Every selector consumes a [`SimilarityMatrix`] `S = β − C` built from a
//! [`GroundCost`] between a source and a target [`Dataset`], together with
//! [`SimplexWeights`] over the target points.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ w = 1` for simplex weights.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A set of feature vectors with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Array2<f64>,
    labels: Option<Vec<String>>,
    pub name: String,
}

impl Dataset {
    pub fn new(points: Array2<f64>, labels: Option<Vec<String>>, name: impl Into<String>) -> Result<Self> {
        if points.ncols() == 0 {
            return Err(Error::InvalidInput("feature dimension must be at least 1".into()));
        }
        if let Some((row, _)) = points
            .outer_iter()
            .enumerate()
            .find(|(_, r)| r.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidInput(format!("non-finite feature in row {row}")));
        }
        if let Some(l) = &labels {
            if l.len() != points.nrows() {
                return Err(Error::DimensionMismatch {
                    context: "labels vs points",
                    left: l.len(),
                    right: points.nrows(),
                });
            }
        }
        Ok(Self {
            points: points.as_standard_layout().into_owned(),
            labels,
            name: name.into(),
        })
    }

    /// Builds a dataset from row vectors.
    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<String>>, name: impl Into<String>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                context: "ragged feature rows",
                left: bad.len(),
                right: d,
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points = Array2::from_shape_vec((rows.len(), d), flat).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::new(points, labels, name)
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Returns the rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> Result<Self> {
        for &i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.len(),
                });
            }
        }
        let points = self.points.select(Axis(0), indices);
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i].clone()).collect());
        Self::new(points, labels, name)
    }
}

/// Loads a headered CSV file. All columns except `label_column` must be
/// finite reals.
pub fn load_dataset(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::NoDataRows {
            path: path.to_path_buf(),
        });
    }
    let label_idx = match label_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingLabelColumn(name.to_owned()))?,
        ),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| Some(c) != label_idx).collect();

    let mut flat = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        // header is line 1
        let line = r + 2;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        for &c in &feature_cols {
            let cell = &record[c];
            let v: f64 = cell.parse().map_err(|_| Error::ParseCell {
                path: path.to_path_buf(),
                line,
                column: header[c].clone(),
                value: cell.to_owned(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteCell {
                    path: path.to_path_buf(),
                    line,
                    column: header[c].clone(),
                });
            }
            flat.push(v);
        }
        if let Some(li) = label_idx {
            labels.push(record[li].to_owned());
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::NoDataRows {
            path: path.to_path_buf(),
        });
    }
    let points =
        Array2::from_shape_vec((rows, feature_cols.len()), flat).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::new(points, label_idx.map(|_| labels), name)
}

/// Writes a dataset as headered CSV (`f0..f{d-1}` plus `label` when present).
pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut header: Vec<String> = (0..dataset.dim()).map(|c| format!("f{c}")).collect();
    if dataset.labels().is_some() {
        header.push("label".into());
    }
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..dataset.len() {
        let mut rec: Vec<String> = dataset.point(i).iter().map(|v| format!("{v:?}")).collect();
        if let Some(l) = dataset.labels() {
            rec.push(l[i].clone());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Pairwise dissimilarity used to build a ground cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    #[default]
    SquaredEuclidean,
    Euclidean,
    Manhattan,
    CosineDistance,
    Precomputed,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::SquaredEuclidean,
        MetricKind::Euclidean,
        MetricKind::Manhattan,
        MetricKind::CosineDistance,
        MetricKind::Precomputed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::SquaredEuclidean => "squared_euclidean",
            MetricKind::Euclidean => "euclidean",
            MetricKind::Manhattan => "manhattan",
            MetricKind::CosineDistance => "cosine_distance",
            MetricKind::Precomputed => "precomputed",
        }
    }

    /// Distance between two feature vectors. `Precomputed` has no pointwise
    /// form and returns `None`.
    pub fn distance(self, a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Option<f64> {
        let d = match self {
            MetricKind::SquaredEuclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            MetricKind::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            MetricKind::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            MetricKind::CosineDistance => {
                if a == b {
                    return Some(0.0);
                }
                let na = a.dot(&a).sqrt();
                let nb = b.dot(&b).sqrt();
                if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    (1.0 - a.dot(&b) / (na * nb)).clamp(0.0, 2.0)
                }
            }
            MetricKind::Precomputed => return None,
        };
        Some(d)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown metric '{s}'")))
    }
}

/// Non-negative `m × n` transport cost between source and target points.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundCost {
    entries: Array2<f64>,
    pub metric_kind: MetricKind,
}

impl GroundCost {
    pub fn new(entries: Array2<f64>, metric_kind: MetricKind) -> Result<Self> {
        if let Some(v) = entries.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "cost entries must be finite and non-negative, found {v}"
            )));
        }
        Ok(Self {
            entries: entries.as_standard_layout().into_owned(),
            metric_kind,
        })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// Largest entry, `‖C‖_∞` in the elementwise sense.
    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// The cost restricted to the given source rows.
    pub fn select_rows(&self, rows: &[usize]) -> Result<GroundCost> {
        for &i in rows {
            if i >= self.nrows() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.nrows(),
                });
            }
        }
        Ok(GroundCost {
            entries: self.entries.select(Axis(0), rows),
            metric_kind: self.metric_kind,
        })
    }
}

/// Loads a headerless CSV of `m` rows by `n` columns as a precomputed cost.
pub fn load_cost_matrix(path: impl AsRef<Path>) -> Result<GroundCost> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut flat = Vec::new();
    let mut ncols = None;
    let mut nrows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let line = r + 1;
        let expected = *ncols.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                line,
                expected,
                found: record.len(),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::ParseCell {
                path: path.to_path_buf(),
                line,
                column: c.to_string(),
                value: cell.to_owned(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteCell {
                    path: path.to_path_buf(),
                    line,
                    column: c.to_string(),
                });
            }
            flat.push(v);
        }
        nrows += 1;
    }
    let ncols = match ncols {
        Some(n) if nrows > 0 => n,
        _ => {
            return Err(Error::NoDataRows {
                path: path.to_path_buf(),
            })
        }
    };
    let entries = Array2::from_shape_vec((nrows, ncols), flat).map_err(|e| Error::InvalidInput(e.to_string()))?;
    GroundCost::new(entries, MetricKind::Precomputed)
}

/// Computes `C_ij = metric(x_i, y_j)`. Rows are filled in parallel; each
/// entry is computed independently, so the result does not depend on the
/// thread count.
pub fn compute_ground_cost(source: &Dataset, target: &Dataset, metric_kind: MetricKind) -> Result<GroundCost> {
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            context: "source vs target feature dimension",
            left: source.dim(),
            right: target.dim(),
        });
    }
    if metric_kind == MetricKind::Precomputed {
        return Err(Error::InvalidInput(
            "precomputed costs are loaded from a file, not computed".into(),
        ));
    }
    let (m, n) = (source.len(), target.len());
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let x = source.point(i);
            (0..n)
                .map(|j| metric_kind.distance(x, target.point(j)).unwrap_or(0.0))
                .collect()
        })
        .collect();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let entries = Array2::from_shape_vec((m, n), flat).map_err(|e| Error::InvalidInput(e.to_string()))?;
    GroundCost::new(entries, metric_kind)
}

/// `m × n` similarity consumed by every selector. Entries are non-negative
/// and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    entries: Array2<f64>,
    beta: Option<f64>,
}

impl SimilarityMatrix {
    /// Wraps raw similarities that were not derived from a ground cost.
    pub fn from_entries(entries: Array2<f64>) -> Result<Self> {
        if let Some(v) = entries.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "similarity entries must be finite and non-negative, found {v}"
            )));
        }
        Ok(Self {
            entries: entries.as_standard_layout().into_owned(),
            beta: None,
        })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// The offset used in `S = β − C`, if this matrix came from a cost.
    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    /// Number of source points `m`.
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of target points `n`.
    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ncols();
        &self.entries.as_slice().expect("standard layout")[i * n..(i + 1) * n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[[i, j]]
    }
}

/// `S_ij = β − C_ij`. When `beta` is omitted, `β = max C + 1`.
pub fn to_similarity(cost: &GroundCost, beta: Option<f64>) -> Result<SimilarityMatrix> {
    let max_cost = cost.max_entry();
    let beta = match beta {
        Some(b) if !(b > max_cost) || !b.is_finite() => return Err(Error::BetaTooSmall { beta: b, max_cost }),
        Some(b) => b,
        None => max_cost + 1.0,
    };
    Ok(SimilarityMatrix {
        entries: cost.entries().mapv(|c| beta - c),
        beta: Some(beta),
    })
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexWeights {
    values: Vec<f64>,
}

impl SimplexWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NotOnSimplex("empty weight vector".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::NotOnSimplex(format!("entry {v} is negative or non-finite")));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::NotOnSimplex(format!("entries sum to {total}")));
        }
        Ok(Self { values })
    }

    /// Rescales non-negative masses to sum to one.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::NotOnSimplex(format!("entry {v} is negative or non-finite")));
        }
        let total: f64 = values.iter().sum();
        if total <= 0.0 {
            return Err(Error::NotOnSimplex("all weights are zero".into()));
        }
        Self::new(values.into_iter().map(|v| v / total).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl TryFrom<Vec<f64>> for SimplexWeights {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<SimplexWeights> for Vec<f64> {
    fn from(w: SimplexWeights) -> Self {
        w.values
    }
}

/// `q_j = 1/n` for every target point.
pub fn uniform_weights(n: usize) -> Result<SimplexWeights> {
    if n == 0 {
        return Err(Error::NotOnSimplex("uniform weights need n >= 1".into()));
    }
    SimplexWeights::new(vec![1.0 / n as f64; n])
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use ndarray::array;

    use super::*;

    fn csv_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_labelled_csv() {
        let f = csv_file("f1,f2,label\n1,2,a\n3,4,b\n5,6,a\n");
        let ds = load_dataset(f.path(), Some("label")).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.labels().unwrap(), ["a", "b", "a"]);
        assert_eq!(ds.point(1).to_vec(), vec![3.0, 4.0]);
    }

    #[test]
    fn empty_file_has_no_rows() {
        let f = csv_file("");
        assert!(matches!(load_dataset(f.path(), None), Err(Error::NoDataRows { .. })));
        let f = csv_file("a,b\n");
        assert!(matches!(load_dataset(f.path(), None), Err(Error::NoDataRows { .. })));
    }

    #[test]
    fn text_in_feature_column_names_row_and_column() {
        let f = csv_file("f1,f2\n1,2\n3,oops\n");
        let err = load_dataset(f.path(), None).unwrap_err();
        match &err {
            Error::ParseCell { line, column, .. } => {
                assert_eq!(*line, 3);
                assert_eq!(column, "f2");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            load_dataset("/nonexistent/file.csv", None),
            Err(Error::Io { .. })
        ));
        let f = csv_file("f1,f2\n1,2\n3\n");
        assert!(matches!(
            load_dataset(f.path(), None),
            Err(Error::RaggedRow { line: 3, .. })
        ));
        let f = csv_file("f1,f2\n1,2\n");
        assert!(matches!(
            load_dataset(f.path(), Some("label")),
            Err(Error::MissingLabelColumn(_))
        ));
        let f = csv_file("f1,f2\n1,NaN\n");
        assert!(matches!(load_dataset(f.path(), None), Err(Error::NonFiniteCell { .. })));
        let f = csv_file("f1,f2\n1,inf\n");
        assert!(matches!(load_dataset(f.path(), None), Err(Error::NonFiniteCell { .. })));
    }

    #[test]
    fn precomputed_cost_loads_without_header() {
        let f = csv_file("0,2\n1,0\n");
        let c = load_cost_matrix(f.path()).unwrap();
        assert_eq!(c.entries(), &array![[0.0, 2.0], [1.0, 0.0]]);
        assert_eq!(c.metric_kind, MetricKind::Precomputed);
    }

    #[test]
    fn metric_values() {
        let x = Dataset::from_rows(&[vec![0.0, 0.0]], None, "x").unwrap();
        let y = Dataset::from_rows(&[vec![3.0, 4.0]], None, "y").unwrap();
        let c = compute_ground_cost(&x, &y, MetricKind::SquaredEuclidean).unwrap();
        assert_eq!(c.entries()[[0, 0]], 25.0);
        assert_eq!(
            compute_ground_cost(&x, &y, MetricKind::Euclidean).unwrap().entries()[[0, 0]],
            5.0
        );
        assert_eq!(
            compute_ground_cost(&x, &y, MetricKind::Manhattan).unwrap().entries()[[0, 0]],
            7.0
        );

        // 1 - cos(90°)
        let a = Dataset::from_rows(&[vec![1.0, 0.0]], None, "a").unwrap();
        let b = Dataset::from_rows(&[vec![0.0, 1.0]], None, "b").unwrap();
        let c = compute_ground_cost(&a, &b, MetricKind::CosineDistance).unwrap();
        assert_eq!(c.entries()[[0, 0]], 1.0);
    }

    #[test]
    fn identical_points_have_zero_cost() {
        let x = Dataset::from_rows(&[vec![0.3, -1.7, 2.0], vec![1e3, 0.1, 4.0]], None, "x").unwrap();
        for metric in MetricKind::ALL.into_iter().filter(|m| *m != MetricKind::Precomputed) {
            let c = compute_ground_cost(&x, &x, metric).unwrap();
            for i in 0..x.len() {
                assert_eq!(c.entries()[[i, i]], 0.0, "{metric}");
            }
            assert_eq!(c.entries(), &c.entries().t().to_owned(), "{metric}");
        }
    }

    #[test]
    fn cost_dimension_mismatch() {
        let x = Dataset::from_rows(&[vec![0.0, 0.0]], None, "x").unwrap();
        let y = Dataset::from_rows(&[vec![0.0]], None, "y").unwrap();
        assert!(matches!(
            compute_ground_cost(&x, &y, MetricKind::Euclidean),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn similarity_conversion() {
        let cost = GroundCost::new(array![[0.0, 2.0], [1.0, 0.0]], MetricKind::Precomputed).unwrap();
        let s = to_similarity(&cost, Some(3.0)).unwrap();
        assert_eq!(s.entries(), &array![[3.0, 1.0], [2.0, 3.0]]);
        let s = to_similarity(&cost, None).unwrap();
        assert_eq!(s.beta(), Some(3.0));
        assert_eq!(s.entries(), &array![[3.0, 1.0], [2.0, 3.0]]);

        let cost = GroundCost::new(array![[5.0, 0.0]], MetricKind::Precomputed).unwrap();
        assert!(matches!(
            to_similarity(&cost, Some(5.0)),
            Err(Error::BetaTooSmall { .. })
        ));
    }

    #[test]
    fn uniform_weight_cases() {
        assert_eq!(uniform_weights(4).unwrap().values(), &[0.25; 4]);
        assert_eq!(uniform_weights(1).unwrap().values(), &[1.0]);
        assert!(uniform_weights(0).is_err());
    }

    #[test]
    fn simplex_weights_reject_bad_vectors() {
        assert!(SimplexWeights::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexWeights::new(vec![1.5, -0.5]).is_err());
        assert!(SimplexWeights::normalized(vec![0.0, 0.0]).is_err());
        assert_eq!(
            SimplexWeights::normalized(vec![1.0, 3.0]).unwrap().values(),
            &[0.25, 0.75]
        );
    }

    #[test]
    fn dataset_invariants() {
        assert!(Dataset::from_rows(&[vec![1.0], vec![1.0, 2.0]], None, "r").is_err());
        assert!(Dataset::from_rows(&[vec![1.0]], Some(vec![]), "r").is_err());
        assert!(Dataset::from_rows(&[vec![f64::NAN]], None, "r").is_err());
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        proptest! {
            #[test]
            fn similarity_is_positive_and_reverses_order(
                vals in proptest::collection::vec(0.0f64..100.0, 12)
            ) {
                let cost = GroundCost::new(Array2::from_shape_vec((3, 4), vals).unwrap(), MetricKind::Precomputed).unwrap();
                let s = to_similarity(&cost, None).unwrap();
                prop_assert!(s.entries().iter().all(|&v| v > 0.0));
                for j in 0..4 {
                    for a in 0..3 {
                        for b in 0..3 {
                            if cost.entries()[[a, j]] <= cost.entries()[[b, j]] {
                                prop_assert!(s.get(a, j) >= s.get(b, j));
                            }
                        }
                    }
                }
            }
        }
    }
}
