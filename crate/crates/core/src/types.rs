//! Domain types shared across the crate.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for probability vectors summing to one.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Largest dataset accepted by the in-memory containers.
pub const MAX_ROWS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("duplicate state label `{0}`")]
    DuplicateLabel(String),
    #[error("prior sums to {sum}, not 1 (tolerance {PROB_TOLERANCE})")]
    PriorNotNormalized { sum: f64 },
    #[error("prior entry {index} = {value} is outside [0, 1]")]
    PriorOutOfRange { index: usize, value: f64 },
    #[error("a state space needs at least 2 states, got {0}")]
    TooFewStates(usize),
    #[error("{labels} labels but {prior} prior entries")]
    LengthMismatch { labels: usize, prior: usize },
    #[error("x has {x} rows but y has {y}")]
    RowCountMismatch { x: usize, y: usize },
    #[error("dataset is empty")]
    Empty,
    #[error("{rows} rows exceeds the in-memory limit of {MAX_ROWS}")]
    TooManyRows { rows: usize },
    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("rows must have at least one column")]
    ZeroWidth,
    #[error("label `{0}` is not part of the state space")]
    UnknownLabel(String),
}

/// The `m` sensing states together with their prior probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    labels: Vec<String>,
    prior: Vec<f64>,
}

impl StateSpace {
    /// Validates labels and prior. A prior within tolerance of 1 is renormalised.
    pub fn new<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        prior: Vec<f64>,
    ) -> Result<Self, ValidationError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(ValidationError::DuplicateLabel(l.clone()));
            }
        }
        if labels.len() < 2 {
            return Err(ValidationError::TooFewStates(labels.len()));
        }
        if labels.len() != prior.len() {
            return Err(ValidationError::LengthMismatch {
                labels: labels.len(),
                prior: prior.len(),
            });
        }
        let prior = normalize_probabilities(prior)?;
        Ok(Self { labels, prior })
    }

    /// Uniform prior over `m` states labelled `w0..w{m-1}`.
    pub fn uniform(m: usize) -> Result<Self, ValidationError> {
        let labels = (0..m).map(|i| format!("w{i}"));
        Self::new(labels, vec![1.0 / m as f64; m])
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Entropy of the prior, in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.prior
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }
}

/// Checks entries in [0,1] and sum within tolerance, then rescales to sum 1.
pub(crate) fn normalize_probabilities(p: Vec<f64>) -> Result<Vec<f64>, ValidationError> {
    for (index, &value) in p.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(ValidationError::PriorOutOfRange { index, value });
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(ValidationError::PriorNotNormalized { sum });
    }
    Ok(p.into_iter().map(|v| v / sum).collect())
}

/// Dense row-major matrix of finite reals with a fixed column count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ValidationError> {
        if rows.is_empty() {
            return Err(ValidationError::Empty);
        }
        if rows.len() > MAX_ROWS {
            return Err(ValidationError::TooManyRows { rows: rows.len() });
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(ValidationError::ZeroWidth);
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(ValidationError::RaggedRow {
                    row: r,
                    expected: cols,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(ValidationError::NonFinite { row: r, col: c });
                }
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Single-column matrix.
    pub fn from_column(values: &[f64]) -> Result<Self, ValidationError> {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter_rows().map(<[f64]>::to_vec).collect()
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }
}

/// `N` aligned observations of `(x, y)` used for mutual information estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSamples {
    x: Matrix,
    y: Matrix,
}

impl PairedSamples {
    pub fn new(x: Matrix, y: Matrix) -> Result<Self, ValidationError> {
        if x.rows() != y.rows() {
            return Err(ValidationError::RowCountMismatch {
                x: x.rows(),
                y: y.rows(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn from_rows(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<Self, ValidationError> {
        if x.len() != y.len() {
            return Err(ValidationError::RowCountMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        Self::new(Matrix::from_rows(x)?, Matrix::from_rows(y)?)
    }

    /// One-dimensional `x` and `y`.
    pub fn from_columns(x: &[f64], y: &[f64]) -> Result<Self, ValidationError> {
        if x.len() != y.len() {
            return Err(ValidationError::RowCountMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        Self::new(Matrix::from_column(x)?, Matrix::from_column(y)?)
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }

    pub fn dx(&self) -> usize {
        self.x.cols()
    }

    pub fn dy(&self) -> usize {
        self.y.cols()
    }
}

/// Labelled feature rows with labels indexed into an associated [`StateSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    space: StateSpace,
    labels: Vec<usize>,
    features: Matrix,
    feature_names: Vec<String>,
}

impl LabeledDataset {
    /// Labels must belong to `space`.
    pub fn new(
        space: StateSpace,
        labels: &[String],
        features: Matrix,
        feature_names: Vec<String>,
    ) -> Result<Self, ValidationError> {
        if labels.len() != features.rows() {
            return Err(ValidationError::RowCountMismatch {
                x: labels.len(),
                y: features.rows(),
            });
        }
        let idx = labels
            .iter()
            .map(|l| {
                space
                    .index_of(l)
                    .ok_or_else(|| ValidationError::UnknownLabel(l.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            space,
            labels: idx,
            features,
            feature_names,
        })
    }

    /// Builds the state space from the labels themselves: classes sorted by
    /// name, prior equal to the empirical class frequencies.
    pub fn from_labels(
        labels: &[String],
        features: Matrix,
        feature_names: Vec<String>,
    ) -> Result<Self, ValidationError> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for l in labels {
            *counts.entry(l.as_str()).or_default() += 1;
        }
        let n = labels.len() as f64;
        let classes: Vec<String> = counts.keys().map(|s| s.to_string()).collect();
        let prior: Vec<f64> = counts.values().map(|&c| c as f64 / n).collect();
        let space = StateSpace::new(classes, prior)?;
        Self::new(space, labels, features, feature_names)
    }

    /// Direct construction from class indices.
    pub fn from_indices(
        space: StateSpace,
        labels: Vec<usize>,
        features: Matrix,
    ) -> Result<Self, ValidationError> {
        if labels.len() != features.rows() {
            return Err(ValidationError::RowCountMismatch {
                x: labels.len(),
                y: features.rows(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= space.m()) {
            return Err(ValidationError::UnknownLabel(format!("#{bad}")));
        }
        let feature_names = (0..features.cols()).map(|j| format!("f{}", j + 1)).collect();
        Ok(Self {
            space,
            labels,
            features,
            feature_names,
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Same features with labels replaced (e.g. a shuffled control).
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self, ValidationError> {
        Self::from_indices(self.space.clone(), labels, self.features.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorId {
    Plugin,
    Ksg1,
    Ksg2,
    MixedKsg,
}

impl EstimatorId {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorId::Plugin => "plugin",
            EstimatorId::Ksg1 => "ksg1",
            EstimatorId::Ksg2 => "ksg2",
            EstimatorId::MixedKsg => "mixed_ksg",
        }
    }
}

impl std::str::FromStr for EstimatorId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plugin" => Ok(Self::Plugin),
            "ksg1" => Ok(Self::Ksg1),
            "ksg2" => Ok(Self::Ksg2),
            "mixed_ksg" | "mixed" => Ok(Self::MixedKsg),
            other => Err(format!("unknown estimator `{other}`")),
        }
    }
}

/// A mutual information value in bits. `bits` is the raw value clamped at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MIEstimate {
    pub bits: f64,
    pub raw_bits: f64,
    pub estimator: EstimatorId,
    pub k: Option<usize>,
    pub n_samples: usize,
    pub clamped: bool,
}

impl MIEstimate {
    pub fn from_raw(raw_bits: f64, estimator: EstimatorId, k: Option<usize>, n: usize) -> Self {
        Self {
            bits: raw_bits.max(0.0),
            raw_bits,
            estimator,
            k,
            n_samples: n,
            clamped: raw_bits < 0.0,
        }
    }
}

/// Lower and upper bounds on the expected sensing error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lower_relaxed: f64,
    pub lower_tight: f64,
    pub upper_raw: f64,
    /// log2 of the summed cross terms in the upper bound; finite even when
    /// `upper_raw` saturates.
    pub upper_log2_excess: f64,
    pub upper_clamped: f64,
    pub epsilon: f64,
    pub n: usize,
    pub m: usize,
    pub h_w_bits: f64,
    pub dtmi_bits: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_binary_space() {
        let s = StateSpace::new(["a", "b"], vec![0.5, 0.5]).unwrap();
        assert_eq!(s.m(), 2);
        assert!((s.entropy_bits() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn prior_must_sum_to_one() {
        let err = StateSpace::new(["a", "b"], vec![0.6, 0.5]).unwrap_err();
        assert!(matches!(err, ValidationError::PriorNotNormalized { .. }));
    }

    #[test]
    fn door_states() {
        let s = StateSpace::new(["open", "closed"], vec![0.3, 0.7]).unwrap();
        assert_eq!(s.index_of("closed"), Some(1));
        assert_eq!(s.prior(), &[0.3, 0.7]);
    }

    #[test]
    fn duplicate_and_too_few() {
        assert!(matches!(
            StateSpace::new(["a", "a"], vec![0.5, 0.5]),
            Err(ValidationError::DuplicateLabel(_))
        ));
        assert!(matches!(
            StateSpace::new(["a"], vec![1.0]),
            Err(ValidationError::TooFewStates(1))
        ));
    }

    #[test]
    fn prior_within_tolerance_is_renormalized() {
        let s = StateSpace::new(["a", "b"], vec![0.5, 0.5 + 5e-10]).unwrap();
        let sum: f64 = s.prior().iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn paired_samples_reject_mismatch_and_nan() {
        assert!(matches!(
            PairedSamples::from_columns(&[1.0, 2.0], &[1.0]),
            Err(ValidationError::RowCountMismatch { .. })
        ));
        assert!(matches!(
            PairedSamples::from_columns(&[1.0, f64::NAN], &[1.0, 2.0]),
            Err(ValidationError::NonFinite { row: 1, col: 0 })
        ));
        assert!(matches!(
            PairedSamples::from_columns(&[], &[]),
            Err(ValidationError::Empty)
        ));
    }

    #[test]
    fn clamp_flag() {
        let e = MIEstimate::from_raw(-0.01, EstimatorId::Ksg1, Some(3), 10);
        assert_eq!(e.bits, 0.0);
        assert!(e.clamped);
        let e = MIEstimate::from_raw(0.0, EstimatorId::Ksg1, Some(3), 10);
        assert!(!e.clamped);
    }

    #[test]
    fn dataset_from_labels() {
        let labels: Vec<String> = ["b", "a", "b"].iter().map(|s| s.to_string()).collect();
        let f = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let d = LabeledDataset::from_labels(&labels, f, vec!["f1".into()]).unwrap();
        assert_eq!(d.space().labels(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.labels(), &[1, 0, 1]);
    }
}
