//! Synthetic sensing pipelines: MUSIC direction classification, KNN
//! classification with cross-validation, and two threshold detectors.

pub mod aoa;
pub mod classify;
pub mod detect;

pub use aoa::{
    angle_grid, angle_to_class, aoa_sweep, distance_sweep, music_spectrum, simulate_snapshots, snr_sweep,
    steering_vector, AoAScenario, ArrayGeometry, MusicSpectrum, SweepPoint, SweepResult, DEFAULT_GRID_STEP,
};
pub use classify::{
    cross_validate, default_cv_estimator, knn_classify, separable_dataset, shuffle_labels, stratified_folds, CrossValidationReport,
    FoldResult,
};
pub use detect::{
    cov_detect, rfid_tag_sweep, rssi_detect, simulate_rfid, CovDecision, DetectorConfig, RfidModel,
    RssiDecision, TagSweepResult,
};

use thiserror::Error;

use crate::bounds::BoundsError;
use crate::knn_mi::EstimatorError;
use crate::types::ValidationError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("angle {0} rad is out of range")]
    OutOfRange(f64),
    #[error("{snapshots} snapshots cannot estimate a {q}×{q} covariance")]
    RankDeficient { snapshots: usize, q: usize },
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
    #[error("a sweep needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("class `{class}` has {count} members but {folds} folds were requested")]
    ClassTooSmall { class: String, count: usize, folds: usize },
    #[error("subcarrier {0} has zero mean in a window")]
    ZeroMeanSubcarrier(usize),
    #[error("need two windows of length {window} (≥ 2), got {available} samples")]
    WindowTooShort { window: usize, available: usize },
    #[error("no tags")]
    NoTags,
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}
