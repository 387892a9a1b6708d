//! Crate-level error type.

use thiserror::Error;

use crate::bounds::BoundsError;
use crate::infotheory::InfoError;
use crate::knn_mi::EstimatorError;
use crate::pipelines::PipelineError;
use crate::report::ReportError;
use crate::simchannel::SimError;
use crate::stats::StatsError;
use crate::typicality::TypicalityError;
use crate::types::ValidationError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Typicality(#[from] TypicalityError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl Error {
    /// Process exit code: 3 for numerically infeasible inputs, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        let infeasible = |b: &BoundsError| matches!(b, BoundsError::Infeasible { .. });
        let hit = match self {
            Error::Bounds(b) => infeasible(b),
            Error::Sim(SimError::Bounds(b)) => infeasible(b),
            Error::Pipeline(PipelineError::Bounds(b)) => infeasible(b),
            _ => false,
        };
        if hit {
            3
        } else {
            2
        }
    }
}
