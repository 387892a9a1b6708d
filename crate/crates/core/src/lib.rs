//! Sensing-capability analysis built on discrete task mutual information (DTMI).
//!
//! A discrete sensing system is modelled as a channel `W -> X^n -> Y^n -> Ŵ`:
//! the target state `W` selects a designed feature vector `X^n`, the physical
//! channel and sensing algorithm turn it into an embedding `Y^n`, and a decoder
//! recovers `Ŵ`. The mutual information `I(X^n; Y^n)` controls how well any
//! decoder can do. This crate provides:
//!
//! - [`infotheory`]: exact entropies and mutual information over finite tables,
//!   plus the digamma function.
//! - [`knn_mi`]: k-nearest-neighbour mutual information estimators (KSG1, KSG2
//!   and the mixed discrete-continuous variant).
//! - [`bounds`]: the Fano-type lower bound, the typicality upper bound, the
//!   lossless-sensing rate test and related decision helpers.
//! - [`typicality`]: jointly matching sets and the typicality decoder.
//! - [`simchannel`]: a seeded Monte Carlo simulator of the sensing channel with
//!   exact small-instance oracles.
//! - [`pipelines`]: synthetic case studies (MUSIC direction finding, KNN device
//!   classification, CoV and RSSI threshold detectors).
//! - [`stats`]: Wilson intervals, Pearson correlation and medians.
//! - [`report`]: CSV ingestion, canonical JSON reports, SVG plots and run
//!   configuration files.
//!
//! All information quantities are reported in bits.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod infotheory;
pub mod knn_mi;
pub mod pipelines;
pub mod report;
pub mod rng;
pub mod simchannel;
pub mod stats;
pub mod typicality;
pub mod types;

pub use error::{Error, Result};
pub use rng::{derive_substream, RngSeed};
pub use types::{
    BoundReport, EstimatorId, LabeledDataset, MIEstimate, PairedSamples, StateSpace,
    ValidationError,
};
