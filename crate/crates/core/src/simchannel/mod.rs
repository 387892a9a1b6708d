//! Monte Carlo simulator of the sensing channel `W → X^n → Y^n → Ŵ`.
//!
//! A [`FeatureEncoder`] maps the state to a feature sequence, a
//! [`ChannelModel`] corrupts it dimension by dimension, and a [`Decoder`]
//! recovers the state. [`run_monte_carlo`] estimates the conditional and
//! expected error rates; the functions in [`exact`] compute the same
//! quantities exactly on small instances, together with the per-dimension
//! mutual information that feeds the bounds.

mod exact;
mod model;
mod monte_carlo;

pub use exact::{
    cross_mi_exact, exact_channel_mi, exact_error_small, reference_joint, ChannelMI, CrossMIStrategy,
    ExactError, MAX_OUTPUT_SEQUENCES,
};
pub use model::{
    build_repetition_encoder, ChannelModel, DMCModel, FeatureEncoder, GaussianChannel, Observation,
};
pub use monte_carlo::{
    allocate_trials, estimate_chain_mi, replay_trial, run_monte_carlo, ChainMI, MonteCarloResult,
    TrialOutcome,
};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::BoundsError;
use crate::infotheory::InfoError;
use crate::typicality::{typicality_decode, ReferenceJoint, TypicalityError};
use crate::types::{StateSpace, ValidationError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("invalid encoder: {0}")]
    InvalidEncoder(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("state {0} is outside the state space")]
    UnknownState(usize),
    #[error("encoder has {encoder} states but the state space has {space}")]
    StateCountMismatch { encoder: usize, space: usize },
    #[error("{0} output sequences exceed the enumeration limit")]
    InstanceTooLarge(u128),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("need at least one trial")]
    NoTrials,
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Typicality(#[from] TypicalityError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decoder {
    /// Maximum a posteriori over states, ties to the smallest index.
    Ml,
    /// Unique membership in a jointly matching set.
    Typicality { epsilon: f64 },
    /// Euclidean nearest expected channel output.
    NearestCentroid,
}

/// Draws `X^n` for `state` and passes it through the channel.
pub fn sample_episode<R: Rng>(
    state: usize,
    encoder: &FeatureEncoder,
    channel: &ChannelModel,
    rng: &mut R,
) -> Result<(Vec<usize>, Observation), SimError> {
    if state >= encoder.m() {
        return Err(SimError::UnknownState(state));
    }
    channel.check_encoder(encoder)?;
    let x = encoder.draw(state, rng);
    let y = channel.transmit(&x, rng);
    Ok((x, y))
}

fn check_setup(space: &StateSpace, encoder: &FeatureEncoder, channel: &ChannelModel) -> Result<(), SimError> {
    if encoder.m() != space.m() {
        return Err(SimError::StateCountMismatch {
            encoder: encoder.m(),
            space: space.m(),
        });
    }
    channel.check_encoder(encoder)
}

fn check_observation(y: &Observation, n: usize, channel: &ChannelModel) -> Result<(), SimError> {
    if y.len() != n {
        return Err(SimError::AlphabetMismatch(format!(
            "observation has length {}, expected {n}",
            y.len()
        )));
    }
    match (channel, y) {
        (ChannelModel::Discrete(d), Observation::Discrete(v)) => {
            if let Some(s) = v.iter().find(|&&s| s >= d.output_size()) {
                return Err(SimError::AlphabetMismatch(format!("output symbol {s} outside the channel alphabet")));
            }
            Ok(())
        }
        (ChannelModel::Gaussian(_), Observation::Continuous(_)) => Ok(()),
        _ => Err(SimError::AlphabetMismatch("observation kind does not match the channel".into())),
    }
}

/// A decoder with its per-configuration tables precomputed.
pub(crate) struct Prepared<'a> {
    encoder: &'a FeatureEncoder,
    channel: &'a ChannelModel,
    log_prior: Vec<f64>,
    kind: Prepped,
}

enum Prepped {
    Ml,
    Typicality {
        epsilon: f64,
        codebook: Vec<Vec<usize>>,
        refs: Vec<ReferenceJoint>,
    },
    Centroid(Vec<Vec<f64>>),
}

impl<'a> Prepared<'a> {
    pub(crate) fn new(
        space: &StateSpace,
        encoder: &'a FeatureEncoder,
        channel: &'a ChannelModel,
        decoder: Decoder,
    ) -> Result<Self, SimError> {
        check_setup(space, encoder, channel)?;
        let kind = match decoder {
            Decoder::Ml => Prepped::Ml,
            Decoder::Typicality { epsilon } => {
                let codebook = encoder
                    .codewords()
                    .ok_or_else(|| SimError::Unsupported("typicality decoding needs a codebook encoder".into()))?
                    .to_vec();
                let ChannelModel::Discrete(dmc) = channel else {
                    return Err(SimError::Unsupported("typicality decoding needs a discrete channel".into()));
                };
                if !(epsilon > 0.0) {
                    return Err(TypicalityError::NonPositiveEpsilon(epsilon).into());
                }
                let r = reference_joint(encoder, dmc, space)?;
                Prepped::Typicality {
                    epsilon,
                    refs: vec![r; encoder.m()],
                    codebook,
                }
            }
            Decoder::NearestCentroid => {
                let k = channel.input_size();
                Prepped::Centroid(
                    (0..encoder.m())
                        .map(|w| {
                            (0..encoder.n())
                                .map(|i| {
                                    encoder
                                        .symbol_probs(w, i, k)
                                        .iter()
                                        .enumerate()
                                        .filter(|(_, p)| **p > 0.0)
                                        .map(|(s, p)| p * channel.mean_output(i, s))
                                        .sum()
                                })
                                .collect()
                        })
                        .collect(),
                )
            }
        };
        Ok(Self {
            encoder,
            channel,
            log_prior: space.prior().iter().map(|p| p.ln()).collect(),
            kind,
        })
    }

    /// Decoded state, or `None` when the typicality rule declares an error.
    pub(crate) fn decode(&self, y: &Observation) -> Option<usize> {
        match &self.kind {
            Prepped::Ml => Some(self.ml(y)),
            Prepped::Typicality {
                epsilon,
                codebook,
                refs,
            } => {
                let y = y.as_discrete().expect("typicality runs on discrete channels");
                typicality_decode(y, codebook, refs, *epsilon).ok()
            }
            Prepped::Centroid(c) => {
                let n = self.encoder.n();
                let mut best = (0, f64::INFINITY);
                for (w, cw) in c.iter().enumerate() {
                    let d: f64 = (0..n).map(|i| (y.real(i) - cw[i]).powi(2)).sum();
                    if d < best.1 {
                        best = (w, d);
                    }
                }
                Some(best.0)
            }
        }
    }

    fn ml(&self, y: &Observation) -> usize {
        let n = self.encoder.n();
        let k = self.channel.input_size();
        let ll: Vec<Vec<f64>> = (0..n).map(|i| self.channel.symbol_loglik(i, y.value(i))).collect();
        let mut best: Option<(usize, f64)> = None;
        for w in 0..self.encoder.m() {
            if self.log_prior[w] == f64::NEG_INFINITY {
                continue;
            }
            let score = self.log_prior[w] + log_likelihood(self.encoder, w, &ll, k);
            best = match best {
                None => Some((w, score)),
                // Scores equal up to summation-order rounding count as ties.
                Some((_, b)) if score > b && !(b.is_finite() && score - b <= 1e-9 * b.abs().max(1.0)) => {
                    Some((w, score))
                }
                keep => keep,
            };
        }
        best.map_or(0, |(w, _)| w)
    }
}

/// `ln p(y^n | w)` given per-dimension symbol log-likelihoods.
fn log_likelihood(encoder: &FeatureEncoder, w: usize, ll: &[Vec<f64>], k: usize) -> f64 {
    match encoder {
        FeatureEncoder::Codebook(c) => c[w].iter().zip(ll).map(|(&s, l)| l[s]).sum(),
        FeatureEncoder::Stochastic(_) => ll
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let p = encoder.symbol_probs(w, i, k);
                let terms: Vec<f64> = p
                    .iter()
                    .zip(l)
                    .filter(|(p, _)| **p > 0.0)
                    .map(|(p, l)| p.ln() + l)
                    .collect();
                let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if max == f64::NEG_INFINITY {
                    max
                } else {
                    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
                }
            })
            .sum(),
    }
}

/// Maximum a posteriori decoding of one observation.
pub fn ml_decode(
    y: &Observation,
    encoder: &FeatureEncoder,
    channel: &ChannelModel,
    prior: &StateSpace,
) -> Result<usize, SimError> {
    check_observation(y, encoder.n(), channel)?;
    let p = Prepared::new(prior, encoder, channel, Decoder::Ml)?;
    Ok(p.ml(y))
}

/// Nearest-centroid decoding of one observation.
pub fn nearest_centroid_decode(
    y: &Observation,
    encoder: &FeatureEncoder,
    channel: &ChannelModel,
    prior: &StateSpace,
) -> Result<usize, SimError> {
    check_observation(y, encoder.n(), channel)?;
    let p = Prepared::new(prior, encoder, channel, Decoder::NearestCentroid)?;
    Ok(p.decode(y).expect("centroid decoding always returns a state"))
}
