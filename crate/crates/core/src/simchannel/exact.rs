use serde::{Deserialize, Serialize};

use super::model::{ChannelModel, DMCModel, FeatureEncoder, Observation};
use super::{Decoder, Prepared, SimError};
use crate::bounds::CrossMIMatrix;
use crate::infotheory::{plugin_mi, JointTable};
use crate::typicality::ReferenceJoint;
use crate::types::StateSpace;

/// Largest number of output sequences enumerated by the exact oracles.
pub const MAX_OUTPUT_SEQUENCES: u128 = 1 << 20;

fn discrete(channel: &ChannelModel) -> Result<&DMCModel, SimError> {
    match channel {
        ChannelModel::Discrete(d) => Ok(d),
        ChannelModel::Gaussian(_) => Err(SimError::Unsupported(
            "exact computation needs a finite output alphabet".into(),
        )),
    }
}

/// Input distribution of dimension `i` averaged over the prior.
fn mixed_input(encoder: &FeatureEncoder, prior: &[f64], i: usize, k: usize) -> Vec<f64> {
    let mut px = vec![0.0; k];
    for (w, &pw) in prior.iter().enumerate() {
        for (s, p) in encoder.symbol_probs(w, i, k).into_iter().enumerate() {
            px[s] += pw * p;
        }
    }
    px
}

/// Per-dimension joints `p(x_i, y_i) = Σ_w p(w) p(x_i|w) p(y_i|x_i)`.
pub fn reference_joint(
    encoder: &FeatureEncoder,
    channel: &DMCModel,
    prior: &StateSpace,
) -> Result<ReferenceJoint, SimError> {
    let k = channel.input_size();
    let tables = (0..encoder.n())
        .map(|i| JointTable::from_channel(&mixed_input(encoder, prior.prior(), i, k), channel.table(i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReferenceJoint::new(tables)?)
}

/// Exact mutual information carried by the channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMI {
    /// `I(X_i; Y_i)` under the prior-averaged joint of each dimension.
    pub per_dimension: Vec<f64>,
    /// `Σ_i I(X_i; Y_i)`.
    pub total: f64,
    /// `I(W; Y^n)` by enumeration, when the output space is small enough.
    pub w_y: Option<f64>,
}

/// Per-dimension plug-in mutual information from the induced joints.
pub fn exact_channel_mi(
    encoder: &FeatureEncoder,
    channel: &ChannelModel,
    prior: &StateSpace,
) -> Result<ChannelMI, SimError> {
    let dmc = discrete(channel)?;
    channel.check_encoder(encoder)?;
    let r = reference_joint(encoder, dmc, prior)?;
    let per_dimension: Vec<f64> = (0..r.n()).map(|i| plugin_mi(r.table(i)).bits).collect();
    // Sequential left-to-right sum: appending a dimension adds a term ≥ 0.
    let total = per_dimension.iter().fold(0.0, |a, b| a + b);
    let w_y = match output_space(dmc, encoder.n()) {
        Ok(_) => Some(w_y_mi(encoder, dmc, prior)),
        Err(_) => None,
    };
    Ok(ChannelMI {
        per_dimension,
        total,
        w_y,
    })
}

fn output_space(dmc: &DMCModel, n: usize) -> Result<u128, SimError> {
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(dmc.output_size() as u128);
        if total > MAX_OUTPUT_SEQUENCES {
            return Err(SimError::InstanceTooLarge(total));
        }
    }
    Ok(total)
}

/// `q[w][i][y] = p(y_i = y | w)`.
fn per_state_outputs(encoder: &FeatureEncoder, dmc: &DMCModel) -> Vec<Vec<Vec<f64>>> {
    let k = dmc.input_size();
    (0..encoder.m())
        .map(|w| {
            (0..encoder.n())
                .map(|i| {
                    let px = encoder.symbol_probs(w, i, k);
                    let t = dmc.table(i);
                    (0..dmc.output_size())
                        .map(|y| px.iter().zip(t).map(|(p, row)| p * row[y]).sum())
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Calls `f(y^n)` for every output sequence in lexicographic order.
fn for_each_output(n: usize, size: usize, mut f: impl FnMut(&[usize])) {
    let mut y = vec![0usize; n];
    loop {
        f(&y);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            y[i] += 1;
            if y[i] < size {
                break;
            }
            y[i] = 0;
        }
    }
}

fn w_y_mi(encoder: &FeatureEncoder, dmc: &DMCModel, prior: &StateSpace) -> f64 {
    let q = per_state_outputs(encoder, dmc);
    let m = encoder.m();
    let mut h_y = 0.0;
    let mut h_y_given_w = vec![0.0; m];
    let mut pw_y = vec![0.0; m];
    for_each_output(encoder.n(), dmc.output_size(), |y| {
        let mut py = 0.0;
        for w in 0..m {
            pw_y[w] = y.iter().enumerate().map(|(i, &s)| q[w][i][s]).product();
            py += prior.prior()[w] * pw_y[w];
            if pw_y[w] > 0.0 {
                h_y_given_w[w] -= pw_y[w] * pw_y[w].log2();
            }
        }
        if py > 0.0 {
            h_y -= py * py.log2();
        }
    });
    let cond: f64 = prior.prior().iter().zip(&h_y_given_w).map(|(p, h)| p * h).sum();
    (h_y - cond).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactError {
    pub p_e: f64,
    pub xi: Vec<f64>,
}

/// Exact conditional and expected error by enumerating every output sequence.
/// Typicality decode failures count as errors.
pub fn exact_error_small(
    space: &StateSpace,
    encoder: &FeatureEncoder,
    channel: &ChannelModel,
    decoder: Decoder,
) -> Result<ExactError, SimError> {
    let dmc = discrete(channel)?;
    output_space(dmc, encoder.n())?;
    let prepared = Prepared::new(space, encoder, channel, decoder)?;
    let q = per_state_outputs(encoder, dmc);
    let m = encoder.m();
    let mut xi = vec![0.0; m];
    for_each_output(encoder.n(), dmc.output_size(), |y| {
        let decoded = prepared.decode(&Observation::Discrete(y.to_vec()));
        for w in 0..m {
            if decoded != Some(w) {
                xi[w] += y.iter().enumerate().map(|(i, &s)| q[w][i][s]).product::<f64>();
            }
        }
    });
    for v in xi.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let p_e = space.prior().iter().zip(&xi).map(|(p, x)| p * x).sum();
    Ok(ExactError { p_e, xi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CrossMIStrategy {
    /// Every entry is `Σ_i I(X_i; Y_i)` under the prior-averaged joint, the
    /// same reference the typicality decoder tests candidates against.
    #[default]
    ReferenceJoint,
}

/// Cross mutual information matrix for the upper bound.
pub fn cross_mi_exact(
    encoder: &FeatureEncoder,
    channel: &ChannelModel,
    prior: &StateSpace,
    strategy: CrossMIStrategy,
) -> Result<CrossMIMatrix, SimError> {
    match strategy {
        CrossMIStrategy::ReferenceJoint => {
            let total = exact_channel_mi(encoder, channel, prior)?.total;
            Ok(CrossMIMatrix::constant(encoder.m(), total)?)
        }
    }
}
