//! Run configuration files.
//!
//! A config is a JSON object with the optional sections `state_space`,
//! `encoder`, `channel`, `decoder`, `sweep` and `detector`:
//!
//! ```json
//! {
//!   "state_space": { "m": 2 },
//!   "encoder": { "kind": "repetition", "base": [[0], [1]], "factor": 20 },
//!   "channel": { "kind": "bsc", "p": 0.1 },
//!   "decoder": { "kind": "typicality", "epsilon": 0.1 }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::infotheory::DiscreteDistribution;
use crate::pipelines::{distance_sweep, snr_sweep, AoAScenario, DetectorConfig, SweepPoint};
use crate::simchannel::{
    build_repetition_encoder, ChannelModel, DMCModel, Decoder, FeatureEncoder, GaussianChannel, SimError,
};
use crate::types::StateSpace;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpaceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
}

impl StateSpaceConfig {
    /// Labels default to `s0, s1, …`; the prior defaults to uniform.
    pub fn build(&self) -> Result<StateSpace, ReportError> {
        let m = self
            .prior
            .as_ref()
            .map(Vec::len)
            .or(self.labels.as_ref().map(Vec::len))
            .or(self.m)
            .ok_or_else(|| ReportError::Config("state_space needs m, labels or prior".into()))?;
        if let Some(declared) = self.m {
            if declared != m {
                return Err(ReportError::Config(format!("state_space.m = {declared} but {m} entries given")));
            }
        }
        let labels = self.labels.clone().unwrap_or_else(|| (0..m).map(|i| format!("s{i}")).collect());
        let prior = self.prior.clone().unwrap_or_else(|| vec![1.0 / m as f64; m]);
        Ok(StateSpace::new(labels, prior)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EncoderConfig {
    Repetition { base: Vec<Vec<usize>>, factor: usize },
    Codebook { codewords: Vec<Vec<usize>> },
    /// `probs[w][i]` is the symbol distribution of dimension `i` in state `w`.
    Stochastic { probs: Vec<Vec<Vec<f64>>> },
}

impl EncoderConfig {
    pub fn build(&self) -> Result<FeatureEncoder, SimError> {
        match self {
            Self::Repetition { base, factor } => build_repetition_encoder(base, *factor),
            Self::Codebook { codewords } => FeatureEncoder::codebook(codewords.clone()),
            Self::Stochastic { probs } => FeatureEncoder::stochastic(
                probs
                    .iter()
                    .map(|dims| dims.iter().map(|p| DiscreteDistribution::new(p.clone())).collect())
                    .collect::<Result<Vec<Vec<_>>, _>>()?,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelConfig {
    Bsc { p: f64 },
    Identity { k: usize },
    /// One transition table shared by every dimension.
    Dmc { table: Vec<Vec<f64>> },
    PerDimension { tables: Vec<Vec<Vec<f64>>> },
    Gaussian { sigma: Vec<f64>, levels: Vec<f64> },
}

impl ChannelConfig {
    pub fn build(&self) -> Result<ChannelModel, SimError> {
        Ok(match self {
            Self::Bsc { p } => ChannelModel::Discrete(DMCModel::bsc(*p)?),
            Self::Identity { k } => ChannelModel::Discrete(DMCModel::identity(*k)?),
            Self::Dmc { table } => ChannelModel::Discrete(DMCModel::new(table.clone())?),
            Self::PerDimension { tables } => ChannelModel::Discrete(DMCModel::per_dimension(tables.clone())?),
            Self::Gaussian { sigma, levels } => {
                ChannelModel::Gaussian(GaussianChannel::new(sigma.clone(), levels.clone())?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrDb,
    DistanceM,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// Everything not swept; missing fields take the scenario defaults.
    #[serde(default)]
    pub scenario: AoAScenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials_per_point: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step_deg: Option<f64>,
}

impl SweepConfig {
    pub fn points(&self) -> Vec<SweepPoint> {
        match self.axis {
            SweepAxis::SnrDb => snr_sweep(&self.scenario, &self.values),
            SweepAxis::DistanceM => distance_sweep(&self.scenario, &self.values),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_space: Option<StateSpaceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoder: Option<EncoderConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoder: Option<Decoder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        serde_json::from_str(text).map_err(|e| ReportError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text = std::fs::read_to_string(path).map_err(|e| ReportError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            ReportError::Config(msg) => ReportError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn section<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T, ReportError> {
        v.as_ref().ok_or_else(|| ReportError::Config(format!("missing `{name}` section")))
    }

    /// The state space, defaulting to a uniform prior over the encoder's states.
    pub fn space(&self) -> Result<StateSpace, ReportError> {
        match &self.state_space {
            Some(s) => s.build(),
            None => {
                let m = self.encoder()?.m();
                Ok(StateSpace::uniform(m)?)
            }
        }
    }

    pub fn encoder(&self) -> Result<FeatureEncoder, ReportError> {
        Self::section(&self.encoder, "encoder")?
            .build()
            .map_err(|e| ReportError::Config(format!("encoder: {e}")))
    }

    pub fn channel(&self) -> Result<ChannelModel, ReportError> {
        Self::section(&self.channel, "channel")?
            .build()
            .map_err(|e| ReportError::Config(format!("channel: {e}")))
    }

    pub fn decoder(&self) -> Decoder {
        self.decoder.unwrap_or(Decoder::Ml)
    }

    pub fn sweep(&self) -> Result<&SweepConfig, ReportError> {
        Self::section(&self.sweep, "sweep")
    }
}
