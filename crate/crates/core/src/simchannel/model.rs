use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::infotheory::DiscreteDistribution;
use crate::types::PROB_TOLERANCE;

/// Maps each state to its feature sequence `X^n(w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureEncoder {
    /// One fixed codeword per state (`m × n` symbols).
    Codebook(Vec<Vec<usize>>),
    /// Independent per-dimension symbol distributions for each state.
    Stochastic(Vec<Vec<DiscreteDistribution>>),
}

impl FeatureEncoder {
    pub fn codebook(codewords: Vec<Vec<usize>>) -> Result<Self, SimError> {
        check_rect(codewords.iter().map(Vec::len))?;
        Ok(Self::Codebook(codewords))
    }

    pub fn stochastic(dists: Vec<Vec<DiscreteDistribution>>) -> Result<Self, SimError> {
        check_rect(dists.iter().map(Vec::len))?;
        Ok(Self::Stochastic(dists))
    }

    pub fn m(&self) -> usize {
        match self {
            Self::Codebook(c) => c.len(),
            Self::Stochastic(d) => d.len(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Codebook(c) => c[0].len(),
            Self::Stochastic(d) => d[0].len(),
        }
    }

    pub fn codewords(&self) -> Option<&[Vec<usize>]> {
        match self {
            Self::Codebook(c) => Some(c),
            Self::Stochastic(_) => None,
        }
    }

    /// `p(x_i = · | w)` over an input alphabet of `size`.
    pub fn symbol_probs(&self, w: usize, i: usize, size: usize) -> Vec<f64> {
        match self {
            Self::Codebook(c) => {
                let mut p = vec![0.0; size];
                p[c[w][i]] = 1.0;
                p
            }
            Self::Stochastic(d) => {
                let mut p = d[w][i].probabilities().to_vec();
                p.resize(size, 0.0);
                p
            }
        }
    }

    /// Largest symbol the encoder can emit, plus one.
    pub fn alphabet_size(&self) -> usize {
        match self {
            Self::Codebook(c) => c.iter().flatten().max().map_or(0, |s| s + 1),
            Self::Stochastic(d) => d
                .iter()
                .flatten()
                .map(|dist| {
                    dist.probabilities()
                        .iter()
                        .rposition(|&p| p > 0.0)
                        .map_or(0, |s| s + 1)
                })
                .max()
                .unwrap_or(0),
        }
    }

    pub fn draw<R: Rng>(&self, w: usize, rng: &mut R) -> Vec<usize> {
        match self {
            Self::Codebook(c) => c[w].clone(),
            Self::Stochastic(d) => d[w].iter().map(|dist| sample_index(dist.probabilities(), rng)).collect(),
        }
    }
}

fn check_rect(mut lens: impl Iterator<Item = usize>) -> Result<(), SimError> {
    let first = lens.next().ok_or_else(|| SimError::InvalidEncoder("no states".into()))?;
    if first == 0 {
        return Err(SimError::InvalidEncoder("codewords must have n >= 1".into()));
    }
    let mut m = 1;
    for l in lens {
        m += 1;
        if l != first {
            return Err(SimError::InvalidEncoder(format!(
                "state {} has length {l}, expected {first}",
                m - 1
            )));
        }
    }
    if m < 2 {
        return Err(SimError::InvalidEncoder("need at least 2 states".into()));
    }
    Ok(())
}

pub(crate) fn sample_index<R: Rng>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &v) in p.iter().enumerate() {
        acc += v;
        if u < acc {
            return i;
        }
    }
    // Rounding left u above the final partial sum; take the last positive cell.
    p.iter().rposition(|&v| v > 0.0).unwrap_or(0)
}

/// Repeats every base codeword `repeat_factor` times end to end.
pub fn build_repetition_encoder(
    base_codewords: &[Vec<usize>],
    repeat_factor: usize,
) -> Result<FeatureEncoder, SimError> {
    if repeat_factor == 0 {
        return Err(SimError::InvalidEncoder("repeat factor must be >= 1".into()));
    }
    FeatureEncoder::codebook(
        base_codewords
            .iter()
            .map(|c| c.iter().copied().cycle().take(c.len() * repeat_factor).collect())
            .collect(),
    )
}

/// Discrete memoryless channel with per-dimension transition tables `p(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DMCModel {
    input_size: usize,
    output_size: usize,
    /// One table shared by every dimension, or one per dimension.
    tables: Vec<Vec<Vec<f64>>>,
}

impl DMCModel {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self, SimError> {
        Self::per_dimension(vec![table])
    }

    pub fn per_dimension(tables: Vec<Vec<Vec<f64>>>) -> Result<Self, SimError> {
        let first = tables
            .first()
            .ok_or_else(|| SimError::InvalidChannel("no transition tables".into()))?;
        let input_size = first.len();
        let output_size = first.first().map_or(0, Vec::len);
        if input_size == 0 || output_size == 0 {
            return Err(SimError::InvalidChannel("empty transition table".into()));
        }
        // Rows are kept exactly as given so a model rebuilt from `tables()`
        // is bit-for-bit the same model.
        for (d, t) in tables.iter().enumerate() {
            if t.len() != input_size || t.iter().any(|r| r.len() != output_size) {
                return Err(SimError::InvalidChannel(format!(
                    "table {d} is not {input_size}x{output_size}"
                )));
            }
            for (x, row) in t.iter().enumerate() {
                if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(SimError::InvalidChannel(format!("table {d} row {x} has an entry outside [0, 1]")));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > PROB_TOLERANCE {
                    return Err(SimError::InvalidChannel(format!("table {d} row {x} sums to {sum}")));
                }
            }
        }
        Ok(Self {
            input_size,
            output_size,
            tables,
        })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self, SimError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(SimError::InvalidChannel(format!("crossover {p} outside [0, 1]")));
        }
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Noiseless channel over `k` symbols.
    pub fn identity(k: usize) -> Result<Self, SimError> {
        Self::new(
            (0..k)
                .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn is_shared(&self) -> bool {
        self.tables.len() == 1
    }

    pub fn tables(&self) -> &[Vec<Vec<f64>>] {
        &self.tables
    }

    /// Transition table of dimension `i`.
    pub fn table(&self, i: usize) -> &[Vec<f64>] {
        if self.is_shared() {
            &self.tables[0]
        } else {
            &self.tables[i]
        }
    }
}

/// Additive white Gaussian noise on real-valued symbol levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianChannel {
    /// Noise standard deviation, shared or per dimension.
    sigma: Vec<f64>,
    /// Real level transmitted for each input symbol.
    levels: Vec<f64>,
}

impl GaussianChannel {
    pub fn new(sigma: Vec<f64>, levels: Vec<f64>) -> Result<Self, SimError> {
        if sigma.is_empty() || sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(SimError::InvalidChannel("sigma must be finite and positive".into()));
        }
        if levels.is_empty() || levels.iter().any(|l| !l.is_finite()) {
            return Err(SimError::InvalidChannel("levels must be finite".into()));
        }
        Ok(Self { sigma, levels })
    }

    pub fn sigma(&self, i: usize) -> f64 {
        if self.sigma.len() == 1 {
            self.sigma[0]
        } else {
            self.sigma[i]
        }
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigma
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Discrete(DMCModel),
    Gaussian(GaussianChannel),
}

impl ChannelModel {
    pub fn input_size(&self) -> usize {
        match self {
            Self::Discrete(d) => d.input_size(),
            Self::Gaussian(g) => g.levels.len(),
        }
    }

    /// Checks that `encoder` can drive this channel.
    pub fn check_encoder(&self, encoder: &FeatureEncoder) -> Result<(), SimError> {
        if encoder.alphabet_size() > self.input_size() {
            return Err(SimError::AlphabetMismatch(format!(
                "encoder emits symbols up to {} but the channel accepts {}",
                encoder.alphabet_size() - 1,
                self.input_size()
            )));
        }
        let dims = match self {
            Self::Discrete(d) => d.tables.len(),
            Self::Gaussian(g) => g.sigma.len(),
        };
        if dims != 1 && dims != encoder.n() {
            return Err(SimError::AlphabetMismatch(format!(
                "channel has {dims} per-dimension entries but the encoder has n = {}",
                encoder.n()
            )));
        }
        Ok(())
    }

    pub fn transmit<R: Rng>(&self, x: &[usize], rng: &mut R) -> Observation {
        match self {
            Self::Discrete(d) => Observation::Discrete(
                x.iter()
                    .enumerate()
                    .map(|(i, &s)| sample_index(&d.table(i)[s], rng))
                    .collect(),
            ),
            Self::Gaussian(g) => Observation::Continuous(
                x.iter()
                    .enumerate()
                    .map(|(i, &s)| {
                        let z: f64 = StandardNormal.sample(rng);
                        g.levels[s] + g.sigma(i) * z
                    })
                    .collect(),
            ),
        }
    }

    /// `log p(y_i | x_i = s)` for every input symbol `s`, up to a constant
    /// shared by all `s` (natural log).
    pub(crate) fn symbol_loglik(&self, i: usize, y: ObsValue) -> Vec<f64> {
        match (self, y) {
            (Self::Discrete(d), ObsValue::Symbol(v)) => d.table(i).iter().map(|row| row[v].ln()).collect(),
            (Self::Gaussian(g), ObsValue::Real(v)) => {
                let s = g.sigma(i);
                g.levels
                    .iter()
                    .map(|l| -(v - l) * (v - l) / (2.0 * s * s))
                    .collect()
            }
            _ => unreachable!("observation kind matches channel"),
        }
    }

    /// Expected channel output for input symbol `s` in dimension `i`,
    /// treating discrete output symbols as integers.
    pub(crate) fn mean_output(&self, i: usize, s: usize) -> f64 {
        match self {
            Self::Discrete(d) => d.table(i)[s].iter().enumerate().map(|(y, p)| y as f64 * p).sum(),
            Self::Gaussian(g) => g.levels[s],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observation {
    Discrete(Vec<usize>),
    Continuous(Vec<f64>),
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum ObsValue {
    Symbol(usize),
    Real(f64),
}

impl Observation {
    pub fn len(&self) -> usize {
        match self {
            Self::Discrete(v) => v.len(),
            Self::Continuous(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_discrete(&self) -> Option<&[usize]> {
        match self {
            Self::Discrete(v) => Some(v),
            Self::Continuous(_) => None,
        }
    }

    pub(crate) fn value(&self, i: usize) -> ObsValue {
        match self {
            Self::Discrete(v) => ObsValue::Symbol(v[i]),
            Self::Continuous(v) => ObsValue::Real(v[i]),
        }
    }

    pub(crate) fn real(&self, i: usize) -> f64 {
        match self {
            Self::Discrete(v) => v[i] as f64,
            Self::Continuous(v) => v[i],
        }
    }
}
