use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{ChannelModel, FeatureEncoder, Observation};
use super::{Decoder, Prepared, SimError};
use crate::rng::RngSeed;
use crate::stats::{wilson_rate, Interval};
use crate::types::StateSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    /// `Σ_i p(w_i) ξ_i`.
    pub p_e: f64,
    /// Conditional error rate of each state.
    pub xi: Vec<f64>,
    pub ci_95: Interval,
    pub trials: usize,
    pub trials_per_state: Vec<usize>,
    pub errors_per_state: Vec<usize>,
    pub seed: RngSeed,
}

/// Splits `trials` across states in proportion to the prior with
/// largest-remainder rounding, then raises any empty state to one trial.
pub fn allocate_trials(prior: &[f64], trials: usize) -> Vec<usize> {
    let exact: Vec<f64> = prior.iter().map(|p| p * trials as f64).collect();
    let mut alloc: Vec<usize> = exact.iter().map(|v| v.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..prior.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(trials.saturating_sub(assigned)) {
        alloc[i] += 1;
    }
    for a in alloc.iter_mut() {
        *a = (*a).max(1);
    }
    alloc
}

/// One simulated episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub state: usize,
    pub x: Vec<usize>,
    pub y: Observation,
    /// `None` when the typicality decoder finds no unique match.
    pub decoded: Option<usize>,
}

impl TrialOutcome {
    pub fn is_error(&self) -> bool {
        self.decoded != Some(self.state)
    }
}

struct Plan {
    alloc: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl Plan {
    fn new(space: &StateSpace, trials: usize) -> Result<Self, SimError> {
        if trials == 0 {
            return Err(SimError::NoTrials);
        }
        let alloc = allocate_trials(space.prior(), trials);
        let mut offsets = Vec::with_capacity(alloc.len());
        let mut acc = 0;
        for a in &alloc {
            offsets.push(acc);
            acc += a;
        }
        Ok(Self {
            alloc,
            offsets,
            total: acc,
        })
    }

    fn state_of(&self, t: usize) -> usize {
        self.offsets.partition_point(|&o| o <= t) - 1
    }
}

fn trial(prepared: &Prepared, plan: &Plan, seed: RngSeed, t: usize) -> TrialOutcome {
    let state = plan.state_of(t);
    let mut rng = seed.substream(t as u64).rng();
    let x = prepared.encoder.draw(state, &mut rng);
    let y = prepared.channel.transmit(&x, &mut rng);
    let decoded = prepared.decode(&y);
    TrialOutcome { state, x, y, decoded }
}

fn outcomes(prepared: &Prepared, plan: &Plan, seed: RngSeed) -> Vec<TrialOutcome> {
    (0..plan.total)
        .into_par_iter()
        .map(|t| trial(prepared, plan, seed, t))
        .collect()
}

/// Stratified Monte Carlo estimate of the conditional and expected error.
///
/// Trials are laid out state by state; trial `t` uses substream `t` of `seed`.
pub fn run_monte_carlo(
    space: &StateSpace,
    encoder: &FeatureEncoder,
    channel: &ChannelModel,
    decoder: Decoder,
    trials: usize,
    seed: RngSeed,
) -> Result<MonteCarloResult, SimError> {
    let prepared = Prepared::new(space, encoder, channel, decoder)?;
    let plan = Plan::new(space, trials)?;
    let flags: Vec<bool> = (0..plan.total)
        .into_par_iter()
        .map(|t| trial(&prepared, &plan, seed, t).is_error())
        .collect();
    let mut errors = vec![0usize; space.m()];
    for (t, e) in flags.iter().enumerate() {
        if *e {
            errors[plan.state_of(t)] += 1;
        }
    }
    let xi: Vec<f64> = errors
        .iter()
        .zip(&plan.alloc)
        .map(|(&e, &n)| e as f64 / n as f64)
        .collect();
    let p_e = space.prior().iter().zip(&xi).map(|(p, x)| p * x).sum();
    Ok(MonteCarloResult {
        p_e,
        ci_95: wilson_rate(p_e, plan.total as f64),
        xi,
        trials: plan.total,
        trials_per_state: plan.alloc,
        errors_per_state: errors,
        seed,
    })
}

/// Re-runs trial `index` of a [`run_monte_carlo`] call in isolation.
pub fn replay_trial(
    space: &StateSpace,
    encoder: &FeatureEncoder,
    channel: &ChannelModel,
    decoder: Decoder,
    trials: usize,
    seed: RngSeed,
    index: usize,
) -> Result<TrialOutcome, SimError> {
    let prepared = Prepared::new(space, encoder, channel, decoder)?;
    let plan = Plan::new(space, trials)?;
    if index >= plan.total {
        return Err(SimError::Unsupported(format!(
            "trial {index} outside a run of {} trials",
            plan.total
        )));
    }
    Ok(trial(&prepared, &plan, seed, index))
}

/// Plug-in mutual information along the chain `W → X^n → Y^n → Ŵ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMI {
    pub w_what: f64,
    pub w_y: f64,
    pub x_y: f64,
    pub trials: usize,
}

/// Plug-in MI of paired symbols; `BTreeMap` keeps the summation order fixed.
fn sparse_plugin_mi(pairs: &[(usize, usize)]) -> f64 {
    let n = pairs.len() as f64;
    let mut joint: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut a: BTreeMap<usize, u64> = BTreeMap::new();
    let mut b: BTreeMap<usize, u64> = BTreeMap::new();
    for &(x, y) in pairs {
        *joint.entry((x, y)).or_default() += 1;
        *a.entry(x).or_default() += 1;
        *b.entry(y).or_default() += 1;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| {
            let c = c as f64;
            c / n * (c * n / (a[&x] as f64 * b[&y] as f64)).log2()
        })
        .sum();
    mi.max(0.0)
}

fn intern<K: Ord + Clone>(table: &mut BTreeMap<K, usize>, key: &K) -> usize {
    let next = table.len();
    *table.entry(key.clone()).or_insert(next)
}

/// Estimates `I(W; Ŵ)`, `I(W; Y^n)` and `I(X^n; Y^n)` from simulated episodes,
/// treating whole sequences as symbols. Decode failures form their own symbol.
pub fn estimate_chain_mi(
    space: &StateSpace,
    encoder: &FeatureEncoder,
    channel: &ChannelModel,
    decoder: Decoder,
    trials: usize,
    seed: RngSeed,
) -> Result<ChainMI, SimError> {
    if !matches!(channel, ChannelModel::Discrete(_)) {
        return Err(SimError::Unsupported(
            "plug-in chain estimates need a finite output alphabet".into(),
        ));
    }
    let prepared = Prepared::new(space, encoder, channel, decoder)?;
    let plan = Plan::new(space, trials)?;
    let runs = outcomes(&prepared, &plan, seed);
    let m = space.m();
    let mut xs = BTreeMap::new();
    let mut ys = BTreeMap::new();
    let mut w_what = Vec::with_capacity(runs.len());
    let mut w_y = Vec::with_capacity(runs.len());
    let mut x_y = Vec::with_capacity(runs.len());
    for r in &runs {
        let y = r.y.as_discrete().expect("discrete channel").to_vec();
        let yi = intern(&mut ys, &y);
        let xi = intern(&mut xs, &r.x);
        w_what.push((r.state, r.decoded.unwrap_or(m)));
        w_y.push((r.state, yi));
        x_y.push((xi, yi));
    }
    Ok(ChainMI {
        w_what: sparse_plugin_mi(&w_what),
        w_y: sparse_plugin_mi(&w_y),
        x_y: sparse_plugin_mi(&x_y),
        trials: runs.len(),
    })
}
