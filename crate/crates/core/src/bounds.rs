//! Error bounds and decision rules derived from entropies and mutual information.
//!
//! - [`fano_lower_relaxed`] / [`fano_lower_tight`]: lower bounds on the
//!   expected sensing error from `H(W)` and the DTMI.
//! - [`typicality_upper_bound`]: upper bound achieved by the typicality decoder.
//! - [`lossless_condition`]: compares the sensing rate `log2(m)/n` against the
//!   averaged cross mutual information.
//! - [`preprocessing_check`] and [`compare_features`]: decision helpers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::infotheory::binary_entropy_unchecked;
use crate::knn_mi::{estimate_dtmi, EstimatorConfig, EstimatorError};
use crate::types::{BoundReport, MIEstimate, PairedSamples, StateSpace};

/// DTMI difference below which two features are reported as indistinguishable.
pub const COMPARISON_TOLERANCE_BITS: f64 = 0.02;

pub const DEFAULT_EPSILON: f64 = 0.05;

const BISECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
    #[error("no error probability satisfies the bound: H(W) - I = {gap} exceeds log2(m+1) = {max}")]
    Infeasible { gap: f64, max: f64 },
    #[error("expected a {expected}x{expected} matrix, got {found}")]
    DimensionMismatch { expected: usize, found: String },
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

fn check_entropies(h_w: f64, dtmi: f64, m: usize) -> Result<(), BoundsError> {
    if !(h_w >= 0.0 && h_w.is_finite()) {
        return Err(BoundsError::InvalidArguments(format!("h_w_bits = {h_w}")));
    }
    if !(dtmi >= 0.0) || dtmi.is_nan() {
        return Err(BoundsError::InvalidArguments(format!("dtmi_bits = {dtmi}")));
    }
    if m < 2 {
        return Err(BoundsError::InvalidArguments(format!("m = {m}")));
    }
    Ok(())
}

/// `max(0, (H(W) − I − 1) / log2 m)`, using `H(P_E) ≤ 1`.
pub fn fano_lower_relaxed(h_w_bits: f64, dtmi_bits: f64, m: usize) -> Result<f64, BoundsError> {
    check_entropies(h_w_bits, dtmi_bits, m)?;
    let v = (h_w_bits - dtmi_bits - 1.0) / (m as f64).log2();
    Ok(v.clamp(0.0, 1.0))
}

/// Smallest `P` with `P·log2 m + H(P) ≥ H(W) − I`.
///
/// The left side increases strictly on `[0, m/(m+1)]` up to its maximum
/// `log2(m+1)`, so the root is found by bisection on that interval. The
/// returned value is the upper end of the final bracket and therefore always
/// satisfies the inequality.
pub fn fano_lower_tight(h_w_bits: f64, dtmi_bits: f64, m: usize) -> Result<f64, BoundsError> {
    check_entropies(h_w_bits, dtmi_bits, m)?;
    let target = h_w_bits - dtmi_bits;
    if target <= 0.0 {
        return Ok(0.0);
    }
    let log_m = (m as f64).log2();
    let f = |p: f64| p * log_m + binary_entropy_unchecked(p);
    let max = ((m + 1) as f64).log2();
    let (mut lo, mut hi) = (0.0, m as f64 / (m as f64 + 1.0));
    if target > max {
        // Allow for rounding in log2(m+1) against the evaluated maximum.
        if target > f(hi) && target - max > 1e-12 {
            return Err(BoundsError::Infeasible { gap: target, max });
        }
        return Ok(hi);
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Summed cross mutual information `terms[j][k] = Σ_i I(X_i(w_j); Y_i(w_k))`
/// for candidate state `j` against true state `k`. The diagonal is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossMIMatrix {
    terms: Vec<Vec<f64>>,
}

impl CrossMIMatrix {
    pub fn new(terms: Vec<Vec<f64>>) -> Result<Self, BoundsError> {
        let m = terms.len();
        if m < 2 || terms.iter().any(|r| r.len() != m) {
            return Err(BoundsError::DimensionMismatch {
                expected: m.max(2),
                found: describe(&terms),
            });
        }
        for (j, row) in terms.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if j != k && (v.is_nan() || v < 0.0) {
                    return Err(BoundsError::InvalidArguments(format!(
                        "cross term [{j}][{k}] = {v}"
                    )));
                }
            }
        }
        Ok(Self { terms })
    }

    /// Every off-diagonal entry set to `value`.
    pub fn constant(m: usize, value: f64) -> Result<Self, BoundsError> {
        Self::new(
            (0..m)
                .map(|j| (0..m).map(|k| if j == k { 0.0 } else { value }).collect())
                .collect(),
        )
    }

    pub fn m(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Vec<f64>] {
        &self.terms
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.terms[j][k]
    }

    pub fn min_off_diagonal(&self) -> f64 {
        off_diagonal(&self.terms).fold(f64::INFINITY, f64::min)
    }
}

fn describe(rows: &[Vec<f64>]) -> String {
    let widths: Vec<usize> = rows.iter().map(Vec::len).collect();
    format!("{} rows with widths {widths:?}", rows.len())
}

fn off_diagonal(rows: &[Vec<f64>]) -> impl Iterator<Item = f64> + '_ {
    rows.iter()
        .enumerate()
        .flat_map(|(j, r)| r.iter().enumerate().filter(move |(k, _)| *k != j).map(|(_, &v)| v))
}

/// Upper bound on the expected error of the typicality decoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    /// `ε + Σ_k p(w_k) Σ_{j≠k} 2^{3nε − terms[j][k]}`; may be `+∞`.
    pub raw: f64,
    /// log2 of the summed cross terms (`−∞` when they vanish).
    pub log2_excess: f64,
    pub clamped: f64,
}

/// Evaluates the upper bound with a base-2 log-sum-exp over the cross terms.
pub fn typicality_upper_bound(
    cross_mi: &CrossMIMatrix,
    prior: &StateSpace,
    n: usize,
    epsilon: f64,
) -> Result<UpperBound, BoundsError> {
    let m = prior.m();
    if cross_mi.m() != m {
        return Err(BoundsError::DimensionMismatch {
            expected: m,
            found: describe(cross_mi.terms()),
        });
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(BoundsError::NonPositiveEpsilon(epsilon));
    }
    if n == 0 {
        return Err(BoundsError::InvalidArguments("n = 0".into()));
    }
    let shift = 3.0 * n as f64 * epsilon;
    let mut exps = Vec::with_capacity(m * (m - 1));
    for (k, &pk) in prior.prior().iter().enumerate() {
        if pk <= 0.0 {
            continue;
        }
        for j in (0..m).filter(|&j| j != k) {
            let e = pk.log2() + shift - cross_mi.get(j, k);
            if e > f64::NEG_INFINITY {
                exps.push(e);
            }
        }
    }
    let log2_excess = log2_sum_exp2(&exps);
    let raw = epsilon + log2_excess.exp2();
    Ok(UpperBound {
        raw,
        log2_excess,
        clamped: raw.min(1.0),
    })
}

fn log2_sum_exp2(exps: &[f64]) -> f64 {
    let max = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + exps.iter().map(|e| (e - max).exp2()).sum::<f64>().log2()
}

/// Both bounds for one configuration. `h_w_bits` is taken from `prior`.
pub fn bound_report(
    prior: &StateSpace,
    dtmi_bits: f64,
    cross_mi: &CrossMIMatrix,
    n: usize,
    epsilon: f64,
) -> Result<BoundReport, BoundsError> {
    let m = prior.m();
    let h_w = prior.entropy_bits();
    let upper = typicality_upper_bound(cross_mi, prior, n, epsilon)?;
    Ok(BoundReport {
        lower_relaxed: fano_lower_relaxed(h_w, dtmi_bits, m)?,
        lower_tight: fano_lower_tight(h_w, dtmi_bits, m)?,
        upper_raw: upper.raw,
        upper_log2_excess: upper.log2_excess,
        upper_clamped: upper.clamped,
        epsilon,
        n,
        m,
        h_w_bits: h_w,
        dtmi_bits,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosslessReport {
    pub rate_bits: f64,
    pub threshold_bits: f64,
    pub satisfied: bool,
    pub margin_bits: f64,
}

/// Rate test `log2(m)/n < min_{j≠k} averaged_cross_mi[j][k] − 3ε`, where the
/// matrix holds per-dimension averages `(1/n) Σ_i I` in bits.
pub fn lossless_condition(
    m: usize,
    n: usize,
    averaged_cross_mi: &[Vec<f64>],
    epsilon: f64,
) -> Result<LosslessReport, BoundsError> {
    if averaged_cross_mi.len() != m || averaged_cross_mi.iter().any(|r| r.len() != m) {
        return Err(BoundsError::DimensionMismatch {
            expected: m,
            found: describe(averaged_cross_mi),
        });
    }
    if m < 2 || n == 0 {
        return Err(BoundsError::InvalidArguments(format!("m = {m}, n = {n}")));
    }
    if !(epsilon >= 0.0) {
        return Err(BoundsError::InvalidArguments(format!("epsilon = {epsilon}")));
    }
    let rate = (m as f64).log2() / n as f64;
    let min = off_diagonal(averaged_cross_mi).fold(f64::INFINITY, f64::min);
    let threshold = min - 3.0 * epsilon;
    let margin = threshold - rate;
    Ok(LosslessReport {
        rate_bits: rate,
        threshold_bits: threshold,
        satisfied: margin > 0.0,
        margin_bits: margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreprocessingVerdict {
    /// `H(W) − I(X; D) > 1`: no sensing algorithm applied to `D` can be lossless.
    LosslessImpossible,
    Inconclusive,
}

/// Checks whether the raw data `D` already rules out lossless sensing.
pub fn preprocessing_check(h_w_bits: f64, i_x_d_bits: f64) -> Result<PreprocessingVerdict, BoundsError> {
    for (name, v) in [("h_w_bits", h_w_bits), ("i_x_d_bits", i_x_d_bits)] {
        if !(v >= 0.0) {
            return Err(BoundsError::InvalidArguments(format!("{name} = {v}")));
        }
    }
    Ok(if h_w_bits - i_x_d_bits > 1.0 {
        PreprocessingVerdict::LosslessImpossible
    } else {
        PreprocessingVerdict::Inconclusive
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    A,
    B,
    Indistinguishable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub dtmi_a: MIEstimate,
    pub dtmi_b: MIEstimate,
    pub fano_a: f64,
    pub fano_b: f64,
    pub preferred: Preference,
}

/// Ranks two candidate features by estimated DTMI.
pub fn compare_features(
    samples_a: &PairedSamples,
    samples_b: &PairedSamples,
    config: &EstimatorConfig,
    state_entropy_bits: f64,
    m: usize,
) -> Result<ComparisonReport, BoundsError> {
    let a = estimate_dtmi(samples_a, config)?;
    let b = estimate_dtmi(samples_b, config)?;
    let fano_a = fano_lower_tight(state_entropy_bits, a.bits, m)?;
    let fano_b = fano_lower_tight(state_entropy_bits, b.bits, m)?;
    let preferred = if (a.bits - b.bits).abs() <= COMPARISON_TOLERANCE_BITS {
        Preference::Indistinguishable
    } else if a.bits > b.bits {
        Preference::A
    } else {
        Preference::B
    };
    Ok(ComparisonReport {
        dtmi_a: a,
        dtmi_b: b,
        fano_a,
        fano_b,
        preferred,
    })
}
