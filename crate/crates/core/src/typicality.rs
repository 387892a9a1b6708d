//! Jointly matching sets over finite alphabets and the typicality decoder.
//!
//! A pair `(x^n, y^n)` is in the matching set `B_ε` of a reference model when
//! each of `−(1/n) log2 p(x^n)`, `−(1/n) log2 p(y^n)` and
//! `−(1/n) log2 p(x^n, y^n)` is strictly within `ε` of the corresponding mean
//! per-dimension entropy. Symbols of zero reference probability make the
//! empirical quantity infinite, so such pairs are never members.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::infotheory::{InfoError, JointTable};
use crate::rng::RngSeed;
use crate::stats::Proportion;
use rand::Rng;

/// Minimum trial count for [`typicality_probability`].
pub const MIN_TRIALS: usize = 100;

/// Largest number of sequence pairs [`exact_matching_count`] will enumerate.
pub const MAX_ENUMERATION: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypicalityError {
    #[error("sequence length {found} does not match reference dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("symbol {symbol} at position {position} is outside the reference alphabet")]
    SymbolOutOfRange { position: usize, symbol: usize },
    #[error("more than one state matches: {0:?}")]
    DecodeAmbiguous(Vec<usize>),
    #[error("no state matches")]
    DecodeEmpty,
    #[error("need at least {MIN_TRIALS} trials, got {0}")]
    TooFewTrials(usize),
    #[error("{0} sequence pairs exceed the enumeration limit")]
    InstanceTooLarge(u128),
    #[error("reference needs at least one dimension")]
    EmptyReference,
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error(transparent)]
    Info(#[from] InfoError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Dim {
    table: JointTable,
    log_px: Vec<f64>,
    log_py: Vec<f64>,
    log_pxy: Vec<f64>,
    cum_px: Vec<f64>,
    cum_py: Vec<f64>,
    cum_pxy: Vec<f64>,
    h_x: f64,
    h_y: f64,
    h_xy: f64,
}

impl Dim {
    fn new(table: JointTable) -> Self {
        let px = table.marginal_x();
        let py = table.marginal_y();
        let logs = |p: &[f64]| p.iter().map(|v| v.log2()).collect::<Vec<_>>();
        let cum = |p: &[f64]| {
            let mut acc = 0.0;
            p.iter()
                .map(|v| {
                    acc += v;
                    acc
                })
                .collect::<Vec<_>>()
        };
        Self {
            log_px: logs(&px),
            log_py: logs(&py),
            log_pxy: logs(table.cells()),
            cum_px: cum(&px),
            cum_py: cum(&py),
            cum_pxy: cum(table.cells()),
            h_x: table.entropy_x(),
            h_y: table.entropy_y(),
            h_xy: table.entropy_joint(),
            table,
        }
    }
}

/// Per-dimension joint distributions `p(x_i, y_i)` defining a matching set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceJoint {
    dims: Vec<Dim>,
}

impl ReferenceJoint {
    pub fn new(tables: Vec<JointTable>) -> Result<Self, TypicalityError> {
        if tables.is_empty() {
            return Err(TypicalityError::EmptyReference);
        }
        Ok(Self {
            dims: tables.into_iter().map(Dim::new).collect(),
        })
    }

    /// The same table in each of `n` dimensions.
    pub fn iid(table: JointTable, n: usize) -> Result<Self, TypicalityError> {
        Self::new(vec![table; n])
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn table(&self, i: usize) -> &JointTable {
        &self.dims[i].table
    }

    pub fn entropy_x(&self, i: usize) -> f64 {
        self.dims[i].h_x
    }

    pub fn entropy_y(&self, i: usize) -> f64 {
        self.dims[i].h_y
    }

    pub fn entropy_joint(&self, i: usize) -> f64 {
        self.dims[i].h_xy
    }

    /// `Σ_i I(X_i; Y_i)` in bits.
    pub fn total_mi(&self) -> f64 {
        self.dims
            .iter()
            .map(|d| (d.h_x + d.h_y - d.h_xy).max(0.0))
            .sum()
    }

    fn mean_entropies(&self) -> (f64, f64, f64) {
        let n = self.n() as f64;
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for d in &self.dims {
            a += d.h_x;
            b += d.h_y;
            c += d.h_xy;
        }
        (a / n, b / n, c / n)
    }
}

fn check_seq(reference: &ReferenceJoint, x: &[usize], y: &[usize]) -> Result<(), TypicalityError> {
    let n = reference.n();
    for len in [x.len(), y.len()] {
        if len != n {
            return Err(TypicalityError::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    for (i, d) in reference.dims.iter().enumerate() {
        if x[i] >= d.table.rows() {
            return Err(TypicalityError::SymbolOutOfRange {
                position: i,
                symbol: x[i],
            });
        }
        if y[i] >= d.table.cols() {
            return Err(TypicalityError::SymbolOutOfRange {
                position: i,
                symbol: y[i],
            });
        }
    }
    Ok(())
}

fn member_unchecked(reference: &ReferenceJoint, x: &[usize], y: &[usize], epsilon: f64) -> bool {
    let n = reference.n() as f64;
    let (mut lx, mut ly, mut lxy) = (0.0, 0.0, 0.0);
    for (i, d) in reference.dims.iter().enumerate() {
        lx += d.log_px[x[i]];
        ly += d.log_py[y[i]];
        lxy += d.log_pxy[x[i] * d.table.cols() + y[i]];
    }
    // −∞ log-probabilities give an infinite gap and fail the strict test.
    let (hx, hy, hxy) = reference.mean_entropies();
    (-lx / n - hx).abs() < epsilon && (-ly / n - hy).abs() < epsilon && (-lxy / n - hxy).abs() < epsilon
}

/// Whether `(x_seq, y_seq)` lies in the matching set of `reference`.
pub fn matching_membership(
    x_seq: &[usize],
    y_seq: &[usize],
    reference: &ReferenceJoint,
    epsilon: f64,
) -> Result<bool, TypicalityError> {
    check_seq(reference, x_seq, y_seq)?;
    Ok(member_unchecked(reference, x_seq, y_seq, epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawMode {
    /// `(x_i, y_i)` drawn from `p(x_i, y_i)`.
    JointDraw,
    /// `x_i` and `y_i` drawn independently from the marginals.
    ProductDraw,
}

fn draw(cum: &[f64], u: f64) -> usize {
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

/// Draws one sequence pair from `reference` in the given mode.
pub fn sample_pair<R: Rng>(reference: &ReferenceJoint, mode: DrawMode, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let n = reference.n();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for d in &reference.dims {
        match mode {
            DrawMode::JointDraw => {
                let cell = draw(&d.cum_pxy, rng.random());
                x.push(cell / d.table.cols());
                y.push(cell % d.table.cols());
            }
            DrawMode::ProductDraw => {
                x.push(draw(&d.cum_px, rng.random()));
                y.push(draw(&d.cum_py, rng.random()));
            }
        }
    }
    (x, y)
}

/// Monte Carlo frequency of matching-set membership with a Wilson 95% interval.
///
/// Trial `t` draws from substream `t` of `seed`, so the result does not depend
/// on the number of worker threads.
pub fn typicality_probability(
    reference: &ReferenceJoint,
    epsilon: f64,
    mode: DrawMode,
    trials: usize,
    seed: RngSeed,
) -> Result<Proportion, TypicalityError> {
    if trials < MIN_TRIALS {
        return Err(TypicalityError::TooFewTrials(trials));
    }
    if !(epsilon > 0.0) {
        return Err(TypicalityError::NonPositiveEpsilon(epsilon));
    }
    let hits: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.substream(t).rng();
            let (x, y) = sample_pair(reference, mode, &mut rng);
            member_unchecked(reference, &x, &y, epsilon)
        })
        .collect();
    let successes = hits.iter().filter(|&&h| h).count() as u64;
    Ok(Proportion::new(successes, trials as u64))
}

/// `nε + Σ_i H(X_i, Y_i)`: log2 of the upper bound on the matching-set size.
pub fn matching_set_log_size_bound(reference: &ReferenceJoint, epsilon: f64) -> f64 {
    reference.n() as f64 * epsilon + reference.dims.iter().map(|d| d.h_xy).sum::<f64>()
}

/// Exact number of sequence pairs in the matching set, by enumeration.
pub fn exact_matching_count(reference: &ReferenceJoint, epsilon: f64) -> Result<u128, TypicalityError> {
    let mut total: u128 = 1;
    for d in &reference.dims {
        total = total.saturating_mul((d.table.rows() * d.table.cols()) as u128);
        if total > MAX_ENUMERATION {
            return Err(TypicalityError::InstanceTooLarge(total));
        }
    }
    let n = reference.n();
    let mut cell = vec![0usize; n];
    let mut x = vec![0usize; n];
    let mut y = vec![0usize; n];
    let mut count = 0u128;
    loop {
        for i in 0..n {
            let cols = reference.dims[i].table.cols();
            x[i] = cell[i] / cols;
            y[i] = cell[i] % cols;
        }
        if member_unchecked(reference, &x, &y, epsilon) {
            count += 1;
        }
        // Odometer increment over the per-dimension cell indices.
        let mut i = 0;
        loop {
            if i == n {
                return Ok(count);
            }
            cell[i] += 1;
            let d = &reference.dims[i].table;
            if cell[i] < d.rows() * d.cols() {
                break;
            }
            cell[i] = 0;
            i += 1;
        }
    }
}

/// Decodes `y_seq` by testing each state's codeword against that state's
/// reference model. Succeeds only if exactly one state matches.
pub fn typicality_decode(
    y_seq: &[usize],
    codebook: &[Vec<usize>],
    ref_models: &[ReferenceJoint],
    epsilon: f64,
) -> Result<usize, TypicalityError> {
    if codebook.len() != ref_models.len() {
        return Err(TypicalityError::DimensionMismatch {
            expected: codebook.len(),
            found: ref_models.len(),
        });
    }
    let mut matches = Vec::new();
    for (j, (cw, model)) in codebook.iter().zip(ref_models).enumerate() {
        if matching_membership(cw, y_seq, model, epsilon)? {
            matches.push(j);
        }
    }
    match matches.len() {
        0 => Err(TypicalityError::DecodeEmpty),
        1 => Ok(matches[0]),
        _ => Err(TypicalityError::DecodeAmbiguous(matches)),
    }
}
