//! k-nearest-neighbour mutual information estimators.
//!
//! All three estimators search neighbours in the joint space under the
//! max-norm and then count marginal neighbours:
//!
//! - **KSG1** counts marginal points strictly inside the k-th joint distance
//!   and returns `ψ(k) + ψ(N) − ⟨ψ(n_x+1) + ψ(n_y+1)⟩`.
//! - **KSG2** projects the k nearest joint neighbours onto each marginal, counts
//!   points within (≤) the projected radius, and returns
//!   `ψ(k) − 1/k + ψ(N) − ⟨ψ(n_x) + ψ(n_y)⟩`.
//! - **Mixed KSG** follows the KSG1 rule except where the k-th joint distance
//!   is zero (a discrete atom). There `k` becomes the number of exact
//!   duplicates and marginal counts include every exact tie.
//!
//! KSG1 and KSG2 assume continuous data. When a column has repeated values they
//! add a seeded jitter of relative size 1e-10 to that column. The mixed
//! estimator never jitters.

mod index;

pub use index::count_within_maxnorm;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::infotheory::digamma::digamma_unchecked as psi;
use crate::rng::RngSeed;
use crate::types::{EstimatorId, MIEstimate, Matrix, PairedSamples, ValidationError};
use index::SweepIndex;

/// Largest sample count accepted by a single estimator call.
pub const MAX_SAMPLES: usize = 50_000;

pub const DEFAULT_K: usize = 3;

const JITTER_SCALE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("need at least k+1 = {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("{0} samples exceeds the per-call limit of {MAX_SAMPLES}")]
    TooManySamples(usize),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("all sample points are identical")]
    DegenerateData,
    #[error("x has {dx} columns but y has {dy}; per-dimension aggregation needs equal widths")]
    DimensionMismatch { dx: usize, dy: usize },
    #[error("estimator `{0}` cannot be used on samples")]
    Unsupported(&'static str),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// One estimate in the full joint space.
    #[default]
    Joint,
    /// Sum of one-dimensional estimates `Σ_i I(X_i; Y_i)`.
    PerDimensionSum,
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "joint" => Ok(Self::Joint),
            "per_dimension_sum" | "sum" => Ok(Self::PerDimensionSum),
            other => Err(format!("unknown aggregation `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub estimator: EstimatorId,
    pub k: usize,
    pub aggregation: Aggregation,
    /// Seed for tie-breaking jitter (KSG1/KSG2 only).
    pub jitter_seed: RngSeed,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            estimator: EstimatorId::MixedKsg,
            k: DEFAULT_K,
            aggregation: Aggregation::Joint,
            jitter_seed: RngSeed::default(),
        }
    }
}

impl EstimatorConfig {
    pub fn new(estimator: EstimatorId, k: usize) -> Self {
        Self {
            estimator,
            k,
            ..Self::default()
        }
    }

    pub fn with_aggregation(mut self, aggregation: Aggregation) -> Self {
        self.aggregation = aggregation;
        self
    }
}

/// Per-point neighbour statistics behind an estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborCounts {
    pub n_x: Vec<usize>,
    pub n_y: Vec<usize>,
    pub kth_distance: Vec<f64>,
    /// Effective neighbour count (differs from `k` only for mixed-KSG atoms).
    pub k_eff: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    Ksg1,
    Ksg2,
    Mixed,
}

fn check(samples: &PairedSamples, k: usize) -> Result<(), EstimatorError> {
    let n = samples.len();
    if k == 0 {
        return Err(EstimatorError::ZeroK);
    }
    if n > MAX_SAMPLES {
        return Err(EstimatorError::TooManySamples(n));
    }
    if n < k + 1 {
        return Err(EstimatorError::TooFewSamples {
            needed: k + 1,
            got: n,
        });
    }
    Ok(())
}

fn concat(x: &Matrix, y: &Matrix) -> Matrix {
    let rows: Vec<Vec<f64>> = x
        .iter_rows()
        .zip(y.iter_rows())
        .map(|(a, b)| a.iter().chain(b).copied().collect())
        .collect();
    Matrix::from_rows(&rows).expect("validated inputs")
}

fn has_duplicates(col: &[f64]) -> bool {
    let mut v = col.to_vec();
    v.sort_by(f64::total_cmp);
    v.windows(2).any(|w| w[0] == w[1])
}

/// Adds seeded uniform jitter to every column that contains repeated values.
fn jitter_ties(m: &Matrix, seed: RngSeed) -> Matrix {
    let mut cols: Vec<Vec<f64>> = (0..m.cols()).map(|c| m.column(c)).collect();
    let mut rng = seed.rng();
    for col in cols.iter_mut() {
        if !has_duplicates(col) {
            continue;
        }
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        let scale = if sd > 0.0 { sd } else { mean.abs().max(1.0) };
        for v in col.iter_mut() {
            *v += JITTER_SCALE * scale * rng.random_range(-1.0..1.0);
        }
    }
    let rows: Vec<Vec<f64>> = (0..m.rows())
        .map(|r| cols.iter().map(|c| c[r]).collect())
        .collect();
    Matrix::from_rows(&rows).expect("jitter keeps values finite")
}

fn prepare(samples: &PairedSamples, rule: Rule, seed: RngSeed) -> Result<(Matrix, Matrix), EstimatorError> {
    if rule == Rule::Mixed {
        return Ok((samples.x().clone(), samples.y().clone()));
    }
    let first_x = samples.x().row(0);
    let first_y = samples.y().row(0);
    let all_same = (1..samples.len())
        .all(|i| samples.x().row(i) == first_x && samples.y().row(i) == first_y);
    if all_same {
        return Err(EstimatorError::DegenerateData);
    }
    Ok((
        jitter_ties(samples.x(), seed.substream(0)),
        jitter_ties(samples.y(), seed.substream(1)),
    ))
}

fn counts_for(x: &Matrix, y: &Matrix, k: usize, rule: Rule) -> NeighborCounts {
    let joint = concat(x, y);
    let jidx = SweepIndex::new(&joint);
    let xidx = SweepIndex::new(x);
    let yidx = SweepIndex::new(y);
    let dx = x.cols();
    let per_point: Vec<(usize, usize, f64, usize)> = (0..joint.rows())
        .into_par_iter()
        .map(|i| {
            let nb = jidx.knn(i, k);
            let rho = nb.kth();
            match rule {
                Rule::Ksg1 => (
                    xidx.count_within(i, rho, true),
                    yidx.count_within(i, rho, true),
                    rho,
                    k,
                ),
                Rule::Ksg2 => {
                    let (mut ex, mut ey) = (0.0f64, 0.0f64);
                    let c = joint.row(i);
                    for &j in &nb.idx {
                        let r = joint.row(j);
                        ex = ex.max(index::max_norm(&r[..dx], &c[..dx]));
                        ey = ey.max(index::max_norm(&r[dx..], &c[dx..]));
                    }
                    (
                        xidx.count_within(i, ex, false),
                        yidx.count_within(i, ey, false),
                        rho,
                        k,
                    )
                }
                Rule::Mixed if rho == 0.0 => (
                    xidx.count_within(i, 0.0, false),
                    yidx.count_within(i, 0.0, false),
                    0.0,
                    jidx.count_within(i, 0.0, false),
                ),
                Rule::Mixed => (
                    xidx.count_within(i, rho, true),
                    yidx.count_within(i, rho, true),
                    rho,
                    k,
                ),
            }
        })
        .collect();
    let mut out = NeighborCounts {
        n_x: Vec::with_capacity(per_point.len()),
        n_y: Vec::with_capacity(per_point.len()),
        kth_distance: Vec::with_capacity(per_point.len()),
        k_eff: Vec::with_capacity(per_point.len()),
    };
    for (nx, ny, d, ke) in per_point {
        out.n_x.push(nx);
        out.n_y.push(ny);
        out.kth_distance.push(d);
        out.k_eff.push(ke);
    }
    out
}

fn estimate_nats(counts: &NeighborCounts, k: usize, rule: Rule) -> f64 {
    let n = counts.n_x.len();
    let nf = n as f64;
    // Sequential sum keeps the result independent of the thread pool.
    let mean = |f: &dyn Fn(usize) -> f64| (0..n).map(f).sum::<f64>() / nf;
    match rule {
        Rule::Ksg1 => {
            psi(k as f64) + psi(nf)
                - mean(&|i| psi(counts.n_x[i] as f64 + 1.0) + psi(counts.n_y[i] as f64 + 1.0))
        }
        Rule::Ksg2 => {
            psi(k as f64) - 1.0 / k as f64 + psi(nf)
                - mean(&|i| psi(counts.n_x[i] as f64) + psi(counts.n_y[i] as f64))
        }
        Rule::Mixed => {
            psi(nf)
                + mean(&|i| {
                    psi(counts.k_eff[i] as f64)
                        - psi(counts.n_x[i] as f64 + 1.0)
                        - psi(counts.n_y[i] as f64 + 1.0)
                })
        }
    }
}

fn run(samples: &PairedSamples, k: usize, rule: Rule, seed: RngSeed) -> Result<MIEstimate, EstimatorError> {
    check(samples, k)?;
    let (x, y) = prepare(samples, rule, seed)?;
    let counts = counts_for(&x, &y, k, rule);
    let bits = estimate_nats(&counts, k, rule) / std::f64::consts::LN_2;
    let id = match rule {
        Rule::Ksg1 => EstimatorId::Ksg1,
        Rule::Ksg2 => EstimatorId::Ksg2,
        Rule::Mixed => EstimatorId::MixedKsg,
    };
    Ok(MIEstimate::from_raw(bits, id, Some(k), samples.len()))
}

/// Neighbour statistics as used by `estimator`, after any tie jitter.
pub fn neighbor_counts(
    samples: &PairedSamples,
    config: &EstimatorConfig,
) -> Result<NeighborCounts, EstimatorError> {
    let rule = rule_of(config.estimator)?;
    check(samples, config.k)?;
    let (x, y) = prepare(samples, rule, config.jitter_seed)?;
    Ok(counts_for(&x, &y, config.k, rule))
}

fn rule_of(id: EstimatorId) -> Result<Rule, EstimatorError> {
    match id {
        EstimatorId::Ksg1 => Ok(Rule::Ksg1),
        EstimatorId::Ksg2 => Ok(Rule::Ksg2),
        EstimatorId::MixedKsg => Ok(Rule::Mixed),
        EstimatorId::Plugin => Err(EstimatorError::Unsupported("plugin")),
    }
}

/// KSG estimator, first algorithm.
pub fn ksg1(samples: &PairedSamples, k: usize) -> Result<MIEstimate, EstimatorError> {
    run(samples, k, Rule::Ksg1, RngSeed::default())
}

/// KSG estimator, second algorithm.
pub fn ksg2(samples: &PairedSamples, k: usize) -> Result<MIEstimate, EstimatorError> {
    run(samples, k, Rule::Ksg2, RngSeed::default())
}

/// Fixed-k estimator for mixtures of discrete atoms and continuous parts.
pub fn mixed_ksg(samples: &PairedSamples, k: usize) -> Result<MIEstimate, EstimatorError> {
    run(samples, k, Rule::Mixed, RngSeed::default())
}

/// Estimate the task mutual information `I(X^n; Y^n)` with the configured
/// estimator.
///
/// With [`Aggregation::PerDimensionSum`] the result is `Σ_i Î(X_i; Y_i)` over
/// paired columns, which equals the joint value when the dimensions are
/// mutually independent. The raw per-dimension values are summed before
/// clamping.
pub fn estimate_dtmi(
    samples: &PairedSamples,
    config: &EstimatorConfig,
) -> Result<MIEstimate, EstimatorError> {
    let rule = rule_of(config.estimator)?;
    match config.aggregation {
        Aggregation::Joint => run(samples, config.k, rule, config.jitter_seed),
        Aggregation::PerDimensionSum => {
            if samples.dx() != samples.dy() {
                return Err(EstimatorError::DimensionMismatch {
                    dx: samples.dx(),
                    dy: samples.dy(),
                });
            }
            check(samples, config.k)?;
            let mut raw = 0.0;
            for d in 0..samples.dx() {
                let col = PairedSamples::from_columns(&samples.x().column(d), &samples.y().column(d))?;
                let seed = config.jitter_seed.substream(d as u64);
                raw += run(&col, config.k, rule, seed)?.raw_bits;
            }
            Ok(MIEstimate::from_raw(
                raw,
                config.estimator,
                Some(config.k),
                samples.len(),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, rho: f64, seed: u64) -> PairedSamples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            xs.push(a);
            ys.push(rho * a + (1.0 - rho * rho).sqrt() * b);
        }
        PairedSamples::from_columns(&xs, &ys).unwrap()
    }

    #[test]
    fn errors() {
        let s = PairedSamples::from_columns(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(ksg1(&s, 3), Err(EstimatorError::TooFewSamples { .. })));
        assert!(matches!(ksg1(&s, 0), Err(EstimatorError::ZeroK)));
        let same = PairedSamples::from_columns(&[1.0; 10], &[2.0; 10]).unwrap();
        assert!(matches!(ksg1(&same, 3), Err(EstimatorError::DegenerateData)));
        assert!(matches!(ksg2(&same, 3), Err(EstimatorError::DegenerateData)));
        // All-identical data is a single atom: zero information, no error.
        let mixed = mixed_ksg(&same, 3).unwrap();
        assert!(mixed.bits < 1e-9);
    }

    #[test]
    fn per_dimension_requires_equal_widths() {
        let s = PairedSamples::from_rows(
            &[vec![1.0, 2.0], vec![2.0, 1.0], vec![0.0, 3.0], vec![5.0, 1.0], vec![3.0, 3.0]],
            &[vec![1.0], vec![0.0], vec![2.0], vec![3.0], vec![1.5]],
        )
        .unwrap();
        let cfg = EstimatorConfig::new(EstimatorId::Ksg1, 2).with_aggregation(Aggregation::PerDimensionSum);
        assert!(matches!(
            estimate_dtmi(&s, &cfg),
            Err(EstimatorError::DimensionMismatch { dx: 2, dy: 1 })
        ));
    }

    #[test]
    fn single_dimension_matches_direct_call() {
        let s = gaussian(1000, 0.5, 3);
        for id in [EstimatorId::Ksg1, EstimatorId::Ksg2, EstimatorId::MixedKsg] {
            let direct = match id {
                EstimatorId::Ksg1 => ksg1(&s, 3),
                EstimatorId::Ksg2 => ksg2(&s, 3),
                _ => mixed_ksg(&s, 3),
            }
            .unwrap();
            for agg in [Aggregation::Joint, Aggregation::PerDimensionSum] {
                let cfg = EstimatorConfig::new(id, 3).with_aggregation(agg);
                let e = estimate_dtmi(&s, &cfg).unwrap();
                assert_eq!(e.raw_bits, direct.raw_bits, "{id:?} {agg:?}");
            }
        }
    }

    #[test]
    fn mixed_equals_ksg1_on_continuous_data() {
        let s = gaussian(500, 0.7, 11);
        let (a, b) = (mixed_ksg(&s, 3).unwrap().raw_bits, ksg1(&s, 3).unwrap().raw_bits);
        assert!((a - b).abs() < 1e-12, "{a} {b}");
    }

    #[test]
    fn ksg2_marginal_counts_reach_k() {
        let s = gaussian(300, 0.3, 5);
        let c = neighbor_counts(&s, &EstimatorConfig::new(EstimatorId::Ksg2, 4)).unwrap();
        // The projected radius always encloses at least one neighbour per marginal.
        assert!(c.n_x.iter().all(|&v| v >= 1));
        assert!(c.n_y.iter().all(|&v| v >= 1));
        assert!(c.kth_distance.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn jitter_only_touches_tied_columns() {
        let m = Matrix::from_rows(&[vec![1.0, 0.1], vec![1.0, 0.2], vec![2.0, 0.3]]).unwrap();
        let j = jitter_ties(&m, RngSeed::new(1));
        assert_eq!(j.column(1), m.column(1));
        assert_ne!(j.column(0), m.column(0));
        assert!(j.column(0).iter().zip(m.column(0)).all(|(a, b)| (a - b).abs() < 1e-9));
    }
}
