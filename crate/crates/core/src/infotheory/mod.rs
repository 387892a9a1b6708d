//! Exact information measures over finite distributions.
//!
//! Every quantity is in bits. Zero-probability cells contribute nothing to
//! entropy sums (the `0 log 0 = 0` limit), which keeps deterministic channels
//! well defined.

pub(crate) mod digamma;

pub use digamma::digamma;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{EstimatorId, MIEstimate, PROB_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InfoError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("probability {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("digamma requires a positive argument, got {0}")]
    NonPositiveArgument(f64),
    #[error("correlation {0} must satisfy |rho| < 1")]
    DegenerateCorrelation(f64),
}

/// A probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, InfoError> {
        if probabilities.is_empty() {
            return Err(InfoError::InvalidDistribution("empty".into()));
        }
        check_cells(&probabilities)?;
        Ok(Self {
            probabilities: renormalize(probabilities)?,
        })
    }

    pub fn uniform(n: usize) -> Result<Self, InfoError> {
        Self::new(vec![1.0 / n as f64; n])
    }

    /// Point mass on `symbol` over an alphabet of `size`.
    pub fn point(symbol: usize, size: usize) -> Result<Self, InfoError> {
        if symbol >= size {
            return Err(InfoError::InvalidDistribution(format!(
                "symbol {symbol} outside alphabet of size {size}"
            )));
        }
        let mut p = vec![0.0; size];
        p[symbol] = 1.0;
        Ok(Self { probabilities: p })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probabilities)
    }
}

/// Joint probability table `p(x, y)` with `|X|` rows and `|Y|` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    rows: usize,
    cols: usize,
    p: Vec<f64>,
}

impl JointTable {
    pub fn new(table: &[Vec<f64>]) -> Result<Self, InfoError> {
        let rows = table.len();
        let cols = table.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(InfoError::InvalidDistribution("empty joint table".into()));
        }
        if table.iter().any(|r| r.len() != cols) {
            return Err(InfoError::InvalidDistribution("ragged joint table".into()));
        }
        let flat: Vec<f64> = table.iter().flatten().copied().collect();
        Self::from_flat(rows, cols, flat)
    }

    pub fn from_flat(rows: usize, cols: usize, p: Vec<f64>) -> Result<Self, InfoError> {
        if rows * cols != p.len() || p.is_empty() {
            return Err(InfoError::InvalidDistribution(
                "shape does not match data".into(),
            ));
        }
        check_cells(&p)?;
        Ok(Self {
            rows,
            cols,
            p: renormalize(p)?,
        })
    }

    /// Outer product `p(x) p(y)`.
    pub fn product(px: &DiscreteDistribution, py: &DiscreteDistribution) -> Self {
        let p = px
            .probabilities()
            .iter()
            .flat_map(|&a| py.probabilities().iter().map(move |&b| a * b))
            .collect();
        Self {
            rows: px.len(),
            cols: py.len(),
            p,
        }
    }

    /// Joint table from an input distribution and a row-stochastic channel `p(y|x)`.
    pub fn from_channel(px: &[f64], channel: &[Vec<f64>]) -> Result<Self, InfoError> {
        if px.len() != channel.len() {
            return Err(InfoError::InvalidDistribution(
                "channel rows do not match input alphabet".into(),
            ));
        }
        let table: Vec<Vec<f64>> = px
            .iter()
            .zip(channel)
            .map(|(&a, row)| row.iter().map(|&c| a * c).collect())
            .collect();
        Self::new(&table)
    }

    /// Counts normalised to a joint table.
    pub fn from_counts(rows: usize, cols: usize, counts: &[u64]) -> Result<Self, InfoError> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(InfoError::InvalidDistribution("no counts".into()));
        }
        let p = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::from_flat(rows, cols, p)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.cols + y]
    }

    pub fn cells(&self) -> &[f64] {
        &self.p
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        self.p.chunks_exact(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.p.chunks_exact(self.cols) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    pub fn entropy_x(&self) -> f64 {
        entropy_of(&self.marginal_x())
    }

    pub fn entropy_y(&self) -> f64 {
        entropy_of(&self.marginal_y())
    }

    pub fn entropy_joint(&self) -> f64 {
        entropy_of(&self.p)
    }
}

fn check_cells(p: &[f64]) -> Result<(), InfoError> {
    if let Some(v) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(InfoError::InvalidDistribution(format!(
            "entry {v} outside [0, 1]"
        )));
    }
    Ok(())
}

fn renormalize(p: Vec<f64>) -> Result<Vec<f64>, InfoError> {
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(InfoError::InvalidDistribution(format!(
            "entries sum to {sum}"
        )));
    }
    Ok(p.into_iter().map(|v| v / sum).collect())
}

/// `-Σ p log2 p` over an already validated vector.
pub(crate) fn entropy_of(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.log2())
        .sum()
}

pub fn entropy(dist: &DiscreteDistribution) -> f64 {
    dist.entropy()
}

/// Entropy of a Bernoulli(p) variable in bits.
pub fn binary_entropy(p: f64) -> Result<f64, InfoError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(InfoError::OutOfRange(p));
    }
    Ok(binary_entropy_unchecked(p))
}

pub(crate) fn binary_entropy_unchecked(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Exact mutual information of a joint table, `H(X) + H(Y) - H(X,Y)`.
pub fn plugin_mi(joint: &JointTable) -> MIEstimate {
    let raw = joint.entropy_x() + joint.entropy_y() - joint.entropy_joint();
    // Rounding can leave independent tables a few ulps below zero.
    MIEstimate::from_raw(raw, EstimatorId::Plugin, None, 0)
}

/// `H(X|Y) = H(X,Y) - H(Y)`, floored at 0 against rounding.
pub fn conditional_entropy(joint: &JointTable) -> f64 {
    (joint.entropy_joint() - joint.entropy_y()).max(0.0)
}

/// Mutual information of a bivariate Gaussian with correlation `rho`.
pub fn gaussian_mi_oracle(rho: f64) -> Result<f64, InfoError> {
    if !(rho.abs() < 1.0) {
        return Err(InfoError::DegenerateCorrelation(rho));
    }
    Ok(-0.5 * (1.0 - rho * rho).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bsc_joint(p: f64) -> JointTable {
        JointTable::new(&[
            vec![0.5 * (1.0 - p), 0.5 * p],
            vec![0.5 * p, 0.5 * (1.0 - p)],
        ])
        .unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!((DiscreteDistribution::uniform(4).unwrap().entropy() - 2.0).abs() < 1e-15);
        assert_eq!(DiscreteDistribution::new(vec![1.0, 0.0]).unwrap().entropy(), 0.0);
        let d = DiscreteDistribution::new(vec![0.5, 0.25, 0.25]).unwrap();
        assert!((entropy(&d) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_distribution() {
        assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(DiscreteDistribution::new(vec![]).is_err());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert!((binary_entropy(0.1).unwrap() - 0.468_995_593_589_281_2).abs() < 1e-12);
        assert!(matches!(binary_entropy(1.5), Err(InfoError::OutOfRange(_))));
    }

    #[test]
    fn plugin_mi_examples() {
        let px = DiscreteDistribution::new(vec![0.3, 0.7]).unwrap();
        let py = DiscreteDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let indep = plugin_mi(&JointTable::product(&px, &py));
        assert!(indep.bits.abs() < 1e-12);

        let mut id = vec![vec![0.0; 8]; 8];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = 1.0 / 8.0;
        }
        let mi = plugin_mi(&JointTable::new(&id).unwrap());
        assert!((mi.bits - 3.0).abs() < 1e-12);

        let bsc = plugin_mi(&bsc_joint(0.1));
        assert!((bsc.bits - 0.531_004_406_410_718_8).abs() < 1e-9);
        assert_eq!(bsc.estimator, EstimatorId::Plugin);
    }

    #[test]
    fn conditional_entropy_examples() {
        let mut id = vec![vec![0.0; 4]; 4];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = 0.25;
        }
        assert!(conditional_entropy(&JointTable::new(&id).unwrap()).abs() < 1e-12);

        let px = DiscreteDistribution::new(vec![0.5, 0.25, 0.25]).unwrap();
        let py = DiscreteDistribution::new(vec![0.4, 0.6]).unwrap();
        let h = conditional_entropy(&JointTable::product(&px, &py));
        assert!((h - 1.5).abs() < 1e-12);

        assert!((conditional_entropy(&bsc_joint(0.1)) - 0.468_995_593_589_281_2).abs() < 1e-9);
    }

    #[test]
    fn gaussian_oracle() {
        assert_eq!(gaussian_mi_oracle(0.0).unwrap(), 0.0);
        assert!((gaussian_mi_oracle(0.6).unwrap() - 0.32193).abs() < 1e-5);
        assert!((gaussian_mi_oracle(0.9).unwrap() - 1.197_964_338_165_569_8).abs() < 1e-12);
        assert!(gaussian_mi_oracle(1.0).is_err());
        assert!(gaussian_mi_oracle(-1.2).is_err());
    }

    fn joint_strategy() -> impl Strategy<Value = JointTable> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(0.0f64..1.0, r * c).prop_filter_map(
                "all-zero table",
                move |w| {
                    let s: f64 = w.iter().sum();
                    (s > 1e-6).then(|| {
                        JointTable::from_flat(r, c, w.iter().map(|v| v / s).collect()).unwrap()
                    })
                },
            )
        })
    }

    proptest! {
        #[test]
        fn chain_identity_and_nonnegativity(j in joint_strategy()) {
            let mi = plugin_mi(&j);
            let direct = j.entropy_x() + j.entropy_y() - j.entropy_joint();
            prop_assert!((mi.raw_bits - direct).abs() <= 1e-12);
            prop_assert!(mi.bits >= 0.0);
            prop_assert!(mi.raw_bits > -1e-12);
            prop_assert!(conditional_entropy(&j) >= 0.0);
            prop_assert!(mi.bits <= j.entropy_x().min(j.entropy_y()) + 1e-12);
        }

        #[test]
        fn binary_entropy_symmetric(p in 0.0f64..=1.0) {
            let a = binary_entropy(p).unwrap();
            let b = binary_entropy(1.0 - p).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a <= 1.0 + 1e-15);
        }
    }
}
