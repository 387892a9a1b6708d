//! Threshold detectors: CSI coefficient-of-variation presence detection and
//! RFID door-state detection from RSSI differentials.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::knn_mi::mixed_ksg;
use crate::rng::RngSeed;
use crate::types::{MIEstimate, PairedSamples};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub window_len: usize,
    pub threshold_low: f64,
    pub threshold_high: f64,
    pub rssi_threshold: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            window_len: 100,
            threshold_low: 0.935,
            threshold_high: 1.065,
            rssi_threshold: 2.5,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.threshold_low < self.threshold_high) {
            return Err(PipelineError::InvalidArguments(format!(
                "threshold_low {} must be below threshold_high {}",
                self.threshold_low, self.threshold_high
            )));
        }
        if self.window_len < 2 {
            return Err(PipelineError::WindowTooShort {
                window: self.window_len,
                available: 0,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovDecision {
    pub present: bool,
    /// Mean ratio of current to previous coefficient of variation.
    pub y: f64,
}

fn cov(window: &[f64], subcarrier: usize) -> Result<f64, PipelineError> {
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(PipelineError::ZeroMeanSubcarrier(subcarrier));
    }
    let var = window.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt() / mean)
}

/// Presence detection on `samples` (rows are subcarriers, columns are time)
/// from the last two windows of `config.window_len` samples. A person is
/// absent iff `y` lies in `[threshold_low, threshold_high]`.
pub fn cov_detect(samples: &[Vec<f64>], config: &DetectorConfig) -> Result<CovDecision, PipelineError> {
    config.validate()?;
    if samples.is_empty() {
        return Err(PipelineError::InvalidArguments("no subcarriers".into()));
    }
    let w = config.window_len;
    let mut ratios = 0.0;
    for (i, row) in samples.iter().enumerate() {
        if row.len() < 2 * w {
            return Err(PipelineError::WindowTooShort {
                window: w,
                available: row.len(),
            });
        }
        let t = row.len();
        let prev = cov(&row[t - 2 * w..t - w], i)?;
        let cur = cov(&row[t - w..], i)?;
        ratios += if prev == 0.0 {
            if cur == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            (cur / prev).abs()
        };
    }
    let y = ratios / samples.len() as f64;
    Ok(CovDecision {
        present: !(y >= config.threshold_low && y <= config.threshold_high),
        y,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssiDecision {
    pub open: bool,
    pub mean_differential: f64,
}

/// Door-state detection from `tag_rssi` (rows are tags, columns are time).
///
/// With an explicit `baseline` the current reading of each tag is the mean
/// of its row. Without one, the first column is the baseline and the mean of
/// the remaining columns is the current reading.
pub fn rssi_detect(
    tag_rssi: &[Vec<f64>],
    baseline: Option<&[f64]>,
    config: &DetectorConfig,
) -> Result<RssiDecision, PipelineError> {
    if tag_rssi.is_empty() {
        return Err(PipelineError::NoTags);
    }
    if let Some(b) = baseline {
        if b.len() != tag_rssi.len() {
            return Err(PipelineError::InvalidArguments(format!(
                "{} baseline values for {} tags",
                b.len(),
                tag_rssi.len()
            )));
        }
    }
    let mut total = 0.0;
    for (t, row) in tag_rssi.iter().enumerate() {
        let (base, current) = match baseline {
            Some(b) => (b[t], row.as_slice()),
            None => (row.first().copied().unwrap_or(f64::NAN), row.get(1..).unwrap_or(&[])),
        };
        if current.is_empty() {
            return Err(PipelineError::InvalidArguments(format!("tag {t} has no current readings")));
        }
        let mean = current.iter().sum::<f64>() / current.len() as f64;
        total += (mean - base).abs();
    }
    let mean_differential = total / tag_rssi.len() as f64;
    Ok(RssiDecision {
        open: mean_differential > config.rssi_threshold,
        mean_differential,
    })
}

/// Synthetic RFID door model: opening the door shifts every tag's RSSI by
/// `open_shift_db`; each reading carries independent Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfidModel {
    pub open_shift_db: f64,
    pub read_noise_db: f64,
    /// Readings averaged into the baseline and into the current value.
    pub readings: usize,
}

impl Default for RfidModel {
    fn default() -> Self {
        Self {
            open_shift_db: -3.0,
            read_noise_db: 3.0,
            readings: 5,
        }
    }
}

/// One episode: the door state and a `tags × (1 + readings)` RSSI matrix
/// whose first column is the averaged baseline.
pub fn simulate_rfid<R: Rng>(model: &RfidModel, tags: usize, open: bool, rng: &mut R) -> Vec<Vec<f64>> {
    let noise = Normal::new(0.0, model.read_noise_db).expect("finite noise level");
    let r = model.readings.max(1);
    (0..tags)
        .map(|_| {
            let level: f64 = rng.random_range(-60.0..-40.0);
            let base = level + (0..r).map(|_| noise.sample(rng)).sum::<f64>() / r as f64;
            let shift = if open { model.open_shift_db } else { 0.0 };
            std::iter::once(base)
                .chain((0..r).map(|_| level + shift + noise.sample(rng)))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagSweepResult {
    pub tags: usize,
    pub accuracy: f64,
    pub dtmi: MIEstimate,
}

/// Detection accuracy and `I(W; differentials)` for 1..=`max_tags` tags.
/// The door is open with probability ½. Tag count `t` uses substream `t`.
pub fn rfid_tag_sweep(
    model: &RfidModel,
    max_tags: usize,
    trials: usize,
    config: &DetectorConfig,
    seed: RngSeed,
) -> Result<Vec<TagSweepResult>, PipelineError> {
    if max_tags == 0 {
        return Err(PipelineError::NoTags);
    }
    (1..=max_tags)
        .map(|tags| {
            let s = seed.substream(tags as u64);
            let runs: Vec<(bool, Vec<f64>, bool)> = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let mut rng = s.substream(t).rng();
                    let open = rng.random_bool(0.5);
                    let m = simulate_rfid(model, tags, open, &mut rng);
                    let diffs: Vec<f64> = m
                        .iter()
                        .map(|row| row[1..].iter().sum::<f64>() / (row.len() - 1) as f64 - row[0])
                        .collect();
                    let decided = rssi_detect(&m, None, config).map(|d| d.open);
                    (open, diffs, decided.unwrap_or(false))
                })
                .collect();
            let correct = runs.iter().filter(|r| r.0 == r.2).count();
            let w: Vec<Vec<f64>> = runs.iter().map(|r| vec![f64::from(u8::from(r.0))]).collect();
            let d: Vec<Vec<f64>> = runs.iter().map(|r| r.1.clone()).collect();
            Ok(TagSweepResult {
                tags,
                accuracy: correct as f64 / runs.len().max(1) as f64,
                dtmi: mixed_ksg(&PairedSamples::from_rows(&w, &d)?, 3)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(w: usize) -> DetectorConfig {
        DetectorConfig {
            window_len: w,
            ..DetectorConfig::default()
        }
    }

    #[test]
    fn cov_examples() {
        let win = [9.0, 11.0, 10.0, 8.0, 12.0];
        let row: Vec<f64> = win.iter().chain(win.iter()).copied().collect();
        let d = cov_detect(&[row.clone(), row], &cfg(5)).unwrap();
        assert_eq!(d.y, 1.0);
        assert!(!d.present);
        // Deviations doubled around the same mean: variance ×4.
        let wide: Vec<f64> = win.iter().map(|v| 10.0 + 2.0 * (v - 10.0)).collect();
        let row: Vec<f64> = win.iter().chain(wide.iter()).copied().collect();
        let d = cov_detect(&[row], &cfg(5)).unwrap();
        assert_eq!(d.y, 2.0);
        assert!(d.present);
        assert_eq!(DetectorConfig::default().threshold_low, 0.935);
        assert_eq!(DetectorConfig::default().threshold_high, 1.065);
    }

    #[test]
    fn cov_errors() {
        let zero = vec![1.0, -1.0, 1.0, -1.0];
        assert!(matches!(cov_detect(&[zero], &cfg(2)), Err(PipelineError::ZeroMeanSubcarrier(0))));
        assert!(matches!(cov_detect(&[vec![1.0; 3]], &cfg(2)), Err(PipelineError::WindowTooShort { .. })));
        assert!(matches!(cov_detect(&[vec![1.0; 8]], &cfg(1)), Err(PipelineError::WindowTooShort { .. })));
        let flat = cov_detect(&[vec![1.0; 4]], &cfg(2)).unwrap();
        assert_eq!(flat.y, 1.0);
    }

    #[test]
    fn rssi_examples() {
        let c = DetectorConfig::default();
        let d = rssi_detect(&[vec![-50.0, -50.0]], None, &c).unwrap();
        assert_eq!(d.mean_differential, 0.0);
        assert!(!d.open);
        assert!(rssi_detect(&[vec![-53.0]], Some(&[-50.0]), &c).unwrap().open);
        let d = rssi_detect(&[vec![1.0], vec![2.0], vec![12.0]], Some(&[1.0, 2.0, 3.0]), &c).unwrap();
        assert_eq!(d.mean_differential, 3.0);
        assert!(d.open);
        assert!(matches!(rssi_detect(&[], None, &c), Err(PipelineError::NoTags)));
    }

    #[test]
    fn tag_sweep_shape() {
        let r = rfid_tag_sweep(&RfidModel::default(), 3, 1000, &DetectorConfig::default(), RngSeed::new(1)).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r[2].accuracy > r[0].accuracy);
        assert!(r[0].accuracy > 0.6);
    }
}
