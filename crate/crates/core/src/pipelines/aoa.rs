//! Direction classification with a uniform linear array and MUSIC.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::bounds::fano_lower_tight;
use crate::knn_mi::{estimate_dtmi, EstimatorConfig};
use crate::rng::RngSeed;
use crate::stats::{wilson_interval, Interval};
use crate::types::{MIEstimate, PairedSamples};

pub type C64 = Complex<f64>;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Slack on range checks so that computed endpoints such as `π/2` pass.
const ANGLE_SLACK: f64 = 1e-12;

pub const DEFAULT_GRID_STEP: f64 = 0.5 * PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArrayGeometry {
    pub q: usize,
    pub spacing_m: f64,
    pub wavelength_m: f64,
}

impl ArrayGeometry {
    pub fn new(q: usize, spacing_m: f64, wavelength_m: f64) -> Result<Self, PipelineError> {
        if q < 2 {
            return Err(PipelineError::InvalidArguments(format!("array needs q >= 2, got {q}")));
        }
        if !(spacing_m > 0.0 && wavelength_m > 0.0) {
            return Err(PipelineError::InvalidArguments("spacing and wavelength must be positive".into()));
        }
        Ok(Self {
            q,
            spacing_m,
            wavelength_m,
        })
    }

    /// `q` antennas at half-wavelength spacing for carrier `freq_hz`.
    pub fn half_wavelength(q: usize, freq_hz: f64) -> Result<Self, PipelineError> {
        let wl = SPEED_OF_LIGHT / freq_hz;
        Self::new(q, wl / 2.0, wl)
    }

    /// Three antennas at 5 GHz.
    pub fn default_5ghz() -> Self {
        Self::half_wavelength(3, 5e9).expect("valid constants")
    }

    /// A warning when the spacing exceeds half a wavelength.
    pub fn ambiguity_warning(&self) -> Option<String> {
        (self.spacing_m > self.wavelength_m / 2.0 * (1.0 + 1e-9)).then(|| {
            format!(
                "spacing {} m exceeds half the wavelength ({} m); the scan has grating lobes",
                self.spacing_m,
                self.wavelength_m / 2.0
            )
        })
    }
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        Self::default_5ghz()
    }
}

/// ULA response: element `p` is `exp(−j 2π p d sin θ / λ)`.
pub fn steering_vector(geometry: &ArrayGeometry, theta: f64) -> Result<DVector<C64>, PipelineError> {
    if !(theta.abs() <= FRAC_PI_2 + ANGLE_SLACK) {
        return Err(PipelineError::OutOfRange(theta));
    }
    Ok(steering_unchecked(geometry, theta))
}

fn steering_unchecked(g: &ArrayGeometry, theta: f64) -> DVector<C64> {
    let k = -2.0 * PI * g.spacing_m * theta.sin() / g.wavelength_m;
    DVector::from_fn(g.q, |p, _| Complex::from_polar(1.0, k * p as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AoAScenario {
    pub geometry: ArrayGeometry,
    /// Per-snapshot SNR at 1 m; `±∞` are accepted.
    pub snr_db: f64,
    pub snapshots: usize,
    pub m_classes: usize,
    pub angle_range: (f64, f64),
    pub target_distance_m: f64,
    pub pathloss_exponent: f64,
}

impl Default for AoAScenario {
    fn default() -> Self {
        Self {
            geometry: ArrayGeometry::default_5ghz(),
            snr_db: 10.0,
            snapshots: 16,
            m_classes: 9,
            angle_range: (-FRAC_PI_2, FRAC_PI_2),
            target_distance_m: 1.0,
            pathloss_exponent: 2.0,
        }
    }
}

impl AoAScenario {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.m_classes < 2 {
            return Err(PipelineError::InvalidArguments("m_classes must be >= 2".into()));
        }
        if self.snapshots < self.geometry.q {
            return Err(PipelineError::RankDeficient {
                snapshots: self.snapshots,
                q: self.geometry.q,
            });
        }
        let (lo, hi) = self.angle_range;
        if !(lo < hi && lo >= -FRAC_PI_2 - ANGLE_SLACK && hi <= FRAC_PI_2 + ANGLE_SLACK) {
            return Err(PipelineError::InvalidArguments(format!("angle range ({lo}, {hi})")));
        }
        if !(self.target_distance_m > 0.0) || self.snr_db.is_nan() || !self.pathloss_exponent.is_finite() {
            return Err(PipelineError::InvalidArguments("distance, SNR or path-loss exponent".into()));
        }
        Ok(())
    }

    /// Signal amplitude relative to unit-power noise.
    pub fn amplitude(&self) -> f64 {
        let path = (1.0 / self.target_distance_m).powf(self.pathloss_exponent / 2.0);
        if self.snr_db == f64::INFINITY {
            path
        } else {
            path * 10f64.powf(self.snr_db / 20.0)
        }
    }

    fn noise_std(&self) -> f64 {
        if self.snr_db == f64::INFINITY {
            0.0
        } else {
            1.0
        }
    }
}

/// `q × snapshots` array output for a point source at `theta_true`:
/// `amplitude · a(θ) · s_t` plus circular complex Gaussian noise.
pub fn simulate_snapshots(
    scenario: &AoAScenario,
    theta_true: f64,
    seed: RngSeed,
) -> Result<DMatrix<C64>, PipelineError> {
    scenario.validate()?;
    let a = steering_vector(&scenario.geometry, theta_true)?;
    let mut rng = seed.rng();
    Ok(snapshots_with(scenario, &a, &mut rng))
}

fn snapshots_with<R: Rng>(scenario: &AoAScenario, a: &DVector<C64>, rng: &mut R) -> DMatrix<C64> {
    let q = scenario.geometry.q;
    let amp = scenario.amplitude();
    let sd = scenario.noise_std() * std::f64::consts::FRAC_1_SQRT_2;
    let mut x = DMatrix::zeros(q, scenario.snapshots);
    for t in 0..scenario.snapshots {
        let s = Complex::from_polar(amp, rng.random_range(0.0..2.0 * PI));
        for p in 0..q {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            x[(p, t)] = a[p] * s + Complex::new(sd * re, sd * im);
        }
    }
    x
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MusicSpectrum {
    pub angles: Vec<f64>,
    pub pseudospectrum: Vec<f64>,
    /// `a^H E_n E_n^H a` at each grid angle.
    denominators: Vec<f64>,
}

impl MusicSpectrum {
    /// Grid angle with the largest pseudospectrum value (first on ties).
    pub fn peak_on_grid(&self) -> f64 {
        self.angles[self.peak_index()]
    }

    fn peak_index(&self) -> usize {
        let mut best = 0;
        for (i, &d) in self.denominators.iter().enumerate() {
            if d < self.denominators[best] {
                best = i;
            }
        }
        best
    }

    /// Peak refined by a parabola through the denominator at the grid
    /// minimum and its two neighbours.
    pub fn peak(&self) -> f64 {
        let i = self.peak_index();
        let d = &self.denominators;
        if i == 0 || i + 1 == d.len() {
            return self.angles[i];
        }
        let (l, c, r) = (d[i - 1], d[i], d[i + 1]);
        let curv = l - 2.0 * c + r;
        if !(curv > 0.0) {
            return self.angles[i];
        }
        let step = self.angles[i + 1] - self.angles[i];
        let off = (0.5 * (l - r) / curv).clamp(-0.5, 0.5);
        (self.angles[i] + off * step).clamp(-FRAC_PI_2, FRAC_PI_2)
    }
}

/// Angle grid over `[−π/2, π/2]` with the given step; both ends included.
pub fn angle_grid(step: f64) -> Vec<f64> {
    let n = (PI / step).round() as usize;
    (0..=n)
        .map(|k| if k == n { FRAC_PI_2 } else { -FRAC_PI_2 + k as f64 * step })
        .collect()
}

/// MUSIC pseudospectrum `1 / (a^H E_n E_n^H a)` over an angle grid, where
/// `E_n` spans the eigenvectors of the `q − n_sources` smallest eigenvalues of
/// the sample covariance.
pub fn music_spectrum(
    snapshots: &DMatrix<C64>,
    geometry: &ArrayGeometry,
    n_sources: usize,
    grid_step_rad: f64,
) -> Result<MusicSpectrum, PipelineError> {
    let q = snapshots.nrows();
    if q != geometry.q {
        return Err(PipelineError::InvalidArguments(format!(
            "snapshot matrix has {q} rows but the array has {}",
            geometry.q
        )));
    }
    if snapshots.ncols() < q {
        return Err(PipelineError::RankDeficient {
            snapshots: snapshots.ncols(),
            q,
        });
    }
    if n_sources == 0 || n_sources >= q {
        return Err(PipelineError::InvalidArguments(format!("n_sources must be in 1..{q}")));
    }
    if !(grid_step_rad > 0.0 && grid_step_rad <= FRAC_PI_2) {
        return Err(PipelineError::InvalidArguments(format!("grid step {grid_step_rad}")));
    }
    let t = snapshots.ncols() as f64;
    let cov = snapshots * snapshots.adjoint() / Complex::new(t, 0.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let noise: Vec<DVector<C64>> = order[..q - n_sources]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    let angles = angle_grid(grid_step_rad);
    let denominators: Vec<f64> = angles
        .iter()
        .map(|&th| {
            let a = steering_unchecked(geometry, th);
            noise.iter().map(|e| e.dotc(&a).norm_sqr()).sum::<f64>()
        })
        .collect();
    let pseudospectrum = denominators.iter().map(|d| 1.0 / d.max(f64::MIN_POSITIVE)).collect();
    Ok(MusicSpectrum {
        angles,
        pseudospectrum,
        denominators,
    })
}

/// Uniform bin of `theta` within `range`: left-closed, right-open, with the
/// last bin closed.
pub fn angle_to_class(theta: f64, m_classes: usize, angle_range: (f64, f64)) -> Result<usize, PipelineError> {
    let (lo, hi) = angle_range;
    if m_classes == 0 || !(lo < hi) {
        return Err(PipelineError::InvalidArguments("empty class range".into()));
    }
    if !(theta >= lo - ANGLE_SLACK && theta <= hi + ANGLE_SLACK) {
        return Err(PipelineError::OutOfRange(theta));
    }
    let pos = ((theta - lo) / (hi - lo) * m_classes as f64).floor();
    Ok((pos.max(0.0) as usize).min(m_classes - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Swept quantity (SNR in dB, distance in m, ...), echoed in the output.
    pub value: f64,
    pub scenario: AoAScenario,
}

/// Copies of `base` at each SNR.
pub fn snr_sweep(base: &AoAScenario, snrs_db: &[f64]) -> Vec<SweepPoint> {
    snrs_db
        .iter()
        .map(|&snr_db| SweepPoint {
            value: snr_db,
            scenario: AoAScenario { snr_db, ..*base },
        })
        .collect()
}

/// Copies of `base` at each target distance.
pub fn distance_sweep(base: &AoAScenario, distances_m: &[f64]) -> Vec<SweepPoint> {
    distances_m
        .iter()
        .map(|&target_distance_m| SweepPoint {
            value: target_distance_m,
            scenario: AoAScenario {
                target_distance_m,
                ..*base
            },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub value: f64,
    pub accuracy: f64,
    pub accuracy_ci: Interval,
    pub dtmi: MIEstimate,
    pub fano_lower: f64,
}

/// One direction-classification episode: true class, true angle and the
/// MUSIC estimate.
fn aoa_trial(scenario: &AoAScenario, step: f64, seed: RngSeed) -> (usize, f64) {
    let mut rng = seed.rng();
    let m = scenario.m_classes;
    let (lo, hi) = scenario.angle_range;
    let w = rng.random_range(0..m);
    let width = (hi - lo) / m as f64;
    let theta = lo + width * (w as f64 + rng.random::<f64>());
    let a = steering_unchecked(&scenario.geometry, theta);
    let x = snapshots_with(scenario, &a, &mut rng);
    let spec = music_spectrum(&x, &scenario.geometry, 1, step).expect("validated scenario");
    (w, spec.peak())
}

/// Monte Carlo accuracy, DTMI between true class and estimated angle, and the
/// tight Fano bound at each sweep point.
///
/// Point `p`, trial `t` uses substream `t` of substream `p` of `seed`.
pub fn aoa_sweep(
    points: &[SweepPoint],
    trials_per_point: usize,
    estimator: &EstimatorConfig,
    grid_step_rad: f64,
    seed: RngSeed,
) -> Result<Vec<SweepResult>, PipelineError> {
    if points.len() < 4 {
        return Err(PipelineError::TooFewPoints(points.len()));
    }
    for p in points {
        p.scenario.validate()?;
    }
    points
        .iter()
        .enumerate()
        .map(|(pi, p)| {
            let s = &p.scenario;
            let point_seed = seed.substream(pi as u64);
            let runs: Vec<(usize, f64)> = (0..trials_per_point as u64)
                .into_par_iter()
                .map(|t| aoa_trial(s, grid_step_rad, point_seed.substream(t)))
                .collect();
            let mut correct = 0u64;
            for &(w, th) in &runs {
                if angle_to_class(th, s.m_classes, s.angle_range)? == w {
                    correct += 1;
                }
            }
            let classes: Vec<f64> = runs.iter().map(|r| r.0 as f64).collect();
            let est: Vec<f64> = runs.iter().map(|r| r.1).collect();
            let dtmi = estimate_dtmi(&PairedSamples::from_columns(&classes, &est)?, estimator)?;
            let h_w = (s.m_classes as f64).log2();
            Ok(SweepResult {
                value: p.value,
                accuracy: correct as f64 / runs.len() as f64,
                accuracy_ci: wilson_interval(correct, runs.len() as u64),
                fano_lower: fano_lower_tight(h_w, dtmi.bits, s.m_classes)?,
                dtmi,
            })
        })
        .collect()
}
