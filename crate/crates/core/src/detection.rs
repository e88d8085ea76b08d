//! Avalanche photodiode model and the hardware coincidence matcher.

use alloc::vec::Vec;

use rand::Rng;

use crate::apparatus::ConfigError;
use crate::rng::{self, SimRng, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DetectorConfig {
    pub efficiency_alice: f64,
    pub efficiency_bob: f64,
    /// counts/s
    pub dark_rate_alice: f64,
    /// counts/s
    pub dark_rate_bob: f64,
    /// Maximum separation, in seconds, for two clicks to count as a coincidence.
    pub coincidence_window: f64,
}

impl DetectorConfig {
    /// Dark rates and window of the bench detectors; efficiencies from the
    /// no-rotation singles/coincidence ratios.
    pub const fn bench() -> Self {
        Self {
            efficiency_alice: 0.0197,
            efficiency_bob: 0.0119,
            dark_rate_alice: 1300.0,
            dark_rate_bob: 600.0,
            coincidence_window: 20e-9,
        }
    }

    pub fn validate(self) -> Result<Self, ConfigError> {
        if !(self.efficiency_alice > 0.0 && self.efficiency_alice <= 1.0) {
            return Err(ConfigError::EfficiencyOutOfRange("efficiency_alice"));
        }
        if !(self.efficiency_bob > 0.0 && self.efficiency_bob <= 1.0) {
            return Err(ConfigError::EfficiencyOutOfRange("efficiency_bob"));
        }
        if !(self.dark_rate_alice >= 0.0) {
            return Err(ConfigError::Negative("dark_rate_alice"));
        }
        if !(self.dark_rate_bob >= 0.0) {
            return Err(ConfigError::Negative("dark_rate_bob"));
        }
        if !(self.coincidence_window > 0.0) {
            return Err(ConfigError::NonPositive("coincidence_window"));
        }
        Ok(self)
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self::bench()
    }
}

/// Singles and coincidences accumulated over `duration` seconds.
///
/// Counts are real-valued so that dark-subtracted records fit the same type.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CountRecord {
    pub singles_alice: f64,
    pub singles_bob: f64,
    pub coincidences: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetectionError {
    #[error("counts must be non-negative")]
    NegativeCount,
    #[error("coincidences exceed singles")]
    CoincidencesExceedSingles,
    #[error("duration must be positive")]
    NonPositiveDuration,
    #[error("{0:?} timestamps are not sorted")]
    Unsorted(crate::gating::Arm),
}

impl CountRecord {
    pub fn new(singles_alice: f64, singles_bob: f64, coincidences: f64, duration: f64) -> Result<Self, DetectionError> {
        if !(singles_alice >= 0.0 && singles_bob >= 0.0 && coincidences >= 0.0) {
            return Err(DetectionError::NegativeCount);
        }
        if coincidences > singles_alice.min(singles_bob) {
            return Err(DetectionError::CoincidencesExceedSingles);
        }
        if !(duration > 0.0) {
            return Err(DetectionError::NonPositiveDuration);
        }
        Ok(Self { singles_alice, singles_bob, coincidences, duration })
    }

    /// A record of per-second rates.
    pub fn from_rates(singles_alice: f64, singles_bob: f64, coincidences: f64) -> Result<Self, DetectionError> {
        Self::new(singles_alice, singles_bob, coincidences, 1.0)
    }

    pub fn per_second(&self) -> [f64; 3] {
        [self.singles_alice / self.duration, self.singles_bob / self.duration, self.coincidences / self.duration]
    }

    pub fn counts(&self) -> [f64; 3] {
        [self.singles_alice, self.singles_bob, self.coincidences]
    }
}

/// Time-sorted click streams of both detectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectedStreams {
    pub alice: Vec<f64>,
    pub bob: Vec<f64>,
}

/// Merges two ascending sequences.
pub fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn is_sorted(ts: &[f64]) -> bool {
    ts.windows(2).all(|w| w[0] <= w[1])
}

/// Adds a Poisson dark process on `[0, duration)` to a signal stream.
pub fn add_dark_counts<R: Rng + ?Sized>(signal: &[f64], dark_rate: f64, duration: f64, rng: &mut R) -> Vec<f64> {
    let dark = rng::poisson_times(rng, dark_rate, 0.0, duration);
    if is_sorted(signal) {
        merge_sorted(signal, &dark)
    } else {
        let mut all = signal.to_vec();
        all.extend_from_slice(&dark);
        all.sort_by(f64::total_cmp);
        all
    }
}

fn thin<R: Rng + ?Sized>(times: &[f64], efficiency: f64, rng: &mut R) -> Vec<f64> {
    if efficiency >= 1.0 {
        return times.to_vec();
    }
    times.iter().copied().filter(|_| rng::uniform(rng) < efficiency).collect()
}

/// Each arriving photon clicks with its arm's efficiency; dark clicks are
/// added per arm. Every stochastic step has its own stream derived from `seed`.
pub fn detect(alice: &[f64], bob: &[f64], det: &DetectorConfig, duration: f64, seed: u64) -> DetectedStreams {
    let mut eff: SimRng = rng::stream(seed, Stream::Efficiency);
    let alice_sig = thin(alice, det.efficiency_alice, &mut eff);
    let bob_sig = thin(bob, det.efficiency_bob, &mut eff);
    DetectedStreams {
        alice: add_dark_counts(&alice_sig, det.dark_rate_alice, duration, &mut rng::stream(seed, Stream::DarkAlice)),
        bob: add_dark_counts(&bob_sig, det.dark_rate_bob, duration, &mut rng::stream(seed, Stream::DarkBob)),
    }
}

/// Greedy earliest-first one-to-one matching of clicks with `|t_a - t_b| < window`.
pub fn match_coincidences(alice: &[f64], bob: &[f64], window: f64) -> Result<u64, DetectionError> {
    if !is_sorted(alice) {
        return Err(DetectionError::Unsorted(crate::gating::Arm::Alice));
    }
    if !is_sorted(bob) {
        return Err(DetectionError::Unsorted(crate::gating::Arm::Bob));
    }
    let (mut i, mut j, mut n) = (0, 0, 0u64);
    while i < alice.len() && j < bob.len() {
        let (a, b) = (alice[i], bob[j]);
        if (a - b).abs() < window {
            n += 1;
            i += 1;
            j += 1;
        } else if a < b {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(n)
}
