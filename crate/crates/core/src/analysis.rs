//! Count arithmetic: dark subtraction, degradation ratios, accidental
//! estimates and the 16-cell two-channel CHSH estimator with Poisson errors.

use crate::detection::CountRecord;
use crate::math::sqrt;

/// Alice polarizer angles, degrees (table columns).
pub const ALICE_ANGLES: [f64; 4] = [0.0, 45.0, 90.0, 135.0];
/// Bob polarizer angles, degrees (table rows).
pub const BOB_ANGLES: [f64; 4] = [22.5, 67.5, 112.5, 157.5];

const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("all four counts are zero")]
    AllZero,
    #[error("{0} is zero after dark subtraction")]
    ZeroDenominator(&'static str),
    #[error("angle {0} is not on the measurement grid")]
    AngleNotOnGrid(f64),
}

/// Subtracts the dark rate, scaled to `raw.duration`, from each column; floors at 0.
pub fn dark_subtract(raw: &CountRecord, dark: &CountRecord) -> CountRecord {
    let dark_rates = dark.per_second();
    let [a, b, c] = raw.counts();
    let sub = |x: f64, rate: f64| (x - rate * raw.duration).max(0.0);
    CountRecord {
        singles_alice: sub(a, dark_rates[0]),
        singles_bob: sub(b, dark_rates[1]),
        coincidences: sub(c, dark_rates[2]),
        duration: raw.duration,
    }
}

/// A ratio with its propagated one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ratio {
    pub value: f64,
    pub sigma: f64,
}

/// Signal with rotation over signal without, per column.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Degradation {
    pub singles_alice: Ratio,
    pub singles_bob: Ratio,
    pub coincidences: Ratio,
}

/// Dark-subtracted per-column ratio `with / without`.
///
/// Uncertainties treat raw and dark counts as Poisson over each record's own
/// duration. Records given as per-second rates (duration 1) therefore assume
/// one second of integration.
pub fn degradation_ratio(
    with_rotation: &CountRecord,
    without: &CountRecord,
    dark: &CountRecord,
) -> Result<Degradation, AnalysisError> {
    let num = dark_subtract(with_rotation, dark);
    let den = dark_subtract(without, dark);
    let variance = |raw: &CountRecord, col: usize| {
        let scale = raw.duration / dark.duration;
        raw.counts()[col] + dark.counts()[col] * scale * scale
    };
    const NAMES: [&str; 3] = ["singles_alice", "singles_bob", "coincidences"];
    let mut out = [Ratio { value: 0.0, sigma: 0.0 }; 3];
    for col in 0..3 {
        let n = num.counts()[col] / num.duration;
        let d = den.counts()[col] / den.duration;
        if d <= 0.0 {
            return Err(AnalysisError::ZeroDenominator(NAMES[col]));
        }
        let value = n / d;
        let rel_num = if num.counts()[col] > 0.0 {
            variance(with_rotation, col) / (num.counts()[col] * num.counts()[col])
        } else {
            0.0
        };
        let rel_den = variance(without, col) / (den.counts()[col] * den.counts()[col]);
        let sigma = if value > 0.0 {
            value * sqrt(rel_num + rel_den)
        } else {
            // zero numerator: bound by one count of noise
            sqrt(variance(with_rotation, col)) / num.duration / d
        };
        out[col] = Ratio { value, sigma };
    }
    Ok(Degradation { singles_alice: out[0], singles_bob: out[1], coincidences: out[2] })
}

/// How the coincidence window maps to an accidental rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AccidentalConvention {
    /// `r1 r2 tau`
    Single,
    /// `r1 r2 2 tau`; what a `|t_a - t_b| < tau` matcher produces
    #[default]
    Double,
}

pub fn accidental_rate(r1: f64, r2: f64, window: f64, convention: AccidentalConvention) -> f64 {
    let width = match convention {
        AccidentalConvention::Single => window,
        AccidentalConvention::Double => 2.0 * window,
    };
    r1 * r2 * width
}

/// Accidental rate when each arm's signal clicks arrive only inside gate
/// windows open a fraction `duty` of the time, while dark clicks are uniform.
///
/// Signal-signal accidentals are enhanced by `1 / duty` over the estimate from
/// time-averaged singles. `duty = 1` reduces to [`accidental_rate`].
pub fn gated_accidental_rate(
    singles: [f64; 2],
    dark: [f64; 2],
    window: f64,
    duty: f64,
    convention: AccidentalConvention,
) -> f64 {
    let signal_a = (singles[0] - dark[0]).max(0.0);
    let signal_b = (singles[1] - dark[1]).max(0.0);
    let uniform = accidental_rate(singles[0], singles[1], window, convention);
    uniform + accidental_rate(signal_a, signal_b, window, convention) * (1.0 / duty - 1.0)
}

/// Correlation estimate with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Correlation {
    pub e: f64,
    pub sigma: f64,
}

/// `E = (c_ab + c_a'b' - c_ab' - c_a'b) / total` where primes are the +90 degree
/// partners, with each count's variance taken as the count itself.
pub fn correlation_e(
    c_ab: f64,
    c_aperp_bperp: f64,
    c_a_bperp: f64,
    c_aperp_b: f64,
) -> Result<Correlation, AnalysisError> {
    correlation_e_with_variances(
        [c_ab, c_aperp_bperp, c_a_bperp, c_aperp_b],
        [c_ab, c_aperp_bperp, c_a_bperp, c_aperp_b],
    )
}

/// As [`correlation_e`] with explicit per-count variances (same order).
pub fn correlation_e_with_variances(counts: [f64; 4], variances: [f64; 4]) -> Result<Correlation, AnalysisError> {
    let agree = counts[0] + counts[1];
    let disagree = counts[2] + counts[3];
    let total = agree + disagree;
    if !(total > 0.0) {
        return Err(AnalysisError::AllZero);
    }
    let e = (agree - disagree) / total;
    // dE/dc = +2 disagree / total^2 for agreeing cells, -2 agree / total^2 otherwise
    let t2 = total * total;
    let d_agree = 2.0 * disagree / t2;
    let d_disagree = 2.0 * agree / t2;
    let var =
        d_agree * d_agree * (variances[0] + variances[1]) + d_disagree * d_disagree * (variances[2] + variances[3]);
    Ok(Correlation { e, sigma: sqrt(var) })
}

/// Variance assigned to an accidental-corrected count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum VarianceModel {
    /// The corrected count itself.
    #[default]
    Corrected,
    /// Raw count plus the subtracted accidental estimate.
    Conservative,
}

/// Coincidence counts over the 4 x 4 polarizer grid, with accidental estimates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CountTable16 {
    /// `counts[alice][bob]` indexed like [`ALICE_ANGLES`] and [`BOB_ANGLES`].
    pub counts: [[u64; 4]; 4],
    pub accidentals: [[f64; 4]; 4],
    /// Seconds per cell.
    pub integration_time: f64,
}

fn grid_index(grid: &[f64; 4], deg: f64) -> Option<usize> {
    let folded = crate::math::wrap(deg, 180.0);
    grid.iter().position(|g| (g - folded).abs() < ANGLE_TOL)
}

impl CountTable16 {
    pub fn from_fn(integration_time: f64, mut cell: impl FnMut(f64, f64) -> (u64, f64)) -> Self {
        let mut counts = [[0; 4]; 4];
        let mut accidentals = [[0.0; 4]; 4];
        for (i, &a) in ALICE_ANGLES.iter().enumerate() {
            for (j, &b) in BOB_ANGLES.iter().enumerate() {
                let (c, acc) = cell(a, b);
                counts[i][j] = c;
                accidentals[i][j] = acc;
            }
        }
        Self { counts, accidentals, integration_time }
    }

    /// Cell indices for a setting; angles are taken mod 180.
    pub fn index(&self, alice_deg: f64, bob_deg: f64) -> Result<(usize, usize), AnalysisError> {
        let i = grid_index(&ALICE_ANGLES, alice_deg).ok_or(AnalysisError::AngleNotOnGrid(alice_deg))?;
        let j = grid_index(&BOB_ANGLES, bob_deg).ok_or(AnalysisError::AngleNotOnGrid(bob_deg))?;
        Ok((i, j))
    }

    /// Accidental-subtracted count, floored at zero, and its variance.
    pub fn corrected(
        &self,
        alice_deg: f64,
        bob_deg: f64,
        variance: VarianceModel,
    ) -> Result<(f64, f64), AnalysisError> {
        let (i, j) = self.index(alice_deg, bob_deg)?;
        let raw = self.counts[i][j] as f64;
        let acc = self.accidentals[i][j];
        let c = (raw - acc).max(0.0);
        let v = match variance {
            VarianceModel::Corrected => c,
            VarianceModel::Conservative => raw + acc,
        };
        Ok((c, v))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Multiplies every count and accidental by `factor` (rounded counts).
    pub fn scaled(&self, factor: u64) -> Self {
        let mut out = self.clone();
        for i in 0..4 {
            for j in 0..4 {
                out.counts[i][j] *= factor;
                out.accidentals[i][j] *= factor as f64;
            }
        }
        out
    }
}

/// CHSH settings: Alice `a`, `a'`; Bob `b`, `b'`, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChshSettings {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl Default for ChshSettings {
    fn default() -> Self {
        Self { a: 0.0, a_prime: 45.0, b: 22.5, b_prime: 67.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChshResult {
    pub settings: ChshSettings,
    /// `E(a,b), E(a,b'), E(a',b), E(a',b')`
    pub e_values: [f64; 4],
    pub e_sigmas: [f64; 4],
    pub s: f64,
    pub s_sigma: f64,
}

/// Correlation at one setting from the table's four `+90` partner cells.
pub fn table_correlation(
    table: &CountTable16,
    alice_deg: f64,
    bob_deg: f64,
    variance: VarianceModel,
) -> Result<Correlation, AnalysisError> {
    let cell = |a: f64, b: f64| table.corrected(a, b, variance);
    let (c0, v0) = cell(alice_deg, bob_deg)?;
    let (c1, v1) = cell(alice_deg + 90.0, bob_deg + 90.0)?;
    let (c2, v2) = cell(alice_deg, bob_deg + 90.0)?;
    let (c3, v3) = cell(alice_deg + 90.0, bob_deg)?;
    correlation_e_with_variances([c0, c1, c2, c3], [v0, v1, v2, v3])
}

/// `S = |E(a,b) - E(a,b')| + |E(a',b) + E(a',b')|` with `sigma_S^2 = sum sigma_E^2`.
pub fn chsh_s(
    table: &CountTable16,
    settings: ChshSettings,
    variance: VarianceModel,
) -> Result<ChshResult, AnalysisError> {
    let ChshSettings { a, a_prime, b, b_prime } = settings;
    let pairs = [(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)];
    let mut e_values = [0.0; 4];
    let mut e_sigmas = [0.0; 4];
    for (k, (x, y)) in pairs.into_iter().enumerate() {
        let c = table_correlation(table, x, y, variance)?;
        e_values[k] = c.e;
        e_sigmas[k] = c.sigma;
    }
    let s = (e_values[0] - e_values[1]).abs() + (e_values[2] + e_values[3]).abs();
    let s_sigma = sqrt(e_sigmas.iter().map(|x| x * x).sum());
    Ok(ChshResult { settings, e_values, e_sigmas, s, s_sigma })
}
