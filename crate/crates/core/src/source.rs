//! Pair emission and joint polarization outcomes under pluggable correlation models.
//!
//! Outcomes are at the level of pass/block probabilities behind a single
//! transmitting polarizer per arm (two-channel setup). Angles are in degrees.

use alloc::boxed::Box;

use rand::Rng;

use crate::apparatus::ConfigError;
use crate::gating::GateState;
use crate::math::{cos, deg_to_rad, wrap, PI};
use crate::rng::{self, SimRng};

/// Correlation kernel of the entangled state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SignConvention {
    /// `cos 2(a - b)`
    Plus,
    /// `-cos 2(a - b)`
    Minus,
    /// `cos 2(a + b)`; fits the measured 16-cell table
    #[default]
    Mirrored,
}

impl SignConvention {
    pub fn kernel(self, alice_deg: f64, bob_deg: f64) -> f64 {
        match self {
            Self::Plus => cos(2.0 * deg_to_rad(alice_deg - bob_deg)),
            Self::Minus => -cos(2.0 * deg_to_rad(alice_deg - bob_deg)),
            Self::Mirrored => cos(2.0 * deg_to_rad(alice_deg + bob_deg)),
        }
    }
}

/// Propagation speed of a hypothesised detector-to-source influence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfluenceSpeed {
    Instantaneous,
    /// m/s
    Finite(f64),
}

impl InfluenceSpeed {
    /// Time to cover `distance`; zero when instantaneous.
    pub fn travel_time(self, distance: f64) -> f64 {
        match self {
            Self::Instantaneous => 0.0,
            Self::Finite(v) => distance / v,
        }
    }

    pub fn is_valid(self) -> bool {
        match self {
            Self::Instantaneous => true,
            Self::Finite(v) => v > 0.0,
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for InfluenceSpeed {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Instantaneous => s.serialize_str("instant"),
            Self::Finite(v) => s.serialize_f64(*v),
        }
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for InfluenceSpeed {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = InfluenceSpeed;

            fn expecting(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
                f.write_str("a speed in m/s or \"instant\"")
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Self::Value, E> {
                parse_influence_speed(v).ok_or_else(|| E::custom("invalid speed syntax"))
            }

            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Ok(InfluenceSpeed::Finite(v))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(InfluenceSpeed::Finite(v as f64))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(InfluenceSpeed::Finite(v as f64))
            }
        }
        d.deserialize_any(Visitor)
    }
}

/// Parses `instant` / `instantaneous` / `inf`, or a positive number of m/s.
pub fn parse_influence_speed(text: &str) -> Option<InfluenceSpeed> {
    let t = text.trim();
    match t {
        "instant" | "instantaneous" | "inf" | "infinite" => Some(InfluenceSpeed::Instantaneous),
        _ => t.parse::<f64>().ok().filter(|v| *v > 0.0).map(|v| {
            if v.is_infinite() {
                InfluenceSpeed::Instantaneous
            } else {
                InfluenceSpeed::Finite(v)
            }
        }),
    }
}

/// How the two photons' polarizer outcomes are correlated.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields))]
pub enum CorrelationModel {
    /// Entangled state with joint pass probability `(1 + V K(a, b)) / 4`.
    Quantum {
        #[cfg_attr(feature = "serde", serde(default))]
        convention: SignConvention,
        visibility: f64,
    },
    /// Shared hidden polarization; each photon passes with Malus probability.
    MalusLhv,
    /// Shared hidden polarization; deterministic pass iff `cos 2(theta - setting) > 0`.
    ThresholdLhv,
    /// Pairs emitted while a detector-to-source influence is present follow
    /// `informed`, all others `uninformed`.
    TravelingInfluence {
        #[cfg_attr(feature = "serde", serde(alias = "base"))]
        informed: Box<CorrelationModel>,
        uninformed: Box<CorrelationModel>,
        influence_speed: InfluenceSpeed,
    },
}

impl CorrelationModel {
    pub const fn quantum(convention: SignConvention, visibility: f64) -> Self {
        Self::Quantum { convention, visibility }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            Self::Quantum { visibility, .. } => {
                if (0.0..=1.0).contains(visibility) {
                    Ok(())
                } else {
                    Err(ConfigError::VisibilityOutOfRange)
                }
            }
            Self::MalusLhv | Self::ThresholdLhv => Ok(()),
            Self::TravelingInfluence { informed, uninformed, influence_speed } => {
                if !influence_speed.is_valid() {
                    return Err(ConfigError::NonPositiveInfluenceSpeed);
                }
                if matches!(**informed, Self::TravelingInfluence { .. })
                    || matches!(**uninformed, Self::TravelingInfluence { .. })
                {
                    return Err(ConfigError::NestedInfluence);
                }
                informed.validate()?;
                uninformed.validate()
            }
        }
    }

    /// The model governing a pair with the given hidden state.
    pub fn resolve(&self, hidden: &HiddenState) -> &CorrelationModel {
        match self {
            Self::TravelingInfluence { informed, uninformed, .. } => {
                if hidden.informed {
                    informed
                } else {
                    uninformed
                }
            }
            other => other,
        }
    }
}

/// Model-dependent per-pair record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenState {
    /// Shared hidden polarization angle in radians, uniform on `[0, pi)`.
    pub theta: f64,
    /// Whether a detector-to-source influence was present at emission.
    pub informed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEvent {
    /// Seconds since run start.
    pub emission_time: f64,
    pub hidden: HiddenState,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SourceError {
    #[error("pair rate must be positive")]
    NonPositiveRate,
    #[error("duration must be non-negative")]
    NegativeDuration,
    #[error("no closed-form correlation for a time-dependent model")]
    UnsupportedModel,
}

/// Homogeneous Poisson stream of pair emissions on `[0, duration)`.
#[derive(Debug, Clone)]
pub struct EmissionStream<R> {
    rng: R,
    rate: f64,
    duration: f64,
    t: f64,
}

impl<R: Rng> EmissionStream<R> {
    pub fn new(rng: R, rate: f64, duration: f64) -> Result<Self, SourceError> {
        if !(rate > 0.0) {
            return Err(SourceError::NonPositiveRate);
        }
        if !(duration >= 0.0) {
            return Err(SourceError::NegativeDuration);
        }
        Ok(Self { rng, rate, duration, t: 0.0 })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl<R: Rng> Iterator for EmissionStream<R> {
    type Item = PairEvent;

    fn next(&mut self) -> Option<PairEvent> {
        self.t += rng::exponential(&mut self.rng, self.rate);
        if self.t >= self.duration {
            // pin past the end so later calls stay exhausted
            self.t = f64::INFINITY;
            return None;
        }
        let theta = PI * rng::uniform(&mut self.rng);
        Some(PairEvent { emission_time: self.t, hidden: HiddenState { theta, informed: true } })
    }
}

/// Seeded emission stream; deterministic for a fixed seed.
pub fn sample_emissions(rate: f64, duration: f64, seed: u64) -> Result<EmissionStream<SimRng>, SourceError> {
    EmissionStream::new(rng::from_seed(seed), rate, duration)
}

/// Draws `(alice_pass, bob_pass)` for one pair.
pub fn joint_outcome<R: Rng + ?Sized>(
    model: &CorrelationModel,
    alice_deg: f64,
    bob_deg: f64,
    hidden: &HiddenState,
    rng: &mut R,
) -> (bool, bool) {
    match model.resolve(hidden) {
        CorrelationModel::Quantum { convention, visibility } => {
            let vk = visibility * convention.kernel(alice_deg, bob_deg);
            let both = 0.25 * (1.0 + vk);
            let split = 0.25 * (1.0 - vk);
            let u = rng::uniform(rng);
            if u < both {
                (true, true)
            } else if u < 0.5 {
                (true, false)
            } else if u < 0.5 + split {
                (false, true)
            } else {
                (false, false)
            }
        }
        CorrelationModel::MalusLhv => {
            let pa = malus(hidden.theta, alice_deg);
            let pb = malus(hidden.theta, bob_deg);
            (rng::uniform(rng) < pa, rng::uniform(rng) < pb)
        }
        CorrelationModel::ThresholdLhv => (threshold(hidden.theta, alice_deg), threshold(hidden.theta, bob_deg)),
        // resolve() never yields a traveling model
        CorrelationModel::TravelingInfluence { .. } => unreachable!(),
    }
}

fn malus(theta: f64, setting_deg: f64) -> f64 {
    let c = cos(theta - deg_to_rad(setting_deg));
    c * c
}

fn threshold(theta: f64, setting_deg: f64) -> bool {
    cos(2.0 * (theta - deg_to_rad(setting_deg))) > 0.0
}

/// Angle between two polarizer settings folded into `[0, 90]` degrees.
pub fn folded_difference(alice_deg: f64, bob_deg: f64) -> f64 {
    let d = wrap(alice_deg - bob_deg, 180.0);
    if d > 90.0 {
        180.0 - d
    } else {
        d
    }
}

/// Expected `E = P(agree) - P(disagree)` under the 16-cell estimator.
pub fn correlation_theory(model: &CorrelationModel, alice_deg: f64, bob_deg: f64) -> Result<f64, SourceError> {
    match model {
        CorrelationModel::Quantum { convention, visibility } => Ok(visibility * convention.kernel(alice_deg, bob_deg)),
        CorrelationModel::MalusLhv => Ok(0.5 * cos(2.0 * deg_to_rad(alice_deg - bob_deg))),
        CorrelationModel::ThresholdLhv => Ok(1.0 - folded_difference(alice_deg, bob_deg) / 45.0),
        CorrelationModel::TravelingInfluence { .. } => Err(SourceError::UnsupportedModel),
    }
}

/// Exact probability that both photons pass their polarizers.
pub fn joint_pass_probability(model: &CorrelationModel, alice_deg: f64, bob_deg: f64) -> Result<f64, SourceError> {
    match model {
        CorrelationModel::Quantum { .. } | CorrelationModel::MalusLhv | CorrelationModel::ThresholdLhv => {
            // marginals are 1/2 for every stationary model here, so
            // P(pass, pass) = (1 + E) / 4
            correlation_theory(model, alice_deg, bob_deg).map(|e| 0.25 * (1.0 + e))
        }
        CorrelationModel::TravelingInfluence { .. } => Err(SourceError::UnsupportedModel),
    }
}

/// Decides which emissions carry the detector-to-source influence.
///
/// The influence leaves the slit when a gate window opens, reaches the source
/// after `delay`, and persists for one aperture time. Without rotation the line
/// of sight is permanent and every emission is informed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfluenceSchedule {
    pub gate: Option<GateState>,
    /// Slit-to-source travel time of the influence.
    pub delay: f64,
}

impl InfluenceSchedule {
    pub fn is_informed(&self, emission_time: f64) -> bool {
        match &self.gate {
            None => true,
            Some(g) => g.is_open(emission_time - self.delay),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    const N: usize = 1_000_000;

    fn sigma_binomial(p: f64, n: usize) -> f64 {
        libm::sqrt(p * (1.0 - p) / n as f64)
    }

    fn mc_stats(model: &CorrelationModel, a: f64, b: f64, seed: u64, n: usize) -> (f64, f64, f64, f64) {
        let mut rng = rng::from_seed(seed);
        let (mut pp, mut pa, mut pb, mut agree) = (0usize, 0usize, 0usize, 0usize);
        for _ in 0..n {
            let hidden = HiddenState { theta: PI * rng::uniform(&mut rng), informed: true };
            let (x, y) = joint_outcome(model, a, b, &hidden, &mut rng);
            pp += usize::from(x && y);
            pa += usize::from(x);
            pb += usize::from(y);
            agree += usize::from(x == y);
        }
        let n = n as f64;
        (pp as f64 / n, pa as f64 / n, pb as f64 / n, 2.0 * agree as f64 / n - 1.0)
    }

    #[test]
    fn mirrored_joint_pass_at_0_112_5() {
        let model = CorrelationModel::quantum(SignConvention::Mirrored, 1.0);
        let expected = 0.25 * (1.0 + cos(deg_to_rad(225.0)));
        assert!((expected - 0.0732).abs() < 1e-4);
        assert!((joint_pass_probability(&model, 0.0, 112.5).unwrap() - expected).abs() < 1e-15);
        let (pp, _, _, _) = mc_stats(&model, 0.0, 112.5, 11, N);
        assert!((pp - expected).abs() < 3.0 * sigma_binomial(expected, N), "{pp}");
    }

    #[test]
    fn zero_visibility_is_independent() {
        for conv in [SignConvention::Plus, SignConvention::Minus, SignConvention::Mirrored] {
            let model = CorrelationModel::quantum(conv, 0.0);
            for (a, b) in [(0.0, 22.5), (45.0, 67.5), (135.0, 157.5)] {
                assert_eq!(joint_pass_probability(&model, a, b).unwrap(), 0.25);
            }
        }
    }

    /// Midpoint quadrature of `f` over `theta` uniform on `[0, pi)`.
    fn average_over_theta(f: impl Fn(f64) -> f64) -> f64 {
        let m = 100_000;
        (0..m).map(|i| f(PI * (i as f64 + 0.5) / m as f64)).sum::<f64>() / m as f64
    }

    #[test]
    fn malus_equal_settings_three_eighths() {
        let q = average_over_theta(|t| {
            let c = cos(t - deg_to_rad(30.0));
            c * c * c * c
        });
        assert!((q - 0.375).abs() < 1e-9);
        let p = joint_pass_probability(&CorrelationModel::MalusLhv, 30.0, 30.0).unwrap();
        assert!((p - 0.375).abs() < 1e-12);
    }

    #[test]
    fn malus_theory_matches_quadrature() {
        for (a, b) in [(0.0, 0.0), (0.0, 22.5), (45.0, 157.5), (90.0, 67.5)] {
            let pp = |x: f64, y: f64| average_over_theta(|t| malus(t, x) * malus(t, y));
            // E from the four-cell estimator with +90 partners
            let plus = pp(a, b) + pp(a + 90.0, b + 90.0);
            let minus = pp(a, b + 90.0) + pp(a + 90.0, b);
            let e_quad = (plus - minus) / (plus + minus);
            let e = correlation_theory(&CorrelationModel::MalusLhv, a, b).unwrap();
            assert!((e - e_quad).abs() < 1e-9, "{a} {b}: {e} vs {e_quad}");
        }
        assert!((correlation_theory(&CorrelationModel::MalusLhv, 0.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn threshold_theory_matches_quadrature() {
        for (a, b) in [(0.0, 22.5), (0.0, 67.5), (45.0, 22.5), (10.0, 100.0), (170.0, 5.0)] {
            let agree = average_over_theta(|t| if threshold(t, a) == threshold(t, b) { 1.0 } else { 0.0 });
            let e_quad = 2.0 * agree - 1.0;
            let e = correlation_theory(&CorrelationModel::ThresholdLhv, a, b).unwrap();
            assert!((e - e_quad).abs() < 1e-4, "{a} {b}: {e} vs {e_quad}");
        }
    }

    #[test]
    fn kernel_values() {
        let q = CorrelationModel::quantum(SignConvention::Mirrored, 1.0);
        let e = correlation_theory(&q, 0.0, 22.5).unwrap();
        assert!((e - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let plus = CorrelationModel::quantum(SignConvention::Plus, 1.0);
        assert!(correlation_theory(&plus, 0.0, 45.0).unwrap().abs() < 1e-15);
        let minus = CorrelationModel::quantum(SignConvention::Minus, 0.5);
        assert!((correlation_theory(&minus, 10.0, 10.0).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn traveling_has_no_closed_form() {
        let m = CorrelationModel::TravelingInfluence {
            informed: Box::new(CorrelationModel::quantum(SignConvention::Mirrored, 1.0)),
            uninformed: Box::new(CorrelationModel::MalusLhv),
            influence_speed: InfluenceSpeed::Instantaneous,
        };
        assert_eq!(correlation_theory(&m, 0.0, 0.0), Err(SourceError::UnsupportedModel));
        assert!(m.validate().is_ok());
    }

    #[test]
    fn model_validation() {
        assert_eq!(
            CorrelationModel::quantum(SignConvention::Plus, 1.2).validate(),
            Err(ConfigError::VisibilityOutOfRange)
        );
        let bad_speed = CorrelationModel::TravelingInfluence {
            informed: Box::new(CorrelationModel::MalusLhv),
            uninformed: Box::new(CorrelationModel::MalusLhv),
            influence_speed: InfluenceSpeed::Finite(0.0),
        };
        assert_eq!(bad_speed.validate(), Err(ConfigError::NonPositiveInfluenceSpeed));
        let nested = CorrelationModel::TravelingInfluence {
            informed: Box::new(bad_speed.clone()),
            uninformed: Box::new(CorrelationModel::MalusLhv),
            influence_speed: InfluenceSpeed::Instantaneous,
        };
        assert_eq!(nested.validate(), Err(ConfigError::NestedInfluence));
    }

    #[test]
    fn speed_parsing() {
        assert_eq!(parse_influence_speed("instant"), Some(InfluenceSpeed::Instantaneous));
        assert_eq!(parse_influence_speed("6.96e6"), Some(InfluenceSpeed::Finite(6.96e6)));
        assert_eq!(parse_influence_speed("-3"), None);
        assert_eq!(parse_influence_speed("fast"), None);
    }

    #[test]
    fn quantum_marginals_are_half() {
        let model = CorrelationModel::quantum(SignConvention::Mirrored, 0.9);
        let tol = 4.0 * sigma_binomial(0.5, N);
        for (i, (a, b)) in [(0.0, 22.5), (45.0, 157.5), (90.0, 67.5)].into_iter().enumerate() {
            let (_, pa, pb, _) = mc_stats(&model, a, b, 100 + i as u64, N);
            assert!((pa - 0.5).abs() < tol && (pb - 0.5).abs() < tol, "{pa} {pb}");
        }
    }

    #[test]
    fn monte_carlo_e_converges_to_theory() {
        let models = [
            CorrelationModel::quantum(SignConvention::Mirrored, 1.0),
            CorrelationModel::quantum(SignConvention::Plus, 0.7),
            CorrelationModel::MalusLhv,
            CorrelationModel::ThresholdLhv,
        ];
        let mut r = rng::from_seed(5);
        let settings: Vec<(f64, f64)> =
            (0..8).map(|_| (180.0 * rng::uniform(&mut r), 180.0 * rng::uniform(&mut r))).collect();
        for (mi, model) in models.iter().enumerate() {
            for (si, &(a, b)) in settings.iter().enumerate() {
                let e_theory = correlation_theory(model, a, b).unwrap();
                let (_, _, _, e_mc) = mc_stats(model, a, b, (mi * 100 + si) as u64, N);
                // agree/disagree is a +-1 variable with variance 1 - E^2
                let sigma = libm::sqrt((1.0 - e_theory * e_theory) / N as f64);
                assert!(
                    (e_mc - e_theory).abs() <= 4.0 * sigma + 1e-12,
                    "model {mi} at ({a}, {b}): {e_mc} vs {e_theory}"
                );
            }
        }
    }

    #[test]
    fn emissions_poisson_count() {
        let rate = 1.653e6;
        let n = sample_emissions(rate, 1.0, 42).unwrap().count() as f64;
        assert!((n - rate).abs() < 5.0 * libm::sqrt(rate), "{n}");
    }

    #[test]
    fn emissions_edge_cases() {
        assert_eq!(sample_emissions(100.0, 0.0, 1).unwrap().count(), 0);
        assert_eq!(sample_emissions(0.0, 1.0, 1).unwrap_err(), SourceError::NonPositiveRate);
        assert_eq!(sample_emissions(1.0, -1.0, 1).unwrap_err(), SourceError::NegativeDuration);
        let mut s = sample_emissions(1.0, 1e-9, 1).unwrap();
        let _ = s.by_ref().count();
        assert!(s.next().is_none());
    }

    #[test]
    fn emissions_deterministic_and_increasing() {
        let a: Vec<_> = sample_emissions(1e4, 0.5, 9).unwrap().collect();
        let b: Vec<_> = sample_emissions(1e4, 0.5, 9).unwrap().collect();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].emission_time < w[1].emission_time));
        assert!(a.iter().all(|p| (0.0..PI).contains(&p.hidden.theta) && p.emission_time >= 0.0));
    }
}
