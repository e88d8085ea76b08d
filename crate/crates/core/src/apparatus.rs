//! Bench parameters and the closed-form gate geometry of the rotating mirror.

use crate::math::PI;

/// Vacuum speed of light used throughout, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Typical group index of single-mode silica fiber near 800 nm.
pub const SILICA_GROUP_INDEX: f64 = 1.468;

/// Validation failures for any configuration in this crate.
///
/// The `Display` text names the violated invariant.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("aperture must be positive")]
    NonPositiveAperture,
    #[error("mirror radius must be positive")]
    NonPositiveRadius,
    #[error("rotation rate must be positive")]
    NonPositiveRotation,
    #[error("facet count must be at least 1")]
    NoFacets,
    #[error("fiber length must be non-negative")]
    NegativeFiberLength,
    #[error("fiber group index must be at least 1")]
    FiberIndexBelowOne,
    #[error("light speed must be positive")]
    NonPositiveLightSpeed,
    #[error("aperture exceeds facet sweep")]
    ApertureExceedsFacetSweep,
    #[error("{0} must lie in (0, 1]")]
    EfficiencyOutOfRange(&'static str),
    #[error("{0} must be non-negative")]
    Negative(&'static str),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("visibility must lie in [0, 1]")]
    VisibilityOutOfRange,
    #[error("influence speed must be positive")]
    NonPositiveInfluenceSpeed,
    #[error("phase offset must lie in [0, gate period)")]
    PhaseOutOfRange,
    #[error("aperture time must be shorter than the gate period")]
    ApertureTimeExceedsPeriod,
    #[error("traveling influence cannot nest")]
    NestedInfluence,
    #[error("run plan has no settings")]
    NoSettings,
}

/// Physical parameters of the bench. Lengths in meters, rates in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ApparatusConfig {
    /// Slit width.
    pub aperture_width: f64,
    /// Slit-to-mirror distance.
    pub mirror_radius: f64,
    /// Mirror revolutions per second.
    pub rotation_rate: f64,
    pub facet_count: u32,
    /// Fiber length per arm, source to mirror.
    pub fiber_length: f64,
    /// Group index of the fiber; light in the fiber travels at `c / index`.
    pub fiber_group_index: f64,
    pub vacuum_light_speed: f64,
}

impl ApparatusConfig {
    /// The table-top bench: 1 mm slits at 0.34 m from a 34-facet mirror
    /// spinning at 1 kHz, with 200 m of fiber per arm.
    ///
    /// The group index defaults to 1.0 so that the in-fiber distances match
    /// vacuum-speed arithmetic. Use [`SILICA_GROUP_INDEX`] for a realistic fiber.
    pub const fn bench() -> Self {
        Self {
            aperture_width: 1e-3,
            mirror_radius: 0.34,
            rotation_rate: 1000.0,
            facet_count: 34,
            fiber_length: 200.0,
            fiber_group_index: 1.0,
            vacuum_light_speed: SPEED_OF_LIGHT,
        }
    }

    /// Returns `self` unchanged if every invariant holds, else the first violation.
    pub fn validate(self) -> Result<Self, ConfigError> {
        // NaN fails every `> 0.0` check below
        if !(self.aperture_width > 0.0) {
            return Err(ConfigError::NonPositiveAperture);
        }
        if !(self.mirror_radius > 0.0) {
            return Err(ConfigError::NonPositiveRadius);
        }
        if !(self.rotation_rate > 0.0) {
            return Err(ConfigError::NonPositiveRotation);
        }
        if self.facet_count == 0 {
            return Err(ConfigError::NoFacets);
        }
        if !(self.fiber_length >= 0.0) {
            return Err(ConfigError::NegativeFiberLength);
        }
        if !(self.fiber_group_index >= 1.0) {
            return Err(ConfigError::FiberIndexBelowOne);
        }
        if !(self.vacuum_light_speed > 0.0) {
            return Err(ConfigError::NonPositiveLightSpeed);
        }
        if self.aperture_width >= self.facet_sweep() {
            return Err(ConfigError::ApertureExceedsFacetSweep);
        }
        Ok(self)
    }

    /// Arc length swept across the slit plane by one facet.
    pub fn facet_sweep(&self) -> f64 {
        2.0 * PI * self.mirror_radius / f64::from(self.facet_count)
    }

    /// Speed of light inside the fiber.
    pub fn fiber_light_speed(&self) -> f64 {
        self.vacuum_light_speed / self.fiber_group_index
    }
}

impl Default for ApparatusConfig {
    fn default() -> Self {
        Self::bench()
    }
}

/// Time the beam spends over the slit per facet pass: `A / (2 pi R w)`.
///
/// Pure formula, no validation.
pub fn aperture_time(cfg: &ApparatusConfig) -> f64 {
    cfg.aperture_width / (2.0 * PI * cfg.mirror_radius * cfg.rotation_rate)
}

/// Fraction of time the gate is open: `A N / (2 pi R)`.
///
/// Pure formula, no validation.
pub fn duty_cycle(cfg: &ApparatusConfig) -> f64 {
    cfg.aperture_width * f64::from(cfg.facet_count) / (2.0 * PI * cfg.mirror_radius)
}

/// Time between successive facet sweeps.
pub fn gate_period(cfg: &ApparatusConfig) -> f64 {
    1.0 / (cfg.rotation_rate * f64::from(cfg.facet_count))
}

/// Derived timing of the gate, computed once from a validated config.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GateGeometry {
    pub aperture_time: f64,
    pub duty_cycle: f64,
    pub gate_period: f64,
    /// One-way source-to-mirror delay per arm.
    pub fiber_delay: f64,
    /// Distance light covers in the fiber while the gate is open.
    pub flight_distance_during_gate: f64,
}

impl GateGeometry {
    pub fn from_config(cfg: &ApparatusConfig) -> Result<Self, ConfigError> {
        let cfg = cfg.validate()?;
        let speed = cfg.fiber_light_speed();
        let aperture_time = aperture_time(&cfg);
        Ok(Self {
            aperture_time,
            duty_cycle: duty_cycle(&cfg),
            gate_period: gate_period(&cfg),
            fiber_delay: cfg.fiber_length / speed,
            flight_distance_during_gate: speed * aperture_time,
        })
    }
}

/// Validates `cfg` and derives every gate quantity.
pub fn gate_geometry(cfg: &ApparatusConfig) -> Result<GateGeometry, ConfigError> {
    GateGeometry::from_config(cfg)
}
