//! Fiber transport and the shared rotating-mirror gate.

use crate::apparatus::{ConfigError, GateGeometry};
use crate::math::wrap;
use crate::source::PairEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Alice,
    Bob,
}

/// Timing of the periodic gate. Both slits see the same state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateState {
    pub gate_period: f64,
    pub aperture_time: f64,
    /// Time of the first window opening.
    pub phase_offset: f64,
}

impl GateState {
    pub fn new(gate_period: f64, aperture_time: f64, phase_offset: f64) -> Result<Self, ConfigError> {
        if !(gate_period > 0.0) {
            return Err(ConfigError::NonPositive("gate period"));
        }
        if !(aperture_time > 0.0) {
            return Err(ConfigError::NonPositive("aperture time"));
        }
        if aperture_time >= gate_period {
            return Err(ConfigError::ApertureTimeExceedsPeriod);
        }
        if !(0.0..gate_period).contains(&phase_offset) {
            return Err(ConfigError::PhaseOutOfRange);
        }
        Ok(Self { gate_period, aperture_time, phase_offset })
    }

    pub fn from_geometry(geometry: &GateGeometry, phase_offset: f64) -> Result<Self, ConfigError> {
        Self::new(geometry.gate_period, geometry.aperture_time, phase_offset)
    }

    /// True iff `(t - phase) mod period` lies in `[0, aperture_time)`.
    pub fn is_open(&self, t: f64) -> bool {
        wrap(t - self.phase_offset, self.gate_period) < self.aperture_time
    }
}

/// Gate check as a free function.
pub fn gate_open(t: f64, gate: &GateState) -> bool {
    gate.is_open(t)
}

/// One photon reaching the mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalEvent {
    pub arm: Arm,
    pub arrival_time: f64,
    pub pair_id: u64,
}

/// Both photons of a pair arrive one fiber delay after emission.
pub fn propagate(pair: &PairEvent, pair_id: u64, geometry: &GateGeometry) -> (ArrivalEvent, ArrivalEvent) {
    let arrival_time = pair.emission_time + geometry.fiber_delay;
    (ArrivalEvent { arm: Arm::Alice, arrival_time, pair_id }, ArrivalEvent { arm: Arm::Bob, arrival_time, pair_id })
}

/// Keeps arrivals that find the gate open. `None` means the mirror is not
/// spinning and the path is always connected.
pub fn apply_gate<'a, I>(arrivals: I, gate: Option<&'a GateState>) -> impl Iterator<Item = ArrivalEvent> + 'a
where
    I: IntoIterator<Item = ArrivalEvent>,
    I::IntoIter: 'a,
{
    arrivals.into_iter().filter(move |a| gate.is_none_or(|g| g.is_open(a.arrival_time)))
}
