//! Can a detector-to-source influence be detected through the gate?
//!
//! Time zero is the opening of a gate window. An influence leaves the slit at
//! that instant, needs `L / v` to reach the source, and is present at the
//! source for one aperture time (the line of sight is open only that long).
//! Photons emitted under the influence then need `L / v_photon` to return to the
//! slit. They are detected only if they land inside some open window
//! `[k T, k T + T_on)`.

use alloc::vec::Vec;

use crate::apparatus::GateGeometry;
use crate::math::floor;
use crate::source::InfluenceSpeed;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CausalityReport {
    pub influence_speed: InfluenceSpeed,
    /// Time the influence reaches the source.
    pub influence_arrival_at_source: f64,
    pub informed_emission_window: (f64, f64),
    pub informed_arrival_window_at_slit: (f64, f64),
    /// First gate window index with a positive-length overlap.
    pub earliest_open_overlap: Option<u64>,
    /// Fraction of informed photons that find the gate open.
    pub pass_fraction: f64,
    /// Informed arrival start minus the closing of the emitting window.
    /// Positive means isolated against window 0.
    pub isolation_margin: f64,
}

/// Overlap of `[start, end]` with the periodic open windows, plus the first
/// overlapping window index.
fn periodic_overlap(start: f64, end: f64, period: f64, open: f64) -> (f64, Option<u64>) {
    let first = floor(start / period).max(0.0) as u64;
    let last = floor(end / period).max(0.0) as u64;
    let mut total = 0.0;
    let mut earliest = None;
    for k in first..=last {
        let w0 = k as f64 * period;
        let w1 = w0 + open;
        let o = end.min(w1) - start.max(w0);
        if o > 0.0 {
            total += o;
            earliest.get_or_insert(k);
        }
    }
    (total, earliest)
}

/// Timing of influence-informed photons against every gate window.
///
/// `photon_speed` must be positive and a finite `influence_speed` positive.
pub fn influence_window_analysis(
    geometry: &GateGeometry,
    fiber_length: f64,
    influence_speed: InfluenceSpeed,
    photon_speed: f64,
) -> CausalityReport {
    debug_assert!(photon_speed > 0.0 && influence_speed.is_valid());
    let t_on = geometry.aperture_time;
    let t1 = influence_speed.travel_time(fiber_length);
    let emission = (t1, t1 + t_on);
    let transit = fiber_length / photon_speed;
    let arrival = (emission.0 + transit, emission.1 + transit);
    let (overlap, earliest) = periodic_overlap(arrival.0, arrival.1, geometry.gate_period, t_on);
    CausalityReport {
        influence_speed,
        influence_arrival_at_source: t1,
        informed_emission_window: emission,
        informed_arrival_window_at_slit: arrival,
        earliest_open_overlap: earliest,
        pass_fraction: (overlap / t_on).clamp(0.0, 1.0),
        isolation_margin: arrival.0 - t_on,
    }
}

/// Band of influence speeds whose informed photons reach gate window `window`.
///
/// The band is open at both ends; `high` is infinite when even an instantaneous
/// influence lands in this window.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ResonanceInterval {
    pub window: u64,
    pub low: f64,
    /// Speed whose informed photons start arriving exactly at the window opening.
    pub center: f64,
    pub high: f64,
}

impl ResonanceInterval {
    pub fn contains(&self, v: f64) -> bool {
        v > self.low && v < self.high
    }
}

/// All speed bands resonant with windows `1..=max_windows`.
///
/// Arrival and gate windows both last `T_on`, so window `k` is hit iff the
/// arrival start lies in `(k T - T_on, k T + T_on)`, i.e. the influence travel
/// time `L / v` lies in `(k T - T_on - L/v_p, k T + T_on - L/v_p)`.
pub fn resonant_influence_speeds(
    geometry: &GateGeometry,
    fiber_length: f64,
    photon_speed: f64,
    max_windows: u64,
) -> Vec<ResonanceInterval> {
    let mut out = Vec::new();
    if !(fiber_length > 0.0) {
        return out;
    }
    let transit = fiber_length / photon_speed;
    let t_on = geometry.aperture_time;
    for k in 1..=max_windows {
        let opening = k as f64 * geometry.gate_period;
        let slowest = opening + t_on - transit;
        if slowest <= 0.0 {
            continue;
        }
        let centre = opening - transit;
        let fastest = opening - t_on - transit;
        let speed = |travel: f64| if travel > 0.0 { fiber_length / travel } else { f64::INFINITY };
        out.push(ResonanceInterval {
            window: k,
            low: fiber_length / slowest,
            center: speed(centre),
            high: speed(fastest),
        });
    }
    out
}

/// Windows needed so that every speed `>= min_speed` is covered by
/// [`resonant_influence_speeds`].
pub fn windows_needed(geometry: &GateGeometry, fiber_length: f64, photon_speed: f64, min_speed: f64) -> u64 {
    let latest = fiber_length / min_speed + fiber_length / photon_speed + geometry.aperture_time;
    floor(latest / geometry.gate_period) as u64 + 1
}
