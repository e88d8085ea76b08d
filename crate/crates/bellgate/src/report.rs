//! Human-readable and CSV renderings of results.

use std::fmt::Write as _;

use bellgate_core::analysis::{Degradation, Ratio};
use bellgate_core::causality::ResonanceInterval;
use bellgate_core::{CausalityReport, ChshResult, GateGeometry, InfluenceSpeed};

fn setting_pairs(r: &ChshResult) -> [(f64, f64); 4] {
    let s = r.settings;
    [(s.a, s.b), (s.a, s.b_prime), (s.a_prime, s.b), (s.a_prime, s.b_prime)]
}

pub fn chsh_text(r: &ChshResult) -> String {
    let mut out = String::new();
    for ((a, b), (e, s)) in setting_pairs(r).iter().zip(r.e_values.iter().zip(&r.e_sigmas)) {
        let label = format!("E({a}, {b})");
        writeln!(out, "{label:<14} = {e:+.4} ± {s:.4}").unwrap();
    }
    writeln!(out, "{:<14} = {:.4} ± {:.4}", "S", r.s, r.s_sigma).unwrap();
    out
}

/// One row per correlation, then `S`; full precision.
pub fn chsh_csv(r: &ChshResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "alice_angle", "bob_angle", "value", "sigma"]).unwrap();
    for ((a, b), (e, s)) in setting_pairs(r).iter().zip(r.e_values.iter().zip(&r.e_sigmas)) {
        w.write_record(["E".into(), a.to_string(), b.to_string(), e.to_string(), s.to_string()]).unwrap();
    }
    w.write_record(["S", "", "", &r.s.to_string(), &r.s_sigma.to_string()]).unwrap();
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

pub fn geometry_text(g: &GateGeometry) -> String {
    format!(
        "T_on={:.3e} s\nD_th={:.4}\ngate_period={:.4e} s\nfiber_delay={:.4e} s\nflight_distance={:.1} m\n",
        g.aperture_time, g.duty_cycle, g.gate_period, g.fiber_delay, g.flight_distance_during_gate
    )
}

fn ratio_text(r: &Ratio) -> String {
    format!("{:.3} ± {:.3}", r.value, r.sigma)
}

pub fn degradation_text(d: &Degradation, corrected_coincidences: Option<&Ratio>) -> String {
    let mut out = String::new();
    writeln!(out, "{:<28} {}", "singles_alice", ratio_text(&d.singles_alice)).unwrap();
    writeln!(out, "{:<28} {}", "singles_bob", ratio_text(&d.singles_bob)).unwrap();
    writeln!(out, "{:<28} {}", "coincidences", ratio_text(&d.coincidences)).unwrap();
    if let Some(c) = corrected_coincidences {
        writeln!(out, "{:<28} {}", "coincidences (accidentals)", ratio_text(c)).unwrap();
    }
    out
}

fn speed_text(v: InfluenceSpeed) -> String {
    match v {
        InfluenceSpeed::Instantaneous => "instant".into(),
        InfluenceSpeed::Finite(v) => format!("{v:.4e} m/s"),
    }
}

pub fn causality_text(r: &CausalityReport) -> String {
    let (e0, e1) = r.informed_emission_window;
    let (a0, a1) = r.informed_arrival_window_at_slit;
    let rows = [
        ("influence_speed", speed_text(r.influence_speed)),
        ("influence_arrival_at_source", format!("{:.4e} s", r.influence_arrival_at_source)),
        ("informed_emission_window", format!("[{e0:.4e}, {e1:.4e}] s")),
        ("informed_arrival_at_slit", format!("[{a0:.4e}, {a1:.4e}] s")),
        ("earliest_open_overlap", r.earliest_open_overlap.map_or("none".into(), |k| format!("window {k}"))),
        ("pass_fraction", format!("{}", r.pass_fraction)),
        ("isolation_margin", format!("{:.4e} s", r.isolation_margin)),
    ];
    let mut out = String::new();
    for (k, v) in rows {
        writeln!(out, "{k:<28} {v}").unwrap();
    }
    out
}

pub fn resonance_text(bands: &[ResonanceInterval]) -> String {
    let mut out = String::new();
    writeln!(out, "{:>6}  {:>12}  {:>12}  {:>12}", "window", "low_m_s", "center_m_s", "high_m_s").unwrap();
    for b in bands {
        writeln!(out, "{:>6}  {:>12.4e}  {:>12.4e}  {:>12.4e}", b.window, b.low, b.center, b.high).unwrap();
    }
    out
}
