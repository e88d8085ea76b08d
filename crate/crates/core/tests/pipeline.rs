//! The per-stage public API composed by hand, checked against the runner.

use bellgate_core::analysis::{chsh_s, ChshSettings, VarianceModel};
use bellgate_core::apparatus::gate_geometry;
use bellgate_core::detection::{detect, match_coincidences};
use bellgate_core::gating::apply_gate;
use bellgate_core::rng::{self, Stream};
use bellgate_core::runner::{run_experiment, RunPlan};
use bellgate_core::source::{joint_outcome, sample_emissions};
use bellgate_core::{ApparatusConfig, Arm, CorrelationModel, CountTable16, DetectorConfig, GateState, SignConvention};

fn lossless() -> DetectorConfig {
    DetectorConfig {
        efficiency_alice: 1.0,
        efficiency_bob: 1.0,
        dark_rate_alice: 0.0,
        dark_rate_bob: 0.0,
        coincidence_window: 20e-9,
    }
}

/// Coincidences for one setting through every stage.
fn coincidences(a: f64, b: f64, gate: Option<&GateState>, seed: u64) -> u64 {
    let geometry = gate_geometry(&ApparatusConfig::bench()).unwrap();
    let model = CorrelationModel::quantum(SignConvention::Mirrored, 1.0);
    let mut outcomes = rng::stream(seed, Stream::Outcome);
    let mut arrivals = Vec::new();
    for (id, pair) in sample_emissions(2e4, 2.0, seed).unwrap().enumerate() {
        let (pass_a, pass_b) = joint_outcome(&model, a, b, &pair.hidden, &mut outcomes);
        let (x, y) = bellgate_core::gating::propagate(&pair, id as u64, &geometry);
        if pass_a {
            arrivals.push(x);
        }
        if pass_b {
            arrivals.push(y);
        }
    }
    let kept: Vec<_> = apply_gate(arrivals, gate).collect();
    let times = |arm| kept.iter().filter(|e| e.arm == arm).map(|e| e.arrival_time).collect::<Vec<_>>();
    let streams = detect(&times(Arm::Alice), &times(Arm::Bob), &lossless(), 2.0, seed);
    match_coincidences(&streams.alice, &streams.bob, 20e-9).unwrap()
}

#[test]
fn hand_composed_pipeline_violates_chsh() {
    let table = CountTable16::from_fn(2.0, |a, b| (coincidences(a, b, None, 11), 0.0));
    let r = chsh_s(&table, ChshSettings::default(), VarianceModel::Corrected).unwrap();
    assert!((r.s - 2.0 * std::f64::consts::SQRT_2).abs() < 4.0 * r.s_sigma, "{} ± {}", r.s, r.s_sigma);
}

#[test]
fn hand_composed_gate_keeps_duty_cycle() {
    let geometry = gate_geometry(&ApparatusConfig::bench()).unwrap();
    let gate = GateState::from_geometry(&geometry, 0.0).unwrap();
    let open: u64 = (0..8).map(|s| coincidences(0.0, 22.5, None, s)).sum();
    let gated: u64 = (0..8).map(|s| coincidences(0.0, 22.5, Some(&gate), s)).sum();
    let ratio = gated as f64 / open as f64;
    let sigma = (geometry.duty_cycle / open as f64).sqrt();
    assert!((ratio - geometry.duty_cycle).abs() < 4.0 * sigma, "{ratio}");
}

#[test]
fn runner_agrees_with_theory_at_every_setting() {
    let mut plan = RunPlan::bench(CorrelationModel::quantum(SignConvention::Mirrored, 1.0), 5e4, false, 3);
    plan.detector = lossless();
    plan.integration_time_per_setting = 1.0;
    let out = run_experiment(&plan).unwrap();
    for c in &out.cells {
        let p = bellgate_core::source::joint_pass_probability(&plan.model, c.alice_angle, c.bob_angle).unwrap();
        let expected = 5e4 * p;
        let got = c.counts.coincidences as f64;
        // accidentals at these rates are well under one per second
        assert!((got - expected).abs() < 4.0 * expected.sqrt() + 2.0, "{c:?}: {expected}");
    }
}
