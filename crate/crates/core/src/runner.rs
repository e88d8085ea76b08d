//! End-to-end simulated experiments: the 16-setting CHSH table and the
//! rotation on/off luminosity comparison.
//!
//! Per setting: emit pairs, draw joint polarizer outcomes, propagate through the
//! fibers, gate at the mirror, detect, match coincidences.
//!
//! Detector efficiency is independent of everything upstream, so it is drawn
//! first: the emission process is thinned to pairs with at least one photon that
//! would click, and each such pair carries which arms would. The thinned process
//! is again Poisson, so the counts have exactly the distribution of the
//! unthinned pipeline while skipping the ~97% of pairs that never click.

use alloc::vec::Vec;

use crate::analysis::{
    chsh_s, dark_subtract, degradation_ratio, gated_accidental_rate, AccidentalConvention, AnalysisError, ChshResult,
    ChshSettings, CountTable16, Degradation, Ratio, VarianceModel, ALICE_ANGLES, BOB_ANGLES,
};
use crate::apparatus::{ApparatusConfig, ConfigError, GateGeometry};
use crate::detection::{add_dark_counts, match_coincidences, CountRecord, DetectionError, DetectorConfig};
use crate::gating::{gate_open, propagate, GateState};
use crate::math::sqrt;
use crate::rng::{self, derive_seed, setting_seed, Stream};
use crate::source::{joint_outcome, CorrelationModel, EmissionStream, InfluenceSchedule, SourceError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Detection(#[from] DetectionError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("coincidence rate is zero after dark subtraction")]
    ZeroCoincidenceRate,
}

/// How simulated tables are reduced.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AnalysisOptions {
    pub accidental_convention: AccidentalConvention,
    pub variance: VarianceModel,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RunPlan {
    pub apparatus: ApparatusConfig,
    pub detector: DetectorConfig,
    pub model: CorrelationModel,
    /// Emitted pairs per second.
    pub pair_rate: f64,
    /// Seconds per setting.
    pub integration_time_per_setting: f64,
    pub rotation: bool,
    /// `(alice, bob)` polarizer angles in degrees.
    pub settings: Vec<(f64, f64)>,
    pub master_seed: u64,
    /// Time of the first gate opening.
    pub phase_offset: f64,
    pub analysis: AnalysisOptions,
}

/// All 16 grid settings, Alice-major.
pub fn grid_settings() -> Vec<(f64, f64)> {
    ALICE_ANGLES.iter().flat_map(|&a| BOB_ANGLES.iter().map(move |&b| (a, b))).collect()
}

impl RunPlan {
    /// Bench parameters, 16 settings, 60 s each.
    pub fn bench(model: CorrelationModel, pair_rate: f64, rotation: bool, master_seed: u64) -> Self {
        Self {
            apparatus: ApparatusConfig::bench(),
            detector: DetectorConfig::bench(),
            model,
            pair_rate,
            integration_time_per_setting: 60.0,
            rotation,
            settings: grid_settings(),
            master_seed,
            phase_offset: 0.0,
            analysis: AnalysisOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<GateGeometry, RunError> {
        let geometry = GateGeometry::from_config(&self.apparatus)?;
        self.detector.validate()?;
        self.model.validate()?;
        if !(self.pair_rate >= 0.0) {
            return Err(ConfigError::Negative("pair_rate").into());
        }
        if !(self.integration_time_per_setting > 0.0) {
            return Err(ConfigError::NonPositive("integration_time_per_setting").into());
        }
        if self.settings.is_empty() {
            return Err(ConfigError::NoSettings.into());
        }
        GateState::from_geometry(&geometry, self.phase_offset)?;
        Ok(geometry)
    }

    fn gate(&self, geometry: &GateGeometry) -> Result<Option<GateState>, RunError> {
        Ok(if self.rotation { Some(GateState::from_geometry(geometry, self.phase_offset)?) } else { None })
    }
}

/// Raw counts of one setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CellCounts {
    pub singles_alice: u64,
    pub singles_bob: u64,
    pub coincidences: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SettingCounts {
    pub alice_angle: f64,
    pub bob_angle: f64,
    pub counts: CellCounts,
    pub duration: f64,
}

impl SettingCounts {
    pub fn record(&self) -> CountRecord {
        CountRecord {
            singles_alice: self.counts.singles_alice as f64,
            singles_bob: self.counts.singles_bob as f64,
            coincidences: self.counts.coincidences as f64,
            duration: self.duration,
        }
    }
}

/// What one simulated measurement looks like.
#[derive(Debug, Clone, Copy)]
struct Cell<'a> {
    alice: f64,
    bob: f64,
    /// `false` removes the polarizers, as for luminosity measurements.
    polarized: bool,
    pair_rate: f64,
    duration: f64,
    gate: Option<GateState>,
    seed: u64,
    model: &'a CorrelationModel,
}

fn simulate_cell(
    cell: Cell<'_>,
    apparatus: &ApparatusConfig,
    geometry: &GateGeometry,
    det: &DetectorConfig,
) -> Result<CellCounts, RunError> {
    let (ea, eb) = (det.efficiency_alice, det.efficiency_bob);
    let p_both = ea * eb;
    let p_alice_only = ea * (1.0 - eb);
    let p_any = 1.0 - (1.0 - ea) * (1.0 - eb);

    let schedule = match cell.model {
        CorrelationModel::TravelingInfluence { influence_speed, .. } => {
            Some(InfluenceSchedule { gate: cell.gate, delay: influence_speed.travel_time(apparatus.fiber_length) })
        }
        _ => None,
    };

    let mut alice = Vec::new();
    let mut bob = Vec::new();
    let thinned_rate = cell.pair_rate * p_any;
    if thinned_rate > 0.0 {
        let emissions = EmissionStream::new(rng::stream(cell.seed, Stream::Emission), thinned_rate, cell.duration)?;
        let mut marks = rng::stream(cell.seed, Stream::Efficiency);
        let mut outcomes = rng::stream(cell.seed, Stream::Outcome);
        for (id, mut pair) in emissions.enumerate() {
            let u = rng::uniform(&mut marks) * p_any;
            let (alice_clicks, bob_clicks) = if u < p_both {
                (true, true)
            } else if u < p_both + p_alice_only {
                (true, false)
            } else {
                (false, true)
            };
            if let Some(s) = &schedule {
                pair.hidden.informed = s.is_informed(pair.emission_time);
            }
            let (pass_a, pass_b) = if cell.polarized {
                joint_outcome(cell.model, cell.alice, cell.bob, &pair.hidden, &mut outcomes)
            } else {
                (true, true)
            };
            let (arr_a, arr_b) = propagate(&pair, id as u64, geometry);
            // both arms share the mirror and the delay, so one check gates the pair
            if cell.gate.as_ref().is_some_and(|g| !gate_open(arr_a.arrival_time, g)) {
                continue;
            }
            if alice_clicks && pass_a {
                alice.push(arr_a.arrival_time);
            }
            if bob_clicks && pass_b {
                bob.push(arr_b.arrival_time);
            }
        }
    }

    let alice =
        add_dark_counts(&alice, det.dark_rate_alice, cell.duration, &mut rng::stream(cell.seed, Stream::DarkAlice));
    let bob = add_dark_counts(&bob, det.dark_rate_bob, cell.duration, &mut rng::stream(cell.seed, Stream::DarkBob));
    let coincidences = match_coincidences(&alice, &bob, det.coincidence_window)?;
    Ok(CellCounts { singles_alice: alice.len() as u64, singles_bob: bob.len() as u64, coincidences })
}

/// Simulates one polarizer setting. The seed depends only on the master seed
/// and the angle pair.
pub fn run_setting(plan: &RunPlan, alice_deg: f64, bob_deg: f64) -> Result<SettingCounts, RunError> {
    let geometry = plan.validate()?;
    let cell = Cell {
        alice: alice_deg,
        bob: bob_deg,
        polarized: true,
        pair_rate: plan.pair_rate,
        duration: plan.integration_time_per_setting,
        gate: plan.gate(&geometry)?,
        seed: setting_seed(plan.master_seed, alice_deg, bob_deg),
        model: &plan.model,
    };
    let counts = simulate_cell(cell, &plan.apparatus, &geometry, &plan.detector)?;
    Ok(SettingCounts {
        alice_angle: alice_deg,
        bob_angle: bob_deg,
        counts,
        duration: plan.integration_time_per_setting,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExperimentOutcome {
    /// In plan order.
    pub cells: Vec<SettingCounts>,
    /// Present when the plan covers the full 16-cell grid.
    pub table: Option<CountTable16>,
    pub chsh: Option<ChshResult>,
}

/// Builds the table (with accidental estimates from each cell's singles) and
/// CHSH result from per-setting counts.
///
/// With the mirror spinning, the estimate treats the configured dark rates as
/// uniform and the rest of each singles rate as confined to the gate windows.
pub fn assemble(plan: &RunPlan, cells: Vec<SettingCounts>) -> Result<ExperimentOutcome, RunError> {
    let duty = if plan.rotation { GateGeometry::from_config(&plan.apparatus)?.duty_cycle } else { 1.0 };
    let dark = [plan.detector.dark_rate_alice, plan.detector.dark_rate_bob];
    let mut slots: [[Option<SettingCounts>; 4]; 4] = [[None; 4]; 4];
    let probe = CountTable16 { counts: [[0; 4]; 4], accidentals: [[0.0; 4]; 4], integration_time: 0.0 };
    for c in &cells {
        if let Ok((i, j)) = probe.index(c.alice_angle, c.bob_angle) {
            // only exact grid angles fill slots; the first occurrence wins
            if ALICE_ANGLES[i] == c.alice_angle && BOB_ANGLES[j] == c.bob_angle && slots[i][j].is_none() {
                slots[i][j] = Some(*c);
            }
        }
    }
    let complete = slots.iter().flatten().all(Option::is_some);
    let (table, chsh) = if complete {
        let window = plan.detector.coincidence_window;
        let t = plan.integration_time_per_setting;
        let table = CountTable16::from_fn(t, |a, b| {
            let (i, j) = probe.index(a, b).expect("grid angle");
            let c = slots[i][j].expect("complete grid");
            let ra = c.counts.singles_alice as f64 / c.duration;
            let rb = c.counts.singles_bob as f64 / c.duration;
            let acc = gated_accidental_rate([ra, rb], dark, window, duty, plan.analysis.accidental_convention);
            (c.counts.coincidences, acc * c.duration)
        });
        let chsh = chsh_s(&table, ChshSettings::default(), plan.analysis.variance)?;
        (Some(table), Some(chsh))
    } else {
        (None, None)
    };
    Ok(ExperimentOutcome { cells, table, chsh })
}

/// Runs every setting in plan order, then assembles.
pub fn run_experiment(plan: &RunPlan) -> Result<ExperimentOutcome, RunError> {
    plan.validate()?;
    let cells = plan.settings.iter().map(|&(a, b)| run_setting(plan, a, b)).collect::<Result<Vec<_>, _>>()?;
    assemble(plan, cells)
}

/// Luminosity runs without polarizers: detectors dark, mirror still, mirror spinning.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DegradationOutcome {
    pub dark: CountRecord,
    pub without_rotation: CountRecord,
    pub with_rotation: CountRecord,
    /// Dark-subtracted ratios per column.
    pub dark_subtracted: Degradation,
    /// Coincidence ratio after subtracting estimated accidentals from each run.
    pub accidental_corrected_coincidences: Ratio,
}

const DARK_TAG: u64 = 0xd4;
const STILL_TAG: u64 = 0x57;
const SPIN_TAG: u64 = 0x5b;

/// Simulates the three luminosity rows, each over `duration` seconds.
pub fn run_degradation(plan: &RunPlan, duration: f64) -> Result<DegradationOutcome, RunError> {
    let geometry = plan.validate()?;
    if !(duration > 0.0) {
        return Err(ConfigError::NonPositive("duration").into());
    }
    let gate = Some(GateState::from_geometry(&geometry, plan.phase_offset)?);
    let base = Cell {
        alice: 0.0,
        bob: 0.0,
        polarized: false,
        pair_rate: plan.pair_rate,
        duration,
        gate: None,
        seed: 0,
        model: &plan.model,
    };
    let run = |cell: Cell<'_>| -> Result<CountRecord, RunError> {
        let c = simulate_cell(cell, &plan.apparatus, &geometry, &plan.detector)?;
        Ok(CountRecord::new(c.singles_alice as f64, c.singles_bob as f64, c.coincidences as f64, duration)?)
    };
    let dark = run(Cell { pair_rate: 0.0, seed: derive_seed(plan.master_seed, &[DARK_TAG]), ..base })?;
    let without = run(Cell { seed: derive_seed(plan.master_seed, &[STILL_TAG]), ..base })?;
    let with = run(Cell { gate, seed: derive_seed(plan.master_seed, &[SPIN_TAG]), ..base })?;

    let dark_subtracted = degradation_ratio(&with, &without, &dark)?;

    // dark clicks are uniform; with the mirror spinning the rest is confined to the windows
    let [dark_a, dark_b, _] = dark.per_second();
    let corrected = |r: &CountRecord, duty: f64| {
        let [sa, sb, c] = r.per_second();
        let acc = gated_accidental_rate(
            [sa, sb],
            [dark_a, dark_b],
            plan.detector.coincidence_window,
            duty,
            plan.analysis.accidental_convention,
        );
        ((c - acc).max(0.0), r.coincidences / (duration * duration))
    };
    let (num, var_num) = corrected(&with, geometry.duty_cycle);
    let (den, var_den) = corrected(&without, 1.0);
    if !(den > 0.0) {
        return Err(AnalysisError::ZeroDenominator("coincidences").into());
    }
    let value = num / den;
    let sigma =
        if num > 0.0 { value * sqrt(var_num / (num * num) + var_den / (den * den)) } else { sqrt(var_num) / den };
    Ok(DegradationOutcome {
        dark,
        without_rotation: without,
        with_rotation: with,
        dark_subtracted,
        accidental_corrected_coincidences: Ratio { value, sigma },
    })
}

/// Pair rate and efficiencies implied by a polarizer-free luminosity record.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Calibration {
    pub pair_rate: f64,
    pub efficiency_alice: f64,
    pub efficiency_bob: f64,
}

/// With dark-subtracted rates `S_a`, `S_b`, `C`: each arm's efficiency is the
/// chance its partner's click is matched, `eta_a = C / S_b`, `eta_b = C / S_a`,
/// and the pair rate is `S_a S_b / C`.
pub fn calibrate_from_counts(record: &CountRecord, dark: &CountRecord) -> Result<Calibration, RunError> {
    let corrected = dark_subtract(record, dark);
    let [sa, sb, c] = corrected.per_second();
    if !(c > 0.0) {
        return Err(RunError::ZeroCoincidenceRate);
    }
    Ok(Calibration { pair_rate: sa * sb / c, efficiency_alice: c / sb, efficiency_bob: c / sa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{InfluenceSpeed, SignConvention};
    use alloc::boxed::Box;

    fn clean_detector(eff: f64) -> DetectorConfig {
        DetectorConfig {
            efficiency_alice: eff,
            efficiency_bob: eff,
            dark_rate_alice: 0.0,
            dark_rate_bob: 0.0,
            coincidence_window: 20e-9,
        }
    }

    fn small_plan(model: CorrelationModel, seed: u64) -> RunPlan {
        RunPlan {
            detector: clean_detector(1.0),
            pair_rate: 4000.0,
            integration_time_per_setting: 1.0,
            ..RunPlan::bench(model, 0.0, false, seed)
        }
    }

    #[test]
    fn calibration_from_luminosity_row() {
        let dark = CountRecord::from_rates(1300.0, 600.0, 0.08).unwrap();
        let still = CountRecord::from_rates(33894.0, 20329.0, 389.0).unwrap();
        let cal = calibrate_from_counts(&still, &dark).unwrap();
        assert!((cal.efficiency_alice - 0.0197).abs() < 5e-5);
        assert!((cal.efficiency_bob - 0.0119).abs() < 5e-5);
        assert!((cal.pair_rate - 1.653e6).abs() < 1e3);
    }

    #[test]
    fn calibration_trivial_and_scaling() {
        let zero = CountRecord::from_rates(0.0, 0.0, 0.0).unwrap();
        let perfect = CountRecord::from_rates(500.0, 500.0, 500.0).unwrap();
        let cal = calibrate_from_counts(&perfect, &zero).unwrap();
        assert_eq!((cal.efficiency_alice, cal.efficiency_bob, cal.pair_rate), (1.0, 1.0, 500.0));

        let r = CountRecord::from_rates(30000.0, 20000.0, 400.0).unwrap();
        let r2 = CountRecord::from_rates(60000.0, 40000.0, 800.0).unwrap();
        let (a, b) = (calibrate_from_counts(&r, &zero).unwrap(), calibrate_from_counts(&r2, &zero).unwrap());
        assert!((b.pair_rate - 2.0 * a.pair_rate).abs() < 1e-6);
        assert!((a.efficiency_alice - b.efficiency_alice).abs() < 1e-15);

        let none = CountRecord::from_rates(100.0, 100.0, 0.0).unwrap();
        assert_eq!(calibrate_from_counts(&none, &zero), Err(RunError::ZeroCoincidenceRate));
    }

    #[test]
    fn plan_validation() {
        let mut plan = small_plan(CorrelationModel::MalusLhv, 1);
        plan.settings.clear();
        assert_eq!(plan.validate(), Err(RunError::Config(ConfigError::NoSettings)));
        let mut plan = small_plan(CorrelationModel::MalusLhv, 1);
        plan.integration_time_per_setting = 0.0;
        assert!(plan.validate().is_err());
        let mut plan = small_plan(CorrelationModel::MalusLhv, 1);
        plan.phase_offset = 1.0;
        assert_eq!(plan.validate(), Err(RunError::Config(ConfigError::PhaseOutOfRange)));
    }

    #[test]
    fn deterministic_and_order_independent() {
        let plan = small_plan(CorrelationModel::quantum(SignConvention::Mirrored, 0.9), 77);
        let a = run_experiment(&plan).unwrap();
        let b = run_experiment(&plan).unwrap();
        assert_eq!(a, b);

        let mut reversed = plan.clone();
        reversed.settings.reverse();
        let c = run_experiment(&reversed).unwrap();
        assert_eq!(a.table, c.table);
        for cell in &a.cells {
            let other =
                c.cells.iter().find(|x| x.alice_angle == cell.alice_angle && x.bob_angle == cell.bob_angle).unwrap();
            assert_eq!(cell, other);
        }

        let other_seed = run_experiment(&RunPlan { master_seed: 78, ..plan }).unwrap();
        assert_ne!(a.table, other_seed.table);
    }

    #[test]
    fn partial_grid_has_no_chsh() {
        let mut plan = small_plan(CorrelationModel::MalusLhv, 3);
        plan.settings.truncate(5);
        let out = run_experiment(&plan).unwrap();
        assert_eq!(out.cells.len(), 5);
        assert!(out.table.is_none() && out.chsh.is_none());
    }

    #[test]
    fn quantum_plan_violates_lhv_plan_does_not() {
        let q = run_experiment(&small_plan(CorrelationModel::quantum(SignConvention::Mirrored, 1.0), 5)).unwrap();
        let r = q.chsh.unwrap();
        assert!((r.s - 2.0 * core::f64::consts::SQRT_2).abs() < 4.0 * r.s_sigma, "{} +- {}", r.s, r.s_sigma);

        let l = run_experiment(&small_plan(CorrelationModel::MalusLhv, 5)).unwrap();
        let r = l.chsh.unwrap();
        assert!(r.s <= 2.0 + 4.0 * r.s_sigma);
        // Malus baseline sits at 2 sqrt(2) / 2 at these settings
        assert!((r.s - core::f64::consts::SQRT_2).abs() < 4.0 * r.s_sigma);
    }

    #[test]
    fn lhv_bound_holds_in_nearly_all_runs() {
        for model in [CorrelationModel::MalusLhv, CorrelationModel::ThresholdLhv] {
            let mut within = 0;
            let runs = 1000;
            for seed in 0..runs {
                let plan = RunPlan { pair_rate: 1000.0, ..small_plan(model.clone(), seed) };
                let r = run_experiment(&plan).unwrap().chsh.unwrap();
                within += usize::from(r.s <= 2.0 + 4.0 * r.s_sigma);
            }
            assert!(within * 100 >= 99 * runs as usize, "{model:?}: {within}");
        }
    }

    #[test]
    fn gating_keeps_the_duty_cycle_of_coincidences() {
        let plan = RunPlan {
            detector: clean_detector(0.5),
            pair_rate: 1e5,
            ..RunPlan::bench(CorrelationModel::MalusLhv, 0.0, true, 9)
        };
        let d = run_degradation(&plan, 10.0).unwrap();
        let geom = plan.validate().unwrap();
        let r = d.accidental_corrected_coincidences;
        assert!((r.value - geom.duty_cycle).abs() < 4.0 * r.sigma, "{} +- {}", r.value, r.sigma);
        assert_eq!(d.dark.counts(), [0.0, 0.0, 0.0]);

        // coincidence/singles ratio unchanged by gating
        let frac = |c: &CountRecord| c.coincidences / c.singles_alice;
        let (on, off) = (frac(&d.with_rotation), frac(&d.without_rotation));
        let sigma_on = libm::sqrt(on * (1.0 - on) / d.with_rotation.singles_alice);
        assert!((on - off).abs() < 4.0 * sigma_on, "{on} vs {off}");
    }

    #[test]
    fn luminosity_runs_at_bench_calibration() {
        let plan = RunPlan::bench(CorrelationModel::quantum(SignConvention::Mirrored, 1.0), 1.653e6, true, 2);
        let d = run_degradation(&plan, 2.0).unwrap();
        let [sa, sb, _] = d.without_rotation.per_second();
        // singles = pair rate x efficiency + dark
        let expect_a = 1.653e6 * 0.0197 + 1300.0;
        let expect_b = 1.653e6 * 0.0119 + 600.0;
        assert!((sa - expect_a).abs() < 5.0 * libm::sqrt(expect_a / 2.0), "{sa}");
        assert!((sb - expect_b).abs() < 5.0 * libm::sqrt(expect_b / 2.0), "{sb}");
        let [da, _, _] = d.dark.per_second();
        assert!((da - 1300.0).abs() < 5.0 * libm::sqrt(1300.0 / 2.0));
        // singles degrade by about the duty cycle once dark counts are removed
        assert!((d.dark_subtracted.singles_alice.value - 0.0159).abs() < 0.003);
    }

    #[test]
    fn traveling_influence_is_cut_by_the_gate() {
        let instant = CorrelationModel::TravelingInfluence {
            informed: Box::new(CorrelationModel::quantum(SignConvention::Mirrored, 1.0)),
            uninformed: Box::new(CorrelationModel::MalusLhv),
            influence_speed: InfluenceSpeed::Instantaneous,
        };
        let base = RunPlan {
            detector: clean_detector(1.0),
            pair_rate: 2e5,
            integration_time_per_setting: 2.0,
            ..RunPlan::bench(instant.clone(), 0.0, false, 12)
        };
        // mirror still: always informed, quantum correlations
        let still = run_experiment(&base).unwrap().chsh.unwrap();
        assert!(still.s > 2.0 + 4.0 * still.s_sigma, "{}", still.s);
        // mirror spinning: informed photons never reach an open gate
        let spin = run_experiment(&RunPlan { rotation: true, ..base.clone() }).unwrap().chsh.unwrap();
        assert!((spin.s - core::f64::consts::SQRT_2).abs() < 4.0 * spin.s_sigma, "{}", spin.s);

        // at the first resonant speed informed photons do come back through window 1
        let geom = base.validate().unwrap();
        let res = crate::causality::resonant_influence_speeds(&geom, 200.0, crate::apparatus::SPEED_OF_LIGHT, 1)[0];
        let resonant = CorrelationModel::TravelingInfluence {
            informed: Box::new(CorrelationModel::quantum(SignConvention::Mirrored, 1.0)),
            uninformed: Box::new(CorrelationModel::MalusLhv),
            influence_speed: InfluenceSpeed::Finite(res.center),
        };
        let hit = run_experiment(&RunPlan { rotation: true, model: resonant, ..base }).unwrap().chsh.unwrap();
        assert!(hit.s > 2.0 + 4.0 * hit.s_sigma, "{}", hit.s);
    }
}
