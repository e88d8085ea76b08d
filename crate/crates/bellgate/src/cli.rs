//! Subcommands and their file outputs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bellgate_core::analysis::{chsh_s, ChshSettings, VarianceModel};
use bellgate_core::causality::{influence_window_analysis, resonant_influence_speeds, ResonanceInterval};
use bellgate_core::runner::{
    assemble, calibrate_from_counts, run_degradation, run_setting, Calibration, DegradationOutcome, SettingCounts,
};
use bellgate_core::source::parse_influence_speed;
use bellgate_core::{CausalityReport, ChshResult, CountTable16, GateGeometry, InfluenceSpeed};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, RunConfig};
use crate::error::CliError;
use crate::formats::{self, LuminosityTable};
use crate::report;

#[derive(Debug, Parser)]
#[command(name = "bellgate", version, about = "Gated CHSH experiment toolkit")]
pub struct Cli {
    /// TOML run config; bench defaults when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed, overriding `run.master_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Config override `section.key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print gate timing derived from the apparatus.
    Geometry,
    /// CHSH analysis of a measured 16-cell coincidence table.
    Analyze(AnalyzeArgs),
    /// Simulate the experiment and write counts, luminosity table and results.
    Simulate(SimulateArgs),
    /// Can a detector-to-source influence get through the gate?
    Causality(CausalityArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Table with `count-accidental` cells, or counts only with `--accidentals`.
    pub table: PathBuf,
    #[arg(long)]
    pub accidentals: Option<PathBuf>,
    /// Variance of corrected counts; config `analysis.variance` when absent.
    #[arg(long, value_enum)]
    pub variance: Option<Variance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variance {
    Corrected,
    Conservative,
}

impl From<Variance> for VarianceModel {
    fn from(v: Variance) -> Self {
        match v {
            Variance::Corrected => VarianceModel::Corrected,
            Variance::Conservative => VarianceModel::Conservative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Mirror spinning during the CHSH runs; config `run.rotation` when absent.
    #[arg(long, value_enum)]
    pub rotation: Option<Switch>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CausalityArgs {
    /// Influence speed in m/s, or `instant`.
    #[arg(long)]
    pub speed: Option<String>,
    /// List resonant speed bands.
    #[arg(long)]
    pub sweep: bool,
    /// Gate windows covered by `--sweep`.
    #[arg(long, default_value_t = 5)]
    pub windows: u64,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn cmd_geometry(cfg: &RunConfig) -> Result<GateGeometry, CliError> {
    GateGeometry::from_config(&cfg.apparatus).map_err(|e| CliError::Config(e.to_string()))
}

pub fn read_table(table: &Path, accidentals: Option<&Path>) -> Result<CountTable16, CliError> {
    let text = read(table)?;
    Ok(match accidentals {
        Some(a) => formats::parse_split_tables(&text, &read(a)?)?,
        None => formats::parse_table(&text)?,
    })
}

pub fn cmd_analyze(table: &Path, accidentals: Option<&Path>, variance: VarianceModel) -> Result<ChshResult, CliError> {
    let t = read_table(table, accidentals)?;
    chsh_s(&t, ChshSettings::default(), variance).map_err(|e| CliError::Numerical(e.to_string()))
}

/// Everything `simulate` writes to `results.json`.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationResults {
    /// Effective config after overrides and calibration.
    pub config: RunConfig,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
    pub geometry: GateGeometry,
    pub chsh: Option<ChshResult>,
    pub cells: Vec<SettingCounts>,
    pub degradation: DegradationOutcome,
}

/// Replaces pair rate and efficiencies with those implied by the luminosity
/// table named in `run.calibrate_from`.
pub fn apply_calibration(cfg: &mut RunConfig) -> Result<Option<Calibration>, CliError> {
    let Some(path) = cfg.run.calibrate_from.clone() else {
        return Ok(None);
    };
    let table = formats::parse_luminosity(&read(&path)?)?;
    let cal = calibrate_from_counts(&table.without_rotation, &table.dark)?;
    cfg.run.pair_rate = cal.pair_rate;
    cfg.detector.efficiency_alice = cal.efficiency_alice;
    cfg.detector.efficiency_bob = cal.efficiency_bob;
    Ok(Some(cal))
}

/// Runs the settings and the luminosity rows on up to `jobs` threads. The
/// outcome does not depend on `jobs`.
pub fn simulate(cfg: &RunConfig, jobs: Option<usize>) -> Result<(SimulationResults, Option<CountTable16>), CliError> {
    let mut cfg = cfg.clone();
    let calibration = apply_calibration(&mut cfg)?;
    let plan = cfg.plan();
    let geometry = plan.validate()?;
    if !(cfg.run.table1_duration > 0.0) {
        return Err(CliError::Config("table1_duration must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let (cells, degradation) = pool.install(|| {
        rayon::join(
            || plan.settings.par_iter().map(|&(a, b)| run_setting(&plan, a, b)).collect::<Result<Vec<_>, _>>(),
            || run_degradation(&plan, cfg.run.table1_duration),
        )
    });
    let outcome = assemble(&plan, cells?)?;
    let results = SimulationResults {
        seed: plan.master_seed,
        config: cfg,
        calibration,
        geometry,
        chsh: outcome.chsh,
        cells: outcome.cells,
        degradation: degradation?,
    };
    Ok((results, outcome.table))
}

/// Writes `counts.csv` (when the grid is complete), `table1.csv` and `results.json`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path, jobs: Option<usize>) -> Result<SimulationResults, CliError> {
    let (results, table) = simulate(cfg, jobs)?;
    if let Some(t) = &table {
        write(out, "counts.csv", &formats::write_table(t))?;
    }
    let d = &results.degradation;
    let lum = LuminosityTable { dark: d.dark, without_rotation: d.without_rotation, with_rotation: d.with_rotation };
    write(out, "table1.csv", &formats::write_luminosity(&lum))?;
    write(out, "results.json", &to_json(&results))?;
    Ok(results)
}

#[derive(Debug, Clone, Serialize)]
pub struct CausalityOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<CausalityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resonances: Option<Vec<ResonanceInterval>>,
}

pub fn cmd_causality(cfg: &RunConfig, args: &CausalityArgs) -> Result<CausalityOutput, CliError> {
    let geometry = cmd_geometry(cfg)?;
    let photon_speed = cfg.apparatus.fiber_light_speed();
    let length = cfg.apparatus.fiber_length;
    let speed = match &args.speed {
        Some(s) => {
            Some(parse_influence_speed(s).ok_or_else(|| CliError::Invalid(format!("invalid speed syntax `{s}`")))?)
        }
        None if !args.sweep => Some(InfluenceSpeed::Instantaneous),
        None => None,
    };
    Ok(CausalityOutput {
        report: speed.map(|v| influence_window_analysis(&geometry, length, v, photon_speed)),
        resonances: args.sweep.then(|| resonant_influence_speeds(&geometry, length, photon_speed, args.windows)),
    })
}

/// Executes a parsed command line, printing to `stdout`.
pub fn run(cli: Cli, stdout: &mut impl Write) -> Result<(), CliError> {
    let mut cfg = config::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.run.master_seed = seed;
    }
    let mut print = |s: &str| stdout.write_all(s.as_bytes()).map_err(|e| CliError::io("<stdout>", e));
    match cli.command {
        Command::Geometry => {
            let g = cmd_geometry(&cfg)?;
            print(&report::geometry_text(&g))?;
            if let Some(out) = &cli.out {
                write(out, "geometry.json", &to_json(&g))?;
            }
        }
        Command::Analyze(a) => {
            let variance = a.variance.map_or(cfg.analysis.variance, VarianceModel::from);
            let r = cmd_analyze(&a.table, a.accidentals.as_deref(), variance)?;
            let text = report::chsh_text(&r);
            print(&text)?;
            if let Some(out) = &cli.out {
                write(out, "chsh.csv", &report::chsh_csv(&r))?;
                write(out, "chsh.txt", &text)?;
            }
        }
        Command::Simulate(s) => {
            if let Some(r) = s.rotation {
                cfg.run.rotation = r == Switch::On;
            }
            let out = cli.out.unwrap_or_else(|| PathBuf::from("out"));
            let results = cmd_simulate(&cfg, &out, s.jobs)?;
            if let Some(c) = &results.chsh {
                print(&report::chsh_text(c))?;
            }
            let d = &results.degradation;
            print(&report::degradation_text(&d.dark_subtracted, Some(&d.accidental_corrected_coincidences)))?;
            print(&format!("wrote {}\n", out.display()))?;
        }
        Command::Causality(c) => {
            let o = cmd_causality(&cfg, &c)?;
            if c.json {
                print(&to_json(&o))?;
            } else {
                if let Some(r) = &o.report {
                    print(&report::causality_text(r))?;
                }
                if let Some(bands) = &o.resonances {
                    print(&report::resonance_text(bands))?;
                }
            }
            if let Some(out) = &cli.out {
                write(out, "causality.json", &to_json(&o))?;
            }
        }
    }
    Ok(())
}
