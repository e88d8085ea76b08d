//! Run configuration: one TOML file with a section per module, plus
//! `section.key=value` overrides from the command line.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use bellgate_core::runner::{grid_settings, AnalysisOptions};
use bellgate_core::{ApparatusConfig, CorrelationModel, DetectorConfig, RunPlan, SignConvention};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Emitted pairs per second.
    pub pair_rate: f64,
    pub integration_time_per_setting: f64,
    pub rotation: bool,
    pub master_seed: u64,
    pub phase_offset: f64,
    /// Seconds per row of the simulated luminosity table.
    pub table1_duration: f64,
    /// Luminosity table to calibrate pair rate and efficiencies from.
    /// Relative paths resolve against the config file; empty disables.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibrate_from: Option<PathBuf>,
    /// `[alice, bob]` angle pairs; the 16-cell grid when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settings: Option<Vec<[f64; 2]>>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            pair_rate: 1.653e6,
            integration_time_per_setting: 60.0,
            rotation: true,
            master_seed: 0,
            phase_offset: 0.0,
            table1_duration: 60.0,
            calibrate_from: None,
            settings: None,
        }
    }
}

fn default_model() -> CorrelationModel {
    CorrelationModel::quantum(SignConvention::Mirrored, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub apparatus: ApparatusConfig,
    pub detector: DetectorConfig,
    #[serde(default = "default_model")]
    pub model: CorrelationModel,
    pub run: RunSection,
    pub analysis: AnalysisOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            apparatus: ApparatusConfig::default(),
            detector: DetectorConfig::default(),
            model: default_model(),
            run: RunSection::default(),
            analysis: AnalysisOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn plan(&self) -> RunPlan {
        RunPlan {
            apparatus: self.apparatus,
            detector: self.detector,
            model: self.model.clone(),
            pair_rate: self.run.pair_rate,
            integration_time_per_setting: self.run.integration_time_per_setting,
            rotation: self.run.rotation,
            settings: match &self.run.settings {
                Some(s) => s.iter().map(|&[a, b]| (a, b)).collect(),
                None => grid_settings(),
            },
            master_seed: self.run.master_seed,
            phase_offset: self.run.phase_offset,
            analysis: self.analysis,
        }
    }
}

/// Parses the right-hand side of an override as a TOML value, falling back to
/// a bare string.
fn override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    toml::from_str::<toml::Table>(&doc)
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies one `a.b.c=value` override in place.
pub fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override key `{key}` is malformed")));
    }
    let (last, parents) = path.split_last().expect("split yields one part");
    let mut table = root;
    for part in parents {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override `{key}`: `{part}` is not a section")))?;
    }
    table.insert(last.to_string(), override_value(raw.trim()));
    Ok(())
}

/// Builds a config from TOML text and overrides.
pub fn parse(text: &str, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let mut cfg = RunConfig::deserialize(table).map_err(|e| CliError::Config(e.message().to_string()))?;
    if cfg.run.calibrate_from.as_ref().is_some_and(|p| p.as_os_str().is_empty()) {
        cfg.run.calibrate_from = None;
    }
    Ok(cfg)
}

/// Reads the config file if given, else starts from the bench defaults.
/// Relative `calibrate_from` paths are resolved against the file's directory.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let Some(path) = path else {
        return parse("", overrides);
    };
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CliError::ConfigNotFound(path.to_path_buf()),
        _ => CliError::Io { path: path.to_path_buf(), source: e },
    })?;
    let mut cfg = parse(&text, overrides)?;
    if let Some(rel) = cfg.run.calibrate_from.as_ref().filter(|p| p.is_relative()) {
        let dir = path.parent().unwrap_or(Path::new("."));
        cfg.run.calibrate_from = Some(dir.join(rel));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bellgate_core::runner::AnalysisOptions;
    use bellgate_core::{InfluenceSpeed, SignConvention};

    #[test]
    fn empty_file_is_bench() {
        let cfg = parse("", &[]).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.apparatus, ApparatusConfig::bench());
        assert_eq!(cfg.plan().settings.len(), 16);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse("[apparatus]\naperture = 1e-3\n", &[]).is_err());
        assert!(parse("[extra]\nx = 1\n", &[]).is_err());
        assert!(parse("[run]\npair_rate = 1.0\nspeed = 2\n", &[]).is_err());
    }

    #[test]
    fn integer_values_fill_float_fields() {
        let cfg = parse("[apparatus]\nrotation_rate = 2000\n", &[]).unwrap();
        assert_eq!(cfg.apparatus.rotation_rate, 2000.0);
    }

    #[test]
    fn overrides_apply_before_validation_of_keys() {
        let o = ["apparatus.aperture_width=2e-3".to_string(), "run.rotation=false".to_string()];
        let cfg = parse("", &o).unwrap();
        assert_eq!(cfg.apparatus.aperture_width, 2e-3);
        assert!(!cfg.run.rotation);
        assert!(parse("", &["apparatus.bogus=1".to_string()]).is_err());
        assert!(parse("", &["apparatus.aperture_width".to_string()]).is_err());
        assert!(parse("", &["apparatus..x=1".to_string()]).is_err());
    }

    #[test]
    fn string_override_without_quotes() {
        let o = ["model.kind=malus_lhv".to_string()];
        let cfg = parse("", &o).unwrap();
        assert_eq!(cfg.model, CorrelationModel::MalusLhv);
    }

    #[test]
    fn models_parse() {
        let q = parse("[model]\nkind = \"quantum\"\nconvention = \"plus\"\nvisibility = 0.5\n", &[]).unwrap();
        assert_eq!(q.model, CorrelationModel::quantum(SignConvention::Plus, 0.5));
        let t = parse(
            "[model]\nkind = \"traveling_influence\"\ninfluence_speed = \"instant\"\n\
             informed = { kind = \"quantum\", visibility = 1.0 }\nuninformed = { kind = \"malus_lhv\" }\n",
            &[],
        )
        .unwrap();
        match t.model {
            CorrelationModel::TravelingInfluence { influence_speed, .. } => {
                assert_eq!(influence_speed, InfluenceSpeed::Instantaneous)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn analysis_section() {
        let cfg = parse("[analysis]\naccidental_convention = \"single\"\nvariance = \"conservative\"\n", &[]).unwrap();
        assert_ne!(cfg.analysis, AnalysisOptions::default());
    }

    #[test]
    fn explicit_settings() {
        let cfg = parse("[run]\nsettings = [[0, 22.5], [45, 67.5]]\n", &[]).unwrap();
        assert_eq!(cfg.plan().settings, vec![(0.0, 22.5), (45.0, 67.5)]);
    }

    #[test]
    fn empty_calibration_path_disables() {
        let cfg = parse("[run]\ncalibrate_from = \"table1.csv\"\n", &["run.calibrate_from=".to_string()]).unwrap();
        assert_eq!(cfg.run.calibrate_from, None);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = parse("", &["run.master_seed=7".to_string()]).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(parse(&text, &[]).unwrap(), cfg);
    }
}
