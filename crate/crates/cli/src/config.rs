//! Run configuration: one TOML or JSON file with a section per stage,
//! plus `section.key=value` overrides from the command line.

use std::path::{Path, PathBuf};

use faultlens::eval::{EvalConfig, Scenario};
use faultlens::model::{AeConfig, CellKind};
use faultlens::pipeline::DetectConfig;
use faultlens::preprocess::PreprocessConfig;
use faultlens::sim::{FaultInjection, FaultKind, DAY, HOUR};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed for simulation, training and cross-validation.
    pub seed: u64,
    pub paths: Paths,
    pub simulate: SimulateSection,
    pub preprocess: PreprocessConfig,
    pub split: SplitSection,
    pub autoencoder: AeConfig,
    pub detect: DetectSection,
    pub evaluate: EvaluateSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            paths: Paths::default(),
            simulate: SimulateSection::default(),
            preprocess: PreprocessConfig::default(),
            split: SplitSection::default(),
            autoencoder: AeConfig {
                encoder_widths: vec![64, 16],
                decoder_widths: vec![16, 64],
                cell: CellKind::Lstm,
                dropout_rate: 0.0,
                max_epochs: 100,
                early_stop_patience: 10,
                ..AeConfig::default()
            },
            detect: DetectSection::default(),
            evaluate: EvaluateSection::default(),
        }
    }
}

/// Input and output locations. Unset inputs default to the files
/// `simulate` writes into `out_dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub out_dir: PathBuf,
    pub data: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub thresholds: Option<PathBuf>,
    pub lookup: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            data: None,
            metadata: None,
            thresholds: None,
            lookup: None,
            model: None,
        }
    }
}

impl Paths {
    pub fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn data(&self) -> PathBuf {
        self.data.clone().unwrap_or_else(|| self.out("records.csv"))
    }

    pub fn metadata(&self) -> PathBuf {
        self.metadata
            .clone()
            .unwrap_or_else(|| self.out("signals.json"))
    }

    pub fn thresholds(&self) -> PathBuf {
        self.thresholds
            .clone()
            .unwrap_or_else(|| self.out("thresholds.json"))
    }

    pub fn lookup(&self) -> PathBuf {
        self.lookup
            .clone()
            .unwrap_or_else(|| self.out("lookup.csv"))
    }

    pub fn model(&self) -> PathBuf {
        self.model.clone().unwrap_or_else(|| self.out("model.bin"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    /// Plant description (JSON); the built-in mini-plant when unset.
    pub plant: Option<PathBuf>,
    /// Shortens or lengthens the plant's simulated span.
    pub duration_seconds: Option<i64>,
    pub faults: Vec<FaultInjection>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            plant: None,
            duration_seconds: None,
            faults: vec![FaultInjection {
                sensors: vec![0],
                kind: FaultKind::Step,
                start_offset: 11 * DAY + 15 * HOUR,
                duration_seconds: 6 * HOUR,
                magnitude: 16.5,
            }],
        }
    }
}

/// Rows before the split train the detector; `detect`, `localize` and
/// `roc` work on the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    /// Timestamp (RFC 3339 or Unix seconds) where the test part starts.
    pub train_until: Option<String>,
    /// Used when `train_until` is unset.
    pub train_fraction: f64,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self {
            train_until: None,
            train_fraction: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectSection {
    pub c: f64,
    pub m: usize,
}

impl Default for DetectSection {
    fn default() -> Self {
        Self { c: 3.0, m: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthSource {
    /// Threshold-based labels from the thresholds file.
    Automatic,
    /// Fault windows recorded by `simulate`.
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub scenario: u8,
    pub truth: TruthSource,
    pub min_violations: usize,
    pub smoothing_radius: usize,
    pub gap_merge: usize,
    pub c_grid: Vec<f64>,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        let e = EvalConfig::default();
        Self {
            scenario: 1,
            truth: TruthSource::Automatic,
            min_violations: e.min_violations,
            smoothing_radius: e.smoothing_radius,
            gap_merge: e.gap_merge,
            c_grid: e.c_grid,
        }
    }
}

impl RunConfig {
    /// Reads `path` (TOML unless the extension is `.json`), applies the
    /// overrides and checks the result. Without a path the defaults are
    /// used.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut value = match path {
            None => serde_json::to_value(RunConfig::default()).expect("config serializes"),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                if p.extension().is_some_and(|e| e == "json") {
                    serde_json::from_str(&text)
                        .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
                } else {
                    let t: toml::Value = toml::from_str(&text)
                        .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                    serde_json::to_value(t).expect("toml converts to json")
                }
            }
        };
        for (key, raw) in overrides {
            set_path(&mut value, key, parse_scalar(raw))?;
        }
        let config: RunConfig = serde_json::from_value(value)
            .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.preprocess.validate().map_err(CliError::from)?;
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(CliError::Config(
                "split.train_fraction must be in (0, 1)".into(),
            ));
        }
        if !self.detect.c.is_finite() || self.detect.m == 0 {
            return Err(CliError::Config(
                "detect.c must be finite and detect.m >= 1".into(),
            ));
        }
        if Scenario::from_number(self.evaluate.scenario).is_err() {
            return Err(CliError::Config("evaluate.scenario must be 1 or 2".into()));
        }
        if self.evaluate.c_grid.is_empty() {
            return Err(CliError::Config("evaluate.c_grid must not be empty".into()));
        }
        Ok(())
    }

    /// The autoencoder settings with window and seed taken from the rest of
    /// the configuration.
    pub fn ae(&self) -> AeConfig {
        AeConfig {
            window: self.preprocess.window,
            rng_seed: self.seed,
            ..self.autoencoder.clone()
        }
    }

    pub fn detect_config(&self) -> DetectConfig {
        DetectConfig {
            stride: self.preprocess.stride,
            c: self.detect.c,
            m: self.detect.m,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            min_violations: self.evaluate.min_violations,
            smoothing_radius: self.evaluate.smoothing_radius,
            gap_merge: self.evaluate.gap_merge,
            c_grid: self.evaluate.c_grid.clone(),
        }
    }
}

/// Parses an override value as JSON when possible (numbers, booleans,
/// arrays, quoted strings), otherwise keeps it as a plain string.
fn parse_scalar(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed override key '{key}'")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let obj = node.as_object_mut().ok_or_else(|| {
            CliError::Config(format!("override '{key}': '{part}' is not a section"))
        })?;
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    node.as_object_mut()
        .ok_or_else(|| CliError::Config(format!("override '{key}' does not name a field")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got '{s}'"))
}
