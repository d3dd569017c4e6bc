//! Stage hashes and manifests.
//!
//! Every stage has a hash computed from the configuration sections it
//! reads, the digests of its external input files and the hash of the
//! stage it builds on. The hash is written into the stage's artifacts and
//! into `manifest/<stage>.json`, which also lists the digest of every
//! output. A later stage recomputes the expected hash of its prerequisite
//! from the current configuration and refuses to run on a mismatch.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, TruthSource};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Simulate,
    Preprocess,
    Train,
    Detect,
    Localize,
    Evaluate,
    Roc,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::Preprocess => "preprocess",
            Stage::Train => "train",
            Stage::Detect => "detect",
            Stage::Localize => "localize",
            Stage::Evaluate => "evaluate",
            Stage::Roc => "roc",
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Digest of an input file; a missing file is reported against the stage
/// that normally produces it.
pub fn file_digest(path: &Path, what: &str, producer: Stage) -> Result<String, CliError> {
    match std::fs::read(path) {
        Ok(bytes) => Ok(sha256_hex(&bytes)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(CliError::Missing {
            what: what.to_string(),
            path: path.display().to_string(),
            stage: producer.name(),
        }),
        Err(e) => Err(e.into()),
    }
}

fn hash_parts(stage: Stage, parts: Value) -> String {
    // serde_json maps are sorted, so the encoding is canonical.
    let doc = json!({ "stage": stage.name(), "schema_version": SCHEMA_VERSION, "parts": parts });
    sha256_hex(doc.to_string().as_bytes())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("configuration serializes")
}

fn truth_digest(cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.evaluate.truth {
        TruthSource::Automatic => {
            file_digest(&cfg.paths.thresholds(), "thresholds", Stage::Simulate)
        }
        TruthSource::Simulated => file_digest(
            &cfg.paths.out("simulation.json"),
            "simulation ground truth",
            Stage::Simulate,
        ),
    }
}

/// The hash `stage` has under `cfg` and the current input files.
pub fn stage_hash(stage: Stage, cfg: &RunConfig) -> Result<String, CliError> {
    let parts = match stage {
        Stage::Simulate => {
            let plant = match &cfg.simulate.plant {
                Some(p) => Some(file_digest(p, "plant description", Stage::Simulate)?),
                None => None,
            };
            json!([cfg.seed, to_value(&cfg.simulate), plant])
        }
        Stage::Preprocess => json!([
            file_digest(&cfg.paths.data(), "sensor records", Stage::Simulate)?,
            file_digest(&cfg.paths.metadata(), "signal metadata", Stage::Simulate)?,
            to_value(&cfg.preprocess),
            to_value(&cfg.split),
        ]),
        Stage::Train => json!([stage_hash(Stage::Preprocess, cfg)?, to_value(&cfg.ae())]),
        Stage::Detect => json!([stage_hash(Stage::Train, cfg)?, to_value(&cfg.detect)]),
        Stage::Localize => json!([
            stage_hash(Stage::Detect, cfg)?,
            file_digest(&cfg.paths.lookup(), "lookup table", Stage::Simulate)?,
        ]),
        Stage::Evaluate => json!([
            stage_hash(Stage::Preprocess, cfg)?,
            to_value(&cfg.ae()),
            to_value(&cfg.detect),
            to_value(&cfg.evaluate),
            truth_digest(cfg)?,
        ]),
        Stage::Roc => json!([
            stage_hash(Stage::Train, cfg)?,
            to_value(&cfg.evaluate),
            truth_digest(cfg)?,
        ]),
    };
    Ok(hash_parts(stage, parts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub stage: String,
    pub config_hash: String,
    /// Output path to SHA-256 of its contents.
    pub outputs: BTreeMap<String, String>,
}

pub fn manifest_path(cfg: &RunConfig, stage: Stage) -> PathBuf {
    cfg.paths
        .out("manifest")
        .join(format!("{}.json", stage.name()))
}

/// Writes every output, then the manifest listing their digests.
pub fn write_stage(
    cfg: &RunConfig,
    stage: Stage,
    hash: &str,
    outputs: &[(PathBuf, Vec<u8>)],
) -> Result<(), CliError> {
    let mut digests = BTreeMap::new();
    for (path, bytes) in outputs {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, bytes)?;
        log::info!("wrote {}", path.display());
        digests.insert(path.display().to_string(), sha256_hex(bytes));
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        stage: stage.name().to_string(),
        config_hash: hash.to_string(),
        outputs: digests,
    };
    let path = manifest_path(cfg, stage);
    std::fs::create_dir_all(path.parent().expect("manifest dir"))?;
    std::fs::write(&path, pretty(&manifest)?)?;
    Ok(())
}

/// Checks that `stage` has run under the current configuration and that
/// its outputs are unchanged. Returns the stage hash.
pub fn require(cfg: &RunConfig, stage: Stage) -> Result<String, CliError> {
    let path = manifest_path(cfg, stage);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(CliError::Missing {
                what: format!("{} output", stage.name()),
                path: path.display().to_string(),
                stage: stage.name(),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(CliError::Data(format!(
            "{} has schema version {}, this build reads {SCHEMA_VERSION}",
            path.display(),
            manifest.schema_version
        )));
    }
    let expected = stage_hash(stage, cfg)?;
    if manifest.config_hash != expected {
        return Err(CliError::Stale {
            what: format!("{} output", stage.name()),
            found: short(&manifest.config_hash),
            expected: short(&expected),
            stage: stage.name(),
        });
    }
    for (out, digest) in &manifest.outputs {
        let current = file_digest(Path::new(out), &format!("{} output", stage.name()), stage)?;
        if &current != digest {
            return Err(CliError::Stale {
                what: out.clone(),
                found: short(&current),
                expected: short(digest),
                stage: stage.name(),
            });
        }
    }
    Ok(expected)
}

fn short(h: &str) -> String {
    h.chars().take(12).collect()
}

pub fn pretty<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

/// `{schema_version, config_hash, <key>: payload}`.
pub fn envelope<T: Serialize>(hash: &str, key: &str, payload: &T) -> Result<Vec<u8>, CliError> {
    let mut map = serde_json::Map::new();
    map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    map.insert("config_hash".into(), json!(hash));
    map.insert(key.into(), serde_json::to_value(payload)?);
    pretty(&Value::Object(map))
}

/// Reads `key` from an envelope, or the whole document when it is a plain
/// array (as hand-written input files usually are).
pub fn read_payload<T: DeserializeOwned>(
    path: &Path,
    key: &str,
    producer: Stage,
) -> Result<T, CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(CliError::Missing {
                what: key.to_string(),
                path: path.display().to_string(),
                stage: producer.name(),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let mut doc: Value = serde_json::from_str(&text)?;
    let payload = match &mut doc {
        Value::Object(map) if map.contains_key(key) => map.remove(key).expect("checked"),
        _ => doc,
    };
    serde_json::from_value(payload).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
