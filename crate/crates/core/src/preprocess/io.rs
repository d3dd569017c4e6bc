//! Raw-record and signal-metadata files.
//!
//! Records are CSV with header `timestamp,signal,value` or JSON lines with the
//! same fields. Timestamps may be RFC 3339 strings or integer epoch seconds.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::DateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{validate_signals, RawRecord, SignalMeta, Timestamp};

pub fn parse_timestamp(s: &str) -> Result<Timestamp> {
    let s = s.trim();
    if let Ok(secs) = s.parse::<i64>() {
        return Ok(secs);
    }
    DateTime::parse_from_rfc3339(s)
        .map(|dt| dt.timestamp())
        .map_err(|e| Error::Data(format!("bad timestamp '{s}': {e}")))
}

#[derive(Debug, Deserialize, Serialize)]
struct RecordRow {
    #[serde(deserialize_with = "de_timestamp")]
    timestamp: Timestamp,
    signal: String,
    value: f64,
}

fn de_timestamp<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Timestamp, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Ts {
        Int(i64),
        Text(String),
    }
    match Ts::deserialize(d)? {
        Ts::Int(v) => Ok(v),
        Ts::Text(s) => parse_timestamp(&s).map_err(serde::de::Error::custom),
    }
}

/// Records loaded from disk; rows naming unknown signals are skipped and counted.
#[derive(Debug, Clone, Default)]
pub struct LoadedRecords {
    pub records: Vec<RawRecord>,
    pub unknown_signal_rows: usize,
}

fn name_index(signals: &[SignalMeta]) -> BTreeMap<&str, usize> {
    signals.iter().map(|s| (s.name.as_str(), s.id)).collect()
}

fn collect_rows(
    rows: impl Iterator<Item = Result<RecordRow>>,
    signals: &[SignalMeta],
) -> Result<LoadedRecords> {
    let index = name_index(signals);
    let mut out = LoadedRecords::default();
    for row in rows {
        let row = row?;
        match index.get(row.signal.as_str()) {
            Some(&id) => out.records.push(RawRecord {
                timestamp: row.timestamp,
                signal: id,
                value: row.value,
            }),
            None => out.unknown_signal_rows += 1,
        }
    }
    if out.unknown_signal_rows > 0 {
        log::warn!(
            "skipped {} records with unknown signal names",
            out.unknown_signal_rows
        );
    }
    Ok(out)
}

/// Lines starting with `#` are comments.
pub fn read_records_csv(path: &Path, signals: &[SignalMeta]) -> Result<LoadedRecords> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    collect_rows(rdr.deserialize().map(|r| r.map_err(Error::from)), signals)
}

pub fn read_records_jsonl(path: &Path, signals: &[SignalMeta]) -> Result<LoadedRecords> {
    let file = std::fs::File::open(path)?;
    let lines = BufReader::new(file).lines().filter_map(|l| match l {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(serde_json::from_str::<RecordRow>(&l).map_err(Error::from)),
        Err(e) => Some(Err(Error::from(e))),
    });
    collect_rows(lines, signals)
}

/// Dispatches on extension: `.jsonl`/`.ndjson` are JSON lines, everything else CSV.
pub fn read_records(path: &Path, signals: &[SignalMeta]) -> Result<LoadedRecords> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("ndjson") => read_records_jsonl(path, signals),
        _ => read_records_csv(path, signals),
    }
}

pub fn write_records_csv(path: &Path, records: &[RawRecord], signals: &[SignalMeta]) -> Result<()> {
    write_records_csv_to(std::fs::File::create(path)?, records, signals)
}

pub fn write_records_csv_to<W: Write>(
    out: W,
    records: &[RawRecord],
    signals: &[SignalMeta],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in records {
        let name = signals
            .get(r.signal)
            .ok_or_else(|| Error::param(format!("record refers to unknown signal {}", r.signal)))?;
        wtr.serialize(RecordRow {
            timestamp: r.timestamp,
            signal: name.name.clone(),
            value: r.value,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_records_jsonl(
    path: &Path,
    records: &[RawRecord],
    signals: &[SignalMeta],
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        let name = &signals
            .get(r.signal)
            .ok_or_else(|| Error::param(format!("record refers to unknown signal {}", r.signal)))?
            .name;
        serde_json::to_writer(
            &mut out,
            &RecordRow {
                timestamp: r.timestamp,
                signal: name.clone(),
                value: r.value,
            },
        )?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the signal metadata list; ids are assigned by position.
pub fn read_signal_meta(path: &Path) -> Result<Vec<SignalMeta>> {
    let text = std::fs::read_to_string(path)?;
    let mut signals: Vec<SignalMeta> = serde_json::from_str(&text)?;
    for (i, s) in signals.iter_mut().enumerate() {
        s.id = i;
    }
    validate_signals(&signals)?;
    Ok(signals)
}

pub fn write_signal_meta(path: &Path, signals: &[SignalMeta]) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(signals)?)?;
    Ok(())
}
