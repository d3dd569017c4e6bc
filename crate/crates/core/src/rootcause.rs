//! Joining localized signals to plant components via an expert look-up table.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detect::DetectionResult;
use crate::error::{Error, Result};
use crate::series::SignalMeta;

/// Component label used when no significant signal is in the table.
pub const UNMAPPED: &str = "unmapped";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookupEntry {
    pub component: String,
    pub failure_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Columns beyond the known ones, kept verbatim.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookupTable {
    entries: BTreeMap<String, LookupEntry>,
}

impl LookupTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sensor: impl Into<String>, entry: LookupEntry) -> Result<()> {
        let sensor = sensor.into();
        if self.entries.contains_key(&sensor) {
            return Err(Error::DuplicateEntry(sensor));
        }
        self.entries.insert(sensor, entry);
        Ok(())
    }

    pub fn get(&self, sensor: &str) -> Option<&LookupEntry> {
        self.entries.get(sensor)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &LookupEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Parses `sensor,component,failure_type[,note,...]` with a header row.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (Some(s_col), Some(c_col), Some(f_col)) =
            (col("sensor"), col("component"), col("failure_type"))
        else {
            return Err(Error::Data(
                "look-up table header must contain sensor, component and failure_type".into(),
            ));
        };
        let n_col = col("note");
        let mut table = Self::new();
        for row in rdr.records() {
            let row = row?;
            let field = |i: usize| row.get(i).unwrap_or("").to_string();
            let sensor = field(s_col);
            if sensor.is_empty() {
                return Err(Error::Data(format!(
                    "empty sensor name in look-up table line {}",
                    row.position().map_or(0, |p| p.line())
                )));
            }
            let extra = headers
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    ![Some(s_col), Some(c_col), Some(f_col), n_col].contains(&Some(*i))
                })
                .filter_map(|(i, h)| row.get(i).map(|v| (h.to_string(), v.to_string())))
                .filter(|(_, v)| !v.is_empty())
                .collect();
            let entry = LookupEntry {
                component: field(c_col),
                failure_type: field(f_col),
                note: n_col.map(field).filter(|n| !n.is_empty()),
                extra,
            };
            table.insert(sensor, entry)?;
        }
        if table.is_empty() {
            return Err(Error::Data("look-up table has no rows".into()));
        }
        Ok(table)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["sensor", "component", "failure_type", "note"])?;
        for (sensor, e) in &self.entries {
            wtr.write_record([
                sensor.as_str(),
                &e.component,
                &e.failure_type,
                e.note.as_deref().unwrap_or(""),
            ])?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Data(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn load_lookup(path: impl AsRef<Path>) -> Result<LookupTable> {
    let file = std::fs::File::open(path.as_ref())?;
    LookupTable::from_reader(file)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCauseEntry {
    pub contribution_pct: f64,
    pub sensor: String,
    /// `None` when the sensor is not in the table.
    pub component: Option<String>,
    pub failure_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCauseReport {
    pub window_index: usize,
    pub entries: Vec<RootCauseEntry>,
    pub dominant_component: String,
    /// Summed contribution per mapped component, in component order.
    pub component_totals: Vec<(String, f64)>,
}

/// Orders labels like "Component 2" before "Component 10".
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    if a.is_empty() || b.is_empty() {
        return a.cmp(b);
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for ((da, xa), (db, xb)) in ca.iter().zip(&cb) {
        let ord = if *da && *db {
            let (ta, tb) = (xa.trim_start_matches('0'), xb.trim_start_matches('0'));
            ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb))
        } else {
            xa.cmp(xb)
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len()).then_with(|| a.cmp(b))
}

/// Joins each significant signal of an anomalous result to the table.
pub fn analyze(
    result: &DetectionResult,
    signals: &[SignalMeta],
    table: &LookupTable,
) -> Result<RootCauseReport> {
    if !result.is_anomalous || result.significant_signals.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut entries = Vec::with_capacity(result.significant_signals.len());
    for s in &result.significant_signals {
        let sensor = signals
            .get(s.id)
            .map(|m| m.name.clone())
            .ok_or_else(|| Error::param(format!("signal id {} has no metadata", s.id)))?;
        let hit = table.get(&sensor);
        entries.push(RootCauseEntry {
            contribution_pct: s.contribution_pct,
            sensor,
            component: hit.map(|e| e.component.clone()),
            failure_type: hit.map(|e| e.failure_type.clone()),
            note: hit.and_then(|e| e.note.clone()),
        });
    }
    entries.sort_by(|a, b| b.contribution_pct.total_cmp(&a.contribution_pct));

    let mut totals: Vec<(String, f64)> = Vec::new();
    for e in &entries {
        if let Some(c) = &e.component {
            match totals.iter_mut().find(|(name, _)| name == c) {
                Some((_, sum)) => *sum += e.contribution_pct,
                None => totals.push((c.clone(), e.contribution_pct)),
            }
        }
    }
    totals.sort_by(|a, b| natural_cmp(&a.0, &b.0));
    let mut dominant: Option<&(String, f64)> = None;
    for t in &totals {
        if dominant.is_none_or(|d| t.1 > d.1) {
            dominant = Some(t);
        }
    }
    let dominant_component = dominant.map_or_else(|| UNMAPPED.to_string(), |d| d.0.clone());
    Ok(RootCauseReport {
        window_index: result.window_index,
        entries,
        dominant_component,
        component_totals: totals,
    })
}
