//! Core data model: signal metadata, irregular raw records, regular
//! (resampled) series and flattened feature windows.
//!
//! Timestamps are integer seconds since the Unix epoch, interpreted as UTC.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seconds since the Unix epoch (UTC).
pub type Timestamp = i64;

/// How a signal is aggregated when resampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SignalKind {
    Numeric,
    /// 0/1 health flags; aggregated with max (logical OR).
    Boolean,
    /// Up-counting signal; aggregated with min (the counter's initial position).
    Counter {
        increment: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalMeta {
    #[serde(default)]
    pub id: usize,
    pub name: String,
    #[serde(flatten)]
    pub kind: SignalKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl SignalMeta {
    pub fn numeric(id: usize, name: impl Into<String>) -> Self {
        Self {
            id,
            name: name.into(),
            kind: SignalKind::Numeric,
            unit: None,
        }
    }

    pub fn new(id: usize, name: impl Into<String>, kind: SignalKind) -> Self {
        Self {
            id,
            name: name.into(),
            kind,
            unit: None,
        }
    }
}

/// Checks that ids are dense (`0..n` in order) and names unique, and that
/// counter increments are positive.
pub fn validate_signals(signals: &[SignalMeta]) -> Result<()> {
    let mut names = std::collections::BTreeSet::new();
    for (i, s) in signals.iter().enumerate() {
        if s.id != i {
            return Err(Error::config(format!(
                "signal ids must be dense: '{}' has id {} at position {}",
                s.name, s.id, i
            )));
        }
        if !names.insert(s.name.as_str()) {
            return Err(Error::DuplicateEntry(s.name.clone()));
        }
        if let SignalKind::Counter { increment: 0 } = s.kind {
            return Err(Error::config(format!(
                "counter signal '{}' must have a positive increment",
                s.name
            )));
        }
    }
    Ok(())
}

/// One irregular observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub timestamp: Timestamp,
    pub signal: usize,
    pub value: f64,
}

/// Equal-frequency matrix of `T` rows by `n` signals.
///
/// Row `t` holds the interval `[start + t*rate, start + (t+1)*rate)`.
/// Cells that were not observed are `NaN` with `mask == true` until imputed;
/// after imputation every cell is finite and `mask` records which values
/// were filled in rather than observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularSeries {
    pub start: Timestamp,
    pub rate_seconds: i64,
    pub signals: Vec<SignalMeta>,
    pub values: Array2<f64>,
    pub mask: Array2<bool>,
}

impl RegularSeries {
    /// Builds a fully observed series (mask all false).
    pub fn from_values(
        start: Timestamp,
        rate_seconds: i64,
        signals: Vec<SignalMeta>,
        values: Array2<f64>,
    ) -> Result<Self> {
        if rate_seconds < 1 {
            return Err(Error::param("rate_seconds must be positive"));
        }
        if values.ncols() != signals.len() {
            return Err(Error::Dimension {
                expected: signals.len(),
                actual: values.ncols(),
            });
        }
        let mask = Array2::from_elem(values.raw_dim(), false);
        Ok(Self {
            start,
            rate_seconds,
            signals,
            values,
            mask,
        })
    }

    pub fn n_signals(&self) -> usize {
        self.signals.len()
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn timestamp(&self, row: usize) -> Timestamp {
        self.start + row as i64 * self.rate_seconds
    }

    pub fn end(&self) -> Timestamp {
        self.timestamp(self.rows())
    }

    pub fn has_gaps(&self) -> bool {
        self.values.iter().any(|v| !v.is_finite())
    }

    pub fn column(&self, signal: usize) -> Vec<f64> {
        self.values.column(signal).to_vec()
    }

    pub fn signal_index(&self, name: &str) -> Option<usize> {
        self.signals.iter().position(|s| s.name == name)
    }

    /// Rows `[from, to)` as a new series starting at the matching instant.
    pub fn slice_rows(&self, from: usize, to: usize) -> Self {
        let to = to.min(self.rows());
        let from = from.min(to);
        Self {
            start: self.timestamp(from),
            rate_seconds: self.rate_seconds,
            signals: self.signals.clone(),
            values: self.values.slice(ndarray::s![from..to, ..]).to_owned(),
            mask: self.mask.slice(ndarray::s![from..to, ..]).to_owned(),
        }
    }

    /// Stacks the rows of several series with identical signal layout.
    /// The result keeps the first series' start; row timestamps of later
    /// parts are therefore not meaningful.
    pub fn concat_rows(parts: &[&RegularSeries]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::param("cannot concatenate zero series"))?;
        for p in parts {
            if p.signals != first.signals {
                return Err(Error::param("series have different signal layouts"));
            }
        }
        let values: Vec<ArrayView2<f64>> = parts.iter().map(|p| p.values.view()).collect();
        let mask: Vec<ArrayView2<bool>> = parts.iter().map(|p| p.mask.view()).collect();
        Ok(Self {
            start: first.start,
            rate_seconds: first.rate_seconds,
            signals: first.signals.clone(),
            values: ndarray::concatenate(Axis(0), &values)
                .map_err(|e| Error::param(e.to_string()))?,
            mask: ndarray::concatenate(Axis(0), &mask).map_err(|e| Error::param(e.to_string()))?,
        })
    }
}

/// A `w x n` window flattened signal-major: element `i*w + k` holds signal
/// `i` at offset `k` (both 0-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWindow {
    pub start_index: usize,
    pub w: usize,
    pub data: Vec<f64>,
}

impl FeatureWindow {
    pub fn new(start_index: usize, w: usize, data: Vec<f64>) -> Result<Self> {
        if w == 0 || !data.len().is_multiple_of(w) {
            return Err(Error::param(format!(
                "window data length {} is not a multiple of w = {}",
                data.len(),
                w
            )));
        }
        Ok(Self {
            start_index,
            w,
            data,
        })
    }

    pub fn n_signals(&self) -> usize {
        self.data.len().checked_div(self.w).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// The `w` values of one signal.
    pub fn signal(&self, i: usize) -> &[f64] {
        &self.data[i * self.w..(i + 1) * self.w]
    }

    pub fn to_matrix(&self) -> Array2<f64> {
        unflatten_slice(&self.data, self.w, self.n_signals())
    }
}

/// Flattens a `w x n` matrix (rows = time, columns = signals).
pub fn flatten(window: ArrayView2<f64>) -> FeatureWindow {
    let (w, n) = window.dim();
    let mut data = Vec::with_capacity(w * n);
    for i in 0..n {
        data.extend(window.column(i).iter().copied());
    }
    FeatureWindow {
        start_index: 0,
        w,
        data,
    }
}

/// Inverse of [`flatten`].
pub fn unflatten(fw: &FeatureWindow, w: usize, n: usize) -> Result<Array2<f64>> {
    if fw.data.len() != w * n {
        return Err(Error::Dimension {
            expected: w * n,
            actual: fw.data.len(),
        });
    }
    Ok(unflatten_slice(&fw.data, w, n))
}

fn unflatten_slice(data: &[f64], w: usize, n: usize) -> Array2<f64> {
    Array2::from_shape_fn((w, n), |(k, i)| data[i * w + k])
}
