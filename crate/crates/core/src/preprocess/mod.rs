//! Raw records to normalized feature windows: cleaning, signal selection,
//! resampling, imputation, timestamp features, normalization, windowing.

mod features;
mod impute;
pub mod io;
mod normalize;
mod resample;
mod select;
mod window;

pub use features::{add_time_features, calendar, TIME_FEATURES};
pub use impute::{impute, impute_with_fallback, synthesize_missing_signal};
pub use normalize::{apply_normalization, fit_normalization, NormalizationParams};
pub use resample::{resample, Resampled};
pub use select::{clean, correlation, select_signals, DroppedSignal};
pub use window::{window_starts, windowize};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{RawRecord, RegularSeries, SignalMeta, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub rate_seconds: i64,
    pub window: usize,
    pub stride: usize,
    pub correlation_cutoff: f64,
    pub cleaning_start: Option<Timestamp>,
    pub add_time_features: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            rate_seconds: 60,
            window: 10,
            stride: 10,
            correlation_cutoff: 0.95,
            cleaning_start: None,
            add_time_features: true,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rate_seconds < 1 || self.window < 1 || self.stride < 1 {
            return Err(Error::config(
                "rate_seconds, window and stride must be >= 1",
            ));
        }
        if !(self.correlation_cutoff > 0.0 && self.correlation_cutoff <= 1.0) {
            return Err(Error::config("correlation_cutoff must be in (0, 1]"));
        }
        Ok(())
    }
}

/// A regular, imputed series ready for labeling and normalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prepared {
    pub series: RegularSeries,
    pub dropped: Vec<DroppedSignal>,
    pub ignored_records: usize,
}

/// Runs cleaning, resampling, imputation, correlation-based selection and
/// (optionally) time features. Selection happens before time features are
/// appended, so those are never dropped.
///
/// Without an explicit span the grid starts at the first kept record,
/// aligned down to a multiple of the rate, and ends after the last record.
pub fn prepare(
    records: &[RawRecord],
    signals: &[SignalMeta],
    config: &PreprocessConfig,
    span: Option<(Timestamp, Timestamp)>,
) -> Result<Prepared> {
    config.validate()?;
    let records = match config.cleaning_start {
        Some(cut) => clean(records, cut),
        None => records.to_vec(),
    };
    let (start, end) = match span {
        Some(s) => s,
        None => {
            let first = records
                .iter()
                .map(|r| r.timestamp)
                .min()
                .ok_or_else(|| Error::Data("no records left after cleaning".into()))?;
            let last = records.iter().map(|r| r.timestamp).max().unwrap_or(first);
            (
                first.div_euclid(config.rate_seconds) * config.rate_seconds,
                last + 1,
            )
        }
    };
    let resampled = resample(&records, signals, config.rate_seconds, start, end)?;
    let imputed = impute(&resampled.series)?;
    let (selected, dropped) = select_signals(&imputed, config.correlation_cutoff)?;
    let series = if config.add_time_features {
        add_time_features(&selected)?
    } else {
        selected
    };
    Ok(Prepared {
        series,
        dropped,
        ignored_records: resampled.ignored,
    })
}
