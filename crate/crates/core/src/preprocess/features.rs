use chrono::{DateTime, Datelike, Timelike};
use ndarray::{concatenate, Array2, Axis};

use crate::error::{Error, Result};
use crate::series::{RegularSeries, SignalMeta, Timestamp};

pub const TIME_FEATURES: [&str; 3] = ["month", "hour", "weekday"];

/// `(month 1-12, hour 0-23, weekday 0-6 with Monday = 0)` in UTC.
pub fn calendar(ts: Timestamp) -> Result<(u32, u32, u32)> {
    let dt = DateTime::from_timestamp(ts, 0)
        .ok_or_else(|| Error::param(format!("timestamp {ts} out of range")))?;
    Ok((dt.month(), dt.hour(), dt.weekday().num_days_from_monday()))
}

/// Appends month, hour and weekday as numeric signals.
pub fn add_time_features(series: &RegularSeries) -> Result<RegularSeries> {
    let rows = series.rows();
    let mut extra = Array2::<f64>::zeros((rows, 3));
    for t in 0..rows {
        let (month, hour, weekday) = calendar(series.timestamp(t))?;
        extra[[t, 0]] = f64::from(month);
        extra[[t, 1]] = f64::from(hour);
        extra[[t, 2]] = f64::from(weekday);
    }
    let mut signals = series.signals.clone();
    let n = signals.len();
    for (k, name) in TIME_FEATURES.iter().enumerate() {
        if series.signal_index(name).is_some() {
            return Err(Error::DuplicateEntry((*name).to_string()));
        }
        signals.push(SignalMeta::numeric(n + k, *name));
    }
    let values = concatenate(Axis(1), &[series.values.view(), extra.view()])
        .map_err(|e| Error::param(e.to_string()))?;
    let mask = concatenate(
        Axis(1),
        &[
            series.mask.view(),
            Array2::from_elem((rows, 3), false).view(),
        ],
    )
    .map_err(|e| Error::param(e.to_string()))?;
    Ok(RegularSeries {
        start: series.start,
        rate_seconds: series.rate_seconds,
        signals,
        values,
        mask,
    })
}
