//! Kind-aware resampling of irregular records onto a regular grid.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::series::{
    validate_signals, RawRecord, RegularSeries, SignalKind, SignalMeta, Timestamp,
};

/// Resampling output; `ignored` counts records outside the span or with an
/// unknown signal id.
#[derive(Debug, Clone)]
pub struct Resampled {
    pub series: RegularSeries,
    pub ignored: usize,
}

/// Resamples onto `floor((end - start) / rate)` rows. Each cell aggregates
/// the observations in `[t, t + rate)`: mean for numeric signals, max for
/// boolean, min for counters. Cells without observations are `NaN` and
/// masked.
///
/// The result does not depend on input order: records are sorted before
/// accumulation so floating-point sums are reproducible.
pub fn resample(
    records: &[RawRecord],
    signals: &[SignalMeta],
    rate_seconds: i64,
    start: Timestamp,
    end: Timestamp,
) -> Result<Resampled> {
    if rate_seconds < 1 {
        return Err(Error::param("rate_seconds must be positive"));
    }
    if end < start {
        return Err(Error::param("span end precedes start"));
    }
    validate_signals(signals)?;
    let n = signals.len();
    let rows = ((end - start) / rate_seconds) as usize;
    let covered_end = start + rows as i64 * rate_seconds;

    let mut sorted: Vec<RawRecord> = Vec::with_capacity(records.len());
    let mut ignored = 0usize;
    for r in records {
        if r.signal >= n
            || r.timestamp < start
            || r.timestamp >= covered_end
            || !r.value.is_finite()
        {
            ignored += 1;
        } else {
            sorted.push(*r);
        }
    }
    if ignored > 0 {
        log::warn!("resample: ignored {ignored} records outside the span or with unknown signals");
    }
    sorted.sort_by(|a, b| {
        a.signal
            .cmp(&b.signal)
            .then(a.timestamp.cmp(&b.timestamp))
            .then(a.value.total_cmp(&b.value))
    });

    let mut values = Array2::from_elem((rows, n), f64::NAN);
    let mut counts = Array2::<u32>::zeros((rows, n));
    for r in &sorted {
        let row = ((r.timestamp - start) / rate_seconds) as usize;
        let cell = &mut values[[row, r.signal]];
        let count = &mut counts[[row, r.signal]];
        *cell = if *count == 0 {
            r.value
        } else {
            match signals[r.signal].kind {
                SignalKind::Numeric => *cell + r.value,
                SignalKind::Boolean => cell.max(r.value),
                SignalKind::Counter { .. } => cell.min(r.value),
            }
        };
        *count += 1;
    }
    for ((row, col), v) in values.indexed_iter_mut() {
        let c = counts[[row, col]];
        if c > 0 && signals[col].kind == SignalKind::Numeric {
            *v /= f64::from(c);
        }
    }
    let mask = counts.mapv(|c| c == 0);
    Ok(Resampled {
        series: RegularSeries {
            start,
            rate_seconds,
            signals: signals.to_vec(),
            values,
            mask,
        },
        ignored,
    })
}
