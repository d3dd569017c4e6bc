//! Cleaning and correlation-based signal selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{RawRecord, RegularSeries, SignalMeta, Timestamp};

/// Drops records before `cleaning_start`, keeping order.
pub fn clean(records: &[RawRecord], cleaning_start: Timestamp) -> Vec<RawRecord> {
    records
        .iter()
        .filter(|r| r.timestamp >= cleaning_start)
        .copied()
        .collect()
}

/// Pearson correlation with population (biased) covariance.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::param("correlation needs at least two samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// A signal removed by [`select_signals`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedSignal {
    pub signal: SignalMeta,
    /// Name of the retained signal it correlates with.
    pub correlated_with: String,
    pub rho: f64,
}

/// Greedy selection in id order: a signal is dropped when its absolute
/// correlation with an already retained signal reaches `cutoff`. Signals
/// with zero variance never correlate and are always kept. Retained signals
/// are re-numbered densely.
pub fn select_signals(
    series: &RegularSeries,
    cutoff: f64,
) -> Result<(RegularSeries, Vec<DroppedSignal>)> {
    if !(cutoff > 0.0 && cutoff <= 1.0) {
        return Err(Error::param("correlation cutoff must be in (0, 1]"));
    }
    if series.has_gaps() {
        return Err(Error::param("signal selection requires an imputed series"));
    }
    let columns: Vec<Vec<f64>> = (0..series.n_signals()).map(|i| series.column(i)).collect();
    let mut kept: Vec<usize> = Vec::new();
    let mut dropped = Vec::new();
    'candidate: for j in 0..series.n_signals() {
        for &i in &kept {
            match correlation(&columns[i], &columns[j]) {
                Ok(rho) if rho.abs() >= cutoff => {
                    dropped.push(DroppedSignal {
                        signal: series.signals[j].clone(),
                        correlated_with: series.signals[i].name.clone(),
                        rho,
                    });
                    continue 'candidate;
                }
                Ok(_) | Err(Error::UndefinedCorrelation) => {}
                Err(e) => return Err(e),
            }
        }
        kept.push(j);
    }
    Ok((retain_columns(series, &kept), dropped))
}

pub(crate) fn retain_columns(series: &RegularSeries, keep: &[usize]) -> RegularSeries {
    let signals = keep
        .iter()
        .enumerate()
        .map(|(new_id, &old)| SignalMeta {
            id: new_id,
            ..series.signals[old].clone()
        })
        .collect();
    RegularSeries {
        start: series.start,
        rate_seconds: series.rate_seconds,
        signals,
        values: series.values.select(ndarray::Axis(1), keep),
        mask: series.mask.select(ndarray::Axis(1), keep),
    }
}
