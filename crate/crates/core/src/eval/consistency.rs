//! Consistency scores: how contiguously an anomaly is flagged over time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GAP_MERGE: usize = 60;

/// Closed interval `[start, end]` in window units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalyInterval {
    pub start: usize,
    pub end: usize,
}

/// Ordered, disjoint intervals treated as one anomaly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anomaly {
    pub intervals: Vec<AnomalyInterval>,
}

impl Anomaly {
    /// `e_N - s_1`.
    pub fn span(&self) -> usize {
        match (self.intervals.first(), self.intervals.last()) {
            (Some(f), Some(l)) => l.end - f.start,
            _ => 0,
        }
    }

    /// `sum_j (e_j - s_j)`.
    pub fn covered(&self) -> usize {
        self.intervals.iter().map(|i| i.end - i.start).sum()
    }
}

/// Maximal runs of `true` become intervals. Consecutive runs whose gap (the
/// number of `false` labels between them) is at most `gap_merge` share one
/// anomaly.
pub fn extract_intervals(labels: &[bool], gap_merge: usize) -> Vec<Anomaly> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &b) in labels.iter().enumerate() {
        match (b, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push(AnomalyInterval {
                    start: s,
                    end: i - 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(AnomalyInterval {
            start: s,
            end: labels.len() - 1,
        });
    }
    let mut anomalies: Vec<Anomaly> = Vec::new();
    for run in runs {
        match anomalies.last_mut() {
            Some(a) if run.start - a.intervals.last().expect("non-empty").end - 1 <= gap_merge => {
                a.intervals.push(run)
            }
            _ => anomalies.push(Anomaly {
                intervals: vec![run],
            }),
        }
    }
    anomalies
}

/// `kappa_a = sum_j (e_j - s_j) / (e_N - s_1)`.
pub fn consistency_score_anomaly(anomaly: &Anomaly) -> Result<f64> {
    if anomaly.intervals.is_empty() {
        return Err(Error::param("anomaly without intervals"));
    }
    for pair in anomaly.intervals.windows(2) {
        if pair[1].start <= pair[0].end {
            return Err(Error::param(
                "anomaly intervals must be ordered and disjoint",
            ));
        }
    }
    if anomaly.intervals.iter().any(|i| i.end < i.start) {
        return Err(Error::param("interval end before start"));
    }
    let span = anomaly.span();
    if span == 0 {
        return Err(Error::DegenerateAnomaly);
    }
    Ok(anomaly.covered() as f64 / span as f64)
}

/// Span-weighted mean of `kappa_a`, which reduces to
/// `sum_a covered_a / sum_a span_a`. Zero-span anomalies carry no weight.
pub fn consistency_score_model(anomalies: &[Anomaly]) -> Result<f64> {
    let mut weighted = 0.0;
    let mut total_span = 0usize;
    for a in anomalies {
        match consistency_score_anomaly(a) {
            Ok(k) => {
                weighted += a.span() as f64 * k;
                total_span += a.span();
            }
            Err(Error::DegenerateAnomaly) => {}
            Err(e) => return Err(e),
        }
    }
    if total_span == 0 {
        return Err(Error::UndefinedScore);
    }
    Ok(weighted / total_span as f64)
}

/// Numerator and denominator of the model score, so that scores over
/// several label streams can be pooled.
pub fn consistency_parts(labels: &[bool], gap_merge: usize) -> (f64, usize) {
    let mut weighted = 0.0;
    let mut total = 0;
    for a in extract_intervals(labels, gap_merge) {
        if let Ok(k) = consistency_score_anomaly(&a) {
            weighted += a.span() as f64 * k;
            total += a.span();
        }
    }
    (weighted, total)
}

pub fn consistency_score_labels(labels: &[bool], gap_merge: usize) -> Result<f64> {
    consistency_score_model(&extract_intervals(labels, gap_merge))
}
