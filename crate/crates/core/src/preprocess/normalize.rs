use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::RegularSeries;

/// Per-signal min-max scaling fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationParams {
    pub fn fit(train: &RegularSeries) -> Result<Self> {
        if train.rows() == 0 {
            return Err(Error::param("cannot fit normalization on an empty series"));
        }
        if train.has_gaps() {
            return Err(Error::param(
                "cannot fit normalization on a series with gaps",
            ));
        }
        let n = train.n_signals();
        let (mut min, mut max) = (vec![f64::INFINITY; n], vec![f64::NEG_INFINITY; n]);
        for row in train.values.rows() {
            for (i, &v) in row.iter().enumerate() {
                min[i] = min[i].min(v);
                max[i] = max[i].max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn scale(&self, signal: usize, v: f64) -> f64 {
        let range = self.max[signal] - self.min[signal];
        if range > 0.0 {
            (v - self.min[signal]) / range
        } else {
            0.0
        }
    }

    /// Values outside the training range are not clipped.
    pub fn apply(&self, series: &RegularSeries) -> Result<RegularSeries> {
        if series.n_signals() != self.min.len() {
            return Err(Error::Dimension {
                expected: self.min.len(),
                actual: series.n_signals(),
            });
        }
        let mut out = series.clone();
        for ((_, i), v) in out.values.indexed_iter_mut() {
            *v = self.scale(i, *v);
        }
        Ok(out)
    }
}

pub fn fit_normalization(train: &RegularSeries) -> Result<NormalizationParams> {
    NormalizationParams::fit(train)
}

pub fn apply_normalization(
    series: &RegularSeries,
    params: &NormalizationParams,
) -> Result<RegularSeries> {
    params.apply(series)
}
