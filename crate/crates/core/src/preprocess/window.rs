use crate::error::{Error, Result};
use crate::series::{FeatureWindow, RegularSeries};

/// Start rows of all full windows: `0, stride, 2*stride, ...`.
pub fn window_starts(rows: usize, w: usize, stride: usize) -> Vec<usize> {
    if w == 0 || stride == 0 || rows < w {
        return Vec::new();
    }
    (0..=rows - w).step_by(stride).collect()
}

/// Cuts the series into flattened windows covering rows `[s, s + w)`.
/// A trailing partial window is discarded.
pub fn windowize(series: &RegularSeries, w: usize, stride: usize) -> Result<Vec<FeatureWindow>> {
    if w == 0 || stride == 0 {
        return Err(Error::param("window and stride must be positive"));
    }
    let n = series.n_signals();
    Ok(window_starts(series.rows(), w, stride)
        .into_iter()
        .map(|s| {
            let mut data = Vec::with_capacity(w * n);
            for i in 0..n {
                data.extend((s..s + w).map(|t| series.values[[t, i]]));
            }
            FeatureWindow {
                start_index: s,
                w,
                data,
            }
        })
        .collect())
}
