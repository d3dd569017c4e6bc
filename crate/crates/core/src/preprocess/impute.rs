//! Missing-value treatment: forward fill with a median default.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::series::RegularSeries;

/// Median with the even-count midpoint rule. `values` must be non-empty.
pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len().is_multiple_of(2) {
        (values[m - 1] + values[m]) / 2.0
    } else {
        values[m]
    }
}

/// Fills every gap with the signal's most recent observed value; gaps before
/// the first observation take the median of all observed values. The mask
/// is carried over, so imputing an already imputed series is a no-op.
pub fn impute(series: &RegularSeries) -> Result<RegularSeries> {
    let mut out = series.clone();
    for (i, meta) in series.signals.iter().enumerate() {
        let mut col = out.values.column_mut(i);
        let mut observed: Vec<f64> = col.iter().copied().filter(|v| v.is_finite()).collect();
        if observed.is_empty() {
            if col.is_empty() {
                continue;
            }
            return Err(Error::UnfillableSignal(meta.name.clone()));
        }
        let mut last = median(&mut observed);
        for (t, v) in col.iter_mut().enumerate() {
            if v.is_finite() {
                last = *v;
            } else {
                *v = last;
                out.mask[[t, i]] = true;
            }
        }
    }
    Ok(out)
}

/// Like [`impute`], but a signal with no observations is replaced by draws
/// from `Normal(mean, std)` using the given per-signal statistics.
pub fn impute_with_fallback(
    series: &RegularSeries,
    fallback: &[Option<(f64, f64)>],
    seed: u64,
) -> Result<RegularSeries> {
    let mut patched = series.clone();
    for (i, meta) in series.signals.iter().enumerate() {
        let col = series.values.column(i);
        if !col.is_empty() && col.iter().all(|v| !v.is_finite()) {
            let (mean, std) = fallback
                .get(i)
                .copied()
                .flatten()
                .ok_or_else(|| Error::UnfillableSignal(meta.name.clone()))?;
            let samples =
                synthesize_missing_signal(mean, std, col.len(), seed.wrapping_add(i as u64))?;
            for (t, v) in samples.into_iter().enumerate() {
                patched.values[[t, i]] = v;
                patched.mask[[t, i]] = true;
            }
        }
    }
    impute(&patched)
}

/// `length` i.i.d. draws from `Normal(mean, std)`, deterministic per seed.
pub fn synthesize_missing_signal(
    mean: f64,
    std: f64,
    length: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(std >= 0.0) || !mean.is_finite() || !std.is_finite() {
        return Err(Error::param(format!(
            "invalid normal parameters ({mean}, {std})"
        )));
    }
    let normal = Normal::new(mean, std).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..length).map(|_| normal.sample(&mut rng)).collect())
}
