//! Automatic labels from per-signal bounds: timestamp rule, window rule and
//! smoothing.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::preprocess::{window_starts, TIME_FEATURES};
use crate::series::{RegularSeries, SignalKind};

/// A signal referenced by dense id or by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalRef {
    Id(usize),
    Name(String),
}

impl SignalRef {
    fn resolve(&self, series: &RegularSeries) -> Option<usize> {
        match self {
            SignalRef::Id(i) => (*i < series.n_signals()).then_some(*i),
            SignalRef::Name(n) => series.signal_index(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdRule {
    /// Two-sided normal interval fitted on training values.
    Statistical { confidence: f64 },
    Expert {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalThreshold {
    pub signal: SignalRef,
    #[serde(flatten)]
    pub rule: ThresholdRule,
}

impl SignalThreshold {
    pub fn expert(signal: SignalRef, lower: Option<f64>, upper: Option<f64>) -> Self {
        Self {
            signal,
            rule: ThresholdRule::Expert { lower, upper },
        }
    }

    pub fn statistical(signal: SignalRef, confidence: f64) -> Self {
        Self {
            signal,
            rule: ThresholdRule::Statistical { confidence },
        }
    }
}

pub const DEFAULT_CONFIDENCE: f64 = 0.98;

/// Resolved bounds for one signal. A value violates them when it lies
/// strictly outside.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Bounds {
    pub fn violated(&self, v: f64) -> bool {
        self.lower.is_some_and(|l| v < l) || self.upper.is_some_and(|u| v > u)
    }
}

/// Two-sided standard normal quantile for a confidence level.
pub fn z_for_confidence(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::config(format!(
            "confidence must be in (0, 1), got {confidence}"
        )));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(1.0 - (1.0 - confidence) / 2.0))
}

/// Turns threshold rules into concrete bounds, one per signal of `series`.
/// Statistical rules use the mean and population standard deviation of
/// `training`; time-feature columns never violate.
pub fn resolve_bounds(
    thresholds: &[SignalThreshold],
    series: &RegularSeries,
    training: &RegularSeries,
) -> Result<Vec<Bounds>> {
    if training.signals != series.signals {
        return Err(Error::param(
            "training and labeled series have different signals",
        ));
    }
    let n = series.n_signals();
    let mut bounds: Vec<Option<Bounds>> = vec![None; n];
    for t in thresholds {
        let Some(i) = t.signal.resolve(series) else {
            // thresholds may name signals removed by selection
            continue;
        };
        if bounds[i].is_some() {
            return Err(Error::DuplicateEntry(series.signals[i].name.clone()));
        }
        let b = match t.rule {
            ThresholdRule::Expert { lower, upper } => {
                if lower.is_none() && upper.is_none() {
                    return Err(Error::config(format!(
                        "expert threshold for '{}' has no bound",
                        series.signals[i].name
                    )));
                }
                Bounds { lower, upper }
            }
            ThresholdRule::Statistical { confidence } => {
                if series.signals[i].kind != SignalKind::Numeric {
                    return Err(Error::config(format!(
                        "'{}' is not numeric and needs an expert threshold",
                        series.signals[i].name
                    )));
                }
                let z = z_for_confidence(confidence)?;
                if training.rows() == 0 {
                    return Err(Error::param("statistical thresholds need training rows"));
                }
                let col = training.column(i);
                let (mean, std) = crate::detect::mean_std(&col);
                Bounds {
                    lower: Some(mean - z * std),
                    upper: Some(mean + z * std),
                }
            }
        };
        bounds[i] = Some(b);
    }
    bounds
        .into_iter()
        .enumerate()
        .map(|(i, b)| match b {
            Some(b) => Ok(b),
            None if TIME_FEATURES.contains(&series.signals[i].name.as_str()) => {
                Ok(Bounds::default())
            }
            None => Err(Error::config(format!(
                "no threshold for signal '{}'",
                series.signals[i].name
            ))),
        })
        .collect()
}

/// A timestamp is anomalous when at least `min_violations` signals lie
/// outside their bounds.
pub fn label_timestamps(
    series: &RegularSeries,
    bounds: &[Bounds],
    min_violations: usize,
) -> Result<Vec<bool>> {
    if bounds.len() != series.n_signals() {
        return Err(Error::Dimension {
            expected: series.n_signals(),
            actual: bounds.len(),
        });
    }
    if min_violations == 0 {
        return Err(Error::config("min_violations must be >= 1"));
    }
    Ok(series
        .values
        .rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(bounds)
                .filter(|(v, b)| b.violated(**v))
                .count()
                >= min_violations
        })
        .collect())
}

/// A window is anomalous when every timestamp it covers is.
pub fn label_windows(timestamp_labels: &[bool], w: usize, stride: usize) -> Vec<bool> {
    window_starts(timestamp_labels.len(), w, stride)
        .into_iter()
        .map(|s| timestamp_labels[s..s + w].iter().all(|&b| b))
        .collect()
}

/// Centered moving average over `2*radius + 1` labels (shrinking at the
/// edges); true where the average is at least 0.5.
pub fn smooth_labels(labels: &[bool], radius: usize) -> Vec<bool> {
    let n = labels.len();
    let mut prefix = vec![0usize; n + 1];
    for (i, &b) in labels.iter().enumerate() {
        prefix[i + 1] = prefix[i] + usize::from(b);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(n);
            // count / len >= 0.5, in integers
            2 * (prefix[hi] - prefix[lo]) >= hi - lo
        })
        .collect()
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::series::SignalMeta;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn series(values: Array2<f64>) -> RegularSeries {
        let signals = (0..values.ncols())
            .map(|i| SignalMeta::numeric(i, format!("s{i}")))
            .collect();
        RegularSeries::from_values(0, 60, signals, values).unwrap()
    }

    fn unit_bounds(n: usize) -> Vec<Bounds> {
        vec![
            Bounds {
                lower: Some(0.0),
                upper: Some(1.0)
            };
            n
        ]
    }

    #[test]
    fn ten_of_thirty_seven() {
        let mut v = Array2::from_elem((3, 37), 0.5);
        for i in 0..9 {
            v[[0, i]] = 2.0;
        }
        for i in 0..10 {
            v[[1, i]] = -1.0;
        }
        let labels = label_timestamps(&series(v), &unit_bounds(37), 10).unwrap();
        assert_eq!(labels, vec![false, true, false]);
    }

    #[test]
    fn bounds_are_strict() {
        let b = Bounds {
            lower: Some(0.0),
            upper: Some(1.0),
        };
        assert!(!b.violated(1.0) && !b.violated(0.0));
        assert!(b.violated(1.0 + 1e-12) && b.violated(-1e-12));
        assert!(!Bounds::default().violated(1e300));
    }

    #[test]
    fn window_rule_needs_all() {
        assert_eq!(label_windows(&[true; 10], 10, 10), vec![true]);
        let mut nine = [true; 10];
        nine[4] = false;
        assert_eq!(label_windows(&nine, 10, 10), vec![false]);
        assert!(label_windows(&[], 10, 10).is_empty());
    }

    #[test]
    fn smoothing_examples() {
        let x = [false, true, true, true, false];
        assert_eq!(smooth_labels(&x, 0), x.to_vec());
        // edges average over the available neighbours: (0+1)/2 and (1+0)/2
        assert_eq!(smooth_labels(&x, 1), vec![true; 5]);
        let y = [false, false, true, false, false];
        assert_eq!(smooth_labels(&y, 1), vec![false; 5]);
        assert_eq!(smooth_labels(&[true; 7], 2), vec![true; 7]);
    }

    #[test]
    fn z_value() {
        assert!((z_for_confidence(0.98).unwrap() - 2.326_347_874).abs() < 1e-8);
        assert!(z_for_confidence(1.0).is_err());
    }

    #[test]
    fn threshold_json_shapes() {
        let json = r#"[{"signal":0,"lower":1.5},{"signal":"s1","confidence":0.98},
                       {"signal":2,"lower":0,"upper":3}]"#;
        let t: Vec<SignalThreshold> = serde_json::from_str(json).unwrap();
        assert_eq!(
            t[0],
            SignalThreshold::expert(SignalRef::Id(0), Some(1.5), None)
        );
        assert_eq!(
            t[1],
            SignalThreshold::statistical(SignalRef::Name("s1".into()), 0.98)
        );
        let back: Vec<SignalThreshold> =
            serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn statistical_bounds_from_training() {
        let train = series(Array2::from_shape_fn((4, 1), |(t, _)| {
            [1.0, 3.0, 1.0, 3.0][t]
        }));
        let t = [SignalThreshold::statistical(SignalRef::Id(0), 0.98)];
        let b = resolve_bounds(&t, &train, &train).unwrap();
        let z = z_for_confidence(0.98).unwrap();
        assert_eq!(b[0].lower, Some(2.0 - z));
        assert_eq!(b[0].upper, Some(2.0 + z));
    }

    #[test]
    fn missing_or_empty_threshold_is_config_error() {
        let s = series(Array2::zeros((2, 2)));
        let t = [SignalThreshold::expert(SignalRef::Id(0), Some(0.0), None)];
        assert!(matches!(resolve_bounds(&t, &s, &s), Err(Error::Config(_))));
        let t = [
            SignalThreshold::expert(SignalRef::Id(0), None, None),
            SignalThreshold::expert(SignalRef::Id(1), Some(0.0), None),
        ];
        assert!(matches!(resolve_bounds(&t, &s, &s), Err(Error::Config(_))));
    }

    #[test]
    fn statistical_rejected_for_boolean() {
        let mut s = series(Array2::zeros((2, 1)));
        s.signals[0].kind = SignalKind::Boolean;
        let t = [SignalThreshold::statistical(SignalRef::Id(0), 0.98)];
        assert!(resolve_bounds(&t, &s, &s).is_err());
    }

    proptest! {
        #[test]
        fn window_labels_monotone(
            labels in prop::collection::vec(any::<bool>(), 0..60),
            flip in 0usize..60,
            w in 1usize..6,
            stride in 1usize..6,
        ) {
            let before = label_windows(&labels, w, stride);
            let mut more = labels.clone();
            if !more.is_empty() {
                let k = flip % more.len();
                more[k] = true;
            }
            let after = label_windows(&more, w, stride);
            for (a, b) in before.iter().zip(&after) {
                prop_assert!(!a || *b);
            }
        }

        #[test]
        fn smoothing_oracle(labels in prop::collection::vec(any::<bool>(), 0..40), r in 0usize..5) {
            let got = smooth_labels(&labels, r);
            for i in 0..labels.len() {
                let lo = i.saturating_sub(r);
                let hi = (i + r).min(labels.len() - 1);
                let window = &labels[lo..=hi];
                let avg = window.iter().filter(|&&b| b).count() as f64 / window.len() as f64;
                prop_assert_eq!(got[i], avg >= 0.5);
            }
        }

        #[test]
        fn smoothing_preserves_constant(n in 0usize..40, r in 0usize..5, v in any::<bool>()) {
            prop_assert_eq!(smooth_labels(&vec![v; n], r), vec![v; n]);
        }
    }
}
