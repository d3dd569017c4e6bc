//! Cross-validation over ten chronological segments. The last four are
//! tested one per round; scenario 2 additionally trains on the first six in
//! every round.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::consistency::{consistency_parts, DEFAULT_GAP_MERGE};
use super::labels::{
    label_timestamps, label_windows, resolve_bounds, smooth_labels, SignalThreshold,
};
use super::metrics::{pool_roc, roc_curve, Confusion, ConfusionMetrics, RocPoint};
use crate::error::{Error, Result};
use crate::model::AeConfig;
use crate::pipeline::{DetectConfig, Detector};
use crate::seed::derive_seed;
use crate::series::RegularSeries;

pub const SEGMENTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Train on the other three of segments 7-10.
    Recent,
    /// As `Recent`, plus segments 1-6 in every training set.
    WithHistory,
}

impl Scenario {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Scenario::Recent),
            2 => Ok(Scenario::WithHistory),
            _ => Err(Error::config(format!("scenario must be 1 or 2, got {n}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Scenario::Recent => 1,
            Scenario::WithHistory => 2,
        }
    }
}

/// Segments are numbered 1..=10.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub round: usize,
    pub test_segment: usize,
    pub train_segments: Vec<usize>,
}

pub fn fold_plan(scenario: Scenario) -> Vec<Fold> {
    (1..=4)
        .map(|round| {
            let test_segment = SEGMENTS + 1 - round;
            let mut train_segments: Vec<usize> = match scenario {
                Scenario::Recent => Vec::new(),
                Scenario::WithHistory => (1..=6).collect(),
            };
            train_segments.extend((7..=SEGMENTS).filter(|&s| s != test_segment));
            Fold {
                round,
                test_segment,
                train_segments,
            }
        })
        .collect()
}

/// Where the reference labels come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Truth {
    /// Labels derived from per-signal thresholds, fitted on each fold's
    /// training segments.
    Automatic(Vec<SignalThreshold>),
    /// Known per-timestamp labels, one vector per segment.
    Given(Vec<Vec<bool>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub min_violations: usize,
    pub smoothing_radius: usize,
    pub gap_merge: usize,
    pub c_grid: Vec<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            min_violations: 10,
            smoothing_radius: 2,
            gap_merge: DEFAULT_GAP_MERGE,
            c_grid: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 7.5, 10.0],
        }
    }
}

/// Window labels for `series` from thresholds: timestamp rule, all-`w`
/// window rule, smoothing.
pub fn automatic_window_labels(
    series: &RegularSeries,
    training: &RegularSeries,
    thresholds: &[SignalThreshold],
    window: usize,
    stride: usize,
    eval: &EvalConfig,
) -> Result<Vec<bool>> {
    let bounds = resolve_bounds(thresholds, series, training)?;
    let ts = label_timestamps(series, &bounds, eval.min_violations)?;
    Ok(smooth_labels(
        &label_windows(&ts, window, stride),
        eval.smoothing_radius,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: Fold,
    pub seed: u64,
    pub epochs_run: usize,
    pub threshold: f64,
    pub metrics: ConfusionMetrics,
    /// `None` when no anomaly with positive span was flagged.
    pub kappa_model: Option<f64>,
    pub kappa_labels: Option<f64>,
    pub roc: Vec<RocPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub scenario: u8,
    pub folds: Vec<FoldReport>,
    /// Confusion counts summed over folds.
    pub pooled: ConfusionMetrics,
    pub kappa_model_pooled: Option<f64>,
    pub kappa_model_mean: Option<f64>,
    pub kappa_labels_pooled: Option<f64>,
    pub kappa_labels_mean: Option<f64>,
    pub roc: Vec<RocPoint>,
}

fn ratio((num, den): (f64, usize)) -> Option<f64> {
    (den > 0).then(|| num / den as f64)
}

fn mean(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Numerator and denominator of a consistency score, for pooling across folds.
type ConsistencyParts = (f64, usize);

fn run_fold(
    fold: &Fold,
    segments: &[RegularSeries],
    truth: &Truth,
    ae: &AeConfig,
    detect: &DetectConfig,
    eval: &EvalConfig,
    seed: u64,
) -> Result<(FoldReport, ConsistencyParts, ConsistencyParts)> {
    let train_parts: Vec<&RegularSeries> = fold
        .train_segments
        .iter()
        .map(|&s| &segments[s - 1])
        .collect();
    let test = &segments[fold.test_segment - 1];
    let ae = AeConfig {
        rng_seed: seed,
        ..ae.clone()
    };
    let (detector, history) = Detector::fit(&train_parts, &ae, detect)?;
    let re = detector.re_totals(test)?;
    let pred: Vec<bool> = re
        .iter()
        .map(|&r| detector.threshold.is_anomalous(r))
        .collect();
    let window = detector.window();
    let labels = match truth {
        Truth::Automatic(thresholds) => {
            let training = RegularSeries::concat_rows(&train_parts)?;
            automatic_window_labels(test, &training, thresholds, window, detect.stride, eval)?
        }
        Truth::Given(per_segment) => {
            let ts = &per_segment[fold.test_segment - 1];
            if ts.len() != test.rows() {
                return Err(Error::Dimension {
                    expected: test.rows(),
                    actual: ts.len(),
                });
            }
            label_windows(ts, window, detect.stride)
        }
    };
    let metrics = Confusion::from_labels(&pred, &labels)?.metrics();
    let model_parts = consistency_parts(&pred, eval.gap_merge);
    let label_parts = consistency_parts(&labels, eval.gap_merge);
    let roc = roc_curve(
        &re,
        &labels,
        &eval.c_grid,
        detector.threshold.mu,
        detector.threshold.sigma,
    )?;
    Ok((
        FoldReport {
            fold: fold.clone(),
            seed,
            epochs_run: history.epochs.len(),
            threshold: detector.threshold.value,
            metrics,
            kappa_model: ratio(model_parts),
            kappa_labels: ratio(label_parts),
            roc,
        },
        model_parts,
        label_parts,
    ))
}

/// Runs all four rounds (in parallel) and pools the results. Fold seeds are
/// derived from `master_seed`, so the report does not depend on scheduling.
pub fn run_cv(
    scenario: Scenario,
    segments: &[RegularSeries],
    truth: &Truth,
    ae: &AeConfig,
    detect: &DetectConfig,
    eval: &EvalConfig,
    master_seed: u64,
) -> Result<CvReport> {
    if segments.len() != SEGMENTS {
        return Err(Error::config(format!(
            "cross-validation needs {SEGMENTS} segments, got {}",
            segments.len()
        )));
    }
    if let Truth::Given(t) = truth {
        if t.len() != SEGMENTS {
            return Err(Error::config("given labels must cover all segments"));
        }
    }
    if eval.c_grid.is_empty() {
        return Err(Error::config("c_grid must not be empty"));
    }
    let plan = fold_plan(scenario);
    let results: Vec<_> = plan
        .par_iter()
        .map(|fold| {
            let seed = derive_seed(
                master_seed,
                &[u64::from(scenario.number()), fold.round as u64],
            );
            run_fold(fold, segments, truth, ae, detect, eval, seed)
        })
        .collect::<Result<_>>()?;

    let mut pooled = Confusion::default();
    let (mut km, mut kl) = ((0.0, 0usize), (0.0, 0usize));
    let mut folds = Vec::with_capacity(results.len());
    for (report, m, l) in results {
        pooled.add(&report.metrics.confusion);
        km = (km.0 + m.0, km.1 + m.1);
        kl = (kl.0 + l.0, kl.1 + l.1);
        folds.push(report);
    }
    let curves: Vec<Vec<RocPoint>> = folds.iter().map(|f| f.roc.clone()).collect();
    Ok(CvReport {
        scenario: scenario.number(),
        pooled: pooled.metrics(),
        kappa_model_pooled: ratio(km),
        kappa_model_mean: mean(folds.iter().map(|f| f.kappa_model)),
        kappa_labels_pooled: ratio(kl),
        kappa_labels_mean: mean(folds.iter().map(|f| f.kappa_labels)),
        roc: pool_roc(&curves)?,
        folds,
    })
}
