//! Label generation, metrics, consistency scores and cross-validation.

mod consistency;
mod cv;
mod labels;
mod metrics;

pub use consistency::{
    consistency_parts, consistency_score_anomaly, consistency_score_labels,
    consistency_score_model, extract_intervals, Anomaly, AnomalyInterval, DEFAULT_GAP_MERGE,
};
pub use cv::{
    automatic_window_labels, fold_plan, run_cv, CvReport, EvalConfig, Fold, FoldReport, Scenario,
    Truth, SEGMENTS,
};
pub use labels::{
    label_timestamps, label_windows, resolve_bounds, smooth_labels, z_for_confidence, Bounds,
    SignalRef, SignalThreshold, ThresholdRule, DEFAULT_CONFIDENCE,
};
pub use metrics::{
    confusion_metrics, pool_roc, roc_curve, roc_to_csv, Confusion, ConfusionMetrics, RocPoint,
};
