//! Simulates the mini-plant with one step fault, trains the LSTM
//! autoencoder on the healthy first days and reports detection,
//! localization and consistency scores on the rest.
//!
//! Usage: cargo run --release --example mini_plant [seed] [magnitude] [sensor] [start hour] [hours]
//!
//! AE_WIDTHS, AE_DROPOUT, AE_PATIENCE, AE_EPOCHS and TRAIN_DAYS override
//! the training setup.

use faultlens::detect::ReportLine;
use faultlens::eval::{
    automatic_window_labels, confusion_metrics, consistency_score_labels, label_windows, EvalConfig,
};
use faultlens::model::AeConfig;
use faultlens::pipeline::{DetectConfig, Detector};
use faultlens::preprocess::{prepare, PreprocessConfig};
use faultlens::rootcause::analyze;
use faultlens::sim::{mini_plant, simulate, FaultInjection, FaultKind, DAY, HOUR};

fn main() -> faultlens::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let magnitude: f64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(16.5);
    let sensor: usize = std::env::args()
        .nth(3)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let start_hour: i64 = std::env::args()
        .nth(4)
        .and_then(|s| s.parse().ok())
        .unwrap_or(15);
    let hours: i64 = std::env::args()
        .nth(5)
        .and_then(|s| s.parse().ok())
        .unwrap_or(6);
    let train_days: i64 = env_or("TRAIN_DAYS", 10);
    let spec = mini_plant();
    let fault = FaultInjection {
        sensors: vec![sensor],
        kind: FaultKind::Step,
        start_offset: (train_days + 1) * DAY + start_hour * HOUR,
        duration_seconds: hours * HOUR,
        magnitude,
    };
    let sim = simulate(&spec, &[fault], seed)?;
    let pre = PreprocessConfig::default();
    let prepared = prepare(
        &sim.records,
        &sim.signals,
        &pre,
        Some((spec.start, spec.end())),
    )?;
    println!(
        "signals after selection: {}, dropped: {:?}",
        prepared.series.n_signals(),
        prepared.dropped
    );
    let split = (train_days * DAY / pre.rate_seconds) as usize;
    let train = prepared.series.slice_rows(0, split);
    let test = prepared.series.slice_rows(split, prepared.series.rows());

    let widths: Vec<usize> = std::env::var("AE_WIDTHS")
        .unwrap_or_else(|_| "64,16".into())
        .split(',')
        .map(|w| w.parse().unwrap())
        .collect();
    let ae = AeConfig {
        window: pre.window,
        encoder_widths: widths.clone(),
        decoder_widths: widths.iter().rev().copied().collect(),
        dropout_rate: env_or("AE_DROPOUT", 0.0),
        rng_seed: seed,
        early_stop_patience: env_or("AE_PATIENCE", 10),
        max_epochs: env_or("AE_EPOCHS", 100),
        ..AeConfig::default()
    };
    let detect = DetectConfig {
        stride: pre.stride,
        c: 3.0,
        m: 3,
    };
    let started = std::time::Instant::now();
    let (detector, history) = Detector::fit(&[&train], &ae, &detect)?;
    println!(
        "trained {} epochs in {:.1?}, best {:?}, threshold {:.5} (mu {:.5}, sigma {:.5})",
        history.epochs.len(),
        started.elapsed(),
        history.best_epoch,
        detector.threshold.value,
        detector.threshold.mu,
        detector.threshold.sigma
    );

    let results = detector.detect(&test)?;
    let pred: Vec<bool> = results.iter().map(|r| r.is_anomalous).collect();
    let truth_ts = sim.truth.labels(test.start, test.rate_seconds, test.rows());
    let truth = label_windows(&truth_ts, pre.window, pre.stride);
    let m = confusion_metrics(&pred, &truth)?;
    println!(
        "f1 {:.3} precision {:.3} recall {:.3} ({:?})",
        m.f1, m.precision, m.recall, m.confusion
    );

    let target = test.signal_index(&spec.sensors[sensor].name).expect("kept");
    let flagged: Vec<_> = results.iter().filter(|r| r.is_anomalous).collect();
    let top1 = flagged
        .iter()
        .filter(|r| r.significant_signals[0].id == target)
        .count();
    let table = spec.lookup_table();
    let dominant = flagged
        .iter()
        .filter(|r| {
            analyze(r, &test.signals, &table)
                .map(|a| a.dominant_component == "Component 1")
                .unwrap_or(false)
        })
        .count();
    println!(
        "top-1 {}/{} dominant {}/{}",
        top1,
        flagged.len(),
        dominant,
        flagged.len()
    );
    for (k, r) in results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_anomalous && r.significant_signals[0].id != target)
    {
        let line = ReportLine::from_result(
            r,
            k,
            test.timestamp(r.window_index),
            &detector.threshold,
            &test.signals,
        );
        println!("  other top-1: {}", serde_json::to_string(&line).unwrap());
    }

    let eval = EvalConfig {
        min_violations: 1,
        ..EvalConfig::default()
    };
    let labels = automatic_window_labels(
        &test,
        &train,
        &spec.thresholds(),
        pre.window,
        pre.stride,
        &eval,
    )?;
    let lm = confusion_metrics(&labels, &truth)?;
    println!(
        "automatic labels vs truth: f1 {:.3} ({:?})",
        lm.f1, lm.confusion
    );
    let k_model = consistency_score_labels(&pred, eval.gap_merge);
    let k_labels = consistency_score_labels(&labels, eval.gap_merge);
    println!("kappa model {k_model:?} labels {k_labels:?}");
    let show = |v: &[bool]| {
        v.iter()
            .map(|&b| if b { '#' } else { '.' })
            .collect::<String>()
    };
    let lo = (DAY + (start_hour - 2) * HOUR) as usize / 600;
    let hi = (DAY + (start_hour + 10) * HOUR) as usize / 600;
    println!("truth  {}", show(&truth[lo..hi]));
    println!("model  {}", show(&pred[lo..hi]));
    println!("labels {}", show(&labels[lo..hi]));
    Ok(())
}

fn env_or<T: std::str::FromStr>(key: &str, default: T) -> T {
    std::env::var(key)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(default)
}
