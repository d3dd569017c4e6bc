use std::collections::BTreeMap;
use std::path::PathBuf;

use faultlens::detect::{
    read_report_jsonl, write_report_jsonl, DetectionResult, ReportLine, SignificantSignal,
    ThresholdSpec,
};
use faultlens::eval::{
    automatic_window_labels, consistency_score_labels, label_windows, roc_curve, roc_to_csv,
    run_cv, Scenario, SignalThreshold, Truth, SEGMENTS,
};
use faultlens::model::{self, TrainingHistory};
use faultlens::pipeline::Detector;
use faultlens::preprocess::io::{
    parse_timestamp, read_records, read_signal_meta, write_records_csv_to,
};
use faultlens::preprocess::{prepare, NormalizationParams, Prepared};
use faultlens::rootcause::{analyze, load_lookup, RootCauseReport};
use faultlens::series::{RegularSeries, SignalMeta, Timestamp};
use faultlens::sim::{mini_plant, simulate, GroundTruth, PlantSpec};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::artifact::{
    envelope, pretty, read_payload, require, stage_hash, write_stage, Stage, SCHEMA_VERSION,
};
use crate::config::{RunConfig, TruthSource};
use crate::error::CliError;

#[derive(Debug, Serialize, Deserialize)]
struct SimulationSummary {
    start: Timestamp,
    end: Timestamp,
    records: usize,
    truth: GroundTruth,
}

#[derive(Debug, Serialize, Deserialize)]
struct PreprocessedData {
    /// First row of the test part.
    split_row: usize,
    prepared: Prepared,
}

/// Everything of a trained detector except the network weights, which live
/// in the model file.
#[derive(Debug, Serialize, Deserialize)]
struct DetectorMeta {
    normalization: NormalizationParams,
    threshold: ThresholdSpec,
    stride: usize,
    signals: Vec<SignalMeta>,
    history: TrainingHistory,
}

#[derive(Debug, Serialize, Deserialize)]
struct Localized {
    start_timestamp: Timestamp,
    #[serde(flatten)]
    report: RootCauseReport,
}

pub fn simulate_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let hash = stage_hash(Stage::Simulate, cfg)?;
    let mut spec: PlantSpec = match &cfg.simulate.plant {
        Some(p) => read_payload(p, "plant", Stage::Simulate)?,
        None => mini_plant(),
    };
    if let Some(d) = cfg.simulate.duration_seconds {
        spec.duration_seconds = d;
    }
    let sim = simulate(&spec, &cfg.simulate.faults, cfg.seed)?;

    let mut records =
        format!("# schema_version={SCHEMA_VERSION} config_hash={hash}\n").into_bytes();
    write_records_csv_to(&mut records, &sim.records, &sim.signals)?;
    let summary = SimulationSummary {
        start: spec.start,
        end: spec.end(),
        records: sim.records.len(),
        truth: sim.truth.clone(),
    };
    let mut lookup = format!("# schema_version={SCHEMA_VERSION} config_hash={hash}\n").into_bytes();
    lookup.extend(spec.lookup_table().to_csv()?.into_bytes());
    write_stage(
        cfg,
        Stage::Simulate,
        &hash,
        &[
            (cfg.paths.data(), records),
            (cfg.paths.metadata(), pretty(&sim.signals)?),
            (
                cfg.paths.thresholds(),
                envelope(&hash, "thresholds", &spec.thresholds())?,
            ),
            (cfg.paths.lookup(), lookup),
            (
                cfg.paths.out("simulation.json"),
                envelope(&hash, "simulation", &summary)?,
            ),
        ],
    )?;
    println!(
        "simulated {} records of {} signals with {} fault(s)",
        sim.records.len(),
        sim.signals.len(),
        sim.truth.faults.len()
    );
    Ok(())
}

fn split_row(cfg: &RunConfig, series: &RegularSeries) -> Result<usize, CliError> {
    let rows = series.rows();
    let row = match &cfg.split.train_until {
        Some(t) => {
            let ts = parse_timestamp(t)
                .map_err(|e| CliError::Config(format!("split.train_until: {e}")))?;
            let offset = (ts - series.start).max(0);
            ((offset + series.rate_seconds - 1) / series.rate_seconds) as usize
        }
        None => (rows as f64 * cfg.split.train_fraction).round() as usize,
    };
    let w = cfg.preprocess.window;
    if row < w || row + w > rows {
        return Err(CliError::Config(format!(
            "split leaves fewer than {w} rows on one side ({row} train, {} test)",
            rows.saturating_sub(row)
        )));
    }
    Ok(row)
}

pub fn preprocess_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let hash = stage_hash(Stage::Preprocess, cfg)?;
    let signals = read_signal_meta(&cfg.paths.metadata())?;
    let loaded = read_records(&cfg.paths.data(), &signals)?;
    let prepared = prepare(&loaded.records, &signals, &cfg.preprocess, None)?;
    let split_row = split_row(cfg, &prepared.series)?;
    for d in &prepared.dropped {
        log::info!("dropped signal {d:?}");
    }
    println!(
        "{} rows x {} signals ({} dropped); training rows 0..{split_row}",
        prepared.series.rows(),
        prepared.series.n_signals(),
        prepared.dropped.len()
    );
    let data = PreprocessedData {
        split_row,
        prepared,
    };
    write_stage(
        cfg,
        Stage::Preprocess,
        &hash,
        &[(
            cfg.paths.out("preprocessed.json"),
            envelope(&hash, "data", &data)?,
        )],
    )
}

fn load_preprocessed(cfg: &RunConfig) -> Result<PreprocessedData, CliError> {
    require(cfg, Stage::Preprocess)?;
    read_payload(
        &cfg.paths.out("preprocessed.json"),
        "data",
        Stage::Preprocess,
    )
}

fn train_test(data: &PreprocessedData) -> (RegularSeries, RegularSeries) {
    let s = &data.prepared.series;
    (
        s.slice_rows(0, data.split_row),
        s.slice_rows(data.split_row, s.rows()),
    )
}

pub fn train_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let data = load_preprocessed(cfg)?;
    let hash = stage_hash(Stage::Train, cfg)?;
    let (train, _) = train_test(&data);
    let (mut detector, history) = Detector::fit(&[&train], &cfg.ae(), &cfg.detect_config())?;
    println!(
        "trained {} epochs (best {:?}), threshold {:.6}",
        history.epochs.len(),
        history.best_epoch,
        detector.threshold.value
    );
    detector.model.provenance = Some(hash.clone());
    let meta = DetectorMeta {
        normalization: detector.normalization,
        threshold: detector.threshold,
        stride: detector.stride,
        signals: train.signals.clone(),
        history: history.clone(),
    };
    write_stage(
        cfg,
        Stage::Train,
        &hash,
        &[
            (cfg.paths.model(), model::to_bytes(&detector.model)?),
            (
                cfg.paths.out("detector.json"),
                envelope(&hash, "detector", &meta)?,
            ),
            (cfg.paths.out("history.csv"), history.to_csv().into_bytes()),
        ],
    )
}

/// The trained detector with `c` and `m` from the current configuration.
fn load_detector(cfg: &RunConfig) -> Result<(Detector, Vec<SignalMeta>), CliError> {
    let hash = require(cfg, Stage::Train)?;
    let model = model::load(&cfg.paths.model())?;
    if model.provenance.as_deref() != Some(hash.as_str()) {
        return Err(CliError::Stale {
            what: "model file".into(),
            found: model.provenance.unwrap_or_default(),
            expected: hash,
            stage: "train",
        });
    }
    let meta: DetectorMeta =
        read_payload(&cfg.paths.out("detector.json"), "detector", Stage::Train)?;
    if cfg.detect.m > meta.signals.len() {
        return Err(CliError::Config(format!(
            "detect.m = {} exceeds the {} model signals",
            cfg.detect.m,
            meta.signals.len()
        )));
    }
    let detector = Detector {
        model,
        normalization: meta.normalization,
        threshold: meta.threshold.with_c(cfg.detect.c),
        stride: meta.stride,
        m: cfg.detect.m,
    };
    Ok((detector, meta.signals))
}

pub fn detect_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let (detector, _) = load_detector(cfg)?;
    let data = load_preprocessed(cfg)?;
    let hash = stage_hash(Stage::Detect, cfg)?;
    let (_, test) = train_test(&data);
    let results = detector.detect(&test)?;
    let lines: Vec<ReportLine> = results
        .iter()
        .enumerate()
        .map(|(k, r)| ReportLine {
            config_hash: Some(hash.clone()),
            ..ReportLine::from_result(
                r,
                k,
                test.timestamp(r.window_index),
                &detector.threshold,
                &test.signals,
            )
        })
        .collect();
    let anomalous = lines.iter().filter(|l| l.is_anomalous).count();
    let header = json!({
        "schema_version": SCHEMA_VERSION,
        "config_hash": hash,
        "threshold": detector.threshold,
        "windows": lines.len(),
        "anomalous": anomalous,
    });
    let mut out = format!("{header}\n");
    out.push_str(&write_report_jsonl(&lines)?);
    write_stage(
        cfg,
        Stage::Detect,
        &hash,
        &[(cfg.paths.out("detections.jsonl"), out.into_bytes())],
    )?;
    println!(
        "{anomalous} of {} windows anomalous (threshold {:.6})",
        lines.len(),
        detector.threshold.value
    );
    Ok(())
}

/// Report lines after the header line.
fn read_detections(cfg: &RunConfig) -> Result<Vec<ReportLine>, CliError> {
    let text = std::fs::read_to_string(cfg.paths.out("detections.jsonl"))?;
    let body = text.split_once('\n').map(|(_, rest)| rest).unwrap_or("");
    Ok(read_report_jsonl(body)?)
}

pub fn localize_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    require(cfg, Stage::Detect)?;
    let (_, signals) = load_detector(cfg)?;
    let hash = stage_hash(Stage::Localize, cfg)?;
    let table = load_lookup(cfg.paths.lookup())?;
    let mut localized = Vec::new();
    let mut dominant: BTreeMap<String, usize> = BTreeMap::new();
    let mut top_signal: BTreeMap<String, usize> = BTreeMap::new();
    for line in read_detections(cfg)?.into_iter().filter(|l| l.is_anomalous) {
        let result = DetectionResult {
            window_index: line.window_index,
            re_total: line.re_total,
            is_anomalous: true,
            re_individual: Vec::new(),
            significant_signals: line
                .signals
                .iter()
                .map(|s| SignificantSignal {
                    id: s.id,
                    re_ind: s.re_ind,
                    contribution_pct: s.contribution_pct,
                })
                .collect(),
        };
        let report = analyze(&result, &signals, &table)?;
        *dominant
            .entry(report.dominant_component.clone())
            .or_default() += 1;
        if let Some(first) = line.signals.first() {
            *top_signal.entry(first.name.clone()).or_default() += 1;
        }
        localized.push(Localized {
            start_timestamp: line.start_timestamp,
            report,
        });
    }
    let mut jsonl = format!(
        "{}\n",
        json!({ "schema_version": SCHEMA_VERSION, "config_hash": hash })
    );
    for l in &localized {
        jsonl.push_str(&serde_json::to_string(l)?);
        jsonl.push('\n');
    }
    let summary = json!({
        "anomalous_windows": localized.len(),
        "dominant_component": dominant,
        "top_signal": top_signal,
    });
    write_stage(
        cfg,
        Stage::Localize,
        &hash,
        &[
            (cfg.paths.out("localization.jsonl"), jsonl.into_bytes()),
            (
                cfg.paths.out("root_cause.json"),
                envelope(&hash, "summary", &summary)?,
            ),
        ],
    )?;
    println!("{} anomalous windows", localized.len());
    for (component, n) in &dominant {
        println!("  {component}: dominant in {n}");
    }
    Ok(())
}

fn read_thresholds(cfg: &RunConfig) -> Result<Vec<SignalThreshold>, CliError> {
    read_payload(&cfg.paths.thresholds(), "thresholds", Stage::Simulate)
}

fn read_ground_truth(cfg: &RunConfig) -> Result<GroundTruth, CliError> {
    let s: SimulationSummary = read_payload(
        &cfg.paths.out("simulation.json"),
        "simulation",
        Stage::Simulate,
    )?;
    Ok(s.truth)
}

pub fn evaluate_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let data = load_preprocessed(cfg)?;
    let hash = stage_hash(Stage::Evaluate, cfg)?;
    let series = &data.prepared.series;
    let seg_len = series.rows() / SEGMENTS;
    if seg_len < cfg.preprocess.window {
        return Err(CliError::Data(format!(
            "{} rows cannot be cut into {SEGMENTS} segments of at least one window",
            series.rows()
        )));
    }
    let segments: Vec<RegularSeries> = (0..SEGMENTS)
        .map(|k| series.slice_rows(k * seg_len, (k + 1) * seg_len))
        .collect();
    let truth = match cfg.evaluate.truth {
        TruthSource::Automatic => Truth::Automatic(read_thresholds(cfg)?),
        TruthSource::Simulated => {
            let gt = read_ground_truth(cfg)?;
            Truth::Given(
                segments
                    .iter()
                    .map(|s| gt.labels(s.start, s.rate_seconds, s.rows()))
                    .collect(),
            )
        }
    };
    let scenario = Scenario::from_number(cfg.evaluate.scenario)?;
    let report = run_cv(
        scenario,
        &segments,
        &truth,
        &cfg.ae(),
        &cfg.detect_config(),
        &cfg.eval_config(),
        cfg.seed,
    )?;
    let p = &report.pooled;
    println!(
        "scenario {}: pooled precision {:.3} recall {:.3} f1 {:.3}; kappa model {:?} labels {:?}",
        report.scenario,
        p.precision,
        p.recall,
        p.f1,
        report.kappa_model_pooled,
        report.kappa_labels_pooled
    );
    let mut roc = format!("# schema_version={SCHEMA_VERSION} config_hash={hash}\n");
    roc.push_str(&roc_to_csv(&report.roc));
    write_stage(
        cfg,
        Stage::Evaluate,
        &hash,
        &[
            (
                cfg.paths.out("metrics.json"),
                envelope(&hash, "cross_validation", &report)?,
            ),
            (cfg.paths.out("cv_roc.csv"), roc.into_bytes()),
        ],
    )
}

pub fn roc_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let (detector, _) = load_detector(cfg)?;
    let data = load_preprocessed(cfg)?;
    let hash = stage_hash(Stage::Roc, cfg)?;
    let (train, test) = train_test(&data);
    let w = detector.window();
    let truth = match cfg.evaluate.truth {
        TruthSource::Automatic => automatic_window_labels(
            &test,
            &train,
            &read_thresholds(cfg)?,
            w,
            detector.stride,
            &cfg.eval_config(),
        )?,
        TruthSource::Simulated => {
            let labels = read_ground_truth(cfg)?.labels(test.start, test.rate_seconds, test.rows());
            label_windows(&labels, w, detector.stride)
        }
    };
    let re = detector.re_totals(&test)?;
    let t = &detector.threshold;
    let points = roc_curve(&re, &truth, &cfg.evaluate.c_grid, t.mu, t.sigma)?;
    let pred: Vec<bool> = re.iter().map(|&r| t.is_anomalous(r)).collect();
    println!(
        "{} points; kappa model {:?} labels {:?}",
        points.len(),
        consistency_score_labels(&pred, cfg.evaluate.gap_merge).ok(),
        consistency_score_labels(&truth, cfg.evaluate.gap_merge).ok()
    );
    let mut csv = format!("# schema_version={SCHEMA_VERSION} config_hash={hash}\n");
    csv.push_str(&roc_to_csv(&points));
    let out: PathBuf = cfg.paths.out("roc.csv");
    write_stage(cfg, Stage::Roc, &hash, &[(out, csv.into_bytes())])
}
