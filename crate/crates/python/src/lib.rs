//! Python bindings: simulation, preprocessing, detector training and
//! inference, root-cause mapping and the evaluation metrics.
//!
//! Structured results (reports, metrics, configurations) cross the boundary
//! as plain dicts and lists.

use faultlens::detect::{contribution_percent, top_m_iterative, ReportLine};
use faultlens::eval::{
    automatic_window_labels, confusion_metrics as confusion, consistency_score_labels,
    label_windows as windows_of, roc_curve as roc, EvalConfig, SignalThreshold,
};
use faultlens::model::AeConfig;
use faultlens::pipeline::{DetectConfig, Detector};
use faultlens::preprocess::io::{read_records, read_signal_meta};
use faultlens::preprocess::{prepare, PreprocessConfig};
use faultlens::rootcause::{analyze, LookupTable};
use faultlens::series::{RegularSeries, SignalMeta};
use faultlens::sim::{mini_plant, simulate, FaultInjection, PlantSpec, Simulation};
use ndarray::Array2;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

create_exception!(pyfaultlens, FaultlensError, PyException);

fn err(e: faultlens::Error) -> PyErr {
    use faultlens::Error as E;
    match e {
        E::Config(_) | E::Parameter(_) | E::Dimension { .. } => {
            PyValueError::new_err(e.to_string())
        }
        E::Io(_) => PyIOError::new_err(e.to_string()),
        other => FaultlensError::new_err(other.to_string()),
    }
}

/// Converts a Rust value to Python objects through the `json` module.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Reads a dict (or anything `json.dumps` accepts) into `T`; `None` gives
/// the default.
fn from_py<T: DeserializeOwned + Default>(obj: Option<&Bound<'_, PyAny>>) -> PyResult<T> {
    match obj {
        None => Ok(T::default()),
        Some(o) if o.is_none() => Ok(T::default()),
        Some(o) => {
            let text: String = o
                .py()
                .import("json")?
                .call_method1("dumps", (o,))?
                .extract()?;
            serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
        }
    }
}

fn from_py_required<T: DeserializeOwned>(o: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = o
        .py()
        .import("json")?
        .call_method1("dumps", (o,))?
        .extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Builds a series from row-major nested lists.
fn series_from_rows(
    start: i64,
    rate_seconds: i64,
    signals: Vec<SignalMeta>,
    rows: &[Vec<f64>],
) -> PyResult<RegularSeries> {
    let n = signals.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(PyValueError::new_err(format!(
            "row has {} values, expected {n}",
            bad.len()
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let values = Array2::from_shape_vec((rows.len(), n), flat)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    RegularSeries::from_values(start, rate_seconds, signals, values).map_err(err)
}

/// A regular, fully imputed multivariate series.
#[pyclass(name = "Series", module = "pyfaultlens", from_py_object)]
#[derive(Clone)]
struct PySeries {
    inner: RegularSeries,
}

#[pymethods]
impl PySeries {
    /// `values` is a list of rows, one value per signal.
    #[new]
    fn new(
        start: i64,
        rate_seconds: i64,
        signal_names: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> PyResult<Self> {
        let signals = signal_names
            .into_iter()
            .enumerate()
            .map(|(i, n)| SignalMeta::numeric(i, n))
            .collect();
        let inner = series_from_rows(start, rate_seconds, signals, &values)?;
        Ok(Self { inner })
    }

    #[getter]
    fn start(&self) -> i64 {
        self.inner.start
    }

    #[getter]
    fn rate_seconds(&self) -> i64 {
        self.inner.rate_seconds
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn n_signals(&self) -> usize {
        self.inner.n_signals()
    }

    #[getter]
    fn signal_names(&self) -> Vec<String> {
        self.inner.signals.iter().map(|s| s.name.clone()).collect()
    }

    fn values(&self) -> Vec<Vec<f64>> {
        self.inner
            .values
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect()
    }

    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        let i = self
            .inner
            .signal_index(name)
            .ok_or_else(|| PyValueError::new_err(format!("no signal named '{name}'")))?;
        Ok(self.inner.column(i))
    }

    fn timestamp(&self, row: usize) -> i64 {
        self.inner.timestamp(row)
    }

    /// Rows `[start, end)`.
    fn slice(&self, start: usize, end: usize) -> PyResult<Self> {
        if start >= end || end > self.inner.rows() {
            return Err(PyIndexError::new_err(format!(
                "invalid row range {start}..{end} for {} rows",
                self.inner.rows()
            )));
        }
        Ok(Self {
            inner: self.inner.slice_rows(start, end),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.rows()
    }

    fn __repr__(&self) -> String {
        format!(
            "Series(rows={}, signals={}, start={}, rate_seconds={})",
            self.inner.rows(),
            self.inner.n_signals(),
            self.inner.start,
            self.inner.rate_seconds
        )
    }
}

/// Output of the plant simulator.
#[pyclass(name = "Simulation", module = "pyfaultlens")]
struct PySimulation {
    spec: PlantSpec,
    sim: Simulation,
}

#[pymethods]
impl PySimulation {
    #[getter]
    fn signal_names(&self) -> Vec<String> {
        self.sim.signals.iter().map(|s| s.name.clone()).collect()
    }

    #[getter]
    fn n_records(&self) -> usize {
        self.sim.records.len()
    }

    #[getter]
    fn start(&self) -> i64 {
        self.spec.start
    }

    #[getter]
    fn end(&self) -> i64 {
        self.spec.end()
    }

    /// Raw `(timestamp, signal name, value)` records.
    fn records(&self) -> Vec<(i64, String, f64)> {
        self.sim
            .records
            .iter()
            .map(|r| {
                (
                    r.timestamp,
                    self.sim.signals[r.signal].name.clone(),
                    r.value,
                )
            })
            .collect()
    }

    /// Resampled, imputed and feature-selected series over the full plant span.
    #[pyo3(signature = (config=None))]
    fn prepare(&self, config: Option<&Bound<'_, PyAny>>) -> PyResult<PySeries> {
        let cfg: PreprocessConfig = from_py(config)?;
        let p = prepare(
            &self.sim.records,
            &self.sim.signals,
            &cfg,
            Some((self.spec.start, self.spec.end())),
        )
        .map_err(err)?;
        Ok(PySeries { inner: p.series })
    }

    /// Per-row fault flags aligned with `series`.
    fn truth_labels(&self, series: &PySeries) -> Vec<bool> {
        let s = &series.inner;
        self.sim.truth.labels(s.start, s.rate_seconds, s.rows())
    }

    fn fault_windows<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.sim.truth.faults)
    }

    fn thresholds<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.spec.thresholds())
    }

    fn lookup_csv(&self) -> PyResult<String> {
        self.spec.lookup_table().to_csv().map_err(err)
    }
}

/// Simulates the built-in mini-plant. `faults` is a list of dicts with
/// `sensors`, `kind` (`step`, `drift`, `stuck_at`, `noise_burst`),
/// `start_offset`, `duration_seconds` and `magnitude`.
#[pyfunction]
#[pyo3(signature = (seed, faults=None, duration_seconds=None))]
fn simulate_mini_plant(
    seed: u64,
    faults: Option<&Bound<'_, PyAny>>,
    duration_seconds: Option<i64>,
) -> PyResult<PySimulation> {
    let faults: Vec<FaultInjection> = from_py(faults)?;
    let mut spec = mini_plant();
    if let Some(d) = duration_seconds {
        spec.duration_seconds = d;
    }
    let sim = simulate(&spec, &faults, seed).map_err(err)?;
    Ok(PySimulation { spec, sim })
}

/// Loads a records file (CSV or JSONL) with its signal metadata and runs
/// preprocessing.
#[pyfunction]
#[pyo3(signature = (records_path, signals_path, config=None))]
fn prepare_files(
    records_path: &str,
    signals_path: &str,
    config: Option<&Bound<'_, PyAny>>,
) -> PyResult<PySeries> {
    let cfg: PreprocessConfig = from_py(config)?;
    let signals = read_signal_meta(signals_path.as_ref()).map_err(err)?;
    let loaded = read_records(records_path.as_ref(), &signals).map_err(err)?;
    let p = prepare(&loaded.records, &signals, &cfg, None).map_err(err)?;
    Ok(PySeries { inner: p.series })
}

/// Normalization, autoencoder and threshold fitted together.
#[pyclass(name = "Detector", module = "pyfaultlens")]
struct PyDetector {
    inner: Detector,
}

#[pymethods]
impl PyDetector {
    /// Trains on `train` (a Series or a list of Series) and returns
    /// `(detector, history)`. `autoencoder` overrides fields of the default
    /// autoencoder configuration.
    #[staticmethod]
    #[pyo3(signature = (train, autoencoder=None, stride=10, c=3.0, m=3))]
    fn fit<'py>(
        py: Python<'py>,
        train: &Bound<'py, PyAny>,
        autoencoder: Option<&Bound<'py, PyAny>>,
        stride: usize,
        c: f64,
        m: usize,
    ) -> PyResult<(Self, Bound<'py, PyAny>)> {
        let parts: Vec<PySeries> = match train.extract::<PySeries>() {
            Ok(s) => vec![s],
            Err(_) => train.extract()?,
        };
        let refs: Vec<&RegularSeries> = parts.iter().map(|s| &s.inner).collect();
        let ae: AeConfig = from_py(autoencoder)?;
        let detect = DetectConfig { stride, c, m };
        let (inner, history) = py
            .detach(|| Detector::fit(&refs, &ae, &detect))
            .map_err(err)?;
        Ok((Self { inner }, to_py(py, &history)?))
    }

    /// `{mu, sigma, c, value}`.
    #[getter]
    fn threshold<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.threshold)
    }

    #[getter]
    fn window(&self) -> usize {
        self.inner.window()
    }

    #[getter]
    fn stride(&self) -> usize {
        self.inner.stride
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[setter]
    fn set_m(&mut self, m: usize) -> PyResult<()> {
        if m == 0 || m > self.inner.model.config.n_signals {
            return Err(PyValueError::new_err(format!(
                "m must be in 1..={}",
                self.inner.model.config.n_signals
            )));
        }
        self.inner.m = m;
        Ok(())
    }

    /// Moves the threshold to `mu + c*sigma`.
    fn set_c(&mut self, c: f64) {
        self.inner.threshold = self.inner.threshold.with_c(c);
    }

    /// Total reconstruction error per window.
    fn re_totals(&self, py: Python<'_>, series: &PySeries) -> PyResult<Vec<f64>> {
        py.detach(|| self.inner.re_totals(&series.inner))
            .map_err(err)
    }

    /// One report dict per window: error, flag and the top-m signals with
    /// their contributions.
    fn detect<'py>(&self, py: Python<'py>, series: &PySeries) -> PyResult<Bound<'py, PyAny>> {
        let s = &series.inner;
        let results = py.detach(|| self.inner.detect(s)).map_err(err)?;
        let lines: Vec<ReportLine> = results
            .iter()
            .enumerate()
            .map(|(k, r)| {
                ReportLine::from_result(
                    r,
                    k,
                    s.timestamp(r.window_index),
                    &self.inner.threshold,
                    &s.signals,
                )
            })
            .collect();
        to_py(py, &lines)
    }

    /// Root-cause reports for the anomalous windows of `series`, using a
    /// lookup table in CSV form (`sensor,component,failure_type`).
    fn localize<'py>(
        &self,
        py: Python<'py>,
        series: &PySeries,
        lookup_csv: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let table = LookupTable::from_reader(lookup_csv.as_bytes()).map_err(err)?;
        let s = &series.inner;
        let results = py.detach(|| self.inner.detect(s)).map_err(err)?;
        let reports = results
            .iter()
            .filter(|r| r.is_anomalous)
            .map(|r| analyze(r, &s.signals, &table))
            .collect::<faultlens::Result<Vec<_>>>()
            .map_err(err)?;
        to_py(py, &reports)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Detector(signals={}, window={}, threshold={:.6})",
            self.inner.model.config.n_signals,
            self.inner.window(),
            self.inner.threshold.value
        )
    }
}

/// Indices of the `m` largest values, largest first; ties go to the lower index.
#[pyfunction]
fn top_m(values: Vec<f64>, m: usize) -> Vec<usize> {
    top_m_iterative(&values, m)
}

/// Each value as a percentage of the total.
#[pyfunction]
fn contributions(values: Vec<f64>) -> PyResult<Vec<f64>> {
    contribution_percent(&values).map_err(err)
}

/// Window labels: a window is positive when all its timestamps are.
#[pyfunction]
#[pyo3(signature = (timestamp_labels, window=10, stride=10))]
fn label_windows(timestamp_labels: Vec<bool>, window: usize, stride: usize) -> Vec<bool> {
    windows_of(&timestamp_labels, window, stride)
}

/// Threshold-derived window labels for `series`; statistical bounds are
/// fitted on `training`.
#[pyfunction]
#[pyo3(signature = (series, training, thresholds, window=10, stride=10, min_violations=10, smoothing_radius=2))]
fn automatic_labels(
    series: &PySeries,
    training: &PySeries,
    thresholds: &Bound<'_, PyAny>,
    window: usize,
    stride: usize,
    min_violations: usize,
    smoothing_radius: usize,
) -> PyResult<Vec<bool>> {
    let thresholds: Vec<SignalThreshold> = from_py_required(thresholds)?;
    let eval = EvalConfig {
        min_violations,
        smoothing_radius,
        ..EvalConfig::default()
    };
    automatic_window_labels(
        &series.inner,
        &training.inner,
        &thresholds,
        window,
        stride,
        &eval,
    )
    .map_err(err)
}

/// Temporal consistency of a label sequence, or `None` when no anomaly
/// spans more than one window.
#[pyfunction]
#[pyo3(signature = (labels, gap_merge=60))]
fn consistency_score(labels: Vec<bool>, gap_merge: usize) -> PyResult<Option<f64>> {
    match consistency_score_labels(&labels, gap_merge) {
        Ok(k) => Ok(Some(k)),
        Err(faultlens::Error::UndefinedScore) => Ok(None),
        Err(e) => Err(err(e)),
    }
}

/// Confusion counts with precision, recall, F1 and FPR.
#[pyfunction]
fn confusion_metrics<'py>(
    py: Python<'py>,
    predicted: Vec<bool>,
    truth: Vec<bool>,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &confusion(&predicted, &truth).map_err(err)?)
}

/// One ROC point per threshold multiplier.
#[pyfunction]
fn roc_curve<'py>(
    py: Python<'py>,
    re_totals: Vec<f64>,
    truth: Vec<bool>,
    c_grid: Vec<f64>,
    mu: f64,
    sigma: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &roc(&re_totals, &truth, &c_grid, mu, sigma).map_err(err)?,
    )
}

#[pymodule]
fn pyfaultlens(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FaultlensError", m.py().get_type::<FaultlensError>())?;
    m.add_class::<PySeries>()?;
    m.add_class::<PySimulation>()?;
    m.add_class::<PyDetector>()?;
    m.add_function(wrap_pyfunction!(simulate_mini_plant, m)?)?;
    m.add_function(wrap_pyfunction!(prepare_files, m)?)?;
    m.add_function(wrap_pyfunction!(top_m, m)?)?;
    m.add_function(wrap_pyfunction!(contributions, m)?)?;
    m.add_function(wrap_pyfunction!(label_windows, m)?)?;
    m.add_function(wrap_pyfunction!(automatic_labels, m)?)?;
    m.add_function(wrap_pyfunction!(consistency_score, m)?)?;
    m.add_function(wrap_pyfunction!(confusion_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(roc_curve, m)?)?;
    Ok(())
}
