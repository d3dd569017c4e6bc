//! Reconstruction errors, thresholds and fault localization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{FeatureWindow, SignalMeta, Timestamp};

fn check_pair(window: &FeatureWindow, reconstruction: &FeatureWindow) -> Result<()> {
    if window.data.len() != reconstruction.data.len() {
        return Err(Error::Dimension {
            expected: window.data.len(),
            actual: reconstruction.data.len(),
        });
    }
    if window.data.is_empty() {
        return Err(Error::param("empty window"));
    }
    Ok(())
}

/// Mean squared error over all `w*n` elements.
pub fn re_total(window: &FeatureWindow, reconstruction: &FeatureWindow) -> Result<f64> {
    check_pair(window, reconstruction)?;
    let sum: f64 = window
        .data
        .iter()
        .zip(&reconstruction.data)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / window.data.len() as f64)
}

/// Mean squared error over the `w` elements of signal `i` (flat indices
/// `i*w .. i*w + w`).
pub fn re_individual(
    window: &FeatureWindow,
    reconstruction: &FeatureWindow,
    i: usize,
) -> Result<f64> {
    check_pair(window, reconstruction)?;
    let n = window.n_signals();
    if i >= n {
        return Err(Error::param(format!(
            "signal index {i} out of range (n = {n})"
        )));
    }
    let w = window.w;
    let sum: f64 = window.data[i * w..(i + 1) * w]
        .iter()
        .zip(&reconstruction.data[i * w..(i + 1) * w])
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / w as f64)
}

pub fn re_individual_all(
    window: &FeatureWindow,
    reconstruction: &FeatureWindow,
) -> Result<Vec<f64>> {
    (0..window.n_signals())
        .map(|i| re_individual(window, reconstruction, i))
        .collect()
}

/// `value = mu + c * sigma` over training reconstruction errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub mu: f64,
    pub sigma: f64,
    pub c: f64,
    pub value: f64,
}

impl ThresholdSpec {
    pub fn new(mu: f64, sigma: f64, c: f64) -> Self {
        Self {
            mu,
            sigma,
            c,
            value: mu + c * sigma,
        }
    }

    pub fn with_c(&self, c: f64) -> Self {
        Self::new(self.mu, self.sigma, c)
    }

    pub fn is_anomalous(&self, re_total: f64) -> bool {
        re_total > self.value
    }
}

/// Mean and population standard deviation of `(mean, std)`.
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Threshold from training errors with population standard deviation.
pub fn fit_threshold(train_re: &[f64], c: f64) -> Result<ThresholdSpec> {
    if train_re.is_empty() {
        return Err(Error::param("cannot fit a threshold on zero errors"));
    }
    if !c.is_finite() {
        return Err(Error::param("threshold multiplier must be finite"));
    }
    let (mu, sigma) = mean_std(train_re);
    Ok(ThresholdSpec::new(mu, sigma, c))
}

/// `100 * re_ind[i] / sum(re_ind)`.
pub fn contribution_percent(re_ind: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = re_ind.iter().sum();
    if !(total > 0.0) {
        return Err(Error::UndefinedContribution);
    }
    Ok(re_ind.iter().map(|v| 100.0 * v / total).collect())
}

/// Indices of the `m` largest values, selected one at a time by argmax
/// (lowest index wins ties) and then removed from the candidates.
pub fn top_m_iterative(re_ind: &[f64], m: usize) -> Vec<usize> {
    let mut remaining = re_ind.to_vec();
    let mut selected = Vec::with_capacity(m.min(re_ind.len()));
    for _ in 0..m.min(re_ind.len()) {
        let mut idx = None;
        for (i, &v) in remaining.iter().enumerate() {
            if v.is_nan() {
                continue;
            }
            match idx {
                None => idx = Some(i),
                Some(j) if v > remaining[j] => idx = Some(i),
                _ => {}
            }
        }
        let Some(idx) = idx else { break };
        selected.push(idx);
        remaining[idx] = f64::NAN;
    }
    selected
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificantSignal {
    pub id: usize,
    pub re_ind: f64,
    pub contribution_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub window_index: usize,
    pub re_total: f64,
    pub is_anomalous: bool,
    pub re_individual: Vec<f64>,
    /// Ordered by `re_ind` descending; empty when not anomalous.
    pub significant_signals: Vec<SignificantSignal>,
}

/// Flags the window when its total error exceeds the threshold and, if so,
/// returns the `m` signals with the largest individual errors.
pub fn localize(
    threshold: &ThresholdSpec,
    window: &FeatureWindow,
    reconstruction: &FeatureWindow,
    m: usize,
) -> Result<DetectionResult> {
    let total = re_total(window, reconstruction)?;
    let re_ind = re_individual_all(window, reconstruction)?;
    let n = re_ind.len();
    if m == 0 || m > n {
        return Err(Error::param(format!("m must be in 1..={n}, got {m}")));
    }
    let is_anomalous = threshold.is_anomalous(total);
    let significant_signals = if is_anomalous {
        // a negative threshold can flag a perfect reconstruction
        let pct = contribution_percent(&re_ind).unwrap_or_else(|_| vec![0.0; n]);
        top_m_iterative(&re_ind, m)
            .into_iter()
            .map(|id| SignificantSignal {
                id,
                re_ind: re_ind[id],
                contribution_pct: pct[id],
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(DetectionResult {
        window_index: window.start_index,
        re_total: total,
        is_anomalous,
        re_individual: re_ind,
        significant_signals,
    })
}

/// One line of the detection report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub window_index: usize,
    pub start_timestamp: Timestamp,
    pub re_total: f64,
    pub threshold: f64,
    pub is_anomalous: bool,
    pub signals: Vec<ReportSignal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSignal {
    pub id: usize,
    pub name: String,
    pub re_ind: f64,
    pub contribution_pct: f64,
}

impl ReportLine {
    pub fn from_result(
        result: &DetectionResult,
        window_ordinal: usize,
        start_timestamp: Timestamp,
        threshold: &ThresholdSpec,
        signals: &[SignalMeta],
    ) -> Self {
        Self {
            window_index: window_ordinal,
            start_timestamp,
            re_total: result.re_total,
            threshold: threshold.value,
            is_anomalous: result.is_anomalous,
            signals: result
                .significant_signals
                .iter()
                .map(|s| ReportSignal {
                    id: s.id,
                    name: signals
                        .get(s.id)
                        .map(|m| m.name.clone())
                        .unwrap_or_else(|| format!("signal {}", s.id)),
                    re_ind: s.re_ind,
                    contribution_pct: s.contribution_pct,
                })
                .collect(),
            config_hash: None,
        }
    }
}

pub fn write_report_jsonl(lines: &[ReportLine]) -> Result<String> {
    let mut out = String::new();
    for l in lines {
        out.push_str(&serde_json::to_string(l)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_report_jsonl(text: &str) -> Result<Vec<ReportLine>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}
