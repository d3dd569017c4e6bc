//! A trained detector: normalization, autoencoder and threshold fitted
//! together on healthy training data.

use serde::{Deserialize, Serialize};

use crate::detect::{fit_threshold, localize, re_total, DetectionResult, ThresholdSpec};
use crate::error::{Error, Result};
use crate::model::{train, AeConfig, ModelState, TrainingHistory};
use crate::preprocess::{windowize, NormalizationParams};
use crate::series::{FeatureWindow, RegularSeries};

/// Settings that are not part of the autoencoder itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectConfig {
    pub stride: usize,
    /// Threshold multiplier in `mu + c*sigma`.
    pub c: f64,
    /// Number of signals reported per anomalous window.
    pub m: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            stride: 10,
            c: 3.0,
            m: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub model: ModelState,
    pub normalization: NormalizationParams,
    pub threshold: ThresholdSpec,
    pub stride: usize,
    pub m: usize,
}

impl Detector {
    /// Fits normalization on all training rows, trains the autoencoder on
    /// the windows of every part (windows never straddle two parts) and
    /// sets the threshold from the training reconstruction errors.
    ///
    /// `n_signals` of `ae` is taken from the data.
    pub fn fit(
        train_parts: &[&RegularSeries],
        ae: &AeConfig,
        detect: &DetectConfig,
    ) -> Result<(Self, TrainingHistory)> {
        let first = train_parts
            .first()
            .ok_or_else(|| Error::param("no training data"))?;
        let all = RegularSeries::concat_rows(train_parts)?;
        let normalization = NormalizationParams::fit(&all)?;
        let config = AeConfig {
            n_signals: first.n_signals(),
            ..ae.clone()
        };
        let mut windows = Vec::new();
        for part in train_parts {
            windows.extend(windowize(
                &normalization.apply(part)?,
                config.window,
                detect.stride,
            )?);
        }
        if windows.is_empty() {
            return Err(Error::Data(
                "training data is shorter than one window".into(),
            ));
        }
        let (model, history) = train(&config, &windows)?;
        let errors = totals(&model, &windows)?;
        let threshold = fit_threshold(&errors, detect.c)?;
        if detect.m == 0 || detect.m > config.n_signals {
            return Err(Error::config(format!(
                "m must be in 1..={}, got {}",
                config.n_signals, detect.m
            )));
        }
        Ok((
            Self {
                model,
                normalization,
                threshold,
                stride: detect.stride,
                m: detect.m,
            },
            history,
        ))
    }

    pub fn window(&self) -> usize {
        self.model.config.window
    }

    pub fn windows(&self, series: &RegularSeries) -> Result<Vec<FeatureWindow>> {
        windowize(
            &self.normalization.apply(series)?,
            self.window(),
            self.stride,
        )
    }

    pub fn re_totals(&self, series: &RegularSeries) -> Result<Vec<f64>> {
        totals(&self.model, &self.windows(series)?)
    }

    pub fn detect(&self, series: &RegularSeries) -> Result<Vec<DetectionResult>> {
        let windows = self.windows(series)?;
        let recon = self.model.reconstruct(&windows)?;
        windows
            .iter()
            .zip(&recon)
            .map(|(w, r)| localize(&self.threshold, w, r, self.m))
            .collect()
    }
}

fn totals(model: &ModelState, windows: &[FeatureWindow]) -> Result<Vec<f64>> {
    let recon = model.reconstruct(windows)?;
    windows
        .iter()
        .zip(&recon)
        .map(|(w, r)| re_total(w, r))
        .collect()
}
