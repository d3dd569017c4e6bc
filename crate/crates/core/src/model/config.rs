use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    /// Sequence autoencoder: LSTM encoder, repeat vector, LSTM decoder,
    /// time-distributed linear output.
    Lstm,
    /// Feed-forward autoencoder over the flattened window.
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AeConfig {
    pub n_signals: usize,
    pub window: usize,
    pub encoder_widths: Vec<usize>,
    pub decoder_widths: Vec<usize>,
    pub cell: CellKind,
    pub activation: Activation,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    pub validation_fraction: f64,
    pub rng_seed: u64,
}

impl Default for AeConfig {
    fn default() -> Self {
        Self {
            n_signals: 37,
            window: 10,
            encoder_widths: vec![370, 185],
            decoder_widths: vec![185, 370],
            cell: CellKind::Lstm,
            activation: Activation::Tanh,
            dropout_rate: 0.2,
            learning_rate: 0.001,
            batch_size: 16,
            max_epochs: 50,
            early_stop_patience: 5,
            validation_fraction: 0.1,
            rng_seed: 0,
        }
    }
}

impl AeConfig {
    /// Widths scaled like the reference architecture: the first encoder
    /// layer is `w*n` wide, the bottleneck half of that.
    pub fn scaled_for(n_signals: usize, window: usize) -> Self {
        let wide = n_signals * window;
        let narrow = (wide / 2).max(1);
        Self {
            n_signals,
            window,
            encoder_widths: vec![wide, narrow],
            decoder_widths: vec![narrow, wide],
            ..Self::default()
        }
    }

    pub fn flat_len(&self) -> usize {
        self.n_signals * self.window
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_signals == 0 || self.window == 0 {
            return Err(Error::config("n_signals and window must be positive"));
        }
        if self.encoder_widths.is_empty() || self.decoder_widths.is_empty() {
            return Err(Error::config(
                "encoder and decoder need at least one layer each",
            ));
        }
        if self
            .encoder_widths
            .iter()
            .chain(&self.decoder_widths)
            .any(|&w| w == 0)
        {
            return Err(Error::config("layer widths must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::config("dropout_rate must be in [0, 1)"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate must be positive"));
        }
        if self.batch_size == 0 || self.early_stop_patience == 0 {
            return Err(Error::config(
                "batch_size and early_stop_patience must be >= 1",
            ));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::config("validation_fraction must be in (0, 1)"));
        }
        Ok(())
    }

    /// Closed-form parameter count.
    ///
    /// LSTM layer `in -> h`: `4h(in + h + 1)`. Dense layer `in -> out`:
    /// `out(in + 1)`. The output layer maps the last decoder width to `n`
    /// per time step (LSTM) or to `w*n` (Dense).
    pub fn parameter_count(&self) -> usize {
        let layers = self.encoder_widths.iter().chain(&self.decoder_widths);
        match self.cell {
            CellKind::Lstm => {
                let mut input = self.n_signals;
                let mut total = 0;
                for &h in layers {
                    total += 4 * h * (input + h + 1);
                    input = h;
                }
                total + self.n_signals * (input + 1)
            }
            CellKind::Dense => {
                let mut input = self.flat_len();
                let mut total = 0;
                for &h in layers {
                    total += h * (input + 1);
                    input = h;
                }
                total + self.flat_len() * (input + 1)
            }
        }
    }
}
