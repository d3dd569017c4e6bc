//! Recurrent autoencoder trained from scratch: manual gradients, RMSprop,
//! inverted dropout, early stopping and a checksummed model file.

mod config;
mod network;
mod optim;
mod persist;
mod search;
mod train;

pub use config::{Activation, AeConfig, CellKind};
pub use network::Params;
pub use optim::{rmsprop_update, EarlyStopping, RMSPROP_EPSILON, RMSPROP_RHO};
pub use persist::{from_bytes, load, save, to_bytes, FORMAT_VERSION, MAGIC};
pub use search::{random_search, SearchResult, SearchSpace, Trial};
pub use train::{train, EpochRecord, TrainingHistory};

use serde::{Deserialize, Serialize};

use crate::detect::re_total;
use crate::error::{Error, Result};
use crate::series::FeatureWindow;

/// Network parameters plus optimizer and training bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub config: AeConfig,
    pub params: Params,
    /// RMSprop running average of squared gradients, shaped like `params`.
    pub accumulators: Params,
    pub epoch: usize,
    pub best_val_loss: f64,
    /// Free-form provenance tag (e.g. the hash of the producing config).
    #[serde(default)]
    pub provenance: Option<String>,
}

impl ModelState {
    /// Fresh model with Glorot-uniform weights; deterministic per seed.
    pub fn init(config: &AeConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let params = network::init_params(config, seed);
        let accumulators = params.zeros_like();
        Ok(Self {
            config: config.clone(),
            params,
            accumulators,
            epoch: 0,
            best_val_loss: f64::INFINITY,
            provenance: None,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    /// Reconstructs a batch. With `train_mode` dropout is applied using
    /// masks drawn from `seed`; otherwise the pass is deterministic and
    /// `seed` is unused.
    pub fn forward(
        &self,
        batch: &[FeatureWindow],
        train_mode: bool,
        seed: u64,
    ) -> Result<Vec<FeatureWindow>> {
        network::run_forward(&self.config, &self.params, batch, train_mode, seed)
    }

    /// Eval-mode reconstruction of any number of windows, processed in
    /// chunks of the configured batch size.
    pub fn reconstruct(&self, windows: &[FeatureWindow]) -> Result<Vec<FeatureWindow>> {
        use rayon::prelude::*;
        // eval-mode output does not depend on how windows are batched
        let parts: Vec<Vec<FeatureWindow>> = windows
            .par_chunks(256)
            .map(|chunk| self.forward(chunk, false, 0))
            .collect::<Result<_>>()?;
        Ok(parts.into_iter().flatten().collect())
    }

    /// Mean reconstruction loss over `windows` in eval mode.
    pub fn evaluate(&self, windows: &[FeatureWindow]) -> Result<f64> {
        let recon = self.reconstruct(windows)?;
        loss(windows, &recon)
    }

    /// Loss and exact gradients for one batch; the dropout masks match
    /// `forward(batch, train_mode, seed)`.
    pub fn loss_and_gradients(
        &self,
        batch: &[FeatureWindow],
        train_mode: bool,
        seed: u64,
    ) -> Result<(f64, Params)> {
        network::loss_and_gradients(&self.config, &self.params, batch, train_mode, seed)
    }

    /// Gradients of the training-mode loss.
    pub fn backward(&self, batch: &[FeatureWindow], seed: u64) -> Result<Params> {
        Ok(self.loss_and_gradients(batch, true, seed)?.1)
    }

    pub fn rmsprop_step(&mut self, gradients: &Params, learning_rate: f64) -> Result<()> {
        if !self.params.same_shape(gradients) {
            return Err(Error::param("gradient shapes do not match the parameters"));
        }
        rmsprop_update(
            &mut self.params,
            &mut self.accumulators,
            gradients,
            learning_rate,
        );
        Ok(())
    }
}

/// Batch loss: the mean over windows of each window's total reconstruction
/// error.
pub fn loss(batch: &[FeatureWindow], reconstructions: &[FeatureWindow]) -> Result<f64> {
    if batch.len() != reconstructions.len() {
        return Err(Error::Dimension {
            expected: batch.len(),
            actual: reconstructions.len(),
        });
    }
    if batch.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (f, r) in batch.iter().zip(reconstructions) {
        total += re_total(f, r)?;
    }
    Ok(total / batch.len() as f64)
}

#[cfg(test)]
mod tests;
