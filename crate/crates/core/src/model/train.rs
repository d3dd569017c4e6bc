use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::AeConfig;
use super::optim::EarlyStopping;
use super::ModelState;
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::series::FeatureWindow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training-mode batch loss over the epoch.
    pub train_loss: f64,
    /// Eval-mode loss on the validation split (training loss when the split is empty).
    pub val_loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    /// Eval-mode training loss of the initial weights.
    pub initial_train_loss: Option<f64>,
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
    pub train_windows: usize,
    pub validation_windows: usize,
}

impl TrainingHistory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_loss\n");
        for e in &self.epochs {
            s.push_str(&format!(
                "{},{:e},{:e}\n",
                e.epoch, e.train_loss, e.val_loss
            ));
        }
        s
    }
}

/// Number of windows held out for validation: the chronologically last
/// `floor(len * fraction)`, always leaving at least one training window.
pub(crate) fn validation_len(len: usize, fraction: f64) -> usize {
    ((len as f64 * fraction).floor() as usize).min(len.saturating_sub(1))
}

/// Trains with seeded per-epoch shuffling, RMSprop and early stopping on
/// the validation loss. Returns the state with the lowest validation loss.
pub fn train(
    config: &AeConfig,
    windows: &[FeatureWindow],
) -> Result<(ModelState, TrainingHistory)> {
    config.validate()?;
    if windows.is_empty() {
        return Err(Error::param("no training windows"));
    }
    let seed = config.rng_seed;
    let mut state = ModelState::init(config, derive_seed(seed, &[0]))?;
    let n_val = validation_len(windows.len(), config.validation_fraction);
    let (train_set, val_set) = windows.split_at(windows.len() - n_val);
    let mut history = TrainingHistory {
        train_windows: train_set.len(),
        validation_windows: val_set.len(),
        ..TrainingHistory::default()
    };
    if config.max_epochs == 0 {
        return Ok((state, history));
    }
    history.initial_train_loss = Some(state.evaluate(train_set)?);

    let mut stopper = EarlyStopping::new(config.early_stop_patience);
    let mut best = state.clone();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut batch = Vec::with_capacity(config.batch_size);
    for epoch in 1..=config.max_epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1, epoch as u64]));
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (b, idx) in order.chunks(config.batch_size).enumerate() {
            batch.clear();
            batch.extend(idx.iter().map(|&i| train_set[i].clone()));
            let mask_seed = derive_seed(seed, &[2, epoch as u64, b as u64]);
            let (loss, grads) = state.loss_and_gradients(&batch, true, mask_seed)?;
            state.rmsprop_step(&grads, config.learning_rate)?;
            loss_sum += loss * batch.len() as f64;
        }
        let train_loss = loss_sum / train_set.len() as f64;
        let val_loss = if val_set.is_empty() {
            train_loss
        } else {
            state.evaluate(val_set)?
        };
        state.epoch = epoch;
        log::debug!("epoch {epoch}: train {train_loss:.6e} val {val_loss:.6e}");
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });
        if !state.params.all_finite() {
            log::warn!("training diverged at epoch {epoch}");
            history.stopped_early = true;
            break;
        }
        let (improved, stop) = stopper.observe(
            epoch,
            if val_loss.is_nan() {
                f64::INFINITY
            } else {
                val_loss
            },
        );
        if improved {
            state.best_val_loss = val_loss;
            best = state.clone();
        }
        if stop {
            history.stopped_early = epoch < config.max_epochs;
            break;
        }
    }
    history.best_epoch = stopper.best_epoch();
    Ok((best, history))
}
