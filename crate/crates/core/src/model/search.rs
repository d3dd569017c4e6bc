use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Activation, AeConfig, CellKind};
use super::train::train;
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::series::FeatureWindow;

/// Discrete hyperparameter space. Decoder widths mirror the encoder widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub encoder_widths: Vec<Vec<usize>>,
    pub cell_kinds: Vec<CellKind>,
    pub activations: Vec<Activation>,
    pub dropout_rates: Vec<f64>,
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<usize>,
}

impl SearchSpace {
    /// A space holding only the values of `base`.
    pub fn singleton(base: &AeConfig) -> Self {
        Self {
            encoder_widths: vec![base.encoder_widths.clone()],
            cell_kinds: vec![base.cell],
            activations: vec![base.activation],
            dropout_rates: vec![base.dropout_rate],
            learning_rates: vec![base.learning_rate],
            batch_sizes: vec![base.batch_size],
        }
    }

    fn is_empty(&self) -> bool {
        self.encoder_widths.is_empty()
            || self.cell_kinds.is_empty()
            || self.activations.is_empty()
            || self.dropout_rates.is_empty()
            || self.learning_rates.is_empty()
            || self.batch_sizes.is_empty()
    }

    fn sample(&self, base: &AeConfig, rng: &mut ChaCha8Rng) -> AeConfig {
        fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
            &xs[rng.random_range(0..xs.len())]
        }
        let encoder_widths = pick(rng, &self.encoder_widths).clone();
        let decoder_widths = encoder_widths.iter().rev().copied().collect();
        AeConfig {
            encoder_widths,
            decoder_widths,
            cell: *pick(rng, &self.cell_kinds),
            activation: *pick(rng, &self.activations),
            dropout_rate: *pick(rng, &self.dropout_rates),
            learning_rate: *pick(rng, &self.learning_rates),
            batch_size: *pick(rng, &self.batch_sizes),
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub config: AeConfig,
    pub best_val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: AeConfig,
    pub trials: Vec<Trial>,
}

/// Seeded random search: samples `budget` configurations uniformly per
/// dimension, trains each for at most `search_epochs` epochs and keeps the
/// one with the lowest validation loss (earliest trial on ties).
pub fn random_search(
    base: &AeConfig,
    space: &SearchSpace,
    budget: usize,
    search_epochs: usize,
    windows: &[FeatureWindow],
    seed: u64,
) -> Result<SearchResult> {
    if space.is_empty() {
        return Err(Error::config("search space has an empty dimension"));
    }
    if budget == 0 {
        return Err(Error::config("search budget must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(budget);
    for k in 0..budget {
        let mut config = space.sample(base, &mut rng);
        config.max_epochs = search_epochs.max(1);
        config.rng_seed = derive_seed(seed, &[k as u64]);
        let (state, _) = train(&config, windows)?;
        let score = if state.best_val_loss.is_finite() {
            state.best_val_loss
        } else {
            f64::INFINITY
        };
        log::info!("search trial {k}: val loss {score:.6e}");
        trials.push(Trial {
            config,
            best_val_loss: score,
        });
    }
    let best_idx = trials
        .iter()
        .enumerate()
        .min_by(|a, b| {
            a.1.best_val_loss
                .total_cmp(&b.1.best_val_loss)
                .then(a.0.cmp(&b.0))
        })
        .map(|(i, _)| i)
        .expect("budget >= 1");
    let mut best = trials[best_idx].config.clone();
    best.max_epochs = base.max_epochs;
    best.rng_seed = base.rng_seed;
    Ok(SearchResult { best, trials })
}
