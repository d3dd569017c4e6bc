use super::network::Params;

pub const RMSPROP_RHO: f64 = 0.9;
pub const RMSPROP_EPSILON: f64 = 1e-8;

/// `a <- rho*a + (1-rho)*g^2`, `p <- p - lr*g/sqrt(a + eps)`.
pub fn rmsprop_update(params: &mut Params, accumulators: &mut Params, grads: &Params, lr: f64) {
    for ((p, a), g) in params
        .tensors
        .iter_mut()
        .zip(accumulators.tensors.iter_mut())
        .zip(&grads.tensors)
    {
        ndarray::Zip::from(p).and(a).and(g).for_each(|p, a, &g| {
            *a = RMSPROP_RHO * *a + (1.0 - RMSPROP_RHO) * g * g;
            *p -= lr * g / (*a + RMSPROP_EPSILON).sqrt();
        });
    }
}

/// Patience-based stopping on a monitored loss (lower is better).
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: Option<usize>,
    since_best: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: None,
            since_best: 0,
        }
    }

    /// Records the loss of `epoch`; returns `(improved, stop)`.
    pub fn observe(&mut self, epoch: usize, loss: f64) -> (bool, bool) {
        if loss < self.best {
            self.best = loss;
            self.best_epoch = Some(epoch);
            self.since_best = 0;
            (true, false)
        } else {
            self.since_best += 1;
            (false, self.since_best >= self.patience)
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn best_epoch(&self) -> Option<usize> {
        self.best_epoch
    }
}
