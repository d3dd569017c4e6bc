//! Forward and backward passes of the two autoencoder variants.
//!
//! Parameter layout (all tensors are 2-D; biases are `1 x k` rows):
//!
//! * LSTM: every encoder then decoder layer contributes `W (in x 4h)`,
//!   `U (h x 4h)` and `b (1 x 4h)` with gate blocks ordered input, forget,
//!   candidate, output. The output layer adds `V (h_last x n)`, `c (1 x n)`.
//! * Dense: every hidden layer contributes `W (in x out)`, `b (1 x out)`,
//!   followed by the linear output layer to `w*n`.

use ndarray::{s, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Activation, AeConfig, CellKind};
use crate::error::{Error, Result};
use crate::series::FeatureWindow;

/// Ordered list of weight tensors; gradients and optimizer state use the
/// same layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub tensors: Vec<Array2<f64>>,
}

impl Params {
    pub fn zeros_like(&self) -> Self {
        Self {
            tensors: self
                .tensors
                .iter()
                .map(|t| Array2::zeros(t.raw_dim()))
                .collect(),
        }
    }

    /// Total number of scalars.
    pub fn len(&self) -> usize {
        self.tensors.iter().map(|t| t.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_shape(&self, other: &Params) -> bool {
        self.tensors.len() == other.tensors.len()
            && self
                .tensors
                .iter()
                .zip(&other.tensors)
                .all(|(a, b)| a.dim() == b.dim())
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// Scalar at a flat index (tensor-major, row-major within a tensor).
    pub fn get(&self, mut idx: usize) -> f64 {
        for t in &self.tensors {
            if idx < t.len() {
                return t.as_slice().expect("standard layout")[idx];
            }
            idx -= t.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set(&mut self, mut idx: usize, value: f64) {
        for t in &mut self.tensors {
            if idx < t.len() {
                t.as_slice_mut().expect("standard layout")[idx] = value;
                return;
            }
            idx -= t.len();
        }
        panic!("parameter index out of range");
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.tensors.iter().flat_map(|t| t.iter().copied())
    }

    pub fn scale(&mut self, factor: f64) {
        for t in &mut self.tensors {
            t.mapv_inplace(|v| v * factor);
        }
    }
}

/// Tensor shapes for a configuration.
pub(crate) fn layout(config: &AeConfig) -> Vec<(usize, usize)> {
    let mut shapes = Vec::new();
    let widths = config.encoder_widths.iter().chain(&config.decoder_widths);
    match config.cell {
        CellKind::Lstm => {
            let mut input = config.n_signals;
            for &h in widths {
                shapes.push((input, 4 * h));
                shapes.push((h, 4 * h));
                shapes.push((1, 4 * h));
                input = h;
            }
            shapes.push((input, config.n_signals));
            shapes.push((1, config.n_signals));
        }
        CellKind::Dense => {
            let mut input = config.flat_len();
            for &h in widths {
                shapes.push((input, h));
                shapes.push((1, h));
                input = h;
            }
            shapes.push((input, config.flat_len()));
            shapes.push((1, config.flat_len()));
        }
    }
    shapes
}

/// Glorot-uniform weights, zero biases, LSTM forget-gate bias 1.
pub(crate) fn init_params(config: &AeConfig, seed: u64) -> Params {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = layout(config);
    let per_layer = match config.cell {
        CellKind::Lstm => 3,
        CellKind::Dense => 2,
    };
    let n_hidden = config.encoder_widths.len() + config.decoder_widths.len();
    let mut tensors = Vec::with_capacity(shapes.len());
    for (k, &(rows, cols)) in shapes.iter().enumerate() {
        let is_bias = if k < n_hidden * per_layer {
            k % per_layer == per_layer - 1
        } else {
            k == shapes.len() - 1
        };
        let t = if is_bias {
            let mut b = Array2::zeros((rows, cols));
            if config.cell == CellKind::Lstm && k < n_hidden * per_layer {
                let h = cols / 4;
                b.slice_mut(s![.., h..2 * h]).fill(1.0);
            }
            b
        } else {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_fn((rows, cols), |_| rng.random_range(-limit..limit))
        };
        tensors.push(t);
    }
    Params { tensors }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn affine(x: ArrayView2<f64>, w: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let mut z = x.dot(w);
    z += b;
    z
}

/// Per-batch dropout masks drawn in a fixed order from one seeded stream.
struct Dropout {
    rate: f64,
    rng: Option<ChaCha8Rng>,
}

impl Dropout {
    fn new(rate: f64, train_mode: bool, seed: u64) -> Self {
        let rng = (train_mode && rate > 0.0).then(|| ChaCha8Rng::seed_from_u64(seed));
        Self { rate, rng }
    }

    /// Applies inverted dropout in place and returns the mask used.
    fn apply(&mut self, x: &mut Array2<f64>) -> Option<Array2<f64>> {
        let rng = self.rng.as_mut()?;
        let keep = 1.0 / (1.0 - self.rate);
        let rate = self.rate;
        let mask = Array2::from_shape_fn(x.raw_dim(), |_| {
            if rng.random::<f64>() < rate {
                0.0
            } else {
                keep
            }
        });
        *x *= &mask;
        Some(mask)
    }
}

fn apply_mask(grad: &mut Array2<f64>, mask: &Option<Array2<f64>>) {
    if let Some(m) = mask {
        *grad *= m;
    }
}

struct LstmStep {
    x: Array2<f64>,
    h_prev: Array2<f64>,
    c_prev: Array2<f64>,
    i: Array2<f64>,
    f: Array2<f64>,
    g: Array2<f64>,
    o: Array2<f64>,
    act_c: Array2<f64>,
}

struct LstmLayerTrace {
    steps: Vec<LstmStep>,
}

fn lstm_forward(
    w: &Array2<f64>,
    u: &Array2<f64>,
    b: &Array2<f64>,
    xs: &[Array2<f64>],
    act: Activation,
) -> (Vec<Array2<f64>>, LstmLayerTrace) {
    let batch = xs[0].nrows();
    let h = u.nrows();
    let mut h_prev = Array2::<f64>::zeros((batch, h));
    let mut c_prev = Array2::<f64>::zeros((batch, h));
    let mut outputs = Vec::with_capacity(xs.len());
    let mut steps = Vec::with_capacity(xs.len());
    for x in xs {
        let mut z = affine(x.view(), w, b);
        z += &h_prev.dot(u);
        let i = z.slice(s![.., 0..h]).mapv(sigmoid);
        let f = z.slice(s![.., h..2 * h]).mapv(sigmoid);
        let g = z.slice(s![.., 2 * h..3 * h]).mapv(|v| act.apply(v));
        let o = z.slice(s![.., 3 * h..4 * h]).mapv(sigmoid);
        let c = &f * &c_prev + &i * &g;
        let act_c = c.mapv(|v| act.apply(v));
        let h_new = &o * &act_c;
        steps.push(LstmStep {
            x: x.clone(),
            h_prev: std::mem::replace(&mut h_prev, h_new.clone()),
            c_prev: std::mem::replace(&mut c_prev, c),
            i,
            f,
            g,
            o,
            act_c,
        });
        outputs.push(h_new);
    }
    (outputs, LstmLayerTrace { steps })
}

/// Backpropagation through time. `dhs[t]` is the loss gradient w.r.t. the
/// layer output at step `t`. Returns input gradients and `(dW, dU, db)`.
fn lstm_backward(
    w: &Array2<f64>,
    u: &Array2<f64>,
    trace: &LstmLayerTrace,
    dhs: &[Array2<f64>],
    act: Activation,
) -> (Vec<Array2<f64>>, [Array2<f64>; 3]) {
    let h = u.nrows();
    let batch = dhs[0].nrows();
    let mut dw = Array2::<f64>::zeros(w.raw_dim());
    let mut du = Array2::<f64>::zeros(u.raw_dim());
    let mut db = Array2::<f64>::zeros((1, 4 * h));
    let mut dh_next = Array2::<f64>::zeros((batch, h));
    let mut dc_next = Array2::<f64>::zeros((batch, h));
    let mut dxs = vec![Array2::<f64>::zeros((0, 0)); trace.steps.len()];
    let mut dz = Array2::<f64>::zeros((batch, 4 * h));
    for t in (0..trace.steps.len()).rev() {
        let st = &trace.steps[t];
        let dh = &dhs[t] + &dh_next;
        let mut dc = dc_next;
        ndarray::Zip::from(&mut dc)
            .and(&dh)
            .and(&st.o)
            .and(&st.act_c)
            .for_each(|dc, &dh, &o, &ac| *dc += dh * o * act.derivative_from_output(ac));
        {
            let (mut dzi, rest) = dz.view_mut().split_at(Axis(1), h);
            let (mut dzf, rest) = rest.split_at(Axis(1), h);
            let (mut dzg, mut dzo) = rest.split_at(Axis(1), h);
            ndarray::Zip::from(&mut dzi)
                .and(&dc)
                .and(&st.g)
                .and(&st.i)
                .for_each(|d, &dc, &g, &i| *d = dc * g * i * (1.0 - i));
            ndarray::Zip::from(&mut dzf)
                .and(&dc)
                .and(&st.c_prev)
                .and(&st.f)
                .for_each(|d, &dc, &cp, &f| *d = dc * cp * f * (1.0 - f));
            ndarray::Zip::from(&mut dzg)
                .and(&dc)
                .and(&st.i)
                .and(&st.g)
                .for_each(|d, &dc, &i, &g| *d = dc * i * act.derivative_from_output(g));
            ndarray::Zip::from(&mut dzo)
                .and(&dh)
                .and(&st.act_c)
                .and(&st.o)
                .for_each(|d, &dh, &ac, &o| *d = dh * ac * o * (1.0 - o));
        }
        dc_next = &dc * &st.f;
        dw += &st.x.t().dot(&dz);
        du += &st.h_prev.t().dot(&dz);
        db += &dz.sum_axis(Axis(0)).insert_axis(Axis(0));
        dxs[t] = dz.dot(&w.t());
        dh_next = dz.dot(&u.t());
    }
    (dxs, [dw, du, db])
}

enum Trace {
    Lstm {
        enc: Vec<LstmLayerTrace>,
        enc_masks: Vec<Vec<Option<Array2<f64>>>>,
        latent_mask: Option<Array2<f64>>,
        dec: Vec<LstmLayerTrace>,
        dec_masks: Vec<Vec<Option<Array2<f64>>>>,
        /// Inputs of the output layer, one per step.
        top: Vec<Array2<f64>>,
    },
    Dense {
        /// Layer inputs; `inputs[l]` feeds hidden layer `l`, the last one
        /// feeds the output layer.
        inputs: Vec<Array2<f64>>,
        /// Post-activation outputs (before dropout) of each hidden layer.
        activations: Vec<Array2<f64>>,
        masks: Vec<Option<Array2<f64>>>,
    },
}

/// Reconstruction of a batch as a `B x (w*n)` matrix in signal-major order,
/// plus everything the backward pass needs.
struct Forward {
    output: Array2<f64>,
    trace: Trace,
}

fn check_batch(config: &AeConfig, batch: &[FeatureWindow]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::param("empty batch"));
    }
    for fw in batch {
        if fw.data.len() != config.flat_len() {
            return Err(Error::Dimension {
                expected: config.flat_len(),
                actual: fw.data.len(),
            });
        }
    }
    Ok(())
}

fn flat_input(batch: &[FeatureWindow], len: usize) -> Array2<f64> {
    Array2::from_shape_fn((batch.len(), len), |(b, j)| batch[b].data[j])
}

fn forward(
    config: &AeConfig,
    params: &Params,
    batch: &[FeatureWindow],
    train_mode: bool,
    seed: u64,
) -> Forward {
    let mut dropout = Dropout::new(config.dropout_rate, train_mode, seed);
    let act = config.activation;
    let (w, n) = (config.window, config.n_signals);
    let p = &params.tensors;
    match config.cell {
        CellKind::Lstm => {
            let bsz = batch.len();
            let mut seq: Vec<Array2<f64>> = (0..w)
                .map(|t| Array2::from_shape_fn((bsz, n), |(b, i)| batch[b].data[i * w + t]))
                .collect();
            let n_enc = config.encoder_widths.len();
            let mut enc = Vec::with_capacity(n_enc);
            let mut enc_masks = Vec::with_capacity(n_enc);
            let mut latent = Array2::zeros((0, 0));
            let mut latent_mask = None;
            for l in 0..n_enc {
                let (mut hs, trace) =
                    lstm_forward(&p[3 * l], &p[3 * l + 1], &p[3 * l + 2], &seq, act);
                enc.push(trace);
                if l + 1 == n_enc {
                    latent = hs.pop().expect("w >= 1");
                    latent_mask = dropout.apply(&mut latent);
                    enc_masks.push(Vec::new());
                } else {
                    enc_masks.push(hs.iter_mut().map(|h| dropout.apply(h)).collect());
                    seq = hs;
                }
            }
            seq = vec![latent; w];
            let n_dec = config.decoder_widths.len();
            let mut dec = Vec::with_capacity(n_dec);
            let mut dec_masks = Vec::with_capacity(n_dec);
            for l in n_enc..n_enc + n_dec {
                let (mut hs, trace) =
                    lstm_forward(&p[3 * l], &p[3 * l + 1], &p[3 * l + 2], &seq, act);
                dec.push(trace);
                dec_masks.push(hs.iter_mut().map(|h| dropout.apply(h)).collect());
                seq = hs;
            }
            let (v, c) = (&p[p.len() - 2], &p[p.len() - 1]);
            let mut output = Array2::<f64>::zeros((bsz, w * n));
            for (t, h) in seq.iter().enumerate() {
                let y = affine(h.view(), v, c);
                for b in 0..bsz {
                    for i in 0..n {
                        output[[b, i * w + t]] = y[[b, i]];
                    }
                }
            }
            Forward {
                output,
                trace: Trace::Lstm {
                    enc,
                    enc_masks,
                    latent_mask,
                    dec,
                    dec_masks,
                    top: seq,
                },
            }
        }
        CellKind::Dense => {
            let n_hidden = config.encoder_widths.len() + config.decoder_widths.len();
            let mut a = flat_input(batch, config.flat_len());
            let mut inputs = Vec::with_capacity(n_hidden + 1);
            let mut activations = Vec::with_capacity(n_hidden);
            let mut masks = Vec::with_capacity(n_hidden);
            for l in 0..n_hidden {
                let z = affine(a.view(), &p[2 * l], &p[2 * l + 1]);
                let y = z.mapv(|v| act.apply(v));
                let mut next = y.clone();
                masks.push(dropout.apply(&mut next));
                activations.push(y);
                inputs.push(std::mem::replace(&mut a, next));
            }
            let output = affine(a.view(), &p[2 * n_hidden], &p[2 * n_hidden + 1]);
            inputs.push(a);
            Forward {
                output,
                trace: Trace::Dense {
                    inputs,
                    activations,
                    masks,
                },
            }
        }
    }
}

/// Gradient of the batch loss w.r.t. every parameter given `dout`, the
/// gradient w.r.t. the flat `B x (w*n)` output.
fn backward(config: &AeConfig, params: &Params, fwd: &Forward, dout: &Array2<f64>) -> Params {
    let p = &params.tensors;
    let mut grads = params.zeros_like();
    let act = config.activation;
    match &fwd.trace {
        Trace::Lstm {
            enc,
            enc_masks,
            latent_mask,
            dec,
            dec_masks,
            top,
        } => {
            let (w, n) = (config.window, config.n_signals);
            let bsz = dout.nrows();
            let (v, last) = (&p[p.len() - 2], p.len() - 1);
            let mut dseq: Vec<Array2<f64>> = Vec::with_capacity(w);
            for (t, h) in top.iter().enumerate() {
                let dy = Array2::from_shape_fn((bsz, n), |(b, i)| dout[[b, i * w + t]]);
                grads.tensors[last - 1] += &h.t().dot(&dy);
                grads.tensors[last] += &dy.sum_axis(Axis(0)).insert_axis(Axis(0));
                dseq.push(dy.dot(&v.t()));
            }
            let n_enc = enc.len();
            for (k, trace) in dec.iter().enumerate().rev() {
                let l = n_enc + k;
                for (d, m) in dseq.iter_mut().zip(&dec_masks[k]) {
                    apply_mask(d, m);
                }
                let (dxs, [dw, du, db]) =
                    lstm_backward(&p[3 * l], &p[3 * l + 1], trace, &dseq, act);
                grads.tensors[3 * l] = dw;
                grads.tensors[3 * l + 1] = du;
                grads.tensors[3 * l + 2] = db;
                dseq = dxs;
            }
            // repeat vector: the latent feeds every decoder step
            let mut dlatent = dseq
                .iter()
                .fold(Array2::<f64>::zeros(dseq[0].raw_dim()), |acc, d| acc + d);
            apply_mask(&mut dlatent, latent_mask);
            for (l, trace) in enc.iter().enumerate().rev() {
                if l + 1 == n_enc {
                    let steps = trace.steps.len();
                    dseq = (0..steps)
                        .map(|t| {
                            if t + 1 == steps {
                                dlatent.clone()
                            } else {
                                Array2::zeros(dlatent.raw_dim())
                            }
                        })
                        .collect();
                } else {
                    for (d, m) in dseq.iter_mut().zip(&enc_masks[l]) {
                        apply_mask(d, m);
                    }
                }
                let (dxs, [dw, du, db]) =
                    lstm_backward(&p[3 * l], &p[3 * l + 1], trace, &dseq, act);
                grads.tensors[3 * l] = dw;
                grads.tensors[3 * l + 1] = du;
                grads.tensors[3 * l + 2] = db;
                dseq = dxs;
            }
        }
        Trace::Dense {
            inputs,
            activations,
            masks,
        } => {
            let n_hidden = activations.len();
            let mut delta = dout.clone();
            grads.tensors[2 * n_hidden] = inputs[n_hidden].t().dot(&delta);
            grads.tensors[2 * n_hidden + 1] = delta.sum_axis(Axis(0)).insert_axis(Axis(0));
            let mut da = delta.dot(&p[2 * n_hidden].t());
            for l in (0..n_hidden).rev() {
                apply_mask(&mut da, &masks[l]);
                delta = da;
                ndarray::Zip::from(&mut delta)
                    .and(&activations[l])
                    .for_each(|d, &y| *d *= act.derivative_from_output(y));
                grads.tensors[2 * l] = inputs[l].t().dot(&delta);
                grads.tensors[2 * l + 1] = delta.sum_axis(Axis(0)).insert_axis(Axis(0));
                da = delta.dot(&p[2 * l].t());
            }
        }
    }
    grads
}

fn to_windows(batch: &[FeatureWindow], output: Array2<f64>, w: usize) -> Vec<FeatureWindow> {
    output
        .outer_iter()
        .zip(batch)
        .map(|(row, src)| FeatureWindow {
            start_index: src.start_index,
            w,
            data: row.to_vec(),
        })
        .collect()
}

/// Reconstructs a batch. Dropout is active only with `train_mode`, with
/// masks drawn from `seed`.
pub(crate) fn run_forward(
    config: &AeConfig,
    params: &Params,
    batch: &[FeatureWindow],
    train_mode: bool,
    seed: u64,
) -> Result<Vec<FeatureWindow>> {
    check_batch(config, batch)?;
    let fwd = forward(config, params, batch, train_mode, seed);
    Ok(to_windows(batch, fwd.output, config.window))
}

/// Batch loss (mean over windows of the per-window mean squared error) and
/// its exact gradient, using the dropout masks of the paired forward pass.
pub(crate) fn loss_and_gradients(
    config: &AeConfig,
    params: &Params,
    batch: &[FeatureWindow],
    train_mode: bool,
    seed: u64,
) -> Result<(f64, Params)> {
    check_batch(config, batch)?;
    let fwd = forward(config, params, batch, train_mode, seed);
    let target = flat_input(batch, config.flat_len());
    let diff = &fwd.output - &target;
    let denom = diff.len() as f64;
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / denom;
    let dout = diff.mapv(|d| 2.0 * d / denom);
    Ok((loss, backward(config, params, &fwd, &dout)))
}
