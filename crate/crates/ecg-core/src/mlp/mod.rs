//! Feed-forward neural-network classifier with a sparse-aware input layer.
//!
//! The network is a classic fully-connected stack — sigmoid hidden layers
//! and a softmax output — trained with mini-batch gradient descent plus
//! momentum.  Two properties are load-bearing for this crate:
//!
//! * **Sparse inputs are first class.**  A beat signature stores at most a
//!   few dozen cells out of several thousand grid positions, so the first
//!   layer multiplies only the stored cells.  Forward cost and first-layer
//!   gradient cost scale with the nonzero count, not the input width.
//! * **Runs are reproducible.**  Parameters are initialised from a
//!   caller-supplied seeded generator, epoch shuffling draws from the same
//!   generator, and the arithmetic has a fixed evaluation order, so one seed
//!   reproduces a training run exactly.
//!
//! Parameters are held as `f64` in memory but persisted as `f32` (see
//! [`save_model`] / [`load_model`]).  Initial weights are snapped to the
//! `f32` grid, so a freshly-initialised model survives a save / load round
//! trip with bit-identical outputs.

mod io;

pub use io::{
    load_model, load_model_from, save_model, save_model_to, ModelIoError, MODEL_MAGIC,
    MODEL_VERSION,
};

use std::time::Instant;

use thiserror::Error;

use crate::rng::DetRng;

/// Sparse input row: ascending `(flat_index, value)` pairs.
pub type SparseVector = Vec<(usize, f64)>;

/// Failures from building, evaluating, or training a network.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MlpError {
    /// A network needs an input width and at least one layer of outputs.
    #[error("network shape needs at least two dimensions")]
    TooFewLayers,

    /// Every dimension must be positive.
    #[error("network dimensions must be positive")]
    ZeroDim,

    /// A dense input did not match the input width.
    #[error("input has length {got}, expected {expected}")]
    InputLength { expected: usize, got: usize },

    /// A sparse input referenced a position outside the input width.
    #[error("sparse input index {index} outside input width {width}")]
    IndexOutOfRange { index: usize, width: usize },

    /// A training label referenced a class the output layer does not have.
    #[error("label {label} outside {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    /// Inputs and labels must pair up one to one.
    #[error("{inputs} inputs but {labels} labels")]
    LengthMismatch { inputs: usize, labels: usize },

    /// Training or gradient evaluation needs at least one example.
    #[error("empty training set")]
    EmptyTrainingSet,

    /// Mini-batches must contain at least one example.
    #[error("batch size must be positive")]
    ZeroBatchSize,
}

/// One fully-connected layer: `output_len x input_len` weights plus biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// Row-major weight matrix, one row per output unit.
    pub weights: Vec<f64>,
    /// One bias per output unit.
    pub biases: Vec<f64>,
    /// Width of the layer's input.
    pub input_len: usize,
    /// Number of output units.
    pub output_len: usize,
}

/// Gradients for one layer, in the same layout as [`Layer`].
#[derive(Debug, Clone)]
pub struct LayerGradients {
    /// Gradient of the mean loss with respect to each weight.
    pub weights: Vec<f64>,
    /// Gradient of the mean loss with respect to each bias.
    pub biases: Vec<f64>,
}

/// A fully-connected classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// The layers, input side first.
    pub layers: Vec<Layer>,
}

/// Hyper-parameters for one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Step size applied to the momentum-smoothed gradient.
    pub learning_rate: f64,
    /// Momentum coefficient; `0.0` recovers plain gradient descent.
    pub momentum: f64,
    /// Examples per parameter update.
    pub batch_size: usize,
    /// Number of full passes over the training set.  There is no early
    /// stopping: training always runs the full count.
    pub epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            momentum: 0.9,
            batch_size: 32,
            epochs: 10,
        }
    }
}

/// Per-epoch training telemetry.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    /// Zero-based epoch index.
    pub epoch: usize,
    /// Mean cross-entropy over the epoch's mini-batches.
    pub mean_loss: f64,
    /// Fraction of training examples classified correctly after the epoch's
    /// updates.
    pub train_accuracy: f64,
    /// Wall-clock seconds spent in the epoch (updates plus the accuracy
    /// pass).  Informational only — never part of any persisted artifact.
    pub wall_time_s: f64,
}

impl MlpModel {
    /// Builds a network with the given layer widths, input side first.
    ///
    /// Weights are drawn uniformly from `[-b, b)` with
    /// `b = sqrt(6 / (fan_in + fan_out))`, then snapped to the nearest `f32`
    /// value so that persisting a fresh model is lossless.  Biases start at
    /// zero.
    pub fn new(dims: &[usize], rng: &mut DetRng) -> Result<Self, MlpError> {
        if dims.len() < 2 {
            return Err(MlpError::TooFewLayers);
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(MlpError::ZeroDim);
        }
        let layers = dims
            .windows(2)
            .map(|pair| {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights = (0..fan_in * fan_out)
                    .map(|_| rng.next_range(-bound, bound) as f32 as f64)
                    .collect();
                Layer {
                    weights,
                    biases: vec![0.0; fan_out],
                    input_len: fan_in,
                    output_len: fan_out,
                }
            })
            .collect();
        Ok(MlpModel { layers })
    }

    /// Layer widths, input side first.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].input_len];
        dims.extend(self.layers.iter().map(|l| l.output_len));
        dims
    }

    /// Width of the input layer.
    pub fn input_len(&self) -> usize {
        self.layers[0].input_len
    }

    /// Number of output classes.
    pub fn class_count(&self) -> usize {
        self.layers.last().expect("at least one layer").output_len
    }

    /// Class probabilities for a dense input.
    pub fn forward_dense(&self, input: &[f64]) -> Result<Vec<f64>, MlpError> {
        if input.len() != self.input_len() {
            return Err(MlpError::InputLength {
                expected: self.input_len(),
                got: input.len(),
            });
        }
        let mut activation = affine(&self.layers[0], input);
        self.finish_forward(&mut activation);
        Ok(activation)
    }

    /// Class probabilities for a sparse input.  Cost of the first layer is
    /// proportional to the number of stored cells.
    pub fn forward_sparse(&self, input: &[(usize, f64)]) -> Result<Vec<f64>, MlpError> {
        self.check_sparse(input)?;
        let mut activation = affine_sparse(&self.layers[0], input);
        self.finish_forward(&mut activation);
        Ok(activation)
    }

    /// Most probable class and its probability for a sparse input.
    pub fn predict_sparse(&self, input: &[(usize, f64)]) -> Result<(usize, f64), MlpError> {
        let probs = self.forward_sparse(input)?;
        let class = argmax(&probs);
        Ok((class, probs[class]))
    }

    /// Mean cross-entropy of the model over a labelled set.
    pub fn batch_loss(
        &self,
        inputs: &[SparseVector],
        labels: &[usize],
    ) -> Result<f64, MlpError> {
        self.check_batch(inputs, labels)?;
        let mut total = 0.0;
        for (input, &label) in inputs.iter().zip(labels) {
            let probs = self.forward_sparse(input)?;
            total += cross_entropy(&probs, label);
        }
        Ok(total / inputs.len() as f64)
    }

    /// Gradients of the mean cross-entropy over a labelled batch, plus the
    /// batch's loss.  Gradients use the analytic softmax / cross-entropy
    /// form: the output-layer error is `(probabilities - one_hot) / batch`.
    pub fn batch_gradients(
        &self,
        inputs: &[SparseVector],
        labels: &[usize],
    ) -> Result<(Vec<LayerGradients>, f64), MlpError> {
        self.check_batch(inputs, labels)?;
        let mut grads: Vec<LayerGradients> = self
            .layers
            .iter()
            .map(|l| LayerGradients {
                weights: vec![0.0; l.weights.len()],
                biases: vec![0.0; l.biases.len()],
            })
            .collect();
        let scale = 1.0 / inputs.len() as f64;
        let mut total_loss = 0.0;

        for (input, &label) in inputs.iter().zip(labels) {
            // Forward pass, keeping every layer's activation.
            let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
            let mut current = affine_sparse(&self.layers[0], input);
            if self.layers.len() == 1 {
                softmax_in_place(&mut current);
            } else {
                sigmoid_in_place(&mut current);
            }
            activations.push(current);
            for (i, layer) in self.layers.iter().enumerate().skip(1) {
                let mut next = affine(layer, activations.last().expect("pushed above"));
                if i + 1 == self.layers.len() {
                    softmax_in_place(&mut next);
                } else {
                    sigmoid_in_place(&mut next);
                }
                activations.push(next);
            }
            let probs = activations.last().expect("at least one layer");
            total_loss += cross_entropy(probs, label);

            // Output error, already divided by the batch size so the
            // accumulated sums are the gradients of the *mean* loss.
            let mut delta: Vec<f64> = probs.iter().map(|&p| p * scale).collect();
            delta[label] -= scale;

            // Walk the layers backwards, accumulating weight and bias
            // gradients and propagating the error through the sigmoids.
            for li in (0..self.layers.len()).rev() {
                let grad = &mut grads[li];
                if li == 0 {
                    // Sparse input: only stored cells receive gradient.
                    for (o, &d) in delta.iter().enumerate() {
                        grad.biases[o] += d;
                        let row = o * self.layers[0].input_len;
                        for &(idx, v) in input {
                            grad.weights[row + idx] += d * v;
                        }
                    }
                } else {
                    let below = &activations[li - 1];
                    for (o, &d) in delta.iter().enumerate() {
                        grad.biases[o] += d;
                        let row = &mut grad.weights
                            [o * self.layers[li].input_len..(o + 1) * self.layers[li].input_len];
                        for (slot, &a) in row.iter_mut().zip(below) {
                            *slot += d * a;
                        }
                    }
                    // delta for the layer below: (W^T d) * a * (1 - a).
                    let layer = &self.layers[li];
                    let mut next_delta = vec![0.0; layer.input_len];
                    for (o, &d) in delta.iter().enumerate() {
                        let row = &layer.weights[o * layer.input_len..(o + 1) * layer.input_len];
                        for (nd, &w) in next_delta.iter_mut().zip(row) {
                            *nd += w * d;
                        }
                    }
                    for (nd, &a) in next_delta.iter_mut().zip(below) {
                        *nd *= a * (1.0 - a);
                    }
                    delta = next_delta;
                }
            }
        }
        Ok((grads, total_loss * scale))
    }

    /// Trains in place with mini-batch gradient descent plus momentum.
    ///
    /// Each epoch shuffles the example order with `rng`, applies one
    /// momentum update per mini-batch (`v = momentum * v + g`, then
    /// `theta -= learning_rate * v`), and finishes with a full forward pass
    /// to measure training accuracy.  Runs all `config.epochs` epochs.
    pub fn train(
        &mut self,
        inputs: &[SparseVector],
        labels: &[usize],
        config: &TrainConfig,
        rng: &mut DetRng,
    ) -> Result<Vec<EpochStats>, MlpError> {
        self.check_batch(inputs, labels)?;
        if config.batch_size == 0 {
            return Err(MlpError::ZeroBatchSize);
        }
        let mut velocity: Vec<LayerGradients> = self
            .layers
            .iter()
            .map(|l| LayerGradients {
                weights: vec![0.0; l.weights.len()],
                biases: vec![0.0; l.biases.len()],
            })
            .collect();
        let mut order: Vec<usize> = (0..inputs.len()).collect();
        let mut stats = Vec::with_capacity(config.epochs);

        for epoch in 0..config.epochs {
            let start = Instant::now();
            rng.shuffle(&mut order);
            let mut loss_sum = 0.0;
            for batch in order.chunks(config.batch_size) {
                let batch_inputs: Vec<SparseVector> =
                    batch.iter().map(|&i| inputs[i].clone()).collect();
                let batch_labels: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
                let (grads, loss) = self.batch_gradients(&batch_inputs, &batch_labels)?;
                loss_sum += loss * batch.len() as f64;
                for (layer, (v, g)) in self
                    .layers
                    .iter_mut()
                    .zip(velocity.iter_mut().zip(&grads))
                {
                    for (vw, &gw) in v.weights.iter_mut().zip(&g.weights) {
                        *vw = config.momentum * *vw + gw;
                    }
                    for (w, &vw) in layer.weights.iter_mut().zip(&v.weights) {
                        *w -= config.learning_rate * vw;
                    }
                    for (vb, &gb) in v.biases.iter_mut().zip(&g.biases) {
                        *vb = config.momentum * *vb + gb;
                    }
                    for (b, &vb) in layer.biases.iter_mut().zip(&v.biases) {
                        *b -= config.learning_rate * vb;
                    }
                }
            }
            let mut correct = 0usize;
            for (input, &label) in inputs.iter().zip(labels) {
                if self.predict_sparse(input)?.0 == label {
                    correct += 1;
                }
            }
            stats.push(EpochStats {
                epoch,
                mean_loss: loss_sum / inputs.len() as f64,
                train_accuracy: correct as f64 / inputs.len() as f64,
                wall_time_s: start.elapsed().as_secs_f64(),
            });
        }
        Ok(stats)
    }

    /// Applies the hidden sigmoids and final softmax after the first layer's
    /// affine step, reusing the activation buffer.
    fn finish_forward(&self, activation: &mut Vec<f64>) {
        if self.layers.len() == 1 {
            softmax_in_place(activation);
            return;
        }
        sigmoid_in_place(activation);
        for (i, layer) in self.layers.iter().enumerate().skip(1) {
            let mut next = affine(layer, activation);
            if i + 1 == self.layers.len() {
                softmax_in_place(&mut next);
            } else {
                sigmoid_in_place(&mut next);
            }
            *activation = next;
        }
    }

    fn check_sparse(&self, input: &[(usize, f64)]) -> Result<(), MlpError> {
        let width = self.input_len();
        for &(index, _) in input {
            if index >= width {
                return Err(MlpError::IndexOutOfRange { index, width });
            }
        }
        Ok(())
    }

    fn check_batch(&self, inputs: &[SparseVector], labels: &[usize]) -> Result<(), MlpError> {
        if inputs.len() != labels.len() {
            return Err(MlpError::LengthMismatch {
                inputs: inputs.len(),
                labels: labels.len(),
            });
        }
        if inputs.is_empty() {
            return Err(MlpError::EmptyTrainingSet);
        }
        let classes = self.class_count();
        for &label in labels {
            if label >= classes {
                return Err(MlpError::LabelOutOfRange { label, classes });
            }
        }
        for input in inputs {
            self.check_sparse(input)?;
        }
        Ok(())
    }
}

/// Index of the largest value; the earliest index wins ties, so the result
/// is deterministic.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Dense affine step: `weights * input + biases`.
fn affine(layer: &Layer, input: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(layer.output_len);
    for o in 0..layer.output_len {
        let row = &layer.weights[o * layer.input_len..(o + 1) * layer.input_len];
        let mut acc = layer.biases[o];
        for (&w, &x) in row.iter().zip(input) {
            acc += w * x;
        }
        out.push(acc);
    }
    out
}

/// Affine step touching only the stored input cells.
fn affine_sparse(layer: &Layer, input: &[(usize, f64)]) -> Vec<f64> {
    let mut out = Vec::with_capacity(layer.output_len);
    for o in 0..layer.output_len {
        let row = o * layer.input_len;
        let mut acc = layer.biases[o];
        for &(idx, v) in input {
            acc += layer.weights[row + idx] * v;
        }
        out.push(acc);
    }
    out
}

/// Numerically-stable logistic function, applied element-wise.
fn sigmoid_in_place(values: &mut [f64]) {
    for v in values {
        *v = if *v >= 0.0 {
            1.0 / (1.0 + (-*v).exp())
        } else {
            let e = v.exp();
            e / (1.0 + e)
        };
    }
}

/// Softmax with the usual max-subtraction guard against overflow.
fn softmax_in_place(values: &mut [f64]) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in values.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in values {
        *v /= sum;
    }
}

/// Cross-entropy of one prediction, clamped away from `ln(0)`.
fn cross_entropy(probs: &[f64], label: usize) -> f64 {
    -probs[label].max(f64::MIN_POSITIVE).ln()
}
