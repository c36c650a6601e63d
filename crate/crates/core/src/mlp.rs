//! Single-hidden-layer perceptron with two output units.
//!
//! ```text
//! a_j = tanh(sum_i w1[j][i] * x_i + b1[j])
//! y_k = f_outer(sum_j w2[k][j] * a_j + b2[k])
//! ```
//!
//! `f_outer` is the classifier's [`Activation`]. Training minimizes the mean
//! (over samples) sum-of-squares error against one-hot targets with plain
//! full-batch gradient descent.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::ids::{Activation, ClassifierSpec, IdentityDescriptor};

/// Number of output units; index 1 is the positive (conflict) class.
pub const OUTPUTS: usize = 2;

/// Default number of gradient-descent steps.
pub const DEFAULT_EPOCHS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpNetwork {
    input_dim: usize,
    hidden_dim: usize,
    /// `hidden_dim x input_dim`, row-major.
    first_layer_weights: Vec<f64>,
    first_layer_biases: Vec<f64>,
    /// `2 x hidden_dim`, row-major.
    second_layer_weights: Vec<f64>,
    second_layer_biases: Vec<f64>,
    outer_activation: Activation,
    learning_rate: f64,
}

/// Partial derivatives of the loss, laid out like the network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub first_layer_weights: Vec<f64>,
    pub first_layer_biases: Vec<f64>,
    pub second_layer_weights: Vec<f64>,
    pub second_layer_biases: Vec<f64>,
}

impl Gradients {
    fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Gradients {
            first_layer_weights: vec![0.0; hidden_dim * input_dim],
            first_layer_biases: vec![0.0; hidden_dim],
            second_layer_weights: vec![0.0; OUTPUTS * hidden_dim],
            second_layer_biases: vec![0.0; OUTPUTS],
        }
    }

    /// All components in [`MlpNetwork::parameters`] order.
    pub fn flatten(&self) -> Vec<f64> {
        [
            &self.first_layer_weights[..],
            &self.first_layer_biases,
            &self.second_layer_weights,
            &self.second_layer_biases,
        ]
        .concat()
    }

    fn scale(&mut self, factor: f64) {
        for v in self
            .first_layer_weights
            .iter_mut()
            .chain(&mut self.first_layer_biases)
            .chain(&mut self.second_layer_weights)
            .chain(&mut self.second_layer_biases)
        {
            *v *= factor;
        }
    }
}

/// One training example: an input vector and its one-hot target.
pub type Sample = (Vec<f64>, [f64; OUTPUTS]);

/// One-hot target for a binary label.
pub fn one_hot(label: u8) -> [f64; OUTPUTS] {
    if label == 1 {
        [0.0, 1.0]
    } else {
        [1.0, 0.0]
    }
}

/// Argmax over the two outputs; an exact tie goes to class 0.
pub fn label_from_outputs(outputs: [f64; OUTPUTS]) -> u8 {
    u8::from(outputs[1] > outputs[0])
}

struct Activations {
    hidden: Vec<f64>,
    output: [f64; OUTPUTS],
}

impl MlpNetwork {
    /// A network with every weight and bias set to zero.
    pub fn zeros(input_dim: usize, hidden_dim: usize, activation: Activation, learning_rate: f64) -> Self {
        MlpNetwork {
            input_dim,
            hidden_dim,
            first_layer_weights: vec![0.0; hidden_dim * input_dim],
            first_layer_biases: vec![0.0; hidden_dim],
            second_layer_weights: vec![0.0; OUTPUTS * hidden_dim],
            second_layer_biases: vec![0.0; OUTPUTS],
            outer_activation: activation,
            learning_rate,
        }
    }

    /// Uniform initialization in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, drawn in
    /// the order first-layer weights, first-layer biases, second-layer
    /// weights, second-layer biases.
    pub fn random<R: Rng + ?Sized>(
        input_dim: usize,
        hidden_dim: usize,
        activation: Activation,
        learning_rate: f64,
        rng: &mut R,
    ) -> Self {
        let mut net = Self::zeros(input_dim, hidden_dim, activation, learning_rate);
        let first = 1.0 / (input_dim as f64).sqrt();
        let second = 1.0 / (hidden_dim as f64).sqrt();
        for w in net
            .first_layer_weights
            .iter_mut()
            .chain(&mut net.first_layer_biases)
        {
            *w = rng.random_range(-first..=first);
        }
        for w in net
            .second_layer_weights
            .iter_mut()
            .chain(&mut net.second_layer_biases)
        {
            *w = rng.random_range(-second..=second);
        }
        net
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn activation(&self) -> Activation {
        self.outer_activation
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    /// Flat copy of every parameter: first-layer weights, first-layer
    /// biases, second-layer weights, second-layer biases.
    pub fn parameters(&self) -> Vec<f64> {
        [
            &self.first_layer_weights[..],
            &self.first_layer_biases,
            &self.second_layer_weights,
            &self.second_layer_biases,
        ]
        .concat()
    }

    pub fn parameter_count(&self) -> usize {
        self.hidden_dim * (self.input_dim + 1) + OUTPUTS * (self.hidden_dim + 1)
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: self.parameter_count(),
                actual: params.len(),
            });
        }
        let mut rest = params;
        for dst in [
            &mut self.first_layer_weights,
            &mut self.first_layer_biases,
            &mut self.second_layer_weights,
            &mut self.second_layer_biases,
        ] {
            let (head, tail) = rest.split_at(dst.len());
            dst.copy_from_slice(head);
            rest = tail;
        }
        Ok(())
    }

    /// Checks internal dimensions and finiteness, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        let expect = |len: usize, expected: usize| {
            if len == expected {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected,
                    actual: len,
                })
            }
        };
        expect(self.first_layer_weights.len(), self.hidden_dim * self.input_dim)?;
        expect(self.first_layer_biases.len(), self.hidden_dim)?;
        expect(self.second_layer_weights.len(), OUTPUTS * self.hidden_dim)?;
        expect(self.second_layer_biases.len(), OUTPUTS)?;
        if self.parameters().iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("network has non-finite weights".into()));
        }
        Ok(())
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: input.len(),
            });
        }
        Ok(())
    }

    fn activate(&self, input: &[f64]) -> Activations {
        let hidden: Vec<f64> = self
            .first_layer_weights
            .chunks_exact(self.input_dim)
            .zip(&self.first_layer_biases)
            .map(|(row, b)| (dot(row, input) + b).tanh())
            .collect();
        let mut z = [0.0; OUTPUTS];
        for (k, (row, b)) in self
            .second_layer_weights
            .chunks_exact(self.hidden_dim)
            .zip(&self.second_layer_biases)
            .enumerate()
        {
            z[k] = dot(row, &hidden) + b;
        }
        let output = match self.outer_activation {
            Activation::Linear => z,
            Activation::Logistic => z.map(sigmoid),
            Activation::Softmax => {
                let m = z[0].max(z[1]);
                let e = z.map(|v| (v - m).exp());
                let s = e[0] + e[1];
                e.map(|v| v / s)
            }
        };
        Activations { hidden, output }
    }

    pub fn forward(&self, input: &[f64]) -> Result<[f64; OUTPUTS]> {
        self.check_input(input)?;
        Ok(self.activate(input).output)
    }

    pub fn predict_label(&self, input: &[f64]) -> Result<u8> {
        self.forward(input).map(label_from_outputs)
    }

    /// Predicted labels for every row of `data`.
    pub fn predict_all(&self, data: &Dataset) -> Result<Vec<u8>> {
        if data.n_features() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: data.n_features(),
            });
        }
        Ok(data
            .rows()
            .map(|r| label_from_outputs(self.activate(r).output))
            .collect())
    }

    /// Fraction of samples whose predicted label differs from the truth.
    pub fn classification_error(&self, split: &Dataset) -> Result<f64> {
        if split.is_empty() {
            return Err(Error::Empty);
        }
        let predicted = self.predict_all(split)?;
        Ok(misclassification_rate(&predicted, split.labels()))
    }

    // Adds one sample's contribution (unscaled) to `grad`; returns its loss.
    fn backprop(&self, input: &[f64], target: &[f64; OUTPUTS], grad: &mut Gradients) -> f64 {
        let Activations { hidden, output } = self.activate(input);
        let diff = [output[0] - target[0], output[1] - target[1]];
        let loss = diff[0] * diff[0] + diff[1] * diff[1];
        let g = diff.map(|d| 2.0 * d);
        let delta_out: [f64; OUTPUTS] = match self.outer_activation {
            Activation::Linear => g,
            Activation::Logistic => [0, 1].map(|k| g[k] * output[k] * (1.0 - output[k])),
            Activation::Softmax => {
                let mean = g[0] * output[0] + g[1] * output[1];
                [0, 1].map(|k| output[k] * (g[k] - mean))
            }
        };
        for k in 0..OUTPUTS {
            grad.second_layer_biases[k] += delta_out[k];
            let row = &mut grad.second_layer_weights[k * self.hidden_dim..(k + 1) * self.hidden_dim];
            for (w, a) in row.iter_mut().zip(&hidden) {
                *w += delta_out[k] * a;
            }
        }
        for j in 0..self.hidden_dim {
            let back: f64 = (0..OUTPUTS)
                .map(|k| self.second_layer_weights[k * self.hidden_dim + j] * delta_out[k])
                .sum();
            let delta = back * (1.0 - hidden[j] * hidden[j]);
            grad.first_layer_biases[j] += delta;
            let row = &mut grad.first_layer_weights[j * self.input_dim..(j + 1) * self.input_dim];
            for (w, x) in row.iter_mut().zip(input) {
                *w += delta * x;
            }
        }
        loss
    }

    fn mean_loss_gradient<'a, I>(&self, samples: I) -> Result<(f64, Gradients)>
    where
        I: IntoIterator<Item = (&'a [f64], [f64; OUTPUTS])>,
    {
        let mut grad = Gradients::zeros(self.input_dim, self.hidden_dim);
        let mut loss = 0.0;
        let mut n = 0usize;
        for (x, t) in samples {
            self.check_input(x)?;
            loss += self.backprop(x, &t, &mut grad);
            n += 1;
        }
        if n == 0 {
            return Err(Error::Empty);
        }
        grad.scale(1.0 / n as f64);
        Ok((loss / n as f64, grad))
    }

    /// Mean sum-of-squares loss over `batch`.
    pub fn loss(&self, batch: &[Sample]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Empty);
        }
        let mut total = 0.0;
        for (x, t) in batch {
            let y = self.forward(x)?;
            total += (y[0] - t[0]).powi(2) + (y[1] - t[1]).powi(2);
        }
        Ok(total / batch.len() as f64)
    }

    /// Exact gradient of the mean sum-of-squares loss over `batch`.
    pub fn loss_gradient(&self, batch: &[Sample]) -> Result<Gradients> {
        self.mean_loss_gradient(batch.iter().map(|(x, t)| (x.as_slice(), *t)))
            .map(|(_, g)| g)
    }

    /// Loss and gradient over a whole dataset with one-hot targets.
    pub fn dataset_loss_gradient(&self, data: &Dataset) -> Result<(f64, Gradients)> {
        self.mean_loss_gradient(data.rows().zip(data.labels()).map(|(x, &l)| (x, one_hot(l))))
    }

    /// `weight -= learning_rate * gradient` for every parameter.
    pub fn apply_gradient(&mut self, grad: &Gradients) {
        let lr = self.learning_rate;
        let step = |ws: &mut Vec<f64>, gs: &Vec<f64>| {
            for (w, g) in ws.iter_mut().zip(gs) {
                *w -= lr * g;
            }
        };
        step(&mut self.first_layer_weights, &grad.first_layer_weights);
        step(&mut self.first_layer_biases, &grad.first_layer_biases);
        step(&mut self.second_layer_weights, &grad.second_layer_weights);
        step(&mut self.second_layer_biases, &grad.second_layer_biases);
    }

    /// Runs `epochs` full-batch descent steps; returns the loss measured
    /// before each step.
    pub fn fit(&mut self, data: &Dataset, epochs: usize) -> Result<Vec<f64>> {
        if epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        let mut losses = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            let (loss, grad) = self.dataset_loss_gradient(data)?;
            losses.push(loss);
            self.apply_gradient(&grad);
        }
        Ok(losses)
    }
}

/// Result of [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct Training {
    pub network: MlpNetwork,
    /// Set when the training split holds only one class.
    pub single_class: bool,
    pub final_loss: f64,
}

/// Initializes a network for `spec` from `rng` and trains it on `train_split`.
pub fn train<R: Rng + ?Sized>(
    spec: &ClassifierSpec,
    train_split: &Dataset,
    rng: &mut R,
    epochs: usize,
) -> Result<Training> {
    if epochs == 0 {
        return Err(Error::Config("epochs must be at least 1".into()));
    }
    if train_split.is_empty() {
        return Err(Error::Empty);
    }
    let positives = train_split.positives();
    let single_class = positives == 0 || positives == train_split.len();
    let mut network = MlpNetwork::random(
        train_split.n_features(),
        spec.hidden_nodes,
        spec.activation,
        spec.learning_rate.value(),
        rng,
    );
    network.fit(train_split, epochs)?;
    let (final_loss, _) = network.dataset_loss_gradient(train_split)?;
    Ok(Training {
        network,
        single_class,
        final_loss,
    })
}

/// Fraction of positions where the two label slices disagree.
pub fn misclassification_rate(predicted: &[u8], truth: &[u8]) -> f64 {
    assert_eq!(predicted.len(), truth.len());
    let wrong = predicted.iter().zip(truth).filter(|(p, t)| p != t).count();
    wrong as f64 / truth.len() as f64
}

/// A trained pool member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub spec: ClassifierSpec,
    pub descriptor: IdentityDescriptor,
    pub network: MlpNetwork,
    pub validation_error: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}
