// Copyright 2026 The pqmselect developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Minimal feedforward classifier: one relu hidden layer, softmax output,
//! trained with minibatch adam on cross-entropy plus an L2 penalty on the
//! weight matrices.
//!
//! Everything is deterministic: initial weights are a pure function of the
//! seed, and training is a pure function of `(model, data order, seed)`.
//! The minibatch shuffle draws from a dedicated ChaCha stream and can be
//! disabled entirely for fixed-order training.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::DatasetView;
use crate::error::{Error, Result};

/// Training hyperparameters.
///
/// The defaults mirror the reference experiment configuration: adam with
/// `beta1 = 0.9`, `beta2 = 0.999`, `epsilon = 1e-8`, learning rate `1e-3`,
/// L2 coefficient `1e-4`, at most 100 epochs, minibatches of
/// `min(batch_size_cap, N)` samples, and early stopping when the epoch
/// loss fails to improve by `tol` for `n_iter_no_change` consecutive
/// epochs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_neurons: usize,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    pub learning_rate_init: f64,
    pub tol: f64,
    pub n_iter_no_change: usize,
    /// Minibatch size is `min(batch_size_cap, N)`.
    pub batch_size_cap: usize,
    /// Draw minibatches in a freshly shuffled order each epoch. Disabled
    /// by the superposition runner, which requires seedless determinism.
    pub shuffle: bool,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_neurons: 1,
            alpha: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_iter: 100,
            learning_rate_init: 1e-3,
            tol: 1e-4,
            n_iter_no_change: 10,
            batch_size_cap: 200,
            shuffle: true,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_neurons == 0 {
            return Err(Error::Argument("hidden_neurons must be >= 1".into()));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Argument("alpha must be finite and >= 0".into()));
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0 < v && v < 1.0) {
                return Err(Error::Argument(format!("{name} must lie in (0, 1)")));
            }
        }
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("learning_rate_init", self.learning_rate_init),
            ("tol", self.tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Argument(format!("{name} must be finite and > 0")));
            }
        }
        if self.n_iter_no_change == 0 {
            return Err(Error::Argument("n_iter_no_change must be >= 1".into()));
        }
        if self.batch_size_cap == 0 {
            return Err(Error::Argument("batch_size_cap must be >= 1".into()));
        }
        Ok(())
    }
}

/// Weights of a trained (or initial) network. Matrices are row-major:
/// `w1` is hidden×features, `w2` is classes×hidden.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    pub features: usize,
    pub hidden: usize,
    pub classes: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Gradient of the regularized loss, shaped like the model.
#[derive(Clone, Debug)]
pub struct MlpGradient {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl MlpGradient {
    fn zeros(model: &MlpModel) -> Self {
        MlpGradient {
            w1: vec![0.0; model.w1.len()],
            b1: vec![0.0; model.b1.len()],
            w2: vec![0.0; model.w2.len()],
            b2: vec![0.0; model.b2.len()],
        }
    }

    /// Flat layout `w1 | b1 | w2 | b2`, matching [`MlpModel::to_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(
            self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len(),
        );
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.extend_from_slice(&self.b2);
        out
    }
}

/// Why training stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    MaxIter,
    NoImprovement,
}

/// Per-training diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub loss_curve: Vec<f64>,
    pub stop_reason: StopReason,
}

/// Deterministic uniform initialization: each layer's weights are drawn
/// uniformly from `±sqrt(6 / (fan_in + fan_out))`, biases start at zero.
/// Draw order is `w1` row-major then `w2` row-major.
pub fn init_weights(
    config: &MlpConfig,
    feature_count: usize,
    class_count: usize,
    seed: u64,
) -> Result<MlpModel> {
    config.validate()?;
    if feature_count == 0 || class_count == 0 {
        return Err(Error::Argument(
            "feature and class counts must be >= 1".into(),
        ));
    }
    let hidden = config.hidden_neurons;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound1 = (6.0 / (feature_count + hidden) as f64).sqrt();
    let bound2 = (6.0 / (hidden + class_count) as f64).sqrt();
    let mut draw = |bound: f64, len: usize| -> Vec<f64> {
        (0..len)
            .map(|_| (2.0 * rng.random::<f64>() - 1.0) * bound)
            .collect()
    };
    Ok(MlpModel {
        features: feature_count,
        hidden,
        classes: class_count,
        w1: draw(bound1, hidden * feature_count),
        b1: vec![0.0; hidden],
        w2: draw(bound2, class_count * hidden),
        b2: vec![0.0; class_count],
    })
}

impl MlpModel {
    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// Flat parameter vector, layout `w1 | b1 | w2 | b2` (row-major).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.extend_from_slice(&self.b2);
        out
    }

    /// Rebuilds a model from the flat layout of [`Self::to_flat`].
    pub fn from_flat(
        feature_count: usize,
        hidden: usize,
        class_count: usize,
        params: &[f64],
    ) -> Result<Self> {
        let expected = hidden * feature_count + hidden + class_count * hidden + class_count;
        if params.len() != expected {
            return Err(Error::Argument(format!(
                "expected {expected} parameters, got {}",
                params.len()
            )));
        }
        let mut it = params.iter().copied();
        let mut take = |len: usize| -> Vec<f64> { it.by_ref().take(len).collect() };
        Ok(MlpModel {
            features: feature_count,
            hidden,
            classes: class_count,
            w1: take(hidden * feature_count),
            b1: take(hidden),
            w2: take(class_count * hidden),
            b2: take(class_count),
        })
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.features {
            return Err(Error::Argument(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.features
            )));
        }
        Ok(())
    }

    /// Hidden-layer pre-activations `w1·x + b1` (useful for steering test
    /// inputs away from relu kinks).
    pub fn hidden_preactivations(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut pre = self.b1.clone();
        for h in 0..self.hidden {
            let row = &self.w1[h * self.features..(h + 1) * self.features];
            pre[h] += row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
        Ok(pre)
    }

    /// Softmax class probabilities.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let pre = self.hidden_preactivations(x)?;
        let act: Vec<f64> = pre.iter().map(|&v| v.max(0.0)).collect();
        let mut logits = self.b2.clone();
        for c in 0..self.classes {
            let row = &self.w2[c * self.hidden..(c + 1) * self.hidden];
            logits[c] += row.iter().zip(&act).map(|(w, a)| w * a).sum::<f64>();
        }
        Ok(softmax(&logits))
    }

    /// Class with the highest probability; ties go to the lowest index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let probs = self.forward(x)?;
        let mut best = 0usize;
        for (i, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Mean cross-entropy over the batch plus `(alpha/2)·(‖w1‖² + ‖w2‖²)`,
    /// together with its gradient. Biases are not regularized. The relu
    /// derivative at exactly zero is taken as zero.
    pub fn loss_and_gradient(
        &self,
        xs: &[&[f64]],
        labels: &[usize],
        alpha: f64,
    ) -> Result<(f64, MlpGradient)> {
        if xs.is_empty() || xs.len() != labels.len() {
            return Err(Error::Argument(
                "batch must be non-empty with one label per sample".into(),
            ));
        }
        let batch = xs.len() as f64;
        let mut grad = MlpGradient::zeros(self);
        let mut loss = 0.0f64;

        for (&x, &label) in xs.iter().zip(labels) {
            self.check_input(x)?;
            if label >= self.classes {
                return Err(Error::Argument(format!(
                    "label {label} outside {} classes",
                    self.classes
                )));
            }
            let pre = self.hidden_preactivations(x)?;
            let act: Vec<f64> = pre.iter().map(|&v| v.max(0.0)).collect();
            let mut logits = self.b2.clone();
            for c in 0..self.classes {
                let row = &self.w2[c * self.hidden..(c + 1) * self.hidden];
                logits[c] += row.iter().zip(&act).map(|(w, a)| w * a).sum::<f64>();
            }
            let probs = softmax(&logits);
            loss -= probs[label].max(1e-300).ln();

            // d loss / d logits = probs - onehot, scaled by 1/batch.
            let mut dlogit = probs;
            dlogit[label] -= 1.0;
            for v in &mut dlogit {
                *v /= batch;
            }
            let mut dact = vec![0.0f64; self.hidden];
            for c in 0..self.classes {
                grad.b2[c] += dlogit[c];
                for h in 0..self.hidden {
                    grad.w2[c * self.hidden + h] += dlogit[c] * act[h];
                    dact[h] += dlogit[c] * self.w2[c * self.hidden + h];
                }
            }
            for h in 0..self.hidden {
                if pre[h] > 0.0 {
                    grad.b1[h] += dact[h];
                    for (f, &v) in x.iter().enumerate() {
                        grad.w1[h * self.features + f] += dact[h] * v;
                    }
                }
            }
        }

        loss /= batch;
        let reg: f64 = self.w1.iter().chain(&self.w2).map(|w| w * w).sum();
        loss += 0.5 * alpha * reg;
        for (g, w) in grad.w1.iter_mut().zip(&self.w1) {
            *g += alpha * w;
        }
        for (g, w) in grad.w2.iter_mut().zip(&self.w2) {
            *g += alpha * w;
        }
        Ok((loss, grad))
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// First/second moment state of the adam optimizer over one flat
/// parameter block.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    /// One bias-corrected update:
    /// `w -= lr · m̂ / (sqrt(v̂) + epsilon)`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], config: &MlpConfig) {
        debug_assert_eq!(params.len(), grads.len());
        debug_assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - config.beta1.powi(self.t as i32);
        let bc2 = 1.0 - config.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = config.beta1 * self.m[i] + (1.0 - config.beta1) * grads[i];
            self.v[i] = config.beta2 * self.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= config.learning_rate_init * m_hat / (v_hat.sqrt() + config.epsilon);
        }
    }
}

/// Trains `model` on the view with minibatch adam.
///
/// Stops after `max_iter` epochs or once the epoch loss has failed to
/// improve on the best seen loss by more than `tol` for
/// `n_iter_no_change` consecutive epochs. `max_iter = 0` returns the
/// model unchanged. Deterministic given `(model, view order, seed)`.
pub fn train(
    model: MlpModel,
    view: &DatasetView<'_>,
    config: &MlpConfig,
    seed: u64,
) -> Result<(MlpModel, TrainReport)> {
    config.validate()?;
    if view.is_empty() {
        return Err(Error::Training("training view is empty".into()));
    }
    if view.distinct_labels() < 2 {
        return Err(Error::Training(
            "training view contains a single class".into(),
        ));
    }
    if view.feature_count() != model.features || view.class_count() > model.classes {
        return Err(Error::Training(format!(
            "model shape ({} features, {} classes) does not fit view ({} features, {} classes)",
            model.features,
            model.classes,
            view.feature_count(),
            view.class_count()
        )));
    }

    let n = view.len();
    let batch_size = config.batch_size_cap.min(n);
    let mut params = model.to_flat();
    let mut adam = AdamState::new(params.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();

    let mut loss_curve = Vec::new();
    let mut best_loss = f64::INFINITY;
    let mut no_improvement = 0usize;
    let mut stop_reason = StopReason::MaxIter;

    let mut current = MlpModel::from_flat(model.features, model.hidden, model.classes, &params)?;
    for _epoch in 0..config.max_iter {
        if config.shuffle {
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                order.swap(i, j);
            }
        }
        let mut epoch_loss = 0.0f64;
        for chunk in order.chunks(batch_size) {
            let xs: Vec<&[f64]> = chunk.iter().map(|&i| view.features(i)).collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| view.label(i)).collect();
            let (loss, grad) = current.loss_and_gradient(&xs, &labels, config.alpha)?;
            epoch_loss += loss * chunk.len() as f64;
            adam.step(&mut params, &grad.to_flat(), config);
            current = MlpModel::from_flat(model.features, model.hidden, model.classes, &params)?;
        }
        epoch_loss /= n as f64;
        loss_curve.push(epoch_loss);

        if epoch_loss > best_loss - config.tol {
            no_improvement += 1;
        } else {
            no_improvement = 0;
        }
        if epoch_loss < best_loss {
            best_loss = epoch_loss;
        }
        if no_improvement >= config.n_iter_no_change {
            stop_reason = StopReason::NoImprovement;
            break;
        }
    }

    let report = TrainReport {
        epochs_run: loss_curve.len(),
        loss_curve,
        stop_reason,
    };
    Ok((current, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;

    fn toy_separable() -> Dataset {
        // x < 0 is class 0, x > 0 is class 1, generous margin.
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            features.push(vec![-2.0 - 0.1 * i as f64]);
            labels.push(0);
            features.push(vec![2.0 + 0.1 * i as f64]);
            labels.push(1);
        }
        Dataset {
            name: "separable".into(),
            features,
            labels,
            class_count: 2,
        }
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let config = MlpConfig {
            hidden_neurons: 4,
            ..MlpConfig::default()
        };
        let a = init_weights(&config, 3, 2, 7).unwrap();
        let b = init_weights(&config, 3, 2, 7).unwrap();
        assert_eq!(a, b);

        let c = init_weights(&config, 3, 2, 8).unwrap();
        assert_ne!(a, c);

        let bound1 = (6.0 / (3 + 4) as f64).sqrt();
        let bound2 = (6.0 / (4 + 2) as f64).sqrt();
        assert!(a.w1.iter().all(|w| w.abs() <= bound1));
        assert!(a.w2.iter().all(|w| w.abs() <= bound2));
        assert!(a.b1.iter().chain(&a.b2).all(|&b| b == 0.0));
    }

    #[test]
    fn zero_model_predicts_uniformly() {
        let model = MlpModel::from_flat(2, 3, 2, &[0.0; 3 * 2 + 3 + 2 * 3 + 2]).unwrap();
        let probs = model.forward(&[0.4, -0.7]).unwrap();
        assert_eq!(probs, vec![0.5, 0.5]);
        // Tie-break goes to class 0.
        assert_eq!(model.predict(&[0.4, -0.7]).unwrap(), 0);
    }

    #[test]
    fn forward_matches_scalar_oracle() {
        // 1 feature, 1 hidden, 2 classes, hand-computed.
        let model = MlpModel {
            features: 1,
            hidden: 1,
            classes: 2,
            w1: vec![0.5],
            b1: vec![0.2],
            w2: vec![0.3, -0.1],
            b2: vec![0.1, -0.2],
        };
        let x = 0.8f64;
        let act = (0.5 * x + 0.2).max(0.0);
        let l0 = 0.3 * act + 0.1;
        let l1 = -0.1 * act - 0.2;
        let z = l0.exp() + l1.exp();
        let probs = model.forward(&[x]).unwrap();
        assert!((probs[0] - l0.exp() / z).abs() < 1e-15);
        assert!((probs[1] - l1.exp() / z).abs() < 1e-15);

        // Negative pre-activation is clipped to zero.
        let probs = model.forward(&[-1.0]).unwrap();
        let z = (0.1f64).exp() + (-0.2f64).exp();
        assert!((probs[0] - (0.1f64).exp() / z).abs() < 1e-15);
    }

    #[test]
    fn forward_probabilities_sum_to_one() {
        let config = MlpConfig {
            hidden_neurons: 5,
            ..MlpConfig::default()
        };
        let model = init_weights(&config, 4, 3, 11).unwrap();
        for i in 0..20 {
            let x: Vec<f64> = (0..4).map(|j| ((i * 4 + j) as f64 * 0.37).sin()).collect();
            let probs = model.forward(&x).unwrap();
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(probs.iter().all(|&p| p > 0.0 && p < 1.0));
            let pred = model.predict(&x).unwrap();
            assert!(probs.iter().all(|&p| p <= probs[pred]));
        }
    }

    #[test]
    fn forward_rejects_wrong_arity() {
        let model = MlpModel::from_flat(2, 1, 2, &[0.1; 2 + 1 + 2 + 2]).unwrap();
        assert!(model.forward(&[1.0]).is_err());
        assert!(model.predict(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn adam_single_step_matches_scalar_trace() {
        // Quadratic loss 0.5·w² from w = 1: gradient is w.
        let config = MlpConfig::default();
        let mut params = vec![1.0f64];
        let mut adam = AdamState::new(1);
        adam.step(&mut params, &[1.0], &config);

        // Independent trace of the update equations.
        let g = 1.0f64;
        let m = (1.0 - config.beta1) * g;
        let v = (1.0 - config.beta2) * g * g;
        let m_hat = m / (1.0 - config.beta1);
        let v_hat = v / (1.0 - config.beta2);
        let expected = 1.0 - config.learning_rate_init * m_hat / (v_hat.sqrt() + config.epsilon);
        assert!((params[0] - expected).abs() < 1e-15);
        assert!((params[0] - 0.999).abs() < 1e-6);
    }

    #[test]
    fn adam_multi_step_matches_loop_oracle() {
        let config = MlpConfig::default();
        let mut params = vec![1.0f64];
        let mut adam = AdamState::new(1);

        let mut w = 1.0f64;
        let (mut m, mut v) = (0.0f64, 0.0f64);
        for t in 1..=25u32 {
            let grad = [params[0]];
            adam.step(&mut params, &grad, &config);

            let g = w;
            m = config.beta1 * m + (1.0 - config.beta1) * g;
            v = config.beta2 * v + (1.0 - config.beta2) * g * g;
            let m_hat = m / (1.0 - config.beta1.powi(t as i32));
            let v_hat = v / (1.0 - config.beta2.powi(t as i32));
            w -= config.learning_rate_init * m_hat / (v_hat.sqrt() + config.epsilon);
            assert!((params[0] - w).abs() < 1e-14, "step {t}");
        }
    }

    #[test]
    fn training_reaches_perfect_accuracy_on_separable_data() {
        let data = toy_separable();
        let indices: Vec<usize> = (0..data.len()).collect();
        let view = data.view(&indices);
        let config = MlpConfig {
            hidden_neurons: 2,
            max_iter: 1500,
            learning_rate_init: 1e-2,
            n_iter_no_change: 50,
            ..MlpConfig::default()
        };
        let model = init_weights(&config, 1, 2, 5).unwrap();
        let (trained, report) = train(model, &view, &config, 17).unwrap();
        assert!(report.epochs_run > 0);
        assert_eq!(report.loss_curve.len(), report.epochs_run);
        let correct = (0..view.len())
            .filter(|&i| trained.predict(view.features(i)).unwrap() == view.label(i))
            .count();
        assert_eq!(correct, view.len());
    }

    #[test]
    fn zero_epochs_leaves_model_unchanged() {
        let data = toy_separable();
        let indices: Vec<usize> = (0..data.len()).collect();
        let view = data.view(&indices);
        let config = MlpConfig {
            hidden_neurons: 2,
            max_iter: 0,
            ..MlpConfig::default()
        };
        let model = init_weights(&config, 1, 2, 5).unwrap();
        let (same, report) = train(model.clone(), &view, &config, 17).unwrap();
        assert_eq!(model, same);
        assert_eq!(report.epochs_run, 0);
        assert_eq!(report.stop_reason, StopReason::MaxIter);
    }

    #[test]
    fn single_class_view_is_a_training_error() {
        let data = toy_separable();
        let zeros: Vec<usize> = (0..data.len()).step_by(2).collect();
        let view = data.view(&zeros);
        let config = MlpConfig {
            hidden_neurons: 2,
            ..MlpConfig::default()
        };
        let model = init_weights(&config, 1, 2, 5).unwrap();
        assert!(matches!(
            train(model, &view, &config, 1),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let data = toy_separable();
        let indices: Vec<usize> = (0..data.len()).collect();
        let view = data.view(&indices);
        let config = MlpConfig {
            hidden_neurons: 3,
            ..MlpConfig::default()
        };
        let model = init_weights(&config, 1, 2, 2).unwrap();
        let (a, ra) = train(model.clone(), &view, &config, 33).unwrap();
        let (b, rb) = train(model, &view, &config, 33).unwrap();
        assert_eq!(a.to_flat(), b.to_flat());
        assert_eq!(ra, rb);
    }

    #[test]
    fn heavy_regularization_shrinks_weights()  {
        let data = toy_separable();
        let indices: Vec<usize> = (0..data.len()).collect();
        let view = data.view(&indices);
        let mut config = MlpConfig {
            hidden_neurons: 3,
            ..MlpConfig::default()
        };
        let model = init_weights(&config, 1, 2, 4).unwrap();

        let (light, _) = train(model.clone(), &view, &config, 9).unwrap();
        config.alpha = 1e3;
        let (heavy, _) = train(model, &view, &config, 9).unwrap();
        let norm = |m: &MlpModel| {
            m.w1.iter().chain(&m.w2).map(|w| w * w).sum::<f64>()
        };
        assert!(norm(&heavy) < norm(&light));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let config = MlpConfig {
            hidden_neurons: 3,
            ..MlpConfig::default()
        };
        let h = 1e-5;
        for _ in 0..5 {
            let model = init_weights(&config, 2, 2, rng.random()).unwrap();
            // Resample points that sit within 1e-3 of a relu kink.
            let mut xs = Vec::new();
            while xs.len() < 6 {
                let x = vec![
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                ];
                if model
                    .hidden_preactivations(&x)
                    .unwrap()
                    .iter()
                    .all(|p| p.abs() > 1e-3)
                {
                    xs.push(x);
                }
            }
            let labels: Vec<usize> = (0..xs.len()).map(|i| i % 2).collect();
            let refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
            let (_, grad) = model.loss_and_gradient(&refs, &labels, 1e-4).unwrap();
            let analytic = grad.to_flat();

            let flat = model.to_flat();
            for i in 0..flat.len() {
                let mut plus = flat.clone();
                plus[i] += h;
                let mut minus = flat.clone();
                minus[i] -= h;
                let loss_plus = MlpModel::from_flat(2, 3, 2, &plus)
                    .unwrap()
                    .loss_and_gradient(&refs, &labels, 1e-4)
                    .unwrap()
                    .0;
                let loss_minus = MlpModel::from_flat(2, 3, 2, &minus)
                    .unwrap()
                    .loss_and_gradient(&refs, &labels, 1e-4)
                    .unwrap()
                    .0;
                let numeric = (loss_plus - loss_minus) / (2.0 * h);
                let denom = analytic[i].abs().max(numeric.abs()).max(1e-6);
                assert!(
                    (analytic[i] - numeric).abs() / denom < 1e-4,
                    "param {i}: analytic {} vs numeric {numeric}",
                    analytic[i]
                );
            }
        }
    }
}
