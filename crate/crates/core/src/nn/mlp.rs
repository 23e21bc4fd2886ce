use std::path::Path;

use ndarray::{Array1, Array2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{Activation, Loss, MlpConfig, Optimizer};
use crate::data::{rng, rng::StreamRng, LabeledDataset};
use crate::error::{Error, Result};
use crate::reducers::EpochTrainer;

/// Softmax of a single logit vector.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Sigmoid output to class id: 1 from 0.5 upwards.
pub fn class_from_probability(z: f64) -> usize {
    usize::from(z >= 0.5)
}

/// `N / N_k` for every class present (0 for absent classes).
pub fn class_weights(labels: &[usize], classes: usize) -> Vec<f64> {
    let mut counts = vec![0usize; classes];
    for &l in labels {
        counts[l] += 1;
    }
    let n = labels.len() as f64;
    counts
        .into_iter()
        .map(|c| if c == 0 { 0.0 } else { n / c as f64 })
        .collect()
}

fn activate(z: &Array2<f64>, act: Activation) -> Array2<f64> {
    match act {
        Activation::Relu => z.mapv(|v| v.max(0.0)),
        Activation::Sigmoid => z.mapv(sigmoid),
        Activation::Identity => z.clone(),
        Activation::Softmax => {
            let mut out = z.clone();
            for mut row in out.rows_mut() {
                let s = softmax(row.as_slice().expect("standard layout"));
                row.assign(&Array1::from(s));
            }
            out
        }
    }
}

/// Multiplies `grad` (w.r.t. the activation output) by the derivative.
fn activation_backward(grad: &mut Array2<f64>, z: &Array2<f64>, h: &Array2<f64>, act: Activation) {
    match act {
        Activation::Relu => Zip::from(grad).and(z).for_each(|g, &zv| {
            if zv <= 0.0 {
                *g = 0.0;
            }
        }),
        Activation::Sigmoid => Zip::from(grad).and(h).for_each(|g, &s| *g *= s * (1.0 - s)),
        Activation::Identity => {}
        Activation::Softmax => unreachable!("softmax only appears on the output layer"),
    }
}

struct Pass {
    /// Input of every layer (after dropout for hidden layers).
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
    post: Vec<Array2<f64>>,
    masks: Vec<Option<Array2<f64>>>,
}

/// A multilayer perceptron and the loss recorded after each training epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    config: MlpConfig,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    loss_history: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MlpDocument {
    config: MlpConfig,
    parameters: Vec<f64>,
    loss_history: Vec<f64>,
}

impl Mlp {
    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn init(config: &MlpConfig) -> Result<Self> {
        config.validate()?;
        let mut r = rng::stream(config.seed, "mlp/init");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in config.layer_dims.windows(2) {
            let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
            weights.push(Array2::from_shape_simple_fn((w[0], w[1]), || {
                r.random_range(-limit..limit)
            }));
            biases.push(Array1::zeros(w[1]));
        }
        Ok(Mlp {
            config: config.clone(),
            weights,
            biases,
            loss_history: Vec::new(),
        })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    /// All weights (row-major, `in × out`) then biases, layer by layer.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.config.parameter_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn set_parameters(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.config.parameter_count() {
            return Err(Error::shape(format!(
                "{} parameters given, network has {}",
                theta.len(),
                self.config.parameter_count()
            )));
        }
        let mut at = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for v in w.iter_mut().chain(b.iter_mut()) {
                *v = theta[at];
                at += 1;
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &Array2<f64>) -> Result<()> {
        if x.ncols() != self.config.input_dim() {
            return Err(Error::shape(format!(
                "network expects {} features, got {}",
                self.config.input_dim(),
                x.ncols()
            )));
        }
        Ok(())
    }

    fn check_data(&self, data: &LabeledDataset) -> Result<()> {
        self.check_input(data.examples())?;
        let c = self.config.class_count();
        if let Some(&bad) = data.labels().iter().find(|&&l| l >= c) {
            return Err(Error::shape(format!("label {bad} out of range for a {c}-class head")));
        }
        Ok(())
    }

    fn forward(&self, x: &Array2<f64>, mut dropout: Option<&mut StreamRng>) -> Pass {
        let layers = self.weights.len();
        let mut pass = Pass {
            inputs: Vec::with_capacity(layers),
            pre: Vec::with_capacity(layers),
            post: Vec::with_capacity(layers),
            masks: Vec::with_capacity(layers),
        };
        let mut a = x.to_owned();
        for l in 0..layers {
            let z = a.dot(&self.weights[l]) + &self.biases[l];
            let h = activate(&z, self.config.activations[l]);
            let mut mask = None;
            let mut next = h.clone();
            if l + 1 < layers {
                let p = self.config.dropout[l];
                if let (Some(r), true) = (dropout.as_deref_mut(), p > 0.0) {
                    let keep = 1.0 - p;
                    let m = Array2::from_shape_simple_fn(h.dim(), || {
                        if r.random::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    });
                    next = &h * &m;
                    mask = Some(m);
                }
            }
            pass.inputs.push(a);
            pass.pre.push(z);
            pass.post.push(h);
            pass.masks.push(mask);
            a = next;
        }
        pass
    }

    /// Mean loss of a batch and its gradient w.r.t. the output pre-activations.
    fn loss_head(&self, logits: &Array2<f64>, labels: &[usize], weights: &[f64]) -> (f64, Array2<f64>) {
        let n = labels.len() as f64;
        let mut delta = Array2::zeros(logits.dim());
        let mut total = 0.0;
        match self.config.loss {
            Loss::Bce => {
                for (i, &y) in labels.iter().enumerate() {
                    let z = logits[[i, 0]];
                    let y = y as f64;
                    total += z.max(0.0) - z * y + (-z.abs()).exp().ln_1p();
                    delta[[i, 0]] = (sigmoid(z) - y) / n;
                }
            }
            Loss::WeightedCce => {
                for (i, &y) in labels.iter().enumerate() {
                    let row = logits.row(i);
                    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
                    let w = weights[y];
                    total += w * (lse - row[y]);
                    for k in 0..row.len() {
                        let s = (row[k] - lse).exp();
                        let target = if k == y { 1.0 } else { 0.0 };
                        delta[[i, k]] = w * (s - target) / n;
                    }
                }
            }
        }
        (total / n, delta)
    }

    fn backward(&self, pass: &Pass, mut delta: Array2<f64>) -> (Vec<Array2<f64>>, Vec<Array1<f64>>) {
        let layers = self.weights.len();
        let mut gw = vec![Array2::zeros((0, 0)); layers];
        let mut gb = vec![Array1::zeros(0); layers];
        for l in (0..layers).rev() {
            gw[l] = pass.inputs[l].t().dot(&delta);
            gb[l] = delta.sum_axis(Axis(0));
            if l == 0 {
                break;
            }
            let mut grad = delta.dot(&self.weights[l].t());
            if let Some(m) = &pass.masks[l - 1] {
                grad *= m;
            }
            activation_backward(&mut grad, &pass.pre[l - 1], &pass.post[l - 1], self.config.activations[l - 1]);
            delta = grad;
        }
        (gw, gb)
    }

    /// Inference-mode loss and its gradient (same layout as [`Mlp::parameters`]).
    pub fn loss_and_gradient(&self, data: &LabeledDataset) -> Result<(f64, Vec<f64>)> {
        self.check_data(data)?;
        let weights = class_weights(data.labels(), self.config.class_count());
        let pass = self.forward(data.examples(), None);
        let (loss, delta) = self.loss_head(pass.pre.last().expect("at least one layer"), data.labels(), &weights);
        let (gw, gb) = self.backward(&pass, delta);
        let mut grad = Vec::with_capacity(self.config.parameter_count());
        for (w, b) in gw.iter().zip(&gb) {
            grad.extend(w.iter());
            grad.extend(b.iter());
        }
        Ok((loss, grad))
    }

    pub fn loss(&self, data: &LabeledDataset) -> Result<f64> {
        Ok(self.loss_and_gradient(data)?.0)
    }

    /// Output-layer activations (sigmoid probability or softmax vector).
    pub fn predict_proba(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_input(x)?;
        Ok(self.forward(x, None).post.pop().expect("at least one layer"))
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<usize>> {
        let out = self.predict_proba(x)?;
        Ok(match self.config.loss {
            Loss::Bce => out.column(0).iter().map(|&z| class_from_probability(z)).collect(),
            Loss::WeightedCce => out
                .rows()
                .into_iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
                        .0
                })
                .collect(),
        })
    }

    /// Whether each example of `data` is currently classified correctly.
    pub fn correctness(&self, data: &LabeledDataset) -> Result<Vec<bool>> {
        self.check_data(data)?;
        let pred = self.predict(data.examples())?;
        Ok(pred.iter().zip(data.labels()).map(|(p, y)| p == y).collect())
    }

    pub fn accuracy(&self, data: &LabeledDataset) -> Result<f64> {
        let c = self.correctness(data)?;
        Ok(c.iter().filter(|&&b| b).count() as f64 / c.len() as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&MlpDocument {
            config: self.config.clone(),
            parameters: self.parameters(),
            loss_history: self.loss_history.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MlpDocument = serde_json::from_str(text)?;
        let mut model = Mlp::init(&doc.config)?;
        model.set_parameters(&doc.parameters)?;
        model.loss_history = doc.loss_history;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Mlp::from_json(&text)
    }
}

struct AdamState {
    m_w: Vec<Array2<f64>>,
    v_w: Vec<Array2<f64>>,
    m_b: Vec<Array1<f64>>,
    v_b: Vec<Array1<f64>>,
    step: i32,
}

/// A network in training. Each call to [`MlpTrainer::run_epoch`] reshuffles
/// the data and makes one pass of mini-batch updates.
pub struct MlpTrainer {
    model: Mlp,
    adam: Option<AdamState>,
    shuffle: StreamRng,
    dropout: StreamRng,
}

impl MlpTrainer {
    pub fn new(config: &MlpConfig) -> Result<Self> {
        let model = Mlp::init(config)?;
        let adam = match config.optimizer {
            Optimizer::Adam { .. } => Some(AdamState {
                m_w: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
                v_w: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
                m_b: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
                v_b: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
                step: 0,
            }),
            Optimizer::Sgd { .. } => None,
        };
        Ok(MlpTrainer {
            model,
            adam,
            shuffle: rng::stream(config.seed, "mlp/shuffle"),
            dropout: rng::stream(config.seed, "mlp/dropout"),
        })
    }

    pub fn model(&self) -> &Mlp {
        &self.model
    }

    pub fn into_model(self) -> Mlp {
        self.model
    }

    pub fn epochs_run(&self) -> usize {
        self.model.loss_history.len()
    }

    /// One epoch over `data`; returns the mean training loss.
    pub fn train_epoch(&mut self, data: &LabeledDataset) -> Result<f64> {
        self.model.check_data(data)?;
        let weights = class_weights(data.labels(), self.model.config.class_count());
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut self.shuffle);
        let epoch = self.epochs_run() + 1;
        let mut total = 0.0;
        for batch in order.chunks(self.model.config.batch_size) {
            let x = data.examples().select(Axis(0), batch);
            let y: Vec<usize> = batch.iter().map(|&i| data.labels()[i]).collect();
            let pass = self.model.forward(&x, Some(&mut self.dropout));
            let (loss, delta) = self.model.loss_head(pass.pre.last().expect("at least one layer"), &y, &weights);
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            total += loss * batch.len() as f64;
            let (gw, gb) = self.model.backward(&pass, delta);
            self.step(&gw, &gb);
        }
        let mean = total / data.len() as f64;
        if !mean.is_finite() || self.model.weights.iter().any(|w| w.iter().any(|v| !v.is_finite())) {
            return Err(Error::Divergence { epoch, loss: mean });
        }
        self.model.loss_history.push(mean);
        Ok(mean)
    }

    fn step(&mut self, gw: &[Array2<f64>], gb: &[Array1<f64>]) {
        let model = &mut self.model;
        match (model.config.optimizer, self.adam.as_mut()) {
            (Optimizer::Sgd { learning_rate }, _) => {
                for (w, g) in model.weights.iter_mut().zip(gw) {
                    w.scaled_add(-learning_rate, g);
                }
                for (b, g) in model.biases.iter_mut().zip(gb) {
                    b.scaled_add(-learning_rate, g);
                }
            }
            (
                Optimizer::Adam {
                    learning_rate,
                    beta1,
                    beta2,
                    eps,
                },
                Some(s),
            ) => {
                s.step += 1;
                let c1 = 1.0 - beta1.powi(s.step);
                let c2 = 1.0 - beta2.powi(s.step);
                let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    *p -= learning_rate * (*m / c1) / ((*v / c2).sqrt() + eps);
                };
                for l in 0..gw.len() {
                    Zip::from(&mut model.weights[l])
                        .and(&mut s.m_w[l])
                        .and(&mut s.v_w[l])
                        .and(&gw[l])
                        .for_each(|p, m, v, &g| update(p, m, v, g));
                    Zip::from(&mut model.biases[l])
                        .and(&mut s.m_b[l])
                        .and(&mut s.v_b[l])
                        .and(&gb[l])
                        .for_each(|p, m, v, &g| update(p, m, v, g));
                }
            }
            (Optimizer::Adam { .. }, None) => unreachable!("Adam state is created with the trainer"),
        }
    }
}

impl EpochTrainer for MlpTrainer {
    fn run_epoch(&mut self, data: &LabeledDataset) -> Result<()> {
        self.train_epoch(data).map(|_| ())
    }

    fn correctness(&self, data: &LabeledDataset) -> Result<Vec<bool>> {
        self.model.correctness(data)
    }
}

/// Trains a fresh network for `config.epochs` epochs.
pub fn train(data: &LabeledDataset, config: &MlpConfig) -> Result<Mlp> {
    let mut trainer = MlpTrainer::new(config)?;
    for _ in 0..config.epochs {
        trainer.train_epoch(data)?;
    }
    Ok(trainer.into_model())
}

pub fn predict(model: &Mlp, x: &Array2<f64>) -> Result<Vec<usize>> {
    model.predict(x)
}
