use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Softmax,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    /// Binary cross-entropy on a single sigmoid output.
    Bce,
    /// Categorical cross-entropy with class weights `N / N_k`.
    WeightedCce,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    Sgd {
        learning_rate: f64,
    },
    Adam {
        learning_rate: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
}

fn default_beta1() -> f64 {
    0.9
}

fn default_beta2() -> f64 {
    0.999
}

fn default_eps() -> f64 {
    1e-8
}

impl Optimizer {
    pub fn adam(learning_rate: f64) -> Self {
        Optimizer::Adam {
            learning_rate,
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }

    pub fn sgd(learning_rate: f64) -> Self {
        Optimizer::Sgd { learning_rate }
    }

    pub fn learning_rate(&self) -> f64 {
        match *self {
            Optimizer::Sgd { learning_rate } | Optimizer::Adam { learning_rate, .. } => learning_rate,
        }
    }
}

/// Hidden widths of the ten-layer tabular network.
pub const TABULAR_HIDDEN: [usize; 9] = [50, 45, 40, 35, 30, 25, 20, 15, 10];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Input width followed by the width of every layer.
    pub layer_dims: Vec<usize>,
    /// One activation per layer.
    pub activations: Vec<Activation>,
    /// Dropout probability after each hidden layer.
    pub dropout: Vec<f64>,
    pub loss: Loss,
    pub optimizer: Optimizer,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl MlpConfig {
    /// ReLU hidden layers with a common dropout rate and the output head
    /// matching `loss` (one sigmoid unit for BCE, `classes` softmax units
    /// otherwise).
    pub fn new(input: usize, hidden: &[usize], classes: usize, loss: Loss, dropout: f64) -> Self {
        let out = match loss {
            Loss::Bce => 1,
            Loss::WeightedCce => classes,
        };
        let mut layer_dims = vec![input];
        layer_dims.extend_from_slice(hidden);
        layer_dims.push(out);
        let mut activations = vec![Activation::Relu; hidden.len()];
        activations.push(match loss {
            Loss::Bce => Activation::Sigmoid,
            Loss::WeightedCce => Activation::Softmax,
        });
        MlpConfig {
            layer_dims,
            activations,
            dropout: vec![dropout; hidden.len()],
            loss,
            optimizer: Optimizer::adam(1e-3),
            epochs: 150,
            batch_size: 32,
            seed: 0,
        }
    }

    /// The ten-layer network used for tabular classification: BCE for two
    /// classes, weighted CCE otherwise.
    pub fn tabular(input: usize, classes: usize, dropout: f64) -> Self {
        let loss = if classes == 2 { Loss::Bce } else { Loss::WeightedCce };
        MlpConfig::new(input, &TABULAR_HIDDEN, classes, loss, dropout)
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_optimizer(mut self, optimizer: Optimizer) -> Self {
        self.optimizer = optimizer;
        self
    }

    pub fn layer_count(&self) -> usize {
        self.layer_dims.len().saturating_sub(1)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().expect("validated config")
    }

    /// Number of classes the head predicts.
    pub fn class_count(&self) -> usize {
        match self.loss {
            Loss::Bce => 2,
            Loss::WeightedCce => self.output_dim(),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Every violated constraint, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let layers = self.layer_count();
        if layers == 0 {
            out.push("layer_dims needs an input width and at least one layer".to_string());
            return out;
        }
        if self.layer_dims.contains(&0) {
            out.push("layer widths must be positive".to_string());
        }
        if self.activations.len() != layers {
            out.push(format!(
                "{} activations for {} layers",
                self.activations.len(),
                layers
            ));
        }
        if self.dropout.len() != layers - 1 {
            out.push(format!(
                "{} dropout rates for {} hidden layers",
                self.dropout.len(),
                layers - 1
            ));
        }
        if let Some(p) = self.dropout.iter().find(|p| !(0.0..1.0).contains(*p)) {
            out.push(format!("dropout must lie in [0, 1), got {p}"));
        }
        let hidden = &self.activations[..self.activations.len().min(layers).saturating_sub(1)];
        if hidden.contains(&Activation::Softmax) {
            out.push("softmax is only supported on the output layer".to_string());
        }
        let last = self.activations.last().copied();
        match self.loss {
            Loss::Bce => {
                if self.output_dim() != 1 || last != Some(Activation::Sigmoid) {
                    out.push("BCE needs a single sigmoid output".to_string());
                }
            }
            Loss::WeightedCce => {
                if self.output_dim() < 2 || last != Some(Activation::Softmax) {
                    out.push("weighted CCE needs a softmax output with at least two units".to_string());
                }
            }
        }
        let lr = self.optimizer.learning_rate();
        if !(lr > 0.0 && lr.is_finite()) {
            out.push(format!("learning rate must be positive, got {lr}"));
        }
        if self.batch_size == 0 {
            out.push("batch_size must be at least 1".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}
