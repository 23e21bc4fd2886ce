use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::CsvOptions;
use crate::error::{Error, Result};
use crate::metrics::EnergyModel;
use crate::nn::{Loss, MlpConfig, Optimizer, TABULAR_HIDDEN};
use crate::reducers::{Method, MethodParams, ReductionRequest};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub label_column: String,
    #[serde(default)]
    pub drop_columns: Vec<String>,
}

impl DatasetSpec {
    pub fn csv_options(&self) -> CsvOptions {
        CsvOptions::new(self.label_column.clone()).drop(self.drop_columns.iter().cloned())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossChoice {
    /// BCE for two classes, weighted CCE otherwise.
    #[default]
    Auto,
    Bce,
    WeightedCce,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerChoice {
    #[default]
    Adam,
    Sgd,
}

/// Network and training settings; the input and output widths come from
/// the dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub loss: LossChoice,
    pub optimizer: OptimizerChoice,
    pub learning_rate: f64,
    /// Total training epochs `n_e`.
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            hidden: TABULAR_HIDDEN.to_vec(),
            dropout: 0.25,
            loss: LossChoice::Auto,
            optimizer: OptimizerChoice::Adam,
            learning_rate: 1e-3,
            epochs: 150,
            batch_size: 32,
        }
    }
}

impl ModelSpec {
    pub fn build(&self, input: usize, classes: usize, seed: u64) -> MlpConfig {
        let loss = match (self.loss, classes) {
            (LossChoice::Auto, 2) | (LossChoice::Bce, _) => Loss::Bce,
            _ => Loss::WeightedCce,
        };
        let optimizer = match self.optimizer {
            OptimizerChoice::Adam => Optimizer::adam(self.learning_rate),
            OptimizerChoice::Sgd => Optimizer::sgd(self.learning_rate),
        };
        MlpConfig::new(input, &self.hidden, classes, loss, self.dropout)
            .with_optimizer(optimizer)
            .with_epochs(self.epochs)
            .with_batch_size(self.batch_size)
            .with_seed(seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FesSpec {
    /// Epochs `n_i` on the full training set before selecting.
    pub initial_epochs: usize,
}

impl Default for FesSpec {
    fn default() -> Self {
        FesSpec { initial_epochs: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub name: Method,
    #[serde(default)]
    pub params: MethodParams,
}

impl MethodSpec {
    pub fn new(name: Method) -> Self {
        MethodSpec {
            name,
            params: MethodParams::default(),
        }
    }
}

fn default_ratios() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// A benchmark description, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: Option<DatasetSpec>,
    pub seed: u64,
    pub n_iter: usize,
    pub p_test: f64,
    pub stratified_split: bool,
    pub ratios: Vec<f64>,
    pub methods: Vec<MethodSpec>,
    pub model: ModelSpec,
    pub fes: FesSpec,
    pub energy: EnergyModel,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: None,
            seed: 0,
            n_iter: 10,
            p_test: 0.25,
            stratified_split: false,
            ratios: default_ratios(),
            methods: Method::ALL.into_iter().map(MethodSpec::new).collect(),
            model: ModelSpec::default(),
            fes: FesSpec::default(),
            energy: EnergyModel::calibrated(),
            threads: 0,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(ds) = cfg.dataset.as_mut() {
            if ds.path.is_relative() {
                if let Some(dir) = path.parent() {
                    ds.path = dir.join(&ds.path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Every invalid field, each message naming it.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_iter == 0 {
            out.push("n_iter: must be at least 1".to_string());
        }
        if !(self.p_test > 0.0 && self.p_test < 1.0) {
            out.push(format!("p_test: must lie in (0, 1), got {}", self.p_test));
        }
        if self.ratios.is_empty() {
            out.push("ratios: must not be empty".to_string());
        }
        for (i, &p) in self.ratios.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                out.push(format!("ratios[{i}]: must lie in (0, 1], got {p}"));
            } else if p == 1.0 {
                out.push(format!("ratios[{i}]: 1.0 is the unreduced baseline and is always run"));
            }
        }
        let mut seen = HashSet::new();
        for p in &self.ratios {
            if !seen.insert(p.to_bits()) {
                out.push(format!("ratios: {p} is listed twice"));
            }
        }
        if self.methods.is_empty() {
            out.push("methods: must list at least one method".to_string());
        }
        let mut names = HashSet::new();
        for (i, m) in self.methods.iter().enumerate() {
            if !names.insert(m.name) {
                out.push(format!("methods[{i}].name: {} is listed twice", m.name));
            }
            for &p in self.ratios.iter().filter(|&&p| p > 0.0 && p < 1.0) {
                let mut req = ReductionRequest::new(m.name, p, self.seed).with_params(m.params.clone());
                if m.name == Method::Fes {
                    req.params.e_initial = self.fes.initial_epochs.max(1);
                    req.params.e_total = self.model.epochs.max(req.params.e_initial + 1);
                }
                if let Err(e) = req.validate() {
                    out.push(format!("methods[{i}].params: {e} (ratio {p})"));
                    break;
                }
            }
        }
        if self.methods.iter().any(|m| m.name == Method::Fes)
            && (self.fes.initial_epochs == 0 || self.fes.initial_epochs >= self.model.epochs)
        {
            out.push(format!(
                "fes.initial_epochs: must satisfy 1 <= n_i < model.epochs ({}), got {}",
                self.model.epochs, self.fes.initial_epochs
            ));
        }
        if self.model.hidden.contains(&0) {
            out.push("model.hidden: layer widths must be positive".to_string());
        }
        if !(0.0..1.0).contains(&self.model.dropout) {
            out.push(format!("model.dropout: must lie in [0, 1), got {}", self.model.dropout));
        }
        if !(self.model.learning_rate > 0.0 && self.model.learning_rate.is_finite()) {
            out.push(format!(
                "model.learning_rate: must be positive, got {}",
                self.model.learning_rate
            ));
        }
        if self.model.batch_size == 0 {
            out.push("model.batch_size: must be at least 1".to_string());
        }
        if self.energy.validate().is_err() {
            out.push("energy: power_watts and carbon_intensity must be nonnegative".to_string());
        }
        if let Some(ds) = &self.dataset {
            if ds.path.as_os_str().is_empty() {
                out.push("dataset.path: must not be empty".to_string());
            }
            if ds.label_column.is_empty() {
                out.push("dataset.label_column: must not be empty".to_string());
            }
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
