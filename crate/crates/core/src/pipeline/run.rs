use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::config::{ExperimentConfig, MethodSpec};
use crate::data::{
    apply_minmax, fit_minmax, load_csv, rng, train_test_split, write_label_mapping, LabeledDataset, Schema, SplitSpec,
};
use crate::error::{Error, Result};
use crate::metrics::{
    confusion, epsilon_representativeness, estimate_carbon, performance_summary, timed, EnergyModel, RunMetrics,
};
use crate::nn::{train, Mlp, MlpConfig, MlpTrainer};
use crate::reducers::{reduce, reduce_fes, Method, ReductionRequest};

/// Key of a ratio in the results document: one decimal when that is exact
/// (`"0.1"`, `"1.0"`), the shortest round-trip form otherwise.
pub fn ratio_key(p: f64) -> String {
    let tenths = p * 10.0;
    if (tenths - tenths.round()).abs() < 1e-9 {
        format!("{p:.1}")
    } else {
        format!("{p}")
    }
}

/// Middle value, or the mean of the two middle values for an even count.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One trained-and-evaluated model.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub iteration: usize,
    /// `None` for the unreduced baseline.
    pub method: Option<Method>,
    pub ratio: f64,
    pub metrics: RunMetrics,
    pub n_train: usize,
    pub reduce_time: f64,
    pub train_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellError {
    pub iteration: usize,
    pub method: Option<Method>,
    pub ratio: f64,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct ExperimentResults {
    pub methods: Vec<Method>,
    pub ratios: Vec<f64>,
    pub n_iter: usize,
    pub class_names: Vec<String>,
    pub schema: Schema,
    pub records: Vec<RunRecord>,
    pub errors: Vec<CellError>,
}

#[derive(Clone, Copy)]
struct Cell<'a> {
    iteration: usize,
    method: Option<&'a MethodSpec>,
    ratio: f64,
}

fn cell_label(iteration: usize, method: Option<Method>, ratio: f64) -> String {
    match method {
        Some(m) => format!("iter{iteration}/{m}/{}", ratio_key(ratio)),
        None => format!("iter{iteration}/baseline"),
    }
}

fn evaluate(model: &Mlp, test: &LabeledDataset) -> Result<crate::metrics::PerformanceSummary> {
    let pred = model.predict(test.examples())?;
    let cm = confusion(test.labels(), &pred, test.class_count())?;
    Ok(performance_summary(&cm))
}

struct CellContext<'a> {
    config: &'a ExperimentConfig,
    energy: EnergyModel,
    input: usize,
    classes: usize,
}

impl CellContext<'_> {
    fn model_config(&self, label: &str) -> MlpConfig {
        let seed = rng::derive_seed(self.config.seed, &format!("model/{label}"));
        self.config.model.build(self.input, self.classes, seed)
    }

    fn run(&self, cell: Cell<'_>, train_set: &LabeledDataset, test: &LabeledDataset) -> Result<RunRecord> {
        let method = cell.method.map(|m| m.name);
        let label = cell_label(cell.iteration, method, cell.ratio);
        let mlp = self.model_config(&label);
        let (model, epsilon, n_train, reduce_time, train_time) = match cell.method {
            None => {
                let (model, t) = timed(|| train(train_set, &mlp));
                (model?, 0.0, train_set.len(), 0.0, t)
            }
            Some(spec) if spec.name == Method::Fes => {
                let mut trainer = MlpTrainer::new(&mlp)?;
                let e_initial = self.config.fes.initial_epochs;
                let e_total = self.config.model.epochs;
                let (outcome, t) = timed(|| reduce_fes(train_set, cell.ratio, &mut trainer, e_initial, e_total));
                let outcome = outcome?;
                let eps = epsilon_representativeness(train_set, &outcome.reduced)?;
                (trainer.into_model(), eps, outcome.reduced.len(), 0.0, t)
            }
            Some(spec) => {
                let seed = rng::derive_seed(self.config.seed, &format!("reduce/{label}"));
                let req = ReductionRequest::new(spec.name, cell.ratio, seed).with_params(spec.params.clone());
                let (reduced, t_red) = timed(|| reduce(train_set, &req));
                let reduced = reduced?;
                let eps = epsilon_representativeness(train_set, &reduced)?;
                let data = reduced.to_dataset()?;
                let (model, t_train) = timed(|| train(&data, &mlp));
                (model?, eps, reduced.len(), t_red, t_train)
            }
        };
        let time = reduce_time + train_time;
        let summary = evaluate(&model, test)?;
        log::info!(
            "{label}: n_train={n_train} acc={:.4} f1_avg={:.4} time={time:.2}s",
            summary.acc,
            summary.f1_avg
        );
        Ok(RunRecord {
            iteration: cell.iteration,
            method,
            ratio: cell.ratio,
            metrics: RunMetrics {
                time,
                carbon: estimate_carbon(time, &self.energy),
                epsilon,
                summary,
            },
            n_train,
            reduce_time,
            train_time,
        })
    }
}

/// Loads, scales and benchmarks the dataset named in `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults> {
    config.validate()?;
    let spec = config
        .dataset
        .as_ref()
        .ok_or_else(|| Error::Config(vec!["dataset: a dataset section is required".into()]))?;
    let data = load_csv(&spec.path, &spec.csv_options())?;
    run_on_dataset(config, &data)
}

/// Runs the benchmark on an in-memory dataset. The dataset is min-max
/// scaled once; every iteration then draws its own train/test split and
/// trains one model per cell: the baseline plus every method × ratio.
pub fn run_on_dataset(config: &ExperimentConfig, data: &LabeledDataset) -> Result<ExperimentResults> {
    config.validate()?;
    let scaled = apply_minmax(data, &fit_minmax(data))?;
    let mut splits = Vec::with_capacity(config.n_iter);
    for i in 0..config.n_iter {
        let split = SplitSpec::new(config.p_test, rng::derive_seed(config.seed, &format!("split/iter{i}")))?
            .stratified(config.stratified_split);
        splits.push(train_test_split(&scaled, &split)?);
    }

    let mut cells = Vec::new();
    for i in 0..config.n_iter {
        cells.push(Cell {
            iteration: i,
            method: None,
            ratio: 1.0,
        });
        for m in &config.methods {
            for &p in &config.ratios {
                cells.push(Cell {
                    iteration: i,
                    method: Some(m),
                    ratio: p,
                });
            }
        }
    }

    let ctx = CellContext {
        config,
        energy: config.energy,
        input: data.feature_count(),
        classes: data.class_count(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::arg(format!("cannot start worker threads: {e}")))?;
    let outcomes: Vec<std::result::Result<RunRecord, CellError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&cell| {
                let (train_set, test) = &splits[cell.iteration];
                ctx.run(cell, train_set, test).map_err(|e| {
                    let method = cell.method.map(|m| m.name);
                    log::warn!("{} failed: {e}", cell_label(cell.iteration, method, cell.ratio));
                    CellError {
                        iteration: cell.iteration,
                        method,
                        ratio: cell.ratio,
                        message: e.to_string(),
                    }
                })
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(e) => errors.push(e),
        }
    }
    Ok(ExperimentResults {
        methods: config.methods.iter().map(|m| m.name).collect(),
        ratios: config.ratios.clone(),
        n_iter: config.n_iter,
        class_names: data.schema().label_names.clone(),
        schema: data.schema().clone(),
        records,
        errors,
    })
}

/// Per-(method, ratio) medians of every metric across iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct MedianRecord {
    pub method: Method,
    pub ratio: f64,
    pub metrics: Map<String, Value>,
    pub iterations: usize,
}

impl ExperimentResults {
    fn record(&self, iteration: usize, method: Option<Method>, ratio: f64) -> Option<&RunRecord> {
        self.records
            .iter()
            .find(|r| r.iteration == iteration && r.method == method && (method.is_none() || r.ratio == ratio))
    }

    fn error(&self, iteration: usize, method: Option<Method>, ratio: f64) -> Option<&CellError> {
        self.errors
            .iter()
            .find(|e| e.iteration == iteration && e.method == method && (method.is_none() || e.ratio == ratio))
    }

    /// Ratios of a method's dictionary, ascending, with the baseline key last.
    fn keys(&self) -> Vec<(Option<f64>, String)> {
        let mut ratios = self.ratios.clone();
        ratios.sort_by(f64::total_cmp);
        let mut keys: Vec<(Option<f64>, String)> = ratios.into_iter().map(|p| (Some(p), ratio_key(p))).collect();
        keys.push((None, ratio_key(1.0)));
        keys
    }

    /// The baseline record when `ratio` is `None`, else the method's record.
    fn leaf(&self, iteration: usize, method: Method, ratio: Option<f64>) -> std::result::Result<&RunRecord, String> {
        let (m, p) = match ratio {
            Some(p) => (Some(method), p),
            None => (None, 1.0),
        };
        match self.record(iteration, m, p) {
            Some(r) => Ok(r),
            None => Err(self
                .error(iteration, m, p)
                .map(|e| e.message.clone())
                .unwrap_or_else(|| "missing".to_string())),
        }
    }

    /// Nested document `iteration → method → ratio → metrics`, with the
    /// unreduced baseline under the ratio key `"1.0"` of every method.
    pub fn to_json(&self) -> Value {
        let mut results = Map::new();
        let mut details = Map::new();
        for i in 0..self.n_iter {
            let mut by_method = Map::new();
            let mut detail_method = Map::new();
            for &m in &self.methods {
                let mut by_ratio = Map::new();
                let mut detail_ratio = Map::new();
                for (p, key) in self.keys() {
                    match self.leaf(i, m, p) {
                        Ok(r) => {
                            by_ratio.insert(key.clone(), Value::Object(r.metrics.to_json()));
                            detail_ratio.insert(
                                key,
                                json!({
                                    "n_train": r.n_train,
                                    "reduce_time": r.reduce_time,
                                    "train_time": r.train_time,
                                }),
                            );
                        }
                        Err(msg) => {
                            by_ratio.insert(key, json!({ "error": msg }));
                        }
                    }
                }
                by_method.insert(m.name().to_string(), Value::Object(by_ratio));
                detail_method.insert(m.name().to_string(), Value::Object(detail_ratio));
            }
            results.insert(i.to_string(), Value::Object(by_method));
            details.insert(i.to_string(), Value::Object(detail_method));
        }
        let errors: Vec<Value> = self
            .errors
            .iter()
            .map(|e| {
                json!({
                    "iteration": e.iteration,
                    "method": e.method.map_or("baseline".to_string(), |m| m.name().to_string()),
                    "ratio": ratio_key(e.ratio),
                    "error": e.message,
                })
            })
            .collect();
        json!({
            "classes": self.class_names,
            "results": results,
            "details": details,
            "errors": errors,
        })
    }

    pub fn medians(&self) -> Vec<MedianRecord> {
        let mut out = Vec::new();
        for &m in &self.methods {
            for (p, _) in self.keys() {
                let leaves: Vec<Map<String, Value>> = (0..self.n_iter)
                    .filter_map(|i| self.leaf(i, m, p).ok())
                    .map(|r| r.metrics.to_json())
                    .collect();
                if leaves.is_empty() {
                    continue;
                }
                let mut metrics = Map::new();
                for key in leaves[0].keys() {
                    let values: Vec<f64> = leaves.iter().filter_map(|l| l.get(key).and_then(Value::as_f64)).collect();
                    metrics.insert(key.clone(), median(&values).into());
                }
                out.push(MedianRecord {
                    method: m,
                    ratio: p.unwrap_or(1.0),
                    metrics,
                    iterations: leaves.len(),
                });
            }
        }
        out
    }

    /// `method → ratio → metric medians`.
    pub fn medians_json(&self) -> Value {
        let mut by_method = Map::new();
        for rec in self.medians() {
            let entry = by_method
                .entry(rec.method.name().to_string())
                .or_insert_with(|| Value::Object(Map::new()));
            entry
                .as_object_mut()
                .expect("object")
                .insert(ratio_key(rec.ratio), Value::Object(rec.metrics));
        }
        Value::Object(by_method)
    }

    /// One row per leaf of [`ExperimentResults::to_json`]; failed cells are left out.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let c = self.class_names.len();
        let mut header: Vec<String> = ["iteration", "method", "ratio", "n_train", "time", "carbon", "epsilon", "acc"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for k in 0..c {
            header.extend([format!("pre_{k}"), format!("rec_{k}"), format!("f1_{k}")]);
        }
        header.extend(["pre_avg", "rec_avg", "f1_avg"].map(String::from));
        w.write_record(&header)?;
        for i in 0..self.n_iter {
            for &m in &self.methods {
                for (p, key) in self.keys() {
                    let Ok(r) = self.leaf(i, m, p) else { continue };
                    let mut row = vec![i.to_string(), m.name().to_string(), key, r.n_train.to_string()];
                    row.extend(r.metrics.to_json().values().map(|v| v.to_string()));
                    w.write_record(&row)?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))
    }

    /// Writes `results.json`, `results.csv`, `medians.json` and the
    /// class-id mapping `labels.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json_path = dir.join("results.json");
        let csv_path = dir.join("results.csv");
        let med_path = dir.join("medians.json");
        let labels_path = dir.join("labels.json");
        let write_json = |path: &Path, v: &Value| -> Result<()> {
            let text = serde_json::to_string_pretty(v)?;
            std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
        };
        write_json(&json_path, &self.to_json())?;
        write_json(&med_path, &self.medians_json())?;
        let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        self.write_csv(std::io::BufWriter::new(file))?;
        write_label_mapping(&labels_path, &self.schema)?;
        Ok(vec![json_path, csv_path, med_path, labels_path])
    }
}

/// Drops the wall-clock fields (`time`, `carbon` and the per-phase times)
/// anywhere in `value`.
pub fn without_timing(value: &Value) -> Value {
    match value {
        Value::Object(m) => Value::Object(
            m.iter()
                .filter(|(k, _)| !matches!(k.as_str(), "time" | "carbon" | "reduce_time" | "train_time"))
                .map(|(k, v)| (k.clone(), without_timing(v)))
                .collect(),
        ),
        Value::Array(a) => Value::Array(a.iter().map(without_timing).collect()),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_rules() {
        assert_eq!(median(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(median(&[10.0, 2.0, 3.0, 1.0]), 2.5);
        assert_eq!(median(&[4.0, 4.0, 4.0]), 4.0);
    }

    #[test]
    fn ratio_keys() {
        assert_eq!(ratio_key(0.1), "0.1");
        assert_eq!(ratio_key(1.0), "1.0");
        assert_eq!(ratio_key(0.3), "0.3");
        assert_eq!(ratio_key(0.25), "0.25");
    }

    #[test]
    fn strips_nested_timing() {
        let v = json!({"a": {"time": 1, "acc": 0.5, "b": [{"carbon": 2, "x": 1}]}});
        assert_eq!(without_timing(&v), json!({"a": {"acc": 0.5, "b": [{"x": 1}]}}));
    }
}
