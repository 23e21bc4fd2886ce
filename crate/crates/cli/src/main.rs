use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde_json::{json, Map, Value};

use datared::data::{apply_minmax, fit_minmax, load_csv, load_csv_with_labels, rng, CsvOptions};
use datared::metrics::{confusion, epsilon_between, epsilon_representativeness, performance_summary, timed};
use datared::nn::{MlpConfig, MlpTrainer};
use datared::pipeline::{run_experiment, DatasetSpec, ExperimentConfig};
use datared::reducers::{reduce, reduce_fes, Method, MethodParams, ReductionRequest};
use datared::Error;

const CONFIG_ENV: &str = "DATARED_CONFIG";

#[derive(Parser)]
#[command(name = "datared", version, about = "Training-set reduction toolkit")]
struct Cli {
    /// Cap on worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a labelled CSV with one method.
    Reduce(ReduceArgs),
    /// ε-representativeness of a reduced CSV with respect to the full one.
    Epsilon(EpsilonArgs),
    /// Classification metrics from a CSV of actual and predicted labels.
    Metrics(MetricsArgs),
    /// Run the benchmark described by a TOML config.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    label: String,
    /// Columns to ignore, repeatable.
    #[arg(long = "drop")]
    drop: Vec<String>,
    #[arg(long, value_parser = method_parser(), ignore_case = true)]
    method: Method,
    #[arg(long)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Method parameter as key=value, repeatable (e.g. delta=0.3, landmark=vital).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Min-max scale features before reducing; the output holds scaled rows.
    #[arg(long)]
    scale: bool,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EpsilonArgs {
    #[arg(long)]
    full: PathBuf,
    #[arg(long)]
    reduced: PathBuf,
    #[arg(long)]
    label: String,
    #[arg(long = "drop")]
    drop: Vec<String>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "actual")]
    actual: String,
    #[arg(long, default_value = "predicted")]
    predicted: String,
    /// Class order, comma separated; defaults to sorted labels.
    #[arg(long, value_delimiter = ',')]
    classes: Vec<String>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Dataset CSV, overrides the config.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, requires = "dataset")]
    label: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(problems) => Failure::Usage(problems.join("\n")),
            Error::Argument(msg) => Failure::Usage(msg),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn method_parser() -> impl TypedValueParser<Value = Method> {
    PossibleValuesParser::new(Method::ALL.map(Method::name)).map(|s| s.parse::<Method>().expect("listed method"))
}

/// Clap's error, followed by the usage line of the subcommand involved when
/// the error does not already show it.
fn usage_failure(e: clap::Error) -> ExitCode {
    let text = e.render().to_string();
    eprint!("{text}");
    if !text.contains("Usage:") {
        let mut cmd = Cli::command();
        cmd.build();
        let sub = std::env::args().nth(1).unwrap_or_default();
        let usage = match cmd.find_subcommand_mut(&sub) {
            Some(sc) => sc.render_usage(),
            None => cmd.render_usage(),
        };
        eprintln!("\n{usage}");
    }
    ExitCode::from(2)
}

type CmdResult = Result<Value, Failure>;

fn parse_params(pairs: &[String]) -> Result<MethodParams, Failure> {
    let mut table = toml::Table::new();
    for pair in pairs {
        let (key, raw) = pair
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--param `{pair}`: expected KEY=VALUE")))?;
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        table.insert(key.trim().to_string(), value);
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e| Failure::Usage(format!("--param: {e}")))
}

fn cmd_reduce(args: ReduceArgs) -> CmdResult {
    let params = parse_params(&args.params)?;
    let request = ReductionRequest::new(args.method, args.ratio, args.seed).with_params(params);
    request.validate()?;
    let mut data = load_csv(&args.input, &CsvOptions::new(&args.label).drop(args.drop))?;
    if args.scale {
        data = apply_minmax(&data, &fit_minmax(&data))?;
    }
    let (reduced, elapsed) = if args.method == Method::Fes {
        let p = &request.params;
        let cfg = MlpConfig::tabular(data.feature_count(), data.class_count(), 0.25)
            .with_epochs(p.e_total)
            .with_seed(rng::derive_seed(args.seed, "model"));
        let mut trainer = MlpTrainer::new(&cfg)?;
        let (out, t) = timed(|| reduce_fes(&data, args.ratio, &mut trainer, p.e_initial, p.e_total));
        (out?.reduced, t)
    } else {
        let (out, t) = timed(|| reduce(&data, &request));
        (out?, t)
    };
    let epsilon = epsilon_representativeness(&data, &reduced)?;
    reduced.write_csv(&args.output)?;
    Ok(json!({
        "n_in": data.len(),
        "n_out": reduced.len(),
        "elapsed_s": elapsed,
        "epsilon": epsilon,
    }))
}

fn cmd_epsilon(args: EpsilonArgs) -> CmdResult {
    let opts = CsvOptions::new(&args.label).drop(args.drop);
    let full = load_csv(&args.full, &opts)?;
    let reduced = load_csv_with_labels(&args.reduced, &opts, &full.schema().label_names)?;
    if reduced.class_count() > full.class_count() {
        let extra = &reduced.schema().label_names[full.class_count()..];
        return Err(Failure::Runtime(format!(
            "reduced data has labels absent from the full data: {}",
            extra.join(", ")
        )));
    }
    if reduced.schema().feature_names != full.schema().feature_names {
        return Err(Failure::Runtime("full and reduced files have different feature columns".into()));
    }
    Ok(json!({ "epsilon": epsilon_between(&full, &reduced)? }))
}

fn class_order(labels: impl Iterator<Item = String>) -> Vec<String> {
    let mut set: Vec<String> = labels.collect();
    set.sort();
    set.dedup();
    if set.iter().all(|s| s.parse::<i64>().is_ok()) {
        set.sort_by_key(|s| s.parse::<i64>().unwrap_or_default());
    }
    set
}

fn cmd_metrics(args: MetricsArgs) -> CmdResult {
    let runtime = |e: csv::Error| Failure::Runtime(format!("{}: {e}", args.input.display()));
    let mut reader = csv::Reader::from_path(&args.input).map_err(runtime)?;
    let headers = reader.headers().map_err(runtime)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Failure::Runtime(format!("column `{name}` not found")))
    };
    let (ca, cp) = (col(&args.actual)?, col(&args.predicted)?);
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(runtime)?;
        pairs.push((record[ca].trim().to_string(), record[cp].trim().to_string()));
    }
    let classes = if args.classes.is_empty() {
        class_order(pairs.iter().flat_map(|(a, p)| [a.clone(), p.clone()]))
    } else {
        args.classes
    };
    let id = |s: &str| {
        classes
            .iter()
            .position(|c| c == s)
            .ok_or_else(|| Failure::Usage(format!("label `{s}` is not in --classes")))
    };
    let mut actual = Vec::with_capacity(pairs.len());
    let mut predicted = Vec::with_capacity(pairs.len());
    for (a, p) in &pairs {
        actual.push(id(a)?);
        predicted.push(id(p)?);
    }
    let cm = confusion(&actual, &predicted, classes.len())?;
    let s = performance_summary(&cm);
    let mut out = Map::new();
    out.insert("classes".into(), json!(classes));
    out.insert("confusion".into(), json!(cm.counts()));
    out.insert("acc".into(), s.acc.into());
    for k in 0..classes.len() {
        out.insert(format!("pre_{k}"), s.pre[k].into());
        out.insert(format!("rec_{k}"), s.rec[k].into());
        out.insert(format!("f1_{k}"), s.f1[k].into());
    }
    out.insert("pre_avg".into(), s.pre_avg.into());
    out.insert("rec_avg".into(), s.rec_avg.into());
    out.insert("f1_avg".into(), s.f1_avg.into());
    Ok(Value::Object(out))
}

fn cmd_benchmark(args: BenchmarkArgs, threads: Option<usize>) -> CmdResult {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(path) = args.dataset {
        let label = match (args.label, &config.dataset) {
            (Some(l), _) => l,
            (None, Some(ds)) => ds.label_column.clone(),
            (None, None) => return Err(Failure::Usage("--label is required with --dataset".into())),
        };
        let drop_columns = config.dataset.take().map(|d| d.drop_columns).unwrap_or_default();
        config.dataset = Some(DatasetSpec {
            path,
            label_column: label,
            drop_columns,
        });
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.n_iter {
        config.n_iter = n;
    }
    if let Some(t) = threads {
        config.threads = t;
    }
    if let Some(dir) = args.output_dir {
        config.output_dir = Some(dir);
    }
    let mut problems = config.problems();
    if config.dataset.is_none() {
        problems.push(format!("dataset: no dataset given (use a config file, {CONFIG_ENV} or --dataset)"));
    }
    if !problems.is_empty() {
        return Err(Failure::Usage(problems.join("\n")));
    }
    let results = run_experiment(&config)?;
    let dir = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("results"));
    let files = results.write(&dir)?;
    Ok(json!({
        "cells": results.records.len() + results.errors.len(),
        "failed": results.errors.len(),
        "files": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    }))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{}", e.render());
            return ExitCode::SUCCESS;
        }
        Err(e) => return usage_failure(e),
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::warn!("cannot size the thread pool: {e}");
        }
    }
    let outcome = match cli.command {
        Command::Reduce(a) => cmd_reduce(a),
        Command::Epsilon(a) => cmd_epsilon(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Benchmark(a) => cmd_benchmark(a, cli.threads),
    };
    match outcome {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
