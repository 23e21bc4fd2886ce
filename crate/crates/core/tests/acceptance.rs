//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use datared::data::{load_csv, CsvOptions};
use datared::metrics::{
    epsilon_between, epsilon_representativeness, estimate_carbon, performance_summary, ConfusionMatrix,
    EnergyModel,
};
use datared::nn::{Loss, MlpConfig, MlpTrainer};
use datared::persistence::{barcodes, rips_filtration};
use datared::pipeline::{run_on_dataset, without_timing, ExperimentConfig, MethodSpec};
use datared::reducers::{
    auto_bandwidth, forgetting_events, protodash, reduce, reduce_fes, reduce_mms, reduce_srs, ForgetCount, Method,
    ReducedDataset, ReductionRequest,
};
use datared::LabeledDataset;
use ndarray::{array, Array2};
use rand::Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Blocked(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sizes() -> Check {
    let start = Instant::now();
    let mut r = rng(1);
    let mut checked = 0;
    for trial in 0..100u64 {
        let n = r.random_range(20..=500);
        let d = r.random_range(2..=10);
        let c = r.random_range(1..=5);
        let data = random_dataset(&mut r, n, d, c);
        let class_sizes = data.class_sizes();
        for tenths in 1..=9 {
            let p = tenths as f64 / 10.0;
            for method in Method::ALL {
                let out: ReducedDataset = if method == Method::Fes {
                    let cfg = MlpConfig::new(d, &[4], c.max(2), if c == 2 { Loss::Bce } else { Loss::WeightedCce }, 0.0)
                        .with_seed(trial);
                    let data = LabeledDataset::new(data.examples().clone(), data.labels().to_vec(), c.max(2))
                        .map_err(|e| e.to_string())?;
                    let mut trainer = MlpTrainer::new(&cfg).map_err(|e| e.to_string())?;
                    reduce_fes(&data, p, &mut trainer, 1, 2).map_err(|e| format!("FES: {e}"))?.reduced
                } else {
                    reduce(&data, &ReductionRequest::new(method, p, trial)).map_err(|e| format!("{method}: {e}"))?
                };
                match method {
                    Method::Des | Method::Nrmd | Method::Rkm => {
                        let want = floor_tenths(tenths, n);
                        ensure(out.len() == want, || {
                            format!("trial {trial} {method} p={p}: {} rows, want {want}", out.len())
                        })?;
                    }
                    _ => {
                        let want: Vec<usize> = class_sizes.iter().map(|&m| floor_tenths(tenths, m)).collect();
                        let mut got = out.class_sizes();
                        got.resize(want.len(), 0);
                        ensure(got == want, || format!("trial {trial} {method} p={p}: {got:?}, want {want:?}"))?;
                    }
                }
                checked += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{checked} reductions on 100 datasets matched their size contracts in {secs:.1}s"))
}

fn epsilon() -> Check {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for trial in 0..50u64 {
        let n = r.random_range(2..=200);
        let d = r.random_range(1..=6);
        let c = r.random_range(1..=4).min(n);
        let data = random_dataset(&mut r, n, d, c);
        let red = match trial % 3 {
            0 => reduce_srs(&data, 0.3, trial),
            1 => reduce_mms(&data, 0.5, trial),
            _ => reduce(&data, &ReductionRequest::new(Method::Clc, 0.4, trial)).map_err(|e| e.to_string())?,
        };
        match naive_epsilon(&data, red.examples(), red.labels()) {
            Some(want) => {
                let got = epsilon_representativeness(&data, &red).map_err(|e| e.to_string())?;
                worst = worst.max((got - want).abs());
                ensure((got - want).abs() <= 1e-12, || format!("trial {trial}: {got} vs {want}"))?;
            }
            None => ensure(epsilon_representativeness(&data, &red).is_err(), || {
                format!("trial {trial}: missing class not reported")
            })?,
        }
        let own = epsilon_between(&data, &data).map_err(|e| e.to_string())?;
        ensure(own == 0.0, || format!("trial {trial}: eps(D, D) = {own}"))?;
    }
    Ok(format!("50 instances agree with the double loop (max deviation {worst:.1e}); eps(D, D) = 0"))
}

fn persistence() -> Check {
    let mut r = rng(3);
    for trial in 0..100 {
        let m = r.random_range(1..=7);
        let d = r.random_range(1..=3);
        let x = Array2::from_shape_fn((m, d), |_| r.random_range(-1.0..1.0));
        let scale = r.random_range(0.2..3.0);
        let max_dim = r.random_range(1..=3);
        let got: Vec<(usize, f64, f64)> = barcodes(&rips_filtration(&x, scale, max_dim).map_err(|e| e.to_string())?)
            .sorted()
            .into_iter()
            .map(|(k, i)| (k, i.birth, i.death))
            .collect();
        let (want, ..) = naive_barcode(&x, scale, max_dim);
        ensure(got == want, || format!("trial {trial}: {got:?} vs {want:?}"))?;
    }
    let square = array![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let b = barcodes(&rips_filtration(&square, 2.0, 2).map_err(|e| e.to_string())?);
    let h1 = b.dim(1);
    ensure(
        h1.len() == 1 && (h1[0].birth - 1.0).abs() < 1e-9 && (h1[0].death - 2f64.sqrt()).abs() < 1e-9,
        || format!("unit square H1 = {h1:?}"),
    )?;
    Ok("100 random clouds match the naive reduction; unit square H1 = [1, sqrt 2)".into())
}

fn protodash_quality() -> Check {
    let mut r = rng(4);
    let bound = 1.0 - (-1.0f64).exp();
    let mut worst_ratio = f64::INFINITY;
    for trial in 0..30 {
        let d = r.random_range(1..=4);
        let x = Array2::from_shape_fn((8, d), |_| r.random::<f64>());
        let h = auto_bandwidth(&x);
        let found = protodash(&x, 3, h).map_err(|e| e.to_string())?;
        let (k, mu) = kernel_and_mean(&x, h);
        let best = protodash_optimum(&mu, &k, 3);
        let got = *found.objective_history.last().ok_or("empty history")?;
        ensure(got >= bound * best - 1e-12, || format!("trial {trial}: {got} < (1-1/e) * {best}"))?;
        ensure(found.objective_history.windows(2).all(|w| w[1] >= w[0] - 1e-12), || {
            format!("trial {trial}: objective decreased {:?}", found.objective_history)
        })?;
        worst_ratio = worst_ratio.min(got / best);
    }
    Ok(format!("30 classes: greedy/optimum >= {worst_ratio:.4} (bound {bound:.4}), objective nondecreasing"))
}

fn gradients() -> Check {
    let mut worst = 0.0f64;
    for seed in 0..20 {
        for loss in [Loss::Bce, Loss::WeightedCce] {
            let (model, data) = random_network(100 + seed, loss);
            let err = gradient_relative_error(&model, &data, 1e-6);
            ensure(err < 1e-4, || format!("seed {seed} {loss:?}: relative error {err:.2e}"))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("40 networks, max relative error {worst:.2e}"))
}

fn fes_trace() -> Check {
    let trace = vec![
        vec![true, false, false],
        vec![true, true, false],
        vec![true, false, false],
        vec![true, true, false],
    ];
    let got = forgetting_events(&trace).map_err(|e| e.to_string())?;
    let want = vec![ForgetCount::Finite(0), ForgetCount::Finite(1), ForgetCount::Infinite];
    ensure(got == want, || format!("{got:?}"))?;

    let x = Array2::from_shape_fn((3, 1), |(i, _)| i as f64);
    let data = LabeledDataset::new(x, vec![0, 0, 0], 1).map_err(|e| e.to_string())?;
    let mut trainer = ScriptedTrainer::new(trace);
    let out = reduce_fes(&data, 0.34, &mut trainer, 4, 5).map_err(|e| e.to_string())?;
    ensure(out.forgetting == want, || format!("{:?}", out.forgetting))?;
    ensure(out.reduced.selected_indices() == Some(&[2][..]), || {
        format!("selected {:?}", out.reduced.selected_indices())
    })?;
    Ok("f = (0, 1, INF); the never-correct example is selected first".into())
}

fn metrics_arithmetic() -> Check {
    let cm = ConfusionMatrix::from_counts(vec![vec![1, 1], vec![0, 2]]).map_err(|e| e.to_string())?;
    let s = performance_summary(&cm);
    let checks = [
        ("Acc", s.acc, 0.75),
        ("MAPre", s.pre_avg, 5.0 / 6.0),
        ("MARec", s.rec_avg, 0.75),
        ("MAF1", s.f1_avg, 11.0 / 15.0),
    ];
    for (name, got, want) in checks {
        ensure((got - want).abs() < 1e-12, || format!("{name} = {got}, want {want}"))?;
    }
    Ok("Acc 0.75, MAPre 5/6, MARec 0.75, MAF1 11/15".into())
}

fn dry_bean_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("DRY_BEAN_CSV") {
        return Some(PathBuf::from(p));
    }
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    ["data/Dry_Bean_Dataset.csv", "data/dry_bean.csv"]
        .iter()
        .map(|p| root.join(p))
        .find(|p| p.exists())
}

fn median_of(res: &datared::pipeline::ExperimentResults, method: Method, ratio: &str, key: &str) -> Option<f64> {
    res.medians_json()[method.name()][ratio][key].as_f64()
}

/// Reduced-epoch pipeline run with SRS at 0.2, 0.5 and 0.8 and the
/// accuracy and timing checks of the reproduction.
fn reproduce(data: &LabeledDataset) -> Check {
    let start = Instant::now();
    let mut cfg = ExperimentConfig {
        seed: 0,
        n_iter: 3,
        ratios: vec![0.2, 0.5, 0.8],
        methods: vec![MethodSpec::new(Method::Srs)],
        ..ExperimentConfig::default()
    };
    cfg.model.epochs = 30;
    let res = run_on_dataset(&cfg, data).map_err(|e| e.to_string())?;
    ensure(res.errors.is_empty(), || format!("{:?}", res.errors))?;
    let acc = |p: &str| median_of(&res, Method::Srs, p, "acc").unwrap_or(f64::NAN);
    let time = |p: &str| median_of(&res, Method::Srs, p, "time").unwrap_or(f64::NAN);
    let (base, half) = (acc("1.0"), acc("0.5"));
    let (t2, t8, tb) = (time("0.2"), time("0.8"), time("1.0"));
    let secs = start.elapsed().as_secs_f64();
    let summary = format!(
        "baseline acc {base:.4}, SRS 0.5 acc {half:.4}, times {t2:.2}s / {t8:.2}s / {tb:.2}s, {secs:.0}s total"
    );
    ensure(base >= 0.85, || format!("baseline accuracy too low: {summary}"))?;
    ensure((base - half).abs() <= 0.05, || format!("SRS 0.5 too far from baseline: {summary}"))?;
    ensure(t2 < t8 && t8 < tb, || format!("times not increasing with size: {summary}"))?;
    ensure(secs < 1800.0, || format!("too slow: {summary}"))?;
    Ok(summary)
}

fn dry_bean() -> Outcome {
    let Some(path) = dry_bean_path() else {
        // Same run on a synthetic stand-in of the same shape, reported only.
        let stand_in = gaussian_mixture(&mut rng(8), 13_611 / 7, 16, 7);
        let note = match catch_unwind(|| reproduce(&stand_in)) {
            Ok(Ok(s)) => format!("stand-in mixture passes ({s})"),
            Ok(Err(s)) => format!("stand-in mixture fails ({s})"),
            Err(_) => "stand-in mixture panicked".to_string(),
        };
        return Outcome::Blocked(format!(
            "Dry Bean CSV not found (set DRY_BEAN_CSV or place data/Dry_Bean_Dataset.csv); {note}"
        ));
    };
    let label = std::env::var("DRY_BEAN_LABEL").unwrap_or_else(|_| "Class".into());
    let outcome = load_csv(&path, &CsvOptions::new(label))
        .map_err(|e| e.to_string())
        .and_then(|data| reproduce(&data));
    match outcome {
        Ok(s) => Outcome::Pass(s),
        Err(s) => Outcome::Fail(s),
    }
}

fn mms_dominance() -> Check {
    let trials = 50;
    let mut wins = 0;
    for t in 0..trials {
        let mut r = rng(500 + t);
        let c = r.random_range(2..=4);
        let d = r.random_range(2..=5);
        let data = gaussian_mixture(&mut r, 60, d, c);
        let p = [0.1, 0.2, 0.3][t as usize % 3];
        let mms = epsilon_representativeness(&data, &reduce_mms(&data, p, t)).map_err(|e| e.to_string())?;
        let srs = epsilon_representativeness(&data, &reduce_srs(&data, p, t)).map_err(|e| e.to_string())?;
        if mms <= srs {
            wins += 1;
        }
    }
    ensure(wins * 10 >= trials * 9, || format!("MMS won {wins}/{trials}"))?;
    Ok(format!("eps(MMS) <= eps(SRS) in {wins}/{trials} trials"))
}

fn determinism() -> Check {
    let data = gaussian_mixture(&mut rng(6), 40, 3, 3);
    let cfg = |threads: usize| {
        let mut c = ExperimentConfig {
            seed: 99,
            n_iter: 2,
            threads,
            ..ExperimentConfig::default()
        };
        c.model.hidden = vec![8, 6];
        c.model.epochs = 6;
        c.fes.initial_epochs = 3;
        c
    };
    let runs: Vec<serde_json::Value> = [1, 4, 4]
        .into_iter()
        .map(|t| run_on_dataset(&cfg(t), &data).map(|r| without_timing(&r.to_json())))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(runs[0]["errors"].as_array().is_some_and(|a| a.is_empty()), || format!("{}", runs[0]["errors"]))?;
    ensure(runs[1] == runs[2], || "two runs with 4 threads differ".into())?;
    ensure(runs[0] == runs[1], || "1 thread and 4 threads differ".into())?;
    Ok("9 methods x 9 ratios x 2 iterations: identical JSON across runs and 1 or 4 threads".into())
}

fn carbon() -> Check {
    let grams = estimate_carbon(60.0, &EnergyModel::calibrated()) * 1000.0;
    ensure((grams - 0.22).abs() < 1e-6, || format!("{grams} g"))?;
    Ok(format!("60 s -> {grams:.6} g CO2"))
}

fn guarded(f: fn() -> Check) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => Outcome::Pass(s),
        Ok(Err(s)) => Outcome::Fail(s),
        Err(p) => Outcome::Fail(format!(
            "panicked: {}",
            p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
        )),
    }
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("size contracts", Box::new(|| guarded(sizes))),
        ("epsilon oracle", Box::new(|| guarded(epsilon))),
        ("persistence oracle", Box::new(|| guarded(persistence))),
        ("protodash quality", Box::new(|| guarded(protodash_quality))),
        ("mlp gradient check", Box::new(|| guarded(gradients))),
        ("forgetting trace", Box::new(|| guarded(fes_trace))),
        ("metrics arithmetic", Box::new(|| guarded(metrics_arithmetic))),
        ("dry bean reproduction", Box::new(dry_bean)),
        ("mms dominance", Box::new(|| guarded(mms_dominance))),
        ("determinism", Box::new(|| guarded(determinism))),
        ("carbon model", Box::new(|| guarded(carbon))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Outcome::Pass(s) => ("PASS", s),
            Outcome::Fail(s) => {
                failed += 1;
                ("FAIL", s)
            }
            Outcome::Blocked(s) => ("BLOCKED", s),
        };
        println!("{tag:<7} {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
