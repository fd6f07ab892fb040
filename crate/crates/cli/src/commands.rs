use std::fs;
use std::path::Path;

use serde::Serialize;

use nlse_core::dataset::store::{write_atomic, write_manifest, MANIFEST_FILE};
use nlse_core::dataset::{generate_with_progress, split as split_manifest, AXIS_NAMES};
use nlse_core::diagnostics::{self, CheckResult, SelfTestOptions};
use nlse_core::oracle::{fit, FitMethod, FitResult};
use nlse_core::regression::exchange::{check_against_dataset, read_predictions_file};
use nlse_core::regression::{binned_trend, metrics};
use nlse_core::{Dataset, DatasetManifest, Triplet};

use crate::{plot, Failure, EXIT_IO};

/// Truth bins in the predicted-versus-true plots.
const TREND_BINS: usize = 20;

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string(value).map_err(|e| Failure::invalid(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn io_failure(what: &str, path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{what} {}: {e}", path.display()),
    }
}

#[derive(Serialize)]
struct GenerateSummary<'a> {
    out: &'a Path,
    sample_count: usize,
    density_max: f64,
    seconds: f64,
}

pub fn generate(config: &Path, out: &Path, seed: Option<u64>, threads: usize) -> Result<(), Failure> {
    let text = fs::read_to_string(config)
        .map_err(|e| Failure::invalid(format!("config {}: {e}", config.display())))?;
    let mut manifest = DatasetManifest::from_json(&text)
        .map_err(|e| Failure::invalid(format!("config {}: {e}", config.display())))?;
    if let Some(seed) = seed {
        manifest.master_seed = seed;
    }
    if out.join(MANIFEST_FILE).exists() {
        return Err(Failure::invalid(format!(
            "{} already contains a dataset",
            out.display()
        )));
    }
    let total = manifest.sample_count;
    eprintln!("generating {total} samples into {}", out.display());
    let mut next_report = 0;
    let summary = generate_with_progress(&manifest, out, threads, |done| {
        if done >= next_report || done == total {
            eprintln!("  {done}/{total}");
            next_report = done + total.div_ceil(20).max(1);
        }
    })?;
    print_json(&GenerateSummary {
        out,
        sample_count: summary.sample_count,
        density_max: summary.density_max,
        seconds: summary.elapsed.as_secs_f64(),
    })
}

fn parse_fractions(text: &str) -> Result<[f64; 3], Failure> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::invalid(format!("fractions {text:?}: {e}")))?;
    parts
        .try_into()
        .map_err(|_| Failure::invalid(format!("fractions {text:?}: expected three values")))
}

#[derive(Serialize)]
struct SplitSummary {
    seed: u64,
    train: usize,
    validation: usize,
    test: usize,
}

pub fn split(dataset: &Path, fractions: &str, seed: u64) -> Result<(), Failure> {
    let fractions = parse_fractions(fractions)?;
    let ds = Dataset::open(dataset)?;
    let manifest = split_manifest(ds.manifest(), fractions, seed)?;
    write_manifest(dataset, &manifest)?;
    let [train, validation, test] = manifest.split.as_ref().map(|s| s.sizes()).unwrap_or_default();
    print_json(&SplitSummary {
        seed,
        train,
        validation,
        test,
    })
}

#[derive(Serialize)]
struct OracleReport {
    index: usize,
    /// Normalized label stored with the observation.
    truth: Triplet,
    #[serde(flatten)]
    result: FitResult,
}

pub fn oracle(dataset: &Path, index: usize, method: FitMethod, budget: usize) -> Result<(), Failure> {
    let ds = Dataset::open(dataset)?;
    let target = ds.observation(index)?;
    let truth = ds.normalized_labels(index)?;
    let manifest = ds.manifest();
    eprintln!("fitting sample {index} with {method:?}, budget {budget}");
    let result = fit(&target, &manifest.scenario(), &manifest.ranges, method, budget)?;
    eprintln!(
        "objective {:.3e} after {} simulations, converged: {}",
        result.objective, result.evaluations, result.converged
    );
    print_json(&OracleReport { index, truth, result })
}

pub fn eval(pred: &Path, dataset: &Path, out: &Path, plot_dir: Option<&Path>) -> Result<(), Failure> {
    let mut rows = read_predictions_file(pred).map_err(|e| match e {
        nlse_core::Error::Io(io) => io_failure("reading", pred, io),
        other => Failure::invalid(format!("{}: {other}", pred.display())),
    })?;
    if rows.is_empty() {
        return Err(Failure::invalid(format!("{} has no rows", pred.display())));
    }
    let ds = Dataset::open(dataset)?;
    check_against_dataset(&rows, &ds)?;
    rows.sort_by_key(|r| r.index);
    let preds: Vec<Triplet> = rows.iter().map(|r| r.pred).collect();
    let truths: Vec<Triplet> = rows.iter().map(|r| r.truth).collect();
    let report = metrics(&preds, &truths)?;

    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::invalid(e.to_string()))?;
    write_atomic(out, json.as_bytes()).map_err(|e| io_failure("writing", out, e))?;

    if let Some(dir) = plot_dir {
        fs::create_dir_all(dir).map_err(|e| io_failure("creating", dir, e))?;
        for (k, name) in AXIS_NAMES.iter().enumerate() {
            let p: Vec<f64> = preds.iter().map(|t| t[k]).collect();
            let t: Vec<f64> = truths.iter().map(|t| t[k]).collect();
            let trend = binned_trend(&p, &t, TREND_BINS)?;
            let svg = plot::predicted_vs_true(name, &p, &t, &trend, &report.parameters[k]);
            let path = dir.join(format!("{name}.svg"));
            fs::write(&path, svg).map_err(|e| io_failure("writing", &path, e))?;
        }
    }
    print_json(&report)
}

type Check = (&'static str, fn(&SelfTestOptions) -> nlse_core::Result<CheckResult>);

const CHECKS: [Check; 6] = [
    ("conservation", |o| diagnostics::power_conservation(896, 200, o)),
    ("beer-lambert", |o| diagnostics::beer_lambert(448, &[13.0, 20.0, 30.0], o)),
    ("diffraction", diagnostics::linear_diffraction),
    ("strang", |o| diagnostics::strang_order(448, o)),
    ("nll", |_| Ok(diagnostics::nll_values())),
    ("format", |_| Ok(diagnostics::format_round_trip())),
];

pub fn selftest(reverse_kinetic_phase: bool, forced_steps: Option<usize>, only: &[String]) -> Result<(), Failure> {
    if let Some(unknown) = only.iter().find(|n| !CHECKS.iter().any(|(k, _)| k == n)) {
        let known: Vec<_> = CHECKS.iter().map(|(k, _)| *k).collect();
        return Err(Failure::invalid(format!("unknown check {unknown:?}; known: {}", known.join(", "))));
    }
    let opts = SelfTestOptions {
        reverse_kinetic_phase,
        forced_steps,
    };
    let mut failed = Vec::new();
    for (key, check) in CHECKS {
        if !only.is_empty() && !only.iter().any(|n| n == key) {
            continue;
        }
        let result = check(&opts).unwrap_or_else(|e| CheckResult {
            name: key,
            passed: false,
            detail: e.to_string(),
        });
        let verdict = if result.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {}: {}", result.name, result.detail);
        if !result.passed {
            failed.push(result.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::invalid(format!("failed checks: {}", failed.join(", "))))
    }
}
