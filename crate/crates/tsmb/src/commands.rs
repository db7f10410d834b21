//! Subcommand implementations.
//!
//! Seed fan-out for `benchmark`: dataset `i` works from
//! `ds_seed = mix(master, i)`; within a dataset, cross-validation derives
//! its fold seeds from `ds_seed`, the final full-training fit uses
//! `mix(ds_seed, k)`, and rerun `r` uses `mix(ds_seed, RERUN_STREAM + r)`.
//! Every scheme on a dataset shares `ds_seed`, so schemes see identical
//! folds and the comparison is paired.

use std::path::Path;

use tsmb_core::classify::{train_classifier, Family, TrainedClassifier};
use tsmb_core::dataset::{Dataset, LabeledSeries};
use tsmb_core::eval::{
    cross_validate, fcm_grid, guarded_accuracy, hmm_grid, runs_from, timing_report, CvConfig,
    ModelRun,
};
use tsmb_core::seed;

use crate::bundle::{bundle_json, describe, load_bundle, save_bundle};
use crate::config::{
    parse_format, resolve_train, BenchmarkPlan, CompareArgs, InspectArgs, TrainArgs,
};
use crate::formats::{load_dataset, load_series};
use crate::report::{
    accuracy_csv, compare_matrix, parse_report, report_json, rerun_summary, scheme_correlations,
    timing_csv, BenchmarkReport, CvCellOut, FailureOut, SchemeResult, REPORT_VERSION,
};
use crate::util::atomic_write;
use crate::CliError;

/// Stream offset separating rerun seeds from fold and final-training seeds.
const RERUN_STREAM: u64 = 0x5EED_0000;

/// Sizes the global rayon pool. Without `--jobs` (or a config `jobs` value)
/// rayon's default — all cores — stands. Later calls lose quietly, which is
/// exactly right: the pool is process-global and first configuration wins.
pub fn init_pool(jobs: Option<usize>) {
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

/// `tsmb train`: fit one classifier on one file and save it as a bundle.
pub fn cmd_train(args: &TrainArgs) -> Result<(), CliError> {
    let (scheme, hyper, cfg, seed, format) = resolve_train(args)?;
    let mut series = load_series(&args.train, format)?;
    if args.znorm {
        series = series.iter().map(LabeledSeries::znormalize).collect();
    }
    let clf = train_classifier(scheme, &series, &hyper, &cfg, seed).map_err(data_err)?;
    save_bundle(&args.out, &clf)?;
    println!("wrote {}", args.out.display());
    print!("{}", describe(&clf));
    Ok(())
}

/// One (dataset, scheme) unit of benchmark work.
fn run_scheme(
    ds: &Dataset,
    ds_seed: u64,
    scheme: tsmb_core::classify::SchemeId,
    plan: &BenchmarkPlan,
    runs: &mut Vec<ModelRun>,
) -> Result<SchemeResult, CliError> {
    let grid = match scheme.family {
        Family::Hmm => hmm_grid(plan.hmm_states.0, plan.hmm_states.1, &plan.cov_types),
        Family::Fcm => fcm_grid(plan.fcm_concepts.0, plan.fcm_concepts.1),
    };
    let cv_cfg = CvConfig {
        k: plan.k,
        lenient_failures: plan.lenient_failures,
        train: plan.train.clone(),
    };
    let cv = cross_validate(scheme, ds.train(), &grid, &cv_cfg, ds_seed).map_err(data_err)?;
    runs.extend(cv.runs.iter().cloned());

    let test_refs: Vec<&LabeledSeries> = ds.test().iter().collect();
    let mut fit_final = |fit_seed: u64| -> Result<(TrainedClassifier, f64), CliError> {
        let clf = train_classifier(scheme, ds.train(), &cv.chosen, &plan.train, fit_seed)
            .map_err(data_err)?;
        runs.extend(runs_from(&clf));
        let acc = guarded_accuracy(&clf, &test_refs, plan.lenient_failures);
        Ok((clf, acc))
    };
    let (final_clf, test_accuracy) = fit_final(seed::mix(ds_seed, plan.k as u64))?;
    let mut rerun_accuracies = Vec::with_capacity(plan.reruns);
    for r in 0..plan.reruns {
        let (_, acc) = fit_final(seed::mix(ds_seed, RERUN_STREAM + r as u64))?;
        rerun_accuracies.push(acc);
    }

    println!(
        "{:<24} {:<8} chosen {:<12} test {}",
        ds.name(),
        scheme.token(),
        cv.chosen.to_string(),
        rerun_summary(test_accuracy, &rerun_accuracies)
    );

    Ok(SchemeResult {
        dataset: ds.name().to_string(),
        classes: ds.classes().len(),
        train_series: ds.train().len(),
        test_series: ds.test().len(),
        scheme: scheme.token().to_string(),
        chosen: cv.chosen.to_string(),
        cv: cv
            .cells
            .iter()
            .map(|c| CvCellOut {
                hyper: c.hyper.to_string(),
                mean_accuracy: c.mean_accuracy,
                fold_accuracies: c.fold_accuracies.clone(),
                fold_failures: c.fold_failures.clone(),
            })
            .collect(),
        test_accuracy,
        rerun_accuracies,
        final_iterations: final_clf.bank.iter().map(|e| e.stats.iterations).collect(),
        final_failures: final_clf
            .failures
            .iter()
            .map(|f| FailureOut {
                owner: f.owner.to_string(),
                reason: f.reason.clone(),
            })
            .collect(),
    })
}

/// `tsmb benchmark`: the full pipeline — cross-validate every scheme on
/// every dataset, train at the winning point, evaluate on the test split,
/// and write `report.json`, `accuracy.csv`, and `timing.csv`.
pub fn cmd_benchmark(plan: &BenchmarkPlan) -> Result<(), CliError> {
    init_pool(plan.jobs);

    let mut datasets = Vec::with_capacity(plan.datasets.len());
    let mut results = Vec::new();
    let mut runs: Vec<ModelRun> = Vec::new();

    for (ds_idx, spec) in plan.datasets.iter().enumerate() {
        let format = parse_format(spec.format.as_deref())?;
        let ds = load_dataset(&spec.train, &spec.test, format, spec.name.as_deref())?;
        let ds = if plan.znorm { ds.znormalized() } else { ds };
        if ds.test().is_empty() {
            return Err(CliError::Data(format!(
                "{}: test split is empty",
                spec.test.display()
            )));
        }
        if datasets.iter().any(|n| n == ds.name()) {
            return Err(CliError::Data(format!(
                "duplicate dataset name `{}`: give one of them a distinct `name`",
                ds.name()
            )));
        }
        datasets.push(ds.name().to_string());

        let ds_seed = seed::mix(plan.seed, ds_idx as u64);
        for scheme in &plan.schemes {
            results.push(run_scheme(&ds, ds_seed, *scheme, plan, &mut runs)?);
        }
    }

    let mut report = BenchmarkReport {
        version: REPORT_VERSION,
        master_seed: plan.seed,
        folds: plan.k,
        reruns: plan.reruns,
        znorm: plan.znorm,
        hmm_delta: plan.train.hmm_delta,
        shared_centroids: plan.train.shared_centroids,
        lenient_failures: plan.lenient_failures,
        datasets,
        schemes: plan.schemes.iter().map(|s| s.token().to_string()).collect(),
        results,
        correlations: Vec::new(),
    };
    report.correlations = scheme_correlations(&report);

    let write = |name: &str, contents: &str| -> Result<(), CliError> {
        let path = plan.out.join(name);
        atomic_write(&path, contents)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(())
    };
    write("report.json", &report_json(&report))?;
    write("accuracy.csv", &accuracy_csv(&report))?;
    write("timing.csv", &timing_csv(&timing_report(&runs)))?;
    Ok(())
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("report")
        .to_string()
}

/// `tsmb compare`: Spearman matrix across the schemes of several reports.
pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let mut reports = Vec::with_capacity(args.reports.len());
    for path in &args.reports {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let report = parse_report(&path.display().to_string(), &text)?;
        // File stems label the matrix; disambiguate repeats such as several
        // directories each holding a `report.json`.
        let base = file_stem(path);
        let mut stem = base.clone();
        let mut n = 1;
        while reports.iter().any(|(s, _)| s == &stem) {
            n += 1;
            stem = format!("{base}#{n}");
        }
        reports.push((stem, report));
    }
    let matrix = compare_matrix(&reports)?;
    match &args.out {
        Some(path) => {
            atomic_write(path, &matrix)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
        None => print!("{matrix}"),
    }
    Ok(())
}

/// `tsmb inspect`: summarize (or dump) a saved model bundle.
pub fn cmd_inspect(args: &InspectArgs) -> Result<(), CliError> {
    let clf = load_bundle(&args.bundle)?;
    if args.json {
        print!("{}", bundle_json(&clf));
    } else {
        print!("{}", describe(&clf));
    }
    Ok(())
}
