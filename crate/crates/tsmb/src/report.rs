//! Benchmark report structures and the files derived from them.
//!
//! A benchmark produces three artifacts in the output directory:
//!
//! * `report.json` — the full machine-readable record: configuration echo,
//!   per-dataset/per-scheme cross-validation tables, chosen hyperparameters,
//!   test accuracies, rerun accuracies, recorded fit failures, and pairwise
//!   scheme rank correlations. Deterministic for a fixed master seed.
//! * `accuracy.csv` — a wide, plot-ready accuracy table with one row per
//!   dataset and one accuracy/hyperparameter column pair per scheme,
//!   accuracies in percent. Deterministic for a fixed master seed.
//! * `timing.csv` — mean wall-clock seconds and mean iterations per
//!   (scheme, model size) group, suitable for log-scale plotting. Wall
//!   clock is inherently non-reproducible, so timing lives here and is
//!   kept out of the two deterministic files.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use tsmb_core::eval::{spearman, TimingRow};

use crate::CliError;

/// Report layout version written by this binary.
pub const REPORT_VERSION: u32 = 1;

/// Everything a benchmark run records. Serialized as `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    /// Layout version; see [`REPORT_VERSION`].
    pub version: u32,
    /// Master seed the whole run fanned out from.
    pub master_seed: u64,
    /// Cross-validation fold count.
    pub folds: usize,
    /// Extra test evaluations per scheme (0 = single evaluation).
    pub reruns: usize,
    /// Whether series were z-normalized at load time.
    pub znorm: bool,
    /// Whether HMMs observed (value, delta) pairs instead of raw values.
    pub hmm_delta: bool,
    /// Whether FCM concept centroids were shared across owners.
    pub shared_centroids: bool,
    /// Whether the lenient failure rule was in effect.
    pub lenient_failures: bool,
    /// Dataset names, in run order.
    pub datasets: Vec<String>,
    /// Scheme tokens, in run order.
    pub schemes: Vec<String>,
    /// One entry per (dataset, scheme) pair, datasets outer.
    pub results: Vec<SchemeResult>,
    /// Pairwise scheme rank correlations across datasets; empty when fewer
    /// than two datasets were benchmarked.
    pub correlations: Vec<CorrelationOut>,
}

/// One scheme's outcome on one dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeResult {
    /// Dataset name.
    pub dataset: String,
    /// Number of classes in the dataset.
    pub classes: usize,
    /// Training series count.
    pub train_series: usize,
    /// Test series count.
    pub test_series: usize,
    /// Scheme token, e.g. `hmm-1c`.
    pub scheme: String,
    /// Winning hyperparameter point, e.g. `3 full` or `7`.
    pub chosen: String,
    /// The full cross-validation table, in grid order.
    pub cv: Vec<CvCellOut>,
    /// Test accuracy of the final model under the active failure rule.
    pub test_accuracy: f64,
    /// Test accuracies of the extra reruns, in rerun order.
    pub rerun_accuracies: Vec<f64>,
    /// Iterations spent on each final bank model, in bank order.
    pub final_iterations: Vec<usize>,
    /// Fit failures recorded while training the final model.
    pub final_failures: Vec<FailureOut>,
}

/// One cross-validation grid cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvCellOut {
    /// Hyperparameter point, e.g. `3 full`.
    pub hyper: String,
    /// Mean of the fold accuracies.
    pub mean_accuracy: f64,
    /// Per-fold validation accuracies.
    pub fold_accuracies: Vec<f64>,
    /// Per-fold fit-failure counts.
    pub fold_failures: Vec<usize>,
}

/// A recorded fit failure, flattened for the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureOut {
    /// Whose fit failed, e.g. `class a` or `series 12 (class b)`.
    pub owner: String,
    /// Human-readable cause.
    pub reason: String,
}

/// Rank correlation between two accuracy vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationOut {
    /// First vector's label.
    pub a: String,
    /// Second vector's label.
    pub b: String,
    /// Spearman correlation, or `null` when undefined (constant ranks).
    pub rho: Option<f64>,
}

/// Serializes a report to pretty-printed JSON with a trailing newline.
pub fn report_json(report: &BenchmarkReport) -> String {
    let mut text =
        serde_json::to_string_pretty(report).expect("a benchmark report always serializes");
    text.push('\n');
    text
}

/// Reads a report back, checking the layout version.
pub fn parse_report(path_label: &str, text: &str) -> Result<BenchmarkReport, CliError> {
    let report: BenchmarkReport = serde_json::from_str(text)
        .map_err(|e| CliError::Data(format!("{path_label}: not a valid report: {e}")))?;
    if report.version != REPORT_VERSION {
        return Err(CliError::Data(format!(
            "{path_label}: unsupported report version {} (this build reads version {REPORT_VERSION})",
            report.version
        )));
    }
    Ok(report)
}

fn scheme_column(token: &str) -> String {
    token.replace('-', "_")
}

/// Renders the wide accuracy table. One row per dataset; per scheme an
/// accuracy column (percent, two decimals) and the chosen hyperparameters.
/// Cells stay empty for (dataset, scheme) pairs that were not run.
pub fn accuracy_csv(report: &BenchmarkReport) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["dataset".to_string(), "classes".to_string()];
    for token in &report.schemes {
        header.push(format!("{}_accuracy", scheme_column(token)));
        header.push(format!("{}_hyper", scheme_column(token)));
    }
    writer.write_record(&header).expect("in-memory write");
    for dataset in &report.datasets {
        let rows: Vec<&SchemeResult> = report
            .results
            .iter()
            .filter(|r| &r.dataset == dataset)
            .collect();
        let classes = rows
            .first()
            .map(|r| r.classes.to_string())
            .unwrap_or_default();
        let mut record = vec![dataset.clone(), classes];
        for token in &report.schemes {
            match rows.iter().find(|r| &r.scheme == token) {
                Some(r) => {
                    record.push(format!("{:.2}", r.test_accuracy * 100.0));
                    record.push(r.chosen.clone());
                }
                None => {
                    record.push(String::new());
                    record.push(String::new());
                }
            }
        }
        writer.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Renders the timing table: one row per (scheme, model size) group.
pub fn timing_csv(rows: &[TimingRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["scheme", "size", "models", "mean_wall_secs", "mean_iterations"])
        .expect("in-memory write");
    for row in rows {
        writer
            .write_record([
                row.scheme.token().to_string(),
                row.size.to_string(),
                row.models.to_string(),
                format!("{:.6}", row.mean_wall_secs),
                format!("{:.2}", row.mean_iterations),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

fn lookup_accuracy(
    stem: &str,
    report: &BenchmarkReport,
    dataset: &str,
    scheme: &str,
) -> Result<f64, CliError> {
    report
        .results
        .iter()
        .find(|r| r.dataset == dataset && r.scheme == scheme)
        .map(|r| r.test_accuracy)
        .ok_or_else(|| {
            CliError::Data(format!(
                "{stem}: no result for dataset {dataset}, scheme {scheme}"
            ))
        })
}

/// Pairwise rank correlations among the schemes of a single run, computed
/// over the per-dataset accuracy vectors. Labels are scheme tokens.
/// Undefined correlations (constant ranks) are reported as `rho: null`.
pub fn scheme_correlations(report: &BenchmarkReport) -> Vec<CorrelationOut> {
    if report.datasets.len() < 2 {
        return Vec::new();
    }
    let vectors: Vec<(String, Vec<f64>)> = report
        .schemes
        .iter()
        .map(|scheme| {
            let values = report
                .datasets
                .iter()
                .filter_map(|dataset| {
                    report
                        .results
                        .iter()
                        .find(|r| &r.dataset == dataset && &r.scheme == scheme)
                        .map(|r| r.test_accuracy)
                })
                .collect();
            (scheme.clone(), values)
        })
        .collect();
    let mut out = Vec::new();
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            out.push(CorrelationOut {
                a: vectors[i].0.clone(),
                b: vectors[j].0.clone(),
                rho: spearman(&vectors[i].1, &vectors[j].1).ok(),
            });
        }
    }
    out
}

/// Builds the cross-report Spearman matrix as CSV.
///
/// Each report contributes one accuracy vector per scheme it contains,
/// labeled `<file stem>:<scheme>`, with entries ordered by sorted dataset
/// name so vectors from different reports align. All reports must cover the
/// same dataset set; a mismatch errors, listing the difference. Cells where
/// the correlation is undefined (a constant vector) are left empty.
pub fn compare_matrix(reports: &[(String, BenchmarkReport)]) -> Result<String, CliError> {
    let (first_stem, first) = reports
        .first()
        .ok_or_else(|| CliError::Usage("no report files given".to_string()))?;
    let names: BTreeSet<&str> = first.datasets.iter().map(String::as_str).collect();
    for (stem, report) in &reports[1..] {
        let theirs: BTreeSet<&str> = report.datasets.iter().map(String::as_str).collect();
        if theirs != names {
            let only_first: Vec<&str> = names.difference(&theirs).copied().collect();
            let only_theirs: Vec<&str> = theirs.difference(&names).copied().collect();
            let mut parts = Vec::new();
            if !only_first.is_empty() {
                parts.push(format!("only in {first_stem}: {}", only_first.join(", ")));
            }
            if !only_theirs.is_empty() {
                parts.push(format!("only in {stem}: {}", only_theirs.join(", ")));
            }
            return Err(CliError::Data(format!(
                "dataset lists differ between {first_stem} and {stem} ({})",
                parts.join("; ")
            )));
        }
    }
    if names.len() < 2 {
        return Err(CliError::Data(
            "rank correlation needs at least two shared datasets".to_string(),
        ));
    }

    let mut vectors: Vec<(String, Vec<f64>)> = Vec::new();
    for (stem, report) in reports {
        for scheme in &report.schemes {
            let mut values = Vec::with_capacity(names.len());
            for dataset in &names {
                values.push(lookup_accuracy(stem, report, dataset, scheme)?);
            }
            vectors.push((format!("{stem}:{scheme}"), values));
        }
    }
    if vectors.len() < 2 {
        return Err(CliError::Usage(
            "need at least two accuracy vectors to compare; pass more reports or a report with several schemes".to_string(),
        ));
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method".to_string()];
    header.extend(vectors.iter().map(|(label, _)| label.clone()));
    writer.write_record(&header).expect("in-memory write");
    for (label, values) in &vectors {
        let mut record = vec![label.clone()];
        for (_, other) in &vectors {
            match spearman(values, other) {
                Ok(rho) => record.push(format!("{rho:.6}")),
                Err(_) => record.push(String::new()),
            }
        }
        writer.write_record(&record).expect("in-memory write");
    }
    Ok(String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8"))
}

/// `mean ± half-range` rendering for rerun summaries.
pub fn rerun_summary(primary: f64, reruns: &[f64]) -> String {
    if reruns.is_empty() {
        return format!("{:.2}%", primary * 100.0);
    }
    let mut all = vec![primary];
    all.extend_from_slice(reruns);
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let min = all.iter().copied().fold(f64::INFINITY, f64::min);
    let max = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    format!(
        "{:.2}% ± {:.2} (min {:.2}, max {:.2}, n={})",
        mean * 100.0,
        (max - min) * 50.0,
        min * 100.0,
        max * 100.0,
        all.len()
    )
}
