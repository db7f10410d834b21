//! Hyperparameter selection, accuracy, rank correlation and timing summaries.
//!
//! Selection is stratified k-fold cross-validation over a hyperparameter
//! grid: every grid point is trained and scored on every fold, the point
//! with the best mean validation accuracy wins, and ties go to the smaller
//! model (fewer states or concepts, then the leaner covariance structure).
//!
//! Every stage derives its seed from the master seed and its own index
//! ([`crate::seed::mix`]), so a benchmark is reproducible end to end.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::classify::{
    train_classifier, Granularity, Hyper, SchemeId, TrainConfig, TrainedClassifier,
};
use crate::dataset::{stratified_kfold, LabeledSeries};
use crate::error::{Error, Result};
use crate::hmm::CovarianceType;
use crate::math;
use crate::seed;

/// Cross-validation settings.
#[derive(Debug, Clone)]
pub struct CvConfig {
    /// Number of stratified folds.
    pub k: usize,
    /// When false (the default), any fit failure zeroes the classifier's
    /// accuracy for that fold — a hyperparameter that cannot fit every owner
    /// is not trusted. When true, failed owners are simply absent and the
    /// remaining bank predicts; only an unusable bank scores zero.
    pub lenient_failures: bool,
    /// Settings forwarded to every training run.
    pub train: TrainConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { k: 3, lenient_failures: false, train: TrainConfig::default() }
    }
}

/// Validation results of one hyperparameter point.
#[derive(Debug, Clone)]
pub struct CvCell {
    /// The grid point.
    pub hyper: Hyper,
    /// Accuracy per fold (after the failure rule).
    pub fold_accuracies: Vec<f64>,
    /// Number of fit failures per fold.
    pub fold_failures: Vec<usize>,
    /// Mean of `fold_accuracies`.
    pub mean_accuracy: f64,
}

/// One fitted model's cost, for timing reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRun {
    /// The scheme that trained the model.
    pub scheme: SchemeId,
    /// Model size (states or concepts).
    pub size: usize,
    /// Wall-clock seconds for this single model.
    pub wall_secs: f64,
    /// EM iterations or DE generations used.
    pub iterations: usize,
}

/// Result of [`cross_validate`].
#[derive(Debug, Clone)]
pub struct CvOutcome {
    /// The winning grid point.
    pub chosen: Hyper,
    /// Per-point validation results, in grid order.
    pub cells: Vec<CvCell>,
    /// One entry per model fitted across all folds and grid points.
    pub runs: Vec<ModelRun>,
}

/// The default HMM grid: states `lo..=hi` crossed with the given covariance
/// structures, ordered by size then structure.
pub fn hmm_grid(lo: usize, hi: usize, cov_types: &[CovarianceType]) -> Vec<Hyper> {
    let mut grid = Vec::new();
    for n_states in lo..=hi {
        for &cov_type in cov_types {
            grid.push(Hyper::Hmm { n_states, cov_type });
        }
    }
    grid
}

/// The default FCM grid: concept counts `lo..=hi`.
pub fn fcm_grid(lo: usize, hi: usize) -> Vec<Hyper> {
    (lo..=hi).map(|concepts| Hyper::Fcm { concepts }).collect()
}

/// Fraction of series whose predicted label matches their own. A prediction
/// error (an empty bank) counts as a miss. Errors only on an empty slice.
pub fn accuracy(clf: &TrainedClassifier, series: &[LabeledSeries]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptyInput("evaluation series"));
    }
    let refs: Vec<&LabeledSeries> = series.iter().collect();
    Ok(accuracy_refs(clf, &refs))
}

fn accuracy_refs(clf: &TrainedClassifier, series: &[&LabeledSeries]) -> f64 {
    let hits = series
        .iter()
        .filter(|s| clf.predict(s).as_deref() == Ok(s.label()))
        .count();
    hits as f64 / series.len() as f64
}

/// Accuracy under the failure rule: see [`CvConfig::lenient_failures`].
/// A bank that cannot predict at all — empty, or per-class with a class
/// missing — scores zero in either mode.
pub fn guarded_accuracy(
    clf: &TrainedClassifier,
    series: &[&LabeledSeries],
    lenient: bool,
) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    if !lenient && !clf.failures.is_empty() {
        return 0.0;
    }
    if clf.bank.is_empty() {
        return 0.0;
    }
    if clf.scheme.granularity == Granularity::PerClass && !clf.missing_classes().is_empty() {
        return 0.0;
    }
    accuracy_refs(clf, series)
}

/// One model's [`ModelRun`] rows from a trained classifier's bank.
pub fn runs_from(clf: &TrainedClassifier) -> Vec<ModelRun> {
    clf.bank
        .iter()
        .map(|e| ModelRun {
            scheme: clf.scheme,
            size: clf.hyper.size(),
            wall_secs: e.stats.wall_secs,
            iterations: e.stats.iterations,
        })
        .collect()
}

/// Selects a hyperparameter point by stratified k-fold cross-validation.
///
/// Fold splitting uses seed `mix(master_seed, k+1)`; the classifier for fold
/// `f` trains from `mix(master_seed, f)` regardless of the grid point, so
/// two grid points see identical folds and seeds. The winner has the best
/// mean accuracy; ties prefer the smaller model, then the leaner covariance.
///
/// Errors propagate from fold construction (too few members per class) or an
/// empty grid; fit failures do not error, they zero fold accuracies per the
/// failure rule.
pub fn cross_validate(
    scheme: SchemeId,
    train: &[LabeledSeries],
    grid: &[Hyper],
    cfg: &CvConfig,
    master_seed: u64,
) -> Result<CvOutcome> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("hyperparameter grid"));
    }
    for hyper in grid {
        if hyper.family() != scheme.family {
            return Err(Error::InvalidParameter("hyperparameter family does not match the scheme"));
        }
    }
    let folds = stratified_kfold(train, cfg.k, seed::mix(master_seed, cfg.k as u64 + 1))?;
    // Materialize each fold's training split once; all grid points share it.
    let fold_train: Vec<Vec<LabeledSeries>> = folds
        .iter()
        .map(|f| f.train.iter().map(|&i| train[i].clone()).collect())
        .collect();
    let fold_val: Vec<Vec<&LabeledSeries>> = folds
        .iter()
        .map(|f| f.validation.iter().map(|&i| &train[i]).collect())
        .collect();

    let jobs: Vec<(usize, usize)> =
        (0..grid.len()).flat_map(|g| (0..cfg.k).map(move |f| (g, f))).collect();
    let run_job = |&(g, f): &(usize, usize)| -> Result<(f64, usize, Vec<ModelRun>)> {
        let clf = train_classifier(
            scheme,
            &fold_train[f],
            &grid[g],
            &cfg.train,
            seed::mix(master_seed, f as u64),
        )?;
        let acc = guarded_accuracy(&clf, &fold_val[f], cfg.lenient_failures);
        Ok((acc, clf.failures.len(), runs_from(&clf)))
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(f64, usize, Vec<ModelRun>)>> =
        jobs.par_iter().map(run_job).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(f64, usize, Vec<ModelRun>)>> = jobs.iter().map(run_job).collect();

    let mut cells: Vec<CvCell> = grid
        .iter()
        .map(|&hyper| CvCell {
            hyper,
            fold_accuracies: Vec::with_capacity(cfg.k),
            fold_failures: Vec::with_capacity(cfg.k),
            mean_accuracy: 0.0,
        })
        .collect();
    let mut runs = Vec::new();
    for (&(g, _f), result) in jobs.iter().zip(results) {
        let (acc, failures, mut job_runs) = result?;
        cells[g].fold_accuracies.push(acc);
        cells[g].fold_failures.push(failures);
        runs.append(&mut job_runs);
    }
    for cell in &mut cells {
        cell.mean_accuracy = math::mean(&cell.fold_accuracies);
    }

    let mut best = 0;
    for (i, cell) in cells.iter().enumerate().skip(1) {
        let incumbent = &cells[best];
        let wins = cell.mean_accuracy > incumbent.mean_accuracy
            || (cell.mean_accuracy == incumbent.mean_accuracy
                && (cell.hyper.size(), cell.hyper.cov_rank())
                    < (incumbent.hyper.size(), incumbent.hyper.cov_rank()));
        if wins {
            best = i;
        }
    }
    Ok(CvOutcome { chosen: cells[best].hyper, cells, runs })
}

/// Spearman rank correlation with average ranks for ties.
///
/// Errors on mismatched lengths, fewer than two observations, non-finite
/// values, or a constant ranking (the correlation is undefined then).
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter("rank correlation needs at least two observations"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("rank correlation requires finite values"));
    }
    let ra = math::average_ranks(a);
    let rb = math::average_ranks(b);
    let var_a = math::population_variance(&ra);
    let var_b = math::population_variance(&rb);
    if var_a < 1e-24 || var_b < 1e-24 {
        return Err(Error::ConstantRanks);
    }
    let mean_a = math::mean(&ra);
    let mean_b = math::mean(&rb);
    let cov = ra
        .iter()
        .zip(&rb)
        .map(|(&x, &y)| (x - mean_a) * (y - mean_b))
        .sum::<f64>()
        / ra.len() as f64;
    Ok(cov / (var_a * var_b).sqrt())
}

/// One line of the timing summary: all models of one scheme and size.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    /// The scheme.
    pub scheme: SchemeId,
    /// Model size (states or concepts).
    pub size: usize,
    /// Number of models aggregated.
    pub models: usize,
    /// Mean wall-clock seconds per model.
    pub mean_wall_secs: f64,
    /// Mean iterations per model.
    pub mean_iterations: f64,
}

/// Groups model runs by `(scheme, size)` and averages cost, sorted by scheme
/// (canonical order) then size.
pub fn timing_report(runs: &[ModelRun]) -> Vec<TimingRow> {
    let mut grouped: alloc::collections::BTreeMap<(SchemeId, usize), (usize, f64, f64)> =
        alloc::collections::BTreeMap::new();
    for run in runs {
        let slot = grouped.entry((run.scheme, run.size)).or_insert((0, 0.0, 0.0));
        slot.0 += 1;
        slot.1 += run.wall_secs;
        slot.2 += run.iterations as f64;
    }
    grouped
        .into_iter()
        .map(|((scheme, size), (models, wall, iters))| TimingRow {
            scheme,
            size,
            models,
            mean_wall_secs: wall / models as f64,
            mean_iterations: iters / models as f64,
        })
        .collect()
}
