//! Whole-series classifiers built from banks of sequence models.
//!
//! Both model families turn into a classifier the same way: fit one model per
//! *owner* — either per class ("1C") or per training series ("NN") — then
//! label a new series by the owner whose model scores it best. HMMs score by
//! forward log-likelihood (higher is better), fuzzy cognitive maps by
//! one-step prediction error (lower is better). The NN granularity is a
//! nearest-neighbour rule with the model score as the similarity.
//!
//! Owners whose fit degenerates are recorded as failures rather than aborting
//! the bank; evaluation decides what a failure costs.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledSeries;
use crate::de::DeParams;
use crate::error::{Error, Result};
use crate::fcm::{train_fcm, FcmModel};
use crate::fuzzy::{embed_deltas, fcm_cluster, fuzzify_series, ActivationSequence, CentroidSet};
use crate::hmm::{fit_hmm_restarts, CovarianceType, GaussianHmm};
use crate::seed;

/// Model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Gaussian hidden Markov models.
    Hmm,
    /// Fuzzy cognitive maps.
    Fcm,
}

/// How many models the bank holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Granularity {
    /// One model per class.
    #[serde(rename = "1c")]
    PerClass,
    /// One model per training series (nearest neighbour by score).
    #[serde(rename = "nn")]
    PerSeries,
}

/// A classification scheme: family plus granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SchemeId {
    /// Model family.
    pub family: Family,
    /// Bank granularity.
    pub granularity: Granularity,
}

impl SchemeId {
    /// All four schemes in canonical reporting order.
    pub const ALL: [SchemeId; 4] = [
        SchemeId { family: Family::Hmm, granularity: Granularity::PerClass },
        SchemeId { family: Family::Hmm, granularity: Granularity::PerSeries },
        SchemeId { family: Family::Fcm, granularity: Granularity::PerClass },
        SchemeId { family: Family::Fcm, granularity: Granularity::PerSeries },
    ];

    /// Machine-friendly token, e.g. `hmm-1c`; the inverse of [`FromStr`].
    pub fn token(&self) -> &'static str {
        match (self.family, self.granularity) {
            (Family::Hmm, Granularity::PerClass) => "hmm-1c",
            (Family::Hmm, Granularity::PerSeries) => "hmm-nn",
            (Family::Fcm, Granularity::PerClass) => "fcm-1c",
            (Family::Fcm, Granularity::PerSeries) => "fcm-nn",
        }
    }
}

impl core::fmt::Display for SchemeId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let family = match self.family {
            Family::Hmm => "HMM",
            Family::Fcm => "FCM",
        };
        let gran = match self.granularity {
            Granularity::PerClass => "1C",
            Granularity::PerSeries => "NN",
        };
        write!(f, "{family} {gran}")
    }
}

impl core::str::FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        SchemeId::ALL
            .iter()
            .find(|id| id.token() == lower)
            .copied()
            .ok_or(Error::InvalidParameter("scheme must be one of hmm-1c, hmm-nn, fcm-1c, fcm-nn"))
    }
}

/// A hyperparameter point for either family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hyper {
    /// HMM: number of states and covariance structure.
    Hmm {
        /// Number of hidden states.
        n_states: usize,
        /// Covariance structure.
        cov_type: CovarianceType,
    },
    /// FCM: number of concepts.
    Fcm {
        /// Number of fuzzy concepts `P`.
        concepts: usize,
    },
}

impl Hyper {
    /// The family this point belongs to.
    pub fn family(&self) -> Family {
        match self {
            Hyper::Hmm { .. } => Family::Hmm,
            Hyper::Fcm { .. } => Family::Fcm,
        }
    }

    /// Model size: states or concepts. Ties in validation accuracy are
    /// broken toward smaller sizes.
    pub fn size(&self) -> usize {
        match self {
            Hyper::Hmm { n_states, .. } => *n_states,
            Hyper::Fcm { concepts } => *concepts,
        }
    }

    /// Secondary tie-break: fewer covariance parameters first
    /// (spherical < diagonal < full); zero for FCM.
    pub fn cov_rank(&self) -> usize {
        match self {
            Hyper::Hmm { cov_type, .. } => *cov_type as usize,
            Hyper::Fcm { .. } => 0,
        }
    }
}

impl core::fmt::Display for Hyper {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Hyper::Hmm { n_states, cov_type } => write!(f, "{n_states} {cov_type}"),
            Hyper::Fcm { concepts } => write!(f, "{concepts}"),
        }
    }
}

/// Who a bank model belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Owner {
    /// The model for a whole class.
    Class(String),
    /// The model for a single training series.
    Series {
        /// Position of the series in the training split.
        index: usize,
        /// Its class label.
        label: String,
    },
}

impl Owner {
    /// The class label a match with this owner predicts.
    pub fn label(&self) -> &str {
        match self {
            Owner::Class(label) => label,
            Owner::Series { label, .. } => label,
        }
    }
}

impl core::fmt::Display for Owner {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Owner::Class(label) => write!(f, "class {label}"),
            Owner::Series { index, label } => write!(f, "series {index} (class {label})"),
        }
    }
}

/// A fitted model of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "model", rename_all = "lowercase")]
pub enum ModelKind {
    /// A Gaussian HMM.
    Hmm(GaussianHmm),
    /// A fuzzy cognitive map.
    Fcm(FcmModel),
}

/// Bookkeeping recorded for every successful fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    /// Wall-clock seconds spent fitting this model (clustering included for
    /// FCM). Zero when the `std` feature is off; excluded from serialized
    /// bundles so artifacts stay byte-reproducible.
    #[serde(skip)]
    pub wall_secs: f64,
    /// Iterations used: EM iterations of the winning restart, or
    /// differential evolution generations.
    pub iterations: usize,
}

/// One model in the bank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankEntry {
    /// Whose model this is.
    pub owner: Owner,
    /// The model itself.
    pub model: ModelKind,
    /// Fit bookkeeping.
    pub stats: TrainStats,
}

/// A fit that degenerated; the owner has no model in the bank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFailure {
    /// The owner whose fit failed.
    pub owner: Owner,
    /// Human-readable cause.
    pub reason: String,
}

/// A trained bank of models plus the failures encountered while building it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    /// The scheme this classifier implements.
    pub scheme: SchemeId,
    /// The hyperparameter point it was trained at.
    pub hyper: Hyper,
    /// Sorted distinct labels of the training split.
    pub classes: Vec<String>,
    /// Successfully fitted models, in owner order.
    pub bank: Vec<BankEntry>,
    /// Owners whose fit degenerated.
    pub failures: Vec<FitFailure>,
}

impl TrainedClassifier {
    /// Classes that have no model in the bank. A non-empty result makes a
    /// per-class classifier unable to predict those labels at all.
    pub fn missing_classes(&self) -> Vec<String> {
        self.classes
            .iter()
            .filter(|c| !self.bank.iter().any(|e| e.owner.label() == c.as_str()))
            .cloned()
            .collect()
    }

    /// Predicts the label of a series.
    ///
    /// Every bank model scores the series; a model whose scoring errors (for
    /// example a series too short to fuzzify) counts as worst-possible. Ties
    /// go to the lexicographically smallest label, then to the earliest bank
    /// entry. Errors only when the bank is empty.
    pub fn predict(&self, series: &LabeledSeries) -> Result<String> {
        if self.bank.is_empty() {
            return Err(Error::NoUsableModel);
        }
        let worst = match self.scheme.family {
            Family::Hmm => f64::NEG_INFINITY,
            Family::Fcm => f64::INFINITY,
        };
        let scored: Vec<(f64, &str)> = self
            .bank
            .iter()
            .map(|e| {
                let s = score_series(&e.model, series).unwrap_or(worst);
                (if s.is_nan() { worst } else { s }, e.owner.label())
            })
            .collect();
        let winner = argbest(self.scheme.family, &scored).expect("bank is non-empty");
        Ok(scored[winner].1.to_string())
    }
}

/// Index of the best `(score, label)` pair: best score for the family, ties
/// broken by smaller label, then smaller index. `None` only for no items.
fn argbest(family: Family, items: &[(f64, &str)]) -> Option<usize> {
    let beats = |a: f64, b: f64| match family {
        Family::Hmm => a > b,
        Family::Fcm => a < b,
    };
    let mut best: Option<usize> = None;
    for (i, &(score, label)) in items.iter().enumerate() {
        let Some(b) = best else {
            best = Some(i);
            continue;
        };
        if beats(score, items[b].0) || (score == items[b].0 && label < items[b].1) {
            best = Some(i);
        }
    }
    best
}

/// Scores a series under a single model: forward log-likelihood for HMMs
/// (higher is better), one-step MSE for FCMs (lower is better).
pub fn score_series(model: &ModelKind, series: &LabeledSeries) -> Result<f64> {
    match model {
        ModelKind::Hmm(m) => m.forward_log_likelihood(&hmm_observations(series, m.dim() == 2)?),
        ModelKind::Fcm(m) => {
            let seq = fuzzify_series(series, m.centroids());
            m.prediction_error(core::slice::from_ref(&seq))
        }
    }
}

/// Builds HMM observation rows from a series: raw scalar rows, or
/// `(value, delta)` pairs when `delta` is set.
fn hmm_observations(series: &LabeledSeries, delta: bool) -> Result<Vec<Vec<f64>>> {
    if delta {
        Ok(embed_deltas(series.values())?
            .into_iter()
            .map(|p| alloc::vec![p.z, p.dz])
            .collect())
    } else {
        Ok(series.values().iter().map(|&v| alloc::vec![v]).collect())
    }
}

/// Everything about training that is not the hyperparameter under selection.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Fuzzifier exponent for c-means.
    pub fuzzy_m: f64,
    /// Sigmoid steepness for FCM reasoning.
    pub tau: f64,
    /// Cluster once over all training series instead of per model.
    pub shared_centroids: bool,
    /// Feed HMMs `(value, delta)` rows instead of raw values.
    pub hmm_delta: bool,
    /// Differential evolution settings for FCM weight learning.
    pub de: DeParams,
    /// EM iteration cap per restart.
    pub hmm_max_iter: usize,
    /// EM stops once the log-likelihood improves by less than this.
    pub hmm_tol: f64,
    /// Random restarts per HMM fit.
    pub hmm_restarts: usize,
    /// C-means stops once no centroid moves farther than this.
    pub cluster_tol: f64,
    /// C-means iteration cap.
    pub cluster_max_iter: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            fuzzy_m: 2.0,
            tau: 5.0,
            shared_centroids: false,
            hmm_delta: false,
            de: DeParams::default(),
            hmm_max_iter: 50,
            hmm_tol: 1e-3,
            hmm_restarts: 10,
            cluster_tol: 1e-5,
            cluster_max_iter: 300,
        }
    }
}

/// Result of one owner's fit: a model with its iteration count, or a reason.
enum OwnerFit {
    Fitted(ModelKind, usize),
    Failed(String),
}

/// Trains a full bank.
///
/// Owner `i` trains from seed `mix(seed, i)`, so the bank is reproducible
/// and independent of thread count (owners are fitted in parallel under the
/// `parallel` feature). Per-class banks receive each class's series as
/// separate sequences; per-series banks fit one model per training series.
///
/// Degenerate fits become [`FitFailure`]s. Errors are reserved for contract
/// violations: an empty training split or a hyperparameter of the wrong
/// family.
pub fn train_classifier(
    scheme: SchemeId,
    train: &[LabeledSeries],
    hyper: &Hyper,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainedClassifier> {
    if train.is_empty() {
        return Err(Error::EmptyInput("training series"));
    }
    if hyper.family() != scheme.family {
        return Err(Error::InvalidParameter("hyperparameter family does not match the scheme"));
    }
    if let Hyper::Fcm { concepts } = hyper {
        if *concepts < 2 {
            return Err(Error::InvalidParameter("an FCM needs at least two concepts"));
        }
    }
    if let Hyper::Hmm { n_states: 0, .. } = hyper {
        return Err(Error::InvalidParameter("an HMM needs at least one state"));
    }

    let mut classes: Vec<String> = train.iter().map(|s| s.label().to_string()).collect();
    classes.sort();
    classes.dedup();

    let owners: Vec<(Owner, Vec<&LabeledSeries>)> = match scheme.granularity {
        Granularity::PerClass => classes
            .iter()
            .map(|c| {
                let members = train.iter().filter(|s| s.label() == c.as_str()).collect();
                (Owner::Class(c.clone()), members)
            })
            .collect(),
        Granularity::PerSeries => train
            .iter()
            .enumerate()
            .map(|(index, s)| {
                (Owner::Series { index, label: s.label().to_string() }, alloc::vec![s])
            })
            .collect(),
    };

    // Optional shared activation space: cluster once over the whole split.
    // If even that is impossible, every owner fails for the same reason.
    let mut shared: Option<CentroidSet> = None;
    if scheme.family == Family::Fcm && cfg.shared_centroids {
        let concepts = hyper.size();
        let mut points = Vec::new();
        for s in train {
            points.extend(embed_deltas(s.values())?);
        }
        match fcm_cluster(
            &points,
            concepts,
            cfg.fuzzy_m,
            cfg.cluster_tol,
            cfg.cluster_max_iter,
            seed::mix(seed, u64::MAX),
        ) {
            Ok(out) => shared = Some(out.centroids),
            Err(e) => {
                let reason = alloc::format!("shared clustering failed: {e}");
                let failures = owners
                    .into_iter()
                    .map(|(owner, _)| FitFailure { owner, reason: reason.clone() })
                    .collect();
                return Ok(TrainedClassifier {
                    scheme,
                    hyper: *hyper,
                    classes,
                    bank: Vec::new(),
                    failures,
                });
            }
        }
    }

    let fit_one = |idx: usize| -> (OwnerFit, f64) {
        let entry_seed = seed::mix(seed, idx as u64);
        let members = &owners[idx].1;
        timed(|| match *hyper {
            Hyper::Hmm { n_states, cov_type } => {
                fit_owner_hmm(members, n_states, cov_type, cfg, entry_seed)
            }
            Hyper::Fcm { concepts } => {
                fit_owner_fcm(members, concepts, shared.as_ref(), cfg, entry_seed)
            }
        })
    };
    #[cfg(feature = "parallel")]
    let fits: Vec<(OwnerFit, f64)> = (0..owners.len()).into_par_iter().map(fit_one).collect();
    #[cfg(not(feature = "parallel"))]
    let fits: Vec<(OwnerFit, f64)> = (0..owners.len()).map(fit_one).collect();

    let mut bank = Vec::new();
    let mut failures = Vec::new();
    for ((owner, _), (fit, wall_secs)) in owners.into_iter().zip(fits) {
        match fit {
            OwnerFit::Fitted(model, iterations) => {
                bank.push(BankEntry { owner, model, stats: TrainStats { wall_secs, iterations } });
            }
            OwnerFit::Failed(reason) => failures.push(FitFailure { owner, reason }),
        }
    }
    Ok(TrainedClassifier { scheme, hyper: *hyper, classes, bank, failures })
}

fn fit_owner_hmm(
    members: &[&LabeledSeries],
    n_states: usize,
    cov_type: CovarianceType,
    cfg: &TrainConfig,
    entry_seed: u64,
) -> OwnerFit {
    let mut seqs = Vec::with_capacity(members.len());
    for s in members {
        match hmm_observations(s, cfg.hmm_delta) {
            Ok(obs) => seqs.push(obs),
            Err(e) => return OwnerFit::Failed(e.to_string()),
        }
    }
    let out = fit_hmm_restarts(
        &seqs,
        n_states,
        cov_type,
        cfg.hmm_restarts,
        cfg.hmm_max_iter,
        cfg.hmm_tol,
        entry_seed,
    );
    if out.failed {
        OwnerFit::Failed(out.reason)
    } else {
        OwnerFit::Fitted(ModelKind::Hmm(out.model.expect("fit succeeded")), out.iterations)
    }
}

fn fit_owner_fcm(
    members: &[&LabeledSeries],
    concepts: usize,
    shared: Option<&CentroidSet>,
    cfg: &TrainConfig,
    entry_seed: u64,
) -> OwnerFit {
    let centroids = match shared {
        Some(cs) => cs.clone(),
        None => {
            let mut points = Vec::new();
            for s in members {
                points.extend(embed_deltas(s.values()).expect("series length >= 2"));
            }
            match fcm_cluster(
                &points,
                concepts,
                cfg.fuzzy_m,
                cfg.cluster_tol,
                cfg.cluster_max_iter,
                seed::mix(entry_seed, 1),
            ) {
                Ok(out) => out.centroids,
                Err(e) => return OwnerFit::Failed(e.to_string()),
            }
        }
    };
    // A series of length 2 yields a single activation row — no transition to
    // predict — and is skipped; the fit fails only if nothing remains.
    let seqs: Vec<ActivationSequence> = members
        .iter()
        .map(|s| fuzzify_series(s, &centroids))
        .filter(|seq| seq.rows.len() >= 2)
        .collect();
    if seqs.is_empty() {
        return OwnerFit::Failed(
            "no activation sequence with two or more rows (series shorter than 3)".to_string(),
        );
    }
    match train_fcm(&seqs, &centroids, cfg.tau, &cfg.de, seed::mix(entry_seed, 2)) {
        Ok(fit) => OwnerFit::Fitted(ModelKind::Fcm(fit.model), fit.iterations),
        Err(e) => OwnerFit::Failed(e.to_string()),
    }
}

/// Runs `f`, returning its result and the elapsed wall-clock seconds
/// (zero when the `std` feature is disabled).
fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    #[cfg(feature = "std")]
    {
        let start = std::time::Instant::now();
        let out = f();
        (out, start.elapsed().as_secs_f64())
    }
    #[cfg(not(feature = "std"))]
    {
        (f(), 0.0)
    }
}
