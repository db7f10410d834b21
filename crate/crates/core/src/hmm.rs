//! Gaussian hidden Markov models: log-space scoring and Baum-Welch training.
//!
//! Emissions are multivariate Gaussians with one of three covariance
//! structures (spherical, diagonal, full). Scoring runs the forward algorithm
//! entirely in log space, so long or unlikely sequences cannot underflow.
//! Training is multi-sequence Baum-Welch from a seeded random start, with
//! random restarts keeping the highest-likelihood fit.
//!
//! A fit that degenerates — covariance collapse under the full structure,
//! non-finite likelihood, too little data — is *not* an error: it is reported
//! as a failed [`FitOutcome`] so a classifier can record the failure and keep
//! scoring with the models that did fit.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::seed;

/// `ln(2*pi)`; normalizing constant of the Gaussian density.
const LOG_2PI: f64 = 1.837_877_066_409_345_3;

/// Variances (and full-covariance diagonal entries) are kept at or above
/// this floor. Estimates that would fall below it under the full structure
/// count as covariance collapse.
pub const COV_FLOOR: f64 = 1e-6;

/// Per-state weights below this leave the state's parameters untouched in an
/// M-step (the state attracted essentially no responsibility).
const STARVED: f64 = 1e-12;

/// Covariance structure of the Gaussian emissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceType {
    /// One shared variance per state: `sigma^2 * I`.
    Spherical,
    /// One variance per dimension per state.
    Diagonal,
    /// A full positive-definite matrix per state.
    Full,
}

impl CovarianceType {
    /// Number of stored covariance parameters per state for dimension `d`.
    pub fn param_len(self, d: usize) -> usize {
        match self {
            CovarianceType::Spherical => 1,
            CovarianceType::Diagonal => d,
            CovarianceType::Full => d * d,
        }
    }

    /// All three structures, in increasing order of expressiveness.
    pub const ALL: [CovarianceType; 3] =
        [CovarianceType::Spherical, CovarianceType::Diagonal, CovarianceType::Full];
}

impl core::fmt::Display for CovarianceType {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            CovarianceType::Spherical => "spherical",
            CovarianceType::Diagonal => "diagonal",
            CovarianceType::Full => "full",
        })
    }
}

impl core::str::FromStr for CovarianceType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spherical" => Ok(CovarianceType::Spherical),
            "diagonal" => Ok(CovarianceType::Diagonal),
            "full" => Ok(CovarianceType::Full),
            _ => Err(Error::InvalidParameter("covariance type must be spherical, diagonal or full")),
        }
    }
}

/// A fitted Gaussian HMM.
///
/// Construction validates every invariant scoring relies on: stochastic
/// start and transition distributions (within `1e-9`), consistent shapes,
/// floored variances and positive-definite full covariances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianHmm {
    n_states: usize,
    dim: usize,
    cov_type: CovarianceType,
    pi: Vec<f64>,
    a: Vec<f64>,
    means: Vec<Vec<f64>>,
    covariances: Vec<Vec<f64>>,
}

impl GaussianHmm {
    /// Builds a model from raw parameters.
    ///
    /// `a` is the row-major `n_states x n_states` transition matrix;
    /// `covariances[i]` holds state `i`'s parameters in the layout of
    /// `cov_type` (lengths 1, `dim` and `dim*dim` respectively).
    pub fn new(
        cov_type: CovarianceType,
        pi: Vec<f64>,
        a: Vec<f64>,
        means: Vec<Vec<f64>>,
        covariances: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = pi.len();
        if n == 0 {
            return Err(Error::EmptyInput("start distribution"));
        }
        let dim = means.first().map_or(0, Vec::len);
        if dim == 0 || means.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: means.len() });
        }
        if a.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
        }
        if covariances.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: covariances.len() });
        }
        let finite = pi.iter().chain(a.iter()).all(|v| v.is_finite())
            && means.iter().chain(covariances.iter()).flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("model parameters must be finite"));
        }
        if pi.iter().any(|&p| p < 0.0) || (pi.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter("start distribution must be stochastic"));
        }
        for row in a.chunks(n) {
            if row.iter().any(|&p| p < 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter("transition rows must be stochastic"));
            }
        }
        for (mean, cov) in means.iter().zip(&covariances) {
            if mean.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: mean.len() });
            }
            if cov.len() != cov_type.param_len(dim) {
                return Err(Error::DimensionMismatch {
                    expected: cov_type.param_len(dim),
                    got: cov.len(),
                });
            }
            match cov_type {
                CovarianceType::Spherical | CovarianceType::Diagonal => {
                    if cov.iter().any(|&v| v < COV_FLOOR) {
                        return Err(Error::InvalidParameter("variance below the floor"));
                    }
                }
                CovarianceType::Full => {
                    if (0..dim).any(|k| cov[k * dim + k] < COV_FLOOR) {
                        return Err(Error::InvalidParameter("covariance diagonal below the floor"));
                    }
                    cholesky(cov, dim)?;
                }
            }
        }
        Ok(Self { n_states: n, dim, cov_type, pi, a, means, covariances })
    }

    /// Number of hidden states.
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Observation dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Covariance structure.
    pub fn cov_type(&self) -> CovarianceType {
        self.cov_type
    }

    /// Start distribution.
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Row-major transition matrix.
    pub fn transitions(&self) -> &[f64] {
        &self.a
    }

    /// Per-state emission means.
    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    /// Per-state covariance parameters (layout depends on `cov_type`).
    pub fn covariances(&self) -> &[Vec<f64>] {
        &self.covariances
    }

    /// Log-likelihood of an observation sequence under the model, computed
    /// with the forward algorithm in log space.
    ///
    /// Errors on an empty sequence or rows of the wrong dimension.
    pub fn forward_log_likelihood(&self, obs: &[Vec<f64>]) -> Result<f64> {
        if obs.is_empty() {
            return Err(Error::EmptyInput("observation sequence"));
        }
        for row in obs {
            if row.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: row.len() });
            }
        }
        let prepared = self.prepare_emissions()?;
        let n = self.n_states;
        let ln_pi: Vec<f64> = self.pi.iter().map(|&p| p.ln()).collect();
        let ln_a: Vec<f64> = self.a.iter().map(|&p| p.ln()).collect();

        let mut scratch = alloc::vec![0.0; self.dim];
        let mut alpha: Vec<f64> =
            (0..n).map(|i| ln_pi[i] + prepared[i].logpdf(&obs[0], &mut scratch)).collect();
        let mut next = alloc::vec![0.0; n];
        let mut terms = alloc::vec![0.0; n];
        for row in &obs[1..] {
            for j in 0..n {
                for i in 0..n {
                    terms[i] = alpha[i] + ln_a[i * n + j];
                }
                next[j] = math::logsumexp(&terms) + prepared[j].logpdf(row, &mut scratch);
            }
            alpha.copy_from_slice(&next);
        }
        Ok(math::logsumexp(&alpha))
    }

    fn prepare_emissions(&self) -> Result<Vec<PreparedEmission>> {
        self.means
            .iter()
            .zip(&self.covariances)
            .map(|(mean, cov)| PreparedEmission::prepare(mean, cov, self.cov_type))
            .collect()
    }
}

/// Log-density of a multivariate Gaussian with the given covariance layout.
///
/// `cov` follows the same per-state layout as [`GaussianHmm::covariances`]:
/// `[variance]` for spherical, one variance per dimension for diagonal, and a
/// row-major `d x d` matrix for full. Errors on shape mismatches or a full
/// matrix that is not positive definite.
pub fn log_gaussian_pdf(x: &[f64], mean: &[f64], cov: &[f64], cov_type: CovarianceType) -> Result<f64> {
    if x.len() != mean.len() {
        return Err(Error::DimensionMismatch { expected: mean.len(), got: x.len() });
    }
    if cov.len() != cov_type.param_len(mean.len()) {
        return Err(Error::DimensionMismatch {
            expected: cov_type.param_len(mean.len()),
            got: cov.len(),
        });
    }
    let prepared = PreparedEmission::prepare(mean, cov, cov_type)?;
    let mut scratch = alloc::vec![0.0; mean.len()];
    Ok(prepared.logpdf(x, &mut scratch))
}

/// One state's emission density, factored for repeated evaluation.
struct PreparedEmission {
    mean: Vec<f64>,
    log_norm: f64,
    kind: EmissionKind,
}

enum EmissionKind {
    Spherical { inv_two_var: f64 },
    Diagonal { inv_two_var: Vec<f64> },
    Full { chol: Vec<f64> },
}

impl PreparedEmission {
    fn prepare(mean: &[f64], cov: &[f64], cov_type: CovarianceType) -> Result<Self> {
        let d = mean.len();
        let (log_norm, kind) = match cov_type {
            CovarianceType::Spherical => {
                let var = cov[0];
                if !(var > 0.0) {
                    return Err(Error::NotPositiveDefinite);
                }
                (
                    -0.5 * d as f64 * (LOG_2PI + var.ln()),
                    EmissionKind::Spherical { inv_two_var: 0.5 / var },
                )
            }
            CovarianceType::Diagonal => {
                if cov.iter().any(|&v| !(v > 0.0)) {
                    return Err(Error::NotPositiveDefinite);
                }
                let log_det: f64 = cov.iter().map(|&v| v.ln()).sum();
                (
                    -0.5 * (d as f64 * LOG_2PI + log_det),
                    EmissionKind::Diagonal { inv_two_var: cov.iter().map(|&v| 0.5 / v).collect() },
                )
            }
            CovarianceType::Full => {
                let chol = cholesky(cov, d)?;
                let log_det_half: f64 = (0..d).map(|k| chol[k * d + k].ln()).sum();
                (-0.5 * d as f64 * LOG_2PI - log_det_half, EmissionKind::Full { chol })
            }
        };
        Ok(Self { mean: mean.to_vec(), log_norm, kind })
    }

    /// `scratch` must have length `dim`; it avoids a per-call allocation in
    /// the full-covariance solve.
    fn logpdf(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        match &self.kind {
            EmissionKind::Spherical { inv_two_var } => {
                let q: f64 = x
                    .iter()
                    .zip(&self.mean)
                    .map(|(&xi, &mi)| (xi - mi) * (xi - mi))
                    .sum();
                self.log_norm - q * inv_two_var
            }
            EmissionKind::Diagonal { inv_two_var } => {
                let q: f64 = x
                    .iter()
                    .zip(&self.mean)
                    .zip(inv_two_var)
                    .map(|((&xi, &mi), &w)| (xi - mi) * (xi - mi) * w)
                    .sum();
                self.log_norm - q
            }
            EmissionKind::Full { chol } => {
                let d = self.mean.len();
                for k in 0..d {
                    scratch[k] = x[k] - self.mean[k];
                }
                // Solve L w = (x - mean) by forward substitution; the
                // quadratic form is then |w|^2.
                let mut q = 0.0;
                for i in 0..d {
                    let mut s = scratch[i];
                    for j in 0..i {
                        s -= chol[i * d + j] * scratch[j];
                    }
                    let w = s / chol[i * d + i];
                    scratch[i] = w;
                    q += w * w;
                }
                self.log_norm - 0.5 * q
            }
        }
    }
}

/// Cholesky factorization of a symmetric matrix given row-major.
/// Returns the lower triangle `L` with `L L^T = a`, or
/// [`Error::NotPositiveDefinite`].
fn cholesky(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = alloc::vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[i * d + j];
            for k in 0..j {
                sum -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return Err(Error::NotPositiveDefinite);
                }
                l[i * d + i] = sum.sqrt();
            } else {
                l[i * d + j] = sum / l[j * d + j];
            }
        }
    }
    Ok(l)
}

/// Result of a training run. Failure is a value, not an error: a failed
/// outcome carries no model and a non-empty human-readable `reason`.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    /// The fitted model; present exactly when `failed` is false.
    pub model: Option<GaussianHmm>,
    /// Whether the fit degenerated.
    pub failed: bool,
    /// Why the fit failed; empty on success.
    pub reason: String,
    /// Total log-likelihood of the training sequences under the final model;
    /// `NEG_INFINITY` on failure.
    pub final_loglik: f64,
    /// EM iterations performed (of the winning restart).
    pub iterations: usize,
    /// Number of restarts attempted.
    pub restarts_used: usize,
    /// Total log-likelihood after every E-step of the winning run;
    /// non-decreasing up to numerical tolerance.
    pub loglik_trace: Vec<f64>,
}

impl FitOutcome {
    fn success(model: GaussianHmm, final_loglik: f64, iterations: usize, trace: Vec<f64>) -> Self {
        Self {
            model: Some(model),
            failed: false,
            reason: String::new(),
            final_loglik,
            iterations,
            restarts_used: 1,
            loglik_trace: trace,
        }
    }

    /// A failed outcome with the given reason.
    pub fn failure(reason: impl Into<String>) -> Self {
        Self {
            model: None,
            failed: true,
            reason: reason.into(),
            final_loglik: f64::NEG_INFINITY,
            iterations: 0,
            restarts_used: 1,
            loglik_trace: Vec::new(),
        }
    }
}

/// An explicit starting point for Baum-Welch.
///
/// `covariances` uses the layout of the covariance type passed alongside it.
/// This exists so that callers can compare covariance structures from a
/// *shared* starting density, or resume from a previous fit.
#[derive(Debug, Clone)]
pub struct HmmInit {
    /// Start distribution (length `n`).
    pub pi: Vec<f64>,
    /// Row-major transition matrix (length `n*n`).
    pub a: Vec<f64>,
    /// Per-state means.
    pub means: Vec<Vec<f64>>,
    /// Per-state covariance parameters.
    pub covariances: Vec<Vec<f64>>,
}

/// Trains a Gaussian HMM on one or more observation sequences with a seeded
/// random initialization: near-uniform start/transition probabilities with
/// multiplicative jitter, means drawn without replacement from the pooled
/// observations, and covariances set to the pooled data variance under the
/// requested structure.
pub fn baum_welch(
    seqs: &[Vec<Vec<f64>>],
    n_states: usize,
    cov_type: CovarianceType,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> FitOutcome {
    let dim = match validate_sequences(seqs, n_states) {
        Ok(dim) => dim,
        Err(reason) => return FitOutcome::failure(reason),
    };
    let init = match seeded_init(seqs, n_states, dim, cov_type, seed) {
        Ok(init) => init,
        Err(reason) => return FitOutcome::failure(reason),
    };
    baum_welch_from(seqs, init, cov_type, max_iter, tol)
}

/// Trains with random restarts (`seed`, `seed+1`, ... `seed+restarts-1`) and
/// keeps the restart with the highest final log-likelihood. The outcome
/// fails only if every restart failed.
pub fn fit_hmm_restarts(
    seqs: &[Vec<Vec<f64>>],
    n_states: usize,
    cov_type: CovarianceType,
    restarts: usize,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> FitOutcome {
    if restarts == 0 {
        return FitOutcome::failure("at least one restart is required");
    }
    let mut best: Option<FitOutcome> = None;
    let mut last_reason = String::new();
    let mut failures = 0usize;
    for r in 0..restarts {
        let out = baum_welch(seqs, n_states, cov_type, max_iter, tol, seed.wrapping_add(r as u64));
        if out.failed {
            failures += 1;
            last_reason = out.reason;
            continue;
        }
        if best.as_ref().is_none_or(|b| out.final_loglik > b.final_loglik) {
            best = Some(out);
        }
    }
    match best {
        Some(mut out) => {
            out.restarts_used = restarts;
            out
        }
        None => {
            let mut out = FitOutcome::failure(format!(
                "all {failures} restart(s) failed; last reason: {last_reason}"
            ));
            out.restarts_used = restarts;
            out
        }
    }
}

/// Runs Baum-Welch from an explicit starting point.
///
/// Stops when the per-iteration log-likelihood improvement drops below `tol`
/// or after `max_iter` iterations. The likelihood after each E-step is
/// recorded in the outcome's trace.
pub fn baum_welch_from(
    seqs: &[Vec<Vec<f64>>],
    init: HmmInit,
    cov_type: CovarianceType,
    max_iter: usize,
    tol: f64,
) -> FitOutcome {
    let dim = match validate_sequences(seqs, init.pi.len()) {
        Ok(dim) => dim,
        Err(reason) => return FitOutcome::failure(reason),
    };
    if max_iter == 0 {
        return FitOutcome::failure("at least one EM iteration is required");
    }
    let n = init.pi.len();
    let HmmInit { mut pi, mut a, mut means, mut covariances } = init;

    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0;
    for iter in 0..max_iter {
        let prepared: Vec<PreparedEmission> = match means
            .iter()
            .zip(&covariances)
            .map(|(m, c)| PreparedEmission::prepare(m, c, cov_type))
            .collect()
        {
            Ok(p) => p,
            Err(_) => return FitOutcome::failure("covariance became non positive definite"),
        };

        let stats = match expectation(seqs, &pi, &a, &prepared, n, dim) {
            Ok(s) => s,
            Err(reason) => return FitOutcome::failure(reason),
        };
        iterations = iter + 1;
        trace.push(stats.loglik);

        if iter > 0 && stats.loglik - trace[iter - 1] < tol {
            break;
        }
        if iter + 1 == max_iter {
            break;
        }

        if let Err(reason) =
            maximize(seqs, &stats, &mut pi, &mut a, &mut means, &mut covariances, cov_type, n, dim)
        {
            return FitOutcome::failure(reason);
        }
    }

    let final_loglik = *trace.last().expect("at least one iteration ran");
    match GaussianHmm::new(cov_type, pi, a, means, covariances) {
        Ok(model) => FitOutcome::success(model, final_loglik, iterations, trace),
        Err(e) => FitOutcome::failure(format!("fitted parameters invalid: {e}")),
    }
}

/// Checks shapes and finiteness; returns the common dimension.
fn validate_sequences(seqs: &[Vec<Vec<f64>>], n_states: usize) -> core::result::Result<usize, String> {
    if n_states == 0 {
        return Err("a model needs at least one state".into());
    }
    if seqs.is_empty() || seqs.iter().any(Vec::is_empty) {
        return Err("training requires at least one non-empty sequence".into());
    }
    let dim = seqs[0][0].len();
    if dim == 0 {
        return Err("observations must have at least one dimension".into());
    }
    let mut total = 0usize;
    for seq in seqs {
        for row in seq {
            if row.len() != dim {
                return Err(format!("observation dimension mismatch: expected {dim}, got {}", row.len()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err("observations contain a non-finite value".into());
            }
            total += 1;
        }
    }
    if total < n_states {
        return Err(format!("only {total} observation(s) for {n_states} states"));
    }
    Ok(dim)
}

/// Builds the seeded random starting point described on [`baum_welch`].
fn seeded_init(
    seqs: &[Vec<Vec<f64>>],
    n: usize,
    dim: usize,
    cov_type: CovarianceType,
    seed: u64,
) -> core::result::Result<HmmInit, String> {
    let mut rng = seed::rng(seed);
    let mut pi: Vec<f64> = (0..n).map(|_| 1.0 + 0.1 * rng.gen::<f64>()).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    let mut a = alloc::vec![0.0; n * n];
    for row in a.chunks_mut(n) {
        for p in row.iter_mut() {
            *p = 1.0 + 0.1 * rng.gen::<f64>();
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
    }

    let pooled: Vec<&[f64]> = seqs.iter().flatten().map(Vec::as_slice).collect();
    let picks = rand::seq::index::sample(&mut rng, pooled.len(), n);
    let means: Vec<Vec<f64>> = picks.iter().map(|i| pooled[i].to_vec()).collect();

    // Pooled per-dimension moments for the covariance start.
    let count = pooled.len() as f64;
    let mut mean = alloc::vec![0.0; dim];
    for row in &pooled {
        for (m, &v) in mean.iter_mut().zip(*row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut scatter = alloc::vec![0.0; dim * dim];
    for row in &pooled {
        for k in 0..dim {
            let dk = row[k] - mean[k];
            for l in 0..dim {
                scatter[k * dim + l] += dk * (row[l] - mean[l]);
            }
        }
    }
    scatter.iter_mut().for_each(|s| *s /= count);

    let cov = match cov_type {
        CovarianceType::Spherical => {
            let avg = (0..dim).map(|k| scatter[k * dim + k]).sum::<f64>() / dim as f64;
            alloc::vec![avg.max(COV_FLOOR)]
        }
        CovarianceType::Diagonal => {
            (0..dim).map(|k| scatter[k * dim + k].max(COV_FLOOR)).collect()
        }
        CovarianceType::Full => {
            for k in 0..dim {
                if scatter[k * dim + k] < COV_FLOOR {
                    return Err(format!(
                        "covariance collapse at initialization: dimension {k} has variance {:.3e}, below the {COV_FLOOR:.0e} floor",
                        scatter[k * dim + k]
                    ));
                }
            }
            let mut full = scatter;
            for k in 0..dim {
                full[k * dim + k] += COV_FLOOR;
            }
            full
        }
    };
    let covariances = alloc::vec![cov; n];
    Ok(HmmInit { pi, a, means, covariances })
}

/// Sufficient statistics of one E-step over all sequences.
struct EStats {
    loglik: f64,
    /// Expected counts of starting in each state (summed over sequences).
    start: Vec<f64>,
    /// Expected transition counts, row-major.
    trans: Vec<f64>,
    /// Per sequence: state responsibilities, `T x n` row-major.
    gammas: Vec<Vec<f64>>,
}

fn expectation(
    seqs: &[Vec<Vec<f64>>],
    pi: &[f64],
    a: &[f64],
    prepared: &[PreparedEmission],
    n: usize,
    dim: usize,
) -> core::result::Result<EStats, String> {
    let ln_pi: Vec<f64> = pi.iter().map(|&p| p.ln()).collect();
    let ln_a: Vec<f64> = a.iter().map(|&p| p.ln()).collect();
    let mut scratch = alloc::vec![0.0; dim];
    let mut terms = alloc::vec![0.0; n];

    let mut loglik = 0.0;
    let mut start = alloc::vec![0.0; n];
    let mut trans = alloc::vec![0.0; n * n];
    let mut gammas = Vec::with_capacity(seqs.len());

    for seq in seqs {
        let t_len = seq.len();
        let mut logb = alloc::vec![0.0; t_len * n];
        for (t, row) in seq.iter().enumerate() {
            for i in 0..n {
                logb[t * n + i] = prepared[i].logpdf(row, &mut scratch);
            }
        }

        let mut alpha = alloc::vec![0.0; t_len * n];
        for i in 0..n {
            alpha[i] = ln_pi[i] + logb[i];
        }
        for t in 1..t_len {
            for j in 0..n {
                for i in 0..n {
                    terms[i] = alpha[(t - 1) * n + i] + ln_a[i * n + j];
                }
                alpha[t * n + j] = math::logsumexp(&terms) + logb[t * n + j];
            }
        }
        let seq_ll = math::logsumexp(&alpha[(t_len - 1) * n..]);
        if !seq_ll.is_finite() {
            return Err("non-finite log-likelihood during E-step".into());
        }
        loglik += seq_ll;

        let mut beta = alloc::vec![0.0; t_len * n];
        for t in (0..t_len - 1).rev() {
            for i in 0..n {
                for j in 0..n {
                    terms[j] = ln_a[i * n + j] + logb[(t + 1) * n + j] + beta[(t + 1) * n + j];
                }
                beta[t * n + i] = math::logsumexp(&terms);
            }
        }

        let mut gamma = alloc::vec![0.0; t_len * n];
        for t in 0..t_len {
            for i in 0..n {
                gamma[t * n + i] = (alpha[t * n + i] + beta[t * n + i] - seq_ll).exp();
            }
        }
        for i in 0..n {
            start[i] += gamma[i];
        }
        for t in 0..t_len - 1 {
            for i in 0..n {
                let base = alpha[t * n + i] - seq_ll;
                for j in 0..n {
                    trans[i * n + j] +=
                        (base + ln_a[i * n + j] + logb[(t + 1) * n + j] + beta[(t + 1) * n + j]).exp();
                }
            }
        }
        gammas.push(gamma);
    }

    Ok(EStats { loglik, start, trans, gammas })
}

#[allow(clippy::too_many_arguments)]
fn maximize(
    seqs: &[Vec<Vec<f64>>],
    stats: &EStats,
    pi: &mut [f64],
    a: &mut [f64],
    means: &mut [Vec<f64>],
    covariances: &mut [Vec<f64>],
    cov_type: CovarianceType,
    n: usize,
    dim: usize,
) -> core::result::Result<(), String> {
    let n_seqs = seqs.len() as f64;
    for i in 0..n {
        pi[i] = stats.start[i] / n_seqs;
    }

    for i in 0..n {
        let row = &stats.trans[i * n..(i + 1) * n];
        let row_sum: f64 = row.iter().sum();
        // A state that never transitions (responsibility only at sequence
        // ends) keeps its previous outgoing distribution.
        if row_sum > STARVED {
            for j in 0..n {
                a[i * n + j] = row[j] / row_sum;
            }
        }
    }

    // State weights and weighted observation sums.
    let mut weight = alloc::vec![0.0; n];
    let mut wsum = alloc::vec![alloc::vec![0.0; dim]; n];
    for (seq, gamma) in seqs.iter().zip(&stats.gammas) {
        for (t, row) in seq.iter().enumerate() {
            for i in 0..n {
                let g = gamma[t * n + i];
                weight[i] += g;
                for (acc, &v) in wsum[i].iter_mut().zip(row) {
                    *acc += g * v;
                }
            }
        }
    }
    for i in 0..n {
        if weight[i] > STARVED {
            for (m, &s) in means[i].iter_mut().zip(&wsum[i]) {
                *m = s / weight[i];
            }
        }
    }

    // Covariances around the updated means.
    for i in 0..n {
        if weight[i] <= STARVED {
            continue; // keep the previous covariance too
        }
        match cov_type {
            CovarianceType::Spherical => {
                let mut acc = 0.0;
                for (seq, gamma) in seqs.iter().zip(&stats.gammas) {
                    for (t, row) in seq.iter().enumerate() {
                        let g = gamma[t * n + i];
                        acc += g * math::sq_dist(row, &means[i]);
                    }
                }
                covariances[i][0] = (acc / (weight[i] * dim as f64)).max(COV_FLOOR);
            }
            CovarianceType::Diagonal => {
                let mut acc = alloc::vec![0.0; dim];
                for (seq, gamma) in seqs.iter().zip(&stats.gammas) {
                    for (t, row) in seq.iter().enumerate() {
                        let g = gamma[t * n + i];
                        for k in 0..dim {
                            let d = row[k] - means[i][k];
                            acc[k] += g * d * d;
                        }
                    }
                }
                for k in 0..dim {
                    covariances[i][k] = (acc[k] / weight[i]).max(COV_FLOOR);
                }
            }
            CovarianceType::Full => {
                let mut acc = alloc::vec![0.0; dim * dim];
                for (seq, gamma) in seqs.iter().zip(&stats.gammas) {
                    for (t, row) in seq.iter().enumerate() {
                        let g = gamma[t * n + i];
                        for k in 0..dim {
                            let dk = row[k] - means[i][k];
                            for l in 0..dim {
                                acc[k * dim + l] += g * dk * (row[l] - means[i][l]);
                            }
                        }
                    }
                }
                acc.iter_mut().for_each(|v| *v /= weight[i]);
                for k in 0..dim {
                    if acc[k * dim + k] < COV_FLOOR {
                        return Err(format!(
                            "covariance collapse: state {i} dimension {k} variance {:.3e} fell below the {COV_FLOOR:.0e} floor",
                            acc[k * dim + k]
                        ));
                    }
                }
                for k in 0..dim {
                    acc[k * dim + k] += COV_FLOOR;
                }
                covariances[i].copy_from_slice(&acc);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Standard normal draw via Box-Muller (tests only).
    fn normal(rng: &mut impl Rng) -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
    }

    fn two_regime_sequence(seed: u64, t_len: usize, means: (f64, f64)) -> Vec<Vec<f64>> {
        let mut rng = seed::rng(seed);
        let mut state = 0usize;
        let mut out = Vec::with_capacity(t_len);
        for _ in 0..t_len {
            if rng.gen::<f64>() < 0.1 {
                state = 1 - state;
            }
            let mu = if state == 0 { means.0 } else { means.1 };
            out.push(vec![mu + normal(&mut rng)]);
        }
        out
    }

    #[test]
    fn log_pdf_matches_frozen_values() {
        // Standard normal at its mean: -0.5*ln(2*pi).
        let lp = log_gaussian_pdf(&[0.0], &[0.0], &[1.0], CovarianceType::Spherical).unwrap();
        assert!((lp - -0.918_938_533_204_672_7).abs() < 1e-12, "{lp}");
        // 2-D standard normal at the origin: -ln(2*pi).
        let lp = log_gaussian_pdf(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], CovarianceType::Diagonal)
            .unwrap();
        assert!((lp - -1.837_877_066_409_345_3).abs() < 1e-12, "{lp}");
        // Variance 1/(2*pi) makes the 1-D density exactly 1 at the mean.
        let lp = log_gaussian_pdf(
            &[0.5],
            &[0.5],
            &[1.0 / core::f64::consts::TAU],
            CovarianceType::Spherical,
        )
        .unwrap();
        assert!(lp.abs() < 1e-12, "{lp}");
        // Correlated full covariance, checked against an independent
        // dense-inverse computation.
        let lp = log_gaussian_pdf(
            &[0.3, -0.2],
            &[0.0, 0.0],
            &[2.0, 0.5, 0.5, 1.0],
            CovarianceType::Full,
        )
        .unwrap();
        assert!((lp - -2.183_399_246_091_342_5).abs() < 1e-12, "{lp}");
        // Diagonal case with distinct variances and a shifted mean.
        let lp = log_gaussian_pdf(&[1.0, -1.0], &[0.5, 0.5], &[0.5, 2.0], CovarianceType::Diagonal)
            .unwrap();
        assert!((lp - -2.650_377_066_409_345_3).abs() < 1e-12, "{lp}");
    }

    #[test]
    fn cov_structures_agree_where_they_overlap() {
        let mut rng = seed::rng(3);
        for _ in 0..50 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let mean = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let v = rng.gen_range(0.1..2.0);
            let sph = log_gaussian_pdf(&x, &mean, &[v], CovarianceType::Spherical).unwrap();
            let diag = log_gaussian_pdf(&x, &mean, &[v, v], CovarianceType::Diagonal).unwrap();
            let full =
                log_gaussian_pdf(&x, &mean, &[v, 0.0, 0.0, v], CovarianceType::Full).unwrap();
            assert!((sph - diag).abs() < 1e-12);
            assert!((sph - full).abs() < 1e-12);
        }
    }

    #[test]
    fn non_positive_definite_full_matrix_is_rejected() {
        // Determinant negative: off-diagonal larger than the diagonal.
        let err =
            log_gaussian_pdf(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 2.0, 2.0, 1.0], CovarianceType::Full)
                .unwrap_err();
        assert_eq!(err, Error::NotPositiveDefinite);
    }

    /// Brute-force forward probability by enumerating every state path.
    fn enumerated_log_likelihood(model: &GaussianHmm, obs: &[Vec<f64>]) -> f64 {
        let n = model.n_states();
        let t_len = obs.len();
        let mut path = vec![0usize; t_len];
        let mut total = f64::NEG_INFINITY;
        loop {
            let mut lp = model.pi()[path[0]].ln();
            for t in 1..t_len {
                lp += model.transitions()[path[t - 1] * n + path[t]].ln();
            }
            for (t, row) in obs.iter().enumerate() {
                lp += log_gaussian_pdf(
                    row,
                    &model.means()[path[t]],
                    &model.covariances()[path[t]],
                    model.cov_type(),
                )
                .unwrap();
            }
            total = math::logaddexp(total, lp);
            // Odometer increment over the n^T paths.
            let mut t = 0;
            loop {
                if t == t_len {
                    return total;
                }
                path[t] += 1;
                if path[t] < n {
                    break;
                }
                path[t] = 0;
                t += 1;
            }
        }
    }

    fn random_model(n: usize, d: usize, cov_type: CovarianceType, seed: u64) -> GaussianHmm {
        let mut rng = seed::rng(seed);
        let mut pi: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
        let s: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= s);
        let mut a = vec![0.0; n * n];
        for row in a.chunks_mut(n) {
            for p in row.iter_mut() {
                *p = rng.gen_range(0.2..1.0);
            }
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= s);
        }
        let means: Vec<Vec<f64>> =
            (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let covariances: Vec<Vec<f64>> = (0..n)
            .map(|_| match cov_type {
                CovarianceType::Spherical => vec![rng.gen_range(0.2..2.0)],
                CovarianceType::Diagonal => (0..d).map(|_| rng.gen_range(0.2..2.0)).collect(),
                CovarianceType::Full => {
                    // L L^T for a random lower-triangular L with positive
                    // diagonal is positive definite by construction.
                    let mut l = vec![0.0; d * d];
                    for i in 0..d {
                        for j in 0..i {
                            l[i * d + j] = rng.gen_range(-0.5..0.5);
                        }
                        l[i * d + i] = rng.gen_range(0.5..1.5);
                    }
                    let mut c = vec![0.0; d * d];
                    for i in 0..d {
                        for j in 0..d {
                            for k in 0..d {
                                c[i * d + j] += l[i * d + k] * l[j * d + k];
                            }
                        }
                    }
                    c
                }
            })
            .collect();
        GaussianHmm::new(cov_type, pi, a, means, covariances).unwrap()
    }

    #[test]
    fn forward_matches_path_enumeration() {
        let mut rng = seed::rng(17);
        for trial in 0..30u64 {
            let n = 1 + (trial as usize % 4);
            let d = 1 + (trial as usize % 2);
            let cov_type = CovarianceType::ALL[trial as usize % 3];
            let model = random_model(n, d, cov_type, seed::mix(100, trial));
            let t_len = 2 + (trial as usize % 4);
            let obs: Vec<Vec<f64>> = (0..t_len)
                .map(|_| (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect())
                .collect();
            let fast = model.forward_log_likelihood(&obs).unwrap();
            let slow = enumerated_log_likelihood(&model, &obs);
            assert!(
                (fast - slow).abs() < 1e-9,
                "trial {trial}: forward {fast} vs enumeration {slow}"
            );
        }
    }

    #[test]
    fn forward_survives_long_unlikely_sequences() {
        // 500 points far from the mean would underflow a linear-space
        // forward pass; in log space the result is just very negative.
        let model = random_model(3, 1, CovarianceType::Spherical, 8);
        let obs: Vec<Vec<f64>> = (0..500).map(|_| vec![50.0]).collect();
        let ll = model.forward_log_likelihood(&obs).unwrap();
        assert!(ll.is_finite());
        assert!(ll < -1e5);
    }

    #[test]
    fn forward_rejects_bad_shapes() {
        let model = random_model(2, 1, CovarianceType::Spherical, 9);
        assert_eq!(model.forward_log_likelihood(&[]), Err(Error::EmptyInput("observation sequence")));
        assert_eq!(
            model.forward_log_likelihood(&[vec![1.0, 2.0]]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn em_never_decreases_the_likelihood() {
        for seed in 0..8u64 {
            let seqs = vec![
                two_regime_sequence(seed::mix(seed, 1), 60, (0.0, 4.0)),
                two_regime_sequence(seed::mix(seed, 2), 60, (0.0, 4.0)),
            ];
            let cov_type = CovarianceType::ALL[seed as usize % 3];
            let out = baum_welch(&seqs, 2, cov_type, 30, 0.0, seed);
            assert!(!out.failed, "seed {seed}: {}", out.reason);
            let trace = &out.loglik_trace;
            assert!(trace.len() >= 2);
            for w in trace.windows(2) {
                assert!(
                    w[1] >= w[0] - 1e-8,
                    "seed {seed}: log-likelihood fell from {} to {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn em_recovers_well_separated_means() {
        let seqs = vec![two_regime_sequence(41, 200, (0.0, 10.0))];
        let out = fit_hmm_restarts(&seqs, 2, CovarianceType::Spherical, 5, 50, 1e-3, 7);
        assert!(!out.failed, "{}", out.reason);
        let model = out.model.unwrap();
        let mut mus: Vec<f64> = model.means().iter().map(|m| m[0]).collect();
        mus.sort_by(f64::total_cmp);
        assert!((mus[0] - 0.0).abs() < 0.5, "low mean off: {}", mus[0]);
        assert!((mus[1] - 10.0).abs() < 0.5, "high mean off: {}", mus[1]);
    }

    #[test]
    fn constant_sequences_fail_under_full_covariance_but_not_spherical() {
        let seqs = vec![vec![vec![3.0]; 40]];
        let full = baum_welch(&seqs, 2, CovarianceType::Full, 50, 1e-3, 0);
        assert!(full.failed);
        assert!(full.model.is_none());
        assert!(full.reason.contains("covariance collapse"), "reason: {}", full.reason);

        let sph = baum_welch(&seqs, 2, CovarianceType::Spherical, 50, 1e-3, 0);
        assert!(!sph.failed, "{}", sph.reason);
        let model = sph.model.unwrap();
        for cov in model.covariances() {
            assert!(cov[0] >= COV_FLOOR);
        }
    }

    #[test]
    fn restarts_keep_the_best_likelihood_and_count_failures() {
        let seqs = vec![two_regime_sequence(5, 80, (0.0, 3.0))];
        let one = fit_hmm_restarts(&seqs, 2, CovarianceType::Diagonal, 1, 20, 1e-3, 50);
        let many = fit_hmm_restarts(&seqs, 2, CovarianceType::Diagonal, 6, 20, 1e-3, 50);
        assert!(!one.failed && !many.failed);
        assert!(many.final_loglik >= one.final_loglik - 1e-9);
        assert_eq!(many.restarts_used, 6);

        let constant = vec![vec![vec![1.0]; 30]];
        let out = fit_hmm_restarts(&constant, 2, CovarianceType::Full, 3, 20, 1e-3, 0);
        assert!(out.failed);
        assert!(out.reason.contains("all 3 restart(s) failed"), "reason: {}", out.reason);
    }

    #[test]
    fn too_little_data_fails_as_a_value() {
        let seqs = vec![vec![vec![1.0], vec![2.0]]];
        let out = baum_welch(&seqs, 3, CovarianceType::Spherical, 10, 1e-3, 0);
        assert!(out.failed);
        assert!(out.reason.contains("2 observation(s) for 3 states"), "reason: {}", out.reason);
        let out = baum_welch(&[], 2, CovarianceType::Spherical, 10, 1e-3, 0);
        assert!(out.failed);
    }

    #[test]
    fn nested_covariances_rank_by_expressiveness_from_a_shared_start() {
        // Correlated 2-D data: the full structure can model the cross term,
        // diagonal the per-axis spread, spherical only a single radius. From
        // an identical starting density the final likelihoods must respect
        // that nesting.
        let mut rng = seed::rng(23);
        let seq: Vec<Vec<f64>> = (0..150)
            .map(|_| {
                let z = normal(&mut rng);
                vec![z + 0.2 * normal(&mut rng), 0.8 * z + 0.3 * normal(&mut rng)]
            })
            .collect();
        let seqs = vec![seq];
        for n in [1usize, 2] {
            let base = match seeded_init(&seqs, n, 2, CovarianceType::Spherical, 99) {
                Ok(init) => init,
                Err(e) => panic!("{e}"),
            };
            let v = base.covariances[0][0];
            let make = |cov: Vec<f64>| HmmInit {
                pi: base.pi.clone(),
                a: base.a.clone(),
                means: base.means.clone(),
                covariances: vec![cov; n],
            };
            let sph = baum_welch_from(&seqs, make(vec![v]), CovarianceType::Spherical, 15, 0.0);
            let diag = baum_welch_from(&seqs, make(vec![v, v]), CovarianceType::Diagonal, 15, 0.0);
            let full = baum_welch_from(
                &seqs,
                make(vec![v, 0.0, 0.0, v]),
                CovarianceType::Full,
                15,
                0.0,
            );
            assert!(!sph.failed && !diag.failed && !full.failed);
            assert!(
                diag.final_loglik >= sph.final_loglik - 1e-9,
                "n={n}: diagonal {} < spherical {}",
                diag.final_loglik,
                sph.final_loglik
            );
            assert!(
                full.final_loglik >= diag.final_loglik - 1e-9,
                "n={n}: full {} < diagonal {}",
                full.final_loglik,
                diag.final_loglik
            );
        }
    }

    #[test]
    fn training_is_deterministic_in_the_seed() {
        let seqs = vec![two_regime_sequence(1, 50, (0.0, 2.0))];
        let a = baum_welch(&seqs, 2, CovarianceType::Diagonal, 15, 1e-3, 77);
        let b = baum_welch(&seqs, 2, CovarianceType::Diagonal, 15, 1e-3, 77);
        assert_eq!(a.model, b.model);
        assert_eq!(a.loglik_trace, b.loglik_trace);
    }

    #[test]
    fn model_serialization_round_trips() {
        let model = random_model(3, 2, CovarianceType::Full, 12);
        let json = serde_json::to_string(&model).unwrap();
        for key in ["n_states", "dim", "cov_type", "pi", "\"a\"", "means", "covariances"] {
            assert!(json.contains(key), "missing key {key} in {json}");
        }
        assert!(json.contains("\"full\""));
        let back: GaussianHmm = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn invalid_parameters_are_rejected_at_construction() {
        // Non-stochastic start distribution.
        assert!(GaussianHmm::new(
            CovarianceType::Spherical,
            vec![0.7, 0.7],
            vec![0.5, 0.5, 0.5, 0.5],
            vec![vec![0.0], vec![1.0]],
            vec![vec![1.0], vec![1.0]],
        )
        .is_err());
        // Variance below the floor.
        assert!(GaussianHmm::new(
            CovarianceType::Spherical,
            vec![1.0],
            vec![1.0],
            vec![vec![0.0]],
            vec![vec![1e-9]],
        )
        .is_err());
    }
}
