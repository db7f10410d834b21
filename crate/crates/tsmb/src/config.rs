//! Command-line surface and configuration resolution.
//!
//! `benchmark` accepts flags, an optional JSON config file, or both; flags
//! override the file (boolean flags are OR-ed, since an absent flag cannot
//! express "off"). The master seed comes from `--seed`, then the config
//! file, then the `TSMB_SEED` environment variable; benchmarking without
//! any of the three is a usage error, because silently seeding from wall
//! clock would make reports unreproducible.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use tsmb_core::classify::{Family, Hyper, SchemeId, TrainConfig};
use tsmb_core::hmm::CovarianceType;

use crate::formats::Format;
use crate::CliError;

/// Environment variable consulted when no seed is given by flag or config.
pub const SEED_ENV: &str = "TSMB_SEED";

/// State-based time series classification benchmarks.
#[derive(Debug, Parser)]
#[command(
    name = "tsmb",
    version,
    about = "Train, benchmark, and compare state-based time series classifiers \
             (Gaussian HMMs and fuzzy cognitive maps, per class or per series)"
)]
pub struct Cli {
    /// Worker threads for parallel training (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// What to do.
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one classifier and save it as a JSON model bundle.
    Train(TrainArgs),
    /// Cross-validate, test, and time schemes over datasets; write reports.
    Benchmark(BenchmarkArgs),
    /// Rank-correlate accuracy vectors across benchmark reports.
    Compare(CompareArgs),
    /// Summarize a saved model bundle.
    Inspect(InspectArgs),
}

/// Arguments for `tsmb train`.
#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training split (.ts or .csv).
    #[arg(long)]
    pub train: PathBuf,
    /// File format; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<String>,
    /// Scheme: hmm-1c, hmm-nn, fcm-1c, or fcm-nn.
    #[arg(long)]
    pub scheme: String,
    /// HMM state count (required for HMM schemes).
    #[arg(long)]
    pub states: Option<usize>,
    /// HMM covariance type: spherical, diagonal, or full.
    #[arg(long, default_value = "full")]
    pub cov_type: String,
    /// FCM concept count (required for FCM schemes).
    #[arg(long)]
    pub concepts: Option<usize>,
    /// Z-normalize every series at load time.
    #[arg(long)]
    pub znorm: bool,
    /// Feed HMMs (value, delta) pairs instead of raw values.
    #[arg(long)]
    pub hmm_delta: bool,
    /// Cluster FCM concept centroids once on all training data instead of
    /// per model.
    #[arg(long)]
    pub shared_centroids: bool,
    /// Sigmoid steepness for FCM activation updates.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Fuzzifier exponent for c-means membership.
    #[arg(long)]
    pub fuzzy_m: Option<f64>,
    /// Random restarts per HMM fit.
    #[arg(long)]
    pub hmm_restarts: Option<usize>,
    /// Baum-Welch iteration cap.
    #[arg(long)]
    pub hmm_max_iter: Option<usize>,
    /// Differential evolution generation cap.
    #[arg(long)]
    pub de_max_iter: Option<usize>,
    /// Master seed (falls back to the TSMB_SEED environment variable).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where to write the model bundle.
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

/// Arguments for `tsmb benchmark`.
#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Training split of a single dataset (alternative to a config file).
    #[arg(long, requires = "test")]
    pub train: Option<PathBuf>,
    /// Test split of that dataset.
    #[arg(long, requires = "train")]
    pub test: Option<PathBuf>,
    /// Dataset name override (default: train file stem).
    #[arg(long)]
    pub name: Option<String>,
    /// File format; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<String>,
    /// Comma-separated schemes to run (default: all four).
    #[arg(long, value_delimiter = ',')]
    pub schemes: Option<Vec<String>>,
    /// Cross-validation fold count.
    #[arg(long)]
    pub k: Option<usize>,
    /// Extra test evaluations with remixed seeds, reported as mean ± range.
    #[arg(long)]
    pub reruns: Option<usize>,
    /// Master seed (falls back to the config file, then TSMB_SEED).
    #[arg(long)]
    pub seed: Option<u64>,
    /// HMM state grid as LO:HI (default 3:16).
    #[arg(long)]
    pub hmm_states: Option<String>,
    /// FCM concept grid as LO:HI (default 3:16).
    #[arg(long)]
    pub fcm_concepts: Option<String>,
    /// Comma-separated covariance types for the HMM grid (default all three).
    #[arg(long, value_delimiter = ',')]
    pub cov_types: Option<Vec<String>>,
    /// Z-normalize every series at load time.
    #[arg(long)]
    pub znorm: bool,
    /// Feed HMMs (value, delta) pairs instead of raw values.
    #[arg(long)]
    pub hmm_delta: bool,
    /// Cluster FCM concept centroids once per owner set instead of per model.
    #[arg(long)]
    pub shared_centroids: bool,
    /// Ignore failed per-series models instead of zeroing the fold.
    #[arg(long)]
    pub lenient_failures: bool,
    /// Sigmoid steepness for FCM activation updates.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Fuzzifier exponent for c-means membership.
    #[arg(long)]
    pub fuzzy_m: Option<f64>,
    /// Random restarts per HMM fit.
    #[arg(long)]
    pub hmm_restarts: Option<usize>,
    /// Baum-Welch iteration cap.
    #[arg(long)]
    pub hmm_max_iter: Option<usize>,
    /// Differential evolution generation cap.
    #[arg(long)]
    pub de_max_iter: Option<usize>,
    /// Output directory for report.json, accuracy.csv, and timing.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Arguments for `tsmb compare`.
#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Benchmark report.json files to correlate.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Write the matrix here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Arguments for `tsmb inspect`.
#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Model bundle to summarize.
    pub bundle: PathBuf,
    /// Print the raw bundle JSON instead of a summary.
    #[arg(long)]
    pub json: bool,
}

/// One dataset in a benchmark config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    /// Display name (default: train file stem).
    pub name: Option<String>,
    /// Training split path.
    pub train: PathBuf,
    /// Test split path.
    pub test: PathBuf,
    /// File format; guessed from the extension when omitted.
    pub format: Option<String>,
}

/// The JSON config file for `benchmark`. Every field is optional; unknown
/// fields are rejected so typos surface instead of being ignored.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    /// Datasets to benchmark.
    pub datasets: Vec<DatasetSpec>,
    /// Scheme tokens to run.
    pub schemes: Option<Vec<String>>,
    /// Master seed.
    pub seed: Option<u64>,
    /// Cross-validation fold count.
    pub k: Option<usize>,
    /// Extra test evaluations.
    pub reruns: Option<usize>,
    /// Z-normalize at load time.
    pub znorm: bool,
    /// (value, delta) HMM observations.
    pub hmm_delta: bool,
    /// Shared FCM centroids.
    pub shared_centroids: bool,
    /// Lenient failure rule.
    pub lenient_failures: bool,
    /// Sigmoid steepness.
    pub tau: Option<f64>,
    /// Fuzzifier exponent.
    pub fuzzy_m: Option<f64>,
    /// HMM state grid as [lo, hi].
    pub hmm_states: Option<(usize, usize)>,
    /// FCM concept grid as [lo, hi].
    pub fcm_concepts: Option<(usize, usize)>,
    /// Covariance types for the HMM grid.
    pub cov_types: Option<Vec<String>>,
    /// Random restarts per HMM fit.
    pub hmm_restarts: Option<usize>,
    /// Baum-Welch iteration cap.
    pub hmm_max_iter: Option<usize>,
    /// Differential evolution generation cap.
    pub de_max_iter: Option<usize>,
    /// Worker threads.
    pub jobs: Option<usize>,
    /// Output directory.
    pub out: Option<PathBuf>,
}

/// A fully resolved benchmark: what `cmd_benchmark` executes.
#[derive(Debug)]
pub struct BenchmarkPlan {
    /// Datasets, in run order.
    pub datasets: Vec<DatasetSpec>,
    /// Schemes, in run order (duplicates removed).
    pub schemes: Vec<SchemeId>,
    /// Master seed.
    pub seed: u64,
    /// Fold count.
    pub k: usize,
    /// Extra test evaluations.
    pub reruns: usize,
    /// Z-normalize at load time.
    pub znorm: bool,
    /// Lenient failure rule.
    pub lenient_failures: bool,
    /// HMM state grid bounds, inclusive.
    pub hmm_states: (usize, usize),
    /// FCM concept grid bounds, inclusive.
    pub fcm_concepts: (usize, usize),
    /// Covariance types in the HMM grid.
    pub cov_types: Vec<CovarianceType>,
    /// Shared per-model training knobs.
    pub train: TrainConfig,
    /// Output directory.
    pub out: PathBuf,
    /// Worker threads (None = rayon default).
    pub jobs: Option<usize>,
}

/// Parses a scheme token list, rejecting unknown tokens and dropping
/// duplicates while preserving first-occurrence order.
pub fn parse_schemes(tokens: &[String]) -> Result<Vec<SchemeId>, CliError> {
    let mut out: Vec<SchemeId> = Vec::new();
    for token in tokens {
        let scheme: SchemeId = token
            .parse()
            .map_err(|e: tsmb_core::Error| CliError::Usage(e.to_string()))?;
        if !out.contains(&scheme) {
            out.push(scheme);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no schemes selected".to_string()));
    }
    Ok(out)
}

/// Parses an optional format name.
pub fn parse_format(name: Option<&str>) -> Result<Option<Format>, CliError> {
    name.map(|n| n.parse().map_err(CliError::Usage)).transpose()
}

fn parse_cov_types(names: &[String]) -> Result<Vec<CovarianceType>, CliError> {
    let mut out: Vec<CovarianceType> = Vec::new();
    for name in names {
        let ct: CovarianceType = name
            .parse()
            .map_err(|e: tsmb_core::Error| CliError::Usage(e.to_string()))?;
        if !out.contains(&ct) {
            out.push(ct);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no covariance types selected".to_string()));
    }
    Ok(out)
}

fn parse_range(what: &str, text: &str) -> Result<(usize, usize), CliError> {
    let parse_end = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| CliError::Usage(format!("{what}: expected LO:HI, got `{text}`")))
    };
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("{what}: expected LO:HI, got `{text}`")))?;
    let range = (parse_end(lo.trim())?, parse_end(hi.trim())?);
    check_range(what, range)?;
    Ok(range)
}

fn check_range(what: &str, (lo, hi): (usize, usize)) -> Result<(), CliError> {
    if lo == 0 || lo > hi {
        return Err(CliError::Usage(format!(
            "{what}: bounds must satisfy 1 <= LO <= HI, got {lo}:{hi}"
        )));
    }
    Ok(())
}

/// Resolves the master seed: flag, then config file, then `TSMB_SEED`.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag.or(file) {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text.trim().parse().map_err(|_| {
            CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{text}`"))
        }),
        Err(_) => Err(CliError::Usage(format!(
            "no seed: pass --seed, set `seed` in the config file, or export {SEED_ENV}"
        ))),
    }
}

/// Reads and decodes a config file.
pub fn load_config(path: &std::path::Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: invalid config: {e}", path.display())))
}

/// Builds the training knobs shared by `train` and `benchmark` from the
/// resolved option values.
#[allow(clippy::too_many_arguments)]
fn build_train_config(
    tau: Option<f64>,
    fuzzy_m: Option<f64>,
    shared_centroids: bool,
    hmm_delta: bool,
    hmm_restarts: Option<usize>,
    hmm_max_iter: Option<usize>,
    de_max_iter: Option<usize>,
) -> Result<TrainConfig, CliError> {
    let mut cfg = TrainConfig::default();
    if let Some(tau) = tau {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(CliError::Usage(format!("--tau must be positive, got {tau}")));
        }
        cfg.tau = tau;
    }
    if let Some(m) = fuzzy_m {
        if !(m.is_finite() && m > 1.0) {
            return Err(CliError::Usage(format!(
                "--fuzzy-m must be greater than 1, got {m}"
            )));
        }
        cfg.fuzzy_m = m;
    }
    cfg.shared_centroids = shared_centroids;
    cfg.hmm_delta = hmm_delta;
    if let Some(r) = hmm_restarts {
        if r == 0 {
            return Err(CliError::Usage("--hmm-restarts must be at least 1".to_string()));
        }
        cfg.hmm_restarts = r;
    }
    if let Some(n) = hmm_max_iter {
        if n == 0 {
            return Err(CliError::Usage("--hmm-max-iter must be at least 1".to_string()));
        }
        cfg.hmm_max_iter = n;
    }
    if let Some(n) = de_max_iter {
        if n == 0 {
            return Err(CliError::Usage("--de-max-iter must be at least 1".to_string()));
        }
        cfg.de.max_iter = n;
    }
    Ok(cfg)
}

/// Resolves `train` arguments into the pieces `cmd_train` needs.
pub fn resolve_train(
    args: &TrainArgs,
) -> Result<(SchemeId, Hyper, TrainConfig, u64, Option<Format>), CliError> {
    let scheme: SchemeId = args
        .scheme
        .parse()
        .map_err(|e: tsmb_core::Error| CliError::Usage(e.to_string()))?;
    let hyper = match scheme.family {
        Family::Hmm => {
            let n_states = args.states.ok_or_else(|| {
                CliError::Usage("HMM schemes need --states".to_string())
            })?;
            if n_states == 0 {
                return Err(CliError::Usage("--states must be at least 1".to_string()));
            }
            if args.concepts.is_some() {
                return Err(CliError::Usage(
                    "--concepts does not apply to HMM schemes".to_string(),
                ));
            }
            let cov_type: CovarianceType = args
                .cov_type
                .parse()
                .map_err(|e: tsmb_core::Error| CliError::Usage(e.to_string()))?;
            Hyper::Hmm { n_states, cov_type }
        }
        Family::Fcm => {
            let concepts = args.concepts.ok_or_else(|| {
                CliError::Usage("FCM schemes need --concepts".to_string())
            })?;
            if concepts < 2 {
                return Err(CliError::Usage("--concepts must be at least 2".to_string()));
            }
            if args.states.is_some() {
                return Err(CliError::Usage(
                    "--states does not apply to FCM schemes".to_string(),
                ));
            }
            Hyper::Fcm { concepts }
        }
    };
    let train = build_train_config(
        args.tau,
        args.fuzzy_m,
        args.shared_centroids,
        args.hmm_delta,
        args.hmm_restarts,
        args.hmm_max_iter,
        args.de_max_iter,
    )?;
    let seed = resolve_seed(args.seed, None)?;
    let format = parse_format(args.format.as_deref())?;
    Ok((scheme, hyper, train, seed, format))
}

/// Merges benchmark flags over the optional config file into a full plan.
pub fn resolve_benchmark(
    cli_jobs: Option<usize>,
    args: &BenchmarkArgs,
) -> Result<BenchmarkPlan, CliError> {
    let file = match &args.config {
        Some(path) => load_config(path)?,
        None => FileConfig::default(),
    };

    let datasets = match (&args.train, &args.test) {
        (Some(train), Some(test)) => vec![DatasetSpec {
            name: args.name.clone(),
            train: train.clone(),
            test: test.clone(),
            format: args.format.clone(),
        }],
        _ => file.datasets.clone(),
    };
    if datasets.is_empty() {
        return Err(CliError::Usage(
            "no datasets: pass --train/--test or a config file with a `datasets` list"
                .to_string(),
        ));
    }
    for spec in &datasets {
        parse_format(spec.format.as_deref())?;
    }

    let schemes = match args.schemes.as_ref().or(file.schemes.as_ref()) {
        Some(tokens) => parse_schemes(tokens)?,
        None => SchemeId::ALL.to_vec(),
    };

    let seed = resolve_seed(args.seed, file.seed)?;
    let k = args.k.or(file.k).unwrap_or(3);
    if k < 2 {
        return Err(CliError::Usage(format!(
            "cross-validation needs at least 2 folds, got {k}"
        )));
    }
    let reruns = args.reruns.or(file.reruns).unwrap_or(0);

    let hmm_states = match &args.hmm_states {
        Some(text) => parse_range("--hmm-states", text)?,
        None => match file.hmm_states {
            Some(range) => {
                check_range("hmm_states", range)?;
                range
            }
            None => (3, 16),
        },
    };
    let fcm_concepts = match &args.fcm_concepts {
        Some(text) => parse_range("--fcm-concepts", text)?,
        None => match file.fcm_concepts {
            Some(range) => {
                check_range("fcm_concepts", range)?;
                range
            }
            None => (3, 16),
        },
    };
    if fcm_concepts.0 < 2 {
        return Err(CliError::Usage(format!(
            "FCM concept grid must start at 2 or more, got {}",
            fcm_concepts.0
        )));
    }
    let cov_types = match args.cov_types.as_ref().or(file.cov_types.as_ref()) {
        Some(names) => parse_cov_types(names)?,
        None => CovarianceType::ALL.to_vec(),
    };

    let train = build_train_config(
        args.tau.or(file.tau),
        args.fuzzy_m.or(file.fuzzy_m),
        args.shared_centroids || file.shared_centroids,
        args.hmm_delta || file.hmm_delta,
        args.hmm_restarts.or(file.hmm_restarts),
        args.hmm_max_iter.or(file.hmm_max_iter),
        args.de_max_iter.or(file.de_max_iter),
    )?;

    Ok(BenchmarkPlan {
        datasets,
        schemes,
        seed,
        k,
        reruns,
        znorm: args.znorm || file.znorm,
        lenient_failures: args.lenient_failures || file.lenient_failures,
        hmm_states,
        fcm_concepts,
        cov_types,
        train,
        out: args
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("results")),
        jobs: cli_jobs.or(file.jobs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tsmb_core::classify::Granularity;

    fn bench_args() -> BenchmarkArgs {
        BenchmarkArgs {
            config: None,
            train: Some(PathBuf::from("t.csv")),
            test: Some(PathBuf::from("e.csv")),
            name: None,
            format: None,
            schemes: None,
            k: None,
            reruns: None,
            seed: Some(7),
            hmm_states: None,
            fcm_concepts: None,
            cov_types: None,
            znorm: false,
            hmm_delta: false,
            shared_centroids: false,
            lenient_failures: false,
            tau: None,
            fuzzy_m: None,
            hmm_restarts: None,
            hmm_max_iter: None,
            de_max_iter: None,
            out: None,
        }
    }

    #[test]
    fn defaults_cover_all_schemes_and_full_grids() {
        let plan = resolve_benchmark(None, &bench_args()).unwrap();
        assert_eq!(plan.schemes.len(), 4);
        assert_eq!(plan.k, 3);
        assert_eq!(plan.hmm_states, (3, 16));
        assert_eq!(plan.fcm_concepts, (3, 16));
        assert_eq!(plan.cov_types, CovarianceType::ALL.to_vec());
        assert_eq!(plan.seed, 7);
        assert_eq!(plan.out, PathBuf::from("results"));
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{
                "datasets": [{"train": "a.csv", "test": "b.csv"}],
                "seed": 1,
                "k": 5,
                "schemes": ["fcm-nn"],
                "hmm_states": [2, 4],
                "znorm": true
            }"#,
        )
        .unwrap();
        let mut args = bench_args();
        args.config = Some(path);
        args.train = None;
        args.test = None;
        args.seed = Some(99);
        args.k = Some(2);
        let plan = resolve_benchmark(Some(3), &args).unwrap();
        assert_eq!(plan.seed, 99, "flag beats file");
        assert_eq!(plan.k, 2, "flag beats file");
        assert_eq!(plan.hmm_states, (2, 4), "file beats default");
        assert!(plan.znorm, "file flag sticks");
        assert_eq!(plan.jobs, Some(3));
        assert_eq!(plan.schemes.len(), 1);
        assert_eq!(plan.schemes[0].granularity, Granularity::PerSeries);
        assert_eq!(plan.datasets.len(), 1);
        assert_eq!(plan.datasets[0].train, PathBuf::from("a.csv"));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"sede": 1}"#).unwrap();
        let mut args = bench_args();
        args.config = Some(path);
        let err = resolve_benchmark(None, &args).unwrap_err();
        assert!(matches!(err, CliError::Data(_)), "{err}");
        assert!(err.to_string().contains("sede"), "{err}");
    }

    #[test]
    fn seed_resolution_order_is_flag_file_env() {
        assert_eq!(resolve_seed(Some(1), Some(2)).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some(2)).unwrap(), 2);
        // Env fallback is exercised in the CLI integration tests, where the
        // variable can be set on a child process without racing other tests.
    }

    #[test]
    fn missing_seed_is_a_usage_error_mentioning_all_sources() {
        let mut args = bench_args();
        args.seed = None;
        // The suite never sets TSMB_SEED in its own environment.
        let err = resolve_benchmark(None, &args).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)), "{err}");
        assert!(err.to_string().contains("TSMB_SEED"), "{err}");
    }

    #[test]
    fn ranges_and_tokens_are_validated() {
        let mut args = bench_args();
        args.hmm_states = Some("4".to_string());
        assert!(matches!(
            resolve_benchmark(None, &args),
            Err(CliError::Usage(_))
        ));
        let mut args = bench_args();
        args.hmm_states = Some("9:3".to_string());
        assert!(matches!(
            resolve_benchmark(None, &args),
            Err(CliError::Usage(_))
        ));
        let mut args = bench_args();
        args.schemes = Some(vec!["hmm-2c".to_string()]);
        assert!(matches!(
            resolve_benchmark(None, &args),
            Err(CliError::Usage(_))
        ));
        let mut args = bench_args();
        args.fcm_concepts = Some("1:5".to_string());
        assert!(matches!(
            resolve_benchmark(None, &args),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn train_resolution_requires_matching_hyper_flags() {
        let mut args = TrainArgs {
            train: PathBuf::from("t.csv"),
            format: None,
            scheme: "hmm-1c".to_string(),
            states: None,
            cov_type: "full".to_string(),
            concepts: None,
            znorm: false,
            hmm_delta: false,
            shared_centroids: false,
            tau: None,
            fuzzy_m: None,
            hmm_restarts: None,
            hmm_max_iter: None,
            de_max_iter: None,
            seed: Some(3),
            out: PathBuf::from("model.json"),
        };
        assert!(matches!(resolve_train(&args), Err(CliError::Usage(_))));
        args.states = Some(3);
        let (scheme, hyper, cfg, seed, format) = resolve_train(&args).unwrap();
        assert_eq!(scheme.token(), "hmm-1c");
        assert_eq!(hyper.to_string(), "3 full");
        assert_eq!(cfg.hmm_restarts, TrainConfig::default().hmm_restarts);
        assert_eq!(seed, 3);
        assert!(format.is_none());
        args.concepts = Some(5);
        assert!(matches!(resolve_train(&args), Err(CliError::Usage(_))));
        args.concepts = None;
        args.scheme = "fcm-nn".to_string();
        args.states = None;
        assert!(matches!(resolve_train(&args), Err(CliError::Usage(_))));
        args.concepts = Some(5);
        let (_, hyper, ..) = resolve_train(&args).unwrap();
        assert_eq!(hyper.to_string(), "5");
    }

    #[test]
    fn bad_knob_values_are_usage_errors() {
        let mut args = bench_args();
        args.tau = Some(-1.0);
        assert!(matches!(
            resolve_benchmark(None, &args),
            Err(CliError::Usage(_))
        ));
        let mut args = bench_args();
        args.fuzzy_m = Some(1.0);
        assert!(matches!(
            resolve_benchmark(None, &args),
            Err(CliError::Usage(_))
        ));
        let mut args = bench_args();
        args.hmm_restarts = Some(0);
        assert!(matches!(
            resolve_benchmark(None, &args),
            Err(CliError::Usage(_))
        ));
    }
}
