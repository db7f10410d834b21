//! Saving, loading, and summarizing trained classifiers.
//!
//! A bundle is a single JSON document `{ "version": 1, "classifier": ... }`.
//! The version field lets future readers reject layouts they do not
//! understand instead of misinterpreting them.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tsmb_core::classify::{ModelKind, TrainedClassifier};

use crate::util::atomic_write;

/// Bundle layout version written by this binary.
pub const BUNDLE_VERSION: u32 = 1;

/// What goes on disk: a version tag wrapping the classifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelBundle {
    /// Layout version; see [`BUNDLE_VERSION`].
    pub version: u32,
    /// The trained classifier itself.
    pub classifier: TrainedClassifier,
}

/// Anything that can go wrong reading or writing a bundle.
#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    /// The file could not be read or written.
    #[error("{path}: {source}")]
    Io {
        /// Offending path.
        path: String,
        /// Underlying I/O error.
        #[source]
        source: std::io::Error,
    },
    /// The file exists but is not a valid bundle.
    #[error("{path}: not a valid model bundle: {source}")]
    Json {
        /// Offending path.
        path: String,
        /// Underlying decode error.
        #[source]
        source: serde_json::Error,
    },
    /// The bundle was written by an incompatible layout.
    #[error("{path}: unsupported bundle version {found} (this build reads version {BUNDLE_VERSION})")]
    Version {
        /// Offending path.
        path: String,
        /// Version found in the file.
        found: u32,
    },
}

/// Serializes a classifier to pretty-printed bundle JSON.
pub fn bundle_json(classifier: &TrainedClassifier) -> String {
    let bundle = ModelBundle {
        version: BUNDLE_VERSION,
        classifier: classifier.clone(),
    };
    let mut text = serde_json::to_string_pretty(&bundle)
        .expect("a trained classifier always serializes");
    text.push('\n');
    text
}

/// Writes a classifier to `path` atomically.
pub fn save_bundle(path: &Path, classifier: &TrainedClassifier) -> Result<(), BundleError> {
    atomic_write(path, &bundle_json(classifier)).map_err(|source| BundleError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a classifier back from `path`, checking the layout version.
pub fn load_bundle(path: &Path) -> Result<TrainedClassifier, BundleError> {
    let text = std::fs::read_to_string(path).map_err(|source| BundleError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let bundle: ModelBundle =
        serde_json::from_str(&text).map_err(|source| BundleError::Json {
            path: path.display().to_string(),
            source,
        })?;
    if bundle.version != BUNDLE_VERSION {
        return Err(BundleError::Version {
            path: path.display().to_string(),
            found: bundle.version,
        });
    }
    Ok(bundle.classifier)
}

/// Renders a human-readable summary of a classifier: scheme, hyperparameters,
/// classes, per-model shape and iteration counts, and any recorded failures.
pub fn describe(clf: &TrainedClassifier) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scheme:          {}", clf.scheme);
    let _ = writeln!(out, "hyperparameters: {}", clf.hyper);
    let _ = writeln!(
        out,
        "classes ({}):    {}",
        clf.classes.len(),
        clf.classes.join(", ")
    );
    let _ = writeln!(out, "models:          {}", clf.bank.len());
    for entry in &clf.bank {
        let shape = match &entry.model {
            ModelKind::Hmm(h) => format!(
                "HMM, {} state(s), dim {}, {} covariance",
                h.n_states(),
                h.dim(),
                h.cov_type()
            ),
            ModelKind::Fcm(f) => {
                format!("FCM, {} concepts, tau {}", f.concepts(), f.tau())
            }
        };
        let _ = writeln!(
            out,
            "  {}: {} ({} iterations)",
            entry.owner, shape, entry.stats.iterations
        );
    }
    let missing = clf.missing_classes();
    if !missing.is_empty() {
        let _ = writeln!(out, "classes without a model: {}", missing.join(", "));
    }
    let _ = writeln!(out, "failures:        {}", clf.failures.len());
    for failure in &clf.failures {
        let _ = writeln!(out, "  {}: {}", failure.owner, failure.reason);
    }
    out
}
