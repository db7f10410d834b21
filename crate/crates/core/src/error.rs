//! Error type shared across the crate.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Anything that can go wrong while building datasets, clustering, training
/// or evaluating models.
///
/// Note that a *model fit* that degenerates (covariance collapse, NaN
/// likelihood) is not an `Error`: fits report failure as a value
/// ([`crate::hmm::FitOutcome`]) so that callers can score partial banks. The
/// variants here are contract violations — malformed inputs or requests that
/// cannot be satisfied at all.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// A series had fewer than two observations.
    SeriesTooShort {
        /// Position of the offending series in its containing collection.
        index: usize,
        /// Number of observations it actually had.
        len: usize,
    },
    /// A series contained a NaN or infinite value.
    NonFiniteValue {
        /// Position of the offending series in its containing collection.
        index: usize,
    },
    /// Stratified splitting needs at least two members per class.
    ClassTooSmall {
        /// The label with fewer than two members.
        label: String,
    },
    /// The requested fold count cannot partition the data.
    InvalidFoldCount {
        /// The requested number of folds.
        k: usize,
    },
    /// Clustering asked for more centroids than there are distinct points.
    TooFewDistinctPoints {
        /// Number of distinct embedded points available.
        distinct: usize,
        /// Number of centroids requested.
        requested: usize,
    },
    /// Fuzzy c-means produced a non-finite quantity.
    ClusteringDiverged,
    /// Fuzzy c-means ended with two coincident centroids.
    DuplicateCentroids,
    /// An input had a different dimension than the model expects.
    DimensionMismatch {
        /// Dimension required by the model or operation.
        expected: usize,
        /// Dimension actually supplied.
        got: usize,
    },
    /// An activation sequence had fewer than two rows, so it contains no
    /// consecutive pair to predict.
    SequenceTooShort {
        /// Position of the offending sequence in its containing collection.
        index: usize,
        /// Number of rows it actually had.
        rows: usize,
    },
    /// An optimization bound had `lo >= hi`.
    InvalidBounds {
        /// Index of the offending coordinate.
        dim: usize,
    },
    /// The objective returned NaN or infinity at the given point.
    NonFiniteObjective {
        /// The candidate vector that produced the non-finite value.
        at: Vec<f64>,
    },
    /// A full covariance matrix was not positive definite.
    NotPositiveDefinite,
    /// A classifier has no usable model to score with.
    NoUsableModel,
    /// Rank correlation is undefined because one ranking is constant.
    ConstantRanks,
    /// Two paired collections differed in length.
    LengthMismatch {
        /// Length of the first collection.
        left: usize,
        /// Length of the second collection.
        right: usize,
    },
    /// A required input collection was empty.
    EmptyInput(&'static str),
    /// A parameter was outside its documented range.
    InvalidParameter(&'static str),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SeriesTooShort { index, len } => {
                write!(f, "series {index} has length {len}; at least 2 observations are required")
            }
            Error::NonFiniteValue { index } => {
                write!(f, "series {index} contains a non-finite value")
            }
            Error::ClassTooSmall { label } => {
                write!(f, "class {label:?} has fewer than two members; stratified folds are impossible")
            }
            Error::InvalidFoldCount { k } => {
                write!(f, "cannot split into {k} folds")
            }
            Error::TooFewDistinctPoints { distinct, requested } => {
                write!(f, "only {distinct} distinct points available but {requested} centroids requested")
            }
            Error::ClusteringDiverged => write!(f, "fuzzy c-means produced a non-finite value"),
            Error::DuplicateCentroids => write!(f, "clustering collapsed two centroids onto the same point"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::SequenceTooShort { index, rows } => {
                write!(f, "activation sequence {index} has {rows} row(s); at least 2 are required")
            }
            Error::InvalidBounds { dim } => {
                write!(f, "bound {dim} is empty (lower limit not below upper limit)")
            }
            Error::NonFiniteObjective { .. } => {
                write!(f, "objective returned a non-finite value")
            }
            Error::NotPositiveDefinite => write!(f, "covariance matrix is not positive definite"),
            Error::NoUsableModel => write!(f, "classifier has no usable model"),
            Error::ConstantRanks => {
                write!(f, "rank correlation is undefined: a ranking is constant")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::EmptyInput(what) => write!(f, "{what} must not be empty"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for Error {}
