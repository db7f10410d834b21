//! Labeled series, datasets and stratified fold splitting.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::math;
use crate::seed;

/// Standard deviations below this are treated as zero when z-normalizing.
const ZNORM_STD_FLOOR: f64 = 1e-12;

/// A univariate time series with a class label.
///
/// Construction validates the invariants every consumer in this crate relies
/// on: at least two observations, all of them finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    label: String,
    values: Vec<f64>,
}

impl LabeledSeries {
    /// Creates a series, validating length and finiteness.
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::at_index(label, values, 0)
    }

    /// Like [`LabeledSeries::new`], but any error names `index` as the
    /// position of this series in its containing collection. Parsers use this
    /// so that diagnostics point at the offending row.
    pub fn at_index(label: impl Into<String>, values: Vec<f64>, index: usize) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SeriesTooShort { index, len: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self { label: label.into(), values })
    }

    /// The class label.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// The observations, in time order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; the constructor rejects series shorter than two.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Returns a copy rescaled to zero mean and unit variance.
    ///
    /// A (numerically) constant series maps to all zeros instead of dividing
    /// by a vanishing standard deviation.
    #[must_use]
    pub fn znormalize(&self) -> LabeledSeries {
        let mu = math::mean(&self.values);
        let sd = math::population_variance(&self.values).sqrt();
        let values = if sd < ZNORM_STD_FLOOR {
            alloc::vec![0.0; self.values.len()]
        } else {
            self.values.iter().map(|&v| (v - mu) / sd).collect()
        };
        LabeledSeries { label: self.label.clone(), values }
    }
}

/// A named train/test split.
///
/// `classes` is derived at construction as the sorted union of the labels
/// observed in both splits, so it is never out of sync with the series.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    classes: Vec<String>,
    train: Vec<LabeledSeries>,
    test: Vec<LabeledSeries>,
}

impl Dataset {
    /// Builds a dataset from its two splits. The training split must be
    /// non-empty; the test split may be empty (train-only workflows).
    pub fn new(
        name: impl Into<String>,
        train: Vec<LabeledSeries>,
        test: Vec<LabeledSeries>,
    ) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyInput("training split"));
        }
        let mut classes: Vec<String> = train
            .iter()
            .chain(test.iter())
            .map(|s| s.label.clone())
            .collect();
        classes.sort();
        classes.dedup();
        Ok(Self { name: name.into(), classes, train, test })
    }

    /// The dataset's name (used in reports).
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Sorted distinct labels over both splits.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// The training split.
    pub fn train(&self) -> &[LabeledSeries] {
        &self.train
    }

    /// The test split.
    pub fn test(&self) -> &[LabeledSeries] {
        &self.test
    }

    /// Returns a copy with every series z-normalized individually.
    #[must_use]
    pub fn znormalized(&self) -> Dataset {
        Dataset {
            name: self.name.clone(),
            classes: self.classes.clone(),
            train: self.train.iter().map(LabeledSeries::znormalize).collect(),
            test: self.test.iter().map(LabeledSeries::znormalize).collect(),
        }
    }
}

/// One cross-validation fold, as indices into the series slice it was built
/// from. `train` and `validation` partition `0..n`; both are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    /// Indices of the series to train on.
    pub train: Vec<usize>,
    /// Indices of the series to validate on.
    pub validation: Vec<usize>,
}

/// Splits series into `k` stratified folds.
///
/// Within each class (processed in sorted label order) the members are
/// shuffled with a ChaCha8 stream seeded by `seed`, then dealt out `m/k` per
/// fold; the `m mod k` leftovers go to the folds with the smallest current
/// load, lowest fold index first. Fold sizes therefore differ by at most one
/// overall, not just per class.
///
/// Errors: `k < 2`, `k` exceeding the number of series, or any class with a
/// single member (which could never appear in both sides of a split).
pub fn stratified_kfold(series: &[LabeledSeries], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 || k > series.len() {
        return Err(Error::InvalidFoldCount { k });
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in series.iter().enumerate() {
        by_class.entry(s.label()).or_default().push(i);
    }
    for (label, members) in &by_class {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall { label: String::from(*label) });
        }
    }

    let mut rng = seed::rng(seed);
    let mut assigned: Vec<Vec<usize>> = alloc::vec![Vec::new(); k];
    let mut loads = alloc::vec![0usize; k];
    for members in by_class.values() {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        let base = shuffled.len() / k;
        let rem = shuffled.len() % k;
        // The `rem` folds with the smallest load get one extra member.
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&f| (loads[f], f));
        let mut extra = alloc::vec![false; k];
        for &f in order.iter().take(rem) {
            extra[f] = true;
        }
        let mut cursor = 0;
        for f in 0..k {
            let take = base + usize::from(extra[f]);
            assigned[f].extend_from_slice(&shuffled[cursor..cursor + take]);
            loads[f] += take;
            cursor += take;
        }
    }

    let folds = assigned
        .into_iter()
        .map(|mut validation| {
            validation.sort_unstable();
            let train = (0..series.len()).filter(|i| validation.binary_search(i).is_err()).collect();
            Fold { train, validation }
        })
        .collect();
    Ok(folds)
}
