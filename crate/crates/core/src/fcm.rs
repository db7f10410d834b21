//! Fuzzy cognitive maps: sigmoid reasoning over concept activations and
//! weight learning by differential evolution.
//!
//! A map over `P` concepts is a `P x P` weight matrix in `[-1, 1]`; one
//! reasoning step squashes the weighted activation mix through a steep
//! sigmoid. The map is trained to predict each activation row of a fuzzified
//! series from its predecessor, and its one-step mean squared error doubles
//! as the classification score (lower is better).

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::de::{self, DeParams};
use crate::error::{Error, Result};
use crate::fuzzy::{ActivationSequence, CentroidSet};

/// The squashing function `1 / (1 + exp(-tau * x))`.
#[must_use]
pub fn sigmoid(x: f64, tau: f64) -> f64 {
    1.0 / (1.0 + (-tau * x).exp())
}

/// A trained fuzzy cognitive map, bundled with the centroids that produced
/// its activation space (scoring a new series requires fuzzifying it with
/// exactly these centroids).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcmModel {
    /// Number of concepts.
    #[serde(rename = "P")]
    p: usize,
    /// Sigmoid steepness.
    tau: f64,
    /// Row-major weights; `weights[j*P + i]` is the influence of concept `j`
    /// on concept `i`.
    weights: Vec<f64>,
    /// The concept centroids (and fuzzifier) this map reasons over.
    centroids: CentroidSet,
}

impl FcmModel {
    /// Builds a map, validating the weight shape, the `[-1, 1]` range and
    /// `tau > 0`.
    pub fn new(weights: Vec<f64>, tau: f64, centroids: CentroidSet) -> Result<Self> {
        let p = centroids.len();
        if weights.len() != p * p {
            return Err(Error::DimensionMismatch { expected: p * p, got: weights.len() });
        }
        if weights.iter().any(|w| !w.is_finite() || w.abs() > 1.0) {
            return Err(Error::InvalidParameter("weights must lie in [-1, 1]"));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter("tau must be finite and positive"));
        }
        Ok(Self { p, tau, weights, centroids })
    }

    /// Number of concepts `P`.
    pub fn concepts(&self) -> usize {
        self.p
    }

    /// Sigmoid steepness.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Row-major weight matrix.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The centroids the map's activation space is defined over.
    pub fn centroids(&self) -> &CentroidSet {
        &self.centroids
    }

    /// One reasoning step: maps an activation row to the predicted next row.
    /// Every output component lies in `(0, 1)`.
    pub fn step(&self, activation: &[f64]) -> Result<Vec<f64>> {
        if activation.len() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, got: activation.len() });
        }
        let mut out = alloc::vec![0.0; self.p];
        step_into(&self.weights, self.p, self.tau, activation, &mut out);
        Ok(out)
    }

    /// Mean squared one-step prediction error over activation sequences.
    ///
    /// Every consecutive row pair `(r_t, r_{t+1})` contributes the squared
    /// error of predicting `r_{t+1}` from `r_t`; the sum is divided by
    /// `P * total_pairs`. Errors if `seqs` is empty, a sequence has fewer
    /// than two rows, or a row width differs from `P`.
    pub fn prediction_error(&self, seqs: &[ActivationSequence]) -> Result<f64> {
        validate_sequences(seqs, self.p)?;
        let mut scratch = alloc::vec![0.0; self.p];
        Ok(mse_over(&self.weights, self.p, self.tau, seqs, &mut scratch))
    }
}

fn step_into(weights: &[f64], p: usize, tau: f64, activation: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut net = 0.0;
        for (j, &aj) in activation.iter().enumerate() {
            net += aj * weights[j * p + i];
        }
        *o = sigmoid(net, tau);
    }
}

fn mse_over(
    weights: &[f64],
    p: usize,
    tau: f64,
    seqs: &[ActivationSequence],
    scratch: &mut [f64],
) -> f64 {
    let mut err = 0.0;
    let mut pairs = 0usize;
    for seq in seqs {
        for w in seq.rows.windows(2) {
            step_into(weights, p, tau, &w[0], scratch);
            err += crate::math::sq_dist(scratch, &w[1]);
            pairs += 1;
        }
    }
    err / (pairs * p) as f64
}

fn validate_sequences(seqs: &[ActivationSequence], p: usize) -> Result<()> {
    if seqs.is_empty() {
        return Err(Error::EmptyInput("activation sequences"));
    }
    for (index, seq) in seqs.iter().enumerate() {
        if seq.rows.len() < 2 {
            return Err(Error::SequenceTooShort { index, rows: seq.rows.len() });
        }
        for row in &seq.rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch { expected: p, got: row.len() });
            }
        }
    }
    Ok(())
}

/// Result of [`train_fcm`].
#[derive(Debug, Clone)]
pub struct FcmFitOutcome {
    /// The trained map.
    pub model: FcmModel,
    /// Its mean squared one-step error on the training sequences.
    pub mse: f64,
    /// Differential evolution generations used.
    pub iterations: usize,
}

/// Learns a weight matrix minimizing the one-step prediction error over
/// `seqs` by differential evolution in the box `[-1, 1]^(P*P)`.
///
/// The all-zero matrix (whose predictions are uniformly `0.5`) is seeded into
/// the initial population, so the result is never worse than that baseline.
pub fn train_fcm(
    seqs: &[ActivationSequence],
    centroids: &CentroidSet,
    tau: f64,
    params: &DeParams,
    seed: u64,
) -> Result<FcmFitOutcome> {
    let p = centroids.len();
    validate_sequences(seqs, p)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter("tau must be finite and positive"));
    }
    let bounds = alloc::vec![(-1.0, 1.0); p * p];
    let zero_seed = alloc::vec![alloc::vec![0.0; p * p]];
    let mut scratch = alloc::vec![0.0; p];
    let outcome = de::de_optimize(
        |w| mse_over(w, p, tau, seqs, &mut scratch),
        &bounds,
        params,
        seed,
        &zero_seed,
    )?;
    let model = FcmModel::new(outcome.best, tau, centroids.clone())?;
    Ok(FcmFitOutcome { model, mse: outcome.best_value, iterations: outcome.iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::DeltaPoint;
    use alloc::vec;

    fn centroids(p: usize) -> CentroidSet {
        let pts = (0..p).map(|i| DeltaPoint { z: i as f64, dz: 0.0 }).collect();
        CentroidSet::new(pts, 2.0).unwrap()
    }

    fn seq(rows: Vec<Vec<f64>>) -> ActivationSequence {
        ActivationSequence { rows }
    }

    #[test]
    fn sigmoid_matches_frozen_values() {
        assert!((sigmoid(1.0, 5.0) - 0.993_307_149_075_715_3).abs() < 1e-15);
        assert!((sigmoid(-1.0, 5.0) - 0.006_692_850_924_284_855).abs() < 1e-15);
        assert_eq!(sigmoid(0.0, 2.5), 0.5);
        // Steeper tau sharpens the response to the same input.
        assert!(sigmoid(0.3, 5.0) > sigmoid(0.3, 2.5));
    }

    #[test]
    fn zero_weights_predict_one_half_everywhere() {
        // With W = 0 every prediction is sigmoid(0) = 0.5, so rows pinned at
        // 1 and 0 produce a squared error of 0.25 per component.
        let model = FcmModel::new(vec![0.0; 4], 5.0, centroids(2)).unwrap();
        let s = seq(vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]]);
        let mse = model.prediction_error(&[s]).unwrap();
        assert!((mse - 0.25).abs() < 1e-15, "mse = {mse}");
    }

    #[test]
    fn step_respects_the_weight_convention() {
        // weights[j*P + i] is j's influence on i: with only w[0*2+1] = 1 set,
        // concept 0 excites concept 1 while concept 1 receives no
        // self-influence and concept 0 no input at all.
        let model = FcmModel::new(vec![0.0, 1.0, 0.0, 0.0], 5.0, centroids(2)).unwrap();
        let out = model.step(&[1.0, 0.0]).unwrap();
        assert_eq!(out[0], 0.5);
        assert!((out[1] - sigmoid(1.0, 5.0)).abs() < 1e-15);
    }

    #[test]
    fn step_output_stays_strictly_inside_the_unit_interval() {
        let model = FcmModel::new(vec![1.0, -1.0, 1.0, -1.0], 5.0, centroids(2)).unwrap();
        for row in [[1.0, 1.0], [0.0, 0.0], [0.3, 0.9]] {
            for v in model.step(&row).unwrap() {
                assert!(v > 0.0 && v < 1.0, "activation escaped the unit interval: {v}");
            }
        }
    }

    #[test]
    fn prediction_error_validates_its_input() {
        let model = FcmModel::new(vec![0.0; 4], 5.0, centroids(2)).unwrap();
        assert_eq!(model.prediction_error(&[]), Err(Error::EmptyInput("activation sequences")));
        assert_eq!(
            model.prediction_error(&[seq(vec![vec![0.5, 0.5]])]),
            Err(Error::SequenceTooShort { index: 0, rows: 1 })
        );
        assert_eq!(
            model.prediction_error(&[seq(vec![vec![0.5; 3], vec![0.5; 3]])]),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        );
    }

    #[test]
    fn training_never_loses_to_the_zero_matrix() {
        let mut rng = crate::seed::rng(4);
        use rand::Rng;
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| {
                let a: f64 = rng.gen_range(0.05..0.95);
                vec![a, 1.0 - a]
            })
            .collect();
        let seqs = [seq(rows)];
        let zero = FcmModel::new(vec![0.0; 4], 5.0, centroids(2)).unwrap();
        let zero_mse = zero.prediction_error(&seqs).unwrap();
        let params = DeParams { max_iter: 40, ..DeParams::default() };
        let fit = train_fcm(&seqs, &centroids(2), 5.0, &params, 3).unwrap();
        assert!(fit.mse <= zero_mse + 1e-15, "{} > {}", fit.mse, zero_mse);
        let check = fit.model.prediction_error(&seqs).unwrap();
        assert!((check - fit.mse).abs() < 1e-12);
    }

    #[test]
    fn training_recovers_a_self_consistent_map() {
        // Rows generated by a known map are exactly predictable; training
        // should drive the error far below the 0.25 zero-weight baseline.
        let truth = FcmModel::new(vec![0.6, -0.4, -0.2, 0.8], 2.5, centroids(2)).unwrap();
        let mut rows = vec![vec![0.9, 0.2]];
        for t in 0..40 {
            let next = truth.step(&rows[t]).unwrap();
            rows.push(next);
        }
        let seqs = [seq(rows)];
        let fit = train_fcm(&seqs, &centroids(2), 2.5, &DeParams::default(), 11).unwrap();
        assert!(fit.mse < 1e-3, "mse = {}", fit.mse);
    }

    #[test]
    fn training_is_deterministic_in_the_seed() {
        let rows: Vec<Vec<f64>> =
            (0..20).map(|t| vec![0.5 + 0.4 * ((t as f64) * 0.7).sin(), 0.5]).collect();
        let seqs = [seq(rows)];
        let params = DeParams { max_iter: 25, ..DeParams::default() };
        let a = train_fcm(&seqs, &centroids(2), 5.0, &params, 21).unwrap();
        let b = train_fcm(&seqs, &centroids(2), 5.0, &params, 21).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.mse, b.mse);
    }

    #[test]
    fn model_serialization_round_trips() {
        let model = FcmModel::new(vec![0.25, -0.5, 0.75, 0.0], 5.0, centroids(2)).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        for key in ["\"P\"", "tau", "weights", "centroids", "\"M\""] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        let back: FcmModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }
}
