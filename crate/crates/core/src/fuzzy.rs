//! Delta embedding and fuzzy c-means clustering.
//!
//! A scalar series is lifted to the plane by pairing each value with its
//! first difference; fuzzy c-means then places `P` concept centroids in that
//! plane, and every embedded point is described by its membership degrees to
//! the concepts. The resulting activation rows are what a fuzzy cognitive
//! map reasons over.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledSeries;
use crate::error::{Error, Result};
use crate::seed;

/// Distances below this are treated as "the point sits on the centroid".
pub const SINGULARITY_EPS: f64 = 1e-12;

/// A series value paired with its first difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaPoint {
    /// The observation itself.
    pub z: f64,
    /// Change from the previous observation.
    pub dz: f64,
}

impl DeltaPoint {
    fn dist(&self, other: &DeltaPoint) -> f64 {
        let dz = self.z - other.z;
        let ddz = self.dz - other.dz;
        (dz * dz + ddz * ddz).sqrt()
    }
}

/// Embeds values as `(z_i, z_i - z_{i-1})` pairs, one per value after the
/// first. Errors if fewer than two values are supplied.
pub fn embed_deltas(values: &[f64]) -> Result<Vec<DeltaPoint>> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter("delta embedding requires at least two values"));
    }
    Ok(values.windows(2).map(|w| DeltaPoint { z: w[1], dz: w[1] - w[0] }).collect())
}

/// A fitted set of concept centroids plus the fuzzifier `M` they were fitted
/// with. Membership queries must use the same `M`, so the two travel
/// together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidSet {
    centroids: Vec<DeltaPoint>,
    #[serde(rename = "M")]
    m: f64,
}

impl CentroidSet {
    /// Builds a centroid set, validating that there are at least two
    /// pairwise-distinct finite centroids and that `M > 1`.
    pub fn new(centroids: Vec<DeltaPoint>, m: f64) -> Result<Self> {
        if centroids.len() < 2 {
            return Err(Error::InvalidParameter("a centroid set needs at least two concepts"));
        }
        if !(m > 1.0) || !m.is_finite() {
            return Err(Error::InvalidParameter("fuzzifier M must be finite and > 1"));
        }
        if centroids.iter().any(|c| !c.z.is_finite() || !c.dz.is_finite()) {
            return Err(Error::ClusteringDiverged);
        }
        for (i, a) in centroids.iter().enumerate() {
            for b in &centroids[i + 1..] {
                if a.dist(b) < SINGULARITY_EPS {
                    return Err(Error::DuplicateCentroids);
                }
            }
        }
        Ok(Self { centroids, m })
    }

    /// Number of concepts `P`.
    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    /// Always false; construction requires at least two centroids.
    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    /// The centroids themselves.
    pub fn centroids(&self) -> &[DeltaPoint] {
        &self.centroids
    }

    /// The fuzzifier exponent `M`.
    pub fn m(&self) -> f64 {
        self.m
    }
}

/// Membership degrees of `point` to every centroid.
///
/// Uses the standard fuzzy c-means formula
/// `u_j = 1 / sum_k (d_j / d_k)^(2/(M-1))`, with the singular case handled
/// explicitly: if the point lies on one or more centroids (distance below
/// [`SINGULARITY_EPS`]) those centroids share the full membership equally and
/// all others get zero. The returned degrees are non-negative and sum to one.
#[must_use]
pub fn membership(point: &DeltaPoint, set: &CentroidSet) -> Vec<f64> {
    let mut out = alloc::vec![0.0; set.len()];
    membership_into(point, set.centroids(), set.m(), &mut out);
    out
}

fn membership_into(point: &DeltaPoint, centroids: &[DeltaPoint], m: f64, out: &mut [f64]) {
    let dists: Vec<f64> = centroids.iter().map(|c| point.dist(c)).collect();
    let singular = dists.iter().filter(|&&d| d < SINGULARITY_EPS).count();
    if singular > 0 {
        let share = 1.0 / singular as f64;
        for (o, &d) in out.iter_mut().zip(&dists) {
            *o = if d < SINGULARITY_EPS { share } else { 0.0 };
        }
        return;
    }
    let exponent = 2.0 / (m - 1.0);
    let mut total = 0.0;
    for (o, &dj) in out.iter_mut().zip(&dists) {
        // Ratio form: overflow for far-away centroids degrades gracefully to
        // zero membership instead of poisoning the whole row.
        let denom: f64 = dists.iter().map(|&dk| (dj / dk).powf(exponent)).sum();
        *o = 1.0 / denom;
        total += *o;
    }
    // The u_j sum to one algebraically; renormalize to pin the invariant
    // down to floating-point roundoff.
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// Embeds a series and converts every point to its membership row.
///
/// The result has `series.len() - 1` rows, each summing to one.
pub fn fuzzify_series(series: &LabeledSeries, set: &CentroidSet) -> ActivationSequence {
    let points = embed_deltas(series.values()).expect("LabeledSeries guarantees length >= 2");
    let rows = points.iter().map(|p| membership(p, set)).collect();
    ActivationSequence { rows }
}

/// A series re-expressed as concept activations: one row per embedded point,
/// each row a membership distribution over the concepts.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationSequence {
    /// Membership rows in time order. All rows share one width `P`.
    pub rows: Vec<Vec<f64>>,
}

/// Result of a fuzzy c-means run.
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    /// The fitted centroids, paired with the fuzzifier they assume.
    pub centroids: CentroidSet,
    /// Objective `J_M` after each membership update; non-increasing.
    pub objective_trace: Vec<f64>,
    /// Number of alternating updates performed.
    pub iterations: usize,
}

/// Fuzzy c-means over embedded points.
///
/// Alternates the membership and centroid updates from a seeded start (`p`
/// distinct points sampled without replacement) until the largest centroid
/// displacement drops below `tol` or `max_iter` updates have run. The
/// objective `J_M = sum_ij u_ij^M d_ij^2` is recorded after every membership
/// update and is non-increasing.
///
/// Errors if fewer than `p` distinct points exist, on non-finite parameters,
/// or if the run diverges or collapses two centroids onto each other.
pub fn fcm_cluster(
    points: &[DeltaPoint],
    p: usize,
    m: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<ClusterOutcome> {
    if p < 2 {
        return Err(Error::InvalidParameter("clustering needs at least two concepts"));
    }
    if !(m > 1.0) || !m.is_finite() {
        return Err(Error::InvalidParameter("fuzzifier M must be finite and > 1"));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter("clustering tolerance must be non-negative"));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter("clustering needs at least one iteration"));
    }

    let mut distinct: Vec<DeltaPoint> = Vec::new();
    for pt in points {
        if !distinct.iter().any(|q| q.z == pt.z && q.dz == pt.dz) {
            distinct.push(*pt);
        }
    }
    if distinct.len() < p {
        return Err(Error::TooFewDistinctPoints { distinct: distinct.len(), requested: p });
    }

    let mut rng = seed::rng(seed);
    let picks = rand::seq::index::sample(&mut rng, distinct.len(), p);
    let mut centroids: Vec<DeltaPoint> = picks.iter().map(|i| distinct[i]).collect();

    let n = points.len();
    let mut u = alloc::vec![0.0; n * p];
    let mut trace = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        // Membership update, then the objective against the current centroids.
        let mut objective = 0.0;
        for (i, pt) in points.iter().enumerate() {
            membership_into(pt, &centroids, m, &mut u[i * p..(i + 1) * p]);
            for (j, c) in centroids.iter().enumerate() {
                let d = pt.dist(c);
                objective += u[i * p + j].powf(m) * d * d;
            }
        }
        if !objective.is_finite() {
            return Err(Error::ClusteringDiverged);
        }
        trace.push(objective);

        // Centroid update.
        let mut displacement = 0.0_f64;
        for (j, c) in centroids.iter_mut().enumerate() {
            let mut wz = 0.0;
            let mut wdz = 0.0;
            let mut wsum = 0.0;
            for (i, pt) in points.iter().enumerate() {
                let w = u[i * p + j].powf(m);
                wz += w * pt.z;
                wdz += w * pt.dz;
                wsum += w;
            }
            if wsum > 0.0 {
                let next = DeltaPoint { z: wz / wsum, dz: wdz / wsum };
                if !next.z.is_finite() || !next.dz.is_finite() {
                    return Err(Error::ClusteringDiverged);
                }
                displacement = displacement.max(next.dist(c));
                *c = next;
            }
        }
        if displacement < tol {
            break;
        }
    }

    let centroids = CentroidSet::new(centroids, m)?;
    Ok(ClusterOutcome { centroids, objective_trace: trace, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(pts: &[(f64, f64)], m: f64) -> CentroidSet {
        let cs = pts.iter().map(|&(z, dz)| DeltaPoint { z, dz }).collect();
        CentroidSet::new(cs, m).unwrap()
    }

    #[test]
    fn embedding_pairs_values_with_first_differences() {
        let pts = embed_deltas(&[1.0, 3.0, 2.0]).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!((pts[0].z, pts[0].dz), (3.0, 2.0));
        assert_eq!((pts[1].z, pts[1].dz), (2.0, -1.0));
        assert!(embed_deltas(&[1.0]).is_err());
    }

    #[test]
    fn membership_matches_hand_computed_example() {
        // Centroids at (0,0) and (1,0), point at (0.25,0), M=2:
        // u_1 = 1 / (1 + (0.25/0.75)^2) = 0.9, u_2 = 0.1.
        let cs = set(&[(0.0, 0.0), (1.0, 0.0)], 2.0);
        let u = membership(&DeltaPoint { z: 0.25, dz: 0.0 }, &cs);
        assert!((u[0] - 0.9).abs() < 1e-12, "u0 = {}", u[0]);
        assert!((u[1] - 0.1).abs() < 1e-12, "u1 = {}", u[1]);
    }

    #[test]
    fn membership_on_a_centroid_is_an_indicator() {
        let cs = set(&[(0.0, 0.0), (2.0, 1.0), (5.0, -1.0)], 1.7);
        let u = membership(&DeltaPoint { z: 2.0, dz: 1.0 }, &cs);
        assert_eq!(u, alloc::vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn membership_splits_ties_between_coincident_hits() {
        // Two centroids 1.5e-12 apart are legal (above the dedup threshold),
        // and a point between them sits "on" both: the mass splits equally.
        let cs = set(&[(0.0, 0.0), (1.5e-12, 0.0), (1.0, 0.0)], 2.0);
        let u = membership(&DeltaPoint { z: 0.75e-12, dz: 0.0 }, &cs);
        assert_eq!(u, alloc::vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn membership_survives_a_sharp_fuzzifier() {
        // M close to 1 makes the exponent 2/(M-1) huge; far centroids must
        // fall to zero membership instead of overflowing the row.
        let cs = set(&[(0.0, 0.0), (100.0, 0.0)], 1.05);
        let u = membership(&DeltaPoint { z: 0.01, dz: 0.0 }, &cs);
        assert!(u.iter().all(|x| x.is_finite()));
        assert!((u.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(u[0] > 0.999999, "nearest centroid should dominate, got {u:?}");
    }

    proptest! {
        #[test]
        fn membership_is_a_distribution(
            pz in -50.0..50.0f64,
            pdz in -50.0..50.0f64,
            m in 1.1..6.0f64,
            cs in proptest::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 2..9),
        ) {
            let centroids: Vec<DeltaPoint> =
                cs.iter().map(|&(z, dz)| DeltaPoint { z, dz }).collect();
            let Ok(set) = CentroidSet::new(centroids, m) else {
                // Random centroids may collide; nothing to check then.
                return Ok(());
            };
            let u = membership(&DeltaPoint { z: pz, dz: pdz }, &set);
            prop_assert!(u.iter().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
            prop_assert!((u.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn clustering_with_p_equal_to_distinct_points_returns_the_points() {
        // With as many centroids as distinct points the seeded start already
        // is the optimum: every point is singular to its own centroid.
        let pts: Vec<DeltaPoint> = [(0.0, 0.0), (4.0, 1.0), (-3.0, 2.0), (7.0, -2.0)]
            .iter()
            .map(|&(z, dz)| DeltaPoint { z, dz })
            .collect();
        let mut data = pts.clone();
        data.push(pts[1]); // a duplicate must not add a distinct point
        let out = fcm_cluster(&data, 4, 2.0, 1e-5, 300, 3).unwrap();
        for p in &pts {
            assert!(
                out.centroids.centroids().iter().any(|c| c.dist(p) < 1e-9),
                "centroid missing for point ({}, {})",
                p.z,
                p.dz
            );
        }
        assert!((out.objective_trace.last().unwrap()).abs() < 1e-18);
    }

    #[test]
    fn clustering_finds_two_separated_blobs() {
        let mut pts = Vec::new();
        for i in 0..20 {
            let wiggle = (i % 5) as f64 * 0.01;
            pts.push(DeltaPoint { z: -5.0 + wiggle, dz: wiggle });
            pts.push(DeltaPoint { z: 5.0 - wiggle, dz: -wiggle });
        }
        let out = fcm_cluster(&pts, 2, 2.0, 1e-6, 300, 11).unwrap();
        let mut zs: Vec<f64> = out.centroids.centroids().iter().map(|c| c.z).collect();
        zs.sort_by(f64::total_cmp);
        assert!((zs[0] + 5.0).abs() < 0.1, "left blob centroid at {}", zs[0]);
        assert!((zs[1] - 5.0).abs() < 0.1, "right blob centroid at {}", zs[1]);
    }

    #[test]
    fn clustering_objective_never_increases() {
        for seed in 0..20u64 {
            let mut rng = crate::seed::rng(crate::seed::mix(seed, 0xC1));
            use rand::Rng;
            let pts: Vec<DeltaPoint> = (0..60)
                .map(|_| DeltaPoint { z: rng.gen_range(-3.0..3.0), dz: rng.gen_range(-1.0..1.0) })
                .collect();
            let p = 2 + (seed as usize % 5);
            let out = fcm_cluster(&pts, p, 2.0, 1e-7, 200, seed).unwrap();
            for w in out.objective_trace.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0),
                    "objective rose from {} to {} (seed {seed})",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn clustering_is_deterministic_in_the_seed() {
        let pts: Vec<DeltaPoint> =
            (0..30).map(|i| DeltaPoint { z: (i as f64 * 0.7).sin() * 3.0, dz: (i % 7) as f64 }).collect();
        let a = fcm_cluster(&pts, 3, 2.0, 1e-5, 300, 42).unwrap();
        let b = fcm_cluster(&pts, 3, 2.0, 1e-5, 300, 42).unwrap();
        assert_eq!(a.centroids, b.centroids);
        assert_eq!(a.objective_trace, b.objective_trace);
    }

    #[test]
    fn clustering_rejects_too_few_distinct_points() {
        let pts = alloc::vec![DeltaPoint { z: 1.0, dz: 0.0 }; 50];
        let err = fcm_cluster(&pts, 2, 2.0, 1e-5, 100, 0).unwrap_err();
        assert_eq!(err, Error::TooFewDistinctPoints { distinct: 1, requested: 2 });
    }

    #[test]
    fn fuzzify_produces_one_row_per_transition() {
        let s = LabeledSeries::new("A", alloc::vec![0.0, 1.0, 0.5, 2.0]).unwrap();
        let cs = set(&[(0.0, 0.0), (1.0, 1.0), (2.0, -1.0)], 2.0);
        let seq = fuzzify_series(&s, &cs);
        assert_eq!(seq.rows.len(), 3);
        for row in &seq.rows {
            assert_eq!(row.len(), 3);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
