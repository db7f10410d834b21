//! State-based time series classification.
//!
//! This crate implements two families of generative sequence models —
//! Gaussian hidden Markov models and fuzzy cognitive maps — together with the
//! machinery needed to turn either into a whole-series classifier:
//!
//! * [`dataset`]: labeled series, z-normalization, stratified k-fold splits.
//! * [`fuzzy`]: delta embedding and fuzzy c-means clustering, which map a
//!   scalar series onto concept activation sequences.
//! * [`fcm`]: fuzzy cognitive map reasoning and its one-step prediction error.
//! * [`de`]: differential evolution, used to learn FCM weight matrices.
//! * [`hmm`]: Gaussian HMMs with spherical/diagonal/full covariances, log-space
//!   forward scoring and multi-sequence Baum-Welch training.
//! * [`classify`]: model banks in two granularities — one model per class
//!   ("1C") and one model per training series ("NN", nearest neighbour by
//!   model score).
//! * [`eval`]: stratified cross-validated hyperparameter selection, test
//!   evaluation, Spearman rank comparison and timing summaries.
//!
//! Everything is deterministic given a seed: random draws go through a
//! counter-based seed derivation ([`seed::mix`]) feeding ChaCha8 streams, so
//! results are reproducible across runs and thread counts.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature adds wall-clock timing of fits, and `parallel` adds rayon-based
//! parallelism over model banks and hyperparameter grids.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod classify;
pub mod dataset;
pub mod de;
pub mod error;
pub mod eval;
pub mod fcm;
pub mod fuzzy;
pub mod hmm;
mod math;
pub mod seed;

pub use error::{Error, Result};
