//! Quantitative security analysis for QKD-generated keys.
//!
//! The crate answers one question from several directions: given that a
//! generated key is close to ideal (uniform and independent of the
//! eavesdropper) under the trace-distance criterion `d`, what can the
//! eavesdropper actually achieve? It provides:
//!
//! - [`probtools`]: finite distributions, variational distance, entropies
//!   and their inverses, and Markov-inequality average-to-individual
//!   conversions.
//! - [`quantstates`]: small dense Hermitian operators, classical-quantum
//!   states, the criterion `d` itself, and the Helstrom binary decision
//!   probability.
//! - [`adversary`]: optimal guessing probabilities over whole keys,
//!   subsets, and known-plaintext splits, plus bit error rates and the
//!   posterior-decomposition identity behind the subset bounds.
//! - [`bounds`]: the security guarantees derivable from `d <= eps`, their
//!   inversions, and case-study reports for published parameter regimes.
//! - [`counterexamples`]: constructions separating `d` from the "failure
//!   probability" reading of the criterion.
//! - [`bb84sim`]: a toy single-photon BB84 protocol whose final joint
//!   distribution (key, eavesdropper view) is computed exactly for small
//!   instances, tying the simulator to every bound.
//! - [`oracles`]: independent brute-force reference implementations and
//!   seeded random-instance generators used by the verification suites.
//!
//! All operations are pure functions on immutable values and are safe to
//! call concurrently.

pub mod adversary;
pub mod bb84sim;
pub mod bounds;
pub mod counterexamples;
mod error;
pub mod oracles;
pub mod probtools;
pub mod quantstates;

pub use error::{Error, Result};
