//! The eavesdropper's optimal attack quantities on classical side
//! information: sequence guessing probabilities for whole keys, subsets,
//! and known-plaintext splits, bit error rates, and the posterior
//! decomposition identity used to prove the subset bounds.
//!
//! All maximum-a-posteriori estimators break ties toward the lowest key
//! index; ties never change a success probability, so the choice only pins
//! down the reported estimates. Conditioning events with zero probability
//! contribute zero and are skipped.

use serde::{Deserialize, Serialize};

use crate::probtools::{extract_bits, validate_positions, Distribution, JointDistribution};
use crate::{Error, Result};

/// A non-empty set of bit positions inside an n-bit key, strictly
/// increasing. Position 0 is the least significant bit of the key value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSpec {
    positions: Vec<usize>,
}

impl SubsetSpec {
    /// Build from positions in any order; duplicates are rejected.
    pub fn new(mut positions: Vec<usize>) -> Result<Self> {
        positions.sort_unstable();
        validate_positions(&positions, u32::MAX)?;
        Ok(Self { positions })
    }

    /// All positions of an `n`-bit key.
    pub fn full(key_bits: u32) -> Self {
        Self {
            positions: (0..key_bits as usize).collect(),
        }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn validate_for(&self, key_bits: u32) -> Result<()> {
        validate_positions(&self.positions, key_bits)
    }

    /// The subset's packed value inside the key value `k`.
    pub fn extract(&self, k: usize) -> usize {
        extract_bits(k, &self.positions)
    }

    fn disjoint_from(&self, other: &SubsetSpec) -> bool {
        self.positions.iter().all(|p| !other.positions.contains(p))
    }
}

/// A known-plaintext split: the positions the attacker knows exactly and
/// the disjoint positions she is trying to estimate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KpaSplit {
    pub known: SubsetSpec,
    pub target: SubsetSpec,
}

impl KpaSplit {
    pub fn new(known: SubsetSpec, target: SubsetSpec) -> Result<Self> {
        if !known.disjoint_from(&target) {
            return Err(Error::InvalidSubset(
                "known and target positions overlap".into(),
            ));
        }
        Ok(Self { known, target })
    }

    pub fn validate_for(&self, key_bits: u32) -> Result<()> {
        self.known.validate_for(key_bits)?;
        self.target.validate_for(key_bits)
    }
}

/// Optimal probability of guessing the whole key from the side information:
/// `sum_y max_k p(k, y)` (MAP success averaged over Y).
pub fn optimal_guess_whole(joint: &JointDistribution) -> f64 {
    let mut acc = 0.0;
    for y in 0..joint.num_outcomes() {
        let mut best = 0.0_f64;
        for k in 0..joint.num_keys() {
            best = best.max(joint.prob(k, y));
        }
        acc += best;
    }
    acc
}

/// Optimal probability of guessing the key restricted to `subset`:
/// marginalize onto the subset bits, then MAP.
pub fn optimal_guess_subset(joint: &JointDistribution, subset: &SubsetSpec) -> Result<f64> {
    subset.validate_for(joint.key_bits())?;
    let marginal = joint.marginalize_keys(subset.positions())?;
    Ok(optimal_guess_whole(&marginal))
}

/// Accumulate `p(k2, k1, y)` tables for a split: index
/// `[k1 * (T * num_y) + k2 * num_y + y]` with `T = 2^|target|`.
fn split_table(joint: &JointDistribution, split: &KpaSplit) -> Vec<f64> {
    let num_y = joint.num_outcomes();
    let t = 1usize << split.target.len();
    let a = 1usize << split.known.len();
    let mut table = vec![0.0; a * t * num_y];
    for k in 0..joint.num_keys() {
        let k1 = split.known.extract(k);
        let k2 = split.target.extract(k);
        let base = (k1 * t + k2) * num_y;
        for y in 0..num_y {
            table[base + y] += joint.prob(k, y);
        }
    }
    table
}

/// Average success probability of guessing the target bits when the known
/// bits and the side information are both available:
/// `sum_{k1, y} max_{k2} p(k2, k1, y)`.
pub fn kpa_guess(joint: &JointDistribution, split: &KpaSplit) -> Result<f64> {
    split.validate_for(joint.key_bits())?;
    let num_y = joint.num_outcomes();
    let t = 1usize << split.target.len();
    let a = 1usize << split.known.len();
    let table = split_table(joint, split);
    let mut acc = 0.0;
    for k1 in 0..a {
        for y in 0..num_y {
            let mut best = 0.0_f64;
            for k2 in 0..t {
                best = best.max(table[(k1 * t + k2) * num_y + y]);
            }
            acc += best;
        }
    }
    Ok(acc)
}

/// The success probability of guessing the target bits for one specific
/// known-segment value, averaged over the side information:
/// `sum_y p(y|k1) max_{k2} p(k2|y, k1)`. Zero-probability `k1` gives 0.
pub fn kpa_guess_given(
    joint: &JointDistribution,
    split: &KpaSplit,
    known_value: usize,
) -> Result<f64> {
    split.validate_for(joint.key_bits())?;
    let a = 1usize << split.known.len();
    if known_value >= a {
        return Err(Error::Domain(format!(
            "known-segment value {known_value} out of range"
        )));
    }
    let num_y = joint.num_outcomes();
    let t = 1usize << split.target.len();
    let table = split_table(joint, split);
    let mut joint_mass = 0.0;
    let mut p_k1 = 0.0;
    for y in 0..num_y {
        let mut best = 0.0_f64;
        for k2 in 0..t {
            let p = table[(known_value * t + k2) * num_y + y];
            best = best.max(p);
            p_k1 += p;
        }
        joint_mass += best;
    }
    if p_k1 == 0.0 {
        return Ok(0.0);
    }
    Ok(joint_mass / p_k1)
}

/// The worst realized conditioning event for the key owner: over all pairs
/// `(k1, y)` with positive probability, the largest posterior the attacker
/// assigns to a single target value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseKpa {
    /// Known-segment value of the maximizing event.
    pub known_value: usize,
    /// Side-information outcome of the maximizing event.
    pub outcome: usize,
    /// Probability of the event itself.
    pub event_prob: f64,
    /// The attacker's success probability on the target given the event.
    pub prob: f64,
}

/// Maximize the attacker's conditional success on the target over realized
/// conditioning events `(k1, y)`.
///
/// The average of these conditionals obeys the `2^-|target| + d` bound, but
/// the maximum does not: it can sit near 1 on an event of arbitrarily small
/// probability without pushing `d` up. This is the quantity the spike
/// construction drives to 1. Ties resolve to the lowest `(k1, y)` pair.
pub fn kpa_guess_worst_case(joint: &JointDistribution, split: &KpaSplit) -> Result<WorstCaseKpa> {
    split.validate_for(joint.key_bits())?;
    let num_y = joint.num_outcomes();
    let t = 1usize << split.target.len();
    let a = 1usize << split.known.len();
    let table = split_table(joint, split);
    let mut worst: Option<WorstCaseKpa> = None;
    for k1 in 0..a {
        for y in 0..num_y {
            let mut best = 0.0_f64;
            let mut mass = 0.0_f64;
            for k2 in 0..t {
                let p = table[(k1 * t + k2) * num_y + y];
                best = best.max(p);
                mass += p;
            }
            if mass == 0.0 {
                continue;
            }
            let cond = best / mass;
            if worst.as_ref().is_none_or(|w| cond > w.prob) {
                worst = Some(WorstCaseKpa {
                    known_value: k1,
                    outcome: y,
                    event_prob: mass,
                    prob: cond,
                });
            }
        }
    }
    worst.ok_or_else(|| Error::InvalidDistribution("joint carries no mass".into()))
}

/// Which estimate the attacker forms before bit errors are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EveEstimator {
    /// One MAP estimate of the whole subset string per outcome.
    SequenceMap,
    /// An independent MAP decision per bit position; never worse for the
    /// attacker's bit error rate than the sequence estimate.
    PerBitMap,
}

/// Per-bit error probability of the attacker's estimate of the subset,
/// with the sequence-MAP estimator.
pub fn bit_error_rate(joint: &JointDistribution, subset: &SubsetSpec) -> Result<f64> {
    bit_error_rate_with(joint, subset, EveEstimator::SequenceMap)
}

/// Per-bit error probability with an explicit estimator choice:
/// `(1/|subset|) sum_i Pr[estimated bit i != true bit i]`.
pub fn bit_error_rate_with(
    joint: &JointDistribution,
    subset: &SubsetSpec,
    estimator: EveEstimator,
) -> Result<f64> {
    subset.validate_for(joint.key_bits())?;
    let marginal = joint.marginalize_keys(subset.positions())?;
    let bits = subset.len();
    let num_y = marginal.num_outcomes();
    let num_k = marginal.num_keys();
    let mut error_mass = 0.0;
    for y in 0..num_y {
        let estimate = match estimator {
            EveEstimator::SequenceMap => {
                let mut best_k = 0;
                let mut best_p = f64::NEG_INFINITY;
                for k in 0..num_k {
                    let p = marginal.prob(k, y);
                    if p > best_p {
                        best_p = p;
                        best_k = k;
                    }
                }
                best_k
            }
            EveEstimator::PerBitMap => {
                let mut est = 0usize;
                for bit in 0..bits {
                    let mut mass1 = 0.0;
                    let mut mass0 = 0.0;
                    for k in 0..num_k {
                        if (k >> bit) & 1 == 1 {
                            mass1 += marginal.prob(k, y);
                        } else {
                            mass0 += marginal.prob(k, y);
                        }
                    }
                    if mass1 > mass0 {
                        est |= 1 << bit;
                    }
                }
                est
            }
        };
        for k in 0..num_k {
            let wrong_bits = (k ^ estimate).count_ones() as f64;
            error_mass += marginal.prob(k, y) * wrong_bits;
        }
    }
    Ok(error_mass / bits as f64)
}

/// Per-outcome deviations of the key posterior from the key prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDecomposition {
    /// `eps_y = v(p(.|y), p(.))` for each outcome; 0 where `p(y) = 0`.
    pub epsilons: Vec<f64>,
    /// `sum_y p(y) eps_y`; equals the variational distance of the joint
    /// from the product of its marginals, and for a uniform key prior it
    /// equals the classical trace-distance criterion.
    pub mean: f64,
}

/// Decompose the joint's deviation from independence into per-outcome
/// posterior deviations. The identity `sum_y p(y) eps_y = v(joint,
/// prior x marginal)` holds exactly; it is the step that extends the
/// optimal decision region over all outcomes in the subset-bound proofs.
pub fn posterior_decomposition(joint: &JointDistribution) -> PosteriorDecomposition {
    let prior = joint.key_marginal();
    let py = joint.outcome_marginal();
    let num_y = joint.num_outcomes();
    let mut epsilons = vec![0.0; num_y];
    let mut mean = 0.0;
    for (y, eps) in epsilons.iter_mut().enumerate() {
        let mass = py.prob(y);
        if mass == 0.0 {
            continue;
        }
        let mut dev = 0.0;
        for k in 0..joint.num_keys() {
            dev += (joint.prob(k, y) / mass - prior.prob(k)).abs();
        }
        *eps = 0.5 * dev;
        mean += mass * *eps;
    }
    PosteriorDecomposition { epsilons, mean }
}

/// Posterior distribution over key values given one outcome; uniform when
/// the outcome has zero probability.
pub fn key_posterior(joint: &JointDistribution, y: usize) -> Distribution {
    let num_k = joint.num_keys();
    let mass: f64 = (0..num_k).map(|k| joint.prob(k, y)).sum();
    if mass == 0.0 {
        return Distribution::uniform(num_k);
    }
    Distribution::new((0..num_k).map(|k| joint.prob(k, y) / mass).collect())
        .expect("normalized posterior")
}
