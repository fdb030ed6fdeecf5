//! Constructive separations between the trace-distance criterion and the
//! "failure probability" reading of it.
//!
//! Three constructions:
//!
//! - [`HalfBiased`]: a distribution at variational distance exactly `eps`
//!   from uniform in which the attacker's posterior deviates upward on half
//!   the outcomes, so the "information was gained" event has probability
//!   about 1/2 no matter how small `eps` is.
//! - [`kpa_spike_build`]: a joint with criterion level at most `eps` whose
//!   worst realized known-plaintext conditioning event leaves the attacker
//!   nearly certain of the target bits. The averaged bound still holds;
//!   the spike lives on an event of tiny probability.
//! - [`tightness_witness_eq6`]: a joint meeting the whole-key average bound
//!   `2^-n + eps` with equality, so the bound's order cannot be improved.

use serde::{Deserialize, Serialize};

use crate::adversary::{KpaSplit, SubsetSpec};
use crate::probtools::{Distribution, JointDistribution};
use crate::{Error, Result};

/// Distribution with `P_i = (1 + 2 eps)/N` on the first half of the indices
/// and `(1 - 2 eps)/N` on the rest, so `v(P, U) = eps` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfBiased {
    n_outcomes: usize,
    eps: f64,
}

impl HalfBiased {
    pub fn new(n_outcomes: usize, eps: f64) -> Result<Self> {
        if n_outcomes == 0 || n_outcomes % 2 != 0 {
            return Err(Error::Domain(format!(
                "half-biased construction needs an even alphabet, got {n_outcomes}"
            )));
        }
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::Domain(format!(
                "half-biased bias {eps} outside (0, 1/2)"
            )));
        }
        Ok(Self { n_outcomes, eps })
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The biased distribution itself.
    pub fn distribution(&self) -> Distribution {
        let n = self.n_outcomes as f64;
        let high = (1.0 + 2.0 * self.eps) / n;
        let low = (1.0 - 2.0 * self.eps) / n;
        let half = self.n_outcomes / 2;
        let mut probs = vec![high; half];
        probs.extend(vec![low; self.n_outcomes - half]);
        Distribution::new(probs).expect("construction is normalized")
    }

    /// Probability mass on the outcomes where the posterior exceeds `1/N`:
    /// `(1 + 2 eps)/2`. This is the probability that the attacker "gains
    /// information" relative to the ideal case, and it tends to 1/2 as
    /// `eps` tends to 0 instead of tracking `eps`. Under the broader
    /// reading where any deviation counts, the deviating mass is the whole
    /// distribution.
    pub fn leak_probability(&self) -> f64 {
        (1.0 + 2.0 * self.eps) / 2.0
    }
}

/// Convenience wrapper building the distribution directly.
pub fn half_biased_build(n_outcomes: usize, eps: f64) -> Result<Distribution> {
    Ok(HalfBiased::new(n_outcomes, eps)?.distribution())
}

/// A known-plaintext spike construction with its verification metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpaSpike {
    pub joint: JointDistribution,
    /// Known segment: the low `known_bits` positions; target: the rest.
    pub split: KpaSplit,
    /// Criterion level of the built joint, recomputed from the entries.
    pub achieved_d: f64,
    /// The side-information outcome that carries the spike.
    pub flag_outcome: usize,
    /// Requested worst-case conditional success.
    pub spike: f64,
}

/// Build a joint with criterion level at most `eps` whose worst-case
/// known-plaintext conditioning event has conditional success at least
/// `spike`.
///
/// The key prior stays exactly uniform (the criterion pins it there
/// anyway); instead a rare side-information outcome flags one known-segment
/// slice. Conditioned on the flag, the posterior on the target bits puts
/// mass `spike` on a single value, while the flag itself occurs with
/// probability of order `eps`, which is what keeps the criterion small and
/// the averaged bound intact. A spike at or below the uniform baseline
/// `2^-target_bits` is trivially satisfied by any joint.
pub fn kpa_spike_build(key_bits: u32, known_bits: u32, eps: f64, spike: f64) -> Result<KpaSpike> {
    if known_bits == 0 || known_bits >= key_bits {
        return Err(Error::Domain(format!(
            "known segment must be non-empty and smaller than the {key_bits}-bit key"
        )));
    }
    if key_bits > 20 {
        return Err(Error::Domain("spike construction capped at 20 key bits".into()));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("criterion budget {eps} outside (0, 1]")));
    }
    if !(spike > 0.0 && spike <= 1.0) {
        return Err(Error::Domain(format!("spike {spike} outside (0, 1]")));
    }

    let num_keys = 1usize << key_bits;
    let target_vals = 1usize << (key_bits - known_bits);
    let known_mask = (1usize << known_bits) - 1;

    // Flag emission probabilities: eta from the spiked key (known segment 0,
    // target 0), gamma from the other keys in that slice, chosen so the
    // posterior on the target given the flag is exactly `spike`.
    let gamma_per_eta = if spike >= 1.0 {
        0.0
    } else {
        (1.0 - spike) / (spike * (target_vals - 1) as f64)
    };
    let eta_cap = if gamma_per_eta > 1.0 {
        1.0 / gamma_per_eta
    } else {
        1.0
    };

    let build = |eta: f64| -> Result<JointDistribution> {
        let gamma = eta * gamma_per_eta;
        let u = 1.0 / num_keys as f64;
        let mut probs = vec![0.0; num_keys * 2];
        for k in 0..num_keys {
            let emit = if k & known_mask != 0 {
                0.0
            } else if k == 0 {
                eta
            } else {
                gamma
            };
            probs[k * 2] = u * (1.0 - emit);
            probs[k * 2 + 1] = u * emit;
        }
        JointDistribution::new(key_bits, 2, probs)
    };

    // d is linear in eta; start from the rough flag-mass estimate and
    // correct against the recomputed value until it sits at or below eps.
    let mut eta = (eps * spike * num_keys as f64 / 2.0).min(eta_cap);
    let mut joint = build(eta)?;
    let mut achieved = joint.distance_from_ideal();
    for _ in 0..16 {
        if achieved <= eps && eta > 0.0 {
            break;
        }
        eta = (eta * eps / achieved * (1.0 - 1e-9)).min(eta_cap);
        joint = build(eta)?;
        achieved = joint.distance_from_ideal();
    }
    if !(eta > 0.0) || achieved > eps {
        return Err(Error::Infeasible {
            detail: format!("cannot place a positive-mass spike under d <= {eps}"),
            max_spike: 1.0 / target_vals as f64,
        });
    }

    let split = KpaSplit::new(
        SubsetSpec::new((0..known_bits as usize).collect())?,
        SubsetSpec::new((known_bits as usize..key_bits as usize).collect())?,
    )?;
    Ok(KpaSpike {
        joint,
        split,
        achieved_d: achieved,
        flag_outcome: 1,
        spike,
    })
}

/// A joint meeting the whole-key average bound with equality: uniform key,
/// and with probability `t = eps / (1 - 2^-n)` the side information reveals
/// the key outright. The optimal guess is then exactly `2^-n + eps` at
/// criterion level exactly `eps`.
pub fn tightness_witness_eq6(key_bits: u32, eps: f64) -> Result<JointDistribution> {
    if key_bits == 0 || key_bits > 20 {
        return Err(Error::Domain(format!("key_bits {key_bits} out of range")));
    }
    let num_keys = 1usize << key_bits;
    let max_eps = 1.0 - 1.0 / num_keys as f64;
    if !(0.0..=max_eps).contains(&eps) {
        return Err(Error::Domain(format!(
            "eps {eps} outside [0, 1 - 2^-{key_bits}]"
        )));
    }
    let t = eps / max_eps;
    let u = 1.0 / num_keys as f64;
    // Outcome 0 reveals nothing; outcome k+1 reveals the key value k.
    let num_y = num_keys + 1;
    let mut probs = vec![0.0; num_keys * num_y];
    for k in 0..num_keys {
        probs[k * num_y] = u * (1.0 - t);
        probs[k * num_y + (k + 1)] = u * t;
    }
    JointDistribution::new(key_bits, num_y, probs)
}
