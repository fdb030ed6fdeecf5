//! A toy single-photon BB84 protocol with intercept-resend eavesdropping,
//! sifting, sacrificial QBER estimation, an idealized error-correction
//! leak model, and Toeplitz privacy amplification.
//!
//! Everything the attacker ends up holding is classical: her measurement
//! outcomes recorded at transmission time, the public exchange, and the
//! disclosed error-correction parities. No loss, no channel noise, no
//! quantum memory. That restriction is what makes the final joint
//! distribution over (final key, attacker view) exactly computable for
//! small instances ([`exact_joint`]), which in turn lets every guessing
//! bound be checked against an exactly known criterion level.
//!
//! Qubit states live in the real plane: a state is an angle, and measuring
//! a state at angle `theta` in a basis whose outcome-0 eigenstate sits at
//! angle `beta` yields outcome 1 with probability `cos^2(theta - beta -
//! pi/2)`. The Breidbart basis is the `pi/8`-rotated one, the fixed basis
//! that maximizes the attacker's per-qubit bit success at `cos^2(pi/8)`.

mod exact;
mod sweep;
mod toeplitz;

pub use exact::exact_joint;
pub use sweep::{sweep_and_check, SweepGrid, SweepRow};
pub use toeplitz::{toeplitz_hash, toeplitz_rank};

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::probtools::{binary_entropy, Distribution};
use crate::{Error, Result};

/// Largest raw transmission count for which exact joint distributions are
/// computed. The enumeration is exponential in the sifted length.
pub const EXACT_MODE_CAP: usize = 24;

/// Measurement bases in the real plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Outcome-0 eigenstate at angle 0.
    Rectilinear,
    /// Outcome-0 eigenstate at angle pi/4.
    Diagonal,
    /// Outcome-0 eigenstate at angle pi/8.
    Breidbart,
}

impl Basis {
    pub fn angle(self) -> f64 {
        match self {
            Basis::Rectilinear => 0.0,
            Basis::Diagonal => FRAC_PI_4,
            Basis::Breidbart => FRAC_PI_8,
        }
    }
}

/// How the attacker chooses her measurement basis per intercepted qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EveStrategy {
    /// A fresh random BB84 basis per qubit.
    #[serde(rename = "random-bb84-basis")]
    RandomBb84,
    /// Always the rectilinear basis.
    #[serde(rename = "fixed-basis")]
    Fixed,
    /// Always the pi/8-rotated basis.
    #[serde(rename = "breidbart")]
    Breidbart,
}

impl std::str::FromStr for EveStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-bb84-basis" => Ok(Self::RandomBb84),
            "fixed-basis" => Ok(Self::Fixed),
            "breidbart" => Ok(Self::Breidbart),
            other => Err(Error::Domain(format!("unknown attacker strategy '{other}'"))),
        }
    }
}

/// Angle of the state encoding `bit` in `basis`.
pub fn state_angle(bit: bool, basis: Basis) -> f64 {
    basis.angle() + if bit { FRAC_PI_2 } else { 0.0 }
}

/// Probability of reading `outcome` when measuring the state at
/// `state_angle` in `basis`. Values that are 0, 1/2, or 1 up to rounding
/// are snapped exactly, so noiseless paths stay noiseless.
pub fn measurement_prob(state_angle: f64, basis: Basis, outcome: bool) -> f64 {
    let eigen = basis.angle() + if outcome { FRAC_PI_2 } else { 0.0 };
    let p = (state_angle - eigen).cos().powi(2);
    for snap in [0.0, 0.5, 1.0] {
        if (p - snap).abs() < 1e-12 {
            return snap;
        }
    }
    p
}

/// Protocol parameters. All randomness flows from `rng_seed`; identical
/// configs give bit-identical transcripts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Raw qubit transmissions.
    pub m_qubits: usize,
    /// Fraction of qubits the attacker intercepts, in [0, 1].
    pub intercept_fraction: f64,
    pub eve_strategy: EveStrategy,
    /// Fraction of the sifted positions sacrificed for QBER estimation.
    pub qber_sample_fraction: f64,
    /// Abort when the estimate strictly exceeds this; 1 disables aborting.
    pub qber_abort_threshold: f64,
    /// Error-correction inefficiency factor, at least 1.
    pub ec_efficiency: f64,
    /// Final key length after privacy amplification.
    pub final_key_bits: u32,
    pub rng_seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            m_qubits: 16,
            intercept_fraction: 0.0,
            eve_strategy: EveStrategy::RandomBb84,
            qber_sample_fraction: 0.25,
            qber_abort_threshold: 1.0,
            ec_efficiency: 1.16,
            final_key_bits: 4,
            rng_seed: 1,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_qubits == 0 {
            return Err(Error::Domain("need at least one transmission".into()));
        }
        if !(0.0..=1.0).contains(&self.intercept_fraction) {
            return Err(Error::Domain(format!(
                "intercept fraction {} outside [0, 1]",
                self.intercept_fraction
            )));
        }
        if !(self.qber_sample_fraction > 0.0 && self.qber_sample_fraction < 1.0) {
            return Err(Error::Domain(format!(
                "QBER sample fraction {} outside (0, 1)",
                self.qber_sample_fraction
            )));
        }
        if !(self.qber_abort_threshold > 0.0 && self.qber_abort_threshold <= 1.0) {
            return Err(Error::Domain(format!(
                "QBER abort threshold {} outside (0, 1]",
                self.qber_abort_threshold
            )));
        }
        if self.ec_efficiency < 1.0 {
            return Err(Error::Domain(format!(
                "error-correction efficiency {} below 1",
                self.ec_efficiency
            )));
        }
        if self.final_key_bits == 0 || self.final_key_bits > 30 {
            return Err(Error::Domain(format!(
                "final key length {} outside 1..=30",
                self.final_key_bits
            )));
        }
        Ok(())
    }
}

/// Full record of one protocol run.
///
/// The `ec_parity_masks` bitmasks act on the kept sifted positions in
/// ascending order; each disclosed parity is the GF(2) inner product of a
/// mask with the kept key string. Masks are materialized only when the
/// kept length fits in a machine word (always true in exact mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub alice_bits: Vec<bool>,
    pub alice_bases: Vec<Basis>,
    pub bob_bases: Vec<Basis>,
    pub bob_bits: Vec<bool>,
    pub eve_intercept_mask: Vec<bool>,
    pub eve_bases: Vec<Option<Basis>>,
    pub eve_outcomes: Vec<Option<bool>>,
    /// Positions where the bases matched.
    pub sift_mask: Vec<bool>,
    /// Sifted positions sacrificed (publicly compared) for QBER estimation.
    pub sampled_mask: Vec<bool>,
    pub qber_estimate: f64,
    /// Nominal error-correction disclosure, `ceil(f * s * H(qber))` bits.
    pub ec_leak_bits: usize,
    pub ec_parity_masks: Option<Vec<u64>>,
    pub toeplitz_seed: Vec<bool>,
    /// GF(2) rank of the realized Toeplitz map.
    pub toeplitz_rank: usize,
    /// Whether the compression left room for the disclosed parities
    /// (`final_key_bits <= kept - leak`); runs that fail this are reported,
    /// not rejected, since the bound checks hold for any compression.
    pub pa_margin_ok: bool,
    /// The hashed final key, low bit first.
    pub final_key: u64,
    /// Exact posterior over final keys given everything the attacker
    /// holds; filled in exact mode only.
    pub eve_view: Option<Distribution>,
}

impl ProtocolTranscript {
    pub fn sifted_positions(&self) -> Vec<usize> {
        (0..self.sift_mask.len())
            .filter(|&i| self.sift_mask[i])
            .collect()
    }

    /// Sifted positions that survived sacrifice, in ascending order; these
    /// carry the key material.
    pub fn kept_positions(&self) -> Vec<usize> {
        (0..self.sift_mask.len())
            .filter(|&i| self.sift_mask[i] && !self.sampled_mask[i])
            .collect()
    }

    pub fn kept_len(&self) -> usize {
        self.kept_positions().len()
    }
}

/// Outcome of a protocol run: the abort path is a value, not an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProtocolRun {
    Completed(Box<ProtocolTranscript>),
    Aborted { qber_estimate: f64 },
}

/// Idealized error-correction disclosure: `ceil(f * s * H(qber))` bits.
/// Accepts `qber` up to and including 1/2 (the maximum-leak point).
pub fn ec_leak_model(sifted_len: usize, qber: f64, efficiency: f64) -> Result<usize> {
    if !(0.0..=0.5).contains(&qber) {
        return Err(Error::Domain(format!("QBER {qber} outside [0, 1/2]")));
    }
    if efficiency < 1.0 {
        return Err(Error::Domain(format!("efficiency {efficiency} below 1")));
    }
    Ok((efficiency * sifted_len as f64 * binary_entropy(qber)?).ceil() as usize)
}

/// Execute one protocol instance.
pub fn run_protocol(cfg: &ProtocolConfig) -> Result<ProtocolRun> {
    cfg.validate()?;
    let m = cfg.m_qubits;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.rng_seed);

    let alice_bits: Vec<bool> = (0..m).map(|_| rng.random_bool(0.5)).collect();
    let random_basis = |rng: &mut ChaCha12Rng| {
        if rng.random_bool(0.5) {
            Basis::Diagonal
        } else {
            Basis::Rectilinear
        }
    };
    let alice_bases: Vec<Basis> = (0..m).map(|_| random_basis(&mut rng)).collect();
    let bob_bases: Vec<Basis> = (0..m).map(|_| random_basis(&mut rng)).collect();
    let eve_intercept_mask: Vec<bool> = (0..m)
        .map(|_| rng.random_bool(cfg.intercept_fraction))
        .collect();

    let mut eve_bases = vec![None; m];
    let mut eve_outcomes = vec![None; m];
    let mut bob_bits = Vec::with_capacity(m);
    for i in 0..m {
        let sent = state_angle(alice_bits[i], alice_bases[i]);
        let incident = if eve_intercept_mask[i] {
            let basis = match cfg.eve_strategy {
                EveStrategy::RandomBb84 => random_basis(&mut rng),
                EveStrategy::Fixed => Basis::Rectilinear,
                EveStrategy::Breidbart => Basis::Breidbart,
            };
            let outcome = rng.random_bool(measurement_prob(sent, basis, true));
            eve_bases[i] = Some(basis);
            eve_outcomes[i] = Some(outcome);
            state_angle(outcome, basis)
        } else {
            sent
        };
        bob_bits.push(rng.random_bool(measurement_prob(incident, bob_bases[i], true)));
    }

    let sift_mask: Vec<bool> = (0..m).map(|i| alice_bases[i] == bob_bases[i]).collect();
    let sifted: Vec<usize> = (0..m).filter(|&i| sift_mask[i]).collect();

    let sample_count = (cfg.qber_sample_fraction * sifted.len() as f64).round() as usize;
    let sample_count = sample_count.min(sifted.len());
    let mut sample_idx = rand::seq::index::sample(&mut rng, sifted.len(), sample_count).into_vec();
    sample_idx.sort_unstable();
    let mut sampled_mask = vec![false; m];
    for &si in &sample_idx {
        sampled_mask[sifted[si]] = true;
    }
    let errors = sample_idx
        .iter()
        .filter(|&&si| alice_bits[sifted[si]] != bob_bits[sifted[si]])
        .count();
    let qber_estimate = if sample_count == 0 {
        0.0
    } else {
        errors as f64 / sample_count as f64
    };
    if qber_estimate > cfg.qber_abort_threshold {
        return Ok(ProtocolRun::Aborted { qber_estimate });
    }

    let kept: Vec<usize> = sifted
        .iter()
        .copied()
        .filter(|&i| !sampled_mask[i])
        .collect();
    let s = kept.len();
    let ec_leak_bits = ec_leak_model(s, qber_estimate.min(0.5), cfg.ec_efficiency)?;

    // Parity masks over the kept positions; the disclosed values are the
    // masked parities of the kept key string.
    let ec_parity_masks = if s <= 64 {
        Some(
            (0..ec_leak_bits)
                .map(|_| {
                    (0..s)
                        .map(|i| (rng.random_bool(0.5) as u64) << i)
                        .fold(0u64, |acc, b| acc | b)
                })
                .collect::<Vec<u64>>(),
        )
    } else {
        None
    };

    let ell = cfg.final_key_bits;
    let toeplitz_seed: Vec<bool> = (0..s + ell as usize - 1)
        .map(|_| rng.random_bool(0.5))
        .collect();
    let kept_bits: Vec<bool> = kept.iter().map(|&i| alice_bits[i]).collect();
    let hashed = toeplitz_hash(&kept_bits, &toeplitz_seed, ell)?;
    let final_key = hashed
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, &b)| acc | ((b as u64) << j));

    let eve_view = if m <= EXACT_MODE_CAP {
        let cond = exact::EveConditioning {
            kept: &kept,
            alice_bases: &alice_bases,
            eve_intercept_mask: &eve_intercept_mask,
            eve_bases: &eve_bases,
            parity_masks: ec_parity_masks.as_deref().unwrap_or(&[]),
            toeplitz_seed: &toeplitz_seed,
            final_key_bits: ell,
        };
        let mut realized_outcomes = Vec::new();
        for &pos in &kept {
            if eve_intercept_mask[pos] {
                realized_outcomes
                    .push(eve_outcomes[pos].expect("intercepted positions carry outcomes"));
            }
        }
        Some(exact::eve_posterior(&cond, &kept_bits, &realized_outcomes)?)
    } else {
        None
    };

    Ok(ProtocolRun::Completed(Box::new(ProtocolTranscript {
        toeplitz_rank: toeplitz::toeplitz_rank(&toeplitz_seed, s, ell),
        pa_margin_ok: (ell as usize) <= s.saturating_sub(ec_leak_bits),
        alice_bits,
        alice_bases,
        bob_bases,
        bob_bits,
        eve_intercept_mask,
        eve_bases,
        eve_outcomes,
        sift_mask,
        sampled_mask,
        qber_estimate,
        ec_leak_bits,
        ec_parity_masks,
        toeplitz_seed,
        final_key,
        eve_view,
    })))
}
