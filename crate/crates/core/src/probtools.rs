//! Classical probability utilities: finite distributions, variational
//! distance, entropies and their inverses, and Markov-inequality
//! average-to-individual conversions.
//!
//! Everything here is in bits (base-2 logarithms). Distribution validation
//! uses an absolute tolerance of `1e-12` on the total mass; root finding
//! (the binary-entropy inverse) bisects to `1e-12` absolute.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance for distribution normalization checks.
pub const PROB_TOL: f64 = 1e-12;

/// A probability vector over a finite alphabet.
///
/// Entries are non-negative and sum to 1 within [`PROB_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "negative or non-finite entry {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Uniform distribution over `size` outcomes.
    pub fn uniform(size: usize) -> Self {
        Self {
            probs: vec![1.0 / size as f64; size],
        }
    }

    /// All mass on a single outcome.
    pub fn point_mass(size: usize, index: usize) -> Result<Self> {
        if index >= size || size == 0 {
            return Err(Error::Domain(format!(
                "point mass index {index} out of range for alphabet {size}"
            )));
        }
        let mut probs = vec![0.0; size];
        probs[index] = 1.0;
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

/// A joint distribution p(k, y) over an n-bit key K and a finite
/// side-information alphabet Y.
///
/// Rows are indexed by the key value `k` in `0..2^key_bits`, columns by the
/// outcome `y`. Bit `i` of a key value is the key's position-`i` bit
/// (position 0 is the least significant bit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    key_bits: u32,
    num_outcomes: usize,
    /// Row-major: `probs[k * num_outcomes + y]`.
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(key_bits: u32, num_outcomes: usize, probs: Vec<f64>) -> Result<Self> {
        if key_bits == 0 || key_bits > 30 {
            return Err(Error::Domain(format!("key_bits {key_bits} out of range")));
        }
        if num_outcomes == 0 {
            return Err(Error::InvalidDistribution("empty outcome alphabet".into()));
        }
        let num_keys = 1usize << key_bits;
        if probs.len() != num_keys * num_outcomes {
            return Err(Error::DimensionMismatch {
                expected: num_keys * num_outcomes,
                got: probs.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "negative or non-finite entry {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(Self {
            key_bits,
            num_outcomes,
            probs,
        })
    }

    /// Product joint `U(k) * q(y)`: uniform key, independent side information.
    pub fn uniform_independent(key_bits: u32, outcome: &Distribution) -> Result<Self> {
        let num_keys = 1usize << key_bits;
        let u = 1.0 / num_keys as f64;
        let probs = (0..num_keys)
            .flat_map(|_| outcome.probs().iter().map(move |q| u * q))
            .collect();
        Self::new(key_bits, outcome.len(), probs)
    }

    pub fn key_bits(&self) -> u32 {
        self.key_bits
    }

    pub fn num_keys(&self) -> usize {
        1usize << self.key_bits
    }

    pub fn num_outcomes(&self) -> usize {
        self.num_outcomes
    }

    pub fn prob(&self, k: usize, y: usize) -> f64 {
        self.probs[k * self.num_outcomes + y]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Marginal distribution of the key.
    pub fn key_marginal(&self) -> Distribution {
        let mut m = vec![0.0; self.num_keys()];
        for k in 0..self.num_keys() {
            m[k] = self.row(k).iter().sum();
        }
        normalize_marginal(&mut m);
        Distribution { probs: m }
    }

    /// Marginal distribution of the side information.
    pub fn outcome_marginal(&self) -> Distribution {
        let mut m = vec![0.0; self.num_outcomes];
        for k in 0..self.num_keys() {
            for (y, p) in self.row(k).iter().enumerate() {
                m[y] += p;
            }
        }
        normalize_marginal(&mut m);
        Distribution { probs: m }
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.probs[k * self.num_outcomes..(k + 1) * self.num_outcomes]
    }

    /// Variational distance from the ideal uniform-key product
    /// `U(k) * p(y)`: the classical form of the trace-distance criterion.
    pub fn distance_from_ideal(&self) -> f64 {
        let py = self.outcome_marginal();
        let u = 1.0 / self.num_keys() as f64;
        let mut acc = 0.0;
        for k in 0..self.num_keys() {
            for (y, p) in self.row(k).iter().enumerate() {
                acc += (p - u * py.prob(y)).abs();
            }
        }
        0.5 * acc
    }

    /// Variational distance from the independent product
    /// `p(k) * p(y)` of the joint's own marginals.
    pub fn distance_from_product(&self) -> f64 {
        let pk = self.key_marginal();
        let py = self.outcome_marginal();
        let mut acc = 0.0;
        for k in 0..self.num_keys() {
            for (y, p) in self.row(k).iter().enumerate() {
                acc += (p - pk.prob(k) * py.prob(y)).abs();
            }
        }
        0.5 * acc
    }

    /// Marginalize the key onto the given bit positions (strictly
    /// increasing, all `< key_bits`). Bit `j` of a marginal key value is bit
    /// `positions[j]` of the original value.
    pub fn marginalize_keys(&self, positions: &[usize]) -> Result<JointDistribution> {
        validate_positions(positions, self.key_bits)?;
        let sub_bits = positions.len() as u32;
        let mut probs = vec![0.0; (1usize << sub_bits) * self.num_outcomes];
        for k in 0..self.num_keys() {
            let sub = extract_bits(k, positions);
            let dst = &mut probs[sub * self.num_outcomes..(sub + 1) * self.num_outcomes];
            for (y, p) in self.row(k).iter().enumerate() {
                dst[y] += p;
            }
        }
        JointDistribution::new(sub_bits, self.num_outcomes, probs)
    }
}

/// Gather the bits of `k` at `positions` into a packed value; bit `j` of the
/// result is bit `positions[j]` of `k`.
pub(crate) fn extract_bits(k: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &pos)| acc | (((k >> pos) & 1) << j))
}

pub(crate) fn validate_positions(positions: &[usize], key_bits: u32) -> Result<()> {
    if positions.is_empty() {
        return Err(Error::InvalidSubset("empty position list".into()));
    }
    for w in positions.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidSubset(format!(
                "positions not strictly increasing: {} then {}",
                w[0], w[1]
            )));
        }
    }
    let max = *positions.last().unwrap();
    if max >= key_bits as usize {
        return Err(Error::InvalidSubset(format!(
            "position {max} out of range for {key_bits}-bit key"
        )));
    }
    Ok(())
}

/// Rescale a marginal so downstream `Distribution` invariants hold despite
/// accumulated rounding.
fn normalize_marginal(m: &mut [f64]) {
    let total: f64 = m.iter().sum();
    if total > 0.0 {
        for p in m.iter_mut() {
            *p /= total;
        }
    }
}

/// Variational (total variation) distance `v(P,Q) = 1/2 sum |P_i - Q_i|`.
pub fn variational_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    Ok(0.5
        * p.probs()
            .iter()
            .zip(q.probs())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Shannon entropy in bits, with `0 log 0 := 0`.
pub fn shannon_entropy(p: &Distribution) -> f64 {
    p.probs()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Binary entropy `H(x) = -x log2 x - (1-x) log2 (1-x)`, with
/// `H(0) = H(1) = 0` by continuity.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy argument {x}")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// The unique `x` in `[0, 1/2]` with `H(x) = h`, by bisection to `1e-12`
/// absolute.
pub fn binary_entropy_inverse(h: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::Domain(format!("binary entropy value {h}")));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    if h == 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid)? < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Result of converting an average guarantee into an individual one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovBound {
    /// Individual excess level.
    pub excess: f64,
    /// Probability with which the individual guarantee may fail (a union
    /// bound over the applications; vacuous when it reaches 1).
    pub failure_prob: f64,
}

/// Convert an average excess bound `eps` into an individual bound by `m`
/// applications of the Markov inequality with equal exponent splitting:
/// the individual excess is `eps^(1/(m+1))`, holding except with
/// probability `m * eps^(1/(m+1))`.
///
/// One application turns an average bound with excess `delta` into an
/// individual bound `delta^(1/2)` failing with probability `delta^(1/2)`;
/// `m` nested averages split the exponent into `m + 1` equal parts. The
/// equal split matches the cube-root conversion used for two applications;
/// for other `m` it is the natural extrapolation, so `m` is a parameter
/// rather than a constant.
pub fn markov_individual_bound(avg_excess: f64, num_averages: u32) -> Result<MarkovBound> {
    if !(avg_excess > 0.0 && avg_excess < 1.0) {
        return Err(Error::Domain(format!(
            "average excess {avg_excess} outside (0, 1)"
        )));
    }
    if num_averages == 0 {
        return Err(Error::Domain("need at least one Markov application".into()));
    }
    let excess = avg_excess.powf(1.0 / (num_averages as f64 + 1.0));
    Ok(MarkovBound {
        excess,
        failure_prob: num_averages as f64 * excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn variational_distance_identical_is_zero() {
        let p = dist(&[0.2, 0.3, 0.5]);
        assert_eq!(variational_distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn variational_distance_direct_evaluation() {
        let p = dist(&[0.7, 0.3]);
        let q = dist(&[0.2, 0.8]);
        assert!((variational_distance(&p, &q).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn variational_distance_size_mismatch() {
        let p = dist(&[0.5, 0.5]);
        let q = Distribution::uniform(3);
        assert!(matches!(
            variational_distance(&p, &q),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn entropy_uniform_and_point_mass() {
        assert!((shannon_entropy(&Distribution::uniform(8)) - 3.0).abs() < 1e-12);
        let point = Distribution::point_mass(4, 1).unwrap();
        assert_eq!(shannon_entropy(&point), 0.0);
    }

    #[test]
    fn entropy_closed_form() {
        let p = dist(&[0.25, 0.75]);
        assert!((shannon_entropy(&p) - 0.8112781244591329).abs() < 1e-12);
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.11).unwrap() - 0.499915958164528).abs() < 1e-12);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn binary_entropy_inverse_endpoints_and_roundtrip() {
        assert_eq!(binary_entropy_inverse(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy_inverse(1.0).unwrap(), 0.5);
        let x = binary_entropy_inverse(0.499915958164528).unwrap();
        assert!((x - 0.11).abs() < 1e-9);
        assert!(binary_entropy_inverse(1.5).is_err());
    }

    #[test]
    fn markov_bound_examples() {
        let b = markov_individual_bound(1e-9, 2).unwrap();
        assert!((b.excess - 1e-3).abs() < 1e-15);
        let b = markov_individual_bound(1e-6, 2).unwrap();
        assert!((b.excess - 1e-2).abs() < 1e-14);
        let b = markov_individual_bound(0.25, 1).unwrap();
        assert_eq!(b.excess, 0.5);
        assert_eq!(b.failure_prob, 0.5);
        assert!(markov_individual_bound(0.0, 1).is_err());
        assert!(markov_individual_bound(1.0, 1).is_err());
        assert!(markov_individual_bound(0.5, 0).is_err());
    }

    #[test]
    fn markov_bound_monotone() {
        let mut prev = 0.0;
        for eps in [1e-9, 1e-6, 1e-3, 0.1, 0.5] {
            let b = markov_individual_bound(eps, 2).unwrap();
            assert!(b.excess > prev);
            prev = b.excess;
        }
        let mut prev = 0.0;
        for m in 1..6 {
            let b = markov_individual_bound(1e-6, m).unwrap();
            assert!(b.excess > prev);
            prev = b.excess;
        }
    }

    #[test]
    fn joint_marginals_and_distances() {
        // Deterministic y = k on 2 bits.
        let n = 4;
        let mut probs = vec![0.0; n * n];
        for k in 0..n {
            probs[k * n + k] = 0.25;
        }
        let j = JointDistribution::new(2, n, probs).unwrap();
        assert_eq!(j.key_marginal().probs(), &[0.25; 4]);
        assert!((j.distance_from_ideal() - 0.75).abs() < 1e-12);
        assert!((j.distance_from_product() - 0.75).abs() < 1e-12);

        let q = dist(&[0.1, 0.9]);
        let prod = JointDistribution::uniform_independent(3, &q).unwrap();
        assert!(prod.distance_from_ideal() < 1e-15);
    }

    #[test]
    fn marginalize_keys_collapses_positions() {
        // 2-bit key, y trivial; p(k) = [0.1, 0.2, 0.3, 0.4].
        let j = JointDistribution::new(2, 1, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let m = j.marginalize_keys(&[1]).unwrap();
        // bit 1 = 0 for keys {0,1}, = 1 for keys {2,3}.
        assert!((m.prob(0, 0) - 0.3).abs() < 1e-15);
        assert!((m.prob(1, 0) - 0.7).abs() < 1e-15);
        assert!(j.marginalize_keys(&[2]).is_err());
        assert!(j.marginalize_keys(&[1, 1]).is_err());
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(Distribution::new(vec![]).is_err());
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(JointDistribution::new(1, 2, vec![0.5, 0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn serde_roundtrip_distribution() {
        let p = dist(&[0.25, 0.75]);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "[0.25,0.75]");
        let back: Distribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        // Deserialization still validates.
        assert!(serde_json::from_str::<Distribution>("[0.5,0.6]").is_err());
    }
}
