//! Independent reference implementations and seeded instance generators
//! for the verification suites.
//!
//! The brute-force functions here never call the estimators they check:
//! guessing probabilities are maximized by literally enumerating every
//! deterministic guessing function, and the Helstrom value is maximized by
//! grid search over projective qubit measurements. Keep instance sizes
//! small; the enumerations are exponential by design.

use num_complex::Complex64;
use rand::Rng;

use crate::adversary::{KpaSplit, SubsetSpec};
use crate::probtools::{Distribution, JointDistribution};
use crate::quantstates::{CQState, HermitianOperator};

/// Rescale weights into an exactly normalized probability vector, folding
/// the rounding residue into the largest entry.
fn normalize_exact(weights: &mut [f64]) {
    let total: f64 = weights.iter().sum();
    assert!(total > 0.0, "instance generator produced zero mass");
    for w in weights.iter_mut() {
        *w /= total;
    }
    let residue = 1.0 - weights.iter().sum::<f64>();
    let argmax = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    weights[argmax] += residue;
}

fn exp_weight<R: Rng>(rng: &mut R) -> f64 {
    -(1.0 - rng.random::<f64>()).ln()
}

/// Random joint distribution over an n-bit key and `num_outcomes` side
/// outcomes. Roughly 40% of draws zero out a fraction of cells so the
/// zero-probability code paths stay exercised.
pub fn random_joint<R: Rng>(rng: &mut R, key_bits: u32, num_outcomes: usize) -> JointDistribution {
    let cells = (1usize << key_bits) * num_outcomes;
    loop {
        let sparsify = rng.random_bool(0.4);
        let mut weights: Vec<f64> = (0..cells)
            .map(|_| {
                if sparsify && rng.random_bool(0.3) {
                    0.0
                } else {
                    exp_weight(rng)
                }
            })
            .collect();
        if weights.iter().sum::<f64>() <= 0.0 {
            continue;
        }
        normalize_exact(&mut weights);
        return JointDistribution::new(key_bits, num_outcomes, weights).unwrap();
    }
}

/// Random joint with an exactly uniform key marginal: each key row carries
/// mass `1/N` spread over a random conditional.
pub fn random_uniform_prior_joint<R: Rng>(
    rng: &mut R,
    key_bits: u32,
    num_outcomes: usize,
) -> JointDistribution {
    let num_keys = 1usize << key_bits;
    let u = 1.0 / num_keys as f64;
    let mut probs = Vec::with_capacity(num_keys * num_outcomes);
    for _ in 0..num_keys {
        let mut row: Vec<f64> = loop {
            let sparsify = rng.random_bool(0.3);
            let row: Vec<f64> = (0..num_outcomes)
                .map(|_| {
                    if sparsify && rng.random_bool(0.3) {
                        0.0
                    } else {
                        exp_weight(rng)
                    }
                })
                .collect();
            if row.iter().sum::<f64>() > 0.0 {
                break row;
            }
        };
        normalize_exact(&mut row);
        probs.extend(row.into_iter().map(|p| p * u));
    }
    JointDistribution::new(key_bits, num_outcomes, probs).unwrap()
}

/// Random non-empty subset of the key's bit positions.
pub fn random_subset<R: Rng>(rng: &mut R, key_bits: u32) -> SubsetSpec {
    loop {
        let positions: Vec<usize> = (0..key_bits as usize)
            .filter(|_| rng.random_bool(0.5))
            .collect();
        if !positions.is_empty() {
            return SubsetSpec::new(positions).unwrap();
        }
    }
}

/// Random disjoint (known, target) split with both sides non-empty.
pub fn random_split<R: Rng>(rng: &mut R, key_bits: u32) -> KpaSplit {
    loop {
        let mut known = Vec::new();
        let mut target = Vec::new();
        for pos in 0..key_bits as usize {
            match rng.random_range(0..3) {
                0 => known.push(pos),
                1 => target.push(pos),
                _ => {}
            }
        }
        if known.is_empty() || target.is_empty() {
            continue;
        }
        return KpaSplit::new(
            SubsetSpec::new(known).unwrap(),
            SubsetSpec::new(target).unwrap(),
        )
        .unwrap();
    }
}

/// Random density operator `G G^dagger / tr` from a complex square draw.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g: Vec<Complex64> = (0..dim * dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += g[i * dim + k] * g[j * dim + k].conj();
            }
            entries[i * dim + j] = acc;
        }
    }
    let trace: f64 = (0..dim).map(|i| entries[i * dim + i].re).sum();
    for e in entries.iter_mut() {
        *e /= trace;
    }
    HermitianOperator::new(dim, entries).expect("G G^dagger is Hermitian")
}

/// Random pure qubit state at Bloch angles `(theta, phi)`.
pub fn random_pure_qubit<R: Rng>(rng: &mut R) -> HermitianOperator {
    let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    HermitianOperator::pure_state(&[
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::new(0.0, phi).exp() * (theta / 2.0).sin(),
    ])
    .unwrap()
}

/// Random CQ state with a random key prior and random component densities.
pub fn random_cq_state<R: Rng>(rng: &mut R, key_bits: u32, dim: usize) -> CQState {
    let num_keys = 1usize << key_bits;
    let mut prior: Vec<f64> = (0..num_keys).map(|_| exp_weight(rng)).collect();
    normalize_exact(&mut prior);
    let components = prior
        .into_iter()
        .map(|p| (p, random_density(rng, dim)))
        .collect();
    CQState::new(key_bits, components).unwrap()
}

/// Odometer over all functions `domain -> codomain`; calls `visit` with
/// each assignment table.
fn for_each_function(domain: usize, codomain: usize, mut visit: impl FnMut(&[usize])) {
    assert!(
        (codomain as f64).powi(domain as i32) <= 2.0_f64.powi(28),
        "guessing-function space too large to enumerate"
    );
    let mut table = vec![0usize; domain];
    loop {
        visit(&table);
        let mut pos = 0;
        loop {
            if pos == domain {
                return;
            }
            table[pos] += 1;
            if table[pos] < codomain {
                break;
            }
            table[pos] = 0;
            pos += 1;
        }
    }
}

/// Maximum of `sum_y p(g(y), y)` over every deterministic guessing function
/// `g: Y -> K`.
pub fn bruteforce_guess_whole(joint: &JointDistribution) -> f64 {
    let num_y = joint.num_outcomes();
    let num_k = joint.num_keys();
    let mut best = 0.0_f64;
    for_each_function(num_y, num_k, |g| {
        let score: f64 = (0..num_y).map(|y| joint.prob(g[y], y)).sum();
        best = best.max(score);
    });
    best
}

/// Brute-force subset guessing: accumulates `p(k*, y)` by direct summation
/// over full keys, then enumerates every `g: Y -> K*`.
pub fn bruteforce_guess_subset(joint: &JointDistribution, subset: &SubsetSpec) -> f64 {
    let num_y = joint.num_outcomes();
    let sub_keys = 1usize << subset.len();
    let mut table = vec![0.0; sub_keys * num_y];
    for k in 0..joint.num_keys() {
        let ks = subset.extract(k);
        for y in 0..num_y {
            table[ks * num_y + y] += joint.prob(k, y);
        }
    }
    let mut best = 0.0_f64;
    for_each_function(num_y, sub_keys, |g| {
        let score: f64 = (0..num_y).map(|y| table[g[y] * num_y + y]).sum();
        best = best.max(score);
    });
    best
}

/// Brute-force KPA guessing: enumerates every conditional guessing function
/// `g: (K1, Y) -> K2*` and scores it against the full joint.
pub fn bruteforce_kpa_guess(joint: &JointDistribution, split: &KpaSplit) -> f64 {
    let num_y = joint.num_outcomes();
    let known_vals = 1usize << split.known.len();
    let target_vals = 1usize << split.target.len();
    let domain = known_vals * num_y;
    let mut best = 0.0_f64;
    for_each_function(domain, target_vals, |g| {
        let mut score = 0.0;
        for k in 0..joint.num_keys() {
            let k1 = split.known.extract(k);
            let k2 = split.target.extract(k);
            for y in 0..num_y {
                if g[k1 * num_y + y] == k2 {
                    score += joint.prob(k, y);
                }
            }
        }
        best = best.max(score);
    });
    best
}

/// Direct enumeration of `(true key, outcome, estimate)` triples for the
/// sequence-MAP bit error rate on a subset.
pub fn bruteforce_bit_error_rate(joint: &JointDistribution, subset: &SubsetSpec) -> f64 {
    let num_y = joint.num_outcomes();
    let bits = subset.len();
    let sub_keys = 1usize << bits;
    let mut table = vec![0.0; sub_keys * num_y];
    for k in 0..joint.num_keys() {
        let ks = subset.extract(k);
        for y in 0..num_y {
            table[ks * num_y + y] += joint.prob(k, y);
        }
    }
    let mut error_mass = 0.0;
    for y in 0..num_y {
        let mut estimate = 0;
        for ks in 1..sub_keys {
            if table[ks * num_y + y] > table[estimate * num_y + y] {
                estimate = ks;
            }
        }
        for ks in 0..sub_keys {
            let mut wrong = 0;
            for bit in 0..bits {
                if (ks >> bit) & 1 != (estimate >> bit) & 1 {
                    wrong += 1;
                }
            }
            error_mass += table[ks * num_y + y] * wrong as f64;
        }
    }
    error_mass / bits as f64
}

/// Success probability of the projective qubit measurement at Bloch angles
/// `(theta, phi)` for discriminating `(p0, rho0)` from `(p1, rho1)`, with
/// the better of the two outcome assignments.
fn projective_success(
    p0: f64,
    rho0: &HermitianOperator,
    p1: f64,
    rho1: &HermitianOperator,
    theta: f64,
    phi: f64,
) -> f64 {
    let psi = [
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::new(0.0, phi).exp() * (theta / 2.0).sin(),
    ];
    let expect = |rho: &HermitianOperator| -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                acc += psi[i].conj() * rho.entry(i, j) * psi[j];
            }
        }
        acc.re
    };
    let e0 = expect(rho0);
    let e1 = expect(rho1);
    let assign_a = p0 * e0 + p1 * (1.0 - e1);
    let assign_b = p0 * (1.0 - e0) + p1 * e1;
    assign_a.max(assign_b)
}

/// Maximize the binary decision probability over projective qubit
/// measurements by coarse grid search refined to `1e-4` angular resolution.
pub fn helstrom_projective_oracle(
    p0: f64,
    rho0: &HermitianOperator,
    p1: f64,
    rho1: &HermitianOperator,
) -> f64 {
    assert_eq!(rho0.dim(), 2, "projective oracle is qubit-only");
    assert_eq!(rho1.dim(), 2, "projective oracle is qubit-only");
    let pi = std::f64::consts::PI;
    // Constant decision rules (mapping both outcomes to one guess) are
    // projective strategies too, and they are optimal whenever the
    // weighted difference of the states is sign-definite.
    let mut best = (p0.max(p1), 0.0_f64, 0.0_f64); // (value, theta, phi)
    for it in 0..=64 {
        let theta = pi * it as f64 / 64.0;
        for ip in 0..128 {
            let phi = std::f64::consts::TAU * ip as f64 / 128.0;
            let v = projective_success(p0, rho0, p1, rho1, theta, phi);
            if v > best.0 {
                best = (v, theta, phi);
            }
        }
    }
    let mut step = pi / 64.0;
    while step > 1e-4 {
        step /= 8.0;
        let center = best;
        for dt in -8..=8 {
            let theta = center.1 + step * dt as f64;
            for dp in -8..=8 {
                let phi = center.2 + step * dp as f64;
                let v = projective_success(p0, rho0, p1, rho1, theta, phi);
                if v > best.0 {
                    best = (v, theta, phi);
                }
            }
        }
    }
    best.0
}

/// One empirical Markov trial: a random non-negative variable on a finite
/// support with mean at most `eps`, and the exactly measured tail mass
/// `Pr[X >= sqrt(eps)]` against the bound `sqrt(eps)`.
#[derive(Debug, Clone, Copy)]
pub struct MarkovTrial {
    pub eps: f64,
    pub tail_prob: f64,
    pub bound: f64,
}

/// Sample a random finite-support variable with `E[X] <= eps` and measure
/// its tail at `sqrt(eps)` exactly.
pub fn markov_empirical_trial<R: Rng>(rng: &mut R, eps: f64) -> MarkovTrial {
    let support = rng.random_range(2..=16);
    let mut probs: Vec<f64> = (0..support).map(|_| exp_weight(rng)).collect();
    normalize_exact(&mut probs);
    let values: Vec<f64> = (0..support).map(|_| rng.random::<f64>()).collect();
    let mean: f64 = probs.iter().zip(&values).map(|(p, x)| p * x).sum();
    // Scale so the mean lands at a random fraction of eps.
    let scale = if mean > 0.0 {
        eps * rng.random_range(0.1..=1.0) / mean
    } else {
        0.0
    };
    let threshold = eps.sqrt();
    let tail_prob = probs
        .iter()
        .zip(&values)
        .filter(|(_, x)| **x * scale >= threshold)
        .map(|(p, _)| p)
        .sum();
    MarkovTrial {
        eps,
        tail_prob,
        bound: threshold,
    }
}

/// Distribution over key values encoded by a guessing table, for tests that
/// need an explicit posterior object.
pub fn posterior_from_column(joint: &JointDistribution, y: usize) -> Distribution {
    crate::adversary::key_posterior(joint, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn generators_produce_valid_instances() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..20 {
            let j = random_joint(&mut rng, 3, 5);
            assert_eq!(j.num_keys(), 8);
            let u = random_uniform_prior_joint(&mut rng, 2, 4);
            for p in u.key_marginal().probs() {
                assert!((p - 0.25).abs() < 1e-12);
            }
            let split = random_split(&mut rng, 4);
            split.validate_for(4).unwrap();
            let rho = random_density(&mut rng, 3);
            rho.validate_density().unwrap();
            random_pure_qubit(&mut rng).validate_density().unwrap();
        }
    }

    #[test]
    fn markov_trials_respect_the_bound() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..500 {
            let eps = 10f64.powf(rng.random_range(-6.0..-0.5));
            let t = markov_empirical_trial(&mut rng, eps);
            assert!(t.tail_prob <= t.bound + 1e-12);
        }
    }

    #[test]
    fn function_enumeration_counts() {
        let mut count = 0;
        for_each_function(3, 4, |_| count += 1);
        assert_eq!(count, 64);
    }
}
