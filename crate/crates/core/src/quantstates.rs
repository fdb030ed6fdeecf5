//! Small dense Hermitian operator algebra and classical-quantum states.
//!
//! Holds the trace-distance criterion
//! `d = 1/2 sum_k || p(k) rho_E^k - (1/N) rho_E ||_1` together with the
//! block-diagonal joint-operator form it is equivalent to, and the Helstrom
//! binary decision probability.
//!
//! Eigenvalues come from cyclic Jacobi rotations; dimensions here are tiny
//! (at most a few dozen), so no external solver is involved. Complex scalars
//! are pairs of 64-bit reals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::probtools::{JointDistribution, PROB_TOL};
use crate::{Error, Result};

/// Entrywise tolerance for hermiticity and density-operator checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Off-diagonal Frobenius-norm threshold at which the Jacobi sweep stops.
const JACOBI_TOL: f64 = 1e-12;

/// A dense Hermitian matrix, validated at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianOperator {
    dim: usize,
    /// Row-major `dim * dim` entries.
    entries: Vec<Complex64>,
}

impl HermitianOperator {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("zero-dimensional operator".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let mut max_dev = 0.0_f64;
        for i in 0..dim {
            for j in i..dim {
                let dev = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                max_dev = max_dev.max(dev);
            }
        }
        if max_dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(max_dev));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, &x) in diag.iter().enumerate() {
            entries[i * dim + i] = Complex64::new(x, 0.0);
        }
        Self { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; dim])
    }

    /// The maximally mixed density operator `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0 / dim as f64; dim])
    }

    /// Rank-one projector `|psi><psi|` onto the normalized amplitude vector.
    pub fn pure_state(amplitudes: &[Complex64]) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(Error::Domain("zero state vector".into()));
        }
        let dim = amplitudes.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in amplitudes {
            for b in amplitudes {
                entries.push(a * b.conj() / norm_sq);
            }
        }
        Ok(Self { dim, entries })
    }

    /// Real-plane qubit state `(cos t, sin t)` as a density operator.
    pub fn qubit_at_angle(theta: f64) -> Self {
        Self::pure_state(&[
            Complex64::new(theta.cos(), 0.0),
            Complex64::new(theta.sin(), 0.0),
        ])
        .expect("nonzero vector")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Real part of the trace (the imaginary part vanishes for Hermitian
    /// operators up to the construction tolerance).
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entry(i, i).re).sum()
    }

    /// Eigenvalues by cyclic Jacobi rotations, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut work = self.entries.clone();
        // Work on the exact Hermitian part so the rotations see A = A^dagger.
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let avg = 0.5 * (work[i * self.dim + j] + work[j * self.dim + i].conj());
                work[i * self.dim + j] = avg;
                work[j * self.dim + i] = avg.conj();
            }
            let d = work[i * self.dim + i].re;
            work[i * self.dim + i] = Complex64::new(d, 0.0);
        }
        jacobi_eigenvalues(self.dim, &mut work)
    }

    /// Validate positive semidefiniteness and unit trace.
    pub fn validate_density(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > HERMITIAN_TOL {
            return Err(Error::NotDensity(format!("trace {tr}, not 1")));
        }
        let min = self
            .eigenvalues()
            .first()
            .copied()
            .unwrap_or(f64::NEG_INFINITY);
        if min < -HERMITIAN_TOL {
            return Err(Error::NotDensity(format!("minimum eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// Entrywise `fa * a + fb * b` for equal-dimension operators.
    pub fn linear_combination(fa: f64, a: &Self, fb: f64, b: &Self) -> Result<Self> {
        if a.dim != b.dim {
            return Err(Error::DimensionMismatch {
                expected: a.dim,
                got: b.dim,
            });
        }
        let entries = a
            .entries
            .iter()
            .zip(&b.entries)
            .map(|(x, y)| fa * x + fb * y)
            .collect();
        Ok(Self {
            dim: a.dim,
            entries,
        })
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let dim = da * db;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..da {
            for j in 0..da {
                let a = self.entry(i, j);
                for k in 0..db {
                    for l in 0..db {
                        entries[(i * db + k) * dim + (j * db + l)] = a * other.entry(k, l);
                    }
                }
            }
        }
        Self { dim, entries }
    }
}

/// Trace norm: the sum of the absolute eigenvalues.
pub fn trace_norm(a: &HermitianOperator) -> f64 {
    a.eigenvalues().iter().map(|l| l.abs()).sum()
}

/// Cyclic Jacobi eigenvalue iteration for a Hermitian matrix held in `work`
/// (row-major, mutated in place). Each rotation first strips the phase of
/// the pivot entry, then applies a real Givens rotation that zeroes it.
fn jacobi_eigenvalues(dim: usize, work: &mut [Complex64]) -> Vec<f64> {
    let idx = |i: usize, j: usize| i * dim + j;
    let scale: f64 = work
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(1.0);
    let tol = JACOBI_TOL * scale;

    for _sweep in 0..100 {
        let off: f64 = (0..dim)
            .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| work[idx(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off < tol {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let beta = work[idx(p, q)];
                let r = beta.norm();
                if r == 0.0 {
                    continue;
                }
                let u = beta / r;
                let alpha = work[idx(p, p)].re;
                let gamma = work[idx(q, q)].re;
                let tau = (gamma - alpha) / (2.0 * r);
                let sgn = if tau >= 0.0 { 1.0 } else { -1.0 };
                let t = sgn / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..dim {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = work[idx(k, p)];
                    let akq = work[idx(k, q)];
                    let new_kp = c * akp - s * (u.conj() * akq);
                    let new_kq = s * akp + c * (u.conj() * akq);
                    work[idx(k, p)] = new_kp;
                    work[idx(p, k)] = new_kp.conj();
                    work[idx(k, q)] = new_kq;
                    work[idx(q, k)] = new_kq.conj();
                }
                let app = c * c * alpha - 2.0 * c * s * r + s * s * gamma;
                let aqq = s * s * alpha + 2.0 * c * s * r + c * c * gamma;
                work[idx(p, p)] = Complex64::new(app, 0.0);
                work[idx(q, q)] = Complex64::new(aqq, 0.0);
                work[idx(p, q)] = Complex64::new(0.0, 0.0);
                work[idx(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }

    let mut eigs: Vec<f64> = (0..dim).map(|i| work[idx(i, i)].re).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// A classical-quantum state: the key value `k` weighted by `p(k)` paired
/// with the eavesdropper's state `rho_E^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CQState {
    key_bits: u32,
    components: Vec<(f64, HermitianOperator)>,
}

impl CQState {
    pub fn new(key_bits: u32, components: Vec<(f64, HermitianOperator)>) -> Result<Self> {
        let num_keys = 1usize << key_bits;
        if components.len() != num_keys {
            return Err(Error::DimensionMismatch {
                expected: num_keys,
                got: components.len(),
            });
        }
        let dim = components[0].1.dim();
        let mut total = 0.0;
        for (p, rho) in &components {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "negative component weight {p}"
                )));
            }
            total += p;
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: rho.dim(),
                });
            }
            rho.validate_density()?;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "component weights sum to {total}, not 1"
            )));
        }
        Ok(Self {
            key_bits,
            components,
        })
    }

    pub fn key_bits(&self) -> u32 {
        self.key_bits
    }

    pub fn num_keys(&self) -> usize {
        1usize << self.key_bits
    }

    /// Dimension of each component state.
    pub fn dim(&self) -> usize {
        self.components[0].1.dim()
    }

    pub fn components(&self) -> &[(f64, HermitianOperator)] {
        &self.components
    }

    /// The eavesdropper's average state `rho_E = sum_k p(k) rho_E^k`.
    pub fn average_state(&self) -> HermitianOperator {
        let dim = self.dim();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (p, rho) in &self.components {
            for (e, x) in entries.iter_mut().zip(rho.entries()) {
                *e += p * x;
            }
        }
        HermitianOperator { dim, entries }
    }

    /// The full joint operator `rho_KE = sum_k p(k) |k><k| (x) rho_E^k` on
    /// the `N * dim`-dimensional product space.
    pub fn joint_operator(&self) -> HermitianOperator {
        let n = self.num_keys();
        let dim = self.dim();
        let full = n * dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); full * full];
        for (k, (p, rho)) in self.components.iter().enumerate() {
            for i in 0..dim {
                for j in 0..dim {
                    entries[(k * dim + i) * full + (k * dim + j)] = p * rho.entry(i, j);
                }
            }
        }
        HermitianOperator { dim: full, entries }
    }

    /// The ideal operator `rho_U (x) rho_E` on the same product space.
    pub fn ideal_operator(&self) -> HermitianOperator {
        let n = self.num_keys();
        let uniform = HermitianOperator::maximally_mixed(n);
        uniform.kron(&self.average_state())
    }
}

/// The trace-distance criterion
/// `d = 1/2 sum_k || p(k) rho_E^k - (1/N) rho_E ||_1`.
///
/// Equals half the trace norm of `rho_KE - rho_U (x) rho_E` on the product
/// space (the joint operator is block diagonal, one block per key value).
pub fn trace_distance_criterion(state: &CQState) -> f64 {
    let rho_e = state.average_state();
    let inv_n = 1.0 / state.num_keys() as f64;
    let mut d = 0.0;
    for (p, rho) in state.components() {
        let diff = HermitianOperator::linear_combination(*p, rho, -inv_n, &rho_e)
            .expect("components share a dimension");
        d += trace_norm(&diff);
    }
    0.5 * d
}

/// Optimal binary decision probability between `rho0` (prior `p0`) and
/// `rho1` (prior `p1`): `1/2 (1 + || p0 rho0 - p1 rho1 ||_1)`.
///
/// This is the standard form; the variant without the 1/2 factor on the
/// norm term exceeds 1 already for orthogonal pure states, and brute-force
/// maximization over projective measurements confirms the form used here.
pub fn helstrom_success(
    p0: f64,
    rho0: &HermitianOperator,
    p1: f64,
    rho1: &HermitianOperator,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p0) || !(0.0..=1.0).contains(&p1) {
        return Err(Error::Domain(format!("priors ({p0}, {p1}) out of range")));
    }
    if (p0 + p1 - 1.0).abs() > PROB_TOL {
        return Err(Error::Domain(format!(
            "priors sum to {}, not 1",
            p0 + p1
        )));
    }
    rho0.validate_density()?;
    rho1.validate_density()?;
    let diff = HermitianOperator::linear_combination(p0, rho0, -p1, rho1)?;
    Ok(0.5 * (1.0 + trace_norm(&diff)))
}

/// Embed a classical joint distribution as a CQ state: `p(k)` from the key
/// marginal and `rho_E^k = diag(p(y|k))`.
///
/// Key values with zero probability get the maximally mixed state; the
/// choice is inert (the component enters every criterion with weight 0) but
/// keeps every component a valid density operator. The trace-distance
/// criterion of the embedding equals the classical variational distance of
/// the joint from its ideal uniform-key product.
pub fn classical_embed(joint: &JointDistribution) -> CQState {
    let num_y = joint.num_outcomes();
    let components = (0..joint.num_keys())
        .map(|k| {
            let pk: f64 = (0..num_y).map(|y| joint.prob(k, y)).sum();
            let rho = if pk == 0.0 {
                HermitianOperator::maximally_mixed(num_y)
            } else {
                let cond: Vec<f64> = (0..num_y).map(|y| joint.prob(k, y) / pk).collect();
                HermitianOperator::from_real_diagonal(&cond)
            };
            (pk, rho)
        })
        .collect();
    CQState {
        key_bits: joint.key_bits(),
        components,
    }
}

/// Classical guessing probability of the key from a diagonal (classically
/// embedded) CQ state: `sum_y max_k p(k) <y|rho_E^k|y>`.
pub fn diagonal_guess_probability(state: &CQState) -> f64 {
    let dim = state.dim();
    (0..dim)
        .map(|y| {
            state
                .components()
                .iter()
                .map(|(p, rho)| p * rho.entry(y, y).re)
                .fold(0.0_f64, f64::max)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probtools::Distribution;
    use num_complex::Complex64 as C;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn random_hermitian(rng: &mut ChaCha12Rng, dim: usize) -> HermitianOperator {
        let mut entries = vec![c(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = c(rng.random_range(-1.0..1.0), 0.0);
            for j in (i + 1)..dim {
                let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                entries[i * dim + j] = z;
                entries[j * dim + i] = z.conj();
            }
        }
        HermitianOperator::new(dim, entries).unwrap()
    }

    #[test]
    fn trace_norm_identity_and_diagonal() {
        assert_eq!(trace_norm(&HermitianOperator::identity(4)), 4.0);
        let a = HermitianOperator::from_real_diagonal(&[0.5, -0.5]);
        assert_eq!(trace_norm(&a), 1.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let entries = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)];
        assert!(matches!(
            HermitianOperator::new(2, entries),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn jacobi_matches_two_by_two_closed_form() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = random_hermitian(&mut rng, 2);
            let (p, q, beta) = (a.entry(0, 0).re, a.entry(1, 1).re, a.entry(0, 1));
            let mid = 0.5 * (p + q);
            let rad = (0.25 * (p - q) * (p - q) + beta.norm_sqr()).sqrt();
            let eigs = a.eigenvalues();
            assert!((eigs[0] - (mid - rad)).abs() < 1e-12);
            assert!((eigs[1] - (mid + rad)).abs() < 1e-12);
        }
    }

    // Independent eigenvalue oracle: characteristic polynomial via
    // Faddeev-LeVerrier, then real-root isolation through the derivative
    // chain. Only used for generic (distinct-eigenvalue) random inputs.
    mod charpoly {
        use num_complex::Complex64 as C;

        fn mat_mul(dim: usize, a: &[C], b: &[C]) -> Vec<C> {
            let mut out = vec![C::new(0.0, 0.0); dim * dim];
            for i in 0..dim {
                for k in 0..dim {
                    let aik = a[i * dim + k];
                    for j in 0..dim {
                        out[i * dim + j] += aik * b[k * dim + j];
                    }
                }
            }
            out
        }

        /// Monic characteristic polynomial coefficients
        /// `[1, a1, ..., an]` of `det(lambda I - A)`.
        fn coefficients(dim: usize, a: &[C]) -> Vec<f64> {
            let mut coeffs = vec![1.0];
            let mut m = a.to_vec();
            for k in 1..=dim {
                let tr: C = (0..dim).map(|i| m[i * dim + i]).sum();
                let ak = -tr.re / k as f64;
                coeffs.push(ak);
                if k == dim {
                    break;
                }
                for i in 0..dim {
                    m[i * dim + i] += C::new(ak, 0.0);
                }
                m = mat_mul(dim, a, &m);
            }
            coeffs
        }

        fn eval(coeffs: &[f64], x: f64) -> f64 {
            coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
        }

        fn derivative(coeffs: &[f64]) -> Vec<f64> {
            let n = coeffs.len() - 1;
            coeffs[..n]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (n - i) as f64)
                .collect()
        }

        fn bisect(coeffs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
            let mut flo = eval(coeffs, lo);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fmid = eval(coeffs, mid);
                if (flo < 0.0) == (fmid < 0.0) {
                    lo = mid;
                    flo = fmid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }

        /// All real roots of a polynomial whose roots are known real and
        /// distinct, by recursive critical-point isolation.
        fn real_roots(coeffs: &[f64], bound: f64) -> Vec<f64> {
            if coeffs.len() == 2 {
                return vec![-coeffs[1] / coeffs[0]];
            }
            let mut cuts = vec![-bound];
            cuts.extend(real_roots(&derivative(coeffs), bound));
            cuts.push(bound);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut roots = Vec::new();
            for w in cuts.windows(2) {
                let (flo, fhi) = (eval(coeffs, w[0]), eval(coeffs, w[1]));
                if (flo < 0.0) != (fhi < 0.0) {
                    roots.push(bisect(coeffs, w[0], w[1]));
                }
            }
            roots
        }

        pub fn eigenvalues(dim: usize, a: &[C]) -> Vec<f64> {
            let coeffs = coefficients(dim, a);
            let bound = 1.0
                + (0..dim)
                    .map(|i| (0..dim).map(|j| a[i * dim + j].norm()).sum::<f64>())
                    .fold(0.0_f64, f64::max);
            real_roots(&coeffs, bound)
        }
    }

    #[test]
    fn trace_norm_matches_characteristic_polynomial_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for dim in 2..=4 {
            for _ in 0..40 {
                let a = random_hermitian(&mut rng, dim);
                let oracle = charpoly::eigenvalues(dim, a.entries());
                assert_eq!(oracle.len(), dim, "oracle lost a root at dim {dim}");
                let oracle_norm: f64 = oracle.iter().map(|l| l.abs()).sum();
                assert!(
                    (trace_norm(&a) - oracle_norm).abs() < 1e-9,
                    "dim {dim}: {} vs oracle {}",
                    trace_norm(&a),
                    oracle_norm,
                );
            }
        }
    }

    #[test]
    fn trace_norm_dominates_trace() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = random_hermitian(&mut rng, 3);
            assert!(trace_norm(&a) >= a.trace().abs() - 1e-12);
        }
    }

    #[test]
    fn criterion_zero_for_uniform_identical_components() {
        let rho = HermitianOperator::maximally_mixed(2);
        let state = CQState::new(2, vec![(0.25, rho.clone()); 4].into_iter().collect()).unwrap();
        assert!(trace_distance_criterion(&state) < 1e-12);
    }

    #[test]
    fn criterion_orthogonal_pure_pair_is_half() {
        let rho0 = HermitianOperator::pure_state(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let rho1 = HermitianOperator::pure_state(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let state = CQState::new(1, vec![(0.5, rho0), (0.5, rho1)]).unwrap();
        assert!((trace_distance_criterion(&state) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn classical_embed_matches_classical_distance() {
        // Product joint: d = 0.
        let q = Distribution::new(vec![0.3, 0.7]).unwrap();
        let prod = JointDistribution::uniform_independent(2, &q).unwrap();
        assert!(trace_distance_criterion(&classical_embed(&prod)) < 1e-12);

        // Deterministic y = k: d = 1 - 1/N.
        let n = 4;
        let mut probs = vec![0.0; n * n];
        for k in 0..n {
            probs[k * n + k] = 0.25;
        }
        let det = JointDistribution::new(2, n, probs).unwrap();
        let d = trace_distance_criterion(&classical_embed(&det));
        assert!((d - 0.75).abs() < 1e-10);

        // Random 2-bit joint: agree with the classical formula.
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let joint = crate::oracles::random_joint(&mut rng, 2, 3);
            let d_cq = trace_distance_criterion(&classical_embed(&joint));
            assert!((d_cq - joint.distance_from_ideal()).abs() < 1e-10);
        }
    }

    #[test]
    fn embed_handles_zero_probability_rows() {
        let probs = vec![0.0, 0.0, 0.6, 0.4];
        let joint = JointDistribution::new(1, 2, probs).unwrap();
        let state = classical_embed(&joint);
        assert_eq!(state.components()[0].0, 0.0);
        state.components()[0].1.validate_density().unwrap();
        let d_cq = trace_distance_criterion(&state);
        assert!((d_cq - joint.distance_from_ideal()).abs() < 1e-10);
    }

    #[test]
    fn helstrom_trivial_cases() {
        let mixed = HermitianOperator::maximally_mixed(2);
        assert!((helstrom_success(0.5, &mixed, 0.5, &mixed).unwrap() - 0.5).abs() < 1e-12);

        let rho0 = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let rho1 = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        assert_eq!(helstrom_success(0.5, &rho0, 0.5, &rho1).unwrap(), 1.0);

        // Pure states at relative angle pi/6, equal priors.
        let a = HermitianOperator::qubit_at_angle(0.0);
        let b = HermitianOperator::qubit_at_angle(std::f64::consts::PI / 6.0);
        assert!((helstrom_success(0.5, &a, 0.5, &b).unwrap() - 0.75).abs() < 1e-12);

        assert!(helstrom_success(0.6, &rho0, 0.6, &rho1).is_err());
    }

    #[test]
    fn helstrom_never_below_larger_prior() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..30 {
            let rho0 = crate::oracles::random_density(&mut rng, 2);
            let rho1 = crate::oracles::random_density(&mut rng, 2);
            let p0: f64 = rng.random_range(0.0..1.0);
            let pc = helstrom_success(p0, &rho0, 1.0 - p0, &rho1).unwrap();
            assert!(pc >= p0.max(1.0 - p0) - 1e-12);
            assert!(pc <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn block_diagonal_form_matches_component_sum() {
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        for _ in 0..10 {
            let state = crate::oracles::random_cq_state(&mut rng, 2, 3);
            let block = HermitianOperator::linear_combination(
                1.0,
                &state.joint_operator(),
                -1.0,
                &state.ideal_operator(),
            )
            .unwrap();
            let d_block = 0.5 * trace_norm(&block);
            let d_sum = trace_distance_criterion(&state);
            assert!((d_block - d_sum).abs() < 1e-9);
        }
    }

    #[test]
    fn criterion_bounded_by_one_minus_inv_n() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..20 {
            let state = crate::oracles::random_cq_state(&mut rng, 2, 2);
            let d = trace_distance_criterion(&state);
            assert!(d >= -1e-12 && d <= 1.0 - 0.25 + 1e-9);
        }
    }
}
