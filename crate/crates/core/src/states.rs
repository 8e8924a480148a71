//! Probe states: coherent spin states, NOON and GHZ states, density matrices
//! and the Uhlmann distance between them.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie_basis::{spin1_matrices, Operator, SymmetricIndex};
use crate::linalg::{
    eigh, hermiticity_residual, inner, trace, trace_product, unitary_from_hamiltonian,
    vector_norm, Eigh, HermitianMatrix,
};
use crate::scalar::{cone, cx, czero, CMatrix, CVector, Modulus, Real};

/// Tolerance on caller-supplied single-particle normalization and orthogonality.
pub const INPUT_TOL: f64 = 1e-10;
/// Purity above `1 - PURE_TOL` takes the pure-state fidelity path.
pub const PURE_TOL: f64 = 1e-12;
/// Eigenvalues of a density matrix may dip this far below zero before rejection.
pub const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-10;

/// A unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T: Real> {
    amplitudes: CVector<T>,
}

impl<T: Real> PureState<T> {
    /// Wraps amplitudes that are already normalized to within [`INPUT_TOL`].
    pub fn new(amplitudes: CVector<T>) -> Result<Self> {
        let norm = vector_norm(&amplitudes);
        if (norm - T::one()).abs() > T::lit(INPUT_TOL) {
            return Err(Error::NotNormalized(norm.as_f64()));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: CVector<T>) -> Result<Self> {
        let norm = vector_norm(&amplitudes);
        if norm <= T::zero() {
            return Err(Error::NotNormalized(0.0));
        }
        let inv = T::one() / norm;
        Ok(Self {
            amplitudes: amplitudes.map(|z| z * inv),
        })
    }

    pub(crate) fn from_raw(amplitudes: CVector<T>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        vector_norm(&self.amplitudes)
    }

    /// `⟨ψ|G|ψ⟩` (real part; `G` is Hermitian).
    pub fn expectation(&self, op: &Operator<T>) -> T {
        op.expectation(&self.amplitudes).re
    }

    pub fn overlap(&self, other: &PureState<T>) -> Complex<T> {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `U ψ` for a dense unitary.
    pub fn apply(&self, unitary: &CMatrix<T>) -> PureState<T> {
        Self::from_raw(unitary * &self.amplitudes)
    }

    pub fn to_document(&self) -> StateDocument {
        StateDocument {
            hilbert_dim: self.dim(),
            amplitudes: Some(self.amplitudes.iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect()),
            matrix: None,
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates hermiticity and trace to 1e-12 and eigenvalues to `-1e-10`.
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensity("matrix is not square".into()));
        }
        let tol = T::lit(1e-12);
        let herm = hermiticity_residual(&matrix);
        if herm > tol {
            return Err(Error::NotHermitian(herm.as_f64()));
        }
        let tr = trace(&matrix);
        if (tr - cone()).modulus_r() > tol {
            return Err(Error::InvalidDensity(format!("trace {} != 1", tr.re)));
        }
        let low = eigh(&matrix).min_value();
        if low < -T::lit(NEGATIVE_EIGENVALUE_TOL) {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {low}")));
        }
        Ok(Self { matrix })
    }

    /// Symmetrizes `matrix` without further validation.
    pub(crate) fn from_raw(matrix: CMatrix<T>) -> Self {
        Self {
            matrix: HermitianMatrix::from_hermitian_part(&matrix).into_matrix(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = T::one() / T::count(dim);
        Self {
            matrix: CMatrix::from_diagonal_element(dim, dim, cx(w, T::zero())),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn eigh(&self) -> Eigh<T> {
        eigh(&self.matrix)
    }

    pub fn purity(&self) -> T {
        trace_product(&self.matrix, &self.matrix).re
    }

    /// `Tr(ρ G)`
    pub fn expectation(&self, op: &Operator<T>) -> T {
        op.trace_with_dense(&self.matrix).re
    }

    /// `U ρ U†`
    pub fn conjugate(&self, unitary: &CMatrix<T>) -> Self {
        Self::from_raw(unitary * &self.matrix * unitary.adjoint())
    }

    pub fn to_document(&self) -> StateDocument {
        let n = self.dim();
        StateDocument {
            hilbert_dim: n,
            amplitudes: None,
            matrix: Some(
                (0..n)
                    .map(|r| (0..n).map(|c| [self.matrix[(r, c)].re.as_f64(), self.matrix[(r, c)].im.as_f64()]).collect())
                    .collect(),
            ),
        }
    }
}

/// JSON form of a state: either amplitudes or a row-major matrix of `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    #[serde(rename = "D")]
    pub hilbert_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

fn check_unit<T: Real>(single: &[Complex<T>]) -> Result<()> {
    let norm = single.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
    if (norm - T::one()).abs() > T::lit(INPUT_TOL) {
        return Err(Error::NotNormalized(norm.as_f64()));
    }
    Ok(())
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

/// Coherent spin state `|ψ⟩^{⊗N}` expressed in the symmetric occupation basis.
pub fn css_in<T: Real>(index: &SymmetricIndex, single: &[Complex<T>]) -> Result<PureState<T>> {
    if single.len() != index.levels() {
        return Err(Error::DimensionMismatch {
            expected: index.levels(),
            found: single.len(),
        });
    }
    check_unit(single)?;
    let ln_n = ln_factorial(index.n_particles() as u32);
    let amps = index
        .occupations()
        .map(|occ| {
            let ln_multi = ln_n - occ.iter().map(|&k| ln_factorial(k)).sum::<f64>();
            let mut amp = cx(T::lit((0.5 * ln_multi).exp()), T::zero());
            for (psi, &k) in single.iter().zip(occ) {
                for _ in 0..k {
                    amp *= psi;
                }
            }
            amp
        })
        .collect::<Vec<_>>();
    Ok(PureState::from_raw(CVector::from_vec(amps)))
}

pub fn css<T: Real>(n: usize, single: &[Complex<T>], cap: usize) -> Result<PureState<T>> {
    let index = SymmetricIndex::new(single.len(), n, cap)?;
    css_in(&index, single)
}

/// `(|ψ⟩^{⊗N} + |⊥⟩^{⊗N}) / √2` for orthogonal single-particle states.
pub fn noon<T: Real>(n: usize, psi: &[Complex<T>], perp: &[Complex<T>], cap: usize) -> Result<PureState<T>> {
    if psi.len() != perp.len() {
        return Err(Error::DimensionMismatch {
            expected: psi.len(),
            found: perp.len(),
        });
    }
    check_unit(psi)?;
    check_unit(perp)?;
    let overlap = psi
        .iter()
        .zip(perp)
        .fold(czero(), |acc: Complex<T>, (a, b)| acc + b.conj() * a);
    if overlap.modulus_r() > T::lit(INPUT_TOL) {
        return Err(Error::NotOrthogonal(overlap.modulus_r().as_f64()));
    }
    let index = SymmetricIndex::new(psi.len(), n, cap)?;
    let a = css_in(&index, psi)?;
    let b = css_in(&index, perp)?;
    let s = T::one() / T::lit(2.0).sqrt();
    Ok(PureState::from_raw((a.amplitudes + b.amplitudes).map(|z| z * s)))
}

/// Balanced GHZ state `Σ_n |n⟩^{⊗N} / √d`.
pub fn ghz_balanced<T: Real>(d: usize, n: usize, cap: usize) -> Result<PureState<T>> {
    let index = SymmetricIndex::new(d, n, cap)?;
    let mut amps = CVector::zeros(index.dim());
    let w = cx(T::one() / T::count(d).sqrt(), T::zero());
    let mut occ = vec![0u32; d];
    for level in 0..d {
        occ.iter_mut().for_each(|k| *k = 0);
        occ[level] = n as u32;
        amps[index.index_of(&occ).expect("single-mode occupation")] += w;
    }
    Ok(PureState::from_raw(amps))
}

/// Single spin-1 state `exp(+i π/2 s_y) |-1⟩` in level order `(+1, 0, -1)`.
pub fn initial_single_particle<T: Real>() -> Vec<Complex<T>> {
    let [_, sy, _] = spin1_matrices::<T>();
    let u = unitary_from_hamiltonian(&sy.to_dense(), -T::frac_pi_2());
    (0..3).map(|i| u[(i, 2)]).collect()
}

/// `exp(+i π/2 S_y) |-1⟩^{⊗N}`: a coherent state pointing along `S_x`.
pub fn initial_example_state<T: Real>(n: usize, cap: usize) -> Result<PureState<T>> {
    css(n, &initial_single_particle::<T>(), cap)
}

/// Single-level occupation state `|level⟩^{⊗N}` as a unit vector.
pub fn level<T: Real>(d: usize, level: usize) -> Vec<Complex<T>> {
    (0..d).map(|k| if k == level { cone() } else { czero() }).collect()
}

pub fn density<T: Real>(psi: &PureState<T>) -> DensityMatrix<T> {
    let a = &psi.amplitudes;
    DensityMatrix::from_raw(a * a.adjoint())
}

/// Convex combination `Σ w_k ρ_k`; weights must be nonnegative and sum to one.
pub fn mix<T: Real>(terms: &[(T, DensityMatrix<T>)]) -> Result<DensityMatrix<T>> {
    let first = terms
        .first()
        .ok_or_else(|| Error::InvalidDensity("empty mixture".into()))?;
    let n = first.1.dim();
    let mut total = T::zero();
    let mut acc = CMatrix::zeros(n, n);
    for (w, rho) in terms {
        if rho.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rho.dim(),
            });
        }
        if *w < T::zero() {
            return Err(Error::InvalidDensity(format!("negative weight {w}")));
        }
        total += *w;
        acc += rho.matrix() * cx(*w, T::zero());
    }
    if (total - T::one()).abs() > T::lit(1e-12) {
        return Err(Error::InvalidDensity(format!("weights sum to {total}")));
    }
    Ok(DensityMatrix::from_raw(acc))
}

/// `ρ_q = (1/q) Σ_{n<q} (|n⟩⟨n|)^{⊗N}` on the symmetric subspace of `d` levels.
pub fn level_css_mixture<T: Real>(d: usize, n: usize, q: usize, cap: usize) -> Result<DensityMatrix<T>> {
    if q == 0 || q > d {
        return Err(Error::InvalidParameter(format!("q = {q} must lie in 1..={d}")));
    }
    let index = SymmetricIndex::new(d, n, cap)?;
    let w = T::one() / T::count(q);
    let terms = (0..q)
        .map(|l| Ok((w, density(&css_in(&index, &level::<T>(d, l))?))))
        .collect::<Result<Vec<_>>>()?;
    mix(&terms)
}

/// Root fidelity `Tr((√ρ σ √ρ)^{1/2})`.
pub fn root_fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let pure = T::one() - T::lit(PURE_TOL);
    if rho.purity() > pure || sigma.purity() > pure {
        // For pure ρ = |ψ⟩⟨ψ| the root fidelity is ⟨ψ|σ|ψ⟩^{1/2} = Tr(ρσ)^{1/2}.
        let overlap = trace_product(rho.matrix(), sigma.matrix()).re;
        return Ok(overlap.max(T::zero()).sqrt());
    }
    let support = T::lit(crate::geometry::Cutoffs::default().rho_support_rel);
    let spectrum = rho.eigh();
    if spectrum.min_value() < -T::lit(NEGATIVE_EIGENVALUE_TOL) {
        return Err(Error::InvalidDensity(format!("negative eigenvalue {}", spectrum.min_value())));
    }
    let floor = support * spectrum.max_value();
    let root = spectrum.map_spectrum(|x| if x > floor { x.sqrt() } else { T::zero() });
    let inner = eigh(&(&root * sigma.matrix() * &root));
    let floor = support * inner.max_value().max(T::zero());
    Ok(inner
        .values
        .iter()
        .fold(T::zero(), |acc, &x| if x > floor { acc + x.sqrt() } else { acc }))
}

/// Squared Uhlmann distance `1 - Tr((√ρ σ √ρ)^{1/2})`, clamped to `[0, 1]`.
pub fn uhlmann_distance_sq<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    let fidelity = root_fidelity(rho, sigma)?;
    Ok((T::one() - fidelity).max(T::zero()).min(T::one()))
}

/// `1 - |⟨ψ|φ⟩|` for pure states.
pub fn uhlmann_distance_sq_pure<T: Real>(psi: &PureState<T>, phi: &PureState<T>) -> Result<T> {
    if psi.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            found: phi.dim(),
        });
    }
    Ok((T::one() - psi.overlap(phi).modulus_r()).max(T::zero()))
}

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Random state with i.i.d. complex Gaussian amplitudes, normalized.
pub fn random_pure<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState<T> {
    let amps = CVector::from_fn(dim, |_, _| cx(gaussian(rng), gaussian(rng)));
    PureState::normalized(amps).expect("gaussian vector is nonzero")
}

/// Mixture of `rank` random pure states with random positive weights.
pub fn random_mixed<T: Real, R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix<T> {
    let raw: Vec<f64> = (0..rank).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut acc = CMatrix::zeros(dim, dim);
    for w in raw {
        let psi = random_pure::<T, R>(dim, rng);
        let a = psi.amplitudes();
        acc += a * a.adjoint() * cx(T::lit(w / total), T::zero());
    }
    DensityMatrix::from_raw(acc)
}
