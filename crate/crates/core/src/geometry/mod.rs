//! Symmetric logarithmic derivatives, the quantum Fisher information matrix,
//! the Uhlmann curvature tensor and the incompatibility parameter derived
//! from them.

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie_basis::{LieBasis, Operator};
use crate::linalg::{
    eigh, eigh_real_desc, hermiticity_residual, identity, max_abs, pseudo_inverse, real_general_eigenvalues,
    trace_product, HermitianMatrix,
};
use crate::scalar::{cx, czero, CMatrix, RMatrix, Real};
use crate::states::{DensityMatrix, PureState};

/// Spectral thresholds shared by the geometry routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoffs {
    /// `p_j + p_k` must exceed this fraction of `λ_max(ρ)` for an SLD entry to be kept.
    pub rho_support_rel: f64,
    /// Eigenvalues of `F` below this fraction of `λ_max(F)` are treated as zero.
    pub rank_rel: f64,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Self {
            rho_support_rel: 1e-12,
            rank_rel: 1e-10,
        }
    }
}

/// Eigenframe of `ρ` with generators rotated into it.
struct Frame<T: Real> {
    populations: Vec<T>,
    vectors: CMatrix<T>,
    cutoff: T,
}

impl<T: Real> Frame<T> {
    fn new(rho: &DensityMatrix<T>, support_rel: f64) -> Self {
        let e = rho.eigh();
        let cutoff = T::lit(support_rel) * e.max_value().max(T::zero());
        Self {
            populations: e.values,
            vectors: e.vectors,
            cutoff,
        }
    }

    fn dim(&self) -> usize {
        self.populations.len()
    }

    fn support_rank(&self) -> usize {
        self.populations.iter().filter(|&&p| p > self.cutoff).count()
    }

    /// `V† G V`
    fn rotate(&self, g: &Operator<T>) -> CMatrix<T> {
        let n = self.dim();
        let v = &self.vectors;
        if g.nnz() < n {
            let mut out = CMatrix::zeros(n, n);
            for (r, c, val) in g.entries() {
                for j in 0..n {
                    let left = v[(r, j)].conj() * val;
                    for k in 0..n {
                        out[(j, k)] += left * v[(c, k)];
                    }
                }
            }
            out
        } else {
            v.adjoint() * g.left_mul(v)
        }
    }

    /// SLD of `G` expressed in the eigenframe.
    fn sld_rotated(&self, g: &Operator<T>) -> CMatrix<T> {
        let gt = self.rotate(g);
        let n = self.dim();
        let p = &self.populations;
        let two = T::lit(2.0);
        CMatrix::from_fn(n, n, |j, k| {
            let s = p[j] + p[k];
            // populations closer than the cutoff are numerically degenerate
            if s > self.cutoff && (p[k] - p[j]).abs() > self.cutoff {
                // ⟨j|-i[G,ρ]|k⟩ = -i G̃_jk (p_k - p_j)
                let d = gt[(j, k)] * cx(T::zero(), -(p[k] - p[j]));
                d * (two / s)
            } else {
                czero()
            }
        })
    }

    fn to_lab(&self, m: &CMatrix<T>) -> CMatrix<T> {
        &self.vectors * m * self.vectors.adjoint()
    }

    /// `Tr(ρ A B)` for `A`, `B` given in the eigenframe, using `B` Hermitian.
    fn weighted_product(&self, a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
        let n = self.dim();
        let mut acc = czero();
        for j in 0..n {
            let p = self.populations[j];
            if p <= self.cutoff {
                continue;
            }
            let mut row = czero();
            for k in 0..n {
                row += a[(j, k)] * b[(j, k)].conj();
            }
            acc += row * p;
        }
        acc
    }
}

/// One SLD per generator.
#[derive(Clone, Debug)]
pub struct SldSet<T: Real> {
    pub operators: Vec<HermitianMatrix<T>>,
    pub support_rank: usize,
    /// Absolute threshold on `p_j + p_k`.
    pub cutoff_used: T,
}

/// Symmetric logarithmic derivative of `ρ` along `-i[G, ρ]`, zero on the kernel of `ρ`.
pub fn sld<T: Real>(rho: &DensityMatrix<T>, g: &Operator<T>, cutoffs: &Cutoffs) -> Result<HermitianMatrix<T>> {
    check_dim(rho.dim(), g.dim())?;
    let frame = Frame::new(rho, cutoffs.rho_support_rel);
    Ok(HermitianMatrix::from_hermitian_part(&frame.to_lab(&frame.sld_rotated(g))))
}

pub fn sld_set<T: Real>(rho: &DensityMatrix<T>, basis: &LieBasis<T>, cutoffs: &Cutoffs) -> Result<SldSet<T>> {
    check_dim(rho.dim(), basis.hilbert_dim)?;
    let frame = Frame::new(rho, cutoffs.rho_support_rel);
    let operators = basis
        .generators
        .par_iter()
        .map(|g| HermitianMatrix::from_hermitian_part(&frame.to_lab(&frame.sld_rotated(g))))
        .collect();
    Ok(SldSet {
        operators,
        support_rank: frame.support_rank(),
        cutoff_used: frame.cutoff,
    })
}

/// Largest entry of `½{L, ρ} + i[G, ρ]`.
pub fn sld_residual<T: Real>(rho: &DensityMatrix<T>, g: &Operator<T>, l: &HermitianMatrix<T>) -> T {
    let r = rho.matrix();
    let half = cx(T::lit(0.5), T::zero());
    let lhs = (l.matrix() * r + r * l.matrix()) * half;
    let drho = g.commutator_dense(r) * cx(T::zero(), -T::one());
    max_abs(&(lhs - drho))
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Quantum Fisher information matrix with its spectral decomposition.
#[derive(Clone, Debug)]
pub struct Qfim<T: Real> {
    pub matrix: RMatrix<T>,
    /// Descending.
    pub eigenvalues: Vec<T>,
    /// Columns match `eigenvalues`.
    pub eigenvectors: RMatrix<T>,
    pub basis_name: String,
}

impl<T: Real> Qfim<T> {
    pub fn from_matrix(matrix: RMatrix<T>, basis_name: &str) -> Self {
        let sym = (&matrix + matrix.transpose()) * T::lit(0.5);
        let (eigenvalues, eigenvectors) = eigh_real_desc(&sym);
        Self {
            matrix: sym,
            eigenvalues,
            eigenvectors,
            basis_name: basis_name.to_string(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> T {
        self.matrix.trace()
    }

    pub fn lambda_max(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or_else(T::zero)
    }

    pub fn to_document(&self, cutoffs: &Cutoffs) -> MatrixDocument {
        MatrixDocument {
            basis: self.basis_name.clone(),
            matrix: rows(&self.matrix),
            eigenvalues: Some(self.eigenvalues.iter().map(|x| x.as_f64()).collect()),
            eigenvectors: Some(rows(&self.eigenvectors)),
            cutoffs: *cutoffs,
        }
    }
}

/// Uhlmann curvature tensor.
#[derive(Clone, Debug)]
pub struct Uct<T: Real> {
    pub matrix: RMatrix<T>,
    pub basis_name: String,
}

impl<T: Real> Uct<T> {
    pub fn from_matrix(matrix: RMatrix<T>, basis_name: &str) -> Self {
        let anti = (&matrix - matrix.transpose()) * T::lit(0.5);
        Self {
            matrix: anti,
            basis_name: basis_name.to_string(),
        }
    }

    pub fn to_document(&self, cutoffs: &Cutoffs) -> MatrixDocument {
        MatrixDocument {
            basis: self.basis_name.clone(),
            matrix: rows(&self.matrix),
            eigenvalues: None,
            eigenvectors: None,
            cutoffs: *cutoffs,
        }
    }
}

/// JSON form of a QFIM or UCT.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub basis: String,
    pub matrix: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub cutoffs: Cutoffs,
}

pub(crate) fn rows<T: Real>(m: &RMatrix<T>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)].as_f64()).collect())
        .collect()
}

/// Matrix of `Tr(ρ L_μ L_ν)`; its real part is the QFIM and its imaginary part the UCT.
fn sld_gram<T: Real>(rho: &DensityMatrix<T>, basis: &LieBasis<T>, cutoffs: &Cutoffs) -> Result<CMatrix<T>> {
    check_dim(rho.dim(), basis.hilbert_dim)?;
    let frame = Frame::new(rho, cutoffs.rho_support_rel);
    let slds: Vec<CMatrix<T>> = basis.generators.par_iter().map(|g| frame.sld_rotated(g)).collect();
    let k = slds.len();
    let upper: Vec<Vec<Complex<T>>> = (0..k)
        .into_par_iter()
        .map(|mu| (mu..k).map(|nu| frame.weighted_product(&slds[mu], &slds[nu])).collect())
        .collect();
    let mut gram = CMatrix::zeros(k, k);
    for (mu, row) in upper.into_iter().enumerate() {
        for (offset, q) in row.into_iter().enumerate() {
            let nu = mu + offset;
            gram[(mu, nu)] = q;
            gram[(nu, mu)] = q.conj();
        }
    }
    Ok(gram)
}

fn split_gram<T: Real>(gram: &CMatrix<T>, name: &str) -> (Qfim<T>, Uct<T>) {
    let f = gram.map(|z| z.re);
    let u = gram.map(|z| z.im);
    (Qfim::from_matrix(f, name), Uct::from_matrix(u, name))
}

/// `F_μν = ½ Tr(ρ {L_μ, L_ν})` and `U_μν = -(i/2) Tr(ρ [L_μ, L_ν])` together.
pub fn qfim_and_uct<T: Real>(rho: &DensityMatrix<T>, basis: &LieBasis<T>, cutoffs: &Cutoffs) -> Result<(Qfim<T>, Uct<T>)> {
    let gram = sld_gram(rho, basis, cutoffs)?;
    Ok(split_gram(&gram, &basis.name))
}

pub fn qfim<T: Real>(rho: &DensityMatrix<T>, basis: &LieBasis<T>, cutoffs: &Cutoffs) -> Result<Qfim<T>> {
    Ok(qfim_and_uct(rho, basis, cutoffs)?.0)
}

pub fn uct<T: Real>(rho: &DensityMatrix<T>, basis: &LieBasis<T>, cutoffs: &Cutoffs) -> Result<Uct<T>> {
    Ok(qfim_and_uct(rho, basis, cutoffs)?.1)
}

/// Pure-state gram matrix `4(⟨G_μ G_ν⟩ - ⟨G_μ⟩⟨G_ν⟩)`.
fn pure_gram<T: Real>(psi: &PureState<T>, basis: &LieBasis<T>) -> Result<CMatrix<T>> {
    check_dim(psi.dim(), basis.hilbert_dim)?;
    let a = psi.amplitudes();
    let images: Vec<_> = basis.generators.par_iter().map(|g| g.apply(a)).collect();
    let means: Vec<T> = images.iter().map(|v| crate::linalg::inner(a, v).re).collect();
    let k = images.len();
    let four = T::lit(4.0);
    let mut gram = CMatrix::zeros(k, k);
    for mu in 0..k {
        for nu in mu..k {
            let q = crate::linalg::inner(&images[mu], &images[nu]);
            let z = cx(q.re - means[mu] * means[nu], q.im) * four;
            gram[(mu, nu)] = z;
            gram[(nu, mu)] = z.conj();
        }
    }
    Ok(gram)
}

/// Pure-state QFIM `2⟨{G_μ, G_ν}⟩ - 4⟨G_μ⟩⟨G_ν⟩`.
pub fn qfim_pure<T: Real>(psi: &PureState<T>, basis: &LieBasis<T>) -> Result<Qfim<T>> {
    Ok(qfim_and_uct_pure(psi, basis)?.0)
}

/// Pure-state UCT `4 Im⟨G_μ G_ν⟩`.
pub fn uct_pure<T: Real>(psi: &PureState<T>, basis: &LieBasis<T>) -> Result<Uct<T>> {
    Ok(qfim_and_uct_pure(psi, basis)?.1)
}

pub fn qfim_and_uct_pure<T: Real>(psi: &PureState<T>, basis: &LieBasis<T>) -> Result<(Qfim<T>, Uct<T>)> {
    let gram = pure_gram(psi, basis)?;
    Ok(split_gram(&gram, &basis.name))
}

/// `Tr F = 4 Σ_μ (⟨G_μ²⟩ - ⟨G_μ⟩²)` without forming the matrix.
pub fn qfim_trace_pure<T: Real>(psi: &PureState<T>, basis: &LieBasis<T>) -> Result<T> {
    check_dim(psi.dim(), basis.hilbert_dim)?;
    let a = psi.amplitudes();
    let terms: Vec<T> = basis
        .generators
        .par_iter()
        .map(|g| {
            let v = g.apply(a);
            let mean = crate::linalg::inner(a, &v).re;
            let sq = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
            sq - mean * mean
        })
        .collect();
    Ok(T::lit(4.0) * terms.into_iter().fold(T::zero(), |acc, x| acc + x))
}

/// Spectrum of the raised-index curvature `i F⁺ U`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IncompatibilityResult {
    pub gamma: f64,
    /// Descending; these are the imaginary parts of the eigenvalues of `F⁺U`.
    pub raised_eigenvalues: Vec<f64>,
    /// Largest real part seen among the eigenvalues of `F⁺U`.
    pub max_real_part: f64,
    /// Absolute pseudo-inverse threshold `rank_rel · λ_max(F)`.
    pub rank_cutoff: f64,
    pub rank: usize,
}

const REAL_PART_TOL: f64 = 1e-8;

/// `γ = ‖i F⁺ U‖_∞` from the real Schur eigenvalues of `F⁺U`.
pub fn incompatibility<T: Real>(f: &Qfim<T>, u: &Uct<T>, rank_rel: f64) -> Result<IncompatibilityResult> {
    check_dim(f.dim(), u.matrix.nrows())?;
    let pinv = pseudo_inverse(&f.matrix, T::lit(rank_rel));
    if pinv.rank == 0 {
        return Err(Error::UndefinedIncompatibility);
    }
    let raised = &pinv.matrix * &u.matrix;
    let eig = real_general_eigenvalues(&raised)?;
    let max_real_part = eig.iter().fold(0.0, |acc: f64, z| acc.max(z.re.as_f64().abs()));
    if max_real_part > REAL_PART_TOL {
        return Err(Error::Numerical(format!(
            "raised curvature has eigenvalue real part {max_real_part:e}"
        )));
    }
    let mut values: Vec<f64> = eig.iter().map(|z| z.im.as_f64()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let gamma = values.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()));
    Ok(IncompatibilityResult {
        gamma,
        raised_eigenvalues: values,
        max_real_part,
        rank_cutoff: pinv.cutoff.as_f64(),
        rank: pinv.rank,
    })
}

/// Same spectrum from the Hermitian matrix `i F⁺^{1/2} U F⁺^{1/2}`.
pub fn raised_spectrum_hermitian<T: Real>(f: &Qfim<T>, u: &Uct<T>, rank_rel: f64) -> Result<Vec<T>> {
    let n = f.dim();
    let lam_max = f.eigenvalues.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    let cutoff = T::lit(rank_rel) * lam_max;
    if lam_max <= T::zero() {
        return Err(Error::UndefinedIncompatibility);
    }
    let mut root = RMatrix::zeros(n, n);
    for (k, &lam) in f.eigenvalues.iter().enumerate() {
        if lam.abs() > cutoff {
            let col = f.eigenvectors.column(k);
            root += (col * col.transpose()) * (T::one() / lam.sqrt());
        }
    }
    let s = &root * &u.matrix * &root;
    let h = s.map(|x| cx(T::zero(), x));
    let mut values = eigh(&h).values;
    values.reverse();
    Ok(values)
}

/// Convenience wrapper computing `F`, `U` and `γ` for a density matrix.
pub fn incompatibility_of<T: Real>(
    rho: &DensityMatrix<T>,
    basis: &LieBasis<T>,
    cutoffs: &Cutoffs,
) -> Result<IncompatibilityResult> {
    let (f, u) = qfim_and_uct(rho, basis, cutoffs)?;
    incompatibility(&f, &u, cutoffs.rank_rel)
}

/// Outcome probabilities below this are dropped from the CFIM sum.
pub const CFIM_PROBABILITY_FLOOR: f64 = 1e-14;

fn check_povm<T: Real>(dim: usize, povm: &[CMatrix<T>]) -> Result<()> {
    if povm.is_empty() {
        return Err(Error::InvalidPovm("no elements".into()));
    }
    let mut total = CMatrix::zeros(dim, dim);
    for (m, e) in povm.iter().enumerate() {
        if e.nrows() != dim || e.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: e.nrows(),
            });
        }
        let herm = hermiticity_residual(e);
        if herm > T::lit(1e-10) {
            return Err(Error::InvalidPovm(format!("element {m} is not Hermitian ({herm})")));
        }
        if eigh(e).min_value() < -T::lit(1e-10) {
            return Err(Error::InvalidPovm(format!("element {m} is not positive")));
        }
        total += e;
    }
    let defect = max_abs(&(total - identity::<T>(dim)));
    if defect > T::lit(1e-10) {
        return Err(Error::InvalidPovm(format!("elements do not sum to identity ({defect})")));
    }
    Ok(())
}

/// Classical Fisher information of `povm` outcome statistics under the generators.
pub fn cfim<T: Real>(rho: &DensityMatrix<T>, basis: &LieBasis<T>, povm: &[CMatrix<T>]) -> Result<RMatrix<T>> {
    check_dim(rho.dim(), basis.hilbert_dim)?;
    check_povm(rho.dim(), povm)?;
    let r = rho.matrix();
    let minus_i = cx(T::zero(), -T::one());
    let derivatives: Vec<CMatrix<T>> = basis
        .generators
        .iter()
        .map(|g| g.commutator_dense(r) * minus_i)
        .collect();
    let k = basis.dim();
    let floor = T::lit(CFIM_PROBABILITY_FLOOR);
    let mut out = RMatrix::zeros(k, k);
    for e in povm {
        let p = trace_product(r, e).re;
        if p < floor {
            continue;
        }
        let dp: Vec<T> = derivatives.iter().map(|d| trace_product(d, e).re).collect();
        for mu in 0..k {
            for nu in 0..k {
                out[(mu, nu)] += dp[mu] * dp[nu] / p;
            }
        }
    }
    Ok(out)
}

/// Rank-one POVM from an orthonormal basis given as matrix columns.
pub fn projective_povm<T: Real>(vectors: &CMatrix<T>) -> Vec<CMatrix<T>> {
    (0..vectors.ncols())
        .map(|c| {
            let v = vectors.column(c);
            v * v.adjoint()
        })
        .collect()
}

/// Random POVM `S^{-1/2} A_m S^{-1/2}` with `A_m` Wishart and `S = Σ A_m`.
pub fn random_povm<T: Real, R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Vec<CMatrix<T>> {
    let mut raw = Vec::with_capacity(outcomes);
    let mut total = CMatrix::zeros(dim, dim);
    for _ in 0..outcomes {
        let x = CMatrix::from_fn(dim, dim, |_, _| {
            cx(
                T::lit(rng.sample::<f64, _>(rand_distr::StandardNormal)),
                T::lit(rng.sample::<f64, _>(rand_distr::StandardNormal)),
            )
        });
        let a = &x * x.adjoint();
        total += &a;
        raw.push(a);
    }
    let inv_root = eigh(&total).map_spectrum(|x| T::one() / x.sqrt());
    raw.into_iter()
        .map(|a| HermitianMatrix::from_hermitian_part(&(&inv_root * a * &inv_root)).into_matrix())
        .collect()
}

/// Cramér-Rao bound `1 / (M t² |V|² λ)`; `None` when the bound is infinite.
pub fn precision_bound<T: Real>(lambda: T, v_norm_sq: T, repetitions: u64, t: T) -> Option<T> {
    let denom = T::lit(repetitions as f64) * t * t * v_norm_sq * lambda;
    if denom > T::zero() {
        Some(T::one() / denom)
    } else {
        None
    }
}

#[cfg(test)]
mod tests;
