//! Dense Hermitian linear algebra used throughout the crate.
//!
//! Eigendecompositions are delegated to `nalgebra`; everything else here is
//! thin glue (spectral functions, pseudo-inverse, residual norms).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cx, czero, CMatrix, CVector, Modulus, RMatrix, Real};

/// Hermitian tolerance applied when wrapping caller-provided matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A dense complex matrix known to equal its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T: Real> {
    entries: CMatrix<T>,
}

impl<T: Real> HermitianMatrix<T> {
    /// Wraps `entries` after checking hermiticity within the max-abs tolerance `tol`.
    pub fn new(entries: CMatrix<T>, tol: T) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidDimension(format!(
                "{}x{} matrix is not square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let residual = hermiticity_residual(&entries);
        if residual > tol {
            return Err(Error::NotHermitian(residual.as_f64()));
        }
        Ok(Self { entries })
    }

    /// Wraps `entries` and symmetrizes away round-off, `(A + A†)/2`.
    pub fn from_hermitian_part(entries: &CMatrix<T>) -> Self {
        let half = T::lit(0.5);
        let sym = (entries + entries.adjoint()).map(|z| z * half);
        Self { entries: sym }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.entries
    }

    pub fn eigh(&self) -> Eigh<T> {
        eigh(&self.entries)
    }
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct Eigh<T: Real> {
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, aligned with `values`.
    pub vectors: CMatrix<T>,
}

impl<T: Real> Eigh<T> {
    /// Rebuilds `V f(Λ) V†` for a real spectral function `f`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        self.map_spectrum_complex(|x| cx(f(x), T::zero()))
    }

    pub fn map_spectrum_complex(&self, f: impl Fn(T) -> Complex<T>) -> CMatrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn max_value(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }

    pub fn min_value(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }
}

/// Hermitian eigendecomposition; only the lower/upper average of `m` is used.
pub fn eigh<T: Real>(m: &CMatrix<T>) -> Eigh<T> {
    let n = m.nrows();
    let half = T::lit(0.5);
    let sym = (m + m.adjoint()).map(|z| z * half);
    let decomposition = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomposition.eigenvalues[a]
            .partial_cmp(&decomposition.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| decomposition.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| decomposition.eigenvectors[(i, order[j])]);
    Eigh { values, vectors }
}

/// Real symmetric eigendecomposition with eigenvalues in descending order.
pub fn eigh_real_desc<T: Real>(m: &RMatrix<T>) -> (Vec<T>, RMatrix<T>) {
    let n = m.nrows();
    let half = T::lit(0.5);
    let sym = (m + m.transpose()) * half;
    let decomposition = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomposition.eigenvalues[b]
            .partial_cmp(&decomposition.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| decomposition.eigenvalues[k]).collect();
    let vectors = RMatrix::from_fn(n, n, |i, j| decomposition.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Eigenvalues of a general real square matrix via the real Schur form.
pub fn real_general_eigenvalues<T: Real>(m: &RMatrix<T>) -> Result<Vec<Complex<T>>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), T::default_epsilon(), 10_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn unitary_from_hamiltonian<T: Real>(h: &CMatrix<T>, t: T) -> CMatrix<T> {
    let e = eigh(h);
    e.map_spectrum_complex(|lam| {
        let phase = -(lam * t);
        cx(phase.cos(), phase.sin())
    })
}

/// Square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-neg_tol, 0)` are clamped to zero; anything below is an error.
pub fn psd_sqrt<T: Real>(m: &CMatrix<T>, neg_tol: T) -> Result<CMatrix<T>> {
    let e = eigh(m);
    if e.min_value() < -neg_tol {
        return Err(Error::InvalidDensity(format!(
            "negative eigenvalue {}",
            e.min_value()
        )));
    }
    Ok(e.map_spectrum(|x| if x > T::zero() { x.sqrt() } else { T::zero() }))
}

/// Moore-Penrose pseudo-inverse of a real symmetric matrix by spectral cutoff.
#[derive(Clone, Debug)]
pub struct PseudoInverse<T: Real> {
    pub matrix: RMatrix<T>,
    /// Number of eigenvalues kept.
    pub rank: usize,
    /// Absolute eigenvalue threshold, `rel_tol * λ_max`.
    pub cutoff: T,
}

/// Inverts eigenvalues above `rel_tol * λ_max` and zeros the rest.
pub fn pseudo_inverse<T: Real>(m: &RMatrix<T>, rel_tol: T) -> PseudoInverse<T> {
    let n = m.nrows();
    let (values, vectors) = eigh_real_desc(m);
    let lam_max = values
        .iter()
        .fold(T::zero(), |acc, &v| if v.abs() > acc { v.abs() } else { acc });
    let cutoff = rel_tol * lam_max;
    let mut out = RMatrix::zeros(n, n);
    let mut rank = 0;
    if lam_max > T::zero() {
        for (k, &lam) in values.iter().enumerate() {
            if lam.abs() > cutoff {
                rank += 1;
                let col = vectors.column(k);
                out += (col * col.transpose()) * (T::one() / lam);
            }
        }
    }
    PseudoInverse {
        matrix: out,
        rank,
        cutoff,
    }
}

pub fn hermiticity_residual<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).modulus_r();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| if z.modulus_r() > acc { z.modulus_r() } else { acc })
}

pub fn max_abs_real<T: Real>(m: &RMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| if z.abs() > acc { z.abs() } else { acc })
}

pub fn trace<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    (0..m.nrows()).fold(czero(), |acc, i| acc + m[(i, i)])
}

/// `Tr(A B)` without forming the product.
pub fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    let n = a.nrows();
    let mut acc = czero();
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

pub fn anticommutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b + b * a
}

pub fn vector_norm<T: Real>(v: &CVector<T>) -> T {
    v.iter()
        .fold(T::zero(), |acc, z| acc + z.norm_sqr())
        .sqrt()
}

pub fn inner<T: Real>(a: &CVector<T>, b: &CVector<T>) -> Complex<T> {
    a.iter()
        .zip(b.iter())
        .fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn real_part<T: Real>(m: &CMatrix<T>) -> RMatrix<T> {
    m.map(|z| z.re)
}

pub fn complexify<T: Real>(m: &RMatrix<T>) -> CMatrix<T> {
    m.map(|x| cx(x, T::zero()))
}

pub fn dense_vector<T: Real>(values: &[Complex<T>]) -> CVector<T> {
    DVector::from_column_slice(values)
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    DMatrix::identity(n, n)
}
