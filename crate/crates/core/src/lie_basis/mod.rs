//! Orthonormal Hermitian Lie-algebra bases.
//!
//! Generators are ordered with the off-diagonal pairs first, indexed by
//! `k(m, n) = (n-1)(n-2)/2 + m` for `1 <= m < n <= d`, each pair contributing an
//! "x-like" then a "y-like" operator, followed by the `d - 1` diagonal
//! operators. Every basis satisfies `Tr(G_μ G_ν) = C δ_μν`.

mod operator;
mod symmetric;

use serde::{Deserialize, Serialize};

pub use operator::Operator;
pub use symmetric::{binomial, symmetric_dim, SymmetricIndex};

use crate::error::{Error, Result};
use crate::linalg::{eigh, HermitianMatrix};
use crate::scalar::{cx, CMatrix, Modulus, Real};

/// Default cap on Hilbert-space dimension (or generator count for `su(D)`).
pub const DEFAULT_CAP: usize = 5000;

/// An ordered orthonormal basis of a Hermitian Lie algebra acting on a fixed
/// Hilbert space.
#[derive(Clone, Debug)]
pub struct LieBasis<T: Real> {
    pub name: String,
    pub hilbert_dim: usize,
    pub generators: Vec<Operator<T>>,
    /// Shared Hilbert-Schmidt norm `C`.
    pub norm_constant: T,
    /// Number of single-particle levels, when the basis is built from qudits.
    pub d: Option<usize>,
    pub n_particles: Option<usize>,
}

impl<T: Real> LieBasis<T> {
    /// Number of generators, `dim(g)`.
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn dense_generators(&self) -> Vec<CMatrix<T>> {
        self.generators.iter().map(Operator::to_dense).collect()
    }

    /// `Σ_μ c_μ G_μ` as a sparse operator.
    pub fn combination(&self, coefficients: &[T]) -> Operator<T> {
        assert_eq!(coefficients.len(), self.dim());
        Operator::linear_combination(
            self.hilbert_dim,
            coefficients.iter().copied().zip(self.generators.iter()),
        )
    }

    /// Keeps only the listed generators, in the given order.
    pub fn subset(&self, name: &str, indices: &[usize]) -> Self {
        Self {
            name: name.to_string(),
            hilbert_dim: self.hilbert_dim,
            generators: indices.iter().map(|&i| self.generators[i].clone()).collect(),
            norm_constant: self.norm_constant,
            d: self.d,
            n_particles: self.n_particles,
        }
    }

    pub fn to_document(&self) -> BasisDocument {
        BasisDocument {
            name: self.name.clone(),
            d: self.d,
            n_particles: self.n_particles,
            hilbert_dim: self.hilbert_dim,
            norm_constant: self.norm_constant.as_f64(),
            generators: self
                .generators
                .iter()
                .map(|g| {
                    let dense = g.to_dense();
                    let mut flat = Vec::with_capacity(self.hilbert_dim * self.hilbert_dim);
                    for r in 0..self.hilbert_dim {
                        for c in 0..self.hilbert_dim {
                            let z = dense[(r, c)];
                            flat.push([z.re.as_f64(), z.im.as_f64()]);
                        }
                    }
                    flat
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &BasisDocument) -> Result<Self> {
        let n = doc.hilbert_dim;
        let generators = doc
            .generators
            .iter()
            .map(|flat| {
                if flat.len() != n * n {
                    return Err(Error::DimensionMismatch {
                        expected: n * n,
                        found: flat.len(),
                    });
                }
                Ok(Operator::from_triplets(
                    n,
                    flat.iter().enumerate().filter_map(|(k, [re, im])| {
                        (*re != 0.0 || *im != 0.0).then(|| (k / n, k % n, cx(T::lit(*re), T::lit(*im))))
                    }),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: doc.name.clone(),
            hilbert_dim: n,
            generators,
            norm_constant: T::lit(doc.norm_constant),
            d: doc.d,
            n_particles: doc.n_particles,
        })
    }
}

/// JSON form of a basis; generator entries are row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisDocument {
    pub name: String,
    pub d: Option<usize>,
    #[serde(rename = "N")]
    pub n_particles: Option<usize>,
    #[serde(rename = "D")]
    pub hilbert_dim: usize,
    #[serde(rename = "C")]
    pub norm_constant: f64,
    pub generators: Vec<Vec<[f64; 2]>>,
}

/// Generalized Gell-Mann operators on `dim` levels, multiplied by `scale`.
fn gellmann_operators<T: Real>(dim: usize, scale: T) -> Vec<Operator<T>> {
    let mut out = Vec::with_capacity(dim * dim - 1);
    let zero = T::zero();
    for n in 1..dim {
        for m in 0..n {
            out.push(Operator::from_triplets(
                dim,
                [(m, n, cx(scale, zero)), (n, m, cx(scale, zero))],
            ));
            out.push(Operator::from_triplets(
                dim,
                [(m, n, cx(zero, -scale)), (n, m, cx(zero, scale))],
            ));
        }
    }
    for l in 1..dim {
        let norm = (T::lit(2.0) / T::count(l * (l + 1))).sqrt() * scale;
        let mut diag: Vec<_> = (0..l).map(|i| (i, i, cx(norm, zero))).collect();
        diag.push((l, l, cx(-T::count(l) * norm, zero)));
        out.push(Operator::from_triplets(dim, diag));
    }
    out
}

/// Dense single-particle Gell-Mann matrices `σ_μ` (unhalved, `Tr σ_μσ_ν = 2δ`).
pub fn gellmann_matrices<T: Real>(d: usize) -> Result<Vec<CMatrix<T>>> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("d = {d} must be at least 2")));
    }
    Ok(gellmann_operators(d, T::one()).iter().map(Operator::to_dense).collect())
}

/// Single-particle `su(d)` basis of unhalved Gell-Mann matrices, `C = 2`.
pub fn build_gellmann<T: Real>(d: usize) -> Result<LieBasis<T>> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("d = {d} must be at least 2")));
    }
    Ok(LieBasis {
        name: format!("su({d})"),
        hilbert_dim: d,
        generators: gellmann_operators(d, T::one()),
        norm_constant: T::lit(2.0),
        d: Some(d),
        n_particles: Some(1),
    })
}

/// Collective `su(d)` generators `O_μ = a† σ_μ a / 2` on the symmetric subspace of `N` qudits.
pub fn build_collective_symmetric<T: Real>(d: usize, n: usize, cap: usize) -> Result<LieBasis<T>> {
    let index = SymmetricIndex::new(d, n, cap)?;
    let generators = gellmann_operators(d, T::lit(0.5))
        .iter()
        .map(|s| index.collective(s))
        .collect();
    let c = binomial((n + d) as u64, (d + 1) as u64)
        .ok_or_else(|| Error::InvalidDimension("norm constant overflows".into()))?;
    Ok(LieBasis {
        name: format!("su({d})_sym"),
        hilbert_dim: index.dim(),
        generators,
        norm_constant: T::lit(c as f64 * 0.5),
        d: Some(d),
        n_particles: Some(n),
    })
}

/// Single spin-1 matrices `(s_x, s_y, s_z)` in the level order `(+1, 0, -1)`.
pub fn spin1_matrices<T: Real>() -> [Operator<T>; 3] {
    let r = T::one() / T::lit(2.0).sqrt();
    let z = T::zero();
    let sx = Operator::from_triplets(
        3,
        [(0, 1, cx(r, z)), (1, 2, cx(r, z)), (1, 0, cx(r, z)), (2, 1, cx(r, z))],
    );
    let sy = Operator::from_triplets(
        3,
        [(0, 1, cx(z, -r)), (1, 2, cx(z, -r)), (1, 0, cx(z, r)), (2, 1, cx(z, r))],
    );
    let sz = Operator::from_triplets(3, [(0, 0, cx(T::one(), z)), (2, 2, cx(-T::one(), z))]);
    [sx, sy, sz]
}

/// Collective spin-1 dipole operators `(S_x, S_y, S_z)` on symmetric qutrits (g₁).
pub fn build_spin1_dipole<T: Real>(n: usize, cap: usize) -> Result<LieBasis<T>> {
    let index = SymmetricIndex::new(3, n, cap)?;
    let generators = spin1_matrices().iter().map(|s| index.collective(s)).collect();
    let nf = n as f64;
    Ok(LieBasis {
        name: "g1".into(),
        hilbert_dim: index.dim(),
        generators,
        norm_constant: T::lit(nf * (nf + 1.0) * (nf + 2.0) * (nf + 3.0) / 12.0),
        d: Some(3),
        n_particles: Some(n),
    })
}

/// Collective hyperfine operators `Q_1 ... Q_8` on symmetric qutrits (g₂).
pub fn build_su3_collective<T: Real>(n: usize, cap: usize) -> Result<LieBasis<T>> {
    let mut basis = build_collective_symmetric::<T>(3, n, cap)?;
    let nf = n as f64;
    basis.name = "g2".into();
    basis.norm_constant = T::lit(nf * (nf + 1.0) * (nf + 2.0) * (nf + 3.0) / 48.0);
    Ok(basis)
}

/// All `D² - 1` traceless observables on a `D`-dimensional space (halved
/// generalized Gell-Mann operators, `C = 1/2`). The cap applies to the
/// generator count.
pub fn build_full_observable_basis<T: Real>(dim: usize, cap: usize) -> Result<LieBasis<T>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("D = {dim} must be at least 2")));
    }
    let count = dim * dim - 1;
    if count > cap {
        return Err(Error::DimensionCap { dim: count, cap });
    }
    Ok(LieBasis {
        name: format!("su({dim})"),
        hilbert_dim: dim,
        generators: gellmann_operators(dim, T::lit(0.5)),
        norm_constant: T::lit(0.5),
        d: Some(dim),
        n_particles: Some(1),
    })
}

/// Collective `Σ_j σ_μ^{(j)}/2` on the full `d^N` tensor product. Intended as
/// an oracle for small `N`.
pub fn build_collective_full<T: Real>(d: usize, n: usize, cap: usize) -> Result<LieBasis<T>> {
    if d < 2 || n < 1 {
        return Err(Error::InvalidDimension(format!("d = {d}, N = {n}")));
    }
    let full = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if full > cap as u128 {
        return Err(Error::DimensionCap {
            dim: usize::try_from(full).unwrap_or(usize::MAX),
            cap,
        });
    }
    let full = full as usize;
    let singles = gellmann_operators(d, T::lit(0.5));
    let strides: Vec<usize> = (0..n).map(|j| d.pow((n - 1 - j) as u32)).collect();
    let generators = singles
        .iter()
        .map(|s| {
            let mut triplets = Vec::new();
            for col in 0..full {
                for &stride in &strides {
                    let level = (col / stride) % d;
                    for (a, b, v) in s.entries() {
                        if b == level {
                            let row = col - b * stride + a * stride;
                            triplets.push((row, col, v));
                        }
                    }
                }
            }
            Operator::from_triplets(full, triplets)
        })
        .collect();
    Ok(LieBasis {
        name: format!("su({d})_full"),
        hilbert_dim: full,
        generators,
        norm_constant: T::lit(n as f64 * (d as f64).powi(n as i32 - 1) * 0.5),
        d: Some(d),
        n_particles: Some(n),
    })
}

/// Quadratic Casimir `Σ_μ G_μ²` and its largest eigenvalue `ζ`.
#[derive(Clone, Debug)]
pub struct Casimir<T: Real> {
    pub operator: HermitianMatrix<T>,
    pub zeta: T,
}

pub fn casimir<T: Real>(basis: &LieBasis<T>) -> Casimir<T> {
    let triplets = basis
        .generators
        .iter()
        .flat_map(|g| g.mul(g).entries().collect::<Vec<_>>())
        .collect::<Vec<_>>();
    let dense = Operator::from_triplets(basis.hilbert_dim, triplets).to_dense();
    let operator = HermitianMatrix::from_hermitian_part(&dense);
    let zeta = eigh(operator.matrix()).max_value();
    Casimir { operator, zeta }
}

/// Measured orthonormality and closure of a basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisReport {
    /// Mean of `Tr(G_μ²)` over the basis.
    pub c_measured: f64,
    /// `max |Tr(G_μ G_ν) - C δ_μν|` against the declared `C`.
    pub max_orthonormality_residual: f64,
    /// `max ‖[G_μ, G_ν] - i f^k_μν G_k‖_max` after projecting onto the basis.
    pub max_closure_residual: f64,
    pub norm_constant: f64,
}

impl BasisReport {
    pub fn is_valid(&self, orthonormality_rel: f64, closure_rel: f64) -> bool {
        self.max_orthonormality_residual <= orthonormality_rel * self.norm_constant
            && self.max_closure_residual <= closure_rel * self.norm_constant
    }
}

/// Trace-Gram residual `max |Tr(G_μ G_ν) - C δ_μν|` over the listed pairs.
pub fn orthonormality_residual<T: Real>(basis: &LieBasis<T>, pairs: impl IntoIterator<Item = (usize, usize)>) -> T {
    let c = basis.norm_constant;
    pairs.into_iter().fold(T::zero(), |acc, (a, b)| {
        let expected = if a == b { c } else { T::zero() };
        let got = basis.generators[a].trace_product(&basis.generators[b]);
        let r = (got - cx(expected, T::zero())).modulus_r();
        if r > acc {
            r
        } else {
            acc
        }
    })
}

/// Expands `[G_a, G_b]` in the basis and returns the max-abs residual.
pub fn closure_residual<T: Real>(basis: &LieBasis<T>, a: usize, b: usize) -> T {
    let comm = basis.generators[a].commutator(&basis.generators[b]);
    let inv_c = T::one() / basis.norm_constant;
    // [G_a, G_b] = i f^k G_k with f^k = Tr(-i [G_a,G_b] G_k) / C, so i f^k = Tr([G_a,G_b] G_k) / C.
    let triplets = basis
        .generators
        .iter()
        .flat_map(|g| {
            let coeff = comm.trace_product(g) * inv_c;
            g.entries().map(move |(r, c, v)| (r, c, -(v * coeff))).collect::<Vec<_>>()
        })
        .chain(comm.entries())
        .collect::<Vec<_>>();
    Operator::from_triplets(basis.hilbert_dim, triplets).max_abs()
}

pub fn verify_basis<T: Real>(basis: &LieBasis<T>) -> BasisReport {
    let n = basis.dim();
    let pairs = (0..n).flat_map(|a| (a..n).map(move |b| (a, b)));
    let orth = orthonormality_residual(basis, pairs.clone());
    let closure = pairs
        .filter(|(a, b)| a != b)
        .map(|(a, b)| closure_residual(basis, a, b))
        .fold(T::zero(), |acc, r| if r > acc { r } else { acc });
    let c_measured = if n == 0 {
        0.0
    } else {
        basis
            .generators
            .iter()
            .map(|g| g.trace_product(g).re.as_f64())
            .sum::<f64>()
            / n as f64
    };
    BasisReport {
        c_measured,
        max_orthonormality_residual: orth.as_f64(),
        max_closure_residual: closure.as_f64(),
        norm_constant: basis.norm_constant.as_f64(),
    }
}
