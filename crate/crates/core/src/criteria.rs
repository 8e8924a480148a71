//! Scalar optimality criteria of a QFIM, the entanglement witness and the
//! average-response estimate.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Qfim;
use crate::lie_basis::{casimir, LieBasis};
use crate::linalg::unitary_from_hamiltonian;
use crate::scalar::{cx, CMatrix, Real};
use crate::states::{uhlmann_distance_sq, DensityMatrix, PureState};

/// Shared with the pseudo-inverse rank decision.
pub const ZERO_TOL_REL: f64 = 1e-10;
/// Relative slack on the witness threshold.
pub const WITNESS_TOL_REL: f64 = 1e-8;
/// Largest rotation angle accepted by the Monte Carlo estimate.
pub const MAX_MC_EPS: f64 = 0.05;
pub const MIN_MC_SAMPLES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    /// `Tr F`
    pub a_opt: f64,
    /// Pseudo-determinant; `None` when every eigenvalue is zero.
    pub d_opt: Option<f64>,
    /// `sqrt(pdet)`, the Jeffreys volume density.
    pub jeffreys: Option<f64>,
    pub e_opt_all: f64,
    pub e_opt_nonzero: Option<f64>,
    /// `pdet / Π F_μμ` over nonzero diagonal entries.
    pub s_opt: Option<f64>,
    /// Always true: the S criterion depends on the chosen basis.
    pub s_opt_basis_dependent: bool,
    pub nonzero_count: usize,
    pub zero_tol_rel: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
}

impl CriteriaReport {
    /// Attaches the separability witness for `N` particles with `d` levels.
    pub fn with_witness(mut self, n: usize, d: usize, max_eig: f64) -> Self {
        self.witness = Some(witness_from(self.a_opt, max_eig, n, d));
        self
    }

    /// Plain-text table, one row per criterion.
    pub fn table(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "undefined".to_string(), |v| format!("{v:.10e}"));
        let mut s = String::new();
        let _ = writeln!(s, "{:<3} {:<34} {}", "", "criterion", "value");
        let _ = writeln!(s, "{:<3} {:<34} {:.10e}", "A", "trace", self.a_opt);
        let _ = writeln!(s, "{:<3} {:<34} {}", "D", "pseudo-determinant", opt(self.d_opt));
        let _ = writeln!(s, "{:<3} {:<34} {}", "", "sqrt(pdet)", opt(self.jeffreys));
        let _ = writeln!(s, "{:<3} {:<34} {:.10e}", "E", "smallest eigenvalue", self.e_opt_all);
        let _ = writeln!(s, "{:<3} {:<34} {}", "", "smallest nonzero eigenvalue", opt(self.e_opt_nonzero));
        let _ = writeln!(s, "{:<3} {:<34} {}", "S", "pdet / diagonal (basis dependent)", opt(self.s_opt));
        let _ = writeln!(s, "{:<3} {:<34} {}", "", "nonzero eigenvalues", self.nonzero_count);
        if let Some(w) = &self.witness {
            let _ = writeln!(s, "{:<3} {:<34} {:.10e}", "", "witness threshold", w.threshold);
            let _ = writeln!(s, "{:<3} {:<34} {}", "", "witness violated", w.violated);
            let _ = writeln!(s, "{:<3} {:<34} {}", "", "k-partite hint", w.k_partite_hint);
        }
        s
    }
}

pub fn evaluate_criteria<T: Real>(qfim: &Qfim<T>, zero_tol_rel: f64) -> CriteriaReport {
    let values: Vec<f64> = qfim.eigenvalues.iter().map(|x| x.as_f64()).collect();
    let lam_max = values.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let tol = zero_tol_rel * lam_max;
    let nonzero: Vec<f64> = values.iter().copied().filter(|&x| lam_max > 0.0 && x > tol).collect();
    let d_opt = (!nonzero.is_empty()).then(|| nonzero.iter().product::<f64>());
    let diag = (0..qfim.dim())
        .map(|k| qfim.matrix[(k, k)].as_f64())
        .filter(|&x| lam_max > 0.0 && x > tol)
        .product::<f64>();
    CriteriaReport {
        a_opt: qfim.trace().as_f64(),
        d_opt,
        jeffreys: d_opt.map(f64::sqrt),
        e_opt_all: values.last().copied().unwrap_or(0.0),
        e_opt_nonzero: nonzero.last().copied(),
        s_opt: d_opt.map(|p| p / diag),
        s_opt_basis_dependent: true,
        nonzero_count: nonzero.len(),
        zero_tol_rel,
        witness: None,
    }
}

/// `Vᵀ F V`
pub fn c_opt<T: Real>(qfim: &Qfim<T>, v: &[T]) -> Result<T> {
    if v.len() != qfim.dim() {
        return Err(Error::DimensionMismatch {
            expected: qfim.dim(),
            found: v.len(),
        });
    }
    let mut acc = T::zero();
    for (mu, &a) in v.iter().enumerate() {
        for (nu, &b) in v.iter().enumerate() {
            acc += a * qfim.matrix[(mu, nu)] * b;
        }
    }
    Ok(acc)
}

/// `λ_max |V|²`, the bound on `c_opt` over the equivalence class.
pub fn c_opt_bound<T: Real>(qfim: &Qfim<T>, v: &[T]) -> T {
    qfim.lambda_max() * v.iter().fold(T::zero(), |a, &x| a + x * x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub violated: bool,
    /// `2N(d-1)`
    pub threshold: f64,
    pub trace: f64,
    pub max_eig: f64,
    /// `floor(λ_max / N)`
    pub k_partite_hint: u64,
}

fn witness_from(trace: f64, max_eig: f64, n: usize, d: usize) -> WitnessReport {
    let threshold = 2.0 * n as f64 * (d as f64 - 1.0);
    WitnessReport {
        violated: trace > threshold * (1.0 + WITNESS_TOL_REL),
        threshold,
        trace,
        max_eig,
        k_partite_hint: (max_eig / n as f64 + 1e-9).floor().max(0.0) as u64,
    }
}

/// Separable states of `N` qudits satisfy `Tr F ≤ 2N(d-1)` over the collective `su(d)` basis.
pub fn entanglement_witness<T: Real>(qfim: &Qfim<T>, n: usize, d: usize) -> WitnessReport {
    witness_from(qfim.trace().as_f64(), qfim.lambda_max().as_f64(), n, d)
}

/// Mean squared Uhlmann distance over rotation axes: `Tr F / dim(g) · ε² / 8`.
pub fn avg_response<T: Real>(qfim: &Qfim<T>, eps: T) -> T {
    if qfim.dim() == 0 {
        return T::zero();
    }
    qfim.trace() / T::count(qfim.dim()) * eps * eps / T::lit(8.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

const MC_CHUNK: usize = 64;

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform points on the unit sphere in `dim` dimensions, one seeded stream per chunk.
pub fn sphere_samples(dim: usize, n_samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let chunks = n_samples.div_ceil(MC_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(n_samples - c * MC_CHUNK);
            (0..len).map(|_| unit_vector(&mut rng, dim)).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Monte Carlo estimate of `E_n̂ Δ²(ρ, U(ε, n̂) ρ U†)` with `U = exp(-i ε n̂·G)`.
pub fn avg_response_mc<T: Real>(
    rho: &DensityMatrix<T>,
    basis: &LieBasis<T>,
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if !(eps > 0.0 && eps <= MAX_MC_EPS) {
        return Err(Error::Regime(format!("eps = {eps} outside (0, {MAX_MC_EPS}]")));
    }
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "n_samples = {n_samples} below {MIN_MC_SAMPLES}"
        )));
    }
    if rho.dim() != basis.hilbert_dim {
        return Err(Error::DimensionMismatch {
            expected: basis.hilbert_dim,
            found: rho.dim(),
        });
    }
    let dense = basis.dense_generators();
    let axes = sphere_samples(basis.dim(), n_samples, seed);
    let values = axes
        .par_iter()
        .map(|axis| {
            let mut h = CMatrix::zeros(basis.hilbert_dim, basis.hilbert_dim);
            for (c, g) in axis.iter().zip(&dense) {
                h += g * cx(T::lit(*c), T::zero());
            }
            let u = unitary_from_hamiltonian(&h, T::lit(eps));
            uhlmann_distance_sq(rho, &rho.conjugate(&u)).map(|x| x.as_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        n_samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AOptDiagnostic {
    /// `Σ_μ ⟨G_μ⟩²`
    pub sum_sq_means: f64,
    /// `4ζ`
    pub four_zeta: f64,
    /// `4ζ - 4 Σ_μ ⟨G_μ⟩²`, the QFIM trace for states on which the Casimir is constant.
    pub trace_check: f64,
}

pub fn a_opt_diagnostic<T: Real>(psi: &PureState<T>, basis: &LieBasis<T>) -> Result<AOptDiagnostic> {
    if psi.dim() != basis.hilbert_dim {
        return Err(Error::DimensionMismatch {
            expected: basis.hilbert_dim,
            found: psi.dim(),
        });
    }
    let sum_sq_means: f64 = basis
        .generators
        .iter()
        .map(|g| psi.expectation(g).as_f64().powi(2))
        .sum();
    let four_zeta = 4.0 * casimir(basis).zeta.as_f64();
    Ok(AOptDiagnostic {
        sum_sq_means,
        four_zeta,
        trace_check: four_zeta - 4.0 * sum_sq_means,
    })
}
