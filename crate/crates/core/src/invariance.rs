//! Group sampling, adjoint matrices and executable checks that QFIM and UCT
//! spectra are constant on group orbits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{evaluate_criteria, ZERO_TOL_REL};
use crate::dynamics::oat_unitary_apply;
use crate::error::{Error, Result};
use crate::geometry::{incompatibility, qfim, qfim_and_uct, Cutoffs, Qfim, Uct};
use crate::lie_basis::{
    build_collective_symmetric, build_full_observable_basis, build_spin1_dipole, build_su3_collective, LieBasis,
    DEFAULT_CAP,
};
use crate::linalg::{identity, max_abs, max_abs_real, unitary_from_hamiltonian};
use crate::scalar::{cx, CMatrix, RMatrix, Real};
use crate::states::{density, initial_example_state, random_mixed, random_pure, DensityMatrix};

pub const UNITARITY_TOL: f64 = 1e-10;
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// `U = exp(-i Σ_μ c_μ G_μ)`.
#[derive(Clone, Debug)]
pub struct GroupElement<T: Real> {
    pub unitary: CMatrix<T>,
    pub coefficients: Vec<T>,
    pub basis_name: String,
}

pub fn group_element<T: Real>(basis: &LieBasis<T>, coefficients: Vec<T>) -> Result<GroupElement<T>> {
    if coefficients.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: coefficients.len(),
        });
    }
    let h = basis.combination(&coefficients).to_dense();
    let unitary = unitary_from_hamiltonian(&h, T::one());
    let residual = unitarity_residual(&unitary);
    if residual > T::lit(UNITARITY_TOL) {
        return Err(Error::Numerical(format!("unitarity residual {residual}")));
    }
    Ok(GroupElement {
        unitary,
        coefficients,
        basis_name: basis.name.clone(),
    })
}

/// `c_μ ~ U(-scale, scale)` from a seeded ChaCha8 stream.
pub fn random_group_element<T: Real>(basis: &LieBasis<T>, seed: u64, scale: f64) -> Result<GroupElement<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coefficients = (0..basis.dim())
        .map(|_| {
            if scale > 0.0 {
                T::lit(rng.random_range(-scale..scale))
            } else {
                T::zero()
            }
        })
        .collect();
    group_element(basis, coefficients)
}

pub fn unitarity_residual<T: Real>(u: &CMatrix<T>) -> T {
    max_abs(&(u.adjoint() * u - identity::<T>(u.nrows())))
}

/// `Λ^α_μ = Tr(G_α U† G_μ U) / C`, stored with `α` as the row index.
#[derive(Clone, Debug)]
pub struct AdjointMatrix<T: Real> {
    pub matrix: RMatrix<T>,
    /// `‖Λ Λᵀ - 1‖_max`
    pub orthogonality_residual: T,
    /// `max |U† G_μ U - Σ_α Λ^α_μ G_α|`
    pub consistency_residual: T,
    pub determinant: T,
}

/// Fails with [`Error::NotInGroup`] when `U` does not map the algebra to itself.
pub fn adjoint_matrix<T: Real>(unitary: &CMatrix<T>, basis: &LieBasis<T>) -> Result<AdjointMatrix<T>> {
    if unitary.nrows() != basis.hilbert_dim || !unitary.is_square() {
        return Err(Error::DimensionMismatch {
            expected: basis.hilbert_dim,
            found: unitary.nrows(),
        });
    }
    let k = basis.dim();
    let inv_c = T::one() / basis.norm_constant;
    let conjugated: Vec<CMatrix<T>> = basis
        .generators
        .par_iter()
        .map(|g| unitary.adjoint() * g.left_mul(unitary))
        .collect();
    let columns: Vec<Vec<T>> = conjugated
        .par_iter()
        .map(|w| basis.generators.iter().map(|ga| ga.trace_with_dense(w).re * inv_c).collect())
        .collect();
    let matrix = RMatrix::from_fn(k, k, |alpha, mu| columns[mu][alpha]);
    let orthogonality_residual = max_abs_real(&(&matrix * matrix.transpose() - RMatrix::identity(k, k)));
    let consistency_residual = conjugated
        .par_iter()
        .enumerate()
        .map(|(mu, w)| {
            let mut expanded = w.clone();
            for (alpha, g) in basis.generators.iter().enumerate() {
                let coef = cx(matrix[(alpha, mu)], T::zero());
                for (r, c, v) in g.entries() {
                    expanded[(r, c)] -= v * coef;
                }
            }
            max_abs(&expanded)
        })
        .reduce(T::zero, |a, b| a.max(b));
    if orthogonality_residual > T::lit(ORTHOGONALITY_TOL) || consistency_residual > T::lit(ORTHOGONALITY_TOL) {
        return Err(Error::NotInGroup(orthogonality_residual.max(consistency_residual).as_f64()));
    }
    let determinant = matrix.clone().determinant();
    Ok(AdjointMatrix {
        matrix,
        orthogonality_residual,
        consistency_residual,
        determinant,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCheck {
    pub pass: bool,
    pub max_eigenvalue_deviation: f64,
    pub lambda_max: f64,
}

fn spectra_check<T: Real>(a: &Qfim<T>, b: &Qfim<T>, tol: f64) -> SpectrumCheck {
    let dev = a
        .eigenvalues
        .iter()
        .zip(&b.eigenvalues)
        .fold(0.0f64, |m, (x, y)| m.max((*x - *y).abs().as_f64()));
    let lambda_max = a.lambda_max().as_f64();
    SpectrumCheck {
        pass: dev < tol * lambda_max.max(1.0),
        max_eigenvalue_deviation: dev,
        lambda_max,
    }
}

/// Compares the sorted QFIM spectra of `ρ` and `U ρ U†`.
pub fn check_spectrum_invariance<T: Real>(
    rho: &DensityMatrix<T>,
    basis: &LieBasis<T>,
    unitary: &CMatrix<T>,
    tol: f64,
    cutoffs: &Cutoffs,
) -> Result<SpectrumCheck> {
    let before = qfim(rho, basis, cutoffs)?;
    let after = qfim(&rho.conjugate(unitary), basis, cutoffs)?;
    Ok(spectra_check(&before, &after, tol))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawCheck {
    pub pass: bool,
    /// `‖F[ρ̃] - Λᵀ F[ρ] Λ‖_max`
    pub residual: f64,
    /// `‖F[ρ̃] Λᵀv - λ Λᵀv‖` for the top eigenpair `(λ, v)` of `F[ρ]`.
    pub eigenvector_residual: f64,
}

fn law_check<T: Real>(before: &Qfim<T>, after: &Qfim<T>, lam: &RMatrix<T>, tol: f64) -> LawCheck {
    let predicted = lam.transpose() * &before.matrix * lam;
    let residual = max_abs_real(&(&after.matrix - predicted)).as_f64();
    let eigenvector_residual = if before.dim() > 0 {
        let v = lam.transpose() * before.eigenvectors.column(0);
        (&after.matrix * &v - &v * before.lambda_max()).norm().as_f64()
    } else {
        0.0
    };
    let scale = 1.0 + before.lambda_max().as_f64();
    LawCheck {
        pass: residual < tol * scale && eigenvector_residual < tol * scale,
        residual,
        eigenvector_residual,
    }
}

/// Checks `F[U ρ U†] = Λᵀ F[ρ] Λ`.
pub fn check_transformation_law<T: Real>(
    rho: &DensityMatrix<T>,
    basis: &LieBasis<T>,
    element: &GroupElement<T>,
    tol: f64,
    cutoffs: &Cutoffs,
) -> Result<LawCheck> {
    let lam = adjoint_matrix(&element.unitary, basis)?;
    let before = qfim(rho, basis, cutoffs)?;
    let after = qfim(&rho.conjugate(&element.unitary), basis, cutoffs)?;
    Ok(law_check(&before, &after, &lam.matrix, tol))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UctCheck {
    pub pass: bool,
    /// `‖U[ρ̃] - Λᵀ U[ρ] Λ‖_max`
    pub law_residual: f64,
    /// Largest difference between sorted raised-UCT spectra.
    pub spectrum_residual: f64,
    pub gamma_before: Option<f64>,
    pub gamma_after: Option<f64>,
    pub gamma_deviation: f64,
    /// `max |λ_k + λ_{n-1-k}|` over the raised spectrum of `ρ`.
    pub pairing_residual: f64,
    /// `max(|λ| - 1, 0)` over the raised spectrum of `ρ`.
    pub bound_excess: f64,
}

fn uct_check<T: Real>(
    before: (&Qfim<T>, &Uct<T>),
    after: (&Qfim<T>, &Uct<T>),
    lam: &RMatrix<T>,
    tol: f64,
    rank_rel: f64,
) -> Result<UctCheck> {
    let predicted = lam.transpose() * &before.1.matrix * lam;
    let law_residual = max_abs_real(&(&after.1.matrix - predicted)).as_f64();
    let raised = |f: &Qfim<T>, u: &Uct<T>| match incompatibility(f, u, rank_rel) {
        Ok(r) => Ok(Some(r)),
        Err(Error::UndefinedIncompatibility) => Ok(None),
        Err(e) => Err(e),
    };
    let rb = raised(before.0, before.1)?;
    let ra = raised(after.0, after.1)?;
    let (mut spectrum_residual, mut pairing_residual, mut bound_excess) = (0.0f64, 0.0f64, 0.0f64);
    if let (Some(b), Some(a)) = (&rb, &ra) {
        spectrum_residual = b
            .raised_eigenvalues
            .iter()
            .zip(&a.raised_eigenvalues)
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()));
        if b.rank != a.rank {
            spectrum_residual = f64::INFINITY;
        }
    }
    if let Some(b) = &rb {
        let n = b.raised_eigenvalues.len();
        for k in 0..n {
            pairing_residual = pairing_residual.max((b.raised_eigenvalues[k] + b.raised_eigenvalues[n - 1 - k]).abs());
            bound_excess = bound_excess.max(b.raised_eigenvalues[k].abs() - 1.0);
        }
    }
    let gamma_before = rb.as_ref().map(|r| r.gamma);
    let gamma_after = ra.as_ref().map(|r| r.gamma);
    let gamma_deviation = match (gamma_before, gamma_after) {
        (Some(x), Some(y)) => (x - y).abs(),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    };
    let scale = 1.0 + before.0.lambda_max().as_f64();
    Ok(UctCheck {
        pass: law_residual < tol * scale
            && spectrum_residual < tol
            && gamma_deviation < tol
            && pairing_residual < 1e-8
            && bound_excess <= 1e-8,
        law_residual,
        spectrum_residual,
        gamma_before,
        gamma_after,
        gamma_deviation,
        pairing_residual,
        bound_excess,
    })
}

/// Checks `U[U ρ U†] = Λᵀ U[ρ] Λ` and invariance of the raised-UCT spectrum and `γ`.
pub fn check_uct_invariance<T: Real>(
    rho: &DensityMatrix<T>,
    basis: &LieBasis<T>,
    element: &GroupElement<T>,
    tol: f64,
    cutoffs: &Cutoffs,
) -> Result<UctCheck> {
    let lam = adjoint_matrix(&element.unitary, basis)?;
    let (fb, ub) = qfim_and_uct(rho, basis, cutoffs)?;
    let (fa, ua) = qfim_and_uct(&rho.conjugate(&element.unitary), basis, cutoffs)?;
    uct_check((&fb, &ub), (&fa, &ua), &lam.matrix, tol, cutoffs.rank_rel)
}

/// Number of eigenvalues above `rel_tol · λ_max`.
pub fn manifold_dimension<T: Real>(qfim: &Qfim<T>, rel_tol: f64) -> usize {
    evaluate_criteria(qfim, rel_tol).nonzero_count
}

/// Basis families exercised by the suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Spin-1 dipole operators on `N` symmetric qutrits.
    G1 {
        #[serde(rename = "N")]
        n: usize,
    },
    /// Collective `su(3)` on `N` symmetric qutrits.
    G2 {
        #[serde(rename = "N")]
        n: usize,
    },
    /// Single-particle `su(d)`.
    Su { d: usize },
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::G1 { n } => format!("g1(N={n})"),
            Family::G2 { n } => format!("g2(N={n})"),
            Family::Su { d } => format!("su({d})"),
        }
    }

    pub fn build(&self, cap: usize) -> Result<LieBasis<f64>> {
        match *self {
            Family::G1 { n } => build_spin1_dipole(n, cap),
            Family::G2 { n } => build_su3_collective(n, cap),
            Family::Su { d } => build_collective_symmetric(d, 1, cap),
        }
    }

    /// The standard suite: g₁ and g₂ at `N ∈ {2, 4}`, single-particle `su(2)` and `su(3)`.
    pub fn standard() -> Vec<Family> {
        vec![
            Family::G1 { n: 2 },
            Family::G1 { n: 4 },
            Family::G2 { n: 2 },
            Family::G2 { n: 4 },
            Family::Su { d: 2 },
            Family::Su { d: 3 },
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(default = "Family::standard")]
    pub families: Vec<Family>,
    #[serde(default = "default_cases")]
    pub cases_per_family: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub cutoffs: Cutoffs,
}

fn default_cases() -> usize {
    20
}

fn default_scale() -> f64 {
    std::f64::consts::PI
}

fn default_tol() -> f64 {
    1e-7
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            families: Family::standard(),
            cases_per_family: default_cases(),
            seed: 0,
            scale: default_scale(),
            tol: default_tol(),
            cutoffs: Cutoffs::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub family: String,
    pub case: usize,
    pub state_rank: usize,
    pub spectrum: SpectrumCheck,
    pub law: LawCheck,
    pub uct: UctCheck,
    pub orthogonality_residual: f64,
    pub determinant: f64,
    /// Largest relative change of `A`, `D`, `E` and the manifold dimension.
    pub criteria_deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativeControl {
    pub description: String,
    pub max_eigenvalue_deviation: f64,
    /// Controls pass when the deviation exceeds this threshold.
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub pass: bool,
    pub cases: Vec<CaseReport>,
    pub negative_controls: Vec<NegativeControl>,
    pub max_spectrum_deviation: f64,
    pub max_law_residual: f64,
    pub max_uct_law_residual: f64,
    pub max_gamma_deviation: f64,
    pub max_orthogonality_residual: f64,
}

fn rel_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn criteria_deviation(before: &Qfim<f64>, after: &Qfim<f64>) -> f64 {
    let a = evaluate_criteria(before, ZERO_TOL_REL);
    let b = evaluate_criteria(after, ZERO_TOL_REL);
    let mut dev = rel_change(a.a_opt, b.a_opt).max(rel_change(a.e_opt_all, b.e_opt_all));
    match (a.d_opt, b.d_opt) {
        (Some(x), Some(y)) => dev = dev.max((x - y).abs() / x.abs().max(1e-300)),
        (None, None) => {}
        _ => dev = f64::INFINITY,
    }
    if a.nonzero_count != b.nonzero_count {
        dev = f64::INFINITY;
    }
    dev
}

/// One random state and group element; state ranks cycle through `1, 2, D`.
pub fn run_case(basis: &LieBasis<f64>, label: &str, case: usize, config: &SuiteConfig) -> Result<CaseReport> {
    let dim = basis.hilbert_dim;
    let ranks = [1, 2.min(dim), dim];
    let state_rank = ranks[case % ranks.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(case as u64 * 2 + 1);
    let rho = if state_rank == 1 {
        density(&random_pure::<f64, _>(dim, &mut rng))
    } else {
        random_mixed::<f64, _>(dim, state_rank, &mut rng)
    };
    let element_seed = config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(case as u64);
    let element = random_group_element(basis, element_seed, config.scale)?;
    let lam = adjoint_matrix(&element.unitary, basis)?;
    let (fb, ub) = qfim_and_uct(&rho, basis, &config.cutoffs)?;
    let (fa, ua) = qfim_and_uct(&rho.conjugate(&element.unitary), basis, &config.cutoffs)?;
    let spectrum = spectra_check(&fb, &fa, config.tol);
    let law = law_check(&fb, &fa, &lam.matrix, config.tol);
    let uct = uct_check((&fb, &ub), (&fa, &ua), &lam.matrix, config.tol, config.cutoffs.rank_rel)?;
    let criteria_deviation = criteria_deviation(&fb, &fa);
    let det_ok = (lam.determinant - 1.0).abs() < 1e-6;
    Ok(CaseReport {
        family: label.to_string(),
        case,
        state_rank,
        pass: spectrum.pass && law.pass && uct.pass && det_ok && criteria_deviation < config.tol,
        spectrum,
        law,
        uct,
        orthogonality_residual: lam.orthogonality_residual,
        determinant: lam.determinant,
        criteria_deviation,
    })
}

/// Twisting is outside the dipole group; a random `su(D)` element is outside the hyperfine group.
pub fn negative_controls(seed: u64, cutoffs: &Cutoffs) -> Result<Vec<NegativeControl>> {
    let threshold = 1e-3;
    let n = 4;
    let g1 = build_spin1_dipole::<f64>(n, DEFAULT_CAP)?;
    let psi = initial_example_state::<f64>(n, DEFAULT_CAP)?;
    let twisted = oat_unitary_apply(&psi, n, 0.3)?;
    let a = qfim(&density(&psi), &g1, cutoffs)?;
    let b = qfim(&density(&twisted), &g1, cutoffs)?;
    let oat = spectra_check(&a, &b, 0.0).max_eigenvalue_deviation;

    let g2 = build_su3_collective::<f64>(n, DEFAULT_CAP)?;
    let full = build_full_observable_basis::<f64>(g2.hilbert_dim, DEFAULT_CAP)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let rho = density(&random_pure::<f64, _>(g2.hilbert_dim, &mut rng));
    let outside = random_group_element(&full, seed ^ 0x5EED, 1.0)?;
    let a = qfim(&rho, &g2, cutoffs)?;
    let b = qfim(&rho.conjugate(&outside.unitary), &g2, cutoffs)?;
    let su_d = spectra_check(&a, &b, 0.0).max_eigenvalue_deviation;

    Ok(vec![
        NegativeControl {
            description: format!("one-axis twisting (alpha = 0.3) on g1, N = {n}"),
            max_eigenvalue_deviation: oat,
            threshold,
            pass: oat > threshold,
        },
        NegativeControl {
            description: format!("random su(D) element on g2, N = {n}"),
            max_eigenvalue_deviation: su_d,
            threshold,
            pass: su_d > threshold,
        },
    ])
}

pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let bases = config
        .families
        .iter()
        .map(|f| Ok((f.label(), f.build(DEFAULT_CAP)?)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..bases.len())
        .flat_map(|b| (0..config.cases_per_family).map(move |c| (b, c)))
        .collect();
    let cases = jobs
        .par_iter()
        .map(|&(b, c)| run_case(&bases[b].1, &bases[b].0, c, config))
        .collect::<Result<Vec<_>>>()?;
    let negative_controls = negative_controls(config.seed, &config.cutoffs)?;
    let fold = |f: &dyn Fn(&CaseReport) -> f64| cases.iter().map(f).fold(0.0f64, f64::max);
    Ok(SuiteReport {
        pass: cases.iter().all(|c| c.pass) && negative_controls.iter().all(|c| c.pass),
        max_spectrum_deviation: fold(&|c| c.spectrum.max_eigenvalue_deviation / c.spectrum.lambda_max.max(1.0)),
        max_law_residual: fold(&|c| c.law.residual),
        max_uct_law_residual: fold(&|c| c.uct.law_residual),
        max_gamma_deviation: fold(&|c| c.uct.gamma_deviation),
        max_orthogonality_residual: fold(&|c| c.orthogonality_residual),
        cases,
        negative_controls,
    })
}
