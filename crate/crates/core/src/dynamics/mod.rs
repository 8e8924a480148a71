//! Example dynamics on symmetric spin-1 ensembles: one-axis twisting followed
//! by a hyperfine rotation, and (α, β) sweeps of the resulting geometry.

use std::collections::HashSet;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{incompatibility, qfim_and_uct_pure, qfim_trace_pure, Cutoffs, Qfim, Uct};
use crate::lie_basis::{
    build_full_observable_basis, build_spin1_dipole, build_su3_collective, LieBasis, Operator, SymmetricIndex,
    DEFAULT_CAP,
};
use crate::linalg::{eigh, Eigh, HermitianMatrix};
use crate::scalar::{cx, CMatrix, CVector, Real};
use crate::states::{initial_example_state, PureState};

/// `exp(-i H t) ψ` via the eigendecomposition of `H`.
pub fn evolve<T: Real>(psi: &PureState<T>, h: &HermitianMatrix<T>, t: T) -> Result<PureState<T>> {
    if h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            found: h.dim(),
        });
    }
    Ok(Propagator::new(h.matrix()).apply(psi, t))
}

/// Cached eigendecomposition of a Hamiltonian for repeated evolution.
#[derive(Clone, Debug)]
pub struct Propagator<T: Real> {
    eigen: Eigh<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(h: &CMatrix<T>) -> Self {
        Self { eigen: eigh(h) }
    }

    pub fn apply(&self, psi: &PureState<T>, t: T) -> PureState<T> {
        let v = &self.eigen.vectors;
        let mut coeffs = v.adjoint() * psi.amplitudes();
        for (c, &lam) in coeffs.iter_mut().zip(&self.eigen.values) {
            let phase = -(lam * t);
            *c *= cx(phase.cos(), phase.sin());
        }
        PureState::from_raw(v * coeffs)
    }
}

/// Diagonal of `S_z` on symmetric qutrits: `m = n_{+1} - n_{-1}`.
pub fn sz_diagonal(index: &SymmetricIndex) -> Vec<i64> {
    index
        .occupations()
        .map(|occ| i64::from(occ[0]) - i64::from(occ[2]))
        .collect()
}

fn symmetric_qutrits(psi_dim: usize, n: usize) -> Result<SymmetricIndex> {
    let index = SymmetricIndex::new(3, n, DEFAULT_CAP.max(psi_dim))?;
    if index.dim() != psi_dim {
        return Err(Error::DimensionMismatch {
            expected: index.dim(),
            found: psi_dim,
        });
    }
    Ok(index)
}

/// `exp(-i α S_z²) ψ`, a pure phase in the occupation basis.
pub fn oat_unitary_apply<T: Real>(psi: &PureState<T>, n: usize, alpha: T) -> Result<PureState<T>> {
    let index = symmetric_qutrits(psi.dim(), n)?;
    Ok(apply_oat_phases(psi, &sz_diagonal(&index), alpha))
}

fn apply_oat_phases<T: Real>(psi: &PureState<T>, m: &[i64], alpha: T) -> PureState<T> {
    let amps = CVector::from_fn(psi.dim(), |i, _| {
        let phase = -(alpha * T::lit((m[i] * m[i]) as f64));
        psi.amplitudes()[i] * cx(phase.cos(), phase.sin())
    });
    PureState::from_raw(amps)
}

/// `exp(-i α (S_z² + S²)) ψ`; the Casimir term is dense on the symmetric subspace.
pub fn oat_with_casimir_apply<T: Real>(psi: &PureState<T>, n: usize, alpha: T) -> Result<PureState<T>> {
    let b = build_spin1_dipole::<T>(n, DEFAULT_CAP.max(psi.dim()))?;
    if b.hilbert_dim != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.hilbert_dim,
            found: psi.dim(),
        });
    }
    Ok(Propagator::new(&oat_casimir_hamiltonian(&b)).apply(psi, alpha))
}

fn oat_casimir_hamiltonian<T: Real>(dipole: &LieBasis<T>) -> CMatrix<T> {
    let sz = &dipole.generators[2];
    let mut h = sz.mul(sz).to_dense();
    for s in &dipole.generators {
        h += s.mul(s).to_dense();
    }
    h
}

/// Collective `Q_3 = ½ Σ_j (|+1⟩⟨-1| + |-1⟩⟨+1|)_j`.
pub fn q3_operator<T: Real>(index: &SymmetricIndex) -> Operator<T> {
    let half = cx(T::lit(0.5), T::zero());
    let single = Operator::from_triplets(3, [(0, 2, half), (2, 0, half)]);
    index.collective(&single)
}

/// `exp(-i β Q_3) ψ`.
pub fn hyperfine_unitary_apply<T: Real>(psi: &PureState<T>, n: usize, beta: T) -> Result<PureState<T>> {
    let index = symmetric_qutrits(psi.dim(), n)?;
    Ok(Propagator::new(&q3_operator::<T>(&index).to_dense()).apply(psi, beta))
}

/// `exp(-i β Q_3) exp(-i α S_z²) ψ_init`.
pub fn example_state<T: Real>(n: usize, alpha: T, beta: T) -> Result<PureState<T>> {
    let psi = initial_example_state::<T>(n, DEFAULT_CAP)?;
    let squeezed = oat_unitary_apply(&psi, n, alpha)?;
    hyperfine_unitary_apply(&squeezed, n, beta)
}

/// Per-point quantities a sweep can record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    LambdaMaxG1,
    LambdaMaxG2,
    GammaG1,
    GammaG2,
    TraceG3,
    SpectrumG1,
    SpectrumG2,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::LambdaMaxG1,
        Quantity::LambdaMaxG2,
        Quantity::GammaG1,
        Quantity::GammaG2,
        Quantity::TraceG3,
        Quantity::SpectrumG1,
        Quantity::SpectrumG2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::LambdaMaxG1 => "lambda_max_g1",
            Quantity::LambdaMaxG2 => "lambda_max_g2",
            Quantity::GammaG1 => "gamma_g1",
            Quantity::GammaG2 => "gamma_g2",
            Quantity::TraceG3 => "trace_g3",
            Quantity::SpectrumG1 => "spectrum_g1",
            Quantity::SpectrumG2 => "spectrum_g2",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|q| q.name() == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown quantity `{name}`")))
    }

    fn needs_g1(self) -> bool {
        matches!(self, Quantity::LambdaMaxG1 | Quantity::GammaG1 | Quantity::SpectrumG1)
    }

    fn needs_g2(self) -> bool {
        matches!(self, Quantity::LambdaMaxG2 | Quantity::GammaG2 | Quantity::SpectrumG2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub quantities: Vec<Quantity>,
    /// Adds `χ S²` to the twisting Hamiltonian.
    #[serde(default)]
    pub include_casimir: bool,
    #[serde(default)]
    pub cutoffs: Cutoffs,
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

impl SweepSpec {
    pub fn new(n: usize, alpha_grid: Vec<f64>, beta_grid: Vec<f64>, quantities: Vec<Quantity>) -> Self {
        Self {
            n,
            alpha_grid,
            beta_grid,
            quantities,
            include_casimir: false,
            cutoffs: Cutoffs::default(),
        }
    }

    /// Named grids: `fig4-coarse` (4 × 4) and `full` (101 × 101 over `[0, π] × [0, 2π]`).
    pub fn preset(name: &str, n: usize) -> Result<Self> {
        use std::f64::consts::PI;
        let all = Quantity::ALL.to_vec();
        match name {
            "fig4-coarse" => Ok(Self::new(
                n,
                vec![0.0, PI / 8.0, PI / 4.0, PI / 2.0],
                vec![0.0, PI / 4.0, PI / 2.0, PI],
                all,
            )),
            "full" | "default" => Ok(Self::new(n, linspace(0.0, PI, 101), linspace(0.0, 2.0 * PI, 101), all)),
            other => Err(Error::InvalidParameter(format!("unknown sweep preset `{other}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (label, grid) in [("alpha_grid", &self.alpha_grid), ("beta_grid", &self.beta_grid)] {
            if grid.is_empty() {
                return Err(Error::InvalidParameter(format!("{label} is empty")));
            }
            if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter(format!("{label} must be finite and strictly increasing")));
            }
        }
        if self.quantities.is_empty() {
            return Err(Error::InvalidParameter("no quantities requested".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidDimension("N must be at least 1".into()));
        }
        Ok(())
    }

    fn wants(&self, q: Quantity) -> bool {
        self.quantities.contains(&q)
    }
}

/// One grid point; absent quantities are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max_g1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max_g2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_g1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_g2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_g3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_g1: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_g2: Option<Vec<f64>>,
    /// Largest deviation of `|ψ|` from one at this point.
    pub norm_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub cutoffs: Cutoffs,
    pub seed: Option<u64>,
    pub runtime_seconds: f64,
    /// `1 / (2N)²`, the display floor for incompatibility.
    pub gamma_floor: f64,
    pub hilbert_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub records: Vec<SweepRecord>,
    pub metadata: SweepMetadata,
}

struct SweepContext {
    g1: LieBasis<f64>,
    g2: LieBasis<f64>,
    g3: Option<LieBasis<f64>>,
    sz: Vec<i64>,
    q3: Propagator<f64>,
    twist: Option<Propagator<f64>>,
    initial: PureState<f64>,
}

fn gamma(f: &Qfim<f64>, u: &Uct<f64>, rank_rel: f64) -> Result<Option<f64>> {
    match incompatibility(f, u, rank_rel) {
        Ok(r) => Ok(Some(r.gamma)),
        Err(Error::UndefinedIncompatibility) => Ok(None),
        Err(e) => Err(e),
    }
}

impl SweepContext {
    fn new(spec: &SweepSpec, cap: usize) -> Result<Self> {
        let index = SymmetricIndex::new(3, spec.n, cap)?;
        let g1 = build_spin1_dipole::<f64>(spec.n, cap)?;
        let g2 = build_su3_collective::<f64>(spec.n, cap)?;
        let g3 = if spec.wants(Quantity::TraceG3) {
            Some(build_full_observable_basis::<f64>(index.dim(), cap)?)
        } else {
            None
        };
        let twist = spec.include_casimir.then(|| Propagator::new(&oat_casimir_hamiltonian(&g1)));
        Ok(Self {
            sz: sz_diagonal(&index),
            q3: Propagator::new(&q3_operator::<f64>(&index).to_dense()),
            initial: initial_example_state(spec.n, cap)?,
            twist,
            g1,
            g2,
            g3,
        })
    }

    fn squeeze(&self, alpha: f64) -> PureState<f64> {
        match &self.twist {
            Some(p) => p.apply(&self.initial, alpha),
            None => apply_oat_phases(&self.initial, &self.sz, alpha),
        }
    }

    fn point(&self, spec: &SweepSpec, squeezed: &PureState<f64>, alpha: f64, beta: f64) -> Result<SweepRecord> {
        let psi = self.q3.apply(squeezed, beta);
        let drift = (squeezed.norm() - 1.0).abs().max((psi.norm() - 1.0).abs());
        let mut rec = SweepRecord {
            alpha,
            beta,
            norm_drift: drift,
            ..Default::default()
        };
        let rank = spec.cutoffs.rank_rel;
        if spec.quantities.iter().any(|q| q.needs_g1()) {
            let (f, u) = qfim_and_uct_pure(&psi, &self.g1)?;
            if spec.wants(Quantity::LambdaMaxG1) {
                rec.lambda_max_g1 = Some(f.lambda_max());
            }
            if spec.wants(Quantity::SpectrumG1) {
                rec.spectrum_g1 = Some(f.eigenvalues.clone());
            }
            if spec.wants(Quantity::GammaG1) {
                rec.gamma_g1 = gamma(&f, &u, rank)?;
            }
        }
        if spec.quantities.iter().any(|q| q.needs_g2()) {
            let (f, u) = qfim_and_uct_pure(&psi, &self.g2)?;
            if spec.wants(Quantity::LambdaMaxG2) {
                rec.lambda_max_g2 = Some(f.lambda_max());
            }
            if spec.wants(Quantity::SpectrumG2) {
                rec.spectrum_g2 = Some(f.eigenvalues.clone());
            }
            if spec.wants(Quantity::GammaG2) {
                rec.gamma_g2 = gamma(&f, &u, rank)?;
            }
        }
        if let Some(g3) = &self.g3 {
            rec.trace_g3 = Some(qfim_trace_pure(&psi, g3)?);
        }
        Ok(rec)
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with_cap(spec, DEFAULT_CAP)
}

/// Evaluates every `(α, β)` grid point, α-major, in parallel with grid-ordered output.
pub fn run_sweep_with_cap(spec: &SweepSpec, cap: usize) -> Result<SweepResult> {
    spec.validate()?;
    let unique: HashSet<_> = spec.quantities.iter().collect();
    if unique.len() != spec.quantities.len() {
        return Err(Error::InvalidParameter("duplicate quantity".into()));
    }
    let start = Instant::now();
    let ctx = SweepContext::new(spec, cap)?;
    let squeezed: Vec<PureState<f64>> = spec.alpha_grid.par_iter().map(|&a| ctx.squeeze(a)).collect();
    let points: Vec<(usize, f64)> = spec
        .alpha_grid
        .iter()
        .enumerate()
        .flat_map(|(i, _)| spec.beta_grid.iter().map(move |&b| (i, b)))
        .collect();
    let records = points
        .par_iter()
        .map(|&(i, beta)| ctx.point(spec, &squeezed[i], spec.alpha_grid[i], beta))
        .collect::<Result<Vec<_>>>()?;
    let n = spec.n as f64;
    Ok(SweepResult {
        spec: spec.clone(),
        records,
        metadata: SweepMetadata {
            cutoffs: spec.cutoffs,
            seed: None,
            runtime_seconds: start.elapsed().as_secs_f64(),
            gamma_floor: 1.0 / (4.0 * n * n),
            hilbert_dim: ctx.g1.hilbert_dim,
        },
    })
}

impl SweepResult {
    /// Column names; spectra expand to `spectrum_g1_0`, `spectrum_g1_1`, ... and the
    /// cutoffs close every row.
    pub fn csv_header(&self) -> Vec<String> {
        let mut cols = vec!["alpha".to_string(), "beta".to_string()];
        for q in Quantity::ALL {
            if !self.spec.wants(q) {
                continue;
            }
            match q {
                Quantity::SpectrumG1 => (0..3).for_each(|k| cols.push(format!("spectrum_g1_{k}"))),
                Quantity::SpectrumG2 => (0..8).for_each(|k| cols.push(format!("spectrum_g2_{k}"))),
                other => cols.push(other.name().to_string()),
            }
        }
        cols.push("rho_support_rel".into());
        cols.push("rank_rel".into());
        cols
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        let cell = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:.17e}"));
        for r in &self.records {
            let mut row = vec![format!("{:.17e}", r.alpha), format!("{:.17e}", r.beta)];
            for q in Quantity::ALL {
                if !self.spec.wants(q) {
                    continue;
                }
                match q {
                    Quantity::LambdaMaxG1 => row.push(cell(r.lambda_max_g1)),
                    Quantity::LambdaMaxG2 => row.push(cell(r.lambda_max_g2)),
                    Quantity::GammaG1 => row.push(cell(r.gamma_g1)),
                    Quantity::GammaG2 => row.push(cell(r.gamma_g2)),
                    Quantity::TraceG3 => row.push(cell(r.trace_g3)),
                    Quantity::SpectrumG1 => {
                        let s = r.spectrum_g1.as_deref().unwrap_or(&[]);
                        (0..3).for_each(|k| row.push(cell(s.get(k).copied())));
                    }
                    Quantity::SpectrumG2 => {
                        let s = r.spectrum_g2.as_deref().unwrap_or(&[]);
                        (0..8).for_each(|k| row.push(cell(s.get(k).copied())));
                    }
                }
            }
            row.push(format!("{:e}", self.spec.cutoffs.rho_support_rel));
            row.push(format!("{:e}", self.spec.cutoffs.rank_rel));
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Records at fixed `alpha_grid[i]`, ordered by β.
    pub fn row(&self, alpha_index: usize) -> &[SweepRecord] {
        let nb = self.spec.beta_grid.len();
        &self.records[alpha_index * nb..(alpha_index + 1) * nb]
    }
}

/// Flattest stretch of `λ_max(g₁)` along `β = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauScan {
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    pub lambda_max_g1: f64,
    pub gamma_g1: f64,
    /// Spread `max - min` of `λ_max(g₁)` over the window, relative to its value.
    pub relative_spread: f64,
    pub window_half_width: usize,
    pub alpha_grid: Vec<f64>,
}

/// Scans `α` at `β = 0` and returns the interior point whose surrounding window
/// of `±half_width` grid points has the smallest relative spread of `λ_max(g₁)`.
pub fn plateau_scan(n: usize, alpha_grid: &[f64], half_width: usize) -> Result<PlateauScan> {
    if alpha_grid.len() < 2 * half_width + 1 || half_width == 0 {
        return Err(Error::InvalidParameter("alpha grid too short for the window".into()));
    }
    let spec = SweepSpec::new(
        n,
        alpha_grid.to_vec(),
        vec![0.0],
        vec![Quantity::LambdaMaxG1, Quantity::GammaG1],
    );
    let sweep = run_sweep(&spec)?;
    let lam: Vec<f64> = sweep.records.iter().map(|r| r.lambda_max_g1.unwrap_or(0.0)).collect();
    let (best, spread) = (half_width..lam.len() - half_width)
        .map(|i| {
            let w = &lam[i - half_width..=i + half_width];
            let hi = w.iter().copied().fold(f64::MIN, f64::max);
            let lo = w.iter().copied().fold(f64::MAX, f64::min);
            (i, (hi - lo) / lam[i].abs().max(1e-300))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty interior");
    Ok(PlateauScan {
        n,
        alpha: alpha_grid[best],
        lambda_max_g1: lam[best],
        gamma_g1: sweep.records[best].gamma_g1.unwrap_or(f64::NAN),
        relative_spread: spread,
        window_half_width: half_width,
        alpha_grid: alpha_grid.to_vec(),
    })
}

#[cfg(test)]
mod tests;
