use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::qfim_pure;
use crate::scalar::Modulus;
use crate::states::random_pure;

/// `exp(-iHt)` by scaling and squaring a truncated Taylor series.
fn expm_oracle(h: &CMatrix<f64>, t: f64) -> CMatrix<f64> {
    let a = h * cx(0.0, -t);
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = (norm.max(1.0).log2().ceil() as u32) + 4;
    let scaled = &a * cx(0.5f64.powi(squarings as i32), 0.0);
    let n = h.nrows();
    let mut term = CMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled * cx(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix<f64> {
    let a = CMatrix::from_fn(n, n, |_, _| {
        let p = random_pure::<f64, _>(2, rng);
        p.amplitudes()[0]
    });
    HermitianMatrix::from_hermitian_part(&(&a + a.adjoint()))
}

fn close(a: &PureState<f64>, b: &PureState<f64>, tol: f64) -> bool {
    (a.amplitudes() - b.amplitudes()).norm() < tol
}

#[test]
fn evolve_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = random_pure::<f64, _>(6, &mut rng);
    let h = random_hermitian(6, &mut rng);
    assert!(close(&evolve(&psi, &h, 0.0).unwrap(), &psi, 1e-14));
    let composed = evolve(&evolve(&psi, &h, 0.3).unwrap(), &h, 0.9).unwrap();
    let direct = evolve(&psi, &h, 1.2).unwrap();
    assert!(close(&composed, &direct, 1e-9));
    assert!((direct.norm() - 1.0).abs() < 1e-10);
    let oracle = PureState::from_raw(expm_oracle(h.matrix(), 1.2) * psi.amplitudes());
    assert!(close(&direct, &oracle, 1e-9));
    let wrong = random_hermitian(5, &mut rng);
    assert!(evolve(&psi, &wrong, 1.0).is_err());
}

#[test]
fn diagonal_hamiltonian_is_a_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let psi = random_pure::<f64, _>(3, &mut rng);
    let diag = [0.5, -1.0, 2.0];
    let h = HermitianMatrix::from_hermitian_part(&CMatrix::from_diagonal(&CVector::from_fn(3, |i, _| cx(diag[i], 0.0))));
    let out = evolve(&psi, &h, 0.7).unwrap();
    for i in 0..3 {
        let want = psi.amplitudes()[i] * cx(0.0, -0.7 * diag[i]).exp();
        assert!((out.amplitudes()[i] - want).modulus_r() < 1e-14);
    }
}

#[test]
fn twisting_identities() {
    let psi = initial_example_state::<f64>(6, DEFAULT_CAP).unwrap();
    assert!(close(&oat_unitary_apply(&psi, 6, 0.0).unwrap(), &psi, 1e-15));
    assert!(close(&oat_unitary_apply(&psi, 6, 2.0 * PI).unwrap(), &psi, 1e-10));
    let out = oat_unitary_apply(&psi, 6, 0.37).unwrap();
    assert!((out.norm() - 1.0).abs() < 1e-12);
    assert!(oat_unitary_apply(&psi, 5, 0.1).is_err());
}

#[test]
fn twisting_matches_dense_exponential() {
    let b = build_spin1_dipole::<f64>(4, DEFAULT_CAP).unwrap();
    let sz = b.generators[2].to_dense();
    let psi = initial_example_state::<f64>(4, DEFAULT_CAP).unwrap();
    let oracle = PureState::from_raw(expm_oracle(&(&sz * &sz), 0.8) * psi.amplitudes());
    assert!(close(&oat_unitary_apply(&psi, 4, 0.8).unwrap(), &oracle, 1e-9));
}

#[test]
fn twisting_preserves_total_spin() {
    let n = 6;
    let b = build_spin1_dipole::<f64>(n, DEFAULT_CAP).unwrap();
    let s2 = b
        .generators
        .iter()
        .map(|s| s.mul(s))
        .reduce(|a, c| Operator::linear_combination(a.dim(), [(1.0, &a), (1.0, &c)]))
        .unwrap();
    let psi = initial_example_state::<f64>(n, DEFAULT_CAP).unwrap();
    let before = psi.expectation(&s2);
    assert!((before - (n * (n + 1)) as f64).abs() < 1e-9);
    for alpha in [0.2, 0.9, 1.7] {
        let after = oat_unitary_apply(&psi, n, alpha).unwrap().expectation(&s2);
        assert!((after - before).abs() < 1e-9);
    }
}

#[test]
fn casimir_term_does_not_change_spectra() {
    let n = 4;
    let psi = initial_example_state::<f64>(n, DEFAULT_CAP).unwrap();
    let b = build_su3_collective::<f64>(n, DEFAULT_CAP).unwrap();
    for alpha in [0.3, 1.1] {
        let plain = qfim_pure(&oat_unitary_apply(&psi, n, alpha).unwrap(), &b).unwrap();
        let with = qfim_pure(&oat_with_casimir_apply(&psi, n, alpha).unwrap(), &b).unwrap();
        for (x, y) in plain.eigenvalues.iter().zip(&with.eigenvalues) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}

#[test]
fn q3_is_a_hyperfine_generator() {
    let index = SymmetricIndex::new(3, 3, DEFAULT_CAP).unwrap();
    let b = build_su3_collective::<f64>(3, DEFAULT_CAP).unwrap();
    let diff = q3_operator::<f64>(&index).sub(&b.generators[2]);
    assert!(diff.max_abs() < 1e-15);
}

#[test]
fn hyperfine_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let psi = random_pure::<f64, _>(3, &mut rng);
    assert!(close(&hyperfine_unitary_apply(&psi, 1, 0.0).unwrap(), &psi, 1e-15));
    let index = SymmetricIndex::new(3, 1, DEFAULT_CAP).unwrap();
    let q3 = q3_operator::<f64>(&index).to_dense();
    let oracle = PureState::from_raw(expm_oracle(&q3, 2.0 * PI) * psi.amplitudes());
    assert!(close(&hyperfine_unitary_apply(&psi, 1, 2.0 * PI).unwrap(), &oracle, 1e-9));
    // the spectrum of Q_3 is {-1/2, 0, 1/2}, so 4π is the identity
    assert!(close(&hyperfine_unitary_apply(&psi, 1, 4.0 * PI).unwrap(), &psi, 1e-10));
}

#[test]
fn hyperfine_preserves_hyperfine_spectrum() {
    let n = 5;
    let b = build_su3_collective::<f64>(n, DEFAULT_CAP).unwrap();
    let squeezed = oat_unitary_apply(&initial_example_state::<f64>(n, DEFAULT_CAP).unwrap(), n, 0.6).unwrap();
    let base = qfim_pure(&squeezed, &b).unwrap();
    for beta in [0.4, 1.3, 3.0] {
        let f = qfim_pure(&hyperfine_unitary_apply(&squeezed, n, beta).unwrap(), &b).unwrap();
        assert!((f.lambda_max() - base.lambda_max()).abs() < 1e-7 * base.lambda_max());
    }
}

#[test]
fn example_state_limits() {
    let g1 = build_spin1_dipole::<f64>(10, DEFAULT_CAP).unwrap();
    let g2 = build_su3_collective::<f64>(10, DEFAULT_CAP).unwrap();
    let f = qfim_pure(&example_state::<f64>(10, 0.0, 0.0).unwrap(), &g1).unwrap();
    for (x, y) in f.eigenvalues.iter().zip([20.0, 20.0, 0.0]) {
        assert!((x - y).abs() < 1e-9);
    }
    let psi = example_state::<f64>(10, PI / 2.0, 0.0).unwrap();
    assert!((qfim_pure(&psi, &g1).unwrap().lambda_max() - 400.0).abs() < 1e-8);
    assert!((qfim_pure(&psi, &g2).unwrap().lambda_max() - 100.0).abs() < 1e-8);
    let rotated = example_state::<f64>(10, PI / 2.0, 0.5).unwrap();
    assert!(qfim_pure(&rotated, &g1).unwrap().lambda_max() < 400.0 - 1e-3);
    assert!((qfim_pure(&rotated, &g2).unwrap().lambda_max() - 100.0).abs() < 1e-7);
}

#[test]
fn sweep_heisenberg_point_and_g3_trace() {
    let spec = SweepSpec::new(10, vec![PI / 2.0], vec![0.0, 1.0], vec![Quantity::LambdaMaxG1, Quantity::TraceG3]);
    let r = run_sweep(&spec).unwrap();
    assert_eq!(r.records.len(), 2);
    assert!((r.records[0].lambda_max_g1.unwrap() - 400.0).abs() < 1e-8);
    for rec in &r.records {
        assert!((rec.trace_g3.unwrap() - 130.0).abs() < 1e-8);
        assert!(rec.norm_drift < 1e-10);
    }
    assert!((r.metadata.gamma_floor - 2.5e-3).abs() < 1e-15);
    assert_eq!(r.metadata.hilbert_dim, 66);
}

#[test]
fn sweep_hyperfine_invariance_small_n() {
    let grid = linspace(0.0, PI, 5);
    let spec = SweepSpec::new(4, grid.clone(), grid, vec![Quantity::GammaG2, Quantity::SpectrumG2, Quantity::SpectrumG1]);
    let r = run_sweep(&spec).unwrap();
    assert_eq!(r.records.len(), 25);
    for i in 0..5 {
        let row = r.row(i);
        let g0 = row[0].gamma_g2.unwrap();
        let s0 = row[0].spectrum_g2.clone().unwrap();
        for rec in row {
            assert_eq!((rec.alpha, rec.beta), (spec.alpha_grid[i], rec.beta));
            assert!((rec.gamma_g2.unwrap() - g0).abs() < 1e-7);
            for (x, y) in rec.spectrum_g2.as_ref().unwrap().iter().zip(&s0) {
                assert!((x - y).abs() < 1e-7 * s0[0]);
            }
        }
    }
    // both spectra respond to twisting
    let top: Vec<f64> = (0..5).map(|i| r.row(i)[0].spectrum_g1.as_ref().unwrap()[0]).collect();
    let spread = top.iter().copied().fold(f64::MIN, f64::max) - top.iter().copied().fold(f64::MAX, f64::min);
    assert!(spread > 1e-3 * top[0]);
}

#[test]
fn sweep_is_deterministic_and_writes_csv() {
    let spec = SweepSpec::new(3, vec![0.1, 0.5], vec![0.0, 0.2, 0.4], Quantity::ALL.to_vec());
    let a = run_sweep(&spec).unwrap();
    let b = run_sweep(&spec).unwrap();
    assert_eq!(a.records, b.records);
    let mut buf = Vec::new();
    a.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("alpha,beta,lambda_max_g1,lambda_max_g2,gamma_g1,gamma_g2,trace_g3,spectrum_g1_0"));
    assert_eq!(lines[0].split(',').count(), 2 + 5 + 3 + 8 + 2);
    assert!(lines[0].ends_with("rho_support_rel,rank_rel"));
    let json = serde_json::to_string(&a).unwrap();
    let back: SweepResult = serde_json::from_str(&json).unwrap();
    assert_eq!(back.records, a.records);
}

#[test]
fn sweep_spec_validation() {
    let bad = SweepSpec::new(3, vec![0.5, 0.1], vec![0.0], vec![Quantity::GammaG1]);
    assert!(matches!(run_sweep(&bad), Err(Error::InvalidParameter(_))));
    let empty = SweepSpec::new(3, vec![], vec![0.0], vec![Quantity::GammaG1]);
    assert!(run_sweep(&empty).is_err());
    let dup = SweepSpec::new(3, vec![0.0], vec![0.0], vec![Quantity::GammaG1, Quantity::GammaG1]);
    assert!(run_sweep(&dup).is_err());
    assert!(Quantity::parse("lambda_max_g3").is_err());
    assert_eq!(Quantity::parse("trace_g3").unwrap(), Quantity::TraceG3);
    let capped = SweepSpec::new(10, vec![0.0], vec![0.0], vec![Quantity::TraceG3]);
    assert!(matches!(run_sweep_with_cap(&capped, 100), Err(Error::DimensionCap { .. })));
    assert!(serde_json::from_str::<SweepSpec>(r#"{"N":2,"alpha_grid":[0],"beta_grid":[0],"quantities":["nope"]}"#).is_err());
}

#[test]
fn presets() {
    let p = SweepSpec::preset("fig4-coarse", 10).unwrap();
    assert_eq!(p.alpha_grid.len(), 4);
    assert_eq!(p.beta_grid, vec![0.0, PI / 4.0, PI / 2.0, PI]);
    let full = SweepSpec::preset("full", 10).unwrap();
    assert_eq!((full.alpha_grid.len(), full.beta_grid.len()), (101, 101));
    assert!((full.beta_grid[100] - 2.0 * PI).abs() < 1e-15);
    assert!(SweepSpec::preset("nope", 10).is_err());
}
