use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::lie_basis::{
    build_collective_symmetric, build_gellmann, build_spin1_dipole, build_su3_collective, casimir, DEFAULT_CAP,
};
use crate::linalg::{max_abs_real, unitary_from_hamiltonian};
use crate::states::{
    css, density, ghz_balanced, initial_example_state, level, mix, noon, random_mixed, random_pure, root_fidelity,
};

fn half_basis(d: usize) -> LieBasis<f64> {
    let full = build_gellmann::<f64>(d).unwrap();
    LieBasis {
        name: "su(d)/2".into(),
        generators: full.generators.iter().map(|g| g.scaled(0.5)).collect(),
        norm_constant: 0.5,
        ..full
    }
}

fn pauli_half() -> LieBasis<f64> {
    half_basis(2)
}

fn rel_frobenius(a: &RMatrix<f64>, b: &RMatrix<f64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn assert_spectrum(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= tol * w.abs().max(1.0), "{got:?} vs {want:?}");
    }
}

#[test]
fn pure_state_sld_is_twice_the_derivative() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let basis = half_basis(3);
    let rho = density(&random_pure::<f64, _>(3, &mut rng));
    for g in &basis.generators {
        let l = sld(&rho, g, &Cutoffs::default()).unwrap();
        let want = g.commutator_dense(rho.matrix()) * cx(0.0, -2.0);
        assert!(max_abs(&(l.matrix() - want)) < 1e-10);
    }
}

#[test]
fn maximally_mixed_state_has_no_geometry() {
    let basis = build_su3_collective::<f64>(2, DEFAULT_CAP).unwrap();
    let rho = DensityMatrix::maximally_mixed(basis.hilbert_dim);
    let set = sld_set(&rho, &basis, &Cutoffs::default()).unwrap();
    assert!(set.operators.iter().all(|l| max_abs(l.matrix()) < 1e-14));
    let (f, u) = qfim_and_uct(&rho, &basis, &Cutoffs::default()).unwrap();
    assert!(max_abs_real(&f.matrix) < 1e-14);
    assert!(max_abs_real(&u.matrix) < 1e-14);
    assert!(matches!(incompatibility(&f, &u, 1e-10), Err(Error::UndefinedIncompatibility)));
}

#[test]
fn sld_residual_on_rank_deficient_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let basis = half_basis(6);
    for rank in 1..=6 {
        let rho = random_mixed::<f64, _>(6, rank, &mut rng);
        let set = sld_set(&rho, &basis, &Cutoffs::default()).unwrap();
        assert_eq!(set.support_rank, rank);
        for (g, l) in basis.generators.iter().zip(&set.operators) {
            assert!(hermiticity_residual(l.matrix()) < 1e-10);
            assert!(sld_residual(&rho, g, l) < 1e-8);
        }
    }
}

#[test]
fn general_and_pure_paths_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let basis = build_spin1_dipole::<f64>(3, DEFAULT_CAP).unwrap();
    for _ in 0..10 {
        let psi = random_pure::<f64, _>(basis.hilbert_dim, &mut rng);
        let (fp, up) = qfim_and_uct_pure(&psi, &basis).unwrap();
        let (fg, ug) = qfim_and_uct(&density(&psi), &basis, &Cutoffs::default()).unwrap();
        assert!(rel_frobenius(&fp.matrix, &fg.matrix) < 1e-8);
        assert!((&up.matrix - &ug.matrix).norm() < 1e-8 * fp.matrix.norm());
        let tr = qfim_trace_pure(&psi, &basis).unwrap();
        assert!((tr - fp.trace()).abs() < 1e-10 * tr);
    }
}

#[test]
fn coherent_state_spectrum() {
    for d in 2..=4 {
        let basis = build_collective_symmetric::<f64>(d, 3, DEFAULT_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        let single = random_pure::<f64, _>(d, &mut rng);
        let psi = css(3, single.amplitudes().as_slice(), DEFAULT_CAP).unwrap();
        let f = qfim_pure(&psi, &basis).unwrap();
        let mut want = vec![3.0; 2 * (d - 1)];
        want.extend(vec![0.0; (d - 1) * (d - 1)]);
        assert_spectrum(&f.eigenvalues, &want, 1e-8);
    }
}

#[test]
fn example_state_sits_at_the_standard_quantum_limit() {
    let basis = build_spin1_dipole::<f64>(10, DEFAULT_CAP).unwrap();
    let f = qfim_pure(&initial_example_state::<f64>(10, DEFAULT_CAP).unwrap(), &basis).unwrap();
    assert_spectrum(&f.eigenvalues, &[20.0, 20.0, 0.0], 1e-9);
    assert!(f.matrix[(0, 0)].abs() < 1e-9);
}

#[test]
fn noon_spectrum_over_su3() {
    let basis = build_su3_collective::<f64>(10, DEFAULT_CAP).unwrap();
    let psi = noon(10, &level::<f64>(3, 0), &level::<f64>(3, 2), DEFAULT_CAP).unwrap();
    let f = qfim_pure(&psi, &basis).unwrap();
    assert_spectrum(&f.eigenvalues, &[100.0, 10.0, 10.0, 5.0, 5.0, 5.0, 5.0, 0.0], 1e-9);
}

#[test]
fn ghz_trace_is_four_casimir() {
    for n in 2..=5 {
        let basis = build_su3_collective::<f64>(n, DEFAULT_CAP).unwrap();
        let zeta = casimir(&basis).zeta;
        let tr = qfim_trace_pure(&ghz_balanced::<f64>(3, n, DEFAULT_CAP).unwrap(), &basis).unwrap();
        assert!((tr - 4.0 * zeta).abs() < 1e-9 * tr);
    }
}

#[test]
fn qubit_curvature_by_hand() {
    // |0⟩ with σ/2: ⟨G_x G_y⟩ = i/4, so U_xy = 1 and F = diag(1, 1, 0)
    let basis = pauli_half();
    let rho = density(&PureState::new(crate::linalg::dense_vector(&level::<f64>(2, 0))).unwrap());
    let (f, u) = qfim_and_uct(&rho, &basis, &Cutoffs::default()).unwrap();
    let want_f = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    let want_u = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert!(max_abs_real(&(&f.matrix - want_f)) < 1e-14);
    assert!(max_abs_real(&(&u.matrix - want_u)) < 1e-14);
    let inc = incompatibility(&f, &u, 1e-10).unwrap();
    assert!((inc.gamma - 1.0).abs() < 1e-12);
    assert_eq!(inc.rank, 2);
}

#[test]
fn nearly_mixed_state_has_bounded_incompatibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let basis = half_basis(3);
    let psi = density(&random_pure::<f64, _>(3, &mut rng));
    let eps = 1e-6;
    let rho = mix(&[(1.0 - eps, DensityMatrix::maximally_mixed(3)), (eps, psi)]).unwrap();
    let inc = incompatibility_of(&rho, &basis, &Cutoffs::default()).unwrap();
    assert!(inc.gamma <= 1.0 + 1e-8);
}

#[test]
fn raised_spectrum_pairs_and_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let basis = half_basis(3);
    for rank in 1..=3 {
        let rho = random_mixed::<f64, _>(3, rank, &mut rng);
        let (f, u) = qfim_and_uct(&rho, &basis, &Cutoffs::default()).unwrap();
        let inc = incompatibility(&f, &u, 1e-10).unwrap();
        let n = inc.raised_eigenvalues.len();
        for k in 0..n {
            let a = inc.raised_eigenvalues[k];
            let b = inc.raised_eigenvalues[n - 1 - k];
            assert!((a + b).abs() < 1e-8);
            assert!(a.abs() <= 1.0 + 1e-8);
        }
        let herm = raised_spectrum_hermitian(&f, &u, 1e-10).unwrap();
        for (x, y) in herm.iter().zip(&inc.raised_eigenvalues) {
            assert!((x - y).abs() < 1e-8, "{herm:?} {:?}", inc.raised_eigenvalues);
        }
    }
}

#[test]
fn commuting_generator_rows_vanish() {

    let basis = half_basis(3);
    // diagonal ρ commutes with the two diagonal Gell-Mann generators (indices 6, 7)
    let weights = [0.5, 0.3, 0.2];
    let rho = DensityMatrix::new(CMatrix::from_diagonal(&crate::linalg::dense_vector(
        &weights.map(|w| cx(w, 0.0)),
    )))
    .unwrap();
    let (f, u) = qfim_and_uct(&rho, &basis, &Cutoffs::default()).unwrap();
    for mu in [6, 7] {
        for nu in 0..8 {
            assert!(f.matrix[(mu, nu)].abs() < 1e-10);
            assert!(u.matrix[(mu, nu)].abs() < 1e-10);
        }
    }
}

#[test]
fn qfim_matches_fidelity_hessian() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let basis = half_basis(3);
    let dense = basis.dense_generators();
    let h = 1e-3;
    let rotated = |rho: &DensityMatrix<f64>, theta: &[f64]| {
        let mut gen = CMatrix::zeros(3, 3);
        for (t, g) in theta.iter().zip(&dense) {
            gen += g * cx(*t, 0.0);
        }
        rho.conjugate(&unitary_from_hamiltonian(&gen, 1.0))
    };
    for _ in 0..3 {
        let rho = random_mixed::<f64, _>(3, 3, &mut rng);
        let f = qfim(&rho, &basis, &Cutoffs::default()).unwrap();
        let fid = |theta: &[f64]| root_fidelity(&rho, &rotated(&rho, theta)).unwrap();
        for mu in 0..8 {
            for nu in mu..8 {
                let at = |a: f64, b: f64| {
                    let mut t = [0.0; 8];
                    t[mu] += a;
                    t[nu] += b;
                    fid(&t)
                };
                let second = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
                assert!((-4.0 * second - f.matrix[(mu, nu)]).abs() < 1e-5, "{mu} {nu}");
            }
        }
    }
}

#[test]
fn cfim_single_qubit() {
    let basis = LieBasis {
        name: "z".into(),
        ..pauli_half().subset("z", &[2])
    };
    let r = 1.0 / 2f64.sqrt();
    let plus = density(&PureState::new(crate::linalg::dense_vector(&[cx(r, 0.0), cx(r, 0.0)])).unwrap());
    let f = qfim(&plus, &basis, &Cutoffs::default()).unwrap();
    assert!((f.matrix[(0, 0)] - 1.0).abs() < 1e-12);
    let z_povm = projective_povm(&CMatrix::<f64>::identity(2, 2));
    let z = cfim(&plus, &basis, &z_povm).unwrap();
    assert!(z[(0, 0)].abs() < 1e-12);
    let y = DMatrix::from_row_slice(2, 2, &[cx(r, 0.0), cx(r, 0.0), cx(0.0, r), cx(0.0, -r)]);
    let y_cfim = cfim(&plus, &basis, &projective_povm(&y)).unwrap();
    assert!((y_cfim[(0, 0)] - 1.0).abs() < 1e-10);
}

#[test]
fn cfim_with_commuting_eigenprojectors_vanishes() {
    let basis = build_collective_symmetric::<f64>(2, 2, DEFAULT_CAP).unwrap();
    let rho = DensityMatrix::<f64>::maximally_mixed(3);
    let povm = projective_povm(&CMatrix::<f64>::identity(3, 3));
    assert!(max_abs_real(&cfim(&rho, &basis, &povm).unwrap()) < 1e-15);
}

#[test]
fn cfim_is_dominated_by_qfim() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let basis = half_basis(3);
    for _ in 0..5 {
        let rho = random_mixed::<f64, _>(3, 2, &mut rng);
        let povm = random_povm::<f64, _>(3, 4, &mut rng);
        let f = qfim(&rho, &basis, &Cutoffs::default()).unwrap();
        let c = cfim(&rho, &basis, &povm).unwrap();
        let (gap, _) = eigh_real_desc(&(&f.matrix - c));
        assert!(*gap.last().unwrap() > -1e-8);
    }
}

#[test]
fn cfim_rejects_incomplete_povm() {
    let rho = DensityMatrix::<f64>::maximally_mixed(2);
    let mut povm = projective_povm(&CMatrix::<f64>::identity(2, 2));
    povm.pop();
    assert!(matches!(cfim(&rho, &pauli_half(), &povm), Err(Error::InvalidPovm(_))));
}

#[test]
fn precision_bound_examples() {
    assert!((precision_bound(400.0f64, 1.0, 1, 1.0).unwrap() - 1.0 / 400.0).abs() < 1e-18);
    assert!((precision_bound(20.0f64, 1.0, 100, 2.0).unwrap() - 1.0 / 8000.0).abs() < 1e-18);
    assert!(precision_bound(0.0f64, 1.0, 1, 1.0).is_none());
}

#[test]
fn single_precision_qfim() {
    let basis = build_spin1_dipole::<f32>(2, DEFAULT_CAP).unwrap();
    let psi = initial_example_state::<f32>(2, DEFAULT_CAP).unwrap();
    let f = qfim(&density(&psi), &basis, &Cutoffs::default()).unwrap();
    assert!((f.eigenvalues[0] - 4.0).abs() < 1e-4);
}
