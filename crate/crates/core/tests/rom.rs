mod common;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use taylorom::rom::{compare_with_full, project_state, reconstruct, ReducedOperators};
use taylorom::{
    assemble_damping, assemble_mass, BcKind, Problem, ProductKind, SimConfig, SnapshotBasis,
};

use common::small_cfg;

fn reduced(cfg: SimConfig, degree: usize) -> (Problem, SnapshotBasis, ReducedOperators) {
    let p = Problem::new(cfg).unwrap();
    let basis = p.build_qr(degree).unwrap().basis;
    let red = p.reduce(&basis).unwrap();
    (p, basis, red)
}

/// `Φᵀ diag(w) Φ` computed entry by entry.
fn dense_projection(basis: &SnapshotBasis, w: &[f64]) -> Vec<f64> {
    let n = basis.count();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i + j * n] = basis
                .vector(i)
                .iter()
                .zip(basis.vector(j))
                .zip(w)
                .map(|((a, b), c)| a * b * c)
                .sum();
        }
    }
    out
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

#[test]
fn stiffness_inner_basis_has_identity_stiffness() {
    let (p, basis, red) = reduced(small_cfg(BcKind::Dirichlet), 1);
    assert_eq!(basis.kind(), ProductKind::Stiffness);
    let solver = p.full_solver(0.0).unwrap();
    let n = basis.count();
    let mut kv = vec![0.0; basis.len()];
    for j in 0..n {
        solver.ops.stiffness.apply(basis.vector(j), &mut kv);
        for i in 0..n {
            let kij: f64 = basis.vector(i).iter().zip(&kv).map(|(a, b)| a * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((kij - want).abs() <= 1e-10, "K[{i},{j}] = {kij}");
            assert_eq!(red.stiffness()[i + j * n], want);
        }
    }
}

#[test]
fn affine_mass_matches_reprojection_at_perturbed_theta() {
    for bc in [BcKind::Dirichlet, BcKind::Abc1] {
        let (p, basis, red) = reduced(small_cfg(bc), 2);
        for alpha in [0.0, 0.05, 0.3] {
            let theta = p.theta0.perturbed(&p.dtheta, alpha).unwrap();
            let want = dense_projection(&basis, assemble_mass(&p.grid, &theta).values());
            assert!(max_rel(&red.mass_at(alpha), &want) <= 1e-12);
        }
    }
}

#[test]
fn boundary_damping_matches_full_reprojection() {
    let (p, basis, red) = reduced(small_cfg(BcKind::Abc1), 2);
    for alpha in [0.0, 0.05, 0.3] {
        let theta = p.theta0.perturbed(&p.dtheta, alpha).unwrap();
        let want = dense_projection(&basis, assemble_damping(&p.grid, &theta).values());
        assert!(max_rel(&red.damping_at(alpha), &want) <= 1e-12);
    }
}

#[test]
fn galerkin_reproduces_a_run_inside_its_span() {
    for bc in [BcKind::Dirichlet, BcKind::Abc1] {
        let mut cfg = small_cfg(bc);
        cfg.dt = 0.04;
        cfg.nt = 40;
        cfg.epsilon = 1e-12;
        cfg.snapshot_stride = 1;
        let (p, basis, red) = reduced(cfg, 0);
        assert!(basis.count() < basis.len());
        let coeffs = red.assemble_at_alpha(0.0).unwrap().trajectory().unwrap();
        let series = compare_with_full(&p.full_solver(0.0).unwrap(), &basis, &coeffs).unwrap();
        assert!(series.average <= 1e-8, "{bc:?}: {:e}", series.average);
    }
}

#[test]
fn reduced_model_tracks_full_model_at_reference_parameter() {
    let mut cfg = small_cfg(BcKind::Abc1);
    cfg.epsilon = 1e-4;
    let (p, basis, red) = reduced(cfg, 0);
    let coeffs = red.assemble_at_alpha(0.0).unwrap().trajectory().unwrap();
    let series = compare_with_full(&p.full_solver(0.0).unwrap(), &basis, &coeffs).unwrap();
    assert!(series.average <= 5e-3, "{:e}", series.average);
}

#[test]
fn projection_of_a_basis_combination_recovers_coefficients() {
    let (p, basis, _) = reduced(small_cfg(BcKind::Dirichlet), 1);
    let a: Vec<f64> = (0..basis.count()).map(|i| (i as f64 * 0.37).sin()).collect();
    let u = reconstruct(&basis, &a).unwrap();
    let back = project_state(&basis, &p.inner_product(basis.kind()), &u);
    for (x, y) in a.iter().zip(&back) {
        assert!((x - y).abs() <= 1e-10);
    }
}

#[test]
fn inadmissible_alpha_is_rejected() {
    let (_, _, red) = reduced(small_cfg(BcKind::Dirichlet), 0);
    let err = red.assemble_at_alpha(-10.0).unwrap_err();
    assert!(err.to_string().contains("theta non-positive"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reduced_mass_is_spd_for_admissible_alpha(alpha in 0.0f64..2.0) {
        let (_, _, red) = reduced(small_cfg(BcKind::Abc1), 1);
        let n = red.size();
        let m = DMatrix::from_column_slice(n, n, &red.mass_at(alpha));
        prop_assert!((&m - m.transpose()).amax() <= 1e-14 * m.amax());
        let eig = SymmetricEigen::new(m);
        prop_assert!(eig.eigenvalues.min() > 0.0);
    }

    #[test]
    fn reconstruction_is_linear(seed in 0u64..1000, s in -3.0f64..3.0) {
        let (_, basis, _) = reduced(small_cfg(BcKind::Dirichlet), 0);
        let n = basis.count();
        let a: Vec<f64> = (0..n).map(|i| ((i as u64 + seed) as f64 * 0.91).cos()).collect();
        let b: Vec<f64> = (0..n).map(|i| ((i as u64 * 7 + seed) as f64 * 0.13).sin()).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
        let ua = reconstruct(&basis, &a).unwrap();
        let ub = reconstruct(&basis, &b).unwrap();
        let us = reconstruct(&basis, &sum).unwrap();
        let scale = ua.iter().chain(&ub).fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..us.len() {
            prop_assert!((us[i] - ua[i] - s * ub[i]).abs() <= 1e-12 * scale * (1.0 + s.abs()));
        }
    }
}
