use proptest::prelude::*;
use sphering::diagnostics::{
    compression_h1, compression_h2, cross_stats, objective_g1, objective_g2, structure_certificates,
};
use sphering::fixtures::{random_positive_diagonal, random_spd, sample_gaussian};
use sphering::linalg::{
    cholesky_lower, fix_signs, max_abs_diff, orthogonality_residual, random_orthogonal,
    spd_inv_sqrt, spd_sqrt, sym_eigen, Matrix, SymMatrix,
};
use sphering::moments::{build_model, cov_to_cor, empirical_covariance};
use sphering::whitening::{
    build_whitener, cholesky_cor_matrix, link_matrix, rotation_q1, rotation_q2, whiten,
};
use sphering::{CovarianceModel, DataMatrix, Method};

fn eye(d: usize) -> Matrix {
    Matrix::identity(d, d)
}

fn model(d: usize, seed: u64) -> CovarianceModel {
    CovarianceModel::from_covariance(random_spd(d, seed), None).unwrap()
}

fn random_symmetric(d: usize, seed: u64) -> SymMatrix {
    // indefinite in general: entries from Q diag(±) Qᵀ plus noise
    let q = random_orthogonal(d, seed);
    let g = random_orthogonal(d, seed.wrapping_add(1_000_003));
    let m = &q
        * Matrix::from_fn(d, d, |i, j| if i == j { 3.0 - i as f64 } else { 0.0 })
        * q.transpose()
        + (&g + g.transpose()) * 0.3;
    SymMatrix::new(sphering::linalg::symmetrize(&m)).unwrap()
}

#[test]
fn eigen_invariants_on_random_symmetric() {
    for seed in 0..100 {
        let d = 1 + (seed as usize % 8);
        let m = random_symmetric(d, seed);
        let e = sym_eigen(&m);
        assert!(e.values.as_slice().windows(2).all(|w| w[0] >= w[1]));
        assert!(orthogonality_residual(&e.vectors) < 1e-10, "seed {seed}");
        assert!(
            max_abs_diff(&e.reconstruct(), m.as_matrix()) < 1e-10,
            "seed {seed}"
        );
        for k in 0..d {
            let col = e.vectors.column(k);
            let pivot = if col[k].abs() > 1e-12 { k } else { col.iamax() };
            assert!(col[pivot] > 0.0);
        }
    }
}

#[test]
fn degenerate_eigenspace_still_valid() {
    // eigenvalue 2 with multiplicity 2
    let q = random_orthogonal(3, 5);
    let m = &q * Matrix::from_diagonal(&nalgebra::dvector![2.0, 2.0, 1.0]) * q.transpose();
    let m = SymMatrix::new(sphering::linalg::symmetrize(&m)).unwrap();
    let e = sym_eigen(&m);
    assert!((e.values[0] - 2.0).abs() < 1e-12 && (e.values[1] - 2.0).abs() < 1e-12);
    assert!(max_abs_diff(&e.reconstruct(), m.as_matrix()) < 1e-12);
    assert!(orthogonality_residual(&e.vectors) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spd_roots(d in 1usize..=8, seed in any::<u64>()) {
        let m = random_spd(d, seed);
        let s = spd_sqrt(&m).unwrap();
        let r = spd_inv_sqrt(&m).unwrap();
        prop_assert!(max_abs_diff(&(s.as_matrix() * s.as_matrix()), m.as_matrix()) < 1e-9);
        let rmr = r.as_matrix() * m.as_matrix() * r.as_matrix();
        prop_assert!(max_abs_diff(&rmr, &eye(d)) < 1e-9);
        prop_assert!(max_abs_diff(r.as_matrix(), &r.as_matrix().transpose()) < 1e-10);
    }

    #[test]
    fn cholesky_reconstructs(d in 1usize..=8, seed in any::<u64>()) {
        let m = random_spd(d, seed);
        let l = cholesky_lower(&m).unwrap();
        let l = l.as_matrix();
        prop_assert!(max_abs_diff(&(l * l.transpose()), m.as_matrix()) < 1e-9);
        for i in 0..d {
            prop_assert!(l[(i, i)] > 0.0);
            for j in (i + 1)..d {
                prop_assert_eq!(l[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn fix_signs_idempotent(d in 1usize..=8, seed in any::<u64>()) {
        let q = random_orthogonal(d, seed);
        let once = fix_signs(&q);
        prop_assert_eq!(fix_signs(&once), once.clone());
        prop_assert!(orthogonality_residual(&once) < 1e-10);
    }

    #[test]
    fn cov_to_cor_recomposes(d in 1usize..=8, seed in any::<u64>()) {
        let m = random_spd(d, seed);
        let (v, r) = cov_to_cor(&m).unwrap();
        let vh = Matrix::from_diagonal(&v.map(f64::sqrt));
        prop_assert!(max_abs_diff(&(&vh * r.as_matrix() * &vh), m.as_matrix()) < 1e-12);
        prop_assert!(r.diagonal().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn covariance_row_permutation(seed in any::<u64>(), shift in 1usize..40) {
        let x = sample_gaussian(40, &random_spd(3, seed), seed);
        let n = x.nrows();
        let rolled = DataMatrix::new(Matrix::from_fn(n, 3, |k, i| x.values()[((k + shift) % n, i)])).unwrap();
        let a = empirical_covariance(&x).unwrap();
        let b = empirical_covariance(&rolled).unwrap();
        prop_assert!(max_abs_diff(a.as_matrix(), b.as_matrix()) < 1e-12);
    }

    #[test]
    fn built_model_reconstructs(seed in any::<u64>(), d in 1usize..=6) {
        let x = sample_gaussian(60, &random_spd(d, seed), seed ^ 1);
        let m = build_model(&x).unwrap();
        let vh = m.v_power(0.5);
        prop_assert!(max_abs_diff(&(&vh * m.rho().as_matrix() * &vh), m.sigma().as_matrix()) < 1e-10);
        let l = m.chol_precision().as_matrix();
        let inv = m.sigma().as_matrix().clone().try_inverse().unwrap();
        prop_assert!(max_abs_diff(&(l * l.transpose()), &inv) < 1e-8);
    }
}

#[test]
fn whiteness_all_methods() {
    for seed in 0..100 {
        let d = 1 + (seed as usize % 8);
        let m = model(d, seed);
        let sigma = m.sigma().as_matrix();
        let precision = sigma.clone().try_inverse().unwrap();
        for method in Method::ALL {
            let w = build_whitener(method, &m).unwrap();
            let w = w.matrix();
            assert!(max_abs_diff(&(w * sigma * w.transpose()), &eye(d)) < 1e-8);
            assert!(max_abs_diff(&(w.transpose() * w), &precision) < 1e-7);
        }
    }
}

#[test]
fn zca_is_symmetric() {
    for seed in 0..50 {
        let m = model(1 + seed as usize % 8, seed);
        let w = build_whitener(Method::Zca, &m).unwrap();
        assert!(max_abs_diff(w.matrix(), &w.matrix().transpose()) < 1e-10);
    }
}

#[test]
fn cholesky_cor_collapses() {
    for seed in 0..50 {
        let m = model(1 + seed as usize % 8, seed);
        let w = build_whitener(Method::Cholesky, &m).unwrap();
        assert!(max_abs_diff(&cholesky_cor_matrix(&m).unwrap(), w.matrix()) < 1e-9);
    }
}

#[test]
fn shared_singular_values() {
    for seed in 0..50 {
        let d = 1 + seed as usize % 8;
        let m = model(d, seed);
        let mut expected: Vec<f64> = m
            .eigen_sigma()
            .values
            .iter()
            .map(|v| v.powf(-0.5))
            .collect();
        expected.sort_by(f64::total_cmp);
        for method in Method::ALL {
            let w = build_whitener(method, &m).unwrap();
            let mut sv: Vec<f64> = w
                .matrix()
                .clone()
                .singular_values()
                .iter()
                .copied()
                .collect();
            sv.sort_by(f64::total_cmp);
            for (a, b) in sv.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-8, "{method} seed {seed}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn rotations_are_linked() {
    for seed in 0..50 {
        let d = 1 + seed as usize % 8;
        let m = model(d, seed);
        let a = link_matrix(&m);
        assert!(orthogonality_residual(&a) < 1e-8);
        for method in Method::ALL {
            let w = build_whitener(method, &m).unwrap();
            let q1 = rotation_q1(&w);
            let q2 = rotation_q2(&w);
            assert!(orthogonality_residual(&q1) < 1e-8);
            assert!(orthogonality_residual(&q2) < 1e-8);
            assert!(max_abs_diff(&q1, &(&q2 * &a)) < 1e-8);
        }
    }
}

#[test]
fn correlation_methods_ignore_scale() {
    for seed in 0..20 {
        let d = 2 + seed as usize % 6;
        let x = sample_gaussian(200, &random_spd(d, seed), seed + 100);
        let scale = random_positive_diagonal(d, 0.1, 10.0, seed + 200);
        let xd = DataMatrix::new(Matrix::from_fn(200, d, |k, i| {
            x.values()[(k, i)] * scale[i]
        }))
        .unwrap();
        let (m, md) = (build_model(&x).unwrap(), build_model(&xd).unwrap());
        for method in [Method::ZcaCor, Method::PcaCor] {
            let z = whiten(&x, &build_whitener(method, &m).unwrap(), true).unwrap();
            let zd = whiten(&xd, &build_whitener(method, &md).unwrap(), true).unwrap();
            assert!(
                max_abs_diff(z.values(), zd.values()) < 1e-8,
                "{method} seed {seed}"
            );
        }
    }
}

#[test]
fn column_sum_identity_and_objectives() {
    for seed in 0..50 {
        let d = 1 + seed as usize % 8;
        let m = model(d, seed);
        for method in Method::ALL {
            let w = build_whitener(method, &m).unwrap();
            let s = cross_stats(&w);
            assert!(s.psi_col_sq().iter().all(|v| (v - 1.0).abs() < 1e-8));
            assert!((s.phi_row_sq.sum() - (&s.phi * s.phi.transpose()).trace()).abs() < 1e-10);
            // the objectives evaluated at the method's own rotations
            assert!((objective_g1(&rotation_q1(&w), &m).unwrap() - s.trace_phi).abs() < 1e-8);
            assert!((objective_g2(&rotation_q2(&w), &m).unwrap() - s.trace_psi).abs() < 1e-8);
            assert!((compression_h1(&rotation_q1(&w), &m).unwrap() - &s.phi_row_sq).amax() < 1e-8);
            assert!((compression_h2(&rotation_q2(&w), &m).unwrap() - &s.psi_row_sq).amax() < 1e-8);
            assert!(
                structure_certificates(&s, method).guaranteed_hold(),
                "{method} seed {seed}"
            );
        }
        let zca_cor = cross_stats(&build_whitener(Method::ZcaCor, &m).unwrap());
        assert!(max_abs_diff(&zca_cor.psi, m.rho_sqrt().as_matrix()) < 1e-8);
    }
}

#[test]
fn optimal_methods_win_among_the_five() {
    for seed in 0..30 {
        let m = model(2 + seed as usize % 7, seed);
        let stats: Vec<_> = Method::ALL
            .iter()
            .map(|&k| cross_stats(&build_whitener(k, &m).unwrap()))
            .collect();
        let zca = &stats[0];
        let zca_cor = &stats[3];
        assert!(stats.iter().all(|s| s.trace_phi <= zca.trace_phi + 1e-9));
        assert!(stats
            .iter()
            .all(|s| s.trace_psi <= zca_cor.trace_psi + 1e-9));
        // h₁ at PCA is Λ, h₂ at PCA-cor is Θ
        assert!((&stats[1].phi_row_sq - &m.eigen_sigma().values).amax() < 1e-8);
        assert!((&stats[4].psi_row_sq - &m.eigen_rho().values).amax() < 1e-8);
        // and ZCA minimizes the squared distance between z and x
        assert!(stats
            .iter()
            .all(|s| s.squared_distance >= zca.squared_distance - 1e-9));
    }
}
