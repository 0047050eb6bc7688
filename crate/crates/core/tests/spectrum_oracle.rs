mod common;

use common::{oracle_eigenvalues, spectral_distance};
use hbgt::graph::{build_cycle, build_er_balanced, build_exponential};
use hbgt::spectrum::{
    self, alpha_bound, beta_bound, build_system_matrix, stability_report, Verdict,
};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0))
}

#[test]
fn hundred_random_matrices_match_characteristic_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = 1 + trial % 6;
        let m = random_matrix(&mut rng, n);
        let ours = spectrum::eig(&m).unwrap().eigenvalues;
        let oracle = oracle_eigenvalues(&m);
        let d = spectral_distance(&ours, &oracle);
        assert!(d <= 1e-6, "trial {trial} (n = {n}): distance {d}\n{m:?}");
        worst = worst.max(d);
    }
    assert!(worst < 1e-8, "worst distance {worst}");
}

#[test]
fn small_laplacians_match_oracle() {
    let nets = [
        build_cycle(5, 0.7, false).unwrap(),
        build_cycle(6, 0.5, true).unwrap(),
        build_exponential(4, 1.0).unwrap(),
        build_er_balanced(6, 0.5, 3).unwrap(),
    ];
    for net in &nets {
        let m = net.laplacian().matrix().clone();
        let d = spectral_distance(
            &spectrum::eig(&m).unwrap().eigenvalues,
            &oracle_eigenvalues(&m),
        );
        assert!(d <= 1e-6, "{}: {d}", net.label());
    }
}

#[test]
fn closed_loop_matrix_matches_oracle() {
    let net = build_cycle(3, 1.0, false).unwrap();
    let hessians: Vec<Array2<f64>> = [2.0, 0.5, 1.0]
        .iter()
        .map(|&h| Array2::from_elem((1, 1), h))
        .collect();
    for beta in [0.0, 0.4] {
        let sys = build_system_matrix(&net.laplacian(), &hessians, 0.2, beta, &[1.0; 3]).unwrap();
        let ours = spectrum::eig(&sys.matrix).unwrap().eigenvalues;
        let d = spectral_distance(&ours, &oracle_eigenvalues(&sys.matrix));
        assert!(d <= 1e-6, "beta {beta}: {d}");
    }
}

#[test]
fn uniform_link_slope_scales_the_spectrum() {
    let net = build_er_balanced(8, 0.4, 17).unwrap();
    let lap = net.laplacian().matrix().clone();
    let base = spectrum::eig(&lap).unwrap().eigenvalues;
    for kappa in [0.25, 0.5, 0.9, 1.0, 1.3, 2.0] {
        let scaled = Array2::from_shape_fn(lap.dim(), |(i, j)| lap[[i, j]] * kappa);
        let ours = spectrum::eig(&scaled).unwrap().eigenvalues;
        let expected: Vec<_> = base.iter().map(|e| e * kappa).collect();
        // both lists are sorted the same way, so compare entrywise
        for (a, b) in ours.iter().zip(&expected) {
            assert!(
                (a - b).norm() <= 1e-12 * kappa * 8.0,
                "kappa {kappa}: {a} vs {b}"
            );
        }
        if kappa == 1.0 {
            assert_eq!(ours, base);
        }
    }
}

#[test]
fn uniform_link_slope_in_closed_loop_is_equivalent_to_scaled_laplacian() {
    let net = build_cycle(4, 1.0, true).unwrap();
    let hessians = vec![Array2::from_elem((1, 1), 1.0); 4];
    let kappa = 0.6;
    let with_slope =
        build_system_matrix(&net.laplacian(), &hessians, 0.1, 0.3, &[kappa; 4]).unwrap();
    let scaled_net = build_cycle(4, kappa, true).unwrap();
    let scaled =
        build_system_matrix(&scaled_net.laplacian(), &hessians, 0.1, 0.3, &[1.0; 4]).unwrap();
    let d = spectral_distance(
        &spectrum::eig(&with_slope.matrix).unwrap().eigenvalues,
        &spectrum::eig(&scaled.matrix).unwrap().eigenvalues,
    );
    assert!(d <= 1e-12, "{d}");
}

#[test]
fn below_the_bound_the_linearisation_is_stable() {
    let nets = [
        build_cycle(6, 0.5, true).unwrap(),
        build_exponential(8, 1.0).unwrap(),
        build_er_balanced(7, 0.4, 9).unwrap(),
    ];
    let curvatures = [3.0, 1.0, 0.5, 2.0, 1.5, 0.8, 2.5, 1.2];
    for net in &nets {
        let n = net.n();
        let hessians: Vec<_> = curvatures[..n]
            .iter()
            .map(|&h| Array2::from_elem((1, 1), h))
            .collect();
        let zeta = 3.0;
        let l2 = spectrum::lambda2(&net.laplacian()).unwrap().re.abs();
        for beta in [0.0, 0.3, 0.6, 0.9] {
            let alpha = 0.9 * alpha_bound(beta, l2, zeta).unwrap();
            let sys = build_system_matrix(&net.laplacian(), &hessians, alpha, beta, &vec![1.0; n])
                .unwrap();
            let report = stability_report(&sys).unwrap();
            assert_eq!(
                report.verdict,
                Verdict::Stable,
                "{} beta {beta}",
                net.label()
            );
        }
    }
}

#[test]
fn zero_step_size_is_not_converging() {
    // without the tracking gain the consensus modes have no pull towards an optimum
    let net = build_cycle(4, 1.0, true).unwrap();
    let hessians = vec![Array2::from_elem((1, 1), 1.0); 4];
    let sys = build_system_matrix(&net.laplacian(), &hessians, 0.0, 0.2, &[1.0; 4]).unwrap();
    assert_eq!(
        stability_report(&sys).unwrap().verdict,
        Verdict::NotConverging
    );
}

proptest! {
    #[test]
    fn alpha_bound_decreases_with_momentum(l2 in 1e-3f64..10.0, zeta in 1e-2f64..100.0, b1 in 0.0f64..0.99, b2 in 0.0f64..0.99) {
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        prop_assert!(alpha_bound(lo, l2, zeta).unwrap() >= alpha_bound(hi, l2, zeta).unwrap());
    }

    #[test]
    fn alpha_bound_decreases_with_curvature(l2 in 1e-3f64..10.0, beta in 0.0f64..0.99, z1 in 1e-2f64..100.0, z2 in 1e-2f64..100.0) {
        let (lo, hi) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
        prop_assert!(alpha_bound(beta, l2, lo).unwrap() >= alpha_bound(beta, l2, hi).unwrap());
    }

    #[test]
    fn alpha_bound_grows_with_connectivity(zeta in 1e-2f64..100.0, beta in 0.0f64..0.99, l1 in 1e-3f64..10.0, l2 in 1e-3f64..10.0) {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        prop_assert!(alpha_bound(beta, lo, zeta).unwrap() <= alpha_bound(beta, hi, zeta).unwrap());
    }

    #[test]
    fn momentum_bound_inverts_step_bound(l2 in 1e-2f64..10.0, zeta in 1e-1f64..50.0, beta in 0.0f64..0.95) {
        let alpha = alpha_bound(beta, l2, zeta).unwrap();
        let back = beta_bound(alpha, l2, zeta).unwrap();
        prop_assert!((back - beta).abs() <= 1e-9);
    }
}

#[test]
fn momentum_bound_reports_empty_range() {
    assert!(beta_bound(2.0, 1.0, 1.0).is_err());
    assert!(alpha_bound(1.0, 1.0, 1.0).is_err());
    assert!(alpha_bound(-0.1, 1.0, 1.0).is_err());
}
