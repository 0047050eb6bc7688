mod common;

use common::floyd_warshall_diameter;
use hbgt::graph::{
    build_cycle, build_er_balanced, build_exponential, Network, SwitchingSchedule, Topology,
    BALANCE_TOL,
};
use hbgt::spectrum;
use proptest::prelude::*;

fn check_laplacian_spectrum(net: &Network) {
    let report = spectrum::eig(net.laplacian().matrix()).unwrap();
    assert_eq!(report.zero_multiplicity, 1, "{}", net.label());
    for e in &report.eigenvalues {
        if !report.is_zero(*e) {
            assert!(e.re < -1e-9, "{}: eigenvalue {e}", net.label());
        }
        if !net.directed() {
            assert!(
                e.im.abs() <= 1e-9,
                "{}: complex eigenvalue {e}",
                net.label()
            );
        }
    }
}

fn check_invariants(net: &Network) {
    assert!(net.is_weight_balanced(BALANCE_TOL), "{}", net.label());
    assert!(net.is_strongly_connected(), "{}", net.label());
    net.validate(BALANCE_TOL).unwrap();
    assert_eq!(
        Some(net.diameter().unwrap()),
        floyd_warshall_diameter(net.weights())
    );
    check_laplacian_spectrum(net);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cycles_are_balanced_and_connected(n in 2usize..40, w in 0.01f64..10.0, undirected: bool) {
        check_invariants(&build_cycle(n, w, undirected).unwrap());
    }

    #[test]
    fn exponential_graphs_are_balanced_and_connected(k in 1u32..7, w in 0.01f64..10.0) {
        check_invariants(&build_exponential(1 << k, w).unwrap());
    }

    #[test]
    fn random_graphs_are_balanced_and_connected(n in 2usize..30, p in 0.01f64..=1.0, seed: u64) {
        check_invariants(&build_er_balanced(n, p, seed).unwrap());
    }

    #[test]
    fn schedule_lookup_is_pure(seed: u64, t in 0.0f64..50.0) {
        let schedule = SwitchingSchedule::new(0.37, Topology::RandomEr { n: 9, p: 0.4 }, seed).unwrap();
        let a = schedule.at(t).into_owned();
        let b = schedule.at(t).into_owned();
        prop_assert_eq!(a.weights(), b.weights());
        let by_window = schedule.network_for_window(schedule.window(t));
        prop_assert_eq!(by_window.weights(), a.weights());
    }
}

#[test]
fn exponential_diameter_is_logarithmic() {
    for k in 1..=6u32 {
        let n = 1usize << k;
        let net = build_exponential(n, 1.0).unwrap();
        assert_eq!(floyd_warshall_diameter(net.weights()), Some(k as usize));
    }
    // sixteen nodes: within log2 16
    assert!(build_exponential(16, 1.0).unwrap().diameter().unwrap() <= 4);
}

#[test]
fn exponential_graph_rejects_other_sizes() {
    for n in [0, 1, 3, 10, 12] {
        assert!(build_exponential(n, 1.0).is_err(), "n = {n}");
    }
}

#[test]
fn disconnected_or_unbalanced_input_is_rejected() {
    let mut w = ndarray::Array2::<f64>::zeros((4, 4));
    w[[0, 1]] = 1.0;
    w[[1, 0]] = 1.0;
    w[[2, 3]] = 1.0;
    w[[3, 2]] = 1.0;
    let split = Network::from_weights(w.clone(), false, "two pairs").unwrap();
    assert!(split.validate(BALANCE_TOL).is_err());
    assert_eq!(floyd_warshall_diameter(&w), None);

    let mut path = ndarray::Array2::<f64>::zeros((3, 3));
    path[[1, 0]] = 1.0;
    path[[2, 1]] = 1.0;
    path[[0, 2]] = 2.0;
    let lopsided = Network::from_weights(path, true, "unbalanced ring").unwrap();
    assert!(!lopsided.is_weight_balanced(BALANCE_TOL));
    assert!(lopsided.validate(BALANCE_TOL).is_err());
}

#[test]
fn text_format_round_trips() {
    let net = build_er_balanced(7, 0.5, 11).unwrap();
    let back = Network::from_text(&net.to_text()).unwrap();
    assert_eq!(back.weights(), net.weights());
    assert_eq!(back.directed(), net.directed());
}

#[test]
fn switching_schedule_changes_between_windows() {
    let schedule = SwitchingSchedule::new(1.0, Topology::RandomEr { n: 12, p: 0.3 }, 5).unwrap();
    let distinct = (0..10)
        .map(|k| schedule.network_for_window(k).weights().clone())
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|pair| pair[0] != pair[1])
        .count();
    assert!(distinct >= 8, "only {distinct} switches in 10 windows");
    for k in 0..10 {
        check_invariants(&schedule.network_for_window(k));
    }
}
