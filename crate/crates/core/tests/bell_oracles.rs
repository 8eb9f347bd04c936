use std::f64::consts::PI;

use bildsim_core::bell::{
    chsh_from_split_streams, chsh_from_stream, chsh_grid_max, chsh_value, compatibility_audit, empirical_correlation,
    hv_sample, quantum_correlation, singlet_state, ChshAngles, HvStrategy, Pair,
};
use bildsim_core::linalg::{DensityOperator, HermitianOperator};
use bildsim_core::rng::{self, Domain};
use rand::Rng;

#[test]
fn singlet_correlation_is_minus_cosine() {
    let rho = singlet_state();
    let mut r = rng::stream(31, Domain::Fixtures, 0);
    for _ in 0..10 {
        let (a, b) = (r.random_range(-PI..PI), r.random_range(-PI..PI));
        assert!((quantum_correlation(&rho, a, b).unwrap() + (a - b).cos()).abs() < 1e-12);
    }
}

#[test]
fn product_and_mixed_states_stay_classical() {
    let product = DensityOperator::new(HermitianOperator::diag(&[1.0, 0.0, 0.0, 0.0])).unwrap();
    let mixed = DensityOperator::maximally_mixed(4);
    let mut r = rng::stream(32, Domain::Fixtures, 0);
    for _ in 0..50 {
        let a: [f64; 4] = std::array::from_fn(|_| r.random_range(-PI..PI));
        let angles = ChshAngles::new(a[0], a[1], a[2], a[3]).unwrap();
        assert!(chsh_value(&product, &angles).unwrap().abs() <= 2.0 + 1e-12);
        assert!(chsh_value(&mixed, &angles).unwrap().abs() < 1e-12);
    }
}

#[test]
fn grid_search_finds_tsirelson() {
    let g = chsh_grid_max(&singlet_state(), 61).unwrap();
    assert!(g.max_abs_s >= 2.82 && g.max_abs_s <= 2.0 * 2f64.sqrt() + 1e-9, "{}", g.max_abs_s);
}

#[test]
fn anti_parallel_settings_commute() {
    let report = compatibility_audit(&ChshAngles::new(0.0, PI / 2.0, 0.3 + PI, 0.3).unwrap()).unwrap();
    assert!(report.bob_local < 1e-12);
    assert!(report.degenerate);
    assert!(report.alice_local > 1.0);
}

#[test]
fn sphere_sign_marginals_are_balanced() {
    let n = 100_000;
    let stream = hv_sample(&HvStrategy::sphere_sign(ChshAngles::OPTIMAL), n, 33).unwrap();
    for k in 0..4 {
        let mean = stream.records.iter().map(|r| f64::from(r[k])).sum::<f64>() / n as f64;
        assert!(mean.abs() < 5.0 / (n as f64).sqrt(), "observable {k}: {mean}");
    }
}

#[test]
fn equal_settings_give_identical_outcomes() {
    let angles = ChshAngles::new(0.4, 0.4, 0.4, 1.0).unwrap();
    let stream = hv_sample(&HvStrategy::sphere_sign(angles), 10_000, 34).unwrap();
    assert_eq!(empirical_correlation(&stream, Pair::A1A2).unwrap(), 1.0);
    assert_eq!(empirical_correlation(&stream, Pair::A1B1).unwrap(), 1.0);
}

#[test]
fn orthogonal_sign_responses_are_uncorrelated() {
    let n = 1_000_000;
    let stream = hv_sample(&HvStrategy::sphere_sign(ChshAngles::OPTIMAL), n, 35).unwrap();
    let c = empirical_correlation(&stream, Pair::A1A2).unwrap();
    assert!(c.abs() < 5.0 / (n as f64).sqrt(), "{c}");
    for p in Pair::ALL {
        let exact = HvStrategy::sphere_sign(ChshAngles::OPTIMAL).exact_correlation(p).unwrap();
        let e = empirical_correlation(&stream, p).unwrap();
        assert!((e - exact).abs() < 5.0 / (n as f64).sqrt(), "{p:?}: {e} vs {exact}");
    }
}

#[test]
fn sphere_sign_stream_at_quantum_optimum() {
    let n = 1_000_000;
    let stream = hv_sample(&HvStrategy::sphere_sign(ChshAngles::OPTIMAL), n, 36).unwrap();
    let joint = chsh_from_stream(&stream).unwrap();
    let split = chsh_from_split_streams(&stream).unwrap();
    assert!(joint.s.abs() <= 2.01, "{joint:?}");
    assert!(split.s.abs() <= 2.01, "{split:?}");
    // exact value 1 - 2(pi/4)/pi summed: 3 * 0.5 - (-0.5) = 2
    assert!((split.s - 2.0).abs() < 5.0 * split.std_error, "{split:?}");
}

#[test]
fn constant_strategy_hits_the_bound_exactly() {
    let strategy = HvStrategy::Constant { a1: 1, a2: 1, b1: 1, b2: 1 };
    let stream = hv_sample(&strategy, 50, 37).unwrap();
    assert!(stream.records.iter().all(|r| *r == [1, 1, 1, 1]));
    assert_eq!(chsh_from_stream(&stream).unwrap().s, 2.0);
    for p in Pair::ALL {
        assert_eq!(empirical_correlation(&stream, p).unwrap(), 1.0);
    }
}
