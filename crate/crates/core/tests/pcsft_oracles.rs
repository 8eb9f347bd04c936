use bildsim_core::linalg::{
    density_from_covariance, random_covariance, random_hermitian, CovarianceOperator, HermitianOperator,
};
use bildsim_core::pcsft::{
    average_energy, empirical_covariance, exact_average, exact_pair_correlation, field_energy, mc_average,
    mc_pair_correlation, sample_fields, DiscreteFieldMeasure, FieldMeasure, MonteCarloEstimate, QuadraticVariable,
};
use bildsim_core::rng::{self, Domain};

fn measure(diag: &[f64]) -> FieldMeasure {
    FieldMeasure::new(CovarianceOperator::new(HermitianOperator::diag(diag)).unwrap()).unwrap()
}

fn identity_variable(d: usize) -> QuadraticVariable {
    QuadraticVariable::new(HermitianOperator::identity(d))
}

#[test]
fn identity_covariance_samples_have_identity_covariance() {
    let n = 100_000;
    let samples = sample_fields(&measure(&[1.0, 1.0]), n, 11).unwrap();
    let cov = empirical_covariance(&samples).unwrap();
    let bound = 5.0 / (n as f64).sqrt();
    for i in 0..2 {
        for j in 0..2 {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((cov.operator().matrix().get(i, j) - target).norm() < bound, "({i},{j})");
        }
    }
}

#[test]
fn rank_deficient_second_moment() {
    let samples = sample_fields(&measure(&[2.0, 0.0]), 10_000, 12).unwrap();
    assert!(samples.iter().all(|s| s.0[1].norm() == 0.0));
    let ms = samples.iter().map(|s| s.0[0].norm_sqr()).sum::<f64>() / samples.len() as f64;
    assert!((ms - 2.0).abs() < 0.1, "{ms}");
}

#[test]
fn energy_average_matches_monte_carlo() {
    let m = measure(&[3.0, 1.0]);
    assert_eq!(average_energy(&m), 4.0);
    let values: Vec<f64> = sample_fields(&m, 100_000, 13).unwrap().iter().map(field_energy).collect();
    let est = MonteCarloEstimate::from_values(&values, 13);
    assert!(est.sigma_distance(4.0) < 3.0, "{est:?}");
}

#[test]
fn identity_average_and_its_spread() {
    let est = mc_average(&identity_variable(2), &measure(&[1.0, 1.0]), 100_000, 14).unwrap();
    // Var |phi|^2 = <|phi|^4> - 2^2 = (4 + 2) - 4 = 2
    let expected_se = (2.0f64 / 1e5).sqrt();
    assert!((est.std_error - expected_se).abs() < 0.05 * expected_se, "{est:?}");
    assert!(est.sigma_distance(2.0) < 4.0, "{est:?}");
}

#[test]
fn zero_covariance_gives_exact_zero_estimate() {
    let est = mc_average(&identity_variable(2), &measure(&[0.0, 0.0]), 100, 15).unwrap();
    assert_eq!((est.mean, est.std_error), (0.0, 0.0));
    let corr = exact_pair_correlation(&identity_variable(2), &identity_variable(2), &measure(&[0.0, 0.0])).unwrap();
    assert_eq!(corr, 0.0);
}

#[test]
fn monte_carlo_covers_the_exact_average_across_seeds() {
    let mut r = rng::stream(2024, Domain::Fixtures, 0);
    let v = QuadraticVariable::new(random_hermitian(3, &mut r));
    let m = FieldMeasure::new(random_covariance(3, &mut r)).unwrap();
    let exact = exact_average(&v, &m).unwrap();
    let covered = (0..100u64)
        .filter(|seed| mc_average(&v, &m, 2000, 1000 + seed).unwrap().sigma_distance(exact) < 4.0)
        .count();
    assert!(covered >= 99, "{covered}/100");
}

#[test]
fn random_averages_agree_with_traces() {
    let mut r = rng::stream(2025, Domain::Fixtures, 0);
    let v = QuadraticVariable::new(random_hermitian(4, &mut r));
    let m = FieldMeasure::new(random_covariance(4, &mut r)).unwrap();
    let est = mc_average(&v, &m, 100_000, 16).unwrap();
    assert!(est.sigma_distance(exact_average(&v, &m).unwrap()) < 4.0, "{est:?}");
}

#[test]
fn fourth_moment_of_the_norm() {
    for d in [1, 2, 3, 5] {
        let corr = exact_pair_correlation(&identity_variable(d), &identity_variable(d), &measure(&vec![1.0; d])).unwrap();
        assert!((corr - (d * d + d) as f64).abs() < 1e-12, "d = {d}");
    }
}

#[test]
fn pair_correlation_of_a_random_triple() {
    let mut r = rng::stream(2026, Domain::Fixtures, 0);
    let v = QuadraticVariable::new(random_hermitian(3, &mut r));
    let w = QuadraticVariable::new(random_hermitian(3, &mut r));
    let m = FieldMeasure::new(random_covariance(3, &mut r)).unwrap();
    let exact = exact_pair_correlation(&v, &w, &m).unwrap();
    let est = mc_pair_correlation(&v, &w, &m, 1_000_000, 17).unwrap();
    assert!(est.sigma_distance(exact) < 4.0, "exact {exact}, {est:?}");
}

#[test]
fn gaussian_and_discrete_measures_share_a_state() {
    let mut r = rng::stream(2027, Domain::Fixtures, 0);
    let b = random_covariance(4, &mut r);
    let gaussian = FieldMeasure::new(b.clone()).unwrap();
    let discrete = DiscreteFieldMeasure::eigen_fixture(&b).unwrap();

    let fixture_cov = discrete.covariance().unwrap();
    assert!(fixture_cov.operator().matrix().max_abs_diff(b.operator().matrix()).unwrap() < 1e-12);
    let sampled = empirical_covariance(&discrete.sample(100_000, 18)).unwrap();
    let gap = sampled.operator().matrix().sub(b.operator().matrix()).unwrap().frobenius_norm();
    assert!(gap < 0.05, "{gap}");

    // different laws: the discrete field has a constant norm along each axis
    let energies: Vec<f64> = discrete.sample(1000, 19).iter().map(field_energy).collect();
    let distinct = {
        let mut e = energies.clone();
        e.sort_by(f64::total_cmp);
        e.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        e.len()
    };
    assert!(distinct <= 4, "{distinct}");

    let rho_gauss = density_from_covariance(gaussian.covariance()).unwrap();
    let rho_disc = density_from_covariance(&fixture_cov).unwrap();
    assert!(rho_gauss.operator().matrix().max_abs_diff(rho_disc.operator().matrix()).unwrap() < 1e-12);
}

#[test]
fn sampled_covariance_round_trips_to_the_state() {
    let mut r = rng::stream(2028, Domain::Fixtures, 0);
    let b = random_covariance(4, &mut r);
    let m = FieldMeasure::new(b.clone()).unwrap();
    let rho = density_from_covariance(&b).unwrap();
    let back = density_from_covariance(&empirical_covariance(&sample_fields(&m, 100_000, 20).unwrap()).unwrap()).unwrap();
    let gap = back.operator().matrix().sub(rho.operator().matrix()).unwrap().frobenius_norm();
    assert!(gap < 0.02, "{gap}");
}
