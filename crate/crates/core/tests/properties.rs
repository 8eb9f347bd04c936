use std::f64::consts::PI;

use bildsim_core::bell::{
    chsh_from_stream, chsh_value, compatibility_audit, empirical_correlation, hv_sample, observable_from_angle,
    singlet_state, ChshAngles, HvStrategy, Pair,
};
use bildsim_core::brownian::{integrate_overdamped, InitialCondition, LangevinConfig, Potential};
use bildsim_core::linalg::{
    density_from_covariance, eigenvalues, random_covariance, random_hermitian, spectral_decomposition,
    tensor_product, trace_product, trace_product_complex, ComplexMatrix, CovarianceOperator, HermitianOperator,
};
use bildsim_core::pcsft::{exact_average, mc_average, normalized_coupling_check, FieldMeasure, QuadraticVariable};
use bildsim_core::rng::{self, Domain};
use num_complex::Complex64;
use proptest::prelude::*;

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

fn pair(dim: usize, seed: u64) -> (HermitianOperator, CovarianceOperator) {
    let mut r = rng::stream(seed, Domain::Fixtures, dim as u64);
    (random_hermitian(dim, &mut r), random_covariance(dim, &mut r))
}

fn angle() -> impl Strategy<Value = f64> {
    -2.0 * PI..2.0 * PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_product_is_real_and_matches_entry_sum(dim in 2usize..=12, seed in any::<u64>()) {
        let (a, b) = pair(dim, seed);
        let z = trace_product_complex(a.matrix(), b.operator().matrix()).unwrap();
        let scale = a.matrix().frobenius_norm() * b.operator().matrix().frobenius_norm();
        prop_assert!(z.im.abs() <= 1e-10 * scale.max(1.0));
        let mut direct = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                direct += a.matrix().get(i, j) * b.operator().matrix().get(j, i);
            }
        }
        prop_assert!((trace_product(&a, b.operator()).unwrap() - direct.re).abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn state_map_is_scale_invariant(dim in 2usize..=8, seed in any::<u64>(), c in 1e-3f64..1e3) {
        let (_, b) = pair(dim, seed);
        let scaled = CovarianceOperator::new(b.operator().scale(c)).unwrap();
        let r1 = density_from_covariance(&b).unwrap();
        let r2 = density_from_covariance(&scaled).unwrap();
        prop_assert!(r1.operator().matrix().max_abs_diff(r2.operator().matrix()).unwrap() <= 1e-12);
    }

    #[test]
    fn density_operators_have_unit_trace_and_nonnegative_spectrum(dim in 2usize..=8, seed in any::<u64>()) {
        let (_, b) = pair(dim, seed);
        let rho = density_from_covariance(&b).unwrap();
        prop_assert!((rho.operator().trace() - 1.0).abs() <= 1e-12);
        prop_assert!(eigenvalues(rho.operator())[0] >= -1e-10);
        prop_assert!(rho.purity() <= 1.0 + 1e-12);
    }

    #[test]
    fn spectral_reconstruction(dim in 1usize..=16, seed in any::<u64>()) {
        let (h, _) = pair(dim, seed);
        let pairs = spectral_decomposition(&h);
        let mut recon = ComplexMatrix::zeros(dim);
        for p in &pairs {
            recon = recon.add(&ComplexMatrix::outer(&p.vector).scale(p.value)).unwrap();
            prop_assert!((p.vector.norm() - 1.0).abs() <= 1e-10);
        }
        for w in pairs.windows(2) {
            prop_assert!(w[0].value <= w[1].value);
            prop_assert!(w[0].vector.dotc(&w[1].vector).norm() <= 1e-10);
        }
        let err = recon.sub(h.matrix()).unwrap().frobenius_norm();
        prop_assert!(err <= 1e-9 * h.matrix().frobenius_norm().max(1e-300));
    }

    #[test]
    fn tensor_product_preserves_structure(da in 1usize..=4, db in 1usize..=4, seed in any::<u64>()) {
        let (a, _) = pair(da, seed);
        let (b, _) = pair(db, seed.wrapping_add(1));
        let ab = tensor_product(&a, &b);
        prop_assert_eq!(ab.dim(), da * db);
        prop_assert!(HermitianOperator::new(ab.matrix().clone()).is_ok());
        prop_assert!((ab.trace() - a.trace() * b.trace()).abs() <= 1e-10 * (1.0 + a.trace().abs() * b.trace().abs()));
    }

    #[test]
    fn average_is_the_trace_pairing(dim in 2usize..=8, seed in any::<u64>()) {
        let (a, b) = pair(dim, seed);
        let expected = trace_product(&a, b.operator()).unwrap();
        let measure = FieldMeasure::new(b).unwrap();
        let v = QuadraticVariable::new(a);
        prop_assert_eq!(exact_average(&v, &measure).unwrap(), expected);
        prop_assert!(normalized_coupling_check(&v, &measure).unwrap().gap <= 1e-10);
    }

    #[test]
    fn trace_pairing_is_linear(dim in 2usize..=6, seed in any::<u64>(), s in -5.0f64..5.0, t in -5.0f64..5.0) {
        let mut r = rng::stream(seed, Domain::Fixtures, 99);
        let (a1, a2) = (random_hermitian(dim, &mut r), random_hermitian(dim, &mut r));
        let b = random_covariance(dim, &mut r);
        let combo = HermitianOperator::new(a1.scale(s).matrix().add(a2.scale(t).matrix()).unwrap()).unwrap();
        let lhs = trace_product(&combo, b.operator()).unwrap();
        let rhs = s * trace_product(&a1, b.operator()).unwrap() + t * trace_product(&a2, b.operator()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn observables_have_spectrum_plus_minus_one(theta in angle()) {
        let e = eigenvalues(&observable_from_angle(theta));
        prop_assert!((e[0] + 1.0).abs() <= 1e-12 && (e[1] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn cross_commutators_vanish(a1 in angle(), a2 in angle(), b1 in angle(), b2 in angle()) {
        let report = compatibility_audit(&ChshAngles::new(a1, a2, b1, b2).unwrap()).unwrap();
        prop_assert!(report.cross.iter().all(|c| *c <= 1e-12));
    }

    #[test]
    fn quantum_value_respects_tsirelson(a1 in angle(), a2 in angle(), b1 in angle(), b2 in angle()) {
        let s = chsh_value(&singlet_state(), &ChshAngles::new(a1, a2, b1, b2).unwrap()).unwrap();
        prop_assert!(s.abs() <= 2.0 * 2f64.sqrt() + 1e-9);
    }

    #[test]
    fn compatible_local_settings_cannot_violate(a in angle(), k in -2i32..=2, b1 in angle(), b2 in angle(), alice in any::<bool>()) {
        let shifted = a + f64::from(k) * PI;
        let angles = if alice {
            ChshAngles::new(a, shifted, b1, b2).unwrap()
        } else {
            ChshAngles::new(b1, b2, a, shifted).unwrap()
        };
        prop_assert!(chsh_value(&singlet_state(), &angles).unwrap().abs() <= 2.0 + 1e-9);
    }

    #[test]
    fn local_streams_obey_the_classical_bound(
        a1 in angle(), a2 in angle(), b1 in angle(), b2 in angle(),
        thresholds in prop::array::uniform4(-0.9f64..0.9),
        seed in any::<u64>(),
        n in 8usize..2000,
    ) {
        let strategy = HvStrategy::SphereSign { angles: ChshAngles::new(a1, a2, b1, b2).unwrap(), thresholds };
        let stream = hv_sample(&strategy, n, seed).unwrap();
        prop_assert!(stream.records.iter().flatten().all(|o| *o == 1 || *o == -1));
        let est = chsh_from_stream(&stream).unwrap();
        prop_assert!(est.s.abs() <= 2.0 + 5.0 * 4.0 / (n as f64).sqrt());
        for p in Pair::ALL {
            let c = empirical_correlation(&stream, p).unwrap();
            prop_assert!(c.is_finite() && c.abs() <= 1.0);
        }
        prop_assert_eq!(hv_sample(&strategy, n, seed).unwrap(), stream);
    }

    #[test]
    fn mixture_streams_obey_the_classical_bound(weights in prop::collection::vec(0.0f64..1.0, 16), seed in any::<u64>()) {
        prop_assume!(weights.iter().sum::<f64>() > 1e-3);
        let total: f64 = weights.iter().sum();
        let strategy = HvStrategy::Mixture { weights: weights.iter().map(|w| w / total).collect() };
        let est = chsh_from_stream(&hv_sample(&strategy, 400, seed).unwrap()).unwrap();
        prop_assert!(est.s.abs() <= 2.0 + 1e-12);
    }

    #[test]
    fn forces_are_minus_the_gradient(
        n in 1usize..=3,
        kind in 0usize..3,
        coeffs in prop::collection::vec(-2.0f64..2.0, 5),
        coupling in -1.0f64..1.0,
        x in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let potential = match kind {
            0 => Potential::Free { coupling },
            1 => Potential::Harmonic { stiffness: coeffs[..n].iter().map(|c| c.abs() + 0.1).collect(), coupling },
            _ => Potential::Polynomial { coefficients: coeffs.clone(), coupling },
        };
        let x = &x[..n];
        let mut force = vec![0.0; n];
        potential.force(x, &mut force);
        let h = 1e-5;
        for i in 0..n {
            let (mut up, mut down) = (x.to_vec(), x.to_vec());
            up[i] += h;
            down[i] -= h;
            let grad = (potential.energy(&up) - potential.energy(&down)) / (2.0 * h);
            prop_assert!((force[i] + grad).abs() <= 1e-6 * grad.abs().max(1.0), "i = {}: force {} grad {}", i, force[i], grad);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn monte_carlo_is_independent_of_worker_count(dim in 2usize..=4, seed in any::<u64>(), n in 2usize..3000) {
        let (a, b) = pair(dim, seed);
        let v = QuadraticVariable::new(a);
        let measure = FieldMeasure::new(b).unwrap();
        let one = pool(1).install(|| mc_average(&v, &measure, n, seed).unwrap());
        let four = pool(4).install(|| mc_average(&v, &measure, n, seed).unwrap());
        prop_assert_eq!(one.mean.to_bits(), four.mean.to_bits());
        prop_assert_eq!(one.std_error.to_bits(), four.std_error.to_bits());
        prop_assert!(one.std_error >= 0.0);
    }

    #[test]
    fn ensembles_are_independent_of_worker_count(seed in any::<u64>(), k in 0.1f64..0.5, t in 0.0f64..2.0) {
        let config = LangevinConfig {
            n_particles: 2,
            mass: 1.0,
            friction: 1.0,
            temperatures: vec![t],
            potential: Potential::Harmonic { stiffness: vec![k], coupling: 0.1 },
            dt: 1e-3,
            t_end: 0.1,
            n_trajectories: 37,
            seed,
            paper_units: false,
            record_every: 10,
            initial: InitialCondition::Gaussian { mean: 0.0, std: 1.0 },
        };
        let one = pool(1).install(|| integrate_overdamped(&config).unwrap());
        let three = pool(3).install(|| integrate_overdamped(&config).unwrap());
        prop_assert!(one.raw_positions().iter().zip(three.raw_positions()).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert!(one.raw_positions().iter().all(|v| v.is_finite()));
    }
}
