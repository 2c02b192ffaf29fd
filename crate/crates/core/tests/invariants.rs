use std::f64::consts::PI;

use duowalk_core::oracle::{random_density, random_lattice, random_pure_density};
use duowalk_core::{
    avg_distance, coherence_eta, distance_series, entropy_series, eta_lower_bound, gamma_bessel, gamma_general_with,
    propagate_spectral, CoherenceFamily, Exec, GammaOptions, GammaStrategy, LatticeSpec,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family() -> impl Strategy<Value = CoherenceFamily> {
    (0.0f64..=1.0, 0.0f64..=1.0, -PI..PI).prop_map(|(alpha, s, phi)| {
        let lower = eta_lower_bound(alpha);
        CoherenceFamily::new(alpha, lower + s * (1.0 - lower), phi).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn general_routes_agree_and_obey_sum_rule(seed in any::<u64>(), n in 3usize..7, t in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = random_lattice(n, &mut rng);
        let rho = random_density(n, &mut rng);
        let u = propagate_spectral(&lat.single_particle_matrix(), t).unwrap();
        let run = |strategy, exec| gamma_general_with(&rho, &u, GammaOptions { strategy, exec }).unwrap();
        let sparse = run(GammaStrategy::Sparse, Exec::Parallel);
        let dense = run(GammaStrategy::Dense, Exec::Sequential);
        prop_assert!(sparse.max_abs_diff(&dense) < 1e-12);
        let (sparse_seq, dense_par) = (run(GammaStrategy::Sparse, Exec::Sequential), run(GammaStrategy::Dense, Exec::Parallel));
        prop_assert_eq!(sparse.entries(), sparse_seq.entries());
        prop_assert_eq!(dense.entries(), dense_par.entries());
        for g in [&sparse, &dense] {
            prop_assert!((g.total() - 2.0).abs() < 1e-10);
            prop_assert!(g.entries().iter().all(|&v| v > -1e-12));
            prop_assert_eq!(g.entries(), &g.entries().transpose());
        }
    }

    #[test]
    fn distance_is_affine_in_coherent_weight(a in family(), b in family(), c in family(), t in 0.2f64..4.0) {
        let x = |p: &CoherenceFamily| p.gamma() * p.phi().cos();
        let d = |p: &CoherenceFamily| {
            let q = CoherenceFamily::new(0.5, p.eta().max(0.0), p.phi()).unwrap();
            (x(&q), avg_distance(&gamma_bessel(&q, 1.0, t, 41, 20).unwrap()))
        };
        let ((x1, d1), (x2, d2), (x3, d3)) = (d(&a), d(&b), d(&c));
        prop_assert!(((d2 - d1) * (x3 - x1) - (d3 - d1) * (x2 - x1)).abs() < 1e-10);
    }

    #[test]
    fn family_state_has_its_coherence(p in family()) {
        let rho = duowalk_core::density_from_family(&p, 6, 2).unwrap();
        prop_assert!((coherence_eta(&rho) - p.eta()).abs() < 1e-12);
    }
}

#[test]
fn sequential_and_parallel_series_are_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rho = random_pure_density(9, &mut rng);
    let m = LatticeSpec::uniform_ring(9, 1.0).build().unwrap().single_particle_matrix();
    let times: Vec<f64> = (0..12).map(|k| 0.25 * k as f64).collect();
    let seq = entropy_series(&rho, &m, &times, 4, Exec::Sequential).unwrap();
    let par = entropy_series(&rho, &m, &times, 4, Exec::Parallel).unwrap();
    assert_eq!(seq, par);

    let p = CoherenceFamily::new(0.5, 1.0, 0.0).unwrap();
    let seq = distance_series(&p, 1.0, &times, 41, 20, Exec::Sequential).unwrap();
    let par = distance_series(&p, 1.0, &times, 41, 20, Exec::Parallel).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn mixed_random_states_evolve_unitarily() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lat = random_lattice(6, &mut rng);
    let rho = random_density(6, &mut rng);
    let u = propagate_spectral(&lat.single_particle_matrix(), 2.3).unwrap();
    let evolved = duowalk_core::observables::evolve_density(&rho, &u).unwrap();
    assert!((evolved.purity() - rho.purity()).abs() < 1e-12);
    assert!((evolved.matrix().trace().re - 1.0).abs() < 1e-12);
}
