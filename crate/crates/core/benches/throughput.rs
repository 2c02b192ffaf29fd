use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use duowalk_core::oracle::{random_density, random_pure_density};
use duowalk_core::{
    distance_series, entropy_series, gamma_general_with, propagate_spectral, CoherenceFamily, Exec, GammaOptions,
    GammaStrategy, LatticeSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn dense_gamma(c: &mut Criterion) {
    let mut group = c.benchmark_group("gamma_dense");
    group.sample_size(10);
    for n in [8usize, 12] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let rho = random_density(n, &mut rng);
        let m = LatticeSpec::uniform_ring(n, 1.0).build().unwrap().single_particle_matrix();
        let u = propagate_spectral(&m, 1.5).unwrap();
        for (name, exec) in POLICIES {
            let options = GammaOptions {
                strategy: GammaStrategy::Dense,
                exec,
            };
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| gamma_general_with(black_box(&rho), &u, options).unwrap())
            });
        }
    }
    group.finish();
}

fn distance_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("distance_series");
    let p = CoherenceFamily::new(0.5, 1.0, 0.0).unwrap();
    let times: Vec<f64> = (0..200).map(|k| 0.02 * k as f64).collect();
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| b.iter(|| distance_series(&p, 1.0, black_box(&times), 61, 30, exec).unwrap()));
    }
    group.finish();
}

fn entropy_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("entropy_series");
    group.sample_size(10);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = random_pure_density(15, &mut rng);
    let m = LatticeSpec::uniform_ring(15, 1.0).build().unwrap().single_particle_matrix();
    let times: Vec<f64> = (0..16).map(|k| 0.2 * k as f64).collect();
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| b.iter(|| entropy_series(black_box(&rho), &m, &times, 7, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, dense_gamma, distance_grid, entropy_grid);
criterion_main!(benches);
