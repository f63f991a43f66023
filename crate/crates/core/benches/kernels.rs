use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use oam_sieve::diffraction::{effective_geometry, propagate_sieve, OpticalSetup};
use oam_sieve::field::{rotate_field, GridSpec};
use oam_sieve::lg::{decompose, LgBasis};
use oam_sieve::mask::{fermat_motif, replicate, Handedness, PinholeMask};

fn fixture() -> (PinholeMask, OpticalSetup, GridSpec, LgBasis) {
    let setup = OpticalSetup::lens(2.5e-12, 0.015, -33.6e-6);
    let z = effective_geometry(&setup).unwrap().z_eff;
    let arm = fermat_motif(20, 15e-6, -5, 2.5e-12, z, 300e-9, Handedness::Ccw).unwrap();
    let mask = replicate(&arm, 5).unwrap();
    let grid = GridSpec::square(161, 10e-9).unwrap();
    let basis = LgBasis::symmetric(1e-9, 3, 15, 10e-9).unwrap();
    (mask, setup, grid, basis)
}

/// Pools to compare: one worker against rayon's default size. Without the
/// `parallel` feature the library never touches a pool, so only the
/// sequential run is reported.
#[cfg(feature = "parallel")]
mod rayon_pool {
    pub type Pool = rayon::ThreadPool;

    pub fn pools() -> Vec<(String, Pool)> {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let all = rayon::ThreadPoolBuilder::new().build().unwrap();
        let n = all.current_num_threads();
        vec![("1 thread".into(), one), (format!("default pool ({n})"), all)]
    }
}

#[cfg(not(feature = "parallel"))]
mod rayon_pool {
    pub struct Pool;

    impl Pool {
        pub fn install<R>(&self, f: impl FnOnce() -> R) -> R {
            f()
        }
    }

    pub fn pools() -> Vec<(String, Pool)> {
        vec![("sequential".into(), Pool)]
    }
}

fn kernels(c: &mut Criterion) {
    let (mask, setup, grid, basis) = fixture();
    let field = propagate_sieve(&mask, &setup, &grid).unwrap();
    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (label, pool) in rayon_pool::pools() {
        group.bench_function(BenchmarkId::new("propagate_100_pinholes_161sq", &label), |b| {
            b.iter(|| pool.install(|| propagate_sieve(black_box(&mask), &setup, &grid).unwrap()))
        });
        group.bench_function(BenchmarkId::new("decompose_p3_l15_161sq", &label), |b| {
            b.iter(|| pool.install(|| decompose(black_box(&field), &basis).unwrap()))
        });
        group.bench_function(BenchmarkId::new("rotate_161sq", &label), |b| {
            b.iter(|| pool.install(|| rotate_field(black_box(&field), 0.3).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
