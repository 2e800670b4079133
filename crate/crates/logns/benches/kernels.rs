//! Criterion benches for the hot kernels, comparing the rayon pool
//! against single-threaded execution of the same chunked code paths.
//!
//! With the default `parallel` feature each kernel is measured twice:
//! once on the default pool (`par`) and once inside a one-thread pool
//! (`seq1`). The chunked reductions make both produce identical bits, so
//! the comparison is pure scheduling overhead vs speedup. Building with
//! `--no-default-features` benches the plain sequential fallback.

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use logns::domain::{make_workspace, Field, GridSpec, SpectralWorkspace};
use logns::energy::{self, RegularizationParams, SplitParams};
use logns::evolve::{self, EvolveConfig};

fn setup(points_x: usize, points_y: usize) -> (SpectralWorkspace, Field) {
    let grid = GridSpec::new(1, 1, points_x, points_y, 12.0).unwrap();
    let ws = make_workspace(&grid).unwrap();
    let field = Field::from_fn(grid, |c| {
        Complex64::new(
            (-c[0] * c[0] / 2.0).exp() * (1.0 + 0.3 * c[1].cos()),
            0.1 * (0.5 * c[0] + c[1]).sin(),
        )
    });
    (ws, field)
}

fn bench_kernel<F>(c: &mut Criterion, name: &str, f: F)
where
    F: Fn() + Sync,
{
    let mut group = c.benchmark_group(name);
    group.sample_size(20);
    #[cfg(feature = "parallel")]
    {
        group.bench_function("par", |b| b.iter(&f));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool");
        group.bench_function("seq1", |b| b.iter(|| pool.install(&f)));
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("seq", |b| b.iter(&f));
    group.finish();
}

fn benches(c: &mut Criterion) {
    // 256x64 sits below the parallel threshold: both variants take the
    // sequential kernels and the comparison shows pure pool overhead.
    let (ws, field) = setup(256, 64);

    bench_kernel(c, "mass", || {
        std::hint::black_box(ws.mass(&field));
    });

    bench_kernel(c, "kinetic_split", || {
        std::hint::black_box(ws.kinetic_split(&field));
    });

    let reg = RegularizationParams::exact();
    let split = SplitParams::default();
    bench_kernel(c, "energy_breakdown", || {
        std::hint::black_box(energy::energy(&ws, &field, 1.0, &reg, &split));
    });

    bench_kernel(c, "first_variation", || {
        std::hint::black_box(energy::first_variation(&ws, &field, 1.0, &reg));
    });

    let config = EvolveConfig::new(1e-3, 1);
    bench_kernel(c, "evolve_step", || {
        let mut u = field.clone();
        evolve::step(&ws, &mut u, &config).unwrap();
        std::hint::black_box(u);
    });

    bench_kernel(c, "fft_roundtrip", || {
        let mut data = field.samples().to_vec();
        ws.fft_forward_in_place(&mut data);
        ws.fft_inverse_in_place(&mut data);
        std::hint::black_box(data);
    });

    // 512x256 engages the threaded kernels.
    let (ws_big, field_big) = setup(512, 256);
    bench_kernel(c, "evolve_step_large", || {
        let mut u = field_big.clone();
        evolve::step(&ws_big, &mut u, &config).unwrap();
        std::hint::black_box(u);
    });
    bench_kernel(c, "energy_breakdown_large", || {
        std::hint::black_box(energy::energy(&ws_big, &field_big, 1.0, &reg, &split));
    });
}

criterion_group!(kernels, benches);
criterion_main!(kernels);
