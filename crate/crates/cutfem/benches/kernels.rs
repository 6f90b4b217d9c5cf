//! Kernel benchmarks over the hot paths: interface classification and
//! cutting, system assembly, the multigrid solve, PCG, and the raw vector
//! reductions. Run `cargo bench` for the data-parallel build and
//! `cargo bench --no-default-features` for the sequential fallback; use
//! criterion baselines to compare the two:
//!
//! ```text
//! cargo bench -- --save-baseline parallel
//! cargo bench --no-default-features -- --baseline parallel
//! ```

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use cutfem::assembly::{assemble_system, Method};
use cutfem::cut_geometry::build_cut_topology;
use cutfem::experiments::ExperimentConfig;
use cutfem::multigrid::{mg_solve, Hierarchy};
use cutfem::par;
use cutfem::problems::TestProblem;
use cutfem::solvers::pcg_jacobi;

fn hierarchy(method: Method, n_levels: usize) -> (ExperimentConfig, Hierarchy) {
    let cfg = ExperimentConfig {
        method,
        n_levels,
        ..ExperimentConfig::default()
    };
    let h = cfg.build().expect("benchmark hierarchy builds");
    (cfg, h)
}

fn bench_cut_topology(c: &mut Criterion) {
    let (cfg, h) = hierarchy(Method::PNitsche, 6);
    let phi = cfg.level_set();
    let mesh = &h.levels[5].mesh;
    c.bench_function("cut_topology/classify_and_cut_128x128", |b| {
        b.iter(|| build_cut_topology(black_box(&phi), black_box(mesh), true).unwrap())
    });
}

fn bench_assembly(c: &mut Criterion) {
    let problem = TestProblem::Monomial { dim: 2 };
    for method in [Method::PNitsche, Method::MuNitsche] {
        let (cfg, h) = hierarchy(method, 6);
        let level = &h.levels[5];
        let dcfg = cfg.discretization();
        let name = match method {
            Method::PNitsche => "assemble/p_nitsche_128x128",
            Method::MuNitsche => "assemble/mu_nitsche_128x128",
            Method::Nitsche => unreachable!(),
        };
        c.bench_function(name, |b| {
            b.iter(|| {
                assemble_system(
                    black_box(&level.mesh),
                    &level.topo,
                    &level.space,
                    &dcfg,
                    &|x, side| problem.rhs(x, side),
                    &|x| problem.dirichlet(x),
                )
                .unwrap()
            })
        });
    }
}

fn bench_mg_solve(c: &mut Criterion) {
    let (_, h) = hierarchy(Method::PNitsche, 6);
    let finest = h.finest();
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    group.bench_function("v_cycles_to_1e-8_128x128", |b| {
        b.iter(|| mg_solve(black_box(&h), finest, &h.levels[finest].b).unwrap())
    });
    group.finish();
}

fn bench_pcg(c: &mut Criterion) {
    let (_, h) = hierarchy(Method::PNitsche, 5);
    let level = &h.levels[4];
    let mut group = c.benchmark_group("pcg");
    group.sample_size(20);
    group.bench_function("jacobi_1e-4_64x64", |b| {
        b.iter(|| pcg_jacobi(black_box(&level.a), &level.b, 1e-4, 10_000).unwrap())
    });
    group.finish();
}

fn bench_reductions(c: &mut Criterion) {
    let x: Vec<f64> = (0..1_000_000).map(|i| (i as f64).sin()).collect();
    let y: Vec<f64> = (0..1_000_000).map(|i| (i as f64).cos()).collect();
    c.bench_function("reduction/norm_1m", |b| {
        b.iter(|| par::norm(black_box(&x)))
    });
    c.bench_function("reduction/dot_1m", |b| {
        b.iter(|| par::dot(black_box(&x), black_box(&y)))
    });
}

criterion_group!(
    kernels,
    bench_cut_topology,
    bench_assembly,
    bench_mg_solve,
    bench_pcg,
    bench_reductions
);
criterion_main!(kernels);
