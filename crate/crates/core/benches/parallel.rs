//! Data-parallel vs sequential execution of the per-node kernels.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fracflow::flow::{FlowSolver, Profile, SolverConfig};
use fracflow::frac::{FractionalIntegrator, FractionalOrder};
use fracflow::geometry::{canonical_dconnection, curvature, fixtures};
use fracflow::ExecMode;

const MODES: [(&str, ExecMode); 2] = [("parallel", ExecMode::Parallel), ("sequential", ExecMode::Sequential)];

fn geometry(c: &mut Criterion) {
    let fx = fixtures::twisted(FractionalOrder::new(0.7).unwrap()).unwrap();
    let mut group = c.benchmark_group("geometry");
    group.sample_size(20);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new("connection+curvature", name), |b| {
            b.iter(|| {
                let conn = canonical_dconnection(&fx.chart, &fx.nconn, &fx.metric, mode).unwrap();
                black_box(curvature(&fx.chart, &fx.nconn, &conn, mode).unwrap())
            })
        });
    }
    group.finish();
}

fn fractional_integral(c: &mut Criterion) {
    let n = 4096;
    let step = 1.0 / n as f64;
    let values: Vec<f64> = (0..n).map(|i| (i as f64 * step * 7.0).sin()).collect();
    let integ = FractionalIntegrator::new(0.4, step, n).unwrap();
    let mut group = c.benchmark_group("fractional_integral");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new("n4096", name), |b| {
            b.iter(|| black_box(integ.apply(mode, black_box(&values))))
        });
    }
    group.finish();
}

fn flow_rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow_rhs");
    for (name, mode) in MODES {
        let mut cfg = SolverConfig::new(2, 1e-9, 1e-9, 2048, 64.0);
        cfg.curvature_const = 0.0;
        cfg.component_count = 2;
        cfg.exec = mode;
        let solver = FlowSolver::new(cfg).unwrap();
        let state = solver
            .initial_state(&Profile::Gaussian { amplitude: 0.5, width: 3.0, center: 32.0 })
            .unwrap();
        group.bench_function(BenchmarkId::new("level2_c2", name), |b| {
            b.iter(|| black_box(solver.rhs(black_box(&state)).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, geometry, fractional_integral, flow_rhs);
criterion_main!(benches);
