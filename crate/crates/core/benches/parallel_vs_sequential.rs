use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use esr_core::exec::Execution;
use esr_core::linalg::{gen_poisson_7pt, spmv_with};
use esr_core::pcg::{self, DistributedProblem, PrecondKind, RecordingHook, RecoveryMode, SolveConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn spmv(c: &mut Criterion) {
    let mut g = c.benchmark_group("spmv");
    for k in [32, 64] {
        let a = gen_poisson_7pt(k, k, k).unwrap();
        let v: Vec<f64> = (0..a.n_rows()).map(|i| (i % 17) as f64).collect();
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, k), &k, |bch, _| {
                bch.iter(|| spmv_with(exec, black_box(&a), black_box(&v)).unwrap())
            });
        }
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("pcg_solve");
    g.sample_size(10);
    let k = 32;
    let pb = DistributedProblem::new(gen_poisson_7pt(k, k, k).unwrap(), vec![1.0; k * k * k], PrecondKind::Jacobi, 8)
        .unwrap();
    let cfg = SolveConfig { recovery_mode: RecoveryMode::None, ..Default::default() };
    for (name, exec) in MODES {
        g.bench_function(name, |bch| {
            bch.iter(|| pcg::run(&cfg, &pb, exec, &mut RecordingHook::default()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, spmv, solve);
criterion_main!(benches);
