#![allow(dead_code)]

use esr_core::cluster::{simulate, Architecture, ClusterConfig, FaultPlan, RunReport};
use esr_core::exec::Execution;
use esr_core::linalg::{gen_poisson_7pt, norm_inf};
use esr_core::pcg::{DistributedProblem, Pcg, PrecondKind, RecoveryMode, SolveConfig, SolverState};

pub fn poisson(k: usize, proc: usize, b: Vec<f64>) -> DistributedProblem {
    DistributedProblem::new(gen_poisson_7pt(k, k, k).unwrap(), b, PrecondKind::Jacobi, proc).unwrap()
}

pub fn ones_problem(k: usize, proc: usize) -> DistributedProblem {
    poisson(k, proc, vec![1.0; k * k * k])
}

pub fn solve_config(mode: RecoveryMode, c: usize, period: u64) -> SolveConfig {
    SolveConfig { recovery_mode: mode, c, persist_period: period, tol: 1e-8, max_iter: 2000, ..Default::default() }
}

pub fn cluster(proc: usize, mode: RecoveryMode) -> ClusterConfig {
    ClusterConfig::packed(proc, 1, Architecture::for_mode(mode))
}

pub fn run(pb: &DistributedProblem, solve: &SolveConfig, faults: &[&str]) -> RunReport {
    let plan = FaultPlan::parse(faults).unwrap();
    simulate(&cluster(pb.proc(), solve.recovery_mode), solve, pb, &plan, Execution::Parallel).unwrap()
}

/// Crash-free states at iteration `j`.
pub fn states_at(pb: &DistributedProblem, j: u64) -> Vec<SolverState> {
    let pcg = Pcg::new(pb, Execution::Sequential);
    let mut st = pcg.init();
    for _ in 0..j {
        pcg.step(&mut st).unwrap();
    }
    st
}

pub fn rel_inf(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let d: Vec<f64> = got.iter().zip(want).map(|(a, b)| a - b).collect();
    let scale = norm_inf(want);
    if scale == 0.0 {
        norm_inf(&d)
    } else {
        norm_inf(&d) / scale
    }
}

pub fn bitwise_equal(got: &[f64], want: &[f64]) -> usize {
    got.iter().zip(want).filter(|(a, b)| a.to_bits() == b.to_bits()).count()
}
