mod common;

use common::*;
use esr_core::cluster::{simulate, ClusterConfig, FaultPlan, RunStatus, SimError};
use esr_core::exec::Execution;
use esr_core::pcg::{self, RecordingHook, RecoveryMode};

const BACKENDS: [RecoveryMode; 3] = [RecoveryMode::EsrInmem, RecoveryMode::NvmLocal, RecoveryMode::NvmPrd];

#[test]
fn empty_plan_matches_plain_solver() {
    let pb = ones_problem(6, 4);
    let plain = pcg::run(&solve_config(RecoveryMode::None, 0, 1), &pb, Execution::Sequential, &mut RecordingHook::default())
        .unwrap();
    for mode in RecoveryMode::ALL {
        let rep = run(&pb, &solve_config(mode, 1, 3), &[]);
        assert_eq!(rep.status, RunStatus::Converged);
        assert_eq!(rep.trace, plain.trace, "{mode}");
        assert_eq!(rep.x, plain.x);
        assert!(rep.recoveries.is_empty());
    }
}

#[test]
fn rollback_to_later_iteration_of_the_pair() {
    let pb = ones_problem(8, 4);
    let reference = run(&pb, &solve_config(RecoveryMode::None, 0, 5), &[]);
    for mode in BACKENDS {
        let rep = run(&pb, &solve_config(mode, 1, 5), &["9:compute:2"]);
        assert_eq!(rep.status, RunStatus::Converged, "{mode}");
        let rec = &rep.recoveries[0];
        assert_eq!((rec.fault_at, rec.rollback_to, rec.failed.clone()), (9, 6, vec![2]));
        // iterations 7..=9 are executed twice
        let js: Vec<u64> = rep.trace.iter().map(|t| t.j).collect();
        assert_eq!(js.iter().filter(|&&j| j == 8).count(), 2);
        assert!(rel_inf(&rep.x, &reference.x) < 1e-10, "{mode}");
        let want = &states_at(&pb, 6)[2];
        let got = &rec.slices[&2];
        assert!(rel_inf(&got.x, &want.x) < 1e-10);
        assert!(rel_inf(&got.r, &want.r) < 1e-10);
        assert!(rel_inf(&got.z, &want.z) < 1e-10);
        assert_eq!(got.p, want.p);
    }
}

#[test]
fn two_simultaneous_failures_in_memory() {
    let pb = ones_problem(8, 8);
    let reference = run(&pb, &solve_config(RecoveryMode::None, 0, 1), &[]);
    let rep = run(&pb, &solve_config(RecoveryMode::EsrInmem, 2, 1), &["12:compute:1,4"]);
    assert_eq!(rep.status, RunStatus::Converged);
    let rec = &rep.recoveries[0];
    assert_eq!(rec.failed, vec![1, 4]);
    assert_eq!(rec.rollback_to, 12);
    assert!(rel_inf(&rep.x, &reference.x) < 1e-10);
}

#[test]
fn too_many_failures_are_unrecoverable() {
    let pb = ones_problem(6, 4);
    let rep = run(&pb, &solve_config(RecoveryMode::NvmPrd, 1, 2), &["7:compute:0,3"]);
    assert!(matches!(rep.status, RunStatus::Unrecoverable(_)));
    let rep = run(&pb, &solve_config(RecoveryMode::None, 0, 2), &["7:compute:1"]);
    assert!(matches!(rep.status, RunStatus::Unrecoverable(_)));
}

#[test]
fn fault_before_first_pair_restarts_cold() {
    let pb = ones_problem(6, 4);
    let reference = run(&pb, &solve_config(RecoveryMode::None, 0, 5), &[]);
    let rep = run(&pb, &solve_config(RecoveryMode::NvmLocal, 1, 5), &["3:compute:1"]);
    assert_eq!(rep.status, RunStatus::Converged);
    assert!(rep.recoveries[0].cold_restart);
    assert_eq!(rep.x, reference.x);
}

#[test]
fn mid_persist_falls_back_to_previous_pair() {
    let pb = ones_problem(8, 4);
    let reference = run(&pb, &solve_config(RecoveryMode::None, 0, 5), &[]);
    for mode in BACKENDS {
        for cut in [0, 100, 5000, usize::MAX] {
            let fault = format!("11:mid_persist@{cut}:3");
            let rep = run(&pb, &solve_config(mode, 1, 5), &[fault.as_str()]);
            assert_eq!(rep.status, RunStatus::Converged, "{mode} cut {cut}");
            let rec = &rep.recoveries[0];
            let complete_local = mode == RecoveryMode::NvmLocal && cut >= 8 + 16 * 128 + 42;
            let want = if complete_local { 11 } else { 6 };
            assert_eq!(rec.rollback_to, want, "{mode} cut {cut}");
            assert!(rel_inf(&rep.x, &reference.x) < 1e-10);
        }
    }
}

#[test]
fn repeated_faults_recover_each_time() {
    let pb = ones_problem(8, 4);
    let reference = run(&pb, &solve_config(RecoveryMode::None, 0, 3), &[]);
    for mode in BACKENDS {
        let rep = run(&pb, &solve_config(mode, 1, 3), &["8:compute:1", "9:compute:2", "14:compute:0"]);
        assert_eq!(rep.status, RunStatus::Converged, "{mode}");
        assert_eq!(rep.recoveries.len(), 3);
        assert!(rep.recoveries.iter().all(|r| !r.cold_restart), "{mode}");
        assert!(rel_inf(&rep.x, &reference.x) < 1e-10);
    }
}

#[test]
fn reports_are_deterministic() {
    let pb = ones_problem(6, 4);
    for mode in BACKENDS {
        let s = solve_config(mode, 1, 2);
        let a = run(&pb, &s, &["9:compute:2"]);
        let b = run(&pb, &s, &["9:compute:2"]);
        assert_eq!(a, b);
        assert_eq!(a.to_records(), b.to_records());
    }
}

#[test]
fn record_lines_carry_required_fields() {
    let pb = ones_problem(6, 4);
    let rep = run(&pb, &solve_config(RecoveryMode::NvmPrd, 1, 2), &["9:compute:2"]);
    let text = rep.to_records();
    for line in text.lines() {
        for key in ["kind=", "iteration=", "rank=", "bytes=", "simtime="] {
            assert!(line.contains(key), "{line}");
        }
    }
    for kind in ["fault", "detect", "spawn", "fetch", "gather", "reconstruct", "rollback", "persist", "summary"] {
        assert!(text.contains(&format!("kind={kind} ")), "missing {kind}");
    }
}

#[test]
fn homogeneous_nodes_revive_in_place() {
    let pb = ones_problem(6, 4);
    let rep = run(&pb, &solve_config(RecoveryMode::NvmLocal, 1, 2), &["9:compute:2"]);
    assert!(rep.events.iter().any(|e| e.kind == "revive" && e.rank == Some(2)));
    assert!(!rep.events.iter().any(|e| e.kind == "spawn"));
}

#[test]
fn invalid_plans_and_configs_are_rejected() {
    let pb = ones_problem(4, 4);
    let s = solve_config(RecoveryMode::NvmPrd, 1, 2);
    let c = cluster(4, RecoveryMode::NvmPrd);
    let prd = FaultPlan::parse(&["5:compute:4"]).unwrap();
    assert!(matches!(simulate(&c, &s, &pb, &prd, Execution::Sequential), Err(SimError::InvalidPlan(_))));
    let wrong_arch = ClusterConfig::packed(4, 1, esr_core::cluster::Architecture::Homogeneous);
    assert!(matches!(
        simulate(&wrong_arch, &s, &pb, &FaultPlan::none(), Execution::Sequential),
        Err(SimError::Config(_))
    ));
}

