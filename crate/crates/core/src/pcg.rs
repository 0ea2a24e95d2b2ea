//! Row-block distributed preconditioned conjugate gradient.
//!
//! Each rank owns a contiguous block of rows and the matching slices of
//! `x`, `r`, `z`, `p`. The only inter-rank traffic is the halo exchange of
//! `p` (and of `x` when the true residual is recomputed) and global scalar
//! reductions, which are chained across ranks in rank order so the result
//! does not depend on the rank count.

use std::hash::Hasher;
use std::ops::Range;
use std::str::FromStr;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::halo::HaloPlan;
use crate::exec::Execution;
use crate::linalg::{self, CsrMatrix, LinalgError, Partition, Preconditioner};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PcgError {
    #[error("breakdown at iteration {j}: pᵀAp = {denom} is not positive")]
    Breakdown { j: u64, denom: f64 },
    #[error("numerical breakdown at iteration {j}: non-finite {what}")]
    NonFinite { j: u64, what: &'static str },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("persistence hook failed: {0}")]
    Hook(String),
}

pub type Result<T> = std::result::Result<T, PcgError>;

/// Where recovery data lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMode {
    None,
    EsrInmem,
    NvmLocal,
    NvmPrd,
}

impl RecoveryMode {
    pub const ALL: [RecoveryMode; 4] =
        [RecoveryMode::None, RecoveryMode::EsrInmem, RecoveryMode::NvmLocal, RecoveryMode::NvmPrd];

    pub fn as_str(self) -> &'static str {
        match self {
            RecoveryMode::None => "none",
            RecoveryMode::EsrInmem => "esr_inmem",
            RecoveryMode::NvmLocal => "nvm_local",
            RecoveryMode::NvmPrd => "nvm_prd",
        }
    }

    pub fn is_durable(self) -> bool {
        matches!(self, RecoveryMode::NvmLocal | RecoveryMode::NvmPrd)
    }
}

impl std::fmt::Display for RecoveryMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RecoveryMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "none" => Ok(RecoveryMode::None),
            "esr_inmem" | "inmem" | "peer_ram" => Ok(RecoveryMode::EsrInmem),
            "nvm_local" | "local" | "local_slot" => Ok(RecoveryMode::NvmLocal),
            "nvm_prd" | "prd" | "prd_window" => Ok(RecoveryMode::NvmPrd),
            other => Err(format!("unknown recovery mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecondKind {
    Identity,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub tol: f64,
    pub max_iter: u64,
    pub persist_period: u64,
    pub recovery_mode: RecoveryMode,
    pub c: usize,
    pub preconditioner: PrecondKind,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            persist_period: 1,
            recovery_mode: RecoveryMode::None,
            c: 0,
            preconditioner: PrecondKind::Jacobi,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self, proc: usize) -> Result<()> {
        if self.persist_period == 0 {
            return Err(PcgError::Config("persist_period must be at least 1".into()));
        }
        if self.c >= proc {
            return Err(PcgError::Config(format!("c = {} must be below proc = {proc}", self.c)));
        }
        if !(self.tol >= 0.0) {
            return Err(PcgError::Config(format!("tolerance {} is not a non-negative number", self.tol)));
        }
        Ok(())
    }

    /// Iterations at which p^(j) is part of a persisted pair.
    pub fn is_persistence_iteration(&self, j: u64) -> bool {
        let t = self.persist_period;
        self.recovery_mode != RecoveryMode::None && j >= t && (j.is_multiple_of(t) || (j - 1).is_multiple_of(t))
    }

    /// Second iteration of a pair `(kT, kT+1)`, `k ≥ 1`: the record
    /// `(p^(j-1), p^(j), β^(j-1))` is committed here.
    pub fn is_commit_iteration(&self, j: u64) -> bool {
        let t = self.persist_period;
        self.recovery_mode != RecoveryMode::None && j > t && (j - 1).is_multiple_of(t)
    }
}

/// Row block of one rank with its matrix rows renumbered to the local
/// column layout `[ghosts below | own | ghosts above]`, which preserves the
/// global column order of every row.
#[derive(Debug, Clone)]
pub struct LocalBlock {
    pub rows: Range<usize>,
    pub n_below: usize,
    pub n_ghost: usize,
    pub matrix: CsrMatrix,
}

impl LocalBlock {
    fn build(a: &CsrMatrix, rows: Range<usize>, ghosts: &[usize]) -> Result<Self> {
        let n_below = ghosts.partition_point(|&g| g < rows.start);
        let cols: Vec<usize> = ghosts[..n_below]
            .iter()
            .copied()
            .chain(rows.clone())
            .chain(ghosts[n_below..].iter().copied())
            .collect();
        let matrix = a.submatrix(rows.clone(), &cols)?;
        Ok(Self { rows, n_below, n_ghost: ghosts.len(), matrix })
    }

    /// `A[rows, :]·v` from the local slice and the received ghost values.
    pub fn spmv(&self, own: &[f64], ghosts: &[f64]) -> Vec<f64> {
        let mut ext = Vec::with_capacity(own.len() + ghosts.len());
        ext.extend_from_slice(&ghosts[..self.n_below]);
        ext.extend_from_slice(own);
        ext.extend_from_slice(&ghosts[self.n_below..]);
        let mut out = vec![0.0; self.rows.len()];
        self.matrix.spmv_rows_into(0..self.rows.len(), &ext, &mut out);
        out
    }
}

/// The static data of a distributed solve: `A`, `b`, `P` and the layout.
#[derive(Debug, Clone)]
pub struct DistributedProblem {
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub precond: Preconditioner,
    pub partition: Partition,
    pub halo: HaloPlan,
    pub blocks: Vec<LocalBlock>,
}

impl DistributedProblem {
    pub fn new(a: CsrMatrix, b: Vec<f64>, kind: PrecondKind, proc: usize) -> Result<Self> {
        if a.n_rows() != a.n_cols() {
            return Err(LinalgError::Shape { expected: a.n_rows(), got: a.n_cols() }.into());
        }
        if b.len() != a.n_rows() {
            return Err(LinalgError::Shape { expected: a.n_rows(), got: b.len() }.into());
        }
        let precond = match kind {
            PrecondKind::Identity => Preconditioner::identity(a.n_rows()),
            PrecondKind::Jacobi => Preconditioner::jacobi(&a)?,
        };
        let partition = Partition::balanced(a.n_rows(), proc)?;
        let halo = HaloPlan::build(&a, &partition)?;
        let blocks = partition
            .blocks()
            .enumerate()
            .map(|(s, rows)| LocalBlock::build(&a, rows, &halo.ghosts(s)))
            .collect::<Result<_>>()?;
        Ok(Self { a, b, precond, partition, halo, blocks })
    }

    pub fn n(&self) -> usize {
        self.a.n_rows()
    }

    pub fn proc(&self) -> usize {
        self.partition.proc()
    }

    pub fn b_slice(&self, rank: usize) -> &[f64] {
        &self.b[self.partition.range(rank)]
    }

    /// Local `A·v` for every rank, after a halo exchange of `slices`.
    pub fn local_spmv(&self, exec: Execution, slices: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let ghosts = self.halo.exchange(&self.partition, slices);
        let ranks: Vec<usize> = (0..self.proc()).collect();
        exec.map(&ranks, |&s| self.blocks[s].spmv(&slices[s], &ghosts[s]))
    }

    /// Scatter a global vector into rank slices.
    pub fn split(&self, v: &[f64]) -> Vec<Vec<f64>> {
        self.partition.blocks().map(|r| v[r].to_vec()).collect()
    }
}

/// Per-rank PCG state at iteration `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub j: u64,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    /// `p^(j-1)`; zeros at `j = 0`.
    pub p_prev: Vec<f64>,
    pub alpha: f64,
    /// `β^(j-1)`; zero at `j = 0`.
    pub beta_prev: f64,
    /// Global `r^(j)ᵀ z^(j)`.
    pub rz: f64,
}

/// Chained reduction over ranks in rank order.
pub fn global_dot<'a>(pairs: impl Iterator<Item = (&'a [f64], &'a [f64])>) -> f64 {
    pairs.fold(0.0, |acc, (u, v)| linalg::dot_continue(acc, u, v).expect("equal slice lengths"))
}

/// Communication performed by one step, for accounting.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct StepTraffic {
    pub halo_messages: usize,
    pub halo_values: usize,
    pub reductions: usize,
    /// Largest per-rank multiply-add count.
    pub flops_max: usize,
}

/// The PCG iteration over a [`DistributedProblem`].
#[derive(Debug, Clone, Copy)]
pub struct Pcg<'a> {
    pub problem: &'a DistributedProblem,
    pub exec: Execution,
}

impl<'a> Pcg<'a> {
    pub fn new(problem: &'a DistributedProblem, exec: Execution) -> Self {
        Self { problem, exec }
    }

    /// `x⁽⁰⁾ = 0`, `r⁽⁰⁾ = b`, `z⁽⁰⁾ = P r⁽⁰⁾`, `p⁽⁰⁾ = z⁽⁰⁾`.
    pub fn init(&self) -> Vec<SolverState> {
        let pb = self.problem;
        let mut states: Vec<SolverState> = pb
            .partition
            .blocks()
            .map(|rows| {
                let m = rows.len();
                let r = pb.b[rows.clone()].to_vec();
                let mut z = vec![0.0; m];
                pb.precond.apply_rows(rows, &r, &mut z);
                SolverState {
                    j: 0,
                    x: vec![0.0; m],
                    p: z.clone(),
                    p_prev: vec![0.0; m],
                    r,
                    z,
                    alpha: 0.0,
                    beta_prev: 0.0,
                    rz: 0.0,
                }
            })
            .collect();
        let rz = global_dot(states.iter().map(|s| (&s.r[..], &s.z[..])));
        for s in &mut states {
            s.rz = rz;
        }
        states
    }

    /// Advance every rank from `j` to `j + 1`.
    pub fn step(&self, states: &mut [SolverState]) -> Result<StepTraffic> {
        let pb = self.problem;
        let j = states[0].j;
        let p: Vec<Vec<f64>> = states.iter().map(|s| s.p.clone()).collect();
        let ap = pb.local_spmv(self.exec, &p);
        let p_ap = global_dot(states.iter().zip(&ap).map(|(s, q)| (&s.p[..], &q[..])));
        if !p_ap.is_finite() {
            return Err(PcgError::NonFinite { j, what: "pᵀAp" });
        }
        if p_ap <= 0.0 {
            return Err(PcgError::Breakdown { j, denom: p_ap });
        }
        let alpha = states[0].rz / p_ap;
        self.exec.for_each_mut(states, |s, st| {
            let rows = pb.partition.range(s);
            for ((x, r), (p, q)) in st.x.iter_mut().zip(st.r.iter_mut()).zip(st.p.iter().zip(&ap[s])) {
                *x += alpha * p;
                *r -= alpha * q;
            }
            pb.precond.apply_rows(rows, &st.r, &mut st.z);
        });
        let rz_new = global_dot(states.iter().map(|s| (&s.r[..], &s.z[..])));
        if !rz_new.is_finite() {
            return Err(PcgError::NonFinite { j, what: "rᵀz" });
        }
        let beta = rz_new / states[0].rz;
        self.exec.for_each_mut(states, |_, st| {
            std::mem::swap(&mut st.p_prev, &mut st.p);
            for ((p, z), pp) in st.p.iter_mut().zip(&st.z).zip(&st.p_prev) {
                *p = z + beta * pp;
            }
            st.alpha = alpha;
            st.beta_prev = beta;
            st.rz = rz_new;
            st.j = j + 1;
        });
        Ok(StepTraffic {
            halo_messages: pb.halo.messages().len(),
            halo_values: pb.halo.total_values(),
            reductions: 2,
            flops_max: (0..pb.proc())
                .map(|s| pb.blocks[s].matrix.nnz() + 4 * pb.partition.len_of(s))
                .max()
                .unwrap_or(0),
        })
    }

    /// `‖r‖₂ / ‖b‖₂` from the recurrence residual.
    pub fn recurrence_residual(&self, states: &[SolverState]) -> f64 {
        let rr = global_dot(states.iter().map(|s| (&s.r[..], &s.r[..])));
        relative(rr.sqrt(), &self.problem.b)
    }

    /// `‖b − A x‖₂ / ‖b‖₂`, recomputed from `x` (one halo exchange of `x`).
    pub fn true_residual(&self, states: &[SolverState]) -> f64 {
        let x: Vec<Vec<f64>> = states.iter().map(|s| s.x.clone()).collect();
        let ax = self.problem.local_spmv(self.exec, &x);
        let res: Vec<Vec<f64>> = ax
            .iter()
            .enumerate()
            .map(|(s, q)| self.problem.b_slice(s).iter().zip(q).map(|(b, q)| b - q).collect())
            .collect();
        let rr = global_dot(res.iter().map(|v| (&v[..], &v[..])));
        relative(rr.sqrt(), &self.problem.b)
    }

    /// Residual used for the stopping test at iteration `j`: the true
    /// residual every 10 iterations, the recurrence residual otherwise.
    pub fn stopping_residual(&self, states: &[SolverState]) -> f64 {
        if states[0].j.is_multiple_of(10) {
            self.true_residual(states)
        } else {
            self.recurrence_residual(states)
        }
    }
}

fn relative(norm: f64, b: &[f64]) -> f64 {
    let nb = linalg::norm2(b);
    if nb == 0.0 {
        norm
    } else {
        norm / nb
    }
}

/// Assemble rank slices into a global vector.
pub fn assemble(states: &[SolverState], field: impl Fn(&SolverState) -> &[f64]) -> Vec<f64> {
    states.iter().flat_map(|s| field(s).iter().copied()).collect()
}

/// FNV-1a digest of the bit patterns of all state vectors.
pub fn state_digest(states: &[SolverState]) -> u64 {
    let mut h = FnvHasher::default();
    for s in states {
        h.write_u64(s.j);
        for v in [&s.x, &s.r, &s.z, &s.p] {
            for x in v.iter() {
                h.write_u64(x.to_bits());
            }
        }
        h.write_u64(s.rz.to_bits());
    }
    h.finish()
}

/// Largest `|z − (p − β p_prev)|` relative to `|z| + |β p_prev|`.
pub fn recurrence_defect(states: &[SolverState]) -> f64 {
    states
        .iter()
        .flat_map(|s| {
            s.z.iter().zip(&s.p).zip(&s.p_prev).map(move |((z, p), pp)| {
                let scale = z.abs() + (s.beta_prev * pp).abs();
                if scale == 0.0 {
                    0.0
                } else {
                    (z - (p - s.beta_prev * pp)).abs() / scale
                }
            })
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub j: u64,
    pub residual: f64,
    pub digest: u64,
}

/// Called at persistence iterations with the states of all ranks.
pub trait PersistHook {
    fn on_persist(&mut self, j: u64, commit: bool, states: &[SolverState]) -> std::result::Result<(), String>;
}

/// Hook that only records the iterations it was called at.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct RecordingHook {
    pub calls: Vec<(u64, bool)>,
}

impl PersistHook for RecordingHook {
    fn on_persist(&mut self, j: u64, commit: bool, _states: &[SolverState]) -> std::result::Result<(), String> {
        self.calls.push((j, commit));
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub iterations: u64,
    pub residual: f64,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
    /// `(kT, kT+1)` pairs whose record was committed.
    pub persist_pairs: Vec<(u64, u64)>,
    pub traffic: StepTraffic,
}

/// Crash-free solve with persistence hooks.
pub fn run(
    config: &SolveConfig,
    problem: &DistributedProblem,
    exec: Execution,
    hook: &mut dyn PersistHook,
) -> Result<Solution> {
    config.validate(problem.proc())?;
    let pcg = Pcg::new(problem, exec);
    let mut states = pcg.init();
    let mut trace = Vec::new();
    let mut pairs = Vec::new();
    let mut traffic = StepTraffic::default();
    loop {
        let j = states[0].j;
        let residual = pcg.stopping_residual(&states);
        trace.push(TraceEntry { j, residual, digest: state_digest(&states) });
        if residual <= config.tol || j >= config.max_iter {
            return Ok(Solution {
                x: assemble(&states, |s| &s.x),
                iterations: j,
                residual,
                converged: residual <= config.tol,
                trace,
                persist_pairs: pairs,
                traffic,
            });
        }
        if config.is_persistence_iteration(j) {
            let commit = config.is_commit_iteration(j);
            hook.on_persist(j, commit, &states).map_err(PcgError::Hook)?;
            if commit {
                pairs.push((j - 1, j));
            }
        }
        let t = pcg.step(&mut states)?;
        traffic.halo_messages += t.halo_messages;
        traffic.halo_values += t.halo_values;
        traffic.reductions += t.reductions;
        traffic.flops_max += t.flops_max;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gen_poisson_7pt;

    fn cfg(mode: RecoveryMode, period: u64) -> SolveConfig {
        SolveConfig { recovery_mode: mode, persist_period: period, ..SolveConfig::default() }
    }

    #[test]
    fn identity_system_converges_in_one_step() {
        let b: Vec<f64> = (1..=8).map(f64::from).collect();
        let pb = DistributedProblem::new(CsrMatrix::identity(8), b.clone(), PrecondKind::Identity, 2).unwrap();
        let sol = run(&SolveConfig::default(), &pb, Execution::Sequential, &mut RecordingHook::default()).unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.x, b);
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn two_by_two_in_two_steps() {
        let a = gen_poisson_7pt(2, 1, 1).unwrap();
        let pb = DistributedProblem::new(a, vec![5.0, 5.0], PrecondKind::Identity, 1).unwrap();
        let c = SolveConfig { tol: 1e-14, ..SolveConfig::default() };
        let sol = run(&c, &pb, Execution::Sequential, &mut RecordingHook::default()).unwrap();
        assert!(sol.iterations <= 2);
        assert!(sol.x.iter().all(|x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn persistence_schedule() {
        let c = cfg(RecoveryMode::NvmPrd, 5);
        let commits: Vec<u64> = (0..=12).filter(|&j| c.is_commit_iteration(j)).collect();
        assert_eq!(commits, vec![6, 11]);
        let persists: Vec<u64> = (0..=12).filter(|&j| c.is_persistence_iteration(j)).collect();
        assert_eq!(persists, vec![5, 6, 10, 11]);
        let every = cfg(RecoveryMode::EsrInmem, 1);
        assert!(!every.is_commit_iteration(1));
        assert!((2..20).all(|j| every.is_commit_iteration(j)));
        assert!(!cfg(RecoveryMode::None, 1).is_persistence_iteration(3));
    }

    #[test]
    fn hook_sees_pairs_at_period_boundaries() {
        let a = gen_poisson_7pt(4, 4, 4).unwrap();
        let pb = DistributedProblem::new(a, vec![1.0; 64], PrecondKind::Jacobi, 4).unwrap();
        let c = SolveConfig { max_iter: 12, tol: 0.0, ..cfg(RecoveryMode::NvmPrd, 5) };
        let mut hook = RecordingHook::default();
        let sol = run(&c, &pb, Execution::Sequential, &mut hook).unwrap();
        assert_eq!(sol.persist_pairs, vec![(5, 6), (10, 11)]);
        assert_eq!(hook.calls, vec![(5, false), (6, true), (10, false), (11, true)]);
    }

    #[test]
    fn hooks_do_not_perturb_iterates() {
        let a = gen_poisson_7pt(4, 4, 4).unwrap();
        let pb = DistributedProblem::new(a, vec![1.0; 64], PrecondKind::Jacobi, 3).unwrap();
        let plain = run(&cfg(RecoveryMode::None, 1), &pb, Execution::Sequential, &mut RecordingHook::default()).unwrap();
        for mode in RecoveryMode::ALL {
            let s = run(&cfg(mode, 2), &pb, Execution::Parallel, &mut RecordingHook::default()).unwrap();
            assert_eq!(s.trace, plain.trace, "{mode}");
            assert_eq!(s.x, plain.x);
        }
    }

    #[test]
    fn trace_is_independent_of_rank_count() {
        let a = gen_poisson_7pt(5, 4, 3).unwrap();
        let b: Vec<f64> = (0..60).map(|i| (i as f64).cos()).collect();
        let reference = {
            let pb = DistributedProblem::new(a.clone(), b.clone(), PrecondKind::Jacobi, 1).unwrap();
            run(&SolveConfig::default(), &pb, Execution::Sequential, &mut RecordingHook::default()).unwrap()
        };
        for proc in [2, 3, 7] {
            let pb = DistributedProblem::new(a.clone(), b.clone(), PrecondKind::Jacobi, proc).unwrap();
            let s = run(&SolveConfig::default(), &pb, Execution::Parallel, &mut RecordingHook::default()).unwrap();
            assert_eq!(s.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                       reference.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn recurrences_hold_along_a_run() {
        let a = gen_poisson_7pt(6, 6, 6).unwrap();
        let pb = DistributedProblem::new(a.clone(), vec![1.0; 216], PrecondKind::Jacobi, 4).unwrap();
        let pcg = Pcg::new(&pb, Execution::Sequential);
        let mut st = pcg.init();
        for _ in 0..25 {
            pcg.step(&mut st).unwrap();
            assert!(recurrence_defect(&st) < 8.0 * f64::EPSILON);
            // r = b - A x within 1e-8 ‖b‖
            let x = assemble(&st, |s| &s.x);
            let ax = linalg::spmv(&a, &x).unwrap();
            let r = assemble(&st, |s| &s.r);
            let gap: Vec<f64> = (0..216).map(|i| r[i] - (1.0 - ax[i])).collect();
            assert!(linalg::norm2(&gap) <= 1e-8 * linalg::norm2(&pb.b));
            assert!(st[0].rz > 0.0);
            assert!(st.iter().all(|s| s.rz == st[0].rz && s.beta_prev == st[0].beta_prev));
        }
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let a = CsrMatrix::new(2, 2, vec![0, 1, 2], vec![0, 1], vec![1.0, -1.0]).unwrap();
        let pb = DistributedProblem::new(a, vec![0.0, 1.0], PrecondKind::Identity, 1).unwrap();
        let err = run(&SolveConfig::default(), &pb, Execution::Sequential, &mut RecordingHook::default()).unwrap_err();
        assert!(matches!(err, PcgError::Breakdown { j: 0, .. }));
    }

    #[test]
    fn config_validation() {
        assert!(SolveConfig { persist_period: 0, ..SolveConfig::default() }.validate(4).is_err());
        assert!(SolveConfig { c: 4, ..SolveConfig::default() }.validate(4).is_err());
        assert!(SolveConfig { c: 3, ..SolveConfig::default() }.validate(4).is_ok());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in RecoveryMode::ALL {
            assert_eq!(m.as_str().parse::<RecoveryMode>().unwrap(), m);
        }
        assert!("bogus".parse::<RecoveryMode>().is_err());
    }
}
