use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::config::{Architecture, ClusterConfig, FaultPhase, FaultPlan};
use super::report::{Event, RecoveryCapture, RunReport, RunStatus};
use super::SimError;
use crate::bench::ledger::OverheadLedger;
use crate::esr::{self, RecoveryRecord, ReconstructedSlice};
use crate::exec::Execution;
use crate::pcg::{self, DistributedProblem, Pcg, PcgError, RecoveryMode, SolveConfig, SolverState, StepTraffic};
use crate::pstore::{BackendKind, MidPersist, PersistStore, PstoreError};
use crate::rma::{CostModel, SimTime};

/// Volatile `{x, r}` of every rank at a persistence iteration; `None` once
/// the owning rank has died.
#[derive(Debug, Clone)]
struct Snapshot {
    j: u64,
    x: Vec<Option<Vec<f64>>>,
    r: Vec<Option<Vec<f64>>>,
}

/// Two generations of rollback snapshots.
#[derive(Debug, Default)]
struct SnapshotRing {
    entries: VecDeque<Snapshot>,
}

impl SnapshotRing {
    const DEPTH: usize = 2;

    fn push(&mut self, states: &[SolverState]) {
        let j = states[0].j;
        self.entries.retain(|s| s.j != j);
        self.entries.push_back(Snapshot {
            j,
            x: states.iter().map(|s| Some(s.x.clone())).collect(),
            r: states.iter().map(|s| Some(s.r.clone())).collect(),
        });
        while self.entries.len() > Self::DEPTH {
            self.entries.pop_front();
        }
    }

    fn wipe(&mut self, rank: usize) {
        for s in &mut self.entries {
            s.x[rank] = None;
            s.r[rank] = None;
        }
    }

    /// Snapshot at `j` holding every survivor's slices.
    fn usable(&self, j: u64, survivors: &[usize]) -> Option<&Snapshot> {
        self.entries
            .iter()
            .find(|s| s.j == j && survivors.iter().all(|&r| s.x[r].is_some() && s.r[r].is_some()))
    }
}

/// Simulated time of one step: local flops, one halo round, two chained
/// reductions.
fn step_time(cost: &CostModel, t: &StepTraffic, proc: usize, halo_bytes_max: u64) -> SimTime {
    let hops = (usize::BITS - proc.saturating_sub(1).leading_zeros()) as u64;
    let halo = if t.halo_messages > 0 { cost.latency + cost.wire_per_byte * halo_bytes_max } else { 0 };
    cost.flop * t.flops_max as u64 + halo + 2 * hops * cost.latency
}

struct Sim<'a> {
    cluster: &'a ClusterConfig,
    solve: &'a SolveConfig,
    problem: &'a DistributedProblem,
    pcg: Pcg<'a>,
    store: Option<PersistStore>,
    snapshots: SnapshotRing,
    mapping: Vec<usize>,
    dead: BTreeSet<usize>,
    events: Vec<Event>,
    recoveries: Vec<RecoveryCapture>,
    now: SimTime,
    peak_node_volatile: u64,
    p_values_persisted: u64,
    halo_bytes_max: u64,
}

impl<'a> Sim<'a> {
    fn event(&mut self, kind: &'static str, iteration: u64, rank: Option<usize>, bytes: u64) {
        self.events.push(Event { kind, iteration, rank, bytes, simtime: self.now });
    }

    fn volatile_bytes_of(&self, rank: usize) -> u64 {
        let m = self.problem.partition.len_of(rank) as u64;
        let compute = self.problem.blocks[rank].matrix.nnz() as u64 + 4 * m;
        let rollback = if self.solve.recovery_mode == RecoveryMode::None { 0 } else { 4 * m };
        let red = self.store.as_ref().map_or(0, |s| s.ram_values_at(rank) as u64);
        8 * (compute + rollback + red)
    }

    /// Capacity check against `M_V` (per node) and `M_NV`.
    fn check_capacity(&mut self) -> Option<RunStatus> {
        let mut per_node = vec![0u64; self.cluster.nodes];
        for s in 0..self.cluster.proc {
            per_node[self.mapping[s]] += self.volatile_bytes_of(s);
        }
        let worst = per_node.iter().copied().enumerate().max_by_key(|&(_, b)| b).unwrap_or((0, 0));
        self.peak_node_volatile = self.peak_node_volatile.max(worst.1);
        if let Some(cap) = self.cluster.mem_v.filter(|&cap| worst.1 > cap) {
            return Some(RunStatus::Capacity(format!(
                "node {} needs {} bytes of volatile memory, M_V = {cap}",
                worst.0, worst.1
            )));
        }
        if let (Some(cap), Some(store)) = (self.cluster.mem_nv, &self.store) {
            let mut nv = vec![0u64; self.cluster.nodes + 1];
            for s in 0..self.cluster.proc {
                nv[self.mapping[s]] += store.nvm_reserved_bytes_of(s);
            }
            if let Some(node) = self.cluster.prd_node() {
                nv[node] += store.nvm_reserved_bytes_of(store.prd_rank());
            }
            if let Some((node, &b)) = nv.iter().enumerate().find(|(_, &b)| b > cap) {
                return Some(RunStatus::Capacity(format!(
                    "node {node} needs {b} bytes of durable memory, M_NV = {cap}"
                )));
            }
        }
        None
    }

    fn records(states: &[SolverState]) -> Vec<RecoveryRecord> {
        states
            .iter()
            .enumerate()
            .map(|(s, st)| RecoveryRecord::new(s, st.j, st.beta_prev, st.p_prev.clone(), st.p.clone()))
            .collect()
    }

    fn persist(&mut self, states: &[SolverState], mid: Option<&MidPersist>) -> Result<bool, PstoreError> {
        let j = states[0].j;
        self.snapshots.push(states);
        let records = Self::records(states);
        let store = self.store.as_mut().expect("persistence needs a backend");
        let out = store.persist_round(j, &records, mid, self.now)?;
        let kind = if out.complete { "persist" } else { "persist_interrupted" };
        let bytes = out.wire_bytes + out.durable_bytes;
        if out.complete {
            self.p_values_persisted += 2 * self.problem.n() as u64;
        }
        self.now += out.simtime;
        for _ in &out.warnings {
            self.event("degraded", j, None, 0);
        }
        self.event(kind, j, None, bytes);
        Ok(out.complete)
    }

    /// Replacement of dead ranks per the architecture's policy.
    fn replace(&mut self, j: u64, failed: &BTreeSet<usize>) {
        let bad_nodes: BTreeSet<usize> = failed.iter().map(|&f| self.mapping[f]).collect();
        for &f in failed {
            let spawn = (self.cluster.architecture == Architecture::PrdSubcluster)
                .then(|| {
                    (0..self.cluster.nodes).find(|n| {
                        !bad_nodes.contains(n)
                            && (0..self.cluster.proc)
                                .filter(|s| !self.dead.contains(s) && self.mapping[*s] == *n)
                                .count()
                                < self.cluster.slots_per_node
                    })
                })
                .flatten();
            match spawn {
                Some(node) => {
                    self.mapping[f] = node;
                    self.now += self.cluster.cost.latency;
                    self.event("spawn", j, Some(f), 0);
                }
                None => {
                    self.now += self.cluster.node_recovery_delay;
                    self.event("revive", j, Some(f), 0);
                }
            }
            self.dead.remove(&f);
            if let Some(store) = self.store.as_mut() {
                store.recover_rank(f);
            }
        }
    }

    fn cold_restart(&mut self, j: u64, failed: &BTreeSet<usize>) -> Result<Vec<SolverState>, SimError> {
        if let Some(store) = self.store.as_mut() {
            store.rollback_to(0)?;
        }
        self.snapshots.entries.clear();
        self.event("cold_restart", j, None, 0);
        self.recoveries.push(RecoveryCapture {
            fault_at: j,
            rollback_to: 0,
            failed: failed.iter().copied().collect(),
            slices: BTreeMap::new(),
            cold_restart: true,
        });
        Ok(self.pcg.init())
    }

    /// Kill `victims`, then detect, replace and reconstruct. Returns the
    /// restored states, or the status that ends the run.
    fn fail_and_recover(
        &mut self,
        j: u64,
        victims: &BTreeSet<usize>,
        states: &[SolverState],
    ) -> Result<Result<Vec<SolverState>, RunStatus>, SimError> {
        for &v in victims {
            self.dead.insert(v);
            self.snapshots.wipe(v);
            if let Some(store) = self.store.as_mut() {
                store.fail_rank(v);
            }
            self.event("fault", j, Some(v), 0);
        }
        let failed = self.detect_failures();
        for &f in &failed {
            self.event("detect", j, Some(f), 0);
        }
        let c = self.solve.c;
        if self.store.is_none() {
            return Ok(Err(RunStatus::Unrecoverable("no recovery data is kept (recovery_mode none)".into())));
        }
        if failed.len() > c {
            return Ok(Err(RunStatus::Unrecoverable(format!(
                "{} simultaneous failures exceed c = {c}",
                failed.len()
            ))));
        }
        self.replace(j, &failed);
        let proc = self.cluster.proc;
        let survivors: Vec<usize> = (0..proc).filter(|s| !failed.contains(s)).collect();
        let store = self.store.as_ref().unwrap();

        // newest iteration every rank has a record of, with survivor snapshots
        let mut common: Option<BTreeSet<u64>> = None;
        for s in 0..proc {
            let avail: BTreeSet<u64> = match store.available(s) {
                Ok(v) => v.into_iter().collect(),
                Err(PstoreError::NoHolder(o)) => {
                    return Ok(Err(RunStatus::Unrecoverable(format!("every holder of rank {o} is lost"))))
                }
                Err(e) => return Ok(Err(RunStatus::Unrecoverable(e.to_string()))),
            };
            common = Some(match common {
                None => avail,
                Some(c) => c.intersection(&avail).copied().collect(),
            });
        }
        let j_star = common
            .unwrap_or_default()
            .into_iter()
            .rev()
            .find(|&js| self.snapshots.usable(js, &survivors).is_some());
        let Some(j_star) = j_star else {
            return Ok(Ok(self.cold_restart(j, &failed)?));
        };

        let mut records = BTreeMap::new();
        let mut fetched = 0u64;
        for s in 0..proc {
            match store.fetch_at(s, j_star) {
                Ok(r) => {
                    if failed.contains(&s) {
                        fetched += RecoveryRecord::payload_len(r.len()) as u64;
                    }
                    records.insert(s, r);
                }
                Err(e) => return Ok(Err(RunStatus::Unrecoverable(e.to_string()))),
            }
        }
        self.now += self.cluster.cost.latency + self.cluster.cost.wire_per_byte * fetched;
        self.event("fetch", j_star, None, fetched);

        let snap = self.snapshots.usable(j_star, &survivors).unwrap().clone();
        let gathered: u64 = survivors.iter().map(|&s| 16 * self.problem.partition.len_of(s) as u64).sum();
        self.now += self.cluster.cost.latency + self.cluster.cost.wire_per_byte * gathered;
        self.event("gather", j_star, None, gathered);

        let rebuilt = match esr::reconstruct(self.problem, &failed, &snap.x, &snap.r, &records, c) {
            Ok(r) => r,
            Err(e) => return Ok(Err(RunStatus::Unrecoverable(e.to_string()))),
        };
        let f_rows: u64 = failed.iter().map(|&f| self.problem.partition.len_of(f) as u64).sum();
        self.now += self.cluster.cost.flop * f_rows * f_rows.max(1);
        for &f in &failed {
            self.event("reconstruct", j_star, Some(f), 0);
        }

        let mut restored: Vec<SolverState> = Vec::with_capacity(proc);
        for s in 0..proc {
            let rows = self.problem.partition.range(s);
            let rec = &records[&s];
            let (x, r) = match rebuilt.get(&s) {
                Some(sl) => (sl.x.clone(), sl.r.clone()),
                None => (snap.x[s].clone().unwrap(), snap.r[s].clone().unwrap()),
            };
            let mut z = vec![0.0; rows.len()];
            self.problem.precond.apply_rows(rows, &r, &mut z);
            restored.push(SolverState {
                j: j_star,
                x,
                r,
                z,
                p: rec.p_curr.clone(),
                p_prev: rec.p_prev.clone(),
                alpha: 0.0,
                beta_prev: rec.beta_prev,
                rz: 0.0,
            });
        }
        let rz = pcg::global_dot(restored.iter().map(|s| (&s.r[..], &s.z[..])));
        for s in &mut restored {
            s.rz = rz;
        }
        debug_assert_eq!(states.len(), restored.len());

        self.store.as_mut().unwrap().rollback_to(j_star)?;
        self.snapshots.entries.retain(|s| s.j <= j_star);
        self.snapshots.push(&restored);
        self.event("rollback", j_star, None, 0);
        let slices: BTreeMap<usize, ReconstructedSlice> = rebuilt;
        self.recoveries.push(RecoveryCapture {
            fault_at: j,
            rollback_to: j_star,
            failed: failed.iter().copied().collect(),
            slices,
            cold_restart: false,
        });
        Ok(Ok(restored))
    }

    /// Oracle detector: exactly the dead compute ranks.
    fn detect_failures(&self) -> BTreeSet<usize> {
        self.dead.clone()
    }

    fn measured_ledger(&self) -> OverheadLedger {
        let pb = self.problem;
        let mode = self.solve.recovery_mode;
        let n = pb.n() as u64;
        let proc = pb.proc();
        let nnz: u64 = pb.blocks.iter().map(|b| b.matrix.nnz() as u64).sum();
        let vectors: u64 = (0..proc).map(|s| 4 * pb.partition.len_of(s) as u64).sum();
        let counters = self.store.as_ref().map(|s| s.counters()).unwrap_or_default();
        let per_persist = |total: u64| if counters.rounds == 0 { 0 } else { total / (2 * counters.rounds) };
        let durable = mode.is_durable();
        let nvm_resident_values = match &self.store {
            Some(store) if durable => (0..proc)
                .filter_map(|s| store.fetch(s, s).ok())
                .map(|r| 2 * r.len() as u64)
                .sum(),
            _ => 0,
        };
        OverheadLedger {
            mode,
            n,
            proc: proc as u64,
            c: self.solve.c as u64,
            nnz,
            ram_compute_values: nnz + vectors,
            ram_redundancy_values: counters.peak_ram_values,
            ram_rollback_values: if mode == RecoveryMode::None { 0 } else { 2 * SnapshotRing::DEPTH as u64 * n },
            nvm_values_per_persist: if durable { per_persist(self.p_values_persisted) } else { 0 },
            nvm_resident_values,
            nvm_reserved_bytes: self.store.as_ref().map_or(0, |s| s.nvm_reserved_bytes()),
            nvm_written_bytes_per_persist: per_persist(counters.durable_bytes),
            wire_bytes_per_persist: per_persist(counters.wire_bytes),
        }
    }
}

/// Run the solver on a simulated cluster under `plan`.
pub fn simulate(
    cluster: &ClusterConfig,
    solve: &SolveConfig,
    problem: &DistributedProblem,
    plan: &FaultPlan,
    exec: Execution,
) -> Result<RunReport, SimError> {
    cluster.validate(solve)?;
    plan.validate(cluster, solve)?;
    if problem.proc() != cluster.proc {
        return Err(SimError::Config(format!(
            "problem is split over {} ranks, cluster has {}",
            problem.proc(),
            cluster.proc
        )));
    }
    let store = match BackendKind::for_mode(solve.recovery_mode) {
        Some(kind) => Some(PersistStore::new(kind, problem, solve.c, cluster.cost, &cluster.media)?),
        None => None,
    };
    let halo_bytes_max = (0..cluster.proc)
        .map(|s| 8 * problem.halo.ghosts(s).len() as u64)
        .max()
        .unwrap_or(0);
    let mut sim = Sim {
        cluster,
        solve,
        problem,
        pcg: Pcg::new(problem, exec),
        store,
        snapshots: SnapshotRing::default(),
        mapping: cluster.mapping.clone(),
        dead: BTreeSet::new(),
        events: Vec::new(),
        recoveries: Vec::new(),
        now: 0,
        peak_node_volatile: 0,
        p_values_persisted: 0,
        halo_bytes_max,
    };
    let mut fired = vec![false; plan.events.len()];
    let mut take = |j: u64, mid: bool| {
        let k = plan.events.iter().enumerate().position(|(k, e)| {
            !fired[k] && e.iteration == j && matches!(e.phase, FaultPhase::MidPersist { .. }) == mid
        })?;
        fired[k] = true;
        Some(plan.events[k].clone())
    };

    let mut trace = Vec::new();
    let mut states = sim.pcg.init();
    let mut status = sim.check_capacity();
    while status.is_none() {
        let j = states[0].j;
        let residual = sim.pcg.stopping_residual(&states);
        trace.push(pcg::TraceEntry { j, residual, digest: pcg::state_digest(&states) });
        if residual <= solve.tol {
            status = Some(RunStatus::Converged);
            break;
        }
        if j >= solve.max_iter {
            status = Some(RunStatus::MaxIter);
            break;
        }
        if solve.is_commit_iteration(j) {
            let fault = take(j, true);
            let mid = fault.as_ref().map(|e| MidPersist {
                victims: e.victims.clone(),
                cut: match e.phase {
                    FaultPhase::MidPersist { cut } => cut,
                    FaultPhase::Compute => 0,
                },
            });
            if let Err(e) = sim.persist(&states, mid.as_ref()) {
                status = Some(RunStatus::Unrecoverable(e.to_string()));
                break;
            }
            if let Some(s) = sim.check_capacity() {
                sim.event("capacity", j, None, sim.peak_node_volatile);
                status = Some(s);
                break;
            }
            if let Some(e) = fault {
                match sim.fail_and_recover(j, &e.victims, &states)? {
                    Ok(s) => states = s,
                    Err(s) => status = Some(s),
                }
                continue;
            }
        }
        if let Some(e) = take(j, false) {
            match sim.fail_and_recover(j, &e.victims, &states)? {
                Ok(s) => states = s,
                Err(s) => status = Some(s),
            }
            continue;
        }
        match sim.pcg.step(&mut states) {
            Ok(t) => sim.now += step_time(&cluster.cost, &t, cluster.proc, sim.halo_bytes_max),
            Err(e @ (PcgError::Breakdown { .. } | PcgError::NonFinite { .. })) => {
                status = Some(RunStatus::Breakdown(e.to_string()));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let status = status.unwrap();
    let last_j = trace.last().map_or(0, |t: &pcg::TraceEntry| t.j);
    sim.event("end", last_j, None, 0);
    Ok(RunReport {
        mode: solve.recovery_mode,
        n: problem.n(),
        proc: cluster.proc,
        c: solve.c,
        iterations: last_j,
        residual: trace.last().map_or(f64::NAN, |t| t.residual),
        x: pcg::assemble(&states, |s| &s.x),
        trace,
        ledger: sim.measured_ledger(),
        counters: sim.store.as_ref().map(|s| s.counters()).unwrap_or_default(),
        events: sim.events,
        recoveries: sim.recoveries,
        peak_node_volatile: sim.peak_node_volatile,
        simtime: sim.now,
        status,
    })
}
