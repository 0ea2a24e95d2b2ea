use std::collections::BTreeMap;
use std::fmt::Write;

use crate::bench::ledger::OverheadLedger;
use crate::esr::ReconstructedSlice;
use crate::pcg::{RecoveryMode, TraceEntry};
use crate::pstore::StoreCounters;
use crate::rma::SimTime;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxIter,
    Unrecoverable(String),
    Capacity(String),
    Breakdown(String),
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIter => "max_iter",
            RunStatus::Unrecoverable(_) => "unrecoverable",
            RunStatus::Capacity(_) => "capacity",
            RunStatus::Breakdown(_) => "breakdown",
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            RunStatus::Unrecoverable(r) | RunStatus::Capacity(r) | RunStatus::Breakdown(r) => Some(r),
            _ => None,
        }
    }

    /// The run finished with a usable iterate.
    pub fn is_success(&self) -> bool {
        matches!(self, RunStatus::Converged | RunStatus::MaxIter)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub kind: &'static str,
    pub iteration: u64,
    pub rank: Option<usize>,
    pub bytes: u64,
    pub simtime: SimTime,
}

/// State produced by one recovery, for comparison against a crash-free run.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryCapture {
    /// Iteration at which the fault struck.
    pub fault_at: u64,
    /// Iteration every rank was rolled back to.
    pub rollback_to: u64,
    pub failed: Vec<usize>,
    pub slices: BTreeMap<usize, ReconstructedSlice>,
    pub cold_restart: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub status: RunStatus,
    pub mode: RecoveryMode,
    pub n: usize,
    pub proc: usize,
    pub c: usize,
    pub iterations: u64,
    pub residual: f64,
    pub x: Vec<f64>,
    pub trace: Vec<TraceEntry>,
    pub events: Vec<Event>,
    pub recoveries: Vec<RecoveryCapture>,
    /// Measured ledger; per-persistence figures are averages over the
    /// completed persistence rounds.
    pub ledger: OverheadLedger,
    pub counters: StoreCounters,
    /// Largest per-node volatile footprint seen, bytes.
    pub peak_node_volatile: u64,
    pub simtime: SimTime,
}

impl RunReport {
    pub fn recovered(&self) -> bool {
        !self.recoveries.is_empty() && self.status.is_success()
    }

    /// Average simulated time of one persistence iteration.
    pub fn persist_simtime(&self) -> u64 {
        if self.counters.rounds == 0 {
            0
        } else {
            self.counters.simtime / (2 * self.counters.rounds)
        }
    }

    /// Line-delimited records: one per trace entry and event, then a summary.
    /// Every line carries `kind`, `iteration`, `rank`, `bytes`, `simtime`.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for t in &self.trace {
            let _ = writeln!(
                out,
                "kind=iterate iteration={} rank=- bytes=0 simtime=- residual={:e} digest={:016x}",
                t.j, t.residual, t.digest
            );
        }
        for e in &self.events {
            let rank = e.rank.map_or("-".to_string(), |r| r.to_string());
            let _ = writeln!(
                out,
                "kind={} iteration={} rank={} bytes={} simtime={}",
                e.kind, e.iteration, rank, e.bytes, e.simtime
            );
        }
        let _ = write!(
            out,
            "kind=summary iteration={} rank=- bytes={} simtime={} status={} mode={} n={} proc={} c={} residual={:e}",
            self.iterations,
            self.counters.wire_bytes + self.counters.durable_bytes,
            self.simtime,
            self.status.as_str(),
            self.mode,
            self.n,
            self.proc,
            self.c,
            self.residual
        );
        if let Some(r) = self.status.reason() {
            let _ = write!(out, " reason=\"{}\"", r.replace('"', "'"));
        }
        out.push('\n');
        out
    }
}
