//! Persistence backends for recovery records: peer RAM (in-memory ESR),
//! per-rank local durable slots, and a remote persistent-recovery-data
//! (PRD) rank reached through PSCW epochs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::esr::{EsrError, Placement, RecoveryRecord, RedundancyStore};
use crate::pcg::{DistributedProblem, RecoveryMode};
use crate::rma::{CostModel, EpochGroup, RmaError, SimTime, Window};
use crate::slot::HEADER_LEN;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PstoreError {
    #[error("record of rank {owner} unavailable: {reason}")]
    Unavailable { owner: usize, reason: String },
    #[error("no complete recovery record for rank {0}")]
    ColdStart(usize),
    #[error("persistence unavailable: {0}")]
    PersistenceUnavailable(String),
    #[error("no live holder left for rank {0}")]
    NoHolder(usize),
    #[error("record of rank {0} failed validation")]
    Corrupt(usize),
    #[error(transparent)]
    Rma(#[from] RmaError),
    #[error(transparent)]
    Esr(#[from] EsrError),
}

pub type Result<T> = std::result::Result<T, PstoreError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackendKind {
    PeerRam,
    LocalSlot,
    PrdWindow,
}

impl BackendKind {
    pub fn for_mode(mode: RecoveryMode) -> Option<Self> {
        match mode {
            RecoveryMode::None => None,
            RecoveryMode::EsrInmem => Some(BackendKind::PeerRam),
            RecoveryMode::NvmLocal => Some(BackendKind::LocalSlot),
            RecoveryMode::NvmPrd => Some(BackendKind::PrdWindow),
        }
    }

    pub fn is_durable(self) -> bool {
        self != BackendKind::PeerRam
    }
}

/// Where durable slots live.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Media {
    #[default]
    Memory,
    Files(PathBuf),
}

/// Ranks that die during a persistence round, and how many bytes of their
/// own transfer (or durable write sequence) got through first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MidPersist {
    pub victims: BTreeSet<usize>,
    pub cut: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundOutcome {
    /// Every owner's record of this round is durable / resident.
    pub complete: bool,
    pub wire_bytes: u64,
    pub durable_bytes: u64,
    /// Simulated time from the start of the round until the data is safe.
    pub simtime: SimTime,
    pub warnings: Vec<String>,
}

/// Totals over the rounds that completed; bytes of interrupted rounds are
/// kept apart so per-round figures stay comparable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StoreCounters {
    pub rounds: u64,
    pub wire_bytes: u64,
    pub durable_bytes: u64,
    pub simtime: SimTime,
    pub interrupted_rounds: u64,
    pub wasted_bytes: u64,
    pub peak_ram_values: u64,
}

#[derive(Debug)]
pub struct PersistStore {
    kind: BackendKind,
    proc: usize,
    prd_rank: usize,
    slice_lens: Vec<usize>,
    /// `overlap[owner][holder]`: entries the halo already delivers.
    overlap: Vec<Vec<usize>>,
    placement: Placement,
    peer: RedundancyStore,
    windows: Vec<Window>,
    offsets: Vec<usize>,
    down: BTreeSet<usize>,
    prd_down: bool,
    cost: CostModel,
    counters: StoreCounters,
}

fn window_err(owner: usize, e: std::io::Error) -> PstoreError {
    PstoreError::Unavailable { owner, reason: e.to_string() }
}

impl PersistStore {
    pub fn new(kind: BackendKind, problem: &DistributedProblem, c: usize, cost: CostModel, media: &Media) -> Result<Self> {
        let proc = problem.proc();
        let placement = Placement::new(proc, c)?;
        let slice_lens: Vec<usize> = (0..proc).map(|s| problem.partition.len_of(s)).collect();
        let overlap = (0..proc)
            .map(|o| (0..proc).map(|h| problem.halo.overlap(o, h)).collect())
            .collect();
        let prd_rank = proc;
        let open = |stem: &str, target: usize, owner: u32, size: usize, remote: bool, group: EpochGroup| match media {
            Media::Memory => Ok(Window::in_memory(target, owner, size, remote, group, cost)),
            Media::Files(dir) => Window::with_files(dir, stem, target, owner, size, remote, group, cost)
                .map_err(|e| window_err(owner as usize, e)),
        };
        let mut offsets = vec![0];
        let windows = match kind {
            BackendKind::PeerRam => Vec::new(),
            BackendKind::LocalSlot => (0..proc)
                .map(|s| {
                    let size = RecoveryRecord::payload_len(slice_lens[s]);
                    open(&format!("rank{s}"), s, s as u32, size, false, EpochGroup::new([s])?)
                })
                .collect::<Result<_>>()?,
            BackendKind::PrdWindow => {
                for &m in &slice_lens {
                    offsets.push(offsets.last().unwrap() + RecoveryRecord::payload_len(m));
                }
                let all = EpochGroup::new(0..proc)?;
                vec![open("prd", prd_rank, prd_rank as u32, *offsets.last().unwrap(), true, all)?]
            }
        };
        Ok(Self {
            kind,
            proc,
            prd_rank,
            slice_lens,
            overlap,
            placement,
            peer: RedundancyStore::new(proc),
            windows,
            offsets,
            down: BTreeSet::new(),
            prd_down: false,
            cost,
            counters: StoreCounters::default(),
        })
    }

    pub fn kind(&self) -> BackendKind {
        self.kind
    }

    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    pub fn prd_rank(&self) -> usize {
        self.prd_rank
    }

    pub fn counters(&self) -> StoreCounters {
        self.counters
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn windows_mut(&mut self) -> &mut [Window] {
        &mut self.windows
    }

    pub fn peer(&self) -> &RedundancyStore {
        &self.peer
    }

    pub fn is_down(&self, rank: usize) -> bool {
        self.down.contains(&rank)
    }

    /// Redundancy values resident in `rank`'s volatile memory.
    pub fn ram_values_at(&self, rank: usize) -> usize {
        if self.kind == BackendKind::PeerRam {
            self.peer.values_at(rank)
        } else {
            0
        }
    }

    /// Durable bytes reserved: two slot images per window.
    pub fn nvm_reserved_bytes(&self) -> u64 {
        self.windows.iter().map(|w| 2 * w.slot_bytes() as u64).sum()
    }

    /// Durable bytes reserved on the node that hosts `rank`'s window(s).
    pub fn nvm_reserved_bytes_of(&self, rank: usize) -> u64 {
        match self.kind {
            BackendKind::PeerRam => 0,
            BackendKind::LocalSlot => 2 * self.windows[rank].slot_bytes() as u64,
            BackendKind::PrdWindow if rank == self.prd_rank => self.nvm_reserved_bytes(),
            BackendKind::PrdWindow => 0,
        }
    }

    /// Persist one record per owner as a single round. `records` must be
    /// indexed by owner. With `mid`, the victims die part-way through their
    /// own transfer.
    pub fn persist_round(
        &mut self,
        j: u64,
        records: &[RecoveryRecord],
        mid: Option<&MidPersist>,
        now: SimTime,
    ) -> Result<RoundOutcome> {
        assert_eq!(records.len(), self.proc, "one record per rank");
        for (s, r) in records.iter().enumerate() {
            assert!(r.owner == s && r.j == j, "record {s} out of place");
        }
        let out = match self.kind {
            BackendKind::PeerRam => self.round_peer(records, mid)?,
            BackendKind::LocalSlot => self.round_local(j, records, mid, now)?,
            BackendKind::PrdWindow => self.round_prd(j, records, mid, now)?,
        };
        let c = &mut self.counters;
        if out.complete {
            c.rounds += 1;
            c.wire_bytes += out.wire_bytes;
            c.durable_bytes += out.durable_bytes;
            c.simtime += out.simtime;
        } else {
            c.interrupted_rounds += 1;
            c.wasted_bytes += out.wire_bytes + out.durable_bytes;
        }
        c.peak_ram_values = c.peak_ram_values.max(self.peer.total_values() as u64);
        Ok(out)
    }

    fn round_peer(&mut self, records: &[RecoveryRecord], mid: Option<&MidPersist>) -> Result<RoundOutcome> {
        let mut out = RoundOutcome::default();
        let mut deliveries = Vec::new();
        let mut busiest = 0;
        for (owner, rec) in records.iter().enumerate() {
            if self.down.contains(&owner) {
                return Err(PstoreError::Unavailable { owner, reason: "owner is down".into() });
            }
            let m = self.slice_lens[owner];
            let mut sent = 0;
            let mut live = 0;
            for h in self.placement.resident_at(owner) {
                if self.down.contains(&h) {
                    out.warnings.push(format!("degraded redundancy: holder {h} of rank {owner} is down"));
                    continue;
                }
                live += 1;
                if h != owner {
                    let bytes = (2 * (m - self.overlap[owner][h]) * 8 + 8) as u64;
                    out.wire_bytes += bytes;
                    sent += self.cost.latency + self.cost.wire_per_byte * bytes;
                }
                deliveries.push((h, rec.clone()));
            }
            if live == 0 {
                return Err(PstoreError::NoHolder(owner));
            }
            busiest = busiest.max(sent);
        }
        out.simtime = busiest;
        if mid.is_some_and(|m| !m.victims.is_empty()) {
            // a sender died before the round finished: holders drop it whole
            return Ok(out);
        }
        for (h, rec) in deliveries {
            self.peer.deliver(h, rec);
        }
        out.complete = true;
        Ok(out)
    }

    fn round_local(
        &mut self,
        j: u64,
        records: &[RecoveryRecord],
        mid: Option<&MidPersist>,
        now: SimTime,
    ) -> Result<RoundOutcome> {
        let mut out = RoundOutcome { complete: true, ..Default::default() };
        let mut done = now;
        for (owner, rec) in records.iter().enumerate() {
            let w = &mut self.windows[owner];
            if w.is_down() {
                return Err(PstoreError::Unavailable { owner, reason: "local durable memory is down".into() });
            }
            let before = w.stats();
            w.sync_clock(owner, now);
            w.win_post(&EpochGroup::new([owner])?, j)?;
            w.win_start(owner)?;
            w.put_pmem(owner, 0, &rec.payload())?;
            w.win_complete(owner)?;
            if let Some(m) = mid.filter(|m| m.victims.contains(&owner)) {
                w.arm_crash_after(m.cut);
            }
            match w.win_wait_persist() {
                Ok(t) => done = done.max(t),
                Err(RmaError::Crashed { .. }) => out.complete = false,
                Err(e) => return Err(e.into()),
            }
            out.durable_bytes += w.stats().durable_bytes_written - before.durable_bytes_written;
        }
        out.simtime = done - now;
        Ok(out)
    }

    fn round_prd(
        &mut self,
        j: u64,
        records: &[RecoveryRecord],
        mid: Option<&MidPersist>,
        now: SimTime,
    ) -> Result<RoundOutcome> {
        if self.prd_down {
            return Err(PstoreError::PersistenceUnavailable(format!("PRD rank {} is down", self.prd_rank)));
        }
        let w = &mut self.windows[0];
        let before = w.stats();
        w.sync_clock(self.prd_rank, now);
        let group = EpochGroup::new(0..self.proc)?;
        w.win_post(&group, j)?;
        let mut out = RoundOutcome::default();
        let mut interrupted = false;
        for (owner, rec) in records.iter().enumerate() {
            w.sync_clock(owner, now);
            w.win_start(owner)?;
            match mid.filter(|m| m.victims.contains(&owner)) {
                Some(m) => {
                    w.put_pmem_partial(owner, self.offsets[owner], &rec.payload(), m.cut)?;
                    interrupted = true;
                }
                None => {
                    w.put_pmem(owner, self.offsets[owner], &rec.payload())?;
                    w.win_complete(owner)?;
                }
            }
        }
        if interrupted {
            // the victims never close their access epochs; the exposure is
            // abandoned and the previous commit stays active
            w.abort_epoch();
        } else {
            let t = w.win_wait_persist()?;
            out.simtime = t - now;
            out.complete = true;
        }
        let after = w.stats();
        out.wire_bytes = after.bytes_put - before.bytes_put;
        out.durable_bytes = after.durable_bytes_written - before.durable_bytes_written;
        Ok(out)
    }

    /// Iterations for which a complete, valid record of `owner` can be read.
    pub fn available(&self, owner: usize) -> Result<Vec<u64>> {
        let mut js: Vec<u64> = match self.kind {
            BackendKind::PeerRam => {
                let live: Vec<usize> = self
                    .placement
                    .resident_at(owner)
                    .into_iter()
                    .filter(|h| !self.down.contains(h))
                    .collect();
                if live.is_empty() {
                    return Err(PstoreError::NoHolder(owner));
                }
                live.iter()
                    .filter_map(|&h| self.peer.get(h, owner))
                    .filter(|r| r.verify())
                    .map(|r| r.j)
                    .collect()
            }
            BackendKind::LocalSlot => {
                let w = &self.windows[owner];
                if w.is_down() {
                    return Err(PstoreError::Unavailable { owner, reason: "local durable memory is down".into() });
                }
                w.valid_slots().iter().map(|c| c.header.iteration).collect()
            }
            BackendKind::PrdWindow => {
                if self.prd_down {
                    return Err(PstoreError::Unavailable { owner, reason: "PRD rank is down".into() });
                }
                self.windows[0].valid_slots().iter().map(|c| c.header.iteration).collect()
            }
        };
        js.sort_unstable();
        js.dedup();
        Ok(js)
    }

    /// The record of `owner` at iteration `j`.
    pub fn fetch_at(&self, owner: usize, j: u64) -> Result<RecoveryRecord> {
        let rec = match self.kind {
            BackendKind::PeerRam => self
                .placement
                .resident_at(owner)
                .into_iter()
                .filter(|h| !self.down.contains(h))
                .filter_map(|h| self.peer.get(h, owner))
                .find(|r| r.j == j && r.verify())
                .cloned(),
            BackendKind::LocalSlot => {
                self.available(owner)?;
                self.windows[owner]
                    .valid_slots()
                    .into_iter()
                    .filter(|c| c.header.iteration == j)
                    .max_by_key(|c| c.header.generation)
                    .map(|c| RecoveryRecord::from_payload(owner, j, &c.payload).ok_or(PstoreError::Corrupt(owner)))
                    .transpose()?
            }
            BackendKind::PrdWindow => {
                self.available(owner)?;
                let range = self.offsets[owner]..self.offsets[owner + 1];
                self.windows[0]
                    .valid_slots()
                    .into_iter()
                    .filter(|c| c.header.iteration == j)
                    .max_by_key(|c| c.header.generation)
                    .map(|c| {
                        RecoveryRecord::from_payload(owner, j, &c.payload[range.clone()])
                            .ok_or(PstoreError::Corrupt(owner))
                    })
                    .transpose()?
            }
        };
        rec.ok_or(PstoreError::ColdStart(owner))
    }

    /// Newest valid record of `owner`, read on behalf of `requester`.
    pub fn fetch(&self, owner: usize, requester: usize) -> Result<RecoveryRecord> {
        if self.down.contains(&requester) {
            return Err(PstoreError::Unavailable { owner, reason: format!("requester {requester} is down") });
        }
        let newest = *self.available(owner)?.last().ok_or(PstoreError::ColdStart(owner))?;
        self.fetch_at(owner, newest)
    }

    /// Fail-stop of a compute rank: its volatile memory is lost and, for
    /// local slots, its durable memory becomes unreachable.
    pub fn fail_rank(&mut self, rank: usize) {
        self.down.insert(rank);
        match self.kind {
            BackendKind::PeerRam => self.peer.wipe(rank),
            BackendKind::LocalSlot => self.windows[rank].crash(),
            BackendKind::PrdWindow => {}
        }
    }

    /// A replacement (or the revived rank) takes over `rank`.
    pub fn recover_rank(&mut self, rank: usize) {
        self.down.remove(&rank);
        if self.kind == BackendKind::LocalSlot {
            self.windows[rank].recover();
        }
    }

    pub fn fail_prd(&mut self) {
        self.prd_down = true;
        if let Some(w) = self.windows.first_mut().filter(|_| self.kind == BackendKind::PrdWindow) {
            w.crash();
        }
    }

    /// Drop every record newer than `j` so an abandoned timeline can never
    /// be selected.
    pub fn rollback_to(&mut self, j: u64) -> Result<()> {
        for (i, w) in self.windows.iter_mut().enumerate() {
            if !w.is_down() {
                w.invalidate_after(j).map_err(|e| match e {
                    RmaError::Io(reason) => PstoreError::Unavailable { owner: i, reason },
                    e => e.into(),
                })?;
            }
        }
        Ok(())
    }
}

/// Slot image bytes of one record of `m` entries.
pub fn slot_image_len(m: usize) -> usize {
    HEADER_LEN + RecoveryRecord::payload_len(m)
}

/// Directory layout used by file-backed media.
pub fn slot_files(dir: &Path, kind: BackendKind, proc: usize) -> Vec<PathBuf> {
    let stems: Vec<String> = match kind {
        BackendKind::PeerRam => Vec::new(),
        BackendKind::LocalSlot => (0..proc).map(|s| format!("rank{s}")).collect(),
        BackendKind::PrdWindow => vec!["prd".to_string()],
    };
    stems
        .iter()
        .flat_map(|s| [dir.join(format!("{s}.slot0")), dir.join(format!("{s}.slot1"))])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gen_poisson_7pt;
    use crate::pcg::PrecondKind;

    fn problem(n: usize, proc: usize) -> DistributedProblem {
        let a = gen_poisson_7pt(n, 1, 1).unwrap();
        DistributedProblem::new(a, vec![1.0; n], PrecondKind::Jacobi, proc).unwrap()
    }

    fn records(pb: &DistributedProblem, j: u64, seed: f64) -> Vec<RecoveryRecord> {
        (0..pb.proc())
            .map(|s| {
                let m = pb.partition.len_of(s);
                let pp: Vec<f64> = (0..m).map(|i| seed + i as f64).collect();
                let pc: Vec<f64> = (0..m).map(|i| seed * 2.0 - i as f64).collect();
                RecoveryRecord::new(s, j, seed / 3.0, pp, pc)
            })
            .collect()
    }

    const ALL: [BackendKind; 3] = [BackendKind::PeerRam, BackendKind::LocalSlot, BackendKind::PrdWindow];

    #[test]
    fn fetch_after_persist_round_trips() {
        let pb = problem(40, 4);
        for kind in ALL {
            let mut st = PersistStore::new(kind, &pb, 1, CostModel::default(), &Media::Memory).unwrap();
            assert!(matches!(st.fetch(2, 0), Err(PstoreError::ColdStart(2))));
            let recs = records(&pb, 6, 1.5);
            assert!(st.persist_round(6, &recs, None, 0).unwrap().complete);
            for s in 0..4 {
                assert_eq!(st.fetch(s, (s + 1) % 4).unwrap(), recs[s], "{kind:?}");
            }
        }
    }

    #[test]
    fn prd_bytes_per_round_are_one_slice_per_rank() {
        let pb = problem(1000, 4);
        let mut st = PersistStore::new(BackendKind::PrdWindow, &pb, 1, CostModel::default(), &Media::Memory).unwrap();
        let out = st.persist_round(6, &records(&pb, 6, 0.5), None, 0).unwrap();
        // two p slices of 250 values + β per rank, one header for the window
        assert_eq!(out.wire_bytes, 4 * (2 * 250 * 8 + 8));
        assert_eq!(out.durable_bytes, out.wire_bytes + HEADER_LEN as u64);
        // per persistence iteration: 250 values × 8 B per rank plus header share
        assert_eq!(out.durable_bytes / 2, 4 * 250 * 8 + (4 * 8 + HEADER_LEN as u64) / 2);
    }

    #[test]
    fn peer_ram_copies_and_holder_loss() {
        let pb = problem(40, 4);
        let mut st = PersistStore::new(BackendKind::PeerRam, &pb, 1, CostModel::default(), &Media::Memory).unwrap();
        let recs = records(&pb, 3, 2.0);
        st.persist_round(3, &recs, None, 0).unwrap();
        for s in 0..4 {
            assert_eq!(st.peer().holders_of(s).len(), 2);
        }
        st.fail_rank(2); // a holder of rank 1 (holders 2, 3)
        assert_eq!(st.fetch(1, 0).unwrap(), recs[1]);
        st.fail_rank(3);
        assert!(matches!(st.fetch(1, 0), Err(PstoreError::NoHolder(1))));
    }

    #[test]
    fn repeated_iteration_overwrites_and_bumps_generation() {
        let pb = problem(20, 2);
        for kind in [BackendKind::LocalSlot, BackendKind::PrdWindow] {
            let mut st = PersistStore::new(kind, &pb, 1, CostModel::default(), &Media::Memory).unwrap();
            st.persist_round(6, &records(&pb, 6, 1.0), None, 0).unwrap();
            let g1 = st.windows()[0].generation();
            let second = records(&pb, 6, 9.0);
            st.persist_round(6, &second, None, 0).unwrap();
            assert_eq!(st.windows()[0].generation(), g1 + 1);
            assert_eq!(st.fetch(0, 1).unwrap(), second[0]);
        }
    }

    #[test]
    fn mid_persist_crash_keeps_previous_pair() {
        let pb = problem(40, 4);
        for kind in ALL {
            let mut st = PersistStore::new(kind, &pb, 1, CostModel::default(), &Media::Memory).unwrap();
            let old = records(&pb, 6, 1.0);
            st.persist_round(6, &old, None, 0).unwrap();
            let mid = MidPersist { victims: [1].into(), cut: 37 };
            let out = st.persist_round(11, &records(&pb, 11, 2.0), Some(&mid), 0).unwrap();
            assert!(!out.complete, "{kind:?}");
            st.fail_rank(1);
            st.recover_rank(1);
            // rank 1 only ever has iteration 6
            assert_eq!(st.available(1).unwrap().last(), Some(&6), "{kind:?}");
            assert_eq!(st.fetch_at(1, 6).unwrap(), old[1]);
            st.rollback_to(6).unwrap();
            for s in 0..4 {
                assert_eq!(st.fetch(s, 0).unwrap(), old[s], "{kind:?} rank {s}");
            }
            assert_eq!(st.counters().rounds, 1);
            assert_eq!(st.counters().interrupted_rounds, 1);
        }
    }

    #[test]
    fn local_slot_unavailable_while_owner_down() {
        let pb = problem(20, 2);
        let mut st = PersistStore::new(BackendKind::LocalSlot, &pb, 1, CostModel::default(), &Media::Memory).unwrap();
        let recs = records(&pb, 2, 1.0);
        st.persist_round(2, &recs, None, 0).unwrap();
        st.fail_rank(0);
        assert!(matches!(st.fetch(0, 1), Err(PstoreError::Unavailable { owner: 0, .. })));
        st.recover_rank(0);
        assert_eq!(st.fetch(0, 1).unwrap(), recs[0]);
    }

    #[test]
    fn prd_survives_compute_crashes_but_not_its_own() {
        let pb = problem(20, 2);
        let mut st = PersistStore::new(BackendKind::PrdWindow, &pb, 1, CostModel::default(), &Media::Memory).unwrap();
        let recs = records(&pb, 2, 1.0);
        st.persist_round(2, &recs, None, 0).unwrap();
        st.fail_rank(0);
        assert_eq!(st.fetch(0, 1).unwrap(), recs[0]);
        st.fail_prd();
        assert!(matches!(
            st.persist_round(3, &records(&pb, 3, 1.0), None, 0),
            Err(PstoreError::PersistenceUnavailable(_))
        ));
    }

    #[test]
    fn file_media_survive_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let pb = problem(30, 3);
        let media = Media::Files(dir.path().to_path_buf());
        let recs = records(&pb, 4, 3.0);
        for kind in [BackendKind::LocalSlot, BackendKind::PrdWindow] {
            {
                let mut st = PersistStore::new(kind, &pb, 1, CostModel::default(), &media).unwrap();
                st.persist_round(4, &recs, None, 0).unwrap();
            }
            for f in slot_files(dir.path(), kind, 3) {
                assert!(f.exists(), "{}", f.display());
            }
            let st = PersistStore::new(kind, &pb, 1, CostModel::default(), &media).unwrap();
            for s in 0..3 {
                assert_eq!(st.fetch(s, 0).unwrap(), recs[s]);
            }
        }
    }
}
