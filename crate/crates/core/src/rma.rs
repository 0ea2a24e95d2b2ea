//! Simulated one-sided communication windows with persist-on-close epochs.
//!
//! A [`Window`] exposes `size` bytes of a target rank. Origins write through
//! [`Window::put_pmem`] only inside an access epoch (`win_start` ..
//! `win_complete`) that is matched by an exposure epoch posted by the target
//! (`win_post` .. `win_wait_persist`). Puts land in a target-side staging
//! buffer; the target's persist-close writes that buffer to the inactive
//! durable slot (payload, flush, header, flush) and only then flips the
//! active slot. A crash at any point of that write leaves the previous slot
//! intact, so recovery always finds the last complete commit.
//!
//! Collective fence synchronization is available through
//! [`Window::win_fence_persist`]. Passive-target locking is not supported.
//!
//! Every operation advances a per-rank simulated clock according to a
//! [`CostModel`]. `win_complete` never waits for the target's persist, so an
//! origin can be back to computing while the target is still writing.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::slot::{self, SlotHeader, HEADER_LEN};

pub type SimTime = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RmaError {
    #[error("epoch violation: {0}")]
    EpochViolation(String),
    #[error("access [{offset}, {offset}+{len}) outside window of {size} bytes")]
    Range { offset: usize, len: usize, size: usize },
    #[error("wait would never return: ranks {missing:?} have not completed")]
    Deadlock { missing: Vec<usize> },
    #[error("collective mismatch: missing {missing:?}, unexpected {unexpected:?}")]
    CollectiveMismatch { missing: Vec<usize>, unexpected: Vec<usize> },
    #[error("{0} is not supported")]
    Unsupported(&'static str),
    #[error("target rank {0} is down")]
    TargetDown(usize),
    #[error("crashed after {written} bytes of durable write")]
    Crashed { written: usize },
    #[error("durable medium error: {0}")]
    Io(String),
}

impl From<io::Error> for RmaError {
    fn from(e: io::Error) -> Self {
        RmaError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, RmaError>;

/// Simulated-time constants. Units are arbitrary ("simulated units"), not
/// calibrated to any hardware.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CostModel {
    /// Per message or synchronization call.
    pub latency: SimTime,
    /// Per byte crossing the network.
    pub wire_per_byte: SimTime,
    /// Per byte written to durable media.
    pub nvm_per_byte: SimTime,
    /// Per floating point multiply-add.
    pub flop: SimTime,
}

impl Default for CostModel {
    fn default() -> Self {
        Self { latency: 1000, wire_per_byte: 1, nvm_per_byte: 3, flop: 1 }
    }
}

/// Rank set named by a post, start or fence call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochGroup(BTreeSet<usize>);

impl EpochGroup {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = members.into_iter().collect();
        if set.is_empty() {
            return Err(RmaError::EpochViolation("empty epoch group".into()));
        }
        Ok(Self(set))
    }

    pub fn contains(&self, rank: usize) -> bool {
        self.0.contains(&rank)
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.0
    }
}

/// Byte-addressable durable region holding one slot image.
pub trait DurableMedium: Send + std::fmt::Debug {
    fn write_at(&mut self, offset: usize, data: &[u8]) -> io::Result<()>;
    /// Ordering barrier: everything written before is durable after.
    fn flush(&mut self) -> io::Result<()>;
    fn read_all(&self) -> io::Result<Vec<u8>>;
}

/// In-process stand-in for an NVRAM region. Survives simulated crashes of
/// the ranks that use it.
#[derive(Debug, Default, Clone)]
pub struct MemMedium {
    bytes: Vec<u8>,
}

impl DurableMedium for MemMedium {
    fn write_at(&mut self, offset: usize, data: &[u8]) -> io::Result<()> {
        let end = offset + data.len();
        if self.bytes.len() < end {
            self.bytes.resize(end, 0);
        }
        self.bytes[offset..end].copy_from_slice(data);
        Ok(())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }

    fn read_all(&self) -> io::Result<Vec<u8>> {
        Ok(self.bytes.clone())
    }
}

/// One file per slot; `flush` is `fdatasync`.
#[derive(Debug)]
pub struct FileMedium {
    path: PathBuf,
    file: File,
}

impl FileMedium {
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().read(true).write(true).create(true).truncate(false).open(&path)?;
        Ok(Self { path, file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl DurableMedium for FileMedium {
    fn write_at(&mut self, offset: usize, data: &[u8]) -> io::Result<()> {
        self.file.seek(SeekFrom::Start(offset as u64))?;
        self.file.write_all(data)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.file.sync_data()
    }

    fn read_all(&self) -> io::Result<Vec<u8>> {
        let mut f = File::open(&self.path)?;
        let mut out = Vec::new();
        f.read_to_end(&mut out)?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sync {
    Idle,
    Exposed {
        group: EpochGroup,
        open: BTreeSet<usize>,
        completed: BTreeSet<usize>,
        last_complete: SimTime,
    },
    Fence,
}

/// Observable epoch state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpochState {
    Idle,
    Exposed,
    Fence,
}

/// Byte counters of one window.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct WindowStats {
    pub bytes_put: u64,
    pub bytes_got: u64,
    pub durable_bytes_written: u64,
    pub commits: u64,
}

/// A validated slot read back from durable media.
#[derive(Debug, Clone, PartialEq)]
pub struct CommittedSlot {
    pub slot: usize,
    pub header: SlotHeader,
    pub payload: Vec<u8>,
}

#[derive(Debug)]
pub struct Window {
    target: usize,
    owner: u32,
    size: usize,
    remote: bool,
    slots: [Box<dyn DurableMedium>; 2],
    active_slot: Option<usize>,
    generation: u64,
    sync: Sync,
    staging: Vec<u8>,
    dirty: bool,
    tag: u64,
    epochs: u64,
    fence_group: EpochGroup,
    crash_after: Option<usize>,
    down: bool,
    clocks: BTreeMap<usize, SimTime>,
    cost: CostModel,
    stats: WindowStats,
}

impl Window {
    /// `owner` is recorded in every slot header; `remote` selects whether
    /// puts are charged wire cost (remote persistent node) or not (local
    /// window on the owner's own durable memory).
    pub fn new(
        target: usize,
        owner: u32,
        size: usize,
        remote: bool,
        slots: [Box<dyn DurableMedium>; 2],
        fence_group: EpochGroup,
        cost: CostModel,
    ) -> Self {
        let mut w = Self {
            target,
            owner,
            size,
            remote,
            slots,
            active_slot: None,
            generation: 0,
            sync: Sync::Idle,
            staging: vec![0; size],
            dirty: false,
            tag: 0,
            epochs: 0,
            fence_group,
            crash_after: None,
            down: false,
            clocks: BTreeMap::new(),
            cost,
            stats: WindowStats::default(),
        };
        w.reload();
        w
    }

    /// Window backed by two in-memory media.
    pub fn in_memory(target: usize, owner: u32, size: usize, remote: bool, fence_group: EpochGroup, cost: CostModel) -> Self {
        Self::new(
            target,
            owner,
            size,
            remote,
            [Box::new(MemMedium::default()), Box::new(MemMedium::default())],
            fence_group,
            cost,
        )
    }

    /// Window backed by `<dir>/<stem>.slot0` and `<dir>/<stem>.slot1`.
    #[allow(clippy::too_many_arguments)]
    pub fn with_files(
        dir: &Path,
        stem: &str,
        target: usize,
        owner: u32,
        size: usize,
        remote: bool,
        fence_group: EpochGroup,
        cost: CostModel,
    ) -> io::Result<Self> {
        let s0 = FileMedium::open(dir.join(format!("{stem}.slot0")))?;
        let s1 = FileMedium::open(dir.join(format!("{stem}.slot1")))?;
        Ok(Self::new(target, owner, size, remote, [Box::new(s0), Box::new(s1)], fence_group, cost))
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn active_slot(&self) -> Option<usize> {
        self.active_slot
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn epochs(&self) -> u64 {
        self.epochs
    }

    pub fn stats(&self) -> WindowStats {
        self.stats
    }

    pub fn is_down(&self) -> bool {
        self.down
    }

    pub fn epoch_state(&self) -> EpochState {
        match self.sync {
            Sync::Idle => EpochState::Idle,
            Sync::Exposed { .. } => EpochState::Exposed,
            Sync::Fence => EpochState::Fence,
        }
    }

    /// Size of one slot image on media.
    pub fn slot_bytes(&self) -> usize {
        HEADER_LEN + self.size
    }

    pub fn clock(&self, rank: usize) -> SimTime {
        self.clocks.get(&rank).copied().unwrap_or(0)
    }

    /// Advance `rank`'s clock to at least `t`.
    pub fn sync_clock(&mut self, rank: usize, t: SimTime) {
        let c = self.clocks.entry(rank).or_insert(0);
        *c = (*c).max(t);
    }

    fn charge(&mut self, rank: usize, dt: SimTime) -> SimTime {
        let c = self.clocks.entry(rank).or_insert(0);
        *c += dt;
        *c
    }

    fn check_up(&self) -> Result<()> {
        if self.down {
            Err(RmaError::TargetDown(self.target))
        } else {
            Ok(())
        }
    }

    fn in_access_epoch(&self, origin: usize) -> bool {
        match &self.sync {
            Sync::Exposed { open, .. } => open.contains(&origin),
            Sync::Fence => self.fence_group.contains(origin),
            Sync::Idle => false,
        }
    }

    fn check_range(&self, offset: usize, len: usize) -> Result<()> {
        if offset.checked_add(len).is_none_or(|e| e > self.size) {
            return Err(RmaError::Range { offset, len, size: self.size });
        }
        Ok(())
    }

    fn open_staging(&mut self) {
        self.staging = match self.read_committed() {
            Some(c) => c.payload,
            None => vec![0; self.size],
        };
        self.staging.resize(self.size, 0);
        self.dirty = false;
    }

    /// Start an exposure epoch for the origins in `group`; `tag` is the
    /// iteration recorded in the header of the slot this epoch commits.
    pub fn win_post(&mut self, group: &EpochGroup, tag: u64) -> Result<()> {
        self.check_up()?;
        if self.sync != Sync::Idle {
            return Err(RmaError::EpochViolation(
                "post while a previous epoch is still open".into(),
            ));
        }
        self.open_staging();
        self.tag = tag;
        let t = self.charge(self.target, self.cost.latency);
        self.sync = Sync::Exposed {
            group: group.clone(),
            open: BTreeSet::new(),
            completed: BTreeSet::new(),
            last_complete: t,
        };
        Ok(())
    }

    pub fn win_start(&mut self, origin: usize) -> Result<()> {
        self.check_up()?;
        let Sync::Exposed { group, open, completed, .. } = &mut self.sync else {
            return Err(RmaError::EpochViolation(format!(
                "start by rank {origin} without a matching post"
            )));
        };
        if !group.contains(origin) {
            return Err(RmaError::EpochViolation(format!(
                "rank {origin} is not in the posted group"
            )));
        }
        if open.contains(&origin) {
            return Err(RmaError::EpochViolation(format!(
                "rank {origin} already has an open access epoch"
            )));
        }
        completed.remove(&origin);
        open.insert(origin);
        self.charge(origin, self.cost.latency);
        Ok(())
    }

    pub fn put_pmem(&mut self, origin: usize, offset: usize, data: &[u8]) -> Result<()> {
        self.put_pmem_partial(origin, offset, data, data.len())
    }

    /// Put that transfers only the first `cut` bytes before the origin dies.
    /// Used by fault injection; the epoch is expected to be aborted after.
    pub fn put_pmem_partial(&mut self, origin: usize, offset: usize, data: &[u8], cut: usize) -> Result<()> {
        self.check_up()?;
        if !self.in_access_epoch(origin) {
            return Err(RmaError::EpochViolation(format!(
                "put by rank {origin} outside an access epoch"
            )));
        }
        self.check_range(offset, data.len())?;
        let n = cut.min(data.len());
        self.staging[offset..offset + n].copy_from_slice(&data[..n]);
        self.dirty = true;
        self.stats.bytes_put += n as u64;
        let wire = if self.remote { self.cost.wire_per_byte } else { 0 };
        self.charge(origin, self.cost.latency + wire * n as u64);
        Ok(())
    }

    /// Read from the last durable commit (zeros if none).
    pub fn get_pmem(&mut self, origin: usize, offset: usize, len: usize) -> Result<Vec<u8>> {
        self.check_up()?;
        if !self.in_access_epoch(origin) {
            return Err(RmaError::EpochViolation(format!(
                "get by rank {origin} outside an access epoch"
            )));
        }
        self.check_range(offset, len)?;
        let mut payload = self.read_committed().map(|c| c.payload).unwrap_or_default();
        payload.resize(self.size, 0);
        self.stats.bytes_got += len as u64;
        let wire = if self.remote { self.cost.wire_per_byte } else { 0 };
        self.charge(origin, self.cost.latency + wire * len as u64);
        Ok(payload[offset..offset + len].to_vec())
    }

    /// End the access epoch of `origin`. Returns the origin's clock, which
    /// does not include any of the target's persist time.
    pub fn win_complete(&mut self, origin: usize) -> Result<SimTime> {
        self.check_up()?;
        let t = self.clock(origin) + self.cost.latency;
        let Sync::Exposed { open, completed, last_complete, .. } = &mut self.sync else {
            return Err(RmaError::EpochViolation(format!(
                "complete by rank {origin} outside an access epoch"
            )));
        };
        if !open.remove(&origin) {
            return Err(RmaError::EpochViolation(format!(
                "complete by rank {origin} without start"
            )));
        }
        completed.insert(origin);
        *last_complete = (*last_complete).max(t);
        self.sync_clock(origin, t);
        Ok(t)
    }

    /// Close the exposure epoch: wait for every member's access epoch, then
    /// commit the staging buffer durably and flip the active slot. Returns
    /// the target clock at which the data is durable.
    pub fn win_wait_persist(&mut self) -> Result<SimTime> {
        self.check_up()?;
        let Sync::Exposed { group, open, completed, last_complete } = &self.sync else {
            return Err(RmaError::EpochViolation("wait without a posted exposure epoch".into()));
        };
        let missing: Vec<usize> = group
            .members()
            .iter()
            .copied()
            .filter(|r| open.contains(r) || !completed.contains(r))
            .collect();
        if !missing.is_empty() {
            return Err(RmaError::Deadlock { missing });
        }
        let ready = *last_complete;
        self.sync_clock(self.target, ready);
        self.commit()?;
        self.sync = Sync::Idle;
        Ok(self.clock(self.target))
    }

    /// Drop an exposure epoch without committing, e.g. after an origin died
    /// mid-transfer. The previous durable commit stays active.
    pub fn abort_epoch(&mut self) {
        self.sync = Sync::Idle;
        self.staging = vec![0; self.size];
        self.dirty = false;
    }

    /// Collective fence over the window's fence group. Commits the staged
    /// data of the epoch it closes if anything was put, and opens the next
    /// epoch unless `last` is set.
    pub fn win_fence_persist(&mut self, callers: &BTreeSet<usize>, tag: u64, last: bool) -> Result<()> {
        self.check_up()?;
        let expected = self.fence_group.members();
        if callers != expected {
            return Err(RmaError::CollectiveMismatch {
                missing: expected.difference(callers).copied().collect(),
                unexpected: callers.difference(expected).copied().collect(),
            });
        }
        match self.sync {
            Sync::Exposed { .. } => {
                return Err(RmaError::EpochViolation("fence inside a PSCW epoch".into()))
            }
            Sync::Fence => {
                let barrier = callers.iter().map(|&r| self.clock(r)).max().unwrap_or(0)
                    + self.cost.latency;
                for &r in callers {
                    self.sync_clock(r, barrier);
                }
                if self.dirty {
                    self.commit()?;
                    let done = self.clock(self.target);
                    for &r in callers {
                        self.sync_clock(r, done);
                    }
                }
            }
            Sync::Idle => {}
        }
        self.epochs += 1;
        if last {
            self.sync = Sync::Idle;
        } else {
            self.open_staging();
            self.tag = tag;
            self.sync = Sync::Fence;
        }
        Ok(())
    }

    pub fn win_lock(&mut self, _origin: usize) -> Result<()> {
        Err(RmaError::Unsupported("passive-target lock"))
    }

    pub fn win_unlock(&mut self, _origin: usize) -> Result<()> {
        Err(RmaError::Unsupported("passive-target unlock"))
    }

    /// Cut the next durable write sequence after `bytes` bytes; the target
    /// goes down at that point.
    pub fn arm_crash_after(&mut self, bytes: usize) {
        self.crash_after = Some(bytes);
    }

    /// Bytes in one commit's durable write sequence (payload then header).
    pub fn commit_sequence_len(&self) -> usize {
        self.size + HEADER_LEN
    }

    fn commit(&mut self) -> Result<()> {
        let slot = match self.active_slot {
            Some(s) => 1 - s,
            None => 0,
        };
        let generation = self.generation + 1;
        let header = slot::seal(self.tag, self.owner, generation, &self.staging).encode();
        let writes: [(usize, &[u8]); 2] = [(HEADER_LEN, &self.staging), (0, &header)];
        let mut budget = self.crash_after.take();
        let mut written = 0;
        for (offset, data) in writes {
            let n = budget.map_or(data.len(), |b| b.min(data.len()));
            self.slots[slot].write_at(offset, &data[..n])?;
            self.stats.durable_bytes_written += n as u64;
            written += n;
            if let Some(b) = budget.as_mut() {
                *b -= n;
                if n < data.len() {
                    self.down = true;
                    self.sync = Sync::Idle;
                    return Err(RmaError::Crashed { written });
                }
            }
            self.slots[slot].flush()?;
        }
        self.charge(self.target, self.cost.nvm_per_byte * written as u64);
        self.active_slot = Some(slot);
        self.generation = generation;
        self.stats.commits += 1;
        self.epochs += 1;
        Ok(())
    }

    fn reload(&mut self) {
        let newest = self.valid_slots().into_iter().max_by_key(|c| c.header.generation);
        self.active_slot = newest.as_ref().map(|c| c.slot);
        self.generation = newest.map_or(0, |c| c.header.generation);
    }

    /// Bring the target back after a crash: volatile state is discarded and
    /// the active slot is re-derived from media.
    pub fn recover(&mut self) {
        self.down = false;
        self.sync = Sync::Idle;
        self.staging = vec![0; self.size];
        self.dirty = false;
        self.crash_after = None;
        self.reload();
    }

    /// Fail-stop of the target: volatile epoch state is lost and the window
    /// is unreachable until [`Window::recover`].
    pub fn crash(&mut self) {
        self.down = true;
        self.sync = Sync::Idle;
        self.dirty = false;
    }

    /// Destroy every committed slot whose iteration is newer than `j` by
    /// zeroing its header, so a later recovery can never select it.
    /// Returns the number of slots invalidated.
    pub fn invalidate_after(&mut self, j: u64) -> Result<usize> {
        let stale: Vec<usize> = self
            .valid_slots()
            .into_iter()
            .filter(|c| c.header.iteration > j)
            .map(|c| c.slot)
            .collect();
        for &s in &stale {
            self.slots[s].write_at(0, &[0u8; HEADER_LEN])?;
            self.slots[s].flush()?;
        }
        if !stale.is_empty() {
            let gen = self.generation;
            self.reload();
            // keep generations monotone across the invalidation
            self.generation = self.generation.max(gen);
        }
        Ok(stale.len())
    }

    /// Bytes currently occupied on durable media (both slots).
    pub fn media_bytes(&self) -> usize {
        (0..2).map(|s| self.slots[s].read_all().map_or(0, |b| b.len())).sum()
    }

    /// Every slot whose image validates, in slot order.
    pub fn valid_slots(&self) -> Vec<CommittedSlot> {
        (0..2)
            .filter_map(|s| {
                let img = self.slots[s].read_all().ok()?;
                let (header, payload) = slot::decode_slot(&img).ok()?;
                (header.owner == self.owner).then(|| CommittedSlot {
                    slot: s,
                    header,
                    payload: payload.to_vec(),
                })
            })
            .collect()
    }

    /// The newest validated slot.
    pub fn read_committed(&self) -> Option<CommittedSlot> {
        self.valid_slots().into_iter().max_by_key(|c| c.header.generation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(size: usize) -> Window {
        Window::in_memory(9, 0, size, true, EpochGroup::new([0, 1, 2, 9]).unwrap(), CostModel::default())
    }

    fn g(ranks: &[usize]) -> EpochGroup {
        EpochGroup::new(ranks.iter().copied()).unwrap()
    }

    #[test]
    fn pscw_commit_flips_slot() {
        let mut w = window(8);
        w.win_post(&g(&[1, 2]), 1).unwrap();
        for r in [1, 2] {
            w.win_start(r).unwrap();
            w.put_pmem(r, (r - 1) * 4, &[r as u8; 4]).unwrap();
            w.win_complete(r).unwrap();
        }
        assert_eq!(w.active_slot(), None);
        w.win_wait_persist().unwrap();
        assert_eq!(w.active_slot(), Some(0));
        w.win_post(&g(&[1]), 2).unwrap();
        w.win_start(1).unwrap();
        w.win_complete(1).unwrap();
        w.win_wait_persist().unwrap();
        assert_eq!(w.active_slot(), Some(1));
        let c = w.read_committed().unwrap();
        assert_eq!(c.payload, vec![1, 1, 1, 1, 2, 2, 2, 2]);
        assert_eq!((c.header.iteration, c.header.generation), (2, 2));
    }

    #[test]
    fn empty_epoch_commits_valid_record() {
        let mut w = window(16);
        w.win_post(&g(&[1]), 5).unwrap();
        w.win_start(1).unwrap();
        w.win_complete(1).unwrap();
        w.win_wait_persist().unwrap();
        let c = w.read_committed().unwrap();
        assert_eq!(c.payload, vec![0; 16]);
        assert_eq!(c.header.iteration, 5);
    }

    #[test]
    fn fresh_window_reads_zeros() {
        let mut w = window(8);
        w.win_post(&g(&[1]), 0).unwrap();
        w.win_start(1).unwrap();
        assert_eq!(w.get_pmem(1, 2, 4).unwrap(), vec![0; 4]);
    }

    #[test]
    fn misuse_is_rejected() {
        let mut w = window(8);
        assert!(matches!(w.put_pmem(1, 0, &[1]), Err(RmaError::EpochViolation(_))));
        assert!(matches!(w.win_start(1), Err(RmaError::EpochViolation(_))));
        assert!(matches!(w.win_wait_persist(), Err(RmaError::EpochViolation(_))));
        w.win_post(&g(&[1]), 0).unwrap();
        assert!(matches!(w.win_post(&g(&[1]), 0), Err(RmaError::EpochViolation(_))));
        assert!(matches!(w.win_start(2), Err(RmaError::EpochViolation(_))));
        w.win_start(1).unwrap();
        assert!(matches!(w.win_start(1), Err(RmaError::EpochViolation(_))));
        assert!(matches!(w.put_pmem(1, 6, &[0; 4]), Err(RmaError::Range { .. })));
        assert!(matches!(w.win_wait_persist(), Err(RmaError::Deadlock { .. })));
        assert!(matches!(w.win_lock(1), Err(RmaError::Unsupported(_))));
        assert!(matches!(w.win_unlock(1), Err(RmaError::Unsupported(_))));
    }

    #[test]
    fn fence_requires_every_member() {
        let mut w = window(4);
        let partial: BTreeSet<usize> = [0, 1, 9].into_iter().collect();
        assert!(matches!(
            w.win_fence_persist(&partial, 0, false),
            Err(RmaError::CollectiveMismatch { ref missing, .. }) if missing == &vec![2]
        ));
    }

    #[test]
    fn fence_without_puts_keeps_content() {
        let mut w = window(4);
        let all: BTreeSet<usize> = [0, 1, 2, 9].into_iter().collect();
        w.win_fence_persist(&all, 1, false).unwrap();
        w.put_pmem(1, 0, &[7; 4]).unwrap();
        w.win_fence_persist(&all, 2, false).unwrap();
        let before = (w.read_committed(), w.epochs());
        w.win_fence_persist(&all, 3, true).unwrap();
        assert_eq!(w.read_committed(), before.0);
        assert_eq!(w.epochs(), before.1 + 1);
    }

    #[test]
    fn crash_mid_commit_keeps_previous_slot() {
        let mut w = window(8);
        for (tag, byte) in [(1, 0x11u8), (2, 0x22)] {
            w.win_post(&g(&[1]), tag).unwrap();
            w.win_start(1).unwrap();
            w.put_pmem(1, 0, &[byte; 8]).unwrap();
            w.win_complete(1).unwrap();
            if tag == 2 {
                w.arm_crash_after(5);
                assert_eq!(w.win_wait_persist(), Err(RmaError::Crashed { written: 5 }));
            } else {
                w.win_wait_persist().unwrap();
            }
        }
        assert!(w.is_down());
        assert!(matches!(w.win_post(&g(&[1]), 3), Err(RmaError::TargetDown(9))));
        w.recover();
        let c = w.read_committed().unwrap();
        assert_eq!((c.header.iteration, c.payload), (1, vec![0x11; 8]));
    }

    #[test]
    fn origin_complete_precedes_durability() {
        let mut w = window(4096);
        w.win_post(&g(&[1]), 1).unwrap();
        w.win_start(1).unwrap();
        w.put_pmem(1, 0, &[3; 4096]).unwrap();
        let done_origin = w.win_complete(1).unwrap();
        let durable = w.win_wait_persist().unwrap();
        assert!(done_origin < durable);
        assert_eq!(w.clock(1), done_origin);
    }

    #[test]
    fn file_backed_window_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut w = Window::with_files(dir.path(), "w", 9, 3, 8, true, g(&[1, 9]), CostModel::default()).unwrap();
            w.win_post(&g(&[1]), 4).unwrap();
            w.win_start(1).unwrap();
            w.put_pmem(1, 0, b"abcdefgh").unwrap();
            w.win_complete(1).unwrap();
            w.win_wait_persist().unwrap();
        }
        let w = Window::with_files(dir.path(), "w", 9, 3, 8, true, g(&[1, 9]), CostModel::default()).unwrap();
        assert_eq!(w.active_slot(), Some(0));
        assert_eq!(w.read_committed().unwrap().payload, b"abcdefgh");
        let raw = std::fs::read(dir.path().join("w.slot0")).unwrap();
        assert_eq!(&raw[..4], b"ESRW");
    }
}
