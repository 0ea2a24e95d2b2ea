//! Redundancy placement, recovery records and exact state reconstruction.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::exec::Execution;
use crate::linalg::{self, BandCholesky, CsrMatrix, LinalgError, Preconditioner};
use crate::pcg::DistributedProblem;
use crate::slot::{self, SlotError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EsrError {
    #[error("record of rank {owner} is from iteration {got}, expected {expected}")]
    Stale { owner: usize, expected: u64, got: u64 },
    #[error("record of rank {owner} failed validation: {source}")]
    Corrupt { owner: usize, source: SlotError },
    #[error("{failed} simultaneous failures exceed the tolerance c = {c}")]
    Unrecoverable { failed: usize, c: usize },
    #[error("no recovery record for rank {0}")]
    Missing(usize),
    #[error("placement error: {0}")]
    Placement(String),
    #[error("survivor state of rank {0} was not gathered")]
    MissingSurvivor(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, EsrError>;

/// The minimal recovery data of one rank: two successive `p` slices and the
/// `β` linking them.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryRecord {
    pub owner: usize,
    /// Iteration of `p_curr`.
    pub j: u64,
    /// `β^(j-1)`.
    pub beta_prev: f64,
    pub p_prev: Vec<f64>,
    pub p_curr: Vec<f64>,
    pub checksum: u64,
}

impl RecoveryRecord {
    pub fn new(owner: usize, j: u64, beta_prev: f64, p_prev: Vec<f64>, p_curr: Vec<f64>) -> Self {
        assert_eq!(p_prev.len(), p_curr.len(), "p slices of one record must have equal length");
        let mut rec = Self { owner, j, beta_prev, p_prev, p_curr, checksum: 0 };
        rec.checksum = rec.compute_checksum();
        rec
    }

    /// Payload bytes for a slice of `m` entries.
    pub fn payload_len(m: usize) -> usize {
        8 + 16 * m
    }

    pub fn len(&self) -> usize {
        self.p_curr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_curr.is_empty()
    }

    /// `β | p_prev | p_curr`, little-endian f64.
    pub fn payload(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::payload_len(self.len()));
        out.extend_from_slice(&self.beta_prev.to_le_bytes());
        for v in self.p_prev.iter().chain(&self.p_curr) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    fn compute_checksum(&self) -> u64 {
        slot::seal(self.j, self.owner as u32, 0, &self.payload()).checksum
    }

    pub fn verify(&self) -> bool {
        self.p_prev.len() == self.p_curr.len() && self.checksum == self.compute_checksum()
    }

    /// Standalone image in the slot format (generation 0).
    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = self.payload();
        let header = slot::SlotHeader {
            iteration: self.j,
            owner: self.owner as u32,
            payload_len: payload.len() as u64,
            generation: 0,
            checksum: self.checksum,
        };
        let mut out = header.encode().to_vec();
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, SlotError> {
        let (h, payload) = slot::decode_slot(bytes)?;
        let rec = Self::from_payload(h.owner as usize, h.iteration, payload)
            .ok_or(SlotError::Truncated(bytes.len()))?;
        Ok(Self { checksum: h.checksum, ..rec })
    }

    /// Parse a payload written by [`RecoveryRecord::payload`].
    pub fn from_payload(owner: usize, j: u64, payload: &[u8]) -> Option<Self> {
        if payload.len() < 8 || !(payload.len() - 8).is_multiple_of(16) {
            return None;
        }
        let m = (payload.len() - 8) / 16;
        let f = |k: usize| f64::from_le_bytes(payload[8 * k..8 * k + 8].try_into().unwrap());
        Some(Self::new(
            owner,
            j,
            f(0),
            (1..=m).map(f).collect(),
            (m + 1..=2 * m).map(f).collect(),
        ))
    }
}

/// Which ranks hold the redundancy copies of each owner.
///
/// Owner `s` is held by the next `min(c+1, proc-1)` ranks after it; when
/// that is fewer than `c+1` (full tolerance, `c = proc-1`) the owner keeps
/// a copy in its own memory too, so there are always `c+1` resident copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    proc: usize,
    c: usize,
}

impl Placement {
    pub fn new(proc: usize, c: usize) -> Result<Self> {
        if proc == 0 || c >= proc {
            return Err(EsrError::Placement(format!("c = {c} needs at least c+1 ranks, have {proc}")));
        }
        Ok(Self { proc, c })
    }

    pub fn proc(&self) -> usize {
        self.proc
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn copies(&self) -> usize {
        self.c + 1
    }

    /// Ranks other than `owner` holding a copy.
    pub fn external_holders(&self, owner: usize) -> Vec<usize> {
        (1..=self.external_count()).map(|d| (owner + d) % self.proc).collect()
    }

    pub fn external_count(&self) -> usize {
        (self.c + 1).min(self.proc - 1)
    }

    /// Whether `holder` is one of `owner`'s external holders.
    pub fn is_external_holder(&self, owner: usize, holder: usize) -> bool {
        let d = (holder + self.proc - owner % self.proc) % self.proc;
        d >= 1 && d <= self.external_count()
    }

    pub fn keeps_self_copy(&self) -> bool {
        self.c + 1 > self.proc - 1
    }

    /// Every rank whose memory holds a copy of `owner`'s record.
    pub fn resident_at(&self, owner: usize) -> Vec<usize> {
        let mut h = self.external_holders(owner);
        if self.keeps_self_copy() {
            h.push(owner);
        }
        h
    }
}

/// Peer-RAM redundancy: per holder, the newest record of every owner it
/// holds. One record carries two successive iterations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RedundancyStore {
    held: Vec<BTreeMap<usize, RecoveryRecord>>,
}

impl RedundancyStore {
    pub fn new(proc: usize) -> Self {
        Self { held: vec![BTreeMap::new(); proc] }
    }

    pub fn deliver(&mut self, holder: usize, record: RecoveryRecord) {
        self.held[holder].insert(record.owner, record);
    }

    pub fn get(&self, holder: usize, owner: usize) -> Option<&RecoveryRecord> {
        self.held[holder].get(&owner)
    }

    /// Volatile memory of `holder` is lost.
    pub fn wipe(&mut self, holder: usize) {
        self.held[holder].clear();
    }

    /// Values resident at `holder` (two p slices per record).
    pub fn values_at(&self, holder: usize) -> usize {
        self.held[holder].values().map(|r| 2 * r.len()).sum()
    }

    pub fn total_values(&self) -> usize {
        (0..self.held.len()).map(|h| self.values_at(h)).sum()
    }

    /// Ranks currently holding a record of `owner`.
    pub fn holders_of(&self, owner: usize) -> Vec<usize> {
        (0..self.held.len()).filter(|&h| self.held[h].contains_key(&owner)).collect()
    }
}

/// One owner-to-holder redundancy transfer piggybacked on the SpMV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RedundancyMessage {
    pub owner: usize,
    pub holder: usize,
    /// Entries stored at the holder.
    pub stored: usize,
    /// Entries actually sent in addition to the halo exchange.
    pub extra_on_wire: usize,
}

/// Augmented SpMV: the plain distributed `A·p` plus the redundancy traffic
/// that ships every owner's `p` slice to its holders. Entries a holder
/// already receives through the halo are not sent twice but are stored.
pub fn aspmv(
    problem: &DistributedProblem,
    exec: Execution,
    p: &[Vec<f64>],
    placement: &Placement,
    dead: &BTreeSet<usize>,
) -> Result<(Vec<Vec<f64>>, Vec<RedundancyMessage>)> {
    if placement.proc() != problem.proc() {
        return Err(EsrError::Placement(format!(
            "placement for {} ranks used with {} ranks",
            placement.proc(),
            problem.proc()
        )));
    }
    let mut msgs = Vec::new();
    for owner in 0..problem.proc() {
        for holder in placement.external_holders(owner) {
            if dead.contains(&holder) {
                return Err(EsrError::Placement(format!("holder {holder} of rank {owner} is dead")));
            }
            let m = problem.partition.len_of(owner);
            msgs.push(RedundancyMessage {
                owner,
                holder,
                stored: m,
                extra_on_wire: m - problem.halo.overlap(owner, holder),
            });
        }
    }
    Ok((problem.local_spmv(exec, p), msgs))
}

/// Reconstructed state of the failed ranks, keyed by rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedSlice {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    pub p_prev: Vec<f64>,
    pub beta_prev: f64,
}

fn diag_of(p: &Preconditioner, i: usize) -> f64 {
    match p {
        Preconditioner::Identity { .. } => 1.0,
        Preconditioner::Jacobi { diag_inverse } => diag_inverse[i],
    }
}

/// Exact state reconstruction of the failed block `I_f` at the iteration
/// of the records.
///
/// `x` and `r` hold the survivors' slices (`None` for failed ranks).
/// With `z_F = p_F − β p_prev_F`, the residual follows from
/// `P_FF r_F = z_F − P_{F,rest} r_rest` and the iterate from
/// `A_FF x_F = b_F − r_F − A_{F,rest} x_rest`.
pub fn reconstruct(
    problem: &DistributedProblem,
    failed: &BTreeSet<usize>,
    x: &[Option<Vec<f64>>],
    r: &[Option<Vec<f64>>],
    records: &BTreeMap<usize, RecoveryRecord>,
    c: usize,
) -> Result<BTreeMap<usize, ReconstructedSlice>> {
    if failed.len() > c {
        return Err(EsrError::Unrecoverable { failed: failed.len(), c });
    }
    if failed.is_empty() {
        return Ok(BTreeMap::new());
    }
    let part = &problem.partition;
    let mut j = None;
    for &f in failed {
        let rec = records.get(&f).ok_or(EsrError::Missing(f))?;
        if !rec.verify() || rec.owner != f || rec.len() != part.len_of(f) {
            let computed = rec.compute_checksum();
            return Err(EsrError::Corrupt {
                owner: f,
                source: SlotError::Checksum { stored: rec.checksum, computed },
            });
        }
        match j {
            None => j = Some(rec.j),
            Some(j0) if j0 != rec.j => return Err(EsrError::Stale { owner: f, expected: j0, got: rec.j }),
            _ => {}
        }
    }
    let survivors: Vec<usize> = (0..problem.proc()).filter(|s| !failed.contains(s)).collect();
    let gather = |v: &[Option<Vec<f64>>]| -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for &s in &survivors {
            out.extend_from_slice(v[s].as_ref().ok_or(EsrError::MissingSurvivor(s))?);
        }
        Ok(out)
    };
    let x_rest = gather(x)?;
    let r_rest = gather(r)?;
    let rest_idx: Vec<usize> = survivors.iter().flat_map(|&s| part.range(s)).collect();
    let f_idx: Vec<usize> = failed.iter().flat_map(|&f| part.range(f)).collect();

    // z_F from the p recurrence
    let z_f: Vec<f64> = failed
        .iter()
        .flat_map(|f| {
            let rec = &records[f];
            rec.p_curr.iter().zip(&rec.p_prev).map(move |(p, pp)| p - rec.beta_prev * pp)
        })
        .collect();

    // r_F from P_FF r_F = z_F − P_{F,rest} r_rest; both preconditioners in
    // use are diagonal, so P_FF is solved by division
    let p_csr = problem.precond.to_csr();
    let p_blocks = failed
        .iter()
        .map(|&f| p_csr.submatrix(part.range(f), &rest_idx))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let p_coupling = linalg::spmv(&CsrMatrix::vstack(&p_blocks)?, &r_rest)?;
    let r_f: Vec<f64> = z_f
        .iter()
        .zip(&p_coupling)
        .zip(&f_idx)
        .map(|((z, q), &i)| (z - q) / diag_of(&problem.precond, i))
        .collect();

    // x_F
    let rows_of = |cols: &[usize]| -> Result<CsrMatrix> {
        let blocks = failed
            .iter()
            .map(|&f| problem.a.submatrix(part.range(f), cols))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(CsrMatrix::vstack(&blocks)?)
    };
    let a_f_rest = rows_of(&rest_idx)?;
    let a_ff = rows_of(&f_idx)?;
    let coupling = linalg::spmv(&a_f_rest, &x_rest)?;
    let w: Vec<f64> = f_idx
        .iter()
        .zip(&r_f)
        .zip(&coupling)
        .map(|((&i, r), q)| problem.b[i] - r - q)
        .collect();
    let x_f = BandCholesky::from_csr(&a_ff)?.solve(&w)?;

    let mut out = BTreeMap::new();
    let mut off = 0;
    for &f in failed {
        let m = part.len_of(f);
        let rec = &records[&f];
        out.insert(
            f,
            ReconstructedSlice {
                x: x_f[off..off + m].to_vec(),
                r: r_f[off..off + m].to_vec(),
                z: z_f[off..off + m].to_vec(),
                p: rec.p_curr.clone(),
                p_prev: rec.p_prev.clone(),
                beta_prev: rec.beta_prev,
            },
        );
        off += m;
    }
    Ok(out)
}
