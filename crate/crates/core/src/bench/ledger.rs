//! Closed-form memory and traffic accounting.
//!
//! Values are counted as 8-byte reals. Per-persistence-iteration figures
//! are half of what one committed record round moves, since a record
//! carries the two successive iterations of a persistence pair.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::esr::{Placement, RecoveryRecord};
use crate::pcg::{DistributedProblem, RecoveryMode};
use crate::slot::HEADER_LEN;

/// What accounting needs to know about a problem: its size, layout and the
/// halo overlap between ranks (entries a holder already receives).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemShape {
    pub n: usize,
    pub proc: usize,
    pub nnz: usize,
    pub slice_lens: Vec<usize>,
    /// Nonzero halo overlaps keyed by `(owner, holder)`; empty when the
    /// structure is unknown.
    pub overlap: BTreeMap<(usize, usize), usize>,
}

impl ProblemShape {
    pub fn of(problem: &DistributedProblem) -> Self {
        let proc = problem.proc();
        Self {
            n: problem.n(),
            proc,
            nnz: problem.a.nnz(),
            slice_lens: (0..proc).map(|s| problem.partition.len_of(s)).collect(),
            overlap: (0..proc)
                .flat_map(|o| (0..proc).map(move |h| (o, h)))
                .map(|(o, h)| ((o, h), problem.halo.overlap(o, h)))
                .filter(|&(_, v)| v > 0)
                .collect(),
        }
    }

    /// Shape from sizes only: balanced split, `s` nonzeros per row, no halo
    /// overlap assumed.
    pub fn structure_free(n: usize, proc: usize, s: usize) -> Self {
        let proc = proc.max(1);
        Self {
            n,
            proc,
            nnz: n.saturating_mul(s),
            slice_lens: (0..proc).map(|r| n / proc + usize::from(r < n % proc)).collect(),
            overlap: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverheadLedger {
    pub mode: RecoveryMode,
    pub n: u64,
    pub proc: u64,
    pub c: u64,
    pub nnz: u64,
    /// `M_PCG`: matrix values plus `x, r, z, p` on every rank.
    pub ram_compute_values: u64,
    /// `M_R`: peer-RAM redundancy resident after a persistence pair.
    pub ram_redundancy_values: u64,
    /// Survivor rollback snapshots `{x, r}`, two generations.
    pub ram_rollback_values: u64,
    /// Values persisted per persistence iteration, one copy.
    pub nvm_values_per_persist: u64,
    /// Values resident on durable media for the newest pair.
    pub nvm_resident_values: u64,
    /// Physical durable bytes: headers and both alternating slots.
    pub nvm_reserved_bytes: u64,
    pub nvm_written_bytes_per_persist: u64,
    pub wire_bytes_per_persist: u64,
}

impl OverheadLedger {
    /// Average nonzeros per row.
    pub fn sparsity(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.nnz as f64 / self.n as f64
        }
    }

    pub fn ram_compute_bytes(&self) -> u64 {
        8 * self.ram_compute_values
    }

    pub fn ram_redundancy_bytes(&self) -> u64 {
        8 * self.ram_redundancy_values
    }

    pub fn ram_rollback_bytes(&self) -> u64 {
        8 * self.ram_rollback_values
    }

    pub fn nvm_bytes_per_persist(&self) -> u64 {
        8 * self.nvm_values_per_persist
    }
}

/// Ledger of a configuration without running it.
pub fn account(mode: RecoveryMode, c: usize, shape: &ProblemShape) -> OverheadLedger {
    let n = shape.n as u64;
    let proc = shape.proc as u64;
    let h = HEADER_LEN as u64;
    let record = |m: usize| RecoveryRecord::payload_len(m) as u64;
    let payload_total: u64 = shape.slice_lens.iter().map(|&m| record(m)).sum();
    let durable = mode.is_durable();

    let ram_redundancy_values = if mode == RecoveryMode::EsrInmem { 2 * n * (c as u64 + 1) } else { 0 };
    let wire_pair: u64 = match mode {
        RecoveryMode::None | RecoveryMode::NvmLocal => 0,
        RecoveryMode::EsrInmem => match Placement::new(shape.proc, c) {
            Ok(pl) => {
                // every (owner, holder) message: both p-slices minus what the halo carries, plus β
                let k = pl.external_count() as u64;
                let full: u64 = shape.slice_lens.iter().map(|&m| k * (16 * m as u64 + 8)).sum();
                let saved: u64 = shape
                    .overlap
                    .iter()
                    .filter(|(&(o, h), _)| pl.is_external_holder(o, h))
                    .map(|(_, &v)| 16 * v as u64)
                    .sum();
                full - saved
            }
            Err(_) => 0,
        },
        RecoveryMode::NvmPrd => payload_total,
    };
    let (written_pair, reserved) = match mode {
        RecoveryMode::NvmLocal => (proc * h + payload_total, 2 * (proc * h + payload_total)),
        RecoveryMode::NvmPrd => (h + payload_total, 2 * (h + payload_total)),
        _ => (0, 0),
    };
    OverheadLedger {
        mode,
        n,
        proc,
        c: c as u64,
        nnz: shape.nnz as u64,
        ram_compute_values: shape.nnz as u64 + 4 * n,
        ram_redundancy_values,
        ram_rollback_values: if mode == RecoveryMode::None { 0 } else { 4 * n },
        nvm_values_per_persist: if durable { n } else { 0 },
        nvm_resident_values: if durable { 2 * n } else { 0 },
        nvm_reserved_bytes: reserved,
        nvm_written_bytes_per_persist: written_pair / 2,
        wire_bytes_per_persist: wire_pair / 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_ft_in_memory_is_two_proc_n() {
        let l = account(RecoveryMode::EsrInmem, 3, &ProblemShape::structure_free(400, 4, 7));
        assert_eq!(l.ram_redundancy_values, 3200);
        assert_eq!(l.ram_redundancy_values, 2 * 4 * 400);
        assert_eq!(l.nvm_reserved_bytes, 0);
    }

    #[test]
    fn nvm_persists_one_global_vector_per_iteration() {
        let n = 320_000_000;
        for mode in [RecoveryMode::NvmLocal, RecoveryMode::NvmPrd] {
            let l = account(mode, 1, &ProblemShape::structure_free(n, 1000, 7));
            assert_eq!(l.nvm_values_per_persist, n as u64);
            assert_eq!(l.nvm_bytes_per_persist(), 2_560_000_000);
            assert_eq!(l.ram_redundancy_values, 0);
        }
    }

    #[test]
    fn no_recovery_has_no_overhead() {
        let l = account(RecoveryMode::None, 0, &ProblemShape::structure_free(1000, 4, 7));
        assert_eq!(l.ram_redundancy_values + l.ram_rollback_values + l.nvm_reserved_bytes + l.wire_bytes_per_persist, 0);
        assert_eq!(l.ram_compute_values, 7000 + 4000);
        assert_eq!(l.sparsity(), 7.0);
    }

    #[test]
    fn prd_wire_is_independent_of_c() {
        let shape = ProblemShape::structure_free(1000, 4, 7);
        let a = account(RecoveryMode::NvmPrd, 0, &shape);
        let b = account(RecoveryMode::NvmPrd, 3, &shape);
        assert_eq!(a.wire_bytes_per_persist, b.wire_bytes_per_persist);
        assert_eq!(a.wire_bytes_per_persist, 1000 * 8 + 4 * 4);
    }
}
