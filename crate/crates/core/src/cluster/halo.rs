//! Halo exchange: which remote vector entries each rank's rows reference.

use std::collections::BTreeMap;

use crate::linalg::{CsrMatrix, LinalgError, Partition};

/// Receive lists per rank, peers in ascending order, indices ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaloPlan {
    recv: Vec<Vec<(usize, Vec<usize>)>>,
}

/// One point-to-point halo message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaloMessage {
    pub from: usize,
    pub to: usize,
    pub values: usize,
}

impl HaloPlan {
    pub fn build(a: &CsrMatrix, part: &Partition) -> Result<Self, LinalgError> {
        if a.n_rows() != part.n() || a.n_cols() != part.n() {
            return Err(LinalgError::Shape { expected: part.n(), got: a.n_rows() });
        }
        let recv = part
            .blocks()
            .enumerate()
            .map(|(s, rows)| {
                let mut by_peer: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                let mut seen = vec![false; a.n_cols()];
                for i in rows.clone() {
                    for &j in a.row(i).0 {
                        if !rows.contains(&j) && !seen[j] {
                            seen[j] = true;
                            by_peer.entry(part.owner_of(j)).or_default().push(j);
                        }
                    }
                }
                debug_assert!(!by_peer.contains_key(&s));
                by_peer
                    .into_iter()
                    .map(|(peer, mut idx)| {
                        idx.sort_unstable();
                        (peer, idx)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { recv })
    }

    pub fn proc(&self) -> usize {
        self.recv.len()
    }

    /// `(peer, global indices)` received by `rank`.
    pub fn recv_lists(&self, rank: usize) -> &[(usize, Vec<usize>)] {
        &self.recv[rank]
    }

    /// Global indices received by `rank`, ascending.
    pub fn ghosts(&self, rank: usize) -> Vec<usize> {
        self.recv[rank].iter().flat_map(|(_, idx)| idx.iter().copied()).collect()
    }

    /// Entries of `owner` that `holder` receives in every exchange.
    pub fn overlap(&self, owner: usize, holder: usize) -> usize {
        self.recv[holder]
            .iter()
            .find(|(p, _)| *p == owner)
            .map_or(0, |(_, idx)| idx.len())
    }

    /// Messages in deterministic order: by receiver, then sender.
    pub fn messages(&self) -> Vec<HaloMessage> {
        self.recv
            .iter()
            .enumerate()
            .flat_map(|(to, lists)| {
                lists.iter().map(move |(from, idx)| HaloMessage { from: *from, to, values: idx.len() })
            })
            .collect()
    }

    pub fn total_values(&self) -> usize {
        self.recv.iter().flatten().map(|(_, idx)| idx.len()).sum()
    }

    /// Ghost values of every rank gathered from the owners' slices.
    pub fn exchange(&self, part: &Partition, slices: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.recv
            .iter()
            .map(|lists| {
                lists
                    .iter()
                    .flat_map(|(peer, idx)| {
                        let base = part.range(*peer).start;
                        idx.iter().map(move |&g| slices[*peer][g - base])
                    })
                    .collect()
            })
            .collect()
    }
}
