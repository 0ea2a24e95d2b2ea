use std::ops::Range;

use super::{LinalgError, Result};

/// Balanced split of `[0, n)` into `proc` contiguous row blocks, rank-ordered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    starts: Vec<usize>,
}

impl Partition {
    /// The first `n % proc` ranks get one extra row.
    pub fn balanced(n: usize, proc: usize) -> Result<Self> {
        if proc == 0 {
            return Err(LinalgError::Size("partition needs at least one rank".into()));
        }
        if proc > n.max(1) {
            return Err(LinalgError::Size(format!("{proc} ranks for {n} rows")));
        }
        let (q, rem) = (n / proc, n % proc);
        let mut starts = Vec::with_capacity(proc + 1);
        let mut s = 0;
        for r in 0..proc {
            starts.push(s);
            s += q + usize::from(r < rem);
        }
        starts.push(n);
        Ok(Self { n, starts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn proc(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn range(&self, rank: usize) -> Range<usize> {
        self.starts[rank]..self.starts[rank + 1]
    }

    pub fn len_of(&self, rank: usize) -> usize {
        self.starts[rank + 1] - self.starts[rank]
    }

    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.starts.windows(2).map(|w| w[0]..w[1])
    }

    pub fn owner_of(&self, index: usize) -> usize {
        debug_assert!(index < self.n);
        self.starts.partition_point(|&s| s <= index) - 1
    }
}
