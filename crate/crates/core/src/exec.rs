//! Execution strategy for the data-parallel inner loops.
//!
//! With the `parallel` feature (default) the row loops of SpMV, per-rank
//! local work and experiment sweeps run on the rayon pool. Without it every
//! entry point below degrades to a plain sequential loop. Results are
//! identical either way: parallelism is only ever applied across independent
//! outputs, never inside a reduction.

/// How data-parallel loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True if this build can actually run loops in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// Map `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Fill `out` in chunks of `chunk` elements; `f(start, chunk_slice)`.
    pub fn fill_chunks<R, F>(self, out: &mut [R], chunk: usize, f: F)
    where
        R: Send,
        F: Fn(usize, &mut [R]) + Sync + Send,
    {
        let chunk = chunk.max(1);
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                out.par_chunks_mut(chunk)
                    .enumerate()
                    .for_each(|(k, c)| f(k * chunk, c));
            }
            _ => {
                for (k, c) in out.chunks_mut(chunk).enumerate() {
                    f(k * chunk, c);
                }
            }
        }
    }

    /// Apply `f(index, item)` to every element.
    pub fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter_mut().enumerate().for_each(|(i, t)| f(i, t));
            }
            _ => {
                for (i, t) in items.iter_mut().enumerate() {
                    f(i, t);
                }
            }
        }
    }
}
