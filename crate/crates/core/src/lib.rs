//! Exact state reconstruction for a distributed preconditioned conjugate
//! gradient solver, with recovery data held in peer RAM, in per-rank local
//! durable slots, or on a dedicated remote persistent node reached through
//! post/start/complete/wait epochs.

// `!(x > 0.0)` deliberately rejects NaN; index loops walk parallel arrays.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod cluster;
pub mod esr;
pub mod exec;
pub mod linalg;
pub mod pcg;
pub mod pstore;
pub mod rma;
pub mod slot;
