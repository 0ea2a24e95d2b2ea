//! Accounting and experiment sweeps.

pub mod experiment;
pub mod ledger;

pub use experiment::{
    poisson_problem, rhs, run_experiments, run_to_dir, write_csv, BenchError, ExperimentRow, ExperimentSpec, Rhs,
    Tolerance, CSV_COLUMNS,
};
pub use ledger::{account, OverheadLedger, ProblemShape};
