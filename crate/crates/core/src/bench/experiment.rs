//! Experiment matrices over backend × proc, with CSV output.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ledger::{account, ProblemShape};
use crate::cluster::{simulate, Architecture, ClusterConfig, FaultPlan, RunStatus, SimError};
use crate::exec::Execution;
use crate::linalg::gen_poisson_7pt;
use crate::pcg::{DistributedProblem, PcgError, PrecondKind, RecoveryMode, SolveConfig};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Solver(#[from] PcgError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rhs {
    #[default]
    Ones,
    /// Uniform in `[-1, 1)` from the seed.
    Random,
}

/// `b` for a problem of size `n`.
pub fn rhs(kind: Rhs, n: usize, seed: u64) -> Vec<f64> {
    match kind {
        Rhs::Ones => vec![1.0; n],
        Rhs::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
        }
    }
}

/// Poisson 7-point problem on an `nx × ny × nz` grid split over `proc` ranks.
pub fn poisson_problem(
    dims: [usize; 3],
    proc: usize,
    rhs_kind: Rhs,
    seed: u64,
    precond: PrecondKind,
) -> Result<DistributedProblem, PcgError> {
    let a = gen_poisson_7pt(dims[0], dims[1], dims[2])?;
    let b = rhs(rhs_kind, a.n_rows(), seed);
    DistributedProblem::new(a, b, precond, proc)
}

/// `c` as a number, or `"full"` for `proc − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tolerance {
    Fixed(usize),
    Named(String),
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::Fixed(1)
    }
}

impl Tolerance {
    pub fn resolve(&self, proc: usize) -> Result<usize, String> {
        match self {
            Tolerance::Fixed(c) => Ok(*c),
            Tolerance::Named(s) if s == "full" => Ok(proc.saturating_sub(1)),
            Tolerance::Named(s) => Err(format!("unknown tolerance '{s}'")),
        }
    }
}

fn default_period() -> u64 {
    5
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_iter() -> u64 {
    5000
}
fn default_trials() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub grid: [usize; 3],
    pub procs: Vec<usize>,
    pub backends: Vec<RecoveryMode>,
    #[serde(default)]
    pub c: Tolerance,
    #[serde(default = "default_period")]
    pub persist_period: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub rhs: Rhs,
    /// Fault templates `j:phase:ranks`.
    #[serde(default)]
    pub faults: Vec<String>,
    #[serde(default)]
    pub slots_per_node: Option<usize>,
    #[serde(default)]
    pub mem_v: Option<u64>,
    #[serde(default)]
    pub mem_nv: Option<u64>,
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let spec: Self = toml::from_str(text).map_err(|e| BenchError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Spec(m.to_string()));
        if self.grid.contains(&0) {
            return bad("grid dimensions must be positive");
        }
        if self.procs.is_empty() || self.procs.contains(&0) {
            return bad("procs must be a non-empty list of positive counts");
        }
        if self.backends.is_empty() {
            return bad("backends must not be empty");
        }
        if self.persist_period == 0 {
            return bad("persist_period must be at least 1");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        self.c.resolve(1).map_err(BenchError::Spec)?;
        FaultPlan::parse(&self.faults).map_err(BenchError::Spec)?;
        Ok(())
    }
}

/// One CSV row. Byte and time figures are per persistence iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExperimentRow {
    pub backend: RecoveryMode,
    pub proc: usize,
    pub c: usize,
    pub n: usize,
    pub iter_converge: u64,
    pub persist_simtime: u64,
    pub wire_bytes: u64,
    pub ram_red_bytes: u64,
    pub nvm_resident_bytes: u64,
    pub nvm_written_bytes: u64,
    pub recovered: bool,
    pub status: String,
}

pub const CSV_COLUMNS: [&str; 12] = [
    "backend",
    "proc",
    "c",
    "n",
    "iter_converge",
    "persist_simtime",
    "wire_bytes",
    "ram_red_bytes",
    "nvm_resident_bytes",
    "nvm_written_bytes",
    "recovered",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cell {
    backend: RecoveryMode,
    proc: usize,
    trial: u64,
}

fn skipped(cell: Cell, c: usize, n: usize, reason: &str) -> ExperimentRow {
    ExperimentRow {
        backend: cell.backend,
        proc: cell.proc,
        c,
        n,
        iter_converge: 0,
        persist_simtime: 0,
        wire_bytes: 0,
        ram_red_bytes: 0,
        nvm_resident_bytes: 0,
        nvm_written_bytes: 0,
        recovered: false,
        status: format!("skipped: {reason}"),
    }
}

fn run_cell(spec: &ExperimentSpec, cell: Cell, exec: Execution) -> ExperimentRow {
    let n = spec.grid.iter().product();
    let c = match spec.c.resolve(cell.proc) {
        Ok(c) => c,
        Err(e) => return skipped(cell, 0, n, &e),
    };
    if cell.proc > n {
        return skipped(cell, c, n, "more ranks than rows");
    }
    let c = if cell.backend == RecoveryMode::None { 0 } else { c };
    if c >= cell.proc {
        return skipped(cell, c, n, "c must be below proc");
    }
    let plan = FaultPlan::parse(&spec.faults).expect("validated");
    if plan.events.iter().flat_map(|e| e.victims.iter()).any(|&v| v >= cell.proc) {
        return skipped(cell, c, n, "fault victim outside the rank range");
    }
    let seed = spec.seed.wrapping_add(cell.trial);
    let problem = match poisson_problem(spec.grid, cell.proc, spec.rhs, seed, PrecondKind::Jacobi) {
        Ok(p) => p,
        Err(e) => return skipped(cell, c, n, &e.to_string()),
    };
    let solve = SolveConfig {
        tol: spec.tol,
        max_iter: spec.max_iter,
        persist_period: spec.persist_period,
        recovery_mode: cell.backend,
        c,
        preconditioner: PrecondKind::Jacobi,
    };
    let mut cluster = ClusterConfig::packed(
        cell.proc,
        spec.slots_per_node.unwrap_or(1),
        Architecture::for_mode(cell.backend),
    );
    cluster.seed = seed;
    cluster.mem_v = spec.mem_v;
    cluster.mem_nv = spec.mem_nv;
    let report = match simulate(&cluster, &solve, &problem, &plan, exec) {
        Ok(r) => r,
        Err(e @ (SimError::Config(_) | SimError::InvalidPlan(_))) => return skipped(cell, c, n, &e.to_string()),
        Err(e) => {
            return ExperimentRow { status: format!("error: {e}"), ..skipped(cell, c, n, "") };
        }
    };
    let analytic = account(cell.backend, c, &ProblemShape::of(&problem));
    let measured = &report.ledger;
    let comparable = report.counters.rounds > 0 || cell.backend == RecoveryMode::None;
    let mut status = report.status.as_str().to_string();
    if report.status.is_success() && comparable && *measured != analytic {
        status = "ledger_mismatch".into();
    }
    ExperimentRow {
        backend: cell.backend,
        proc: cell.proc,
        c,
        n,
        iter_converge: report.iterations,
        persist_simtime: report.persist_simtime(),
        wire_bytes: measured.wire_bytes_per_persist,
        ram_red_bytes: measured.ram_redundancy_bytes(),
        nvm_resident_bytes: measured.nvm_reserved_bytes,
        nvm_written_bytes: measured.nvm_written_bytes_per_persist,
        recovered: report.recovered(),
        status: if matches!(report.status, RunStatus::Converged | RunStatus::MaxIter) {
            status
        } else {
            format!("{status}: {}", report.status.reason().unwrap_or_default())
        },
    }
}

/// Every (backend, proc, trial) combination, in spec order. Cells run in
/// parallel; the row order does not depend on scheduling.
pub fn run_experiments(spec: &ExperimentSpec, exec: Execution) -> Result<Vec<ExperimentRow>, BenchError> {
    spec.validate()?;
    let mut seen = BTreeSet::new();
    let cells: Vec<Cell> = spec
        .backends
        .iter()
        .flat_map(|&backend| {
            spec.procs
                .iter()
                .flat_map(move |&proc| (0..spec.trials).map(move |trial| Cell { backend, proc, trial }))
        })
        .filter(|c| seen.insert((c.backend, c.proc, c.trial)))
        .collect();
    Ok(exec.map(&cells, |&cell| run_cell(spec, cell, Execution::Sequential)))
}

pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

/// Run `spec` and write `<dir>/results.csv`; returns the rows.
pub fn run_to_dir(spec: &ExperimentSpec, dir: &Path, exec: Execution) -> Result<Vec<ExperimentRow>, BenchError> {
    let rows = run_experiments(spec, exec)?;
    std::fs::create_dir_all(dir)?;
    let file = std::fs::File::create(dir.join("results.csv"))?;
    write_csv(&rows, std::io::BufWriter::new(file))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"
grid = [6, 6, 6]
procs = [2, 4]
backends = ["none", "esr_inmem", "nvm_local", "nvm_prd"]
c = 1
persist_period = 3
"#;

    #[test]
    fn parses_spec_with_defaults() {
        let s = ExperimentSpec::from_toml(SPEC).unwrap();
        assert_eq!(s.tol, 1e-8);
        assert_eq!(s.trials, 1);
        assert_eq!(s.c, Tolerance::Fixed(1));
        let full = ExperimentSpec::from_toml(&SPEC.replace("c = 1", "c = \"full\"")).unwrap();
        assert_eq!(full.c.resolve(8).unwrap(), 7);
        assert!(ExperimentSpec::from_toml(&SPEC.replace("c = 1", "c = \"most\"")).is_err());
        assert!(ExperimentSpec::from_toml(&SPEC.replace("procs = [2, 4]", "procs = []")).is_err());
        assert!(ExperimentSpec::from_toml(&format!("{SPEC}\nbogus = 1")).is_err());
    }

    #[test]
    fn crash_free_rows_agree_on_iterations() {
        let spec = ExperimentSpec::from_toml(SPEC).unwrap();
        let rows = run_experiments(&spec, Execution::Parallel).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.status == "converged"), "{rows:?}");
        let iters: BTreeSet<u64> = rows.iter().map(|r| r.iter_converge).collect();
        assert_eq!(iters.len(), 1);
    }

    #[test]
    fn csv_header_and_reproducibility() {
        let spec = ExperimentSpec::from_toml(SPEC).unwrap();
        let mut a = Vec::new();
        write_csv(&run_experiments(&spec, Execution::Parallel).unwrap(), &mut a).unwrap();
        let mut b = Vec::new();
        write_csv(&run_experiments(&spec, Execution::Sequential).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn infeasible_cells_are_skipped() {
        let spec = ExperimentSpec::from_toml(&SPEC.replace("c = 1", "c = 3")).unwrap();
        let rows = run_experiments(&spec, Execution::Sequential).unwrap();
        let two = rows.iter().find(|r| r.proc == 2 && r.backend == RecoveryMode::NvmPrd).unwrap();
        assert!(two.status.starts_with("skipped"));
    }

    #[test]
    fn random_rhs_is_seeded() {
        assert_eq!(rhs(Rhs::Random, 5, 7), rhs(Rhs::Random, 5, 7));
        assert_ne!(rhs(Rhs::Random, 5, 7), rhs(Rhs::Random, 5, 8));
        assert!(rhs(Rhs::Random, 100, 1).iter().all(|v| (-1.0..1.0).contains(v)));
    }
}
