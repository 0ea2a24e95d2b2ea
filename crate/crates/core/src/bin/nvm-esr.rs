use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use esr_core::bench::{self, account, ExperimentSpec, ProblemShape, Rhs, Tolerance};
use esr_core::cluster::{simulate, Architecture, ClusterConfig, FaultPlan, RunStatus, SimError};
use esr_core::exec::Execution;
use esr_core::linalg::{self, read_matrix_market, write_matrix_market};
use esr_core::pcg::{DistributedProblem, PrecondKind, RecoveryMode, SolveConfig};
use esr_core::pstore::Media;

const EXIT_UNRECOVERABLE: u8 = 2;
const EXIT_INVALID: u8 = 3;

/// Exact state reconstruction for distributed PCG under injected crashes.
/// All times are simulated units, not wall-clock measurements.
#[derive(Parser, Debug)]
#[command(name = "nvm-esr", version)]
struct Cli {
    /// Run data-parallel loops sequentially.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the 7-point Poisson matrix of an nx × ny × nz grid (Matrix Market).
    Gen { nx: usize, ny: usize, nz: usize, out: PathBuf },
    /// Solve on a simulated cluster with optional faults.
    Solve(SolveArgs),
    /// Closed-form memory and traffic ledger.
    Account(AccountArgs),
    /// Run an experiment spec and write results.csv.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Backend {
    None,
    EsrInmem,
    NvmLocal,
    NvmPrd,
}

impl From<Backend> for RecoveryMode {
    fn from(b: Backend) -> Self {
        match b {
            Backend::None => RecoveryMode::None,
            Backend::EsrInmem => RecoveryMode::EsrInmem,
            Backend::NvmLocal => RecoveryMode::NvmLocal,
            Backend::NvmPrd => RecoveryMode::NvmPrd,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RhsArg {
    Ones,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PrecondArg {
    Jacobi,
    Identity,
}

#[derive(clap::Args, Debug)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "nvm-prd")]
    backend: Backend,
    #[arg(long, default_value_t = 4)]
    proc: usize,
    /// Simultaneous failures tolerated (a number or "full").
    #[arg(long, default_value = "1")]
    c: String,
    #[arg(long, default_value_t = 5)]
    period: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    max_iter: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fault `j:phase:ranks`, e.g. `9:compute:2` or `11:mid_persist@100:1`.
    #[arg(long)]
    fault: Vec<String>,
    #[arg(long, default_value_t = 8)]
    nx: usize,
    #[arg(long, default_value_t = 8)]
    ny: usize,
    #[arg(long, default_value_t = 8)]
    nz: usize,
    /// Read the matrix from a Matrix Market file instead of generating it.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ones")]
    rhs: RhsArg,
    #[arg(long, value_enum, default_value = "jacobi")]
    precond: PrecondArg,
    #[arg(long, default_value_t = 1)]
    slots: usize,
    /// Volatile memory per node, bytes.
    #[arg(long)]
    mem_v: Option<u64>,
    /// Durable memory per node, bytes.
    #[arg(long)]
    mem_nv: Option<u64>,
    /// Keep durable slots as files in this directory.
    #[arg(long)]
    slot_dir: Option<PathBuf>,
    /// Write the line-delimited run report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct AccountArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    proc: usize,
    #[arg(long, default_value = "1")]
    c: String,
    #[arg(long, value_enum, default_value = "nvm-prd")]
    mode: Backend,
    /// Average nonzeros per matrix row.
    #[arg(long, default_value_t = 7)]
    nnz_per_row: usize,
}

/// Input the run cannot start with.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Invalid(String);

fn invalid(e: impl std::fmt::Display) -> anyhow::Error {
    Invalid(e.to_string()).into()
}

fn tolerance(c: &str, proc: usize) -> Result<usize> {
    let t = match c.parse::<usize>() {
        Ok(v) => Tolerance::Fixed(v),
        Err(_) => Tolerance::Named(c.to_string()),
    };
    t.resolve(proc).map_err(invalid)
}

fn exec(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn gen(nx: usize, ny: usize, nz: usize, out: &PathBuf) -> Result<ExitCode> {
    let a = linalg::gen_poisson_7pt(nx, ny, nz).map_err(invalid)?;
    let f = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_matrix_market(&a, BufWriter::new(f))?;
    eprintln!("wrote {} ({} rows, {} nonzeros)", out.display(), a.n_rows(), a.nnz());
    Ok(ExitCode::SUCCESS)
}

fn solve(args: &SolveArgs, exec: Execution) -> Result<ExitCode> {
    let mode: RecoveryMode = args.backend.into();
    let c = if mode == RecoveryMode::None { 0 } else { tolerance(&args.c, args.proc)? };
    let rhs_kind = match args.rhs {
        RhsArg::Ones => Rhs::Ones,
        RhsArg::Random => Rhs::Random,
    };
    let precond = match args.precond {
        PrecondArg::Jacobi => PrecondKind::Jacobi,
        PrecondArg::Identity => PrecondKind::Identity,
    };
    let problem = match &args.matrix {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let a = read_matrix_market(BufReader::new(f)).map_err(invalid)?;
            let b = bench::rhs(rhs_kind, a.n_rows(), args.seed);
            DistributedProblem::new(a, b, precond, args.proc).map_err(invalid)?
        }
        None => bench::poisson_problem([args.nx, args.ny, args.nz], args.proc, rhs_kind, args.seed, precond)
            .map_err(invalid)?,
    };
    let solve = SolveConfig {
        tol: args.tol,
        max_iter: args.max_iter,
        persist_period: args.period,
        recovery_mode: mode,
        c,
        preconditioner: precond,
    };
    let plan = FaultPlan::parse(&args.fault).map_err(invalid)?;
    let mut cluster = ClusterConfig::packed(args.proc, args.slots, Architecture::for_mode(mode));
    cluster.seed = args.seed;
    cluster.mem_v = args.mem_v;
    cluster.mem_nv = args.mem_nv;
    if let Some(dir) = &args.slot_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        cluster.media = Media::Files(dir.clone());
    }
    let report = simulate(&cluster, &solve, &problem, &plan, exec).map_err(|e| match e {
        SimError::Config(_) | SimError::InvalidPlan(_) => invalid(e),
        e => e.into(),
    })?;
    let text = report.to_records();
    match &args.report {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    eprintln!(
        "{}: {} iterations, relative residual {:.3e}, {} recoveries, {} simulated units",
        report.status.as_str(),
        report.iterations,
        report.residual,
        report.recoveries.len(),
        report.simtime
    );
    Ok(match report.status {
        RunStatus::Converged | RunStatus::MaxIter => ExitCode::SUCCESS,
        ref s => {
            eprintln!("run failed: {}", s.reason().unwrap_or_default());
            ExitCode::from(EXIT_UNRECOVERABLE)
        }
    })
}

fn account_cmd(args: &AccountArgs) -> Result<ExitCode> {
    if args.n == 0 || args.proc == 0 || args.proc > args.n {
        return Err(invalid(format!("need 1 ≤ proc ≤ n, got n = {}, proc = {}", args.n, args.proc)));
    }
    let mode: RecoveryMode = args.mode.into();
    let c = tolerance(&args.c, args.proc)?;
    if c >= args.proc {
        return Err(invalid(format!("c = {c} must be below proc = {}", args.proc)));
    }
    let l = account(mode, c, &ProblemShape::structure_free(args.n, args.proc, args.nnz_per_row));
    let mut out = std::io::stdout().lock();
    writeln!(out, "mode = {}", l.mode)?;
    writeln!(out, "n = {}\nproc = {}\nc = {}\nsparsity = {}", l.n, l.proc, l.c, l.sparsity())?;
    writeln!(out, "ram_compute_values = {} ({} bytes)", l.ram_compute_values, l.ram_compute_bytes())?;
    writeln!(out, "ram_redundancy_values = {} ({} bytes)", l.ram_redundancy_values, l.ram_redundancy_bytes())?;
    writeln!(out, "ram_rollback_values = {} ({} bytes)", l.ram_rollback_values, l.ram_rollback_bytes())?;
    writeln!(
        out,
        "nvm_values_per_persist = {} ({} bytes)",
        l.nvm_values_per_persist,
        l.nvm_bytes_per_persist()
    )?;
    writeln!(out, "nvm_resident_values = {}", l.nvm_resident_values)?;
    writeln!(out, "nvm_reserved_bytes = {}", l.nvm_reserved_bytes)?;
    writeln!(out, "nvm_written_bytes_per_persist = {}", l.nvm_written_bytes_per_persist)?;
    writeln!(out, "wire_bytes_per_persist = {}", l.wire_bytes_per_persist)?;
    Ok(ExitCode::SUCCESS)
}

fn bench_cmd(spec: &PathBuf, out: Option<&PathBuf>, exec: Execution) -> Result<ExitCode> {
    let text = std::fs::read_to_string(spec).map_err(|e| invalid(format!("{}: {e}", spec.display())))?;
    let spec = ExperimentSpec::from_toml(&text).map_err(invalid)?;
    let dir = out
        .cloned()
        .or_else(|| spec.output.as_ref().map(PathBuf::from))
        .ok_or_else(|| invalid("no output directory: pass --out or set `output` in the spec"))?;
    let rows = bench::run_to_dir(&spec, &dir, exec)?;
    let ok = rows.iter().filter(|r| r.status == "converged").count();
    eprintln!(
        "{} rows ({ok} converged) written to {} (times in simulated units)",
        rows.len(),
        dir.join("results.csv").display()
    );
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let exec = exec(&cli);
    let result = match &cli.command {
        Command::Gen { nx, ny, nz, out } => gen(*nx, *ny, *nz, out),
        Command::Solve(args) => solve(args, exec),
        Command::Account(args) => account_cmd(args),
        Command::Bench { spec, out } => bench_cmd(spec, out.as_ref(), exec),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::from(EXIT_UNRECOVERABLE)
            }
        }
    }
}
