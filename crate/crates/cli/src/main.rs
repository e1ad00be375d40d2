use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qsim_core::bench::{self, Backend, BenchRecord, RunOptions, TdopedConfig, VERIFY_TOL};
use qsim_core::catalog::{symplectic_group_order, DisentanglerCatalog};
use qsim_core::circuit::{t_doped_circuit, Circuit};
use qsim_core::gcamps::Disentanglers;
use qsim_core::mps::TruncationPolicy;
use qsim_core::par::{self, Execution};
use qsim_core::pauli::QuditDim;
use qsim_core::Error;

#[derive(Parser)]
#[command(name = "qsim", version, about = "Qudit circuit simulation: tableau, MPS and C|MPS> backends")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a circuit file and report bond dimensions per layer.
    Run(RunArgs),
    /// T-doped random Clifford benchmark over several shots and backends.
    BenchTdoped(BenchArgs),
    /// Build the two-qudit disentangler catalog.
    Disentanglers(CatalogArgs),
    /// Write a T-doped random circuit in the text format.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct TruncationArgs {
    /// Largest bond dimension kept (default: unbounded).
    #[arg(long)]
    chi_max: Option<usize>,
    /// Relative singular-value cutoff.
    #[arg(long, default_value_t = 1e-12)]
    cutoff: f64,
}

impl TruncationArgs {
    fn policy(&self) -> Result<TruncationPolicy, Error> {
        TruncationPolicy::new(self.chi_max.unwrap_or(usize::MAX), self.cutoff)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "gcamps")]
    backend: String,
    #[arg(long)]
    circuit: PathBuf,
    #[command(flatten)]
    trunc: TruncationArgs,
    /// Catalog file for the gcamps backend (built in memory if omitted).
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Check the final state against the dense simulator.
    #[arg(long)]
    verify: bool,
    /// CSV output (default: standard output).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    sites: usize,
    #[arg(long)]
    layers: usize,
    #[arg(long, default_value_t = 1)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated subset of gcamps,mps,statevector.
    #[arg(long, default_value = "gcamps,mps", value_delimiter = ',')]
    backends: Vec<String>,
    /// Clifford gates per block (default 5·n²).
    #[arg(long)]
    clifford_len: Option<usize>,
    #[command(flatten)]
    trunc: TruncationArgs,
    /// Run shots one after another.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CatalogArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    sites: usize,
    #[arg(long)]
    layers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    clifford_len: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Verify(String),
    Other(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Other(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.into())
    }
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_records(path: &Option<PathBuf>, json: bool, records: &[BenchRecord]) -> Result<(), Failure> {
    let mut w = output(path)?;
    if json {
        bench::write_json(&mut w, records)?;
        writeln!(w)?;
    } else {
        bench::write_csv(&mut w, records)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let backend: Backend = args.backend.parse()?;
    let circuit = Circuit::parse(&std::fs::read_to_string(&args.circuit)?)?;
    let mut opts = RunOptions::new(backend);
    opts.policy = args.trunc.policy()?;
    opts.verify = args.verify;
    if let Some(path) = &args.catalog {
        let catalog = DisentanglerCatalog::load(path)?;
        opts.disentanglers = Some(std::sync::Arc::new(Disentanglers::new(catalog)));
    }
    let outcome = bench::run_circuit(&circuit, &opts, 0, 0)?;
    write_records(&args.report, args.json, &outcome.records)?;
    if let Some(f) = outcome.fidelity {
        eprintln!("fidelity={f:.12}");
        if f < 1.0 - VERIFY_TOL {
            return Err(Failure::Verify(format!("fidelity {f} below 1 - {VERIFY_TOL:e}")));
        }
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    let backends = args.backends.iter().map(|b| b.trim().parse::<Backend>()).collect::<Result<Vec<_>, _>>()?;
    let cfg = TdopedConfig {
        d: QuditDim::new(args.d)?,
        n: args.sites,
        layers: args.layers,
        shots: args.shots,
        seed: args.seed,
        backends,
        block_len: args.clifford_len,
        policy: args.trunc.policy()?,
        exec: if args.sequential { Execution::Sequential } else { Execution::default() },
    };
    let records = par::with_threads(bench::threads_from_env(), || bench::bench_tdoped(&cfg))?;
    write_records(&args.out, args.json, &records)
}

fn cmd_disentanglers(args: CatalogArgs) -> Result<(), Failure> {
    let d = QuditDim::new(args.d)?;
    let catalog = DisentanglerCatalog::build(d, Execution::default())?;
    debug_assert_eq!(catalog.group_order, symplectic_group_order(d.get() as u64, 2));
    if let Some(path) = &args.out {
        catalog.save(path)?;
    }
    println!("d={} entangling_classes={} group_order={}", d, catalog.len(), catalog.group_order);
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let c = t_doped_circuit(args.sites, QuditDim::new(args.d)?, args.layers, args.seed, args.clifford_len)?;
    let mut w = output(&args.out)?;
    w.write_all(c.emit().as_bytes())?;
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Run(a) => cmd_run(a),
        Command::BenchTdoped(a) => cmd_bench(a),
        Command::Disentanglers(a) => cmd_disentanglers(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
