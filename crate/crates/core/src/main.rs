use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use nct::cli::{run, Command, RunOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Algebra,
    Connection,
    Moduli,
    Equiv,
    Heisenberg,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Algebra => Command::Algebra,
            Cmd::Connection => Command::Connection,
            Cmd::Moduli => Command::Moduli,
            Cmd::Equiv => Command::Equiv,
            Cmd::Heisenberg => Command::Heisenberg,
        }
    }
}

/// Noncommutative torus toolkit: algebra, connections, moduli of flat
/// connections and Heisenberg lattices. Reads one JSON problem, writes one
/// JSON report.
#[derive(Debug, Parser)]
#[command(name = "nct", version)]
struct Args {
    command: Cmd,
    #[arg(long)]
    input: PathBuf,
    /// Seed for randomized eigenvector searches.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truncation window M (moduli, equiv).
    #[arg(long)]
    window: Option<i32>,
    /// Overrides params.tol.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Record wall time in the report (breaks byte-for-byte reproducibility).
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("nct: cannot read {}: {e}", args.input.display());
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let mut opts = RunOptions { seed: args.seed, window: args.window, tol: args.tol, wall_time: None };
    let mut out = run(args.command.into(), &text, &opts);
    if args.timing {
        opts.wall_time = Some(start.elapsed().as_secs_f64());
        out = run(args.command.into(), &text, &opts);
    }
    if out.exit_code != 0 {
        eprintln!("nct: {} failed with exit code {}", Command::from(args.command), out.exit_code);
    }
    match &args.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.report) {
                eprintln!("nct: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", out.report),
    }
    ExitCode::from(out.exit_code as u8)
}
