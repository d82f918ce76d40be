//! `pdhg-lp`: solve MPS files, generate test instances, run benchmarks.

mod bench;
mod input;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use pdhg_lp::io::{generate_bilinear_toy, generate_pagerank, write_mps, write_report, PagerankSpec, ReportFormat};
use pdhg_lp::linalg::ScalingMode;
use pdhg_lp::restart::RestartScheme;
use pdhg_lp::step::{StepMode, WeightMode};
use pdhg_lp::{solve, SolveStatus, SolverConfig};

use input::{read_problem, InputFormat};

const EXIT_USAGE: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "pdhg-lp", version, about = "Restarted primal-dual hybrid gradient LP solver")]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one MPS file.
    Solve(SolveArgs),
    /// Write a generated instance as MPS.
    #[command(subcommand)]
    Generate(GenerateCommand),
    /// Solve every MPS file in a directory under several configurations.
    Bench(bench::BenchArgs),
}

/// Solver settings shared by `solve` and `bench`.
#[derive(Args, Debug, Clone)]
pub struct SolverFlags {
    /// Relative KKT tolerance for optimality.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    time_limit_sec: Option<f64>,
    /// none, fixed=K, sharpness=A or adaptive.
    #[arg(long, default_value = "adaptive")]
    restart: RestartScheme,
    /// none, ruiz, pc or ruiz+pc.
    #[arg(long, default_value = "ruiz+pc")]
    scaling: ScalingMode,
    /// fixed, fixed=S or adaptive.
    #[arg(long, default_value = "adaptive")]
    step_size: StepMode,
    /// fixed=W or adaptive.
    #[arg(long, default_value = "adaptive")]
    primal_weight: WeightMode,
}

impl SolverFlags {
    pub fn to_config(&self) -> SolverConfig {
        let mut config = SolverConfig::default();
        config.termination.tol_optimal = self.tolerance;
        if let Some(n) = self.max_iters {
            config.termination.iteration_limit = n;
        }
        config.termination.time_limit_seconds = self.time_limit_sec;
        config.restart.scheme = self.restart;
        config.scaling.mode = self.scaling;
        config.step.mode = self.step_size;
        config.weight.mode = self.primal_weight;
        config
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    format: InputFormat,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Log progress about every this many iterations; 0 is silent.
    #[arg(long, default_value_t = 0)]
    log_every: usize,
}

#[derive(Subcommand, Debug)]
enum GenerateCommand {
    /// PageRank feasibility LP on a Barabási–Albert graph.
    Pagerank {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 0.85)]
        damping: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// The one-variable toy `min 0 s.t. x = 3, x ≥ 0`.
    Bilinear {
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => 0,
        SolveStatus::PrimalInfeasible | SolveStatus::DualInfeasible => 2,
        SolveStatus::IterationLimit | SolveStatus::TimeLimit => 3,
        SolveStatus::NumericalError => 4,
    }
}

fn run_solve(args: SolveArgs) -> Result<u8> {
    let problem = read_problem(&args.input, args.format)?;
    let mut config = args.solver.to_config();
    config.log_interval = args.log_every;
    let report = solve(problem, &config).context("solve rejected the input")?;
    print!("{}", String::from_utf8_lossy(&write_report(&report, ReportFormat::Text)));
    if let Some(out) = &args.out {
        fs::write(out, write_report(&report, ReportFormat::Json))
            .with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(exit_code(report.status))
}

fn run_generate(cmd: GenerateCommand) -> Result<u8> {
    let (problem, out) = match cmd {
        GenerateCommand::Pagerank {
            nodes,
            degree,
            damping,
            seed,
            out,
        } => {
            let spec = PagerankSpec {
                num_nodes: nodes,
                attach_degree: degree,
                damping,
                seed,
            };
            (generate_pagerank(&spec)?, out)
        }
        GenerateCommand::Bilinear { out } => (generate_bilinear_toy(), out),
    };
    let mut buf = Vec::new();
    write_mps(&problem, &mut buf)?;
    fs::write(&out, buf).with_context(|| format!("writing {}", out.display()))?;
    Ok(0)
}

fn init_logging(verbose: u8, log_every: usize) {
    let default = match verbose {
        0 if log_every > 0 => "info",
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default))
        .format_timestamp(None)
        .try_init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let log_every = match &cli.command {
        Command::Solve(a) => a.log_every,
        _ => 0,
    };
    init_logging(cli.verbose, log_every);
    let result = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Generate(cmd) => run_generate(cmd),
        Command::Bench(args) => bench::run(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
