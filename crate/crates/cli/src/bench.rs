//! `bench`: a configuration matrix over a directory of MPS files.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use pdhg_lp::linalg::ScalingMode;
use pdhg_lp::restart::RestartScheme;
use pdhg_lp::step::{StepMode, WeightMode};
use pdhg_lp::{solve, SolveStatus, SolverConfig};
use rayon::prelude::*;

use crate::input::{read_problem, InputFormat};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Directory of `.mps` files.
    dir: PathBuf,
    /// Comma-separated presets: vanilla, scaling, restarts, full.
    #[arg(long, value_delimiter = ',', default_value = "full")]
    configs: Vec<Preset>,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    time_limit_sec: Option<f64>,
    /// Parallel solves; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Shift of the geometric means.
    #[arg(long, default_value_t = 10.0)]
    shift: f64,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    format: InputFormat,
    /// CSV destination; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solved-count-by-time table as CSV; printed to stderr if absent.
    #[arg(long)]
    time_table: Option<PathBuf>,
}

/// Cumulative stages of the enhancement ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Vanilla,
    Scaling,
    Restarts,
    Full,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Vanilla => "vanilla",
            Preset::Scaling => "scaling",
            Preset::Restarts => "restarts",
            Preset::Full => "full",
        }
    }

    fn config(self) -> SolverConfig {
        let mut config = SolverConfig::default();
        if self == Preset::Full {
            return config;
        }
        config.step.mode = StepMode::Fixed(None);
        config.weight.mode = WeightMode::Fixed(1.0);
        if self == Preset::Vanilla {
            config.scaling.mode = ScalingMode::None;
        }
        if self != Preset::Restarts {
            config.restart.scheme = RestartScheme::None;
        }
        config
    }
}

struct Row {
    instance: String,
    config: &'static str,
    status: String,
    iterations: Option<usize>,
    restarts: Option<usize>,
    matvecs: Option<u64>,
    wall_sec: Option<f64>,
    rel_kkt_final: Option<f64>,
}

impl Row {
    fn solved(&self) -> bool {
        self.status == SolveStatus::Optimal.to_string()
    }
}

/// `exp(mean(ln(v + shift))) − shift`.
pub fn shifted_geometric_mean(values: &[f64], shift: f64) -> f64 {
    let mean = values.iter().map(|v| (v + shift).ln()).sum::<f64>() / values.len() as f64;
    mean.exp() - shift
}

fn instances(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("mps")))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .mps files in {}", dir.display());
    }
    Ok(files)
}

fn run_one(path: &Path, preset: Preset, args: &BenchArgs) -> Row {
    let instance = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    let mut row = Row {
        instance,
        config: preset.name(),
        status: String::new(),
        iterations: None,
        restarts: None,
        matvecs: None,
        wall_sec: None,
        rel_kkt_final: None,
    };
    let mut config = preset.config();
    config.termination.tol_optimal = args.tolerance;
    if let Some(n) = args.max_iters {
        config.termination.iteration_limit = n;
    }
    config.termination.time_limit_seconds = args.time_limit_sec;
    let start = Instant::now();
    let outcome = read_problem(path, args.format).and_then(|p| solve(p, &config).map_err(Into::into));
    match outcome {
        Ok(report) => {
            row.status = report.status.to_string();
            row.iterations = Some(report.iterations);
            row.restarts = Some(report.restarts);
            row.matvecs = Some(report.matvecs);
            row.wall_sec = Some(start.elapsed().as_secs_f64());
            row.rel_kkt_final = Some(report.kkt.max_relative());
        }
        Err(e) => {
            log::warn!("{}: {e:#}", path.display());
            row.status = "error".into();
        }
    }
    row
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn run(args: BenchArgs) -> Result<u8> {
    let files = instances(&args.dir)?;
    let jobs: Vec<(PathBuf, Preset)> = args
        .configs
        .iter()
        .flat_map(|&c| files.iter().map(move |f| (f.clone(), c)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .context("starting worker pool")?;
    let rows: Vec<Row> = pool.install(|| jobs.par_iter().map(|(f, c)| run_one(f, *c, &args)).collect());

    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout()),
    };
    let mut csv = csv::Writer::from_writer(sink);
    csv.write_record([
        "instance",
        "config",
        "status",
        "iterations",
        "restarts",
        "matvecs",
        "wall_sec",
        "rel_kkt_final",
    ])?;
    for r in &rows {
        csv.write_record([
            r.instance.clone(),
            r.config.to_string(),
            r.status.clone(),
            opt(r.iterations),
            opt(r.restarts),
            opt(r.matvecs),
            opt(r.wall_sec),
            opt(r.rel_kkt_final),
        ])?;
    }
    // Summary rows: shifted geometric means over the instances that ran,
    // with the solved count in the status column.
    for &preset in &args.configs {
        let ran: Vec<&Row> = rows.iter().filter(|r| r.config == preset.name() && r.iterations.is_some()).collect();
        let solved = ran.iter().filter(|r| r.solved()).count();
        let total = rows.iter().filter(|r| r.config == preset.name()).count();
        let sgm = |f: &dyn Fn(&Row) -> f64| {
            if ran.is_empty() {
                String::new()
            } else {
                shifted_geometric_mean(&ran.iter().map(|r| f(r)).collect::<Vec<_>>(), args.shift).to_string()
            }
        };
        csv.write_record([
            format!("sgm(shift={})", args.shift),
            preset.name().to_string(),
            format!("solved {solved}/{total}"),
            sgm(&|r| r.iterations.unwrap() as f64),
            sgm(&|r| r.restarts.unwrap() as f64),
            sgm(&|r| r.matvecs.unwrap() as f64),
            sgm(&|r| r.wall_sec.unwrap()),
            String::new(),
        ])?;
    }
    csv.flush()?;
    write_time_table(&rows, &args)?;
    Ok(0)
}

/// Number of instances each configuration solved within each time budget.
fn write_time_table(rows: &[Row], args: &BenchArgs) -> Result<()> {
    let budgets = [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0, 3600.0];
    let sink: Box<dyn Write> = match &args.time_table {
        Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stderr()),
    };
    let mut csv = csv::Writer::from_writer(sink);
    let mut header = vec!["time_sec".to_string()];
    header.extend(args.configs.iter().map(|c| c.name().to_string()));
    csv.write_record(&header)?;
    for budget in budgets {
        let mut record = vec![budget.to_string()];
        for c in &args.configs {
            let n = rows
                .iter()
                .filter(|r| r.config == c.name() && r.solved() && r.wall_sec.is_some_and(|t| t <= budget))
                .count();
            record.push(n.to_string());
        }
        csv.write_record(&record)?;
    }
    csv.flush()?;
    Ok(())
}
