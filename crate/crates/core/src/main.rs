use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use b4::checkpoint::Checkpoint;
use b4::config::{parse_config, RunConfig};
use b4::run::{run_analyze, run_bounds, run_feasibility, run_simulate};
use b4::Error;

/// Four-compartment Brusselator toolkit.
#[derive(Parser)]
#[command(name = "b4", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for initial data and pair sampling.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the PDE and write probe, norm and checkpoint files.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Correlation dimension and largest Lyapunov exponent of a series.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Series file (single column, or CSV with header). Defaults to
        /// `probe.csv` in the output directory.
        #[arg(long)]
        series: Option<PathBuf>,
    },
    /// Attractor-dimension bounds and unstable mode counts.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Coupling constants, a feasible triple and the minor sweep.
    Feasibility {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), Error> {
    let text = std::fs::read_to_string(&common.config)?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = common.seed {
        cfg = cfg.with_seed(seed);
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { common, resume } => {
            let (cfg, out) = load(&common)?;
            let cp = resume.map(|p| Checkpoint::load(&p)).transpose()?;
            let s = run_simulate(&cfg, &out, cp.as_ref())?;
            println!("simulated {} steps to t = {}; min field value {:e}", s.steps, s.final_time, s.global_min);
        }
        Command::Analyze { common, series } => {
            let (cfg, out) = load(&common)?;
            let path = series.unwrap_or_else(|| out.join("probe.csv"));
            let s = run_analyze(&cfg, &path, &out)?;
            let d = &s.dimension;
            println!(
                "d = {:.4} (m = {}, tau = {}, r2 = {:.4}{}), lambda1 = {:.5}",
                d.d,
                d.m_used,
                d.tau,
                d.fit.r2,
                if d.low_confidence { ", low confidence" } else { "" },
                s.lyapunov.lambda1
            );
        }
        Command::Bounds { common } => {
            let (cfg, out) = load(&common)?;
            let r = run_bounds(&cfg, &out)?;
            println!(
                "base = {}, lower = {}, upper = {}, unstable modes: trace {} / full {}",
                r.lower_bound_base, r.lower, r.upper, r.trace_unstable_count, r.full_unstable_count
            );
        }
        Command::Feasibility { common } => {
            let (cfg, out) = load(&common)?;
            let s = run_feasibility(&cfg, &out)?;
            let t = s.triple;
            println!(
                "theta2 = {}, sigma2 = {}, rho2 = {}; {} matrices, all minors positive: {}",
                t.theta2, t.sigma2, t.rho2, s.matrices_checked, s.all_minors_positive
            );
        }
    }
    Ok(())
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("B4_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("B4_THREADS must be a positive integer, got '{raw}'"))?;
    if n == 0 {
        return Err("B4_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
