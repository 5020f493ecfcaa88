//! Subcommand drivers: each reads a [`RunConfig`] and writes CSV files into
//! an output directory.
//!
//! Floats are written with 17 significant digits so files re-parse to the
//! exact values.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::functionals::{brqp_matrix, coupling_constants, feasible_triple, sylvester_minors};
use crate::functionals::{CoefficientSequences, CouplingConstants, Triple};
use crate::model::stationary_solution;
use crate::solver::{initial_condition, ObservableRecord, Simulator};
use crate::spectral::{dimension_bounds, BoundReport, BoundsSpec};
use crate::tsa::{albano_dimension, largest_lyapunov, AlbanoConfig, DimensionReport, LyapunovConfig, LyapunovEstimate};

pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
/// Fewest samples `analyze` accepts.
pub const MIN_SERIES_LEN: usize = 1000;

/// Full-precision float formatting used in every CSV.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_row(values: &[f64]) -> String {
    values.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",")
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

#[derive(Debug, Clone)]
pub struct SimulationSummary {
    pub steps: u64,
    pub final_time: f64,
    pub records: Vec<ObservableRecord>,
    pub global_min: f64,
    pub checkpoint: PathBuf,
}

fn write_snapshot(dir: &Path, sim: &Simulator) -> Result<()> {
    let s = sim.state();
    let mut w = create(dir, &format!("snapshot_{}.csv", sim.time()))?;
    writeln!(w, "x,y,u,v,w,z")?;
    for iy in 0..s.ny {
        for ix in 0..s.nx {
            let p = s.point(ix, iy);
            let y = if s.is_1d() { 0.0 } else { iy as f64 * s.dy };
            writeln!(w, "{}", csv_row(&[ix as f64 * s.dx, y, p.u, p.v, p.w, p.z]))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Integrates to `t_end`, writing `probe.csv`, `norms.csv`, optional
/// snapshots and a final checkpoint.
///
/// With `resume`, integration continues from the checkpoint, whose
/// parameters, time step and grid must match the config. Rows already
/// written are flushed before a blow-up error is returned.
pub fn run_simulate(cfg: &RunConfig, out: &Path, resume: Option<&Checkpoint>) -> Result<SimulationSummary> {
    fs::create_dir_all(out)?;
    let sc = &cfg.solver;
    let mut sim = match resume {
        Some(cp) => {
            let g = &cfg.grid;
            if cp.params != cfg.params || cp.dt != sc.dt || (cp.state.nx, cp.state.ny) != (g.nx, g.ny) {
                return Err(Error::domain("checkpoint does not match the config (parameters, dt or grid)"));
            }
            Simulator::resume(cp.state.clone(), cp.params, cp.dt, cp.step)?
        }
        None => {
            let base = stationary_solution(&cfg.params)?;
            let state = initial_condition(&cfg.grid, base, sc.ic_amplitude, sc.ic_seed, sc.ic_mode)?;
            Simulator::new(state, cfg.params, sc.dt)?
        }
    };
    let end_step = sc.total_steps();
    if sim.step_index() > end_step {
        return Err(Error::domain(format!(
            "checkpoint step {} is past the configured end step {end_step}",
            sim.step_index()
        )));
    }

    let mut probe = create(out, "probe.csv")?;
    let mut norms = create(out, "norms.csv")?;
    writeln!(probe, "t,u,v,w,z")?;
    writeln!(
        norms,
        "t,l2_u,l2_v,l2_w,l2_z,grad_l2_u,grad_l2_v,grad_l2_w,grad_l2_z,L2_functional,K2_functional"
    )?;
    let start = sim.step_index();
    let mut records = Vec::new();
    let outcome = loop {
        let step = sim.step_index();
        if step % sc.record_every == 0 {
            let r = sim.observe(sc.probe);
            let p = r.probe_values;
            writeln!(probe, "{}", csv_row(&[r.t, p.u, p.v, p.w, p.z]))?;
            let mut row = vec![r.t];
            row.extend(r.l2_norms);
            row.extend(r.grad_l2_norms);
            row.extend([r.l2_functional, r.k2_functional]);
            writeln!(norms, "{}", csv_row(&row))?;
            records.push(r);
        }
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 {
            write_snapshot(out, &sim)?;
        }
        if step >= end_step {
            break Ok(());
        }
        if let Err(e) = sim.advance() {
            break Err(e);
        }
    };
    probe.flush()?;
    norms.flush()?;
    outcome?;

    let checkpoint = out.join(CHECKPOINT_FILE);
    Checkpoint { step: sim.step_index(), dt: sim.dt(), params: cfg.params, state: sim.state().clone() }
        .save(&checkpoint)?;
    Ok(SimulationSummary {
        steps: sim.step_index() - start,
        final_time: sim.time(),
        records,
        global_min: sim.global_min(),
        checkpoint,
    })
}

/// A scalar series read from a text file, with its sample spacing when the
/// file has a `t` column.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub values: Vec<f64>,
    pub sample_dt: Option<f64>,
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses a single-column or delimited series.
///
/// A first row that is not all numbers is a header; `column` is then looked
/// up by name. Otherwise `column` must be a zero-based index unless the file
/// has a single column. Blank lines and `#` lines are skipped.
pub fn parse_series(text: &str, column: &str) -> Result<Series> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let &(first_row, first) = rows.peek().ok_or(Error::Parse { row: 0, msg: "empty series file".into() })?;
    let first_fields = split_fields(first);
    let header = first_fields.iter().any(|f| f.parse::<f64>().is_err());
    let width = first_fields.len();
    let (col, time_col) = if header {
        rows.next();
        let find = |name: &str| first_fields.iter().position(|f| *f == name);
        let col = find(column)
            .or_else(|| column.parse::<usize>().ok().filter(|&i| i < width))
            .or_else(|| (width == 1).then_some(0))
            .ok_or_else(|| Error::Parse { row: first_row, msg: format!("no column '{column}' in header") })?;
        (col, find("t"))
    } else {
        let col = column
            .parse::<usize>()
            .ok()
            .filter(|&i| i < width)
            .or_else(|| (width == 1).then_some(0))
            .ok_or_else(|| Error::Parse {
                row: first_row,
                msg: format!("cannot select column '{column}' from a file without header"),
            })?;
        (col, None)
    };

    let mut values = Vec::new();
    let mut times = Vec::new();
    for (row, line) in rows {
        let fields = split_fields(line);
        if fields.len() != width {
            return Err(Error::Parse { row, msg: format!("expected {width} fields, got {}", fields.len()) });
        }
        let num = |i: usize| -> Result<f64> {
            let v: f64 = fields[i]
                .parse()
                .map_err(|_| Error::Parse { row, msg: format!("non-numeric value '{}'", fields[i]) })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse { row, msg: format!("non-finite value '{}'", fields[i]) })
            }
        };
        values.push(num(col)?);
        if let Some(tc) = time_col {
            if times.len() < 2 {
                times.push(num(tc)?);
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Parse { row: 0, msg: "series has no data rows".into() });
    }
    let sample_dt = (times.len() == 2).then(|| times[1] - times[0]).filter(|&dt| dt > 0.0);
    Ok(Series { values, sample_dt })
}

#[derive(Debug, Clone)]
pub struct AnalysisSummary {
    pub dimension: DimensionReport,
    pub lyapunov: LyapunovEstimate,
    pub sample_dt: f64,
    pub samples: usize,
}

/// Correlation dimension and largest Lyapunov exponent of an in-memory series.
pub fn analyze_series(values: &[f64], sample_dt: f64, cfg: &RunConfig) -> Result<AnalysisSummary> {
    let a = &cfg.analysis;
    if values.len() < MIN_SERIES_LEN {
        return Err(Error::domain(format!(
            "series has {} samples; at least {MIN_SERIES_LEN} needed",
            values.len()
        )));
    }
    let albano = AlbanoConfig {
        threshold: a.threshold,
        m_max: a.m_max,
        theiler: a.theiler,
        tau: a.tau,
        max_points: a.max_points,
        seed: a.seed,
        ..AlbanoConfig::default()
    };
    let dimension = albano_dimension(values, &albano)?;
    let (m, tau) = (dimension.m_used, dimension.tau);
    let available = values.len().saturating_sub((m - 1) * tau).max(1);
    let stride = available.div_ceil(a.lyap_points).max(1);
    let horizon = a.lyap_horizon.unwrap_or_else(|| 20.max((4 * tau).div_ceil(stride)));
    let lcfg = LyapunovConfig {
        theiler: a.theiler,
        horizon,
        max_points: a.lyap_points,
        sample_dt,
        ..LyapunovConfig::new(m, tau)
    };
    let lyapunov = largest_lyapunov(values, &lcfg)?;
    Ok(AnalysisSummary { dimension, lyapunov, sample_dt, samples: values.len() })
}

/// Reads a series file and writes `acf.csv`, `cint.csv`, `divergence.csv` and
/// `report.csv`.
pub fn run_analyze(cfg: &RunConfig, series_path: &Path, out: &Path) -> Result<AnalysisSummary> {
    let a = &cfg.analysis;
    let series = parse_series(&fs::read_to_string(series_path)?, &a.column)?;
    if a.discard >= series.values.len() {
        return Err(Error::domain(format!(
            "discard = {} removes the whole series of {} samples",
            a.discard,
            series.values.len()
        )));
    }
    let values = &series.values[a.discard..];
    let sample_dt = a.sample_dt.or(series.sample_dt).unwrap_or(1.0);
    let summary = analyze_series(values, sample_dt, cfg)?;
    write_analysis(&summary, out)?;
    Ok(summary)
}

pub fn write_analysis(summary: &AnalysisSummary, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let d = &summary.dimension;
    let mut w = create(out, "acf.csv")?;
    writeln!(w, "lag,acf")?;
    for (k, v) in d.acf.iter().enumerate() {
        writeln!(w, "{k},{}", fmt_f64(*v))?;
    }
    w.flush()?;

    let mut w = create(out, "cint.csv")?;
    writeln!(w, "r,C,log10_r,log10_C")?;
    for (r, c) in d.radii.iter().zip(&d.cint) {
        let lc = if *c > 0.0 { c.log10() } else { f64::NEG_INFINITY };
        writeln!(w, "{}", csv_row(&[*r, *c, r.log10(), lc]))?;
    }
    w.flush()?;

    let l = &summary.lyapunov;
    let step_time = l.stride as f64 * summary.sample_dt;
    let mut w = create(out, "divergence.csv")?;
    writeln!(w, "k,t,mean_log_divergence")?;
    for (k, s) in l.divergence.iter().enumerate() {
        writeln!(w, "{k},{},{}", fmt_f64(k as f64 * step_time), fmt_f64(*s))?;
    }
    w.flush()?;

    let mut w = create(out, "report.csv")?;
    writeln!(w, "d,m,tau,r_lo,r_hi,fit_r2,lambda1")?;
    writeln!(
        w,
        "{},{},{},{},{},{},{}",
        fmt_f64(d.d),
        d.m_used,
        d.tau,
        fmt_f64(d.fit.r_lo),
        fmt_f64(d.fit.r_hi),
        fmt_f64(d.fit.r2),
        fmt_f64(l.lambda1)
    )?;
    w.flush()?;
    Ok(())
}

/// Writes `bounds.csv` for the configured parameters and domain.
pub fn run_bounds(cfg: &RunConfig, out: &Path) -> Result<BoundReport> {
    let g = &cfg.grid;
    let b = &cfg.bounds;
    let one_d = g.ny == 1;
    let spec = BoundsSpec {
        n_dim: b.n_dim,
        k_prime: b.k_prime,
        k1: b.k1,
        c_upper: b.c_upper,
        omega_volume: if one_d { g.lx } else { g.lx * g.ly },
        lx: g.lx,
        ly: (!one_d).then_some(g.ly),
        max_modes: b.max_modes,
    };
    let report = dimension_bounds(&cfg.params, &spec)?;
    fs::create_dir_all(out)?;
    let mut w = create(out, "bounds.csv")?;
    writeln!(w, "base,lower,trace_count,full_count,upper")?;
    writeln!(
        w,
        "{},{},{},{},{}",
        fmt_f64(report.lower_bound_base),
        fmt_f64(report.lower),
        report.trace_unstable_count,
        report.full_unstable_count,
        fmt_f64(report.upper)
    )?;
    w.flush()?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilitySummary {
    pub constants: CouplingConstants,
    pub triple: Triple,
    /// Sylvester positivity of every `B_rqp`, `0 ≤ r ≤ q ≤ p ≤ n − 2`.
    pub all_minors_positive: bool,
    pub matrices_checked: usize,
}

pub fn feasibility_sweep(diffusion: [f64; 4], n: usize) -> Result<FeasibilitySummary> {
    let constants = coupling_constants(diffusion)?;
    let triple = feasible_triple(&constants)?;
    let seqs = CoefficientSequences::decreasing(triple, n)?;
    let mut all = true;
    let mut checked = 0;
    for p in 0..=n - 2 {
        for q in 0..=p {
            for r in 0..=q {
                let m = brqp_matrix(r, q, p, &seqs, diffusion)?;
                all &= sylvester_minors(&m)?.positive_definite();
                checked += 1;
            }
        }
    }
    Ok(FeasibilitySummary { constants, triple, all_minors_positive: all, matrices_checked: checked })
}

/// Writes `feasibility.csv` for the configured diffusivities.
pub fn run_feasibility(cfg: &RunConfig, out: &Path) -> Result<FeasibilitySummary> {
    let s = feasibility_sweep(cfg.params.diffusion, cfg.bounds.sweep_n)?;
    fs::create_dir_all(out)?;
    let mut w = create(out, "feasibility.csv")?;
    writeln!(w, "A12,A13,A14,A23,A24,A34,theta2,sigma2,rho2,all_minors_positive")?;
    let mut values = s.constants.as_array().to_vec();
    values.extend([s.triple.theta2, s.triple.sigma2, s.triple.rho2]);
    writeln!(w, "{},{}", csv_row(&values), s.all_minors_positive)?;
    w.flush()?;
    Ok(s)
}
