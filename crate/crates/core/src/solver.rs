//! Explicit finite-difference integrator for the reaction-diffusion system.
//!
//! Forward Euler in time, five-point Laplacian in space (three-point on a
//! one-dimensional grid). All four species are updated simultaneously from
//! the previous state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functionals::FunctionalMonitor;
use crate::model::{reaction_unchecked, BoundaryCondition, GridState, Point4, SystemParams};

/// Any field magnitude above this aborts the run.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// Below this many cells the update runs on one thread.
const PARALLEL_MIN_CELLS: usize = 16 * 1024;

/// How the initial perturbation varies in space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// Independent draw for every cell and species.
    Random,
    /// One draw per species, identical in every cell.
    Uniform,
}

impl Perturbation {
    pub fn as_str(self) -> &'static str {
        match self {
            Perturbation::Random => "random",
            Perturbation::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for Perturbation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Perturbation::Random),
            "uniform" => Ok(Perturbation::Uniform),
            other => Err(format!("unknown perturbation mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: u64,
    pub probe: (usize, usize),
    pub ic_amplitude: f64,
    pub ic_seed: u64,
    pub ic_mode: Perturbation,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1.0 / 24.0,
            t_end: 50.0,
            record_every: 24,
            probe: (0, 0),
            ic_amplitude: 1e-3,
            ic_seed: 0,
            ic_mode: Perturbation::Random,
        }
    }
}

impl SolverConfig {
    pub fn total_steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    fn validate(&self, grid: &GridState) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::domain(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::domain("record_every must be at least 1"));
        }
        let (px, py) = self.probe;
        if px >= grid.nx || py >= grid.ny {
            return Err(Error::domain(format!(
                "probe ({px}, {py}) outside {}x{} grid",
                grid.nx, grid.ny
            )));
        }
        Ok(())
    }
}

/// Observables recorded every `record_every` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    pub probe_values: Point4,
    pub l2_norms: [f64; 4],
    pub grad_l2_norms: [f64; 4],
    pub min: [f64; 4],
    pub max: [f64; 4],
    /// Integral of the quadratic Lyapunov form over the domain.
    pub l2_functional: f64,
    /// Integral of `v² + δ z²` over the domain.
    pub k2_functional: f64,
}

impl ObservableRecord {
    pub fn squared_l2_total(&self) -> f64 {
        self.l2_norms.iter().map(|n| n * n).sum()
    }
}

/// Output of [`simulate`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<ObservableRecord>,
    /// Probe time series at every solver step, starting with the initial state.
    pub probe_times: Vec<f64>,
    pub probe_series: Vec<Point4>,
    pub final_state: GridState,
    pub steps: u64,
    /// Smallest field value seen at any step.
    pub global_min: f64,
}

impl Trajectory {
    pub fn probe_component(&self, species: usize) -> Vec<f64> {
        self.probe_series.iter().map(|p| p[species]).collect()
    }
}

fn check_extents(nx: usize, ny: usize) -> Result<()> {
    if nx < 3 || (ny != 1 && ny < 3) {
        return Err(Error::domain(format!(
            "grid {nx}x{ny} too small for the five-point stencil (need >= 3 per stencil direction)"
        )));
    }
    Ok(())
}

/// Value seen across the boundary: mirrored interior value or zero.
#[inline]
fn ghost(bc: BoundaryCondition, mirror: f64) -> f64 {
    match bc {
        BoundaryCondition::Neumann => mirror,
        BoundaryCondition::DirichletZero => 0.0,
    }
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn laplacian_at(
    f: &[f64],
    nx: usize,
    ny: usize,
    ix: usize,
    iy: usize,
    inv_dx2: f64,
    inv_dy2: f64,
    bc: BoundaryCondition,
) -> f64 {
    let i = iy * nx + ix;
    let c = f[i];
    let west = if ix == 0 { ghost(bc, f[i + 1]) } else { f[i - 1] };
    let east = if ix + 1 == nx { ghost(bc, f[i - 1]) } else { f[i + 1] };
    let mut lap = (west + east - 2.0 * c) * inv_dx2;
    if ny > 1 {
        let south = if iy == 0 { ghost(bc, f[i + nx]) } else { f[i - nx] };
        let north = if iy + 1 == ny { ghost(bc, f[i - nx]) } else { f[i + nx] };
        lap += (south + north - 2.0 * c) * inv_dy2;
    }
    lap
}

/// Five-point Laplacian of one field (three-point when `ny == 1`).
pub fn laplacian(
    field: &[f64],
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    bc: BoundaryCondition,
) -> Result<Vec<f64>> {
    check_extents(nx, ny)?;
    if field.len() != nx * ny {
        return Err(Error::domain("field length does not match grid extents"));
    }
    if !(dx > 0.0 && dy > 0.0) {
        return Err(Error::domain("grid spacings must be positive"));
    }
    let (inv_dx2, inv_dy2) = (1.0 / (dx * dx), 1.0 / (dy * dy));
    let mut out = vec![0.0; field.len()];
    for iy in 0..ny {
        for ix in 0..nx {
            out[iy * nx + ix] = laplacian_at(field, nx, ny, ix, iy, inv_dx2, inv_dy2, bc);
        }
    }
    Ok(out)
}

/// Largest stable explicit time step. Pass `dy = f64::INFINITY` for a
/// one-dimensional grid.
///
/// The diffusive part is the usual `(dx⁻² + dy⁻²)⁻¹ / (2 max D)` bound; the
/// reaction part is `0.5 / (β + 1 + max Dᵢ)`, the linear decay rate of the
/// kinetics.
pub fn stability_limit(params: &SystemParams, dx: f64, dy: f64) -> f64 {
    let inv_h2 = dx.powi(-2) + dy.powi(-2);
    let max_diff = params.max_diffusion();
    let diffusive = if max_diff > 0.0 {
        1.0 / inv_h2 / (2.0 * max_diff)
    } else {
        f64::INFINITY
    };
    let reaction = 0.5 / (params.beta + 1.0 + params.max_coupling());
    diffusive.min(reaction)
}

/// [`stability_limit`] for a concrete grid.
pub fn grid_stability_limit(grid: &GridState, params: &SystemParams) -> f64 {
    let dy = if grid.is_1d() { f64::INFINITY } else { grid.dy };
    stability_limit(params, grid.dx, dy)
}

/// Geometry of a grid without its data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub bc: BoundaryCondition,
}

impl GridSpec {
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    /// Unit width for one-dimensional grids.
    pub fn dy(&self) -> f64 {
        if self.ny == 1 {
            1.0
        } else {
            self.ly / self.ny as f64
        }
    }
}

/// `base + amplitude·ξ`, ξ uniform on `[-1, 1]`, clamped at zero.
pub fn initial_condition(
    grid: &GridSpec,
    base: Point4,
    amplitude: f64,
    seed: u64,
    mode: Perturbation,
) -> Result<GridState> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::domain(format!("amplitude must be nonnegative, got {amplitude}")));
    }
    let mut state = GridState::uniform(grid.nx, grid.ny, grid.dx(), grid.dy(), base, grid.bc)?;
    if amplitude == 0.0 {
        return Ok(state);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (s, field) in state.fields.iter_mut().enumerate() {
        let b = base[s];
        match mode {
            Perturbation::Random => {
                for x in field.iter_mut() {
                    let xi: f64 = rng.random_range(-1.0..=1.0);
                    *x = (b + amplitude * xi).max(0.0);
                }
            }
            Perturbation::Uniform => {
                let xi: f64 = rng.random_range(-1.0..=1.0);
                let value = (b + amplitude * xi).max(0.0);
                field.iter_mut().for_each(|x| *x = value);
            }
        }
    }
    Ok(state)
}

/// Per-row minimum value and maximum magnitude for one update.
#[derive(Clone, Copy)]
struct RowStats {
    min: f64,
    max_abs: f64,
    finite: bool,
}

impl RowStats {
    const EMPTY: RowStats = RowStats { min: f64::INFINITY, max_abs: 0.0, finite: true };

    fn merge(self, o: RowStats) -> RowStats {
        RowStats {
            min: self.min.min(o.min),
            max_abs: self.max_abs.max(o.max_abs),
            finite: self.finite && o.finite,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn update_row(
    src: &GridState,
    params: &SystemParams,
    dt: f64,
    iy: usize,
    out: [&mut [f64]; 4],
    inv_dx2: f64,
    inv_dy2: f64,
) -> RowStats {
    let (nx, ny) = (src.nx, src.ny);
    let [ou, ov, ow, oz] = out;
    let mut stats = RowStats::EMPTY;
    let diffusing = params.diffusion.map(|d| d != 0.0);
    for ix in 0..nx {
        let i = iy * nx + ix;
        let (u, v, w, z) = (src.fields[0][i], src.fields[1][i], src.fields[2][i], src.fields[3][i]);
        let mut rate = reaction_unchecked(u, v, w, z, params);
        for s in 0..4 {
            if diffusing[s] {
                rate[s] += params.diffusion[s]
                    * laplacian_at(&src.fields[s], nx, ny, ix, iy, inv_dx2, inv_dy2, src.bc);
            }
        }
        let new = [u + dt * rate[0], v + dt * rate[1], w + dt * rate[2], z + dt * rate[3]];
        ou[ix] = new[0];
        ov[ix] = new[1];
        ow[ix] = new[2];
        oz[ix] = new[3];
        for x in new {
            stats.finite &= x.is_finite();
            stats.min = stats.min.min(x);
            stats.max_abs = stats.max_abs.max(x.abs());
        }
    }
    stats
}

/// One forward-Euler step from `src` into `dst` (same geometry).
fn step_into(src: &GridState, dst: &mut GridState, params: &SystemParams, dt: f64) -> RowStats {
    let (nx, ny) = (src.nx, src.ny);
    let inv_dx2 = 1.0 / (src.dx * src.dx);
    let inv_dy2 = 1.0 / (src.dy * src.dy);
    let [du, dv, dw, dz] = &mut dst.fields;
    if src.len() >= PARALLEL_MIN_CELLS && ny > 1 {
        du.par_chunks_mut(nx)
            .zip(dv.par_chunks_mut(nx))
            .zip(dw.par_chunks_mut(nx))
            .zip(dz.par_chunks_mut(nx))
            .enumerate()
            .map(|(iy, (((ru, rv), rw), rz))| {
                update_row(src, params, dt, iy, [ru, rv, rw, rz], inv_dx2, inv_dy2)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(RowStats::EMPTY, RowStats::merge)
    } else {
        let mut stats = RowStats::EMPTY;
        for (iy, (((ru, rv), rw), rz)) in du
            .chunks_mut(nx)
            .zip(dv.chunks_mut(nx))
            .zip(dw.chunks_mut(nx))
            .zip(dz.chunks_mut(nx))
            .enumerate()
        {
            stats = stats.merge(update_row(src, params, dt, iy, [ru, rv, rw, rz], inv_dx2, inv_dy2));
        }
        stats
    }
}

fn check_step(state: &GridState, params: &SystemParams, dt: f64) -> Result<()> {
    state.check_consistent()?;
    check_extents(state.nx, state.ny)?;
    params.check_integrable()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    let limit = grid_stability_limit(state, params);
    if dt > limit {
        return Err(Error::domain(format!(
            "dt = {dt} exceeds the explicit stability limit {limit}"
        )));
    }
    Ok(())
}

fn blew_up(stats: &RowStats) -> bool {
    !stats.finite || stats.max_abs > BLOW_UP_THRESHOLD
}

/// Advances `state` by one explicit step of length `dt`.
///
/// A blow-up error reports `t` relative to the input state.
pub fn step(state: &GridState, params: &SystemParams, dt: f64) -> Result<GridState> {
    check_step(state, params, dt)?;
    let mut out = state.clone();
    let stats = step_into(state, &mut out, params, dt);
    if blew_up(&stats) {
        return Err(Error::BlowUp { t: dt, step: 1, max_abs: stats.max_abs });
    }
    Ok(out)
}

/// Row sums combined in row order, so results do not depend on threading.
fn row_reduce<F>(state: &GridState, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partial: Vec<f64> = if state.len() >= PARALLEL_MIN_CELLS {
        (0..state.ny).into_par_iter().map(&f).collect()
    } else {
        (0..state.ny).map(&f).collect()
    };
    partial.into_iter().sum()
}

/// Discrete `‖f‖₂`.
pub fn l2_norm(state: &GridState, species: usize) -> f64 {
    let f = &state.fields[species];
    let nx = state.nx;
    let sum = row_reduce(state, |iy| f[iy * nx..(iy + 1) * nx].iter().map(|x| x * x).sum());
    (sum * state.cell_area()).sqrt()
}

/// Discrete `‖∇f‖₂` from forward differences across interior cell faces.
pub fn grad_l2_norm(state: &GridState, species: usize) -> f64 {
    let f = &state.fields[species];
    let (nx, ny) = (state.nx, state.ny);
    let (dx, dy) = (state.dx, state.dy);
    let sum = row_reduce(state, |iy| {
        let row = &f[iy * nx..(iy + 1) * nx];
        let mut s: f64 = row.windows(2).map(|p| ((p[1] - p[0]) / dx).powi(2)).sum();
        if ny > 1 && iy + 1 < ny {
            let next = &f[(iy + 1) * nx..(iy + 2) * nx];
            s += row.iter().zip(next).map(|(a, b)| ((b - a) / dy).powi(2)).sum::<f64>();
        }
        s
    });
    (sum * state.cell_area()).sqrt()
}

/// Stateful explicit integrator. Time is `step · dt`.
#[derive(Debug, Clone)]
pub struct Simulator {
    params: SystemParams,
    dt: f64,
    state: GridState,
    scratch: GridState,
    step: u64,
    global_min: f64,
    monitor: FunctionalMonitor,
}

impl Simulator {
    pub fn new(state: GridState, params: SystemParams, dt: f64) -> Result<Self> {
        Simulator::resume(state, params, dt, 0)
    }

    /// Continues from a state reached after `step` steps of length `dt`.
    pub fn resume(state: GridState, params: SystemParams, dt: f64, step: u64) -> Result<Self> {
        check_step(&state, &params, dt)?;
        let monitor = FunctionalMonitor::for_params(&params)?;
        let global_min = state.fields.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        Ok(Simulator {
            params,
            dt,
            scratch: state.clone(),
            state,
            step,
            global_min,
            monitor,
        })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn state(&self) -> &GridState {
        &self.state
    }

    pub fn global_min(&self) -> f64 {
        self.global_min
    }

    pub fn monitor(&self) -> &FunctionalMonitor {
        &self.monitor
    }

    pub fn advance(&mut self) -> Result<()> {
        let stats = step_into(&self.state, &mut self.scratch, &self.params, self.dt);
        if blew_up(&stats) {
            return Err(Error::BlowUp {
                t: (self.step + 1) as f64 * self.dt,
                step: self.step + 1,
                max_abs: stats.max_abs,
            });
        }
        std::mem::swap(&mut self.state, &mut self.scratch);
        self.step += 1;
        self.global_min = self.global_min.min(stats.min);
        Ok(())
    }

    pub fn observe(&self, probe: (usize, usize)) -> ObservableRecord {
        let s = &self.state;
        let mut min = [0.0; 4];
        let mut max = [0.0; 4];
        for k in 0..4 {
            let (lo, hi) = s.fields[k]
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            min[k] = lo;
            max[k] = hi;
        }
        ObservableRecord {
            t: self.time(),
            probe_values: s.point(probe.0, probe.1),
            l2_norms: std::array::from_fn(|k| l2_norm(s, k)),
            grad_l2_norms: std::array::from_fn(|k| grad_l2_norm(s, k)),
            min,
            max,
            l2_functional: self.monitor.l2(s),
            k2_functional: self.monitor.k2(s),
        }
    }

    /// Steps until `end_step`, recording every global step that is a
    /// multiple of `record_every` (including the current one).
    pub fn run_to(&mut self, end_step: u64, record_every: u64, probe: (usize, usize)) -> Result<Trajectory> {
        if record_every == 0 {
            return Err(Error::domain("record_every must be at least 1"));
        }
        let capacity = end_step.saturating_sub(self.step) as usize + 1;
        let mut probe_times = Vec::with_capacity(capacity);
        let mut probe_series = Vec::with_capacity(capacity);
        let mut records = Vec::new();
        let start = self.step;
        loop {
            probe_times.push(self.time());
            probe_series.push(self.state.point(probe.0, probe.1));
            if self.step % record_every == 0 {
                records.push(self.observe(probe));
            }
            if self.step >= end_step {
                break;
            }
            self.advance()?;
        }
        Ok(Trajectory {
            records,
            probe_times,
            probe_series,
            final_state: self.state.clone(),
            steps: self.step - start,
            global_min: self.global_min,
        })
    }
}

/// Integrates from `state0` up to `cfg.t_end`.
pub fn simulate(state0: GridState, params: &SystemParams, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate(&state0)?;
    let mut sim = Simulator::new(state0, *params, cfg.dt)?;
    sim.run_to(cfg.total_steps(), cfg.record_every, cfg.probe)
}
