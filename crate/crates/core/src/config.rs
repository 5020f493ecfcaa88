//! Flat `key = value` run configuration shared by all subcommands.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown keys are rejected
//! and every error carries the offending line number (0 for problems that
//! involve only defaults).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::model::{validate_params, SystemParams};
use crate::solver::{stability_limit, GridSpec, Perturbation, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub threshold: f64,
    pub m_max: usize,
    /// Theiler window in samples; `None` means `τ·m`.
    pub theiler: Option<usize>,
    pub max_points: usize,
    /// Column of the series file to analyse (name or zero-based index).
    pub column: String,
    /// Sample spacing; `None` reads it from a `t` column.
    pub sample_dt: Option<f64>,
    /// Leading samples to drop before analysis.
    pub discard: usize,
    pub tau: Option<usize>,
    pub lyap_points: usize,
    /// Divergence horizon in delay-vector strides.
    pub lyap_horizon: Option<usize>,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            threshold: 1e-2,
            m_max: 50,
            theiler: None,
            max_points: 20_000,
            column: "u".into(),
            sample_dt: None,
            discard: 0,
            tau: None,
            lyap_points: 5000,
            lyap_horizon: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsConfig {
    pub n_dim: u32,
    pub k_prime: f64,
    pub k1: f64,
    pub c_upper: f64,
    pub max_modes: usize,
    /// Degree of the coefficient sweep in the feasibility check.
    pub sweep_n: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig { n_dim: 2, k_prime: 1.0, k1: 1.0, c_upper: 1.0, max_modes: 1000, sweep_n: 6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub grid: GridSpec,
    pub solver: SolverConfig,
    /// Steps between field snapshots; 0 disables them.
    pub snapshot_every: u64,
    pub analysis: AnalysisConfig,
    pub bounds: BoundsConfig,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

const DEFAULT_DT: f64 = 1.0 / 24.0;

const KEYS: &[&str] = &[
    "alpha", "beta", "d1", "d2", "d3", "d4", "a", "b", "c", "d", "nx", "ny", "lx", "ly", "bc", "dt", "t_end",
    "record_every", "probe_x", "probe_y", "ic_amplitude", "ic_seed", "ic_mode", "snapshot_every", "threshold",
    "m_max", "theiler", "max_points", "analyze_column", "sample_dt", "discard", "tau", "lyap_points",
    "lyap_horizon", "analysis_seed", "n_dim", "k_prime", "k1", "c_upper", "max_modes", "sweep_n", "output_dir",
];

struct Entries {
    values: HashMap<&'static str, (usize, String)>,
}

impl Entries {
    fn line(&self, key: &str) -> usize {
        self.values.get(key).map_or(0, |e| e.0)
    }

    fn get_opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, raw)) => raw.parse().map(Some).map_err(|_| Error::Config {
                line: *line,
                msg: format!("invalid value '{raw}' for {key}"),
            }),
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get_opt(key)?.unwrap_or(default))
    }

    fn float(&self, key: &str, default: f64) -> Result<f64> {
        let v: f64 = self.get(key, default)?;
        if !v.is_finite() {
            return Err(self.err(key, format!("{key} must be finite")));
        }
        Ok(v)
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.float(key, default)?;
        if v <= 0.0 {
            return Err(self.err(key, format!("{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    fn err(&self, key: &str, msg: String) -> Error {
        Error::Config { line: self.line(key), msg }
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut values = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            msg: format!("expected 'key = value', got '{content}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let known = KEYS.iter().find(|k| **k == key).ok_or_else(|| Error::Config {
            line,
            msg: format!("unknown key '{key}'"),
        })?;
        if value.is_empty() {
            return Err(Error::Config { line, msg: format!("missing value for {key}") });
        }
        if values.insert(*known, (line, value.to_string())).is_some() {
            return Err(Error::Config { line, msg: format!("duplicate key '{key}'") });
        }
    }
    Ok(Entries { values })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let e = tokenize(text)?;
    let r = SystemParams::reference();
    let params = SystemParams {
        alpha: e.float("alpha", r.alpha)?,
        beta: e.float("beta", r.beta)?,
        coupling: [
            e.float("d1", r.coupling[0])?,
            e.float("d2", r.coupling[1])?,
            e.float("d3", r.coupling[2])?,
            e.float("d4", r.coupling[3])?,
        ],
        diffusion: [
            e.float("a", r.diffusion[0])?,
            e.float("b", r.diffusion[1])?,
            e.float("c", r.diffusion[2])?,
            e.float("d", r.diffusion[3])?,
        ],
    };
    if let Err(violations) = validate_params(&params) {
        // zero diffusivities are allowed (kinetics-only runs)
        if let Some(v) = violations
            .iter()
            .find(|v| !(["a", "b", "c", "d"].contains(&v.field) && v.value == 0.0))
        {
            return Err(e.err(v.field, v.to_string()));
        }
    }

    let nx: usize = e.get("nx", 200)?;
    let ny: usize = e.get("ny", 200)?;
    if nx < 3 {
        return Err(e.err("nx", format!("nx must be at least 3, got {nx}")));
    }
    if ny != 1 && ny < 3 {
        return Err(e.err("ny", format!("ny must be 1 or at least 3, got {ny}")));
    }
    let grid = GridSpec {
        nx,
        ny,
        lx: e.positive("lx", 500.0)?,
        ly: e.positive("ly", 500.0)?,
        bc: e.get::<String>("bc", "neumann".into())?.parse().map_err(|m: String| e.err("bc", m))?,
    };
    let dy = if ny == 1 { f64::INFINITY } else { grid.dy() };
    let limit = stability_limit(&params, grid.dx(), dy);
    let dt = match e.values.get("dt") {
        Some(_) => {
            let dt = e.positive("dt", DEFAULT_DT)?;
            if dt > limit {
                return Err(e.err("dt", format!("dt = {dt} exceeds the stability limit {limit}")));
            }
            dt
        }
        None => DEFAULT_DT.min(limit),
    };
    let record_every: u64 = e.get("record_every", 24)?;
    if record_every == 0 {
        return Err(e.err("record_every", "record_every must be at least 1".into()));
    }
    let probe = (e.get("probe_x", nx / 2)?, e.get("probe_y", ny / 2)?);
    if probe.0 >= nx {
        return Err(e.err("probe_x", format!("probe_x = {} outside grid of width {nx}", probe.0)));
    }
    if probe.1 >= ny {
        return Err(e.err("probe_y", format!("probe_y = {} outside grid of height {ny}", probe.1)));
    }
    let ic_amplitude = e.float("ic_amplitude", 1e-3)?;
    if ic_amplitude < 0.0 {
        return Err(e.err("ic_amplitude", "ic_amplitude must be nonnegative".into()));
    }
    let ic_mode: Perturbation =
        e.get::<String>("ic_mode", "random".into())?.parse().map_err(|m: String| e.err("ic_mode", m))?;
    let solver = SolverConfig {
        dt,
        t_end: e.positive("t_end", 50.0)?,
        record_every,
        probe,
        ic_amplitude,
        ic_seed: e.get("ic_seed", 0)?,
        ic_mode,
    };

    let defaults = AnalysisConfig::default();
    let threshold = e.float("threshold", defaults.threshold)?;
    if threshold < 0.0 {
        return Err(e.err("threshold", "threshold must be nonnegative".into()));
    }
    let m_max: usize = e.get("m_max", defaults.m_max)?;
    if m_max < 2 {
        return Err(e.err("m_max", "m_max must be at least 2".into()));
    }
    let max_points: usize = e.get("max_points", defaults.max_points)?;
    let lyap_points: usize = e.get("lyap_points", defaults.lyap_points)?;
    if max_points < 100 || lyap_points < 200 {
        let key = if max_points < 100 { "max_points" } else { "lyap_points" };
        return Err(e.err(key, format!("{key} too small")));
    }
    let sample_dt = match e.values.get("sample_dt") {
        Some(_) => Some(e.positive("sample_dt", 1.0)?),
        None => None,
    };
    let analysis = AnalysisConfig {
        threshold,
        m_max,
        theiler: e.get_opt("theiler")?,
        max_points,
        column: e.get("analyze_column", defaults.column)?,
        sample_dt,
        discard: e.get("discard", 0)?,
        tau: e.get_opt("tau")?,
        lyap_points,
        lyap_horizon: e.get_opt("lyap_horizon")?,
        seed: e.get("analysis_seed", 0)?,
    };
    if analysis.tau == Some(0) {
        return Err(e.err("tau", "tau must be at least 1".into()));
    }

    let b = BoundsConfig::default();
    let n_dim: u32 = e.get("n_dim", b.n_dim)?;
    if !(1..=3).contains(&n_dim) {
        return Err(e.err("n_dim", format!("n_dim must be 1, 2 or 3, got {n_dim}")));
    }
    let sweep_n: usize = e.get("sweep_n", b.sweep_n)?;
    if sweep_n < 2 {
        return Err(e.err("sweep_n", "sweep_n must be at least 2".into()));
    }
    let bounds = BoundsConfig {
        n_dim,
        k_prime: e.float("k_prime", b.k_prime)?,
        k1: e.positive("k1", b.k1)?,
        c_upper: e.float("c_upper", b.c_upper)?,
        max_modes: e.get("max_modes", b.max_modes)?,
        sweep_n,
    };

    Ok(RunConfig {
        params,
        grid,
        solver,
        snapshot_every: e.get("snapshot_every", 0)?,
        analysis,
        bounds,
        output_dir: PathBuf::from(e.get::<String>("output_dir", "out".into())?),
    })
}

impl RunConfig {
    /// Text that [`parse_config`] turns back into an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        for (name, value) in self.params.named_values() {
            put(name, &value);
        }
        let g = &self.grid;
        put("nx", &g.nx);
        put("ny", &g.ny);
        put("lx", &g.lx);
        put("ly", &g.ly);
        put("bc", &g.bc.as_str());
        let sc = &self.solver;
        put("dt", &sc.dt);
        put("t_end", &sc.t_end);
        put("record_every", &sc.record_every);
        put("probe_x", &sc.probe.0);
        put("probe_y", &sc.probe.1);
        put("ic_amplitude", &sc.ic_amplitude);
        put("ic_seed", &sc.ic_seed);
        put("ic_mode", &sc.ic_mode.as_str());
        put("snapshot_every", &self.snapshot_every);
        let a = &self.analysis;
        put("threshold", &a.threshold);
        put("m_max", &a.m_max);
        if let Some(t) = a.theiler {
            put("theiler", &t);
        }
        put("max_points", &a.max_points);
        put("analyze_column", &a.column);
        if let Some(dt) = a.sample_dt {
            put("sample_dt", &dt);
        }
        put("discard", &a.discard);
        if let Some(t) = a.tau {
            put("tau", &t);
        }
        put("lyap_points", &a.lyap_points);
        if let Some(h) = a.lyap_horizon {
            put("lyap_horizon", &h);
        }
        put("analysis_seed", &a.seed);
        let b = &self.bounds;
        put("n_dim", &b.n_dim);
        put("k_prime", &b.k_prime);
        put("k1", &b.k1);
        put("c_upper", &b.c_upper);
        put("max_modes", &b.max_modes);
        put("sweep_n", &b.sweep_n);
        put("output_dir", &self.output_dir.display());
        s
    }

    /// Overrides every seed in the config.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.solver.ic_seed = seed;
        self.analysis.seed = seed;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_reference_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.params, SystemParams::reference());
        assert_eq!((c.grid.nx, c.grid.ny, c.grid.lx, c.grid.ly), (200, 200, 500.0, 500.0));
        assert_eq!(c.solver.dt, 1.0 / 24.0);
        assert_eq!(c.solver.probe, (100, 100));
    }

    #[test]
    fn beta_override() {
        let c = parse_config("alpha = 2\nbeta = 5.9").unwrap();
        assert_eq!(c.params.beta, 5.9);
        assert_eq!(c.params.alpha, 2.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line_of = |text: &str| match parse_config(text) {
            Err(Error::Config { line, .. }) => line,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(line_of("alpha = banana"), 1);
        assert_eq!(line_of("# comment\n\ncolour = red"), 3);
        assert_eq!(line_of("beta = 5\nnx 20"), 2);
        assert_eq!(line_of("a = 1e-6\nb = -1"), 2);
        assert_eq!(line_of("nx = 10\n\ndt = 100"), 3);
        assert_eq!(line_of("nx = 10\nprobe_x = 10"), 2);
        assert_eq!(line_of("beta = 5\nbeta = 6"), 2);
        assert_eq!(line_of("alpha = inf"), 1);
    }

    #[test]
    fn default_dt_is_clamped_to_stability() {
        let c = parse_config("nx = 50\nny = 1\nlx = 0.05\na = 1\nb = 1\nc = 1\nd = 1").unwrap();
        let limit = stability_limit(&c.params, c.grid.dx(), f64::INFINITY);
        assert!(limit < 1.0 / 24.0);
        assert_eq!(c.solver.dt, limit);
    }

    #[test]
    fn zero_diffusivities_are_accepted() {
        let c = parse_config("a = 0\nb = 0\nc = 0\nd = 0").unwrap();
        assert_eq!(c.params.diffusion, [0.0; 4]);
        assert!(parse_config("d1 = 0").is_err());
    }

    #[test]
    fn text_round_trip() {
        let c = parse_config(
            "beta = 5.9\nb = 2e-6\nny = 1\nic_mode = uniform\ntheiler = 7\nsample_dt = 0.25\nbc = dirichlet\n\
             t_end = 0.1\noutput_dir = /tmp/x y",
        )
        .unwrap();
        let again = parse_config(&c.to_text()).unwrap();
        assert_eq!(c, again);
        assert_eq!(RunConfig::default(), parse_config(&RunConfig::default().to_text()).unwrap());
    }
}
