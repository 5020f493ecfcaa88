use super::correlation::{correlation_dimension, correlation_integral, log_radii, pair_distance_quantiles};
use super::{autocorrelation, embed, select_delay, svd_reduce, CorrelationFit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AlbanoConfig {
    /// Relative singular-value cutoff.
    pub threshold: f64,
    /// Initial embedding window in units of the correlation time.
    pub window_factor: f64,
    pub m_max: usize,
    /// How many dimensions beyond the first Takens-consistent one are scanned.
    pub refine_span: usize,
    /// Cap on embedded points; the stride grows to respect it.
    pub max_points: usize,
    /// Theiler window in samples. Defaults to `τ·m`.
    pub theiler: Option<usize>,
    /// Delay in samples. Defaults to the first 1/e crossing of the ACF.
    pub tau: Option<usize>,
    pub max_lag: Option<usize>,
    pub radii_count: usize,
    /// Pair-distance quantiles bounding the radii.
    pub radius_quantiles: (f64, f64),
    pub quantile_samples: usize,
    pub seed: u64,
}

impl Default for AlbanoConfig {
    fn default() -> Self {
        AlbanoConfig {
            threshold: 1e-2,
            window_factor: 4.0,
            m_max: 50,
            refine_span: 10,
            max_points: 20_000,
            theiler: None,
            tau: None,
            max_lag: None,
            radii_count: super::RADII_COUNT,
            radius_quantiles: (0.01, 0.5),
            quantile_samples: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    pub d: f64,
    pub m_used: usize,
    pub tau: usize,
    /// Sampling stride of the delay vectors actually used.
    pub stride: usize,
    pub theiler: usize,
    /// Singular values divided by the largest.
    pub singular_values: Vec<f64>,
    pub kept: usize,
    pub fit: CorrelationFit,
    pub radii: Vec<f64>,
    pub cint: Vec<f64>,
    pub takens_ok: bool,
    pub low_confidence: bool,
    pub acf: Vec<f64>,
}

struct Evaluation {
    m: usize,
    stride: usize,
    theiler: usize,
    singular_values: Vec<f64>,
    kept: usize,
    fit: CorrelationFit,
    radii: Vec<f64>,
    cint: Vec<f64>,
}

fn evaluate(series: &[f64], m: usize, tau: usize, cfg: &AlbanoConfig) -> Result<Evaluation> {
    let window = (m - 1) * tau;
    if series.len() <= window {
        return Err(Error::domain(format!("series too short for m = {m}, tau = {tau}")));
    }
    let available = series.len() - window;
    let stride = available.div_ceil(cfg.max_points.max(1)).max(1);
    let e = embed(series, m, tau, stride)?;
    let red = svd_reduce(&e, cfg.threshold)?;
    let theiler_samples = cfg.theiler.unwrap_or(tau * m);
    let theiler = theiler_samples.div_ceil(stride);
    let q = pair_distance_quantiles(
        &red.projected,
        theiler,
        &[cfg.radius_quantiles.0, cfg.radius_quantiles.1],
        cfg.quantile_samples,
        cfg.seed,
    )?;
    if !(q[0] > 0.0) {
        return Err(Error::domain(format!("embedding at m = {m} has coincident points")));
    }
    let radii = log_radii(q[0], q[1], cfg.radii_count)?;
    let cint = correlation_integral(&red.projected, &radii, theiler)?;
    let fit = correlation_dimension(&radii, &cint)?;
    Ok(Evaluation {
        m,
        stride,
        theiler,
        singular_values: red.normalized(),
        kept: red.kept,
        fit,
        radii,
        cint,
    })
}

/// Correlation dimension with an embedding grown until `m ≥ 2d + 1`.
///
/// Starts from a window of `window_factor` correlation times, increments `m`
/// until Takens' bound holds (or `m_max` is hit), then scans a few larger `m`
/// and keeps the one with the cleanest scaling fit.
pub fn albano_dimension(series: &[f64], cfg: &AlbanoConfig) -> Result<DimensionReport> {
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("series contains non-finite values"));
    }
    if cfg.m_max < 2 || !(cfg.threshold >= 0.0) {
        return Err(Error::domain("m_max must be at least 2 and threshold nonnegative"));
    }
    let max_lag = cfg.max_lag.unwrap_or(series.len() / 4).min(series.len().saturating_sub(1));
    let acf = autocorrelation(series, max_lag)?;
    let tau_corr = select_delay(&acf)?;
    let tau = cfg.tau.unwrap_or(tau_corr).max(1);
    let m0 = ((cfg.window_factor * tau_corr as f64 / tau as f64).ceil() as usize + 1).clamp(2, cfg.m_max);

    let mut m = m0;
    let mut current = evaluate(series, m, tau, cfg)?;
    let mut takens_found = m as f64 >= 2.0 * current.fit.slope + 1.0;
    while !takens_found && m < cfg.m_max {
        m += 1;
        current = evaluate(series, m, tau, cfg)?;
        takens_found = m as f64 >= 2.0 * current.fit.slope + 1.0;
    }
    let mut best = current;
    if takens_found {
        let top = (m + cfg.refine_span).min(cfg.m_max);
        for m_try in (m + 1)..=top {
            let candidate = match evaluate(series, m_try, tau, cfg) {
                Ok(c) => c,
                Err(_) => break,
            };
            if candidate.fit.r2 > best.fit.r2 {
                best = candidate;
            }
        }
    }
    let d = best.fit.slope;
    let takens_ok = best.m as f64 >= 2.0 * d + 1.0;
    Ok(DimensionReport {
        d,
        m_used: best.m,
        tau,
        stride: best.stride,
        theiler: best.theiler,
        singular_values: best.singular_values,
        kept: best.kept,
        low_confidence: best.fit.low_confidence || !takens_ok,
        fit: best.fit,
        radii: best.radii,
        cint: best.cint,
        takens_ok,
        acf,
    })
}
