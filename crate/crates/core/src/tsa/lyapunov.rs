use rayon::prelude::*;

use super::{embed, euclidean, linear_fit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovConfig {
    pub m: usize,
    /// Delay in samples.
    pub tau: usize,
    /// Minimum stride between delay vectors, in samples.
    pub stride: usize,
    /// Temporal exclusion for neighbour search, in samples. Defaults to `τ·m`.
    pub theiler: Option<usize>,
    /// Number of tracked steps (in strides).
    pub horizon: usize,
    pub fit_start: usize,
    /// Below this total rise of the divergence curve (in nats) the whole
    /// horizon is fitted.
    pub rise_threshold: f64,
    /// Fraction of the total rise that ends the linear region.
    pub saturation_fraction: f64,
    pub max_points: usize,
    /// Time between consecutive samples.
    pub sample_dt: f64,
}

impl LyapunovConfig {
    pub fn new(m: usize, tau: usize) -> Self {
        LyapunovConfig {
            m,
            tau,
            stride: 1,
            theiler: None,
            horizon: 20,
            fit_start: 1,
            rise_threshold: 1.0,
            saturation_fraction: 0.7,
            max_points: 5000,
            sample_dt: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    /// Largest exponent per unit time.
    pub lambda1: f64,
    /// Mean log-separation after `k` strides, `k = 0..=horizon`.
    pub divergence: Vec<f64>,
    /// Inclusive step range of the slope fit.
    pub fit_range: (usize, usize),
    pub fit_r2: f64,
    pub stride: usize,
    pub pairs: usize,
}

/// Largest Lyapunov exponent from mean nearest-neighbour divergence.
///
/// Each delay vector is paired with its closest neighbour outside the Theiler
/// window; the log of their separation is averaged over all pairs after `k`
/// strides, and the slope of that curve over its initial linear region gives
/// the exponent.
pub fn largest_lyapunov(series: &[f64], cfg: &LyapunovConfig) -> Result<LyapunovEstimate> {
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("series contains non-finite values"));
    }
    if !(cfg.sample_dt > 0.0) || cfg.horizon < cfg.fit_start + 2 {
        return Err(Error::domain("sample_dt must be positive and horizon at least fit_start + 2"));
    }
    let window = cfg.m.saturating_sub(1) * cfg.tau;
    if series.len() <= window {
        return Err(Error::domain("series shorter than the embedding window"));
    }
    let available = series.len() - window;
    let stride = cfg.stride.max(available.div_ceil(cfg.max_points.max(1))).max(1);
    let e = embed(series, cfg.m, cfg.tau, stride)?;
    let n = e.rows();
    if n < 200 {
        return Err(Error::domain(format!("{n} delay vectors; at least 200 needed")));
    }
    let theiler = cfg.theiler.unwrap_or(cfg.tau * cfg.m).div_ceil(stride);
    let horizon = cfg.horizon;
    if n <= horizon + 2 * theiler + 2 {
        return Err(Error::domain("too few delay vectors for the horizon and Theiler window"));
    }
    let usable = n - horizon;

    let neighbours: Vec<Option<usize>> = (0..usable)
        .into_par_iter()
        .map(|i| {
            let a = e.row(i);
            let mut best: Option<(usize, f64)> = None;
            for j in 0..usable {
                if i.abs_diff(j) <= theiler {
                    continue;
                }
                let d = euclidean(a, e.row(j));
                if d > 0.0 && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
            best.map(|(j, _)| j)
        })
        .collect();
    let pairs: Vec<(usize, usize)> =
        neighbours.iter().enumerate().filter_map(|(i, j)| j.map(|j| (i, j))).collect();
    if pairs.is_empty() {
        return Err(Error::domain("no nearest neighbours outside the Theiler window"));
    }

    let divergence: Vec<f64> = (0..=horizon)
        .map(|k| {
            let (sum, count) = pairs.iter().fold((0.0, 0usize), |(s, c), &(i, j)| {
                let d = euclidean(e.row(i + k), e.row(j + k));
                if d > 0.0 {
                    (s + d.ln(), c + 1)
                } else {
                    (s, c)
                }
            });
            if count == 0 {
                f64::NEG_INFINITY
            } else {
                sum / count as f64
            }
        })
        .collect();
    if divergence.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical("divergence curve collapsed to zero separation".into()));
    }

    let start = cfg.fit_start;
    let base = divergence[start];
    let rise = divergence[start..].iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s)) - base;
    let end = if rise < cfg.rise_threshold {
        horizon
    } else {
        let target = base + cfg.saturation_fraction * rise;
        let hit = (start..=horizon).find(|&k| divergence[k] >= target).unwrap_or(horizon);
        hit.max(start + 2)
    };
    let ks: Vec<f64> = (start..=end).map(|k| k as f64).collect();
    let (slope, _, r2) = linear_fit(&ks, &divergence[start..=end]);
    Ok(LyapunovEstimate {
        lambda1: slope / (stride as f64 * cfg.sample_dt),
        divergence,
        fit_range: (start, end),
        fit_r2: r2,
        stride,
        pairs: pairs.len(),
    })
}
