use super::PointCloud;
use crate::error::{Error, Result};

/// Mean-removed autocorrelation, normalized so that `acf[0] = 1`.
///
/// Uses the biased estimator `Σ_{i<n−k} x̃_i x̃_{i+k} / Σ x̃_i²`, which keeps
/// every value in `[-1, 1]`.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n <= max_lag {
        return Err(Error::domain(format!("series of length {n} too short for lag {max_lag}")));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let var: f64 = centered.iter().map(|x| x * x).sum();
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::domain("series has zero (or non-finite) variance"));
    }
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                centered[..n - k].iter().zip(&centered[k..]).map(|(a, b)| a * b).sum::<f64>() / var
            }
        })
        .collect())
}

/// Smallest lag `k ≥ 1` with `acf[k] ≤ 1/e`.
pub fn select_delay(acf: &[f64]) -> Result<usize> {
    let target = (-1.0f64).exp();
    acf.iter()
        .enumerate()
        .skip(1)
        .find(|(_, &a)| a <= target)
        .map(|(k, _)| k)
        .ok_or_else(|| {
            Error::domain(format!(
                "autocorrelation never falls to 1/e within {} lags; increase max_lag",
                acf.len().saturating_sub(1)
            ))
        })
}

/// Delay vectors `y_i = (x[i·l], x[i·l + τ], …, x[i·l + (m−1)τ])`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub m: usize,
    pub tau: usize,
    pub l: usize,
    pub points: PointCloud,
}

impl EmbeddingMatrix {
    pub fn window(&self) -> usize {
        (self.m - 1) * self.tau
    }

    pub fn rows(&self) -> usize {
        self.points.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }
}

pub fn embed(series: &[f64], m: usize, tau: usize, l: usize) -> Result<EmbeddingMatrix> {
    if m == 0 || tau == 0 || l == 0 {
        return Err(Error::domain("m, tau and l must all be at least 1"));
    }
    let window = (m - 1) * tau;
    if series.len() < window + 1 {
        return Err(Error::domain(format!(
            "series of length {} too short for window {window}",
            series.len()
        )));
    }
    let s = (series.len() - 1 - window) / l + 1;
    let mut data = Vec::with_capacity(s * m);
    for i in 0..s {
        let start = i * l;
        data.extend((0..m).map(|j| series[start + j * tau]));
    }
    Ok(EmbeddingMatrix { m, tau, l, points: PointCloud::new(m, data) })
}
