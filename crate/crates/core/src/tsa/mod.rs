//! Attractor reconstruction from a scalar time series.
//!
//! The pipeline follows the classic delay-embedding route: pick a delay from
//! the autocorrelation function, embed, remove noise directions with an SVD,
//! then read a dimension off the log-log slope of the correlation integral,
//! growing the embedding until Takens' bound `m ≥ 2d + 1` is met. The largest
//! Lyapunov exponent comes from nearest-neighbour divergence in the same
//! embedding.

mod albano;
mod correlation;
mod delay;
mod lyapunov;
mod svd;

pub use albano::{albano_dimension, AlbanoConfig, DimensionReport};
pub use correlation::{
    correlation_dimension, correlation_integral, log_radii, pair_distance_quantiles, CorrelationFit,
    RADII_COUNT,
};
pub use delay::{autocorrelation, embed, select_delay, EmbeddingMatrix};
pub use lyapunov::{largest_lyapunov, LyapunovConfig, LyapunovEstimate};
pub use svd::{svd_reduce, svd_reduce_points, SvdReduction};

/// Row-major set of points of equal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    data: Vec<f64>,
}

impl PointCloud {
    /// `data.len()` must be a multiple of `dim`.
    pub fn new(dim: usize, data: Vec<f64>) -> Self {
        assert!(dim > 0 && data.len() % dim == 0, "ragged point data");
        PointCloud { dim, data }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let dim = rows.first().map_or(1, |r| r.as_ref().len());
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        PointCloud::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PointCloud::new(self.dim, self.data.iter().map(|x| x * factor).collect())
    }

    /// Every `stride`-th point, starting with the first.
    pub fn subsample(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let data = self.rows().step_by(stride).flatten().copied().collect();
        PointCloud::new(self.dim, data)
    }
}

#[inline]
pub(crate) fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[inline]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r²)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (slope, my - slope * mx, r2)
}
