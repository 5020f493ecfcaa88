use nalgebra::{DMatrix, SymmetricEigen};

use super::{EmbeddingMatrix, PointCloud};
use crate::error::{Error, Result};

/// Singular directions of a column-centred point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdReduction {
    /// Singular values of the centred matrix, nonincreasing.
    pub singular_values: Vec<f64>,
    /// Right singular vectors, one per singular value.
    pub basis: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Number of leading directions with `σ_i / σ_max ≥ threshold`.
    pub kept: usize,
    /// Centred points projected onto the kept directions.
    pub projected: PointCloud,
}

impl SvdReduction {
    pub fn normalized(&self) -> Vec<f64> {
        let top = self.singular_values[0];
        self.singular_values.iter().map(|s| s / top).collect()
    }
}

/// Relative size below which a singular value counts as zero. Gram-matrix
/// eigenvalues resolve singular values only to about `√ε · σ_max`.
const RANK_TOL: f64 = 1e-7;

/// Reduces a point cloud to its significant singular directions.
///
/// The spectrum comes from the eigendecomposition of the `m × m` second-moment
/// matrix of the centred columns.
pub fn svd_reduce_points(points: &PointCloud, threshold: f64) -> Result<SvdReduction> {
    let (n, m) = (points.len(), points.dim());
    if n < m {
        return Err(Error::domain(format!("need at least {m} rows, got {n}")));
    }
    if !(threshold >= 0.0) {
        return Err(Error::domain("threshold must be nonnegative"));
    }
    let mut mean = vec![0.0; m];
    for row in points.rows() {
        for (acc, x) in mean.iter_mut().zip(row) {
            *acc += x;
        }
    }
    mean.iter_mut().for_each(|x| *x /= n as f64);

    let mut gram = DMatrix::<f64>::zeros(m, m);
    let mut centred = vec![0.0; m];
    for row in points.rows() {
        for (c, (x, mu)) in centred.iter_mut().zip(row.iter().zip(&mean)) {
            *c = x - mu;
        }
        for i in 0..m {
            let ci = centred[i];
            for j in i..m {
                gram[(i, j)] += ci * centred[j];
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()).collect();
    let basis: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();

    let top = singular_values[0];
    if !(top > 0.0) || !top.is_finite() {
        return Err(Error::domain("degenerate embedding: all rows identical"));
    }
    let kept = singular_values
        .iter()
        .take_while(|&&s| s / top >= threshold && s / top > RANK_TOL)
        .count();
    if kept == 0 {
        return Err(Error::domain("no singular direction above threshold"));
    }

    let mut data = Vec::with_capacity(n * kept);
    for row in points.rows() {
        for dir in &basis[..kept] {
            data.push(row.iter().zip(&mean).zip(dir).map(|((x, mu), v)| (x - mu) * v).sum());
        }
    }
    Ok(SvdReduction { singular_values, basis, mean, kept, projected: PointCloud::new(kept, data) })
}

pub fn svd_reduce(y: &EmbeddingMatrix, threshold: f64) -> Result<SvdReduction> {
    svd_reduce_points(&y.points, threshold)
}
