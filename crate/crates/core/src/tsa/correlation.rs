use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{linear_fit, max_norm, PointCloud};
use crate::error::{Error, Result};

/// Default number of radii sampled for the correlation integral.
pub const RADII_COUNT: usize = 40;

/// Minimum number of radii in a scaling window.
const MIN_WINDOW: usize = 5;
/// Minimum number of radii with `C > 0` needed for a fit.
const MIN_POSITIVE: usize = 8;
/// Minimum extent of a scaling window in decades of `r`.
const MIN_SPAN_DECADES: f64 = 0.5;
/// Fits whose `r²` differ by less than this count as tied.
const R2_TIE: f64 = 1e-12;
const LOW_R2: f64 = 0.95;

fn usable_pairs(n: usize, theiler: usize) -> u64 {
    (0..n).map(|i| n.saturating_sub(i + 1 + theiler) as u64).sum()
}

/// Fraction of point pairs `(i, j)`, `j − i > theiler`, whose max-norm
/// distance is strictly below each radius.
///
/// `radii` must be positive and increasing. The normalization is the number of
/// pairs that survive the temporal exclusion, so `C → 1` for large radii.
pub fn correlation_integral(points: &PointCloud, radii: &[f64], theiler: usize) -> Result<Vec<f64>> {
    if radii.is_empty() {
        return Err(Error::domain("no radii"));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("radii must be positive and strictly increasing"));
    }
    let n = points.len();
    let total = usable_pairs(n, theiler);
    if total == 0 {
        return Err(Error::domain(format!("no pairs left among {n} points with Theiler window {theiler}")));
    }
    let r_max = *radii.last().unwrap();
    let bins = radii.len();
    let hist = (0..n)
        .into_par_iter()
        .fold(
            || vec![0u64; bins],
            |mut hist, i| {
                let a = points.row(i);
                for j in (i + 1 + theiler)..n {
                    let b = points.row(j);
                    let mut d = 0.0f64;
                    for (x, y) in a.iter().zip(b) {
                        d = d.max((x - y).abs());
                        if d >= r_max {
                            break;
                        }
                    }
                    if d < r_max {
                        hist[radii.partition_point(|&r| r <= d)] += 1;
                    }
                }
                hist
            },
        )
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut acc = 0u64;
    Ok(hist
        .into_iter()
        .map(|h| {
            acc += h;
            acc as f64 / total as f64
        })
        .collect())
}

/// Empirical quantiles of pair distances (max norm, Theiler-excluded).
///
/// All usable pairs are used when there are at most `samples` of them;
/// otherwise `samples` pairs are drawn with a seeded generator.
pub fn pair_distance_quantiles(
    points: &PointCloud,
    theiler: usize,
    quantiles: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = points.len();
    let total = usable_pairs(n, theiler);
    if total == 0 {
        return Err(Error::domain("no usable pairs"));
    }
    let mut dist = Vec::new();
    if total <= samples as u64 {
        for i in 0..n {
            for j in (i + 1 + theiler)..n {
                dist.push(max_norm(points.row(i), points.row(j)));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while dist.len() < samples {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i.abs_diff(j) > theiler {
                dist.push(max_norm(points.row(i), points.row(j)));
            }
        }
    }
    dist.sort_by(f64::total_cmp);
    Ok(quantiles
        .iter()
        .map(|q| {
            let pos = (q.clamp(0.0, 1.0) * (dist.len() - 1) as f64).round() as usize;
            dist[pos]
        })
        .collect())
}

/// `count` radii evenly spaced in `log r` from `lo` to `hi` inclusive.
pub fn log_radii(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || count < 2 {
        return Err(Error::domain(format!("invalid radius range [{lo}, {hi}] with {count} radii")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|k| {
            if k + 1 == count {
                hi
            } else {
                (a + (b - a) * k as f64 / (count - 1) as f64).exp()
            }
        })
        .collect())
}

/// Straight-line fit of `log10 C` against `log10 r` over a scaling window.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Inclusive index range of the window in the input radii.
    pub window: (usize, usize),
    pub r_lo: f64,
    pub r_hi: f64,
    pub low_confidence: bool,
}

/// Picks the scaling window and returns its slope.
///
/// Candidate windows hold at least five consecutive radii with `C > 0` and
/// span half a decade. The best `r²` wins, ties going to the wider window.
/// Without any such window the fit uses every positive point and is flagged
/// low-confidence, as is any fit with `r² < 0.95`.
pub fn correlation_dimension(radii: &[f64], c: &[f64]) -> Result<CorrelationFit> {
    if radii.len() != c.len() {
        return Err(Error::domain("radii and correlation values differ in length"));
    }
    let idx: Vec<usize> = (0..radii.len()).filter(|&k| c[k] > 0.0 && radii[k] > 0.0).collect();
    if idx.len() < MIN_POSITIVE {
        return Err(Error::domain(format!(
            "only {} radii with C(r) > 0; need {MIN_POSITIVE}",
            idx.len()
        )));
    }
    let lx: Vec<f64> = idx.iter().map(|&k| radii[k].log10()).collect();
    let ly: Vec<f64> = idx.iter().map(|&k| c[k].log10()).collect();

    let mut candidates = Vec::new();
    for a in 0..lx.len() {
        for b in (a + MIN_WINDOW - 1)..lx.len() {
            if lx[b] - lx[a] < MIN_SPAN_DECADES {
                continue;
            }
            let (slope, intercept, r2) = linear_fit(&lx[a..=b], &ly[a..=b]);
            candidates.push((a, b, slope, intercept, r2));
        }
    }
    let (a, b, slope, intercept, r2, fallback) = if candidates.is_empty() {
        let (slope, intercept, r2) = linear_fit(&lx, &ly);
        (0, lx.len() - 1, slope, intercept, r2, true)
    } else {
        let best = candidates.iter().map(|c| c.4).fold(f64::NEG_INFINITY, f64::max);
        let &(a, b, slope, intercept, r2) = candidates
            .iter()
            .filter(|c| c.4 >= best - R2_TIE)
            .max_by(|x, y| (x.1 - x.0).cmp(&(y.1 - y.0)).then(y.0.cmp(&x.0)))
            .unwrap();
        (a, b, slope, intercept, r2, false)
    };
    Ok(CorrelationFit {
        slope,
        intercept,
        r2,
        window: (idx[a], idx[b]),
        r_lo: radii[idx[a]],
        r_hi: radii[idx[b]],
        low_confidence: fallback || r2 < LOW_R2,
    })
}
