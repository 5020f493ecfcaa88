//! Polynomial Lyapunov functionals and the positivity machinery behind them.
//!
//! The functional `L_n = ∫ H_n(u, v, w, z)` is built from three positive
//! sequences `θ_r, σ_q, ρ_p` whose second ratios are the constants `θ², σ², ρ²`.
//! Its time derivative has a diffusive part that is a sum of quadratic forms
//! in the gradients with matrices `B_rqp`; these are positive definite exactly
//! when the triple `(θ², σ², ρ²)` satisfies three inequalities in the
//! pairwise constants `A_xy = (x + y) / (2√(xy))` of the diffusivities.

use crate::error::{Error, Result};
use crate::model::{GridState, Point4, SystemParams};

/// Symmetric 4×4 matrix as nested arrays.
pub type Mat4 = [[f64; 4]; 4];

/// Pairwise diffusivity constants. Each is `≥ 1`, with equality iff the two
/// diffusivities agree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConstants {
    pub a12: f64,
    pub a13: f64,
    pub a14: f64,
    pub a23: f64,
    pub a24: f64,
    pub a34: f64,
}

impl CouplingConstants {
    pub fn as_array(&self) -> [f64; 6] {
        [self.a12, self.a13, self.a14, self.a23, self.a24, self.a34]
    }
}

fn pair_constant(x: f64, y: f64) -> f64 {
    (x + y) / (2.0 * (x * y).sqrt())
}

pub fn coupling_constants(diffusion: [f64; 4]) -> Result<CouplingConstants> {
    if diffusion.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::domain(format!("diffusivities must be positive, got {diffusion:?}")));
    }
    let [a, b, c, d] = diffusion;
    Ok(CouplingConstants {
        a12: pair_constant(a, b),
        a13: pair_constant(a, c),
        a14: pair_constant(a, d),
        a23: pair_constant(b, c),
        a24: pair_constant(b, d),
        a34: pair_constant(c, d),
    })
}

/// The generating constants `(θ², σ², ρ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    pub theta2: f64,
    pub sigma2: f64,
    pub rho2: f64,
}

impl Triple {
    pub const fn new(theta2: f64, sigma2: f64, rho2: f64) -> Self {
        Triple { theta2, sigma2, rho2 }
    }
}

/// Evaluation of the three feasibility inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    /// `θ² − A12²`
    pub first_margin: f64,
    /// `Λ`
    pub second_margin: f64,
    /// `ΛV − Γ²`
    pub third_margin: f64,
    pub lambda: f64,
    pub v: f64,
    pub gamma: f64,
}

impl ConditionReport {
    pub fn holds(&self) -> [bool; 3] {
        [self.first_margin > 0.0, self.second_margin > 0.0, self.third_margin > 0.0]
    }

    pub fn all_hold(&self) -> bool {
        self.holds().iter().all(|&h| h)
    }

    pub fn margins(&self) -> [f64; 3] {
        [self.first_margin, self.second_margin, self.third_margin]
    }
}

pub fn check_conditions(a: &CouplingConstants, t: Triple) -> ConditionReport {
    let e12 = t.theta2 - a.a12 * a.a12;
    let x13 = a.a13 - a.a12 * a.a23;
    let x14 = a.a14 - a.a12 * a.a24;
    let lambda = e12 * (t.sigma2 - a.a23 * a.a23) - x13 * x13;
    let v = e12 * (t.sigma2 * t.rho2 - a.a24 * a.a24) - x14 * x14;
    let gamma = e12 * (a.a34 * t.sigma2 - a.a23 * a.a24) - x13 * x14;
    ConditionReport {
        first_margin: e12,
        second_margin: lambda,
        third_margin: lambda * v - gamma * gamma,
        lambda,
        v,
        gamma,
    }
}

const SEARCH_CAP: usize = 1_000_000;

/// For a predicate that is monotone (false below a threshold, true above),
/// locates the threshold by doubling then bisection and returns twice it.
fn grow_past<F: Fn(f64) -> bool>(holds: F) -> Option<f64> {
    let mut hi = 1.0;
    let mut steps = 0;
    while !holds(hi) {
        hi *= 2.0;
        steps += 1;
        if steps > SEARCH_CAP || !hi.is_finite() {
            return None;
        }
    }
    let mut lo = if steps == 0 { 0.0 } else { hi / 2.0 };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(if hi > 0.0 { 2.0 * hi } else { 1.0 })
}

/// A triple satisfying all three conditions.
///
/// `θ² = A12² + 1`; then `σ²` and `ρ²` are each set to twice the smallest
/// value that makes the next condition hold.
pub fn feasible_triple(a: &CouplingConstants) -> Result<Triple> {
    let theta2 = a.a12 * a.a12 + 1.0;
    let infeasible = |sigma2: f64, rho2: f64| {
        let r = check_conditions(a, Triple::new(theta2, sigma2, rho2));
        Error::Infeasible(format!(
            "search cap reached; margins {:?} at (θ², σ², ρ²) = ({theta2}, {sigma2}, {rho2})",
            r.margins()
        ))
    };
    let sigma2 = grow_past(|s| check_conditions(a, Triple::new(theta2, s, 1.0)).second_margin > 0.0)
        .ok_or_else(|| infeasible(f64::INFINITY, 1.0))?;
    let rho2 = grow_past(|r| check_conditions(a, Triple::new(theta2, sigma2, r)).third_margin > 0.0)
        .ok_or_else(|| infeasible(sigma2, f64::INFINITY))?;
    let triple = Triple::new(theta2, sigma2, rho2);
    let report = check_conditions(a, triple);
    if !report.all_hold() {
        return Err(Error::Infeasible(format!("margins {:?}", report.margins())));
    }
    Ok(triple)
}

/// `x_0 = first`, `x_{r+1} = x_r · ratio · growth^r`, length `n + 1`.
///
/// Any such sequence has constant second ratio `x_r x_{r+2} / x_{r+1}² = growth`.
pub fn build_sequence(first: f64, ratio: f64, growth: f64, n: usize) -> Result<Vec<f64>> {
    if !(first > 0.0 && ratio > 0.0 && growth > 0.0) {
        return Err(Error::domain("sequence generators must be positive"));
    }
    let mut seq = Vec::with_capacity(n + 1);
    seq.push(first);
    let mut factor = ratio;
    for r in 0..n {
        let next = seq[r] * factor;
        if !next.is_finite() || next == 0.0 {
            return Err(Error::Range(format!("sequence leaves f64 range at index {}", r + 1)));
        }
        seq.push(next);
        factor *= growth;
    }
    Ok(seq)
}

/// The three coefficient sequences of `H_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequences {
    pub theta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub rho: Vec<f64>,
}

impl CoefficientSequences {
    pub fn new(theta: Vec<f64>, sigma: Vec<f64>, rho: Vec<f64>) -> Self {
        CoefficientSequences { theta, sigma, rho }
    }

    /// All coefficients equal to one, length `n + 1`.
    pub fn ones(n: usize) -> Self {
        CoefficientSequences::new(vec![1.0; n + 1], vec![1.0; n + 1], vec![1.0; n + 1])
    }

    /// Sequences for `triple` whose consecutive ratios are all below one,
    /// rescaled so their magnitudes straddle one (scaling keeps the ratio
    /// identities).
    pub fn decreasing(triple: Triple, n: usize) -> Result<Self> {
        let make = |g: f64| -> Result<Vec<f64>> {
            let steps = n.saturating_sub(1) as i32;
            let ratio = 0.9 * if g > 1.0 { g.powi(-steps) } else { 1.0 };
            let seq = build_sequence(1.0, ratio, g, n)?;
            let (lo, hi) = seq.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            let scale = 1.0 / (lo.sqrt() * hi.sqrt());
            Ok(seq.into_iter().map(|x| x * scale).collect())
        };
        Ok(CoefficientSequences::new(make(triple.theta2)?, make(triple.sigma2)?, make(triple.rho2)?))
    }

    /// Largest `n` this set supports.
    pub fn degree(&self) -> usize {
        self.theta.len().min(self.sigma.len()).min(self.rho.len()).saturating_sub(1)
    }

    /// Sequences shifted by `(dr, dq, dp)`: `θ'_r = θ_{r+dr}` and so on.
    pub fn shifted(&self, dr: usize, dq: usize, dp: usize) -> Self {
        CoefficientSequences::new(
            self.theta[dr.min(self.theta.len())..].to_vec(),
            self.sigma[dq.min(self.sigma.len())..].to_vec(),
            self.rho[dp.min(self.rho.len())..].to_vec(),
        )
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact triple sum
/// `H_n = Σ_p Σ_q Σ_r C(n,p) C(p,q) C(q,r) θ_r σ_q ρ_p u^r v^(q−r) w^(p−q) z^(n−p)`.
pub fn eval_hn(x: Point4, seqs: &CoefficientSequences, n: usize) -> Result<f64> {
    if seqs.degree() < n {
        return Err(Error::domain(format!(
            "sequences of degree {} cannot evaluate H_{n}",
            seqs.degree()
        )));
    }
    let Point4 { u, v, w, z } = x;
    let mut total = 0.0;
    for p in 0..=n {
        let cp = binomial(n, p) * seqs.rho[p] * z.powi((n - p) as i32);
        for q in 0..=p {
            let cq = binomial(p, q) * seqs.sigma[q] * w.powi((p - q) as i32);
            for r in 0..=q {
                total += cp * cq * binomial(q, r) * seqs.theta[r] * u.powi(r as i32) * v.powi((q - r) as i32);
            }
        }
    }
    Ok(total)
}

fn cell_sum<F: Fn(Point4) -> f64>(state: &GridState, f: F) -> f64 {
    let nx = state.nx;
    let rows: Vec<f64> = (0..state.ny)
        .map(|iy| (0..nx).map(|ix| f(state.point(ix, iy))).sum())
        .collect();
    rows.into_iter().sum::<f64>() * state.cell_area()
}

/// Midpoint quadrature of `H_n` over the grid.
pub fn eval_ln(state: &GridState, seqs: &CoefficientSequences, n: usize) -> Result<f64> {
    if seqs.degree() < n {
        return Err(Error::domain("sequences too short for requested degree"));
    }
    // degree checked above, so the per-cell evaluation cannot fail
    Ok(cell_sum(state, |x| eval_hn(x, seqs, n).unwrap_or(f64::NAN)))
}

/// `∫ (v^p + δ z^p)` with `δ = D2 / D4`.
pub fn eval_kp(state: &GridState, p: f64, d2: f64, d4: f64) -> Result<f64> {
    if p < 2.0 {
        return Err(Error::domain(format!("exponent must be at least 2, got {p}")));
    }
    if !(d2 > 0.0 && d4 > 0.0) {
        return Err(Error::domain("coupling rates must be positive"));
    }
    let delta = d2 / d4;
    Ok(cell_sum(state, |x| x.v.powf(p) + delta * x.z.powf(p)))
}

/// The gradient quadratic form matrix for index triple `(r, q, p)`.
///
/// Entries follow the Hessian of `H_n`, so the matrix is symmetric; the
/// diagonal carries the diffusivities and each off-diagonal pair the mean of
/// its two diffusivities.
pub fn brqp_matrix(
    r: usize,
    q: usize,
    p: usize,
    seqs: &CoefficientSequences,
    diffusion: [f64; 4],
) -> Result<Mat4> {
    if !(r <= q && q <= p) {
        return Err(Error::domain(format!("need r <= q <= p, got ({r}, {q}, {p})")));
    }
    if p + 2 >= seqs.rho.len() || q + 2 >= seqs.sigma.len() || r + 2 >= seqs.theta.len() {
        return Err(Error::Range(format!("index ({r}, {q}, {p}) + 2 exceeds sequence length")));
    }
    let [a, b, c, d] = diffusion;
    let (t, s, h) = (&seqs.theta, &seqs.sigma, &seqs.rho);
    let mut m = [[0.0; 4]; 4];
    m[0][0] = a * h[p + 2] * s[q + 2] * t[r + 2];
    m[1][1] = b * h[p + 2] * s[q + 2] * t[r];
    m[2][2] = c * h[p + 2] * s[q] * t[r];
    m[3][3] = d * h[p] * s[q] * t[r];
    m[0][1] = 0.5 * (a + b) * h[p + 2] * s[q + 2] * t[r + 1];
    m[0][2] = 0.5 * (a + c) * h[p + 2] * s[q + 1] * t[r + 1];
    m[0][3] = 0.5 * (a + d) * h[p + 1] * s[q + 1] * t[r + 1];
    m[1][2] = 0.5 * (b + c) * h[p + 2] * s[q + 1] * t[r];
    m[1][3] = 0.5 * (b + d) * h[p + 1] * s[q + 1] * t[r];
    m[2][3] = 0.5 * (c + d) * h[p + 1] * s[q] * t[r];
    for i in 0..4 {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    Ok(m)
}

/// Leading principal minors `Δ1..Δ4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinorSet {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl MinorSet {
    pub fn as_array(&self) -> [f64; 4] {
        [self.d1, self.d2, self.d3, self.d4]
    }

    /// Sylvester's criterion.
    pub fn positive_definite(&self) -> bool {
        self.as_array().iter().all(|&x| x > 0.0)
    }
}

fn det3(m: &Mat4, rows: [usize; 3], cols: [usize; 3]) -> f64 {
    let e = |i: usize, j: usize| m[rows[i]][cols[j]];
    e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
}

/// Determinant by cofactor expansion along the first row.
pub fn det4(m: &Mat4) -> f64 {
    let rows = [1, 2, 3];
    m[0][0] * det3(m, rows, [1, 2, 3]) - m[0][1] * det3(m, rows, [0, 2, 3]) + m[0][2] * det3(m, rows, [0, 1, 3])
        - m[0][3] * det3(m, rows, [0, 1, 2])
}

pub fn sylvester_minors(m: &Mat4) -> Result<MinorSet> {
    let scale = m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    for i in 0..4 {
        for j in 0..i {
            if (m[i][j] - m[j][i]).abs() > 1e-10 * scale {
                return Err(Error::domain(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(MinorSet {
        d1: m[0][0],
        d2: m[0][0] * m[1][1] - m[0][1] * m[1][0],
        d3: det3(m, [0, 1, 2], [0, 1, 2]),
        d4: det4(m),
    })
}

/// Closed form of `Δ2` for `B_rqp`:
/// `ab ρ_{p+2}² σ_{q+2}² θ_{r+1}² (θ² − A12²)`.
pub fn closed_form_delta2(
    r: usize,
    q: usize,
    p: usize,
    seqs: &CoefficientSequences,
    diffusion: [f64; 4],
    theta2: f64,
) -> f64 {
    let [a, b, _, _] = diffusion;
    let a12 = pair_constant(a, b);
    a * b * seqs.rho[p + 2].powi(2) * seqs.sigma[q + 2].powi(2) * seqs.theta[r + 1].powi(2) * (theta2 - a12 * a12)
}

/// Closed form of `Δ3` for `B_rqp`:
/// `abc ρ_{p+2}³ σ_{q+2} σ_{q+1}² θ_{r+1}² θ_r · Λ`.
pub fn closed_form_delta3(
    r: usize,
    q: usize,
    p: usize,
    seqs: &CoefficientSequences,
    diffusion: [f64; 4],
    triple: Triple,
) -> Result<f64> {
    let [a, b, c, _] = diffusion;
    let k = coupling_constants(diffusion)?;
    let lambda = check_conditions(&k, triple).lambda;
    Ok(a * b
        * c
        * seqs.rho[p + 2].powi(3)
        * seqs.sigma[q + 2]
        * seqs.sigma[q + 1].powi(2)
        * seqs.theta[r + 1].powi(2)
        * seqs.theta[r]
        * lambda)
}

/// Closed form of `(θ² − A12²) Δ4` for `B_rqp`:
/// `abcd ρ_{p+2}² ρ_{p+1}² σ_{q+1}⁴ θ_{r+1}² θ_r² (ΛV − Γ²)`.
pub fn closed_form_scaled_delta4(
    r: usize,
    q: usize,
    p: usize,
    seqs: &CoefficientSequences,
    diffusion: [f64; 4],
    triple: Triple,
) -> Result<f64> {
    let [a, b, c, d] = diffusion;
    let k = coupling_constants(diffusion)?;
    let margin = check_conditions(&k, triple).third_margin;
    Ok(a * b
        * c
        * d
        * (seqs.rho[p + 2] * seqs.rho[p + 1]).powi(2)
        * seqs.sigma[q + 1].powi(4)
        * (seqs.theta[r + 1] * seqs.theta[r]).powi(2)
        * margin)
}

/// Both sides of the bordered-determinant identity
/// `a11² (a11 a22 − a12²) det A = P Q − R²`.
pub fn bordered_determinant_sides(m: &Mat4) -> (f64, f64) {
    let a = |i: usize, j: usize| m[i - 1][j - 1];
    let m12 = a(1, 1) * a(2, 2) - a(1, 2) * a(1, 2);
    let x13 = a(1, 1) * a(2, 3) - a(1, 2) * a(1, 3);
    let x14 = a(1, 1) * a(2, 4) - a(1, 2) * a(1, 4);
    let p = m12 * (a(1, 1) * a(3, 3) - a(1, 3) * a(1, 3)) - x13 * x13;
    let q = m12 * (a(1, 1) * a(4, 4) - a(1, 4) * a(1, 4)) - x14 * x14;
    let r = m12 * (a(1, 1) * a(3, 4) - a(1, 3) * a(1, 4)) - x13 * x14;
    (a(1, 1).powi(2) * m12 * det4(m), p * q - r * r)
}

/// Outcome of [`decay_monitor`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub absorbed: bool,
    /// Median of the block-max envelope over the last quarter.
    pub plateau: f64,
    /// Last-quarter envelope maximum over its median.
    pub ratio: f64,
    /// `(block end time, block max)`.
    pub envelope: Vec<(f64, f64)>,
}

/// Tolerance on the last-quarter envelope spread.
pub const PLATEAU_TOLERANCE: f64 = 1.05;
const ENVELOPE_BLOCKS: usize = 40;

/// Decides whether a functional has settled into a bounded set.
///
/// The series is cut into up to 40 blocks and the block maxima form a
/// sup-envelope. The functional counts as absorbed when the envelope is
/// finite and, over the last quarter of blocks, its maximum is within 5% of
/// its median; the plateau is that median.
pub fn decay_monitor(series: &[(f64, f64)]) -> Result<DecayReport> {
    if series.len() < 2 {
        return Err(Error::domain("decay monitor needs at least two samples"));
    }
    let blocks = series.len().min(ENVELOPE_BLOCKS);
    let envelope: Vec<(f64, f64)> = (0..blocks)
        .map(|b| {
            let lo = b * series.len() / blocks;
            let hi = (b + 1) * series.len() / blocks;
            let chunk = &series[lo..hi];
            let max = chunk.iter().map(|s| s.1).fold(f64::NEG_INFINITY, |m, x| if x.is_nan() { f64::NAN } else { m.max(x) });
            (chunk[chunk.len() - 1].0, max)
        })
        .collect();
    let tail_len = blocks.div_ceil(4).max(1);
    let mut tail: Vec<f64> = envelope[blocks - tail_len..].iter().map(|e| e.1).collect();
    let finite = envelope.iter().all(|e| e.1.is_finite());
    tail.sort_by(|a, b| a.total_cmp(b));
    let median = if tail.len() % 2 == 1 {
        tail[tail.len() / 2]
    } else {
        0.5 * (tail[tail.len() / 2 - 1] + tail[tail.len() / 2])
    };
    let max = *tail.last().unwrap_or(&f64::NAN);
    let ratio = if median != 0.0 { max / median } else if max == 0.0 { 1.0 } else { f64::INFINITY };
    let absorbed = finite && (max <= PLATEAU_TOLERANCE * median || max == median);
    Ok(DecayReport { absorbed, plateau: median, ratio, envelope })
}

/// The `L2` and `K2` functionals used as runtime monitors for a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalMonitor {
    pub triple: Option<Triple>,
    pub seqs: CoefficientSequences,
    pub delta: f64,
}

impl FunctionalMonitor {
    /// Uses a feasible triple when all diffusivities are positive, and unit
    /// coefficients otherwise (the gradient conditions are then vacuous).
    pub fn for_params(params: &SystemParams) -> Result<Self> {
        let (triple, seqs) = match coupling_constants(params.diffusion) {
            Ok(k) => {
                let t = feasible_triple(&k)?;
                (Some(t), CoefficientSequences::decreasing(t, 2)?)
            }
            Err(_) => (None, CoefficientSequences::ones(2)),
        };
        let [_, d2, _, d4] = params.coupling;
        let delta = if d4 > 0.0 { d2 / d4 } else { 1.0 };
        Ok(FunctionalMonitor { triple, seqs, delta })
    }

    pub fn l2(&self, state: &GridState) -> f64 {
        cell_sum(state, |x| eval_hn(x, &self.seqs, 2).unwrap_or(f64::NAN))
    }

    pub fn k2(&self, state: &GridState) -> f64 {
        cell_sum(state, |x| x.v * x.v + self.delta * x.z * x.z)
    }
}
