//! Linear stability of the uniform equilibrium and attractor dimension bounds.
//!
//! Around `(α, β/α, α, β/α)` each Neumann eigenmode of `−Δ` with eigenvalue
//! `μ` evolves under the 4×4 matrix
//!
//! ```text
//! [ −aμ + β − 1 − D1,  α²,             D1,               0            ]
//! [ −β,                −bμ − D2 − α²,  0,                D2           ]
//! [ D3,                0,              −cμ + β − 1 − D3, α²           ]
//! [ 0,                 D4,             −β,               −dμ − D4 − α²]
//! ```

use std::f64::consts::PI;

use nalgebra::{Complex, Matrix4};

use crate::error::{Error, Result};
use crate::model::SystemParams;

pub type C64 = Complex<f64>;

/// Eigenvalues of `−Δ` with Neumann conditions on `[0, lx] × [0, ly]`
/// (or on `[0, lx]` when `ly` is `None`), ascending with multiplicity.
pub fn neumann_eigenvalues(lx: f64, ly: Option<f64>, count: usize) -> Result<Vec<f64>> {
    if !(lx > 0.0 && lx.is_finite()) || ly.is_some_and(|l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::domain("domain lengths must be positive"));
    }
    if count == 0 {
        return Err(Error::domain("count must be at least 1"));
    }
    let kx = PI * PI / (lx * lx);
    let Some(ly) = ly else {
        return Ok((0..count).map(|j| kx * (j * j) as f64).collect());
    };
    let ky = PI * PI / (ly * ly);
    // Grow a bound until enough lattice points fall below it.
    let mut bound = (kx.max(ky)) * (count as f64).max(4.0);
    loop {
        let jmax = (bound / kx).sqrt().floor() as usize;
        let mut values = Vec::new();
        for j in 0..=jmax {
            let rest = bound - kx * (j * j) as f64;
            if rest < 0.0 {
                break;
            }
            let kmax = (rest / ky).sqrt().floor() as usize;
            values.extend((0..=kmax).map(|k| kx * (j * j) as f64 + ky * (k * k) as f64));
        }
        if values.len() >= count {
            values.sort_by(|a, b| a.total_cmp(b));
            values.truncate(count);
            return Ok(values);
        }
        bound *= 2.0;
    }
}

/// Linearization about the uniform equilibrium for Laplacian eigenvalue `mu`.
pub fn mode_matrix(mu: f64, params: &SystemParams) -> Matrix4<f64> {
    let SystemParams { alpha, beta, coupling: [d1, d2, d3, d4], diffusion: [a, b, c, d] } = *params;
    let a2 = alpha * alpha;
    Matrix4::new(
        -a * mu + beta - 1.0 - d1, a2, d1, 0.0,
        -beta, -b * mu - d2 - a2, 0.0, d2,
        d3, 0.0, -c * mu + beta - 1.0 - d3, a2,
        0.0, d4, -beta, -d * mu - d4 - a2,
    )
}

/// `−(a+b+c+d)μ + 2(β − 1 − α²) − ΣD`, the trace of [`mode_matrix`].
pub fn mode_trace(mu: f64, params: &SystemParams) -> f64 {
    -params.diffusion_sum() * mu + instability_bracket(params)
}

/// `2(β − 1 − α²) − (D1 + D2 + D3 + D4)`.
pub fn instability_bracket(params: &SystemParams) -> f64 {
    2.0 * (params.beta - 1.0 - params.alpha * params.alpha) - params.coupling_sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    pub mu: f64,
    pub eigenvalues: [C64; 4],
    pub trace: f64,
    /// Largest `‖Mv − λv‖ / ‖M‖` over the four eigenpairs.
    pub max_residual: f64,
}

impl ModeSpectrum {
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_unstable(&self) -> bool {
        self.max_real_part() > 0.0
    }
}

/// Residual tolerance of eigenpairs relative to `‖M‖`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

/// Unit vector spanning the (numerical) null space of `M − λI`.
fn eigenvector(m: &Matrix4<C64>, lambda: C64) -> nalgebra::Vector4<C64> {
    let shifted = m - Matrix4::<C64>::identity() * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &s)| if s < bv { (i, s) } else { (bi, bv) });
    v_t.row(imin).adjoint()
}

pub fn mode_spectrum(mu: f64, params: &SystemParams) -> Result<ModeSpectrum> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::domain(format!("Laplacian eigenvalue must be nonnegative, got {mu}")));
    }
    let m = mode_matrix(mu, params);
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("non-finite linearization"));
    }
    let raw = m.complex_eigenvalues();
    let mut eigenvalues = [C64::new(0.0, 0.0); 4];
    for (slot, l) in eigenvalues.iter_mut().zip(raw.iter()) {
        *slot = *l;
    }
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));

    let mc: Matrix4<C64> = m.map(|x| C64::new(x, 0.0));
    let norm = m.norm().max(f64::MIN_POSITIVE);
    let mut max_residual: f64 = 0.0;
    for &l in &eigenvalues {
        let v = eigenvector(&mc, l);
        let r = (&mc * &v - v * l).norm() / norm;
        max_residual = max_residual.max(r);
    }
    if !(max_residual <= EIGEN_RESIDUAL_TOL) {
        return Err(Error::Numerical(format!(
            "eigenpair residual {max_residual:e} exceeds tolerance at mu = {mu}"
        )));
    }
    Ok(ModeSpectrum { mu, eigenvalues, trace: m.trace(), max_residual })
}

/// Coefficients `[c0, c1, c2, c3]` of `det(λI − M) = λ⁴ + c3 λ³ + c2 λ² + c1 λ + c0`
/// by the Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(m: &Matrix4<f64>) -> [f64; 4] {
    let id = Matrix4::<f64>::identity();
    let mut coeffs = [0.0; 4];
    let mut mk = Matrix4::<f64>::zeros();
    let mut c_prev = 1.0;
    for k in 1..=4 {
        mk = m * mk + id * c_prev;
        let c = -(m * mk).trace() / k as f64;
        coeffs[4 - k] = c;
        c_prev = c;
    }
    coeffs
}

/// Counts of unstable Laplacian modes among the first `max_modes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnstableCounts {
    /// Modes with positive eigenvalue sum (trace criterion).
    pub trace_count: usize,
    /// Modes with at least one eigenvalue in the open right half-plane.
    pub full_count: usize,
}

pub fn unstable_mode_count(
    params: &SystemParams,
    lx: f64,
    ly: Option<f64>,
    max_modes: usize,
) -> Result<UnstableCounts> {
    let mus = neumann_eigenvalues(lx, ly, max_modes)?;
    let trace_count = mus.iter().filter(|&&mu| mode_trace(mu, params) > 0.0).count();
    let mut full_count = 0;
    for &mu in &mus {
        if mode_spectrum(mu, params)?.is_unstable() {
            full_count += 1;
        }
    }
    Ok(UnstableCounts { trace_count, full_count })
}

/// Inputs of [`dimension_bounds`] beyond the model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsSpec {
    /// Spatial dimension `N` (1, 2 or 3).
    pub n_dim: u32,
    pub k_prime: f64,
    pub k1: f64,
    pub c_upper: f64,
    pub omega_volume: f64,
    /// Rectangle for mode counting; `ly = None` for an interval.
    pub lx: f64,
    pub ly: Option<f64>,
    pub max_modes: usize,
}

impl Default for BoundsSpec {
    fn default() -> Self {
        BoundsSpec {
            n_dim: 2,
            k_prime: 1.0,
            k1: 1.0,
            c_upper: 1.0,
            omega_volume: 500.0 * 500.0,
            lx: 500.0,
            ly: Some(500.0),
            max_modes: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `[2(β−1−α²) − ΣD] / (a+b+c+d)`.
    pub lower_bound_base: f64,
    pub n_dim: u32,
    pub k_prime: f64,
    /// `K′ · max(base, 0)^(N/2)`.
    pub lower: f64,
    /// `(C / K1)^(3/2) |Ω| + 1`.
    pub upper: f64,
    pub trace_unstable_count: usize,
    pub full_unstable_count: usize,
}

pub fn lower_bound_base(params: &SystemParams) -> Result<f64> {
    let total = params.diffusion_sum();
    if !(total > 0.0) {
        return Err(Error::domain("sum of diffusivities must be positive"));
    }
    Ok(instability_bracket(params) / total)
}

pub fn dimension_bounds(params: &SystemParams, spec: &BoundsSpec) -> Result<BoundReport> {
    if !(1..=3).contains(&spec.n_dim) {
        return Err(Error::domain(format!("spatial dimension must be 1, 2 or 3, got {}", spec.n_dim)));
    }
    if !(spec.k1 > 0.0) {
        return Err(Error::domain(format!("K1 must be positive, got {}", spec.k1)));
    }
    let base = lower_bound_base(params)?;
    let lower = spec.k_prime * base.max(0.0).powf(spec.n_dim as f64 / 2.0);
    let upper = (spec.c_upper / spec.k1).powf(1.5) * spec.omega_volume + 1.0;
    let counts = unstable_mode_count(params, spec.lx, spec.ly, spec.max_modes)?;
    Ok(BoundReport {
        lower_bound_base: base,
        n_dim: spec.n_dim,
        k_prime: spec.k_prime,
        lower,
        upper,
        trace_unstable_count: counts.trace_count,
        full_unstable_count: counts.full_count,
    })
}

/// `K′ = d_observed / base^(N/2)`.
pub fn extract_k_prime(d_observed: f64, params: &SystemParams, n_dim: u32) -> Result<f64> {
    let base = lower_bound_base(params)?;
    if !(base > 0.0) {
        return Err(Error::domain(format!("lower-bound base {base} is not positive")));
    }
    Ok(d_observed / base.powf(n_dim as f64 / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumann_spectrum_on_pi_square() {
        let mus = neumann_eigenvalues(PI, Some(PI), 8).unwrap();
        let expect = [0.0, 1.0, 1.0, 2.0, 4.0, 4.0, 5.0, 5.0];
        for (m, e) in mus.iter().zip(expect) {
            assert!((m - e).abs() < 1e-12, "{mus:?}");
        }
    }

    #[test]
    fn neumann_spectrum_one_dimensional() {
        let mus = neumann_eigenvalues(2.0, None, 5).unwrap();
        for (j, m) in mus.iter().enumerate() {
            assert!((m - PI * PI * (j * j) as f64 / 4.0).abs() < 1e-12);
        }
        assert!(neumann_eigenvalues(0.0, None, 3).is_err());
        assert!(neumann_eigenvalues(1.0, Some(1.0), 0).is_err());
    }

    #[test]
    fn degenerate_linearization_is_diagonal() {
        let p = SystemParams { alpha: 0.0, beta: 0.0, coupling: [0.0; 4], diffusion: [1.0; 4] };
        let s = mode_spectrum(0.0, &p).unwrap();
        let mut re: Vec<f64> = s.eigenvalues.iter().map(|l| l.re).collect();
        re.sort_by(|a, b| a.total_cmp(b));
        assert_eq!(re, vec![-1.0, -1.0, 0.0, 0.0]);
        assert!(s.eigenvalues.iter().all(|l| l.im == 0.0));
    }

    #[test]
    fn trace_matches_eigenvalue_sum() {
        let p = SystemParams::differential_diffusion();
        let s = mode_spectrum(0.0, &p).unwrap();
        let sum: C64 = s.eigenvalues.iter().sum();
        assert!((s.trace - 1.5239).abs() < 1e-12);
        assert!((sum.re - 1.5239).abs() < 1e-10);
        assert!(sum.im.abs() < 1e-10);
        assert!((mode_trace(3.0, &p) - (1.5239 - 1e-5 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn characteristic_polynomial_of_diagonal() {
        let m = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 2.0, 3.0, 4.0));
        // (λ−1)(λ−2)(λ−3)(λ−4) = λ⁴ − 10λ³ + 35λ² − 50λ + 24
        assert_eq!(characteristic_polynomial(&m), [24.0, -50.0, 35.0, -10.0]);
    }

    #[test]
    fn stable_parameters_have_no_trace_instability() {
        let mut p = SystemParams::reference();
        p.beta = 1.0;
        let c = unstable_mode_count(&p, PI, Some(PI), 50).unwrap();
        assert_eq!(c.trace_count, 0);
        assert!(c.full_count >= c.trace_count);
    }

    #[test]
    fn bounds_examples() {
        let p = SystemParams::differential_diffusion();
        let base = lower_bound_base(&p).unwrap();
        assert!((base - 152390.0).abs() < 1e-6);
        let spec = BoundsSpec { max_modes: 10, ..BoundsSpec::default() };
        let rep = dimension_bounds(&p, &spec).unwrap();
        assert!((rep.lower - 152390.0).abs() < 1e-6);
        assert_eq!(rep.upper, 500.0 * 500.0 + 1.0);

        let mut q = p;
        q.beta = 1.0 + q.alpha * q.alpha;
        q.coupling = [0.0; 4];
        assert_eq!(lower_bound_base(&q).unwrap(), 0.0);
        assert_eq!(dimension_bounds(&q, &spec).unwrap().lower, 0.0);

        let bad = BoundsSpec { k1: 0.0, ..spec };
        assert!(dimension_bounds(&p, &bad).is_err());
        let bad = BoundsSpec { n_dim: 4, ..spec };
        assert!(dimension_bounds(&p, &bad).is_err());
    }

    #[test]
    fn k_prime_examples() {
        let p = SystemParams::differential_diffusion();
        let base = lower_bound_base(&p).unwrap();
        assert!((extract_k_prime(base, &p, 2).unwrap() - 1.0).abs() < 1e-15);
        let k2 = extract_k_prime(27.54, &p, 2).unwrap();
        assert!((k2 / 1.807e-4 - 1.0).abs() < 0.01);
        let k1 = extract_k_prime(27.54, &p, 1).unwrap();
        assert!((k1 - 0.0705).abs() < 5e-4);
        let mut q = p;
        q.beta = 1.0;
        assert!(extract_k_prime(27.54, &q, 2).is_err());
    }
}
