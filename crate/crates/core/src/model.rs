//! Model constants, pointwise states and the reaction kinetics of the
//! four-compartment Brusselator.
//!
//! Each compartment is a classical Brusselator pair, `(u, v)` and `(w, z)`,
//! and the two pairs exchange material linearly through the coupling rates
//! `D1..D4`:
//!
//! ```text
//! f = α − (β+1)u + u²v + D1(w − u)
//! g = βu − u²v         + D2(z − v)
//! h = α − (β+1)w + w²z + D3(u − w)
//! k = βw − w²z         + D4(v − z)
//! ```

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use crate::error::{Error, Result};

/// All constants of the model.
///
/// `coupling` holds `D1..D4`, `diffusion` holds the diffusivities of
/// `u, v, w, z` in that order (`a, b, c, d`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub alpha: f64,
    pub beta: f64,
    pub coupling: [f64; 4],
    pub diffusion: [f64; 4],
}

impl SystemParams {
    /// Reference oscillatory regime with equal diffusivities.
    pub const fn reference() -> Self {
        SystemParams {
            alpha: 2.0,
            beta: 5.5,
            coupling: [0.0126, 0.126, 0.0125, 0.125],
            diffusion: [1e-6, 1e-6, 1e-6, 1e-6],
        }
    }

    /// Stronger forcing (`β = 5.9`) with four distinct diffusivities.
    pub const fn differential_diffusion() -> Self {
        SystemParams {
            alpha: 2.0,
            beta: 5.9,
            coupling: [0.0126, 0.126, 0.0125, 0.125],
            diffusion: [1e-6, 2e-6, 3e-6, 4e-6],
        }
    }

    /// Same kinetics with all diffusivities set to zero.
    pub fn without_diffusion(mut self) -> Self {
        self.diffusion = [0.0; 4];
        self
    }

    pub fn coupling_sum(&self) -> f64 {
        self.coupling.iter().sum()
    }

    pub fn diffusion_sum(&self) -> f64 {
        self.diffusion.iter().sum()
    }

    pub fn max_diffusion(&self) -> f64 {
        self.diffusion.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_coupling(&self) -> f64 {
        self.coupling.iter().cloned().fold(0.0, f64::max)
    }

    /// `(name, value)` pairs in canonical order.
    pub fn named_values(&self) -> [(&'static str, f64); 10] {
        [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("d1", self.coupling[0]),
            ("d2", self.coupling[1]),
            ("d3", self.coupling[2]),
            ("d4", self.coupling[3]),
            ("a", self.diffusion[0]),
            ("b", self.diffusion[1]),
            ("c", self.diffusion[2]),
            ("d", self.diffusion[3]),
        ]
    }

    /// Weaker check than [`validate_params`]: the integrator accepts zero
    /// diffusivities and zero coupling, but not negative or non-finite values.
    pub(crate) fn check_integrable(&self) -> Result<()> {
        for (name, value) in self.named_values() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::domain(format!(
                    "{name} = {value} must be finite and nonnegative"
                )));
            }
        }
        if self.alpha <= 0.0 {
            return Err(Error::domain("alpha must be positive"));
        }
        Ok(())
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams::reference()
    }
}

/// A positivity violation reported by [`validate_params`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamViolation {
    pub field: &'static str,
    pub value: f64,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} is not strictly positive", self.field, self.value)
    }
}

/// Returns every constant that is not strictly positive (or not finite).
pub fn validate_params(params: &SystemParams) -> std::result::Result<(), Vec<ParamViolation>> {
    let violations: Vec<_> = params
        .named_values()
        .into_iter()
        .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
        .map(|(field, value)| ParamViolation { field, value })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Concentrations of the four species at one point.
///
/// Entries may be negative; linearization works with perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point4 {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub z: f64,
}

impl Point4 {
    pub const fn new(u: f64, v: f64, w: f64, z: f64) -> Self {
        Point4 { u, v, w, z }
    }

    pub const fn splat(s: f64) -> Self {
        Point4::new(s, s, s, s)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Point4::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.u, self.v, self.w, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Index<usize> for Point4 {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.u,
            1 => &self.v,
            2 => &self.w,
            3 => &self.z,
            _ => panic!("Point4 index {i} out of range"),
        }
    }
}

impl Add for Point4 {
    type Output = Point4;
    fn add(self, o: Point4) -> Point4 {
        Point4::new(self.u + o.u, self.v + o.v, self.w + o.w, self.z + o.z)
    }
}

impl Sub for Point4 {
    type Output = Point4;
    fn sub(self, o: Point4) -> Point4 {
        Point4::new(self.u - o.u, self.v - o.v, self.w - o.w, self.z - o.z)
    }
}

impl Mul<f64> for Point4 {
    type Output = Point4;
    fn mul(self, s: f64) -> Point4 {
        Point4::new(self.u * s, self.v * s, self.w * s, self.z * s)
    }
}

/// Reaction kinetics `(f, g, h, k)` at a point, without the domain check.
#[inline]
pub(crate) fn reaction_unchecked(u: f64, v: f64, w: f64, z: f64, p: &SystemParams) -> [f64; 4] {
    let [d1, d2, d3, d4] = p.coupling;
    let u2v = u * u * v;
    let w2z = w * w * z;
    [
        p.alpha - (p.beta + 1.0) * u + u2v + d1 * (w - u),
        p.beta * u - u2v + d2 * (z - v),
        p.alpha - (p.beta + 1.0) * w + w2z + d3 * (u - w),
        p.beta * w - w2z + d4 * (v - z),
    ]
}

pub fn reaction_terms(p: Point4, params: &SystemParams) -> Result<Point4> {
    if !p.is_finite() {
        return Err(Error::domain(format!("non-finite state {p:?}")));
    }
    Ok(Point4::from_array(reaction_unchecked(p.u, p.v, p.w, p.z, params)))
}

/// The spatially uniform equilibrium `(α, β/α, α, β/α)`.
pub fn stationary_solution(params: &SystemParams) -> Result<Point4> {
    if params.alpha == 0.0 || !params.alpha.is_finite() {
        return Err(Error::domain("stationary solution requires alpha != 0"));
    }
    let a = params.alpha;
    let r = params.beta / a;
    Ok(Point4::new(a, r, a, r))
}

/// Boundary condition applied on every edge of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Zero normal derivative (ghost values mirror the first interior row).
    Neumann,
    /// Zero ghost values.
    DirichletZero,
}

impl BoundaryCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::DirichletZero => "dirichlet",
        }
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" => Ok(BoundaryCondition::Neumann),
            "dirichlet" | "dirichlet0" | "dirichletzero" => Ok(BoundaryCondition::DirichletZero),
            other => Err(format!("unknown boundary condition '{other}'")),
        }
    }
}

/// Four scalar fields on a rectangular grid, stored row-major
/// (`index = iy * nx + ix`).
///
/// A grid with `ny == 1` is one-dimensional: the y direction carries no
/// stencil and cells have unit width in y.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub fields: [Vec<f64>; 4],
    pub bc: BoundaryCondition,
}

impl GridState {
    pub fn uniform(nx: usize, ny: usize, dx: f64, dy: f64, base: Point4, bc: BoundaryCondition) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::domain("grid extents must be positive"));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::domain(format!("spacings must be positive, got dx={dx}, dy={dy}")));
        }
        let n = nx * ny;
        Ok(GridState {
            nx,
            ny,
            dx,
            dy,
            fields: [vec![base.u; n], vec![base.v; n], vec![base.w; n], vec![base.z; n]],
            bc,
        })
    }

    /// One-dimensional grid of `nx` cells covering `[0, lx]`.
    pub fn line(nx: usize, lx: f64, base: Point4, bc: BoundaryCondition) -> Result<Self> {
        GridState::uniform(nx, 1, lx / nx as f64, 1.0, base, bc)
    }

    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn domain_volume(&self) -> f64 {
        self.cell_area() * self.len() as f64
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn point(&self, ix: usize, iy: usize) -> Point4 {
        let i = self.index(ix, iy);
        Point4::new(self.fields[0][i], self.fields[1][i], self.fields[2][i], self.fields[3][i])
    }

    pub fn set_point(&mut self, ix: usize, iy: usize, p: Point4) {
        let i = self.index(ix, iy);
        for (f, value) in self.fields.iter_mut().zip(p.to_array()) {
            f[i] = value;
        }
    }

    pub(crate) fn check_consistent(&self) -> Result<()> {
        let n = self.len();
        if self.fields.iter().any(|f| f.len() != n) {
            return Err(Error::domain("field arrays do not match grid extents"));
        }
        if !(self.dx > 0.0 && self.dy > 0.0) {
            return Err(Error::domain("grid spacings must be positive"));
        }
        Ok(())
    }
}
