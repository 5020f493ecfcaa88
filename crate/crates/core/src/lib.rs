//! Four-compartment Brusselator: simulation, Lyapunov-functional checks,
//! attractor-dimension bounds and time-series attractor reconstruction.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod functionals;
pub mod model;
pub mod run;
pub mod solver;
pub mod spectral;
pub mod tsa;

pub use error::{Error, Result};
pub use model::{BoundaryCondition, GridState, Point4, SystemParams};
