//! Self-contained numerical kernels used by every other module: graded radial
//! grids with quadrature weights, an adaptive embedded Runge-Kutta integrator
//! with dense output, a bracketing root finder and a symmetric banded
//! eigensolver.

mod banded;
mod grid;
mod ode;
mod quad;
mod roots;

pub use banded::{lowest_eigenpairs, BandedSymmetricMatrix, EigenPair};
pub use grid::{GridSpec, RadialGrid};
pub use ode::{integrate_ode, integrate_ode_until, DenseStep, OdeError, OdeSettings, Outcome, Trajectory};
pub use quad::{quad, quad_fn};
pub use roots::{find_root, find_root_bracketed, RootBracket};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no sign change in bracket [{a}, {b}] (f(a) = {fa}, f(b) = {fb})")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("root finder did not converge after {iterations} iterations")]
    RootNotConverged { iterations: usize },
    #[error("eigensolver did not converge for eigenvalue #{index} (residual {residual:e})")]
    EigenNotConverged { index: usize, residual: f64 },
    #[error("requested {requested} eigenpairs from a matrix of order {order}")]
    TooManyEigenpairs { requested: usize, order: usize },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error(transparent)]
    Ode(#[from] OdeError),
}
