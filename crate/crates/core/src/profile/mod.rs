//! The radial minimizer `f_p`: two independent solvers and an audit of its
//! qualitative properties.

mod audit;
mod io;
mod params;
mod shooting;
mod variational;

pub use audit::{audit, Check, InvariantReport};
pub use io::{CSV_HEADER, read_profile_csv, write_profile_csv, ProfileRecord, ProfileTable};
pub use params::{f_infinity, Params, MAX_EXPONENT, SLOW_TAIL_LIMIT, START_RADIUS};
pub use shooting::{solve_shooting, ShootingOptions};
pub use variational::{solve_variational, VariationalOptions, VariationalRun};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{NumericsError, RadialGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("{0}")]
    InvalidParams(String),
    #[error("no sign change in the shooting mismatch over f'(0) in [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("trajectory blew up at r = {radius} (f'(0) = {slope}); slope out of range")]
    BlowUp { radius: f64, slope: f64 },
    #[error("tail closure disagrees with the integrated profile at r = {radius} by {gap:e}")]
    ClosureMismatch { radius: f64, gap: f64 },
    #[error("energy minimization did not converge in {iterations} iterations (gradient {gradient:e})")]
    NotConverged { iterations: usize, gradient: f64 },
    #[error("line search failed at iteration {iteration}")]
    LineSearch { iteration: usize },
    #[error("grid radius {radius} too small for p = {p}")]
    GridTooShort { radius: f64, p: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Shooting,
    Variational,
    Manual,
}

/// Diagnostics attached to a solved profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveInfo {
    pub solver: SolverKind,
    pub tol: f64,
    pub iterations: usize,
    /// Shooting: number of re-shot segments. Variational: unused.
    pub segments: usize,
    /// Shooting: radius beyond which the far-field closure was used.
    pub closure_radius: Option<f64>,
    /// Variational: final scaled gradient max-norm. Shooting: final bracket width in f'(0).
    pub residual: f64,
}

/// Nodal values of `f_p` and derived fields on a radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    params: Params,
    grid: RadialGrid,
    f: Vec<f64>,
    df: Vec<f64>,
    h: Vec<f64>,
    grad: Vec<f64>,
    f_prime_at_zero: f64,
    info: SolveInfo,
}

impl Profile {
    /// Builds a profile from nodal `f` and `f'`; `h` and `|∇u|` are derived.
    /// At `r = 0` the limits `h = 1` and `|∇u| = √2 f'(0)` are used.
    pub fn from_values(
        params: Params,
        grid: RadialGrid,
        f: Vec<f64>,
        df: Vec<f64>,
        info: SolveInfo,
    ) -> Result<Self, ProfileError> {
        for v in [&f, &df] {
            if v.len() != grid.len() {
                return Err(NumericsError::LengthMismatch { expected: grid.len(), got: v.len() }.into());
            }
        }
        let r = grid.nodes();
        let mut h = Vec::with_capacity(f.len());
        let mut grad = Vec::with_capacity(f.len());
        for i in 0..f.len() {
            if r[i] == 0.0 {
                h.push(1.0);
                grad.push(std::f64::consts::SQRT_2 * df[i].abs());
            } else {
                h.push(r[i] * df[i] / f[i]);
                grad.push(df[i].hypot(f[i] / r[i]));
            }
        }
        let f_prime_at_zero = if r[0] == 0.0 { df[0] } else { f[0] / r[0] };
        Ok(Self { params, grid, f, df, h, grad, f_prime_at_zero, info })
    }

    pub(crate) fn with_h(mut self, h: Vec<f64>) -> Self {
        self.h = h;
        self
    }

    pub fn params(&self) -> Params {
        self.params
    }
    pub fn p(&self) -> f64 {
        self.params.p()
    }
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn r(&self) -> &[f64] {
        self.grid.nodes()
    }
    pub fn f(&self) -> &[f64] {
        &self.f
    }
    pub fn df(&self) -> &[f64] {
        &self.df
    }
    pub fn h(&self) -> &[f64] {
        &self.h
    }
    pub fn gradient_norm(&self) -> &[f64] {
        &self.grad
    }
    pub fn f_prime_at_zero(&self) -> f64 {
        self.f_prime_at_zero
    }
    pub fn info(&self) -> &SolveInfo {
        &self.info
    }
    pub fn len(&self) -> usize {
        self.f.len()
    }
    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Max over shared nodes of `|f − other.f|`; `None` if the grids differ.
    pub fn sup_distance(&self, other: &Profile) -> Option<f64> {
        (self.grid == other.grid).then(|| {
            self.f
                .iter()
                .zip(&other.f)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }
}
