//! Radial degree-one minimizers of the p-Ginzburg-Landau energy
//!
//! `I_p(f) = ∫₀^∞ [(f'² + f²/r²)^{p/2} + ½(1 − f²)²] r dr`, `p > 2`,
//! computed by two independent solvers, together with energy identities,
//! far-field asymptotics and the spectra of the second variation.

// `!(x > 0.0)` rejects NaN; index loops mirror the banded-matrix algebra
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod numerics;
pub mod profile;
pub mod asymptotics;
pub mod energy;
pub mod stability;
pub mod cli;

use numerics::RadialGrid;
use profile::{Params, ProfileError};

/// Node count of [`default_grid`].
pub const DEFAULT_NODES: usize = 4001;

/// Graded grid on `[0, R(p)]` with [`DEFAULT_NODES`] nodes.
pub fn default_grid(params: Params) -> Result<RadialGrid, ProfileError> {
    Ok(RadialGrid::graded(params.default_radius(), DEFAULT_NODES)?)
}
