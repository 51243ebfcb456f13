//! Energy `I_p` of a profile and the identities it satisfies.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{quad, quad_fn, RadialGrid};
use crate::profile::{f_infinity, solve_shooting, Params, Profile, ProfileError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("non-finite energy density at r = {radius}")]
    NonFinite { radius: f64 },
    #[error("radius {0} outside the admissible range")]
    InvalidRadius(f64),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `∫ |∇u|^p r dr`, including the far-field estimate beyond `R`.
    pub kinetic: f64,
    /// `½ ∫ (1 − f²)² r dr`, including the far-field estimate beyond `R`.
    pub potential: f64,
    pub total: f64,
    /// `|kinetic − (2/p) total|`.
    pub pohozaev_residual: f64,
    /// Part of `total` contributed by `r > R`.
    pub tail_correction: f64,
}

/// Contribution of `(R, ∞)` from `1 − f² ≈ (p/2) r^{−p}` and `|∇u| ≈ f/r`:
/// returns `(kinetic, potential)`.
pub fn tail_energy(p: f64, radius: f64) -> (f64, f64) {
    let kinetic = radius.powf(2.0 - p) / (p - 2.0)
        - 0.25 * p * p * radius.powf(2.0 - 2.0 * p) / (2.0 * p - 2.0);
    let potential = 0.125 * p * p * radius.powf(2.0 - 2.0 * p) / (2.0 * p - 2.0);
    (kinetic, potential)
}

pub fn energy(profile: &Profile) -> Result<EnergyReport, EnergyError> {
    let p = profile.p();
    let r = profile.r();
    let f = profile.f();
    let grad = profile.gradient_norm();
    let n = r.len();
    let mut kin = Vec::with_capacity(n);
    let mut pot = Vec::with_capacity(n);
    for i in 0..n {
        let k = if grad[i] > 0.0 { (p * grad[i].ln()).exp() * r[i] } else { 0.0 };
        let e = (1.0 - f[i]) * (1.0 + f[i]);
        let v = 0.5 * e * e * r[i];
        if !k.is_finite() || !v.is_finite() {
            return Err(EnergyError::NonFinite { radius: r[i] });
        }
        kin.push(k);
        pot.push(v);
    }
    let grid = profile.grid();
    let (tk, tv) = tail_energy(p, grid.radius());
    let kinetic = quad(grid, &kin).expect("lengths match") + tk;
    let potential = quad(grid, &pot).expect("lengths match") + tv;
    let total = kinetic + potential;
    Ok(EnergyReport {
        kinetic,
        potential,
        total,
        pohozaev_residual: (kinetic - 2.0 / p * total).abs(),
        tail_correction: tk + tv,
    })
}

/// Relative Pohozaev residual `|kinetic − (2/p) m_p| / m_p`.
pub fn pohozaev_check(profile: &Profile) -> Result<f64, EnergyError> {
    let e = energy(profile)?;
    Ok(e.pohozaev_residual / e.total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    /// `I_p` of the comparison function.
    pub bound: f64,
    pub m_p: f64,
    pub pass: bool,
}

/// Slack allowed between `m_p` and the comparison energy for quadrature error.
pub const UPPER_BOUND_SLACK: f64 = 1e-8;

/// `I_p` of the piecewise-linear comparison function with slope
/// `(1 − ln p/p)/√2` up to the radius where it reaches 1, then constant.
pub fn test_function_energy(p: f64) -> f64 {
    let t = 1.0 - p.ln() / p;
    let s = t / std::f64::consts::SQRT_2;
    let edge = 1.0 / s;
    let inner = RadialGrid::uniform(edge, 4001).expect("valid grid");
    let grad_p = (0.5 * p * (2.0 * s * s).ln()).exp();
    let core = quad_fn(&inner, |r| {
        let e = 1.0 - s * s * r * r;
        (grad_p + 0.5 * e * e) * r
    });
    // outside: f = 1, |∇u| = 1/r
    let far = 40.0 * edge;
    let outer = RadialGrid::from_nodes(
        (0..=4000)
            .map(|k| edge * (far / edge).powf(k as f64 / 4000.0))
            .collect(),
    )
    .expect("valid grid");
    let shell = quad_fn(&outer, |r| r.powf(1.0 - p));
    core + shell + far.powf(2.0 - p) / (p - 2.0)
}

/// Compares `m_p` from a shooting solve on the default grid with the
/// comparison-function energy.
pub fn upper_bound_check(params: Params) -> Result<UpperBound, EnergyError> {
    let grid = crate::default_grid(params)?;
    let prof = solve_shooting(params, &grid, 1e-10)?;
    upper_bound_check_with(&prof)
}

pub fn upper_bound_check_with(profile: &Profile) -> Result<UpperBound, EnergyError> {
    let bound = test_function_energy(profile.p());
    let m_p = energy(profile)?.total;
    Ok(UpperBound { bound, m_p, pass: m_p <= bound + UPPER_BOUND_SLACK })
}

/// `max_i |f(r_i) − f_∞(r_i)|`.
pub fn distance_to_limit(profile: &Profile) -> f64 {
    profile
        .r()
        .iter()
        .zip(profile.f())
        .map(|(&r, &f)| (f - f_infinity(r)).abs())
        .fold(0.0, f64::max)
}

/// `p · max_{r ≤ a} |f − (r/√2)(1 + ln g₀(r)/p)|` with
/// `g₀ = (1/p)(1 − r²/2)²`, so that `ln g₀/p` already carries the `−ln p/p` shift.
pub fn expansion_check(profile: &Profile, a: f64) -> Result<f64, EnergyError> {
    if !(0.0..std::f64::consts::SQRT_2).contains(&a) {
        return Err(EnergyError::InvalidRadius(a));
    }
    let p = profile.p();
    Ok(profile
        .r()
        .iter()
        .zip(profile.f())
        .filter(|(&r, _)| r <= a)
        .map(|(&r, &f)| {
            let g0 = (1.0 - 0.5 * r * r).powi(2) / p;
            let model = r / std::f64::consts::SQRT_2 * (1.0 + g0.ln() / p);
            p * (f - model).abs()
        })
        .fold(0.0, f64::max))
}
