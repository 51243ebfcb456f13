//! Far-field constants and large-`p` rates measured on computed profiles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::Profile;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("no deep-tail fit window below R = {radius}; re-solve with a larger radius")]
    WindowEmpty { radius: f64 },
    #[error("radius {0} outside the admissible range")]
    InvalidRadius(f64),
    #[error("tail not in its asymptotic regime above round-off (window ending at r = {stop})")]
    Unsettled { stop: f64 },
}

/// Profiles count as deep in the tail where `1 − f²` is below this.
pub const DEEP_TAIL: f64 = 1e-3;

/// Below this `1 − f²` carries fewer than five significant digits.
pub const ROUNDOFF_FLOOR: f64 = 1e-11;

/// Relative agreement required between the window and its right half.
pub const SETTLED: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    /// Estimate of `lim r^p (1 − f²)`.
    pub tail_const_potential: f64,
    /// Estimate of `lim r^{p+1} f'`.
    pub tail_const_derivative: f64,
    pub target_potential: f64,
    pub target_derivative: f64,
    pub fit_window: (f64, f64),
    pub relative_errors: (f64, f64),
}

/// Two-term extrapolation in `1/r` from the ends of the deep-tail window.
/// The window ends one unit before `R` to stay clear of the boundary layer,
/// or earlier where `1 − f²` reaches [`ROUNDOFF_FLOOR`].
pub fn tail_constants(profile: &Profile) -> Result<AsymptoticFit, AsymptoticsError> {
    let p = profile.p();
    let r = profile.r();
    let f = profile.f();
    let df = profile.df();
    let radius = profile.grid().radius();
    let end = radius - 1.0;
    // first node after which 1 − f² stays below DEEP_TAIL
    let start = (0..r.len())
        .rev()
        .take_while(|&i| (1.0 - f[i]) * (1.0 + f[i]) < DEEP_TAIL)
        .last()
        .ok_or(AsymptoticsError::WindowEmpty { radius })?;
    let stop = r.partition_point(|&x| x <= end).saturating_sub(1);
    if start >= stop || r[start] >= end {
        return Err(AsymptoticsError::WindowEmpty { radius });
    }
    let stop = (start..=stop)
        .take_while(|&i| (1.0 - f[i]) * (1.0 + f[i]) >= ROUNDOFF_FLOOR)
        .last()
        .unwrap_or(start);
    let pot = |i: usize| r[i].powf(p) * (1.0 - f[i]) * (1.0 + f[i]);
    let der = |i: usize| r[i].powf(p + 1.0) * df[i];
    let extrapolate = |a: usize, q: &dyn Fn(usize) -> f64| {
        let (ra, rb) = (r[a], r[stop]);
        (rb * q(stop) - ra * q(a)) / (rb - ra)
    };
    // shrink the window from the left until the estimate agrees with the
    // one from its right half
    let mut start = start;
    let (cp, cd) = loop {
        let mid = (start + stop) / 2;
        if stop - mid < 4 {
            return Err(AsymptoticsError::Unsettled { stop: r[stop] });
        }
        let full = (extrapolate(start, &pot), extrapolate(start, &der));
        let half = (extrapolate(mid, &pot), extrapolate(mid, &der));
        let close = |a: f64, b: f64| (a - b).abs() <= SETTLED * b.abs();
        if close(full.0, half.0) && close(full.1, half.1) {
            break full;
        }
        start = mid;
    };
    let (tp, td) = (0.5 * p, 0.25 * p * p);
    Ok(AsymptoticFit {
        tail_const_potential: cp,
        tail_const_derivative: cd,
        target_potential: tp,
        target_derivative: td,
        fit_window: (r[start], r[stop]),
        relative_errors: ((cp - tp).abs() / tp, (cd - td).abs() / td),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientBound {
    pub sup_norm: f64,
    pub location: f64,
    pub argmax_index: usize,
    /// `(sup_norm − 1) p`.
    pub scaled_excess: f64,
}

/// Maximum of `|∇u|` over the nodes and where it is attained.
pub fn gradient_bound_check(profile: &Profile) -> GradientBound {
    let g = profile.gradient_norm();
    let (idx, &sup) = g
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    GradientBound {
        sup_norm: sup,
        location: profile.r()[idx],
        argmax_index: idx,
        scaled_excess: (sup - 1.0) * profile.p(),
    }
}

fn check_core_radius(a: f64) -> Result<(), AsymptoticsError> {
    if (0.0..std::f64::consts::SQRT_2).contains(&a) {
        Ok(())
    } else {
        Err(AsymptoticsError::InvalidRadius(a))
    }
}

/// `p · max_{r ≤ a} |g − g₀|`, `g = |∇u|^p`, `g₀ = (1/p)(1 − r²/2)²`.
pub fn g_vs_g0(profile: &Profile, a: f64) -> Result<f64, AsymptoticsError> {
    check_core_radius(a)?;
    let p = profile.p();
    Ok(profile
        .r()
        .iter()
        .zip(profile.gradient_norm())
        .filter(|(&r, _)| r <= a)
        .map(|(&r, &gn)| {
            let g = (p * gn.ln()).exp();
            let g0 = (1.0 - 0.5 * r * r).powi(2) / p;
            p * (g - g0).abs()
        })
        .fold(0.0, f64::max))
}

/// `(max_{r ≤ b} |f − r/√2|, max_{r ≤ b} |f' − 1/√2|)`.
pub fn compact_rate_check(profile: &Profile, b: f64) -> Result<(f64, f64), AsymptoticsError> {
    check_core_radius(b)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = (0.0f64, 0.0f64);
    for ((&r, &f), &df) in profile.r().iter().zip(profile.f()).zip(profile.df()) {
        if r <= b {
            out.0 = out.0.max((f - r * s).abs());
            out.1 = out.1.max((df - s).abs());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RadialGrid;
    use crate::profile::{solve_shooting, Params};

    fn prof(p: f64, radius: f64) -> Profile {
        let params = Params::new(p).unwrap();
        solve_shooting(params, &RadialGrid::graded(radius, 4001).unwrap(), 1e-10).unwrap()
    }

    #[test]
    fn tail_fit_at_p20_is_sharp() {
        let fit = tail_constants(&prof(20.0, 8.0)).unwrap();
        assert!(fit.relative_errors.0 < 1e-4 && fit.relative_errors.1 < 1e-4, "{fit:?}");
    }

    #[test]
    fn tail_below_roundoff_is_refused() {
        assert!(matches!(tail_constants(&prof(100.0, 8.0)), Err(AsymptoticsError::Unsettled { .. })));
    }

    #[test]
    fn short_radius_has_no_window() {
        assert!(matches!(tail_constants(&prof(3.0, 4.0)), Err(AsymptoticsError::WindowEmpty { .. })));
    }

    #[test]
    fn core_radius_is_checked() {
        let pr = prof(30.0, 8.0);
        assert!(g_vs_g0(&pr, 1.5).is_err());
        assert!(compact_rate_check(&pr, -0.1).is_err());
        let gb = gradient_bound_check(&pr);
        assert!(gb.scaled_excess < 0.0);
    }
}
