//! Shooting on `f'(0)` for the first-order system in `(ln(f/r), h)`, `h = r f'/f`.
//!
//! Far out the system is stiff: perturbations grow like `exp(∫κ)` with
//! `κ ≈ (4/p)^{1/2} r^{(p−2)/2}`, so a single shot cannot reach `R` in double
//! precision. The solve therefore marches: after the bracket on the shooting
//! parameter has collapsed to a few ulps, the two bracketing trajectories agree
//! up to some radius; the profile is kept up to there and the problem is
//! re-shot from that radius on `h` with `f` held fixed. Once the reachable
//! segments become negligibly short the two-term far-field expansion closes
//! the profile.

use crate::numerics::{
    find_root_bracketed, integrate_ode_until, OdeError, OdeSettings, Outcome, RadialGrid, Trajectory,
};

use super::{Params, Profile, ProfileError, SolveInfo, SolverKind, START_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Local error tolerance of the integrator.
    pub ode_tol: f64,
    /// Initial bracket on `f'(0)`.
    pub bracket: (f64, f64),
    /// Two bracketing trajectories count as separated beyond this gap in `ln(f/r)` or `h`.
    pub separation: f64,
    /// Segments shorter than this fraction of their start radius hand over to the closure.
    pub min_segment: f64,
    /// Largest accepted gap between integrated profile and closure at hand-over.
    pub closure_tol: f64,
    /// Hand over to the closure as soon as `f` and `f'` both match it this well.
    pub handover_tol: f64,
    pub max_segments: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            ode_tol: 1e-10,
            bracket: (0.1, 1.5),
            separation: 1e-10,
            min_segment: 1e-7,
            closure_tol: 1e-6,
            handover_tol: 1e-10,
            max_segments: 20_000,
        }
    }
}

/// Solve with default options and ODE tolerance `tol`.
pub fn solve_shooting(params: Params, grid: &RadialGrid, tol: f64) -> Result<Profile, ProfileError> {
    let opts = ShootingOptions { ode_tol: tol, ..ShootingOptions::default() };
    ShootingOptions::solve(&opts, params, grid)
}

struct Segment {
    traj: Trajectory<2>,
    end: f64,
}

#[derive(Clone, Copy)]
struct System {
    p: f64,
}

impl System {
    fn rhs(&self, r: f64, s: &[f64; 2]) -> [f64; 2] {
        let p = self.p;
        let (z, h) = (s[0], s[1]);
        let one_minus_f2 = -(2.0 * (z + r.ln())).exp_m1();
        let ln_grad = z + 0.5 * h.mul_add(h, 1.0).ln();
        let pull = (2.0 / p) * ((2.0 - p) * ln_grad).exp() * r * one_minus_f2;
        let q = (1.0 + h * h) / (1.0 + (p - 1.0) * h * h);
        let dh = q * ((1.0 - h) * (1.0 + (p - 1.0) * h) / r - pull);
        [(h - 1.0) / r, dh]
    }

    /// Signed mismatch of a trajectory: positive if it overshoots `f = 1`,
    /// negative if `f'` turns negative, `f(R) − target` when it reaches `R`.
    /// Earlier failures get larger magnitude so the map stays monotone.
    fn mismatch(&self, traj: &Trajectory<2>, radius: f64, target: f64) -> f64 {
        let r = traj.end();
        let s = traj.end_state();
        let depth = 1.0 + (radius - r);
        match traj.outcome() {
            Outcome::Reached => r * s[0].exp() - target,
            Outcome::Stopped => {
                if s[0] + r.ln() >= 0.0 {
                    depth
                } else {
                    -depth
                }
            }
            Outcome::Failed(_) => {
                let ds = self.rhs(r, &s);
                if ds[1] >= 0.0 && s[1] > 0.0 {
                    depth
                } else {
                    -depth
                }
            }
        }
    }

    fn shoot(&self, r0: f64, state: [f64; 2], radius: f64, tol: f64) -> Result<Trajectory<2>, ProfileError> {
        let settings = OdeSettings::with_tol(tol);
        integrate_ode_until(
            |r, s| self.rhs(r, s),
            (r0, radius),
            state,
            &settings,
            |r, s| s[0] + r.ln() >= 0.0 || s[1] <= 0.0,
        )
        .map_err(|e| match e {
            OdeError::InvalidSettings(m) => ProfileError::InvalidParams(m),
            other => ProfileError::Numerics(other.into()),
        })
    }
}

fn series_state(params: &Params, a: f64, r: f64) -> [f64; 2] {
    let c = params.series_coefficient(a);
    [a.ln() - 0.5 * c * r * r, 1.0 - c * r * r]
}

impl ShootingOptions {
    pub fn solve(&self, params: Params, grid: &RadialGrid) -> Result<Profile, ProfileError> {
        let p = params.p();
        let radius = grid.radius();
        if radius <= 2.0 {
            return Err(ProfileError::GridTooShort { radius, p });
        }
        let sys = System { p };
        let target = params.boundary_value(radius);

        // segment 0: shoot on a = f'(0)
        let shoot_a = |a: f64| -> Result<Option<Trajectory<2>>, ProfileError> {
            let state = series_state(&params, a, START_RADIUS);
            if !(state[0].is_finite() && state[1] > 0.0) {
                // the series already turns f' negative: undershoot
                return Ok(None);
            }
            sys.shoot(START_RADIUS, state, radius, self.ode_tol).map(Some)
        };
        let mismatch_a = |a: f64| -> Result<f64, ProfileError> {
            Ok(match shoot_a(a)? {
                Some(t) => sys.mismatch(&t, radius, target),
                None => -(1.0 + radius),
            })
        };
        let (mut lo, mut hi) = self.bracket;
        let mut widenings = 0;
        let br = loop {
            let m_lo = mismatch_a(lo)?;
            let m_hi = mismatch_a(hi)?;
            if m_lo.signum() != m_hi.signum() {
                let mut failure = None;
                let br = find_root_bracketed(
                    |a| {
                        mismatch_a(a).unwrap_or_else(|e| {
                            failure.get_or_insert(e);
                            f64::NAN
                        })
                    },
                    lo,
                    hi,
                    0.0,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                break br?;
            }
            widenings += 1;
            if widenings > 6 {
                return Err(ProfileError::BracketFailure { lo: self.bracket.0, hi: self.bracket.1 });
            }
            lo *= 0.5;
            hi *= 1.5;
        };
        let (a_lo, a_hi) = if br.f_lo < 0.0 { (br.lo, br.hi) } else { (br.hi, br.lo) };
        let first_residual = br.hi - br.lo;
        let blow_up = |a: f64| ProfileError::BlowUp { radius: START_RADIUS, slope: a };
        let traj_lo = shoot_a(a_lo)?.ok_or_else(|| blow_up(a_lo))?;
        let traj_hi = shoot_a(a_hi)?.ok_or_else(|| blow_up(a_hi))?;
        let slope = 0.5 * (a_lo + a_hi);

        let mut segments: Vec<Segment> = Vec::new();
        let mut iterations = 0usize;
        let mut closure_radius = None;
        let (mut t_lo, mut t_hi) = (traj_lo, traj_hi);
        loop {
            let start = t_lo.start();
            let split = separation_radius(&t_lo, &t_hi, self.separation);
            if split >= radius {
                segments.push(Segment { traj: t_lo, end: radius });
                break;
            }
            if split <= start + self.min_segment * start || segments.len() >= self.max_segments {
                if split <= start {
                    // not even the first step is trustworthy; close from the segment start
                    closure_radius = Some(start);
                } else {
                    segments.push(Segment { traj: t_lo, end: split });
                    closure_radius = Some(split);
                }
                break;
            }
            let s_lo = t_lo.eval(split).expect("split inside trajectory");
            let s_hi = t_hi.eval(split).expect("split inside trajectory");
            let f_at = split * s_lo[0].exp();
            let (fc, dfc) = params.tail_closure(split);
            let converged_tail = (f_at - fc).abs() <= self.handover_tol
                && (s_lo[1] * f_at / split - dfc).abs() <= self.handover_tol;
            segments.push(Segment { traj: t_lo, end: split });
            if converged_tail {
                closure_radius = Some(split);
                break;
            }
            let z0 = s_lo[0];
            let shoot_h = |h: f64| sys.shoot(split, [z0, h], radius, self.ode_tol);
            let (mut h_a, mut h_b) = (s_lo[1].min(s_hi[1]), s_lo[1].max(s_hi[1]));
            let mut width = (h_b - h_a).max(1e-14 * h_b.abs().max(1e-300));
            let mut bracket = None;
            for _ in 0..40 {
                let m_a = sys.mismatch(&shoot_h(h_a)?, radius, target);
                let m_b = sys.mismatch(&shoot_h(h_b)?, radius, target);
                if m_a.signum() != m_b.signum() {
                    bracket = Some((h_a, h_b));
                    break;
                }
                width *= 4.0;
                h_a = (h_a - width).max(0.0);
                h_b += width;
            }
            let Some((h_a, h_b)) = bracket else {
                closure_radius = Some(split);
                break;
            };
            let mut failure = None;
            let br = find_root_bracketed(
                |h| {
                    iterations += 1;
                    match shoot_h(h) {
                        Ok(t) => sys.mismatch(&t, radius, target),
                        Err(e) => {
                            failure.get_or_insert(e);
                            f64::NAN
                        }
                    }
                },
                h_a,
                h_b,
                0.0,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            let br = br?;
            let (h_lo, h_hi) = if br.f_lo < 0.0 { (br.lo, br.hi) } else { (br.hi, br.lo) };
            t_lo = shoot_h(h_lo)?;
            t_hi = shoot_h(h_hi)?;
        }

        // sample
        let r = grid.nodes();
        let c = params.series_coefficient(slope);
        let mut f = Vec::with_capacity(r.len());
        let mut df = Vec::with_capacity(r.len());
        let mut hv = Vec::with_capacity(r.len());
        let mut k = 0usize;
        let mut gap: f64 = 0.0;
        for &ri in r {
            if ri == 0.0 {
                f.push(0.0);
                df.push(slope);
                hv.push(1.0);
                continue;
            }
            if ri < START_RADIUS {
                let fi = slope * ri * (1.0 - 0.5 * c * ri * ri);
                let hi = 1.0 - c * ri * ri;
                f.push(fi);
                df.push(hi * fi / ri);
                hv.push(hi);
                continue;
            }
            if closure_radius.is_some_and(|rc| ri > rc) {
                let (fi, dfi) = params.tail_closure(ri);
                f.push(fi);
                df.push(dfi);
                hv.push(ri * dfi / fi);
                continue;
            }
            while k + 1 < segments.len() && ri > segments[k].end {
                k += 1;
            }
            let s = segments[k]
                .traj
                .eval(ri.min(segments[k].end))
                .expect("node inside integrated range");
            let fi = ri * s[0].exp();
            f.push(fi);
            df.push(s[1] * fi / ri);
            hv.push(s[1]);
        }
        if let Some(rc) = closure_radius {
            let last = segments
                .last()
                .and_then(|s| s.traj.eval(s.end))
                .unwrap_or([(target / rc).ln(), 0.0]);
            let (fc, _) = params.tail_closure(rc);
            gap = (rc * last[0].exp() - fc).abs();
            if gap > self.closure_tol {
                return Err(ProfileError::ClosureMismatch { radius: rc, gap });
            }
        }
        if let Some(i) = f.iter().position(|v| !v.is_finite()) {
            return Err(ProfileError::BlowUp { radius: r[i], slope });
        }
        let info = SolveInfo {
            solver: SolverKind::Shooting,
            tol: self.ode_tol,
            iterations,
            segments: segments.len(),
            closure_radius,
            residual: first_residual.max(gap),
        };
        let prof = Profile::from_values(params, grid.clone(), f, df, info)?;
        Ok(prof.with_h(hv))
    }
}

/// First radius where the two trajectories differ by more than `tol` in
/// either component, scanned at the step points of both; `R` if they agree.
fn separation_radius(a: &Trajectory<2>, b: &Trajectory<2>, tol: f64) -> f64 {
    let end = a.end().min(b.end());
    let mut pts: Vec<f64> = a
        .steps()
        .iter()
        .chain(b.steps())
        .map(|s| s.r1())
        .filter(|&r| r <= end)
        .collect();
    pts.push(end);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let apart = |r: f64| {
        let (x, y) = (a.eval(r).unwrap(), b.eval(r).unwrap());
        (x[0] - y[0]).abs() > tol || (x[1] - y[1]).abs() > tol
    };
    let mut prev = a.start();
    for &r in &pts {
        if apart(r) {
            // refine inside the last interval
            let (mut lo, mut hi) = (prev, r);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if apart(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return lo;
        }
        prev = r;
    }
    let fully = matches!(a.outcome(), Outcome::Reached) && matches!(b.outcome(), Outcome::Reached);
    if fully {
        f64::INFINITY
    } else {
        end
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p3_profile_basic_shape() {
        let params = Params::new(3.0).unwrap();
        let grid = RadialGrid::graded(20.0, 2001).unwrap();
        let prof = solve_shooting(params, &grid, 1e-10).unwrap();
        assert_eq!(prof.f()[0], 0.0);
        let a = prof.f_prime_at_zero();
        assert!(a > 0.1 && a < 1.5, "{a}");
        assert!((prof.h()[1] - 1.0).abs() < 0.01);
        let n = prof.len();
        assert!((prof.f()[n - 1] - params.boundary_value(20.0)).abs() < 1e-8);
    }
}
