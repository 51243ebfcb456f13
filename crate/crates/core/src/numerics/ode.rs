//! Dormand-Prince 5(4) with step-size control and a quartic dense output.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at r = {radius} (h = {step:e})")]
    StepUnderflow { radius: f64, step: f64, state: Vec<f64> },
    #[error("solution became non-finite beyond r = {radius}")]
    NonFinite { radius: f64, state: Vec<f64> },
    #[error("step budget of {steps} exhausted at r = {radius}")]
    TooManySteps { radius: f64, steps: usize },
    #[error("invalid integrator settings: {0}")]
    InvalidSettings(String),
}

impl OdeError {
    /// Radius of the last accepted state, when the failure happened mid-run.
    pub fn radius(&self) -> Option<f64> {
        match self {
            OdeError::StepUnderflow { radius, .. }
            | OdeError::NonFinite { radius, .. }
            | OdeError::TooManySteps { radius, .. } => Some(*radius),
            OdeError::InvalidSettings(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSettings {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub first_step: Option<f64>,
}

impl OdeSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 2_000_000,
            first_step: None,
        }
    }
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self::with_tol(1e-10)
    }
}

/// One accepted step with its dense-output coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub r0: f64,
    pub h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn r1(&self) -> f64 {
        self.r0 + self.h
    }

    pub fn eval(&self, r: f64) -> [f64; N] {
        let s = (r - self.r0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.cont;
        std::array::from_fn(|i| {
            c[0][i] + (c[1][i] + (c[2][i] + (c[3][i] + c[4][i] * s1) * s) * s1) * s
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Reached,
    Stopped,
    Failed(OdeError),
}

#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    steps: Vec<DenseStep<N>>,
    start: f64,
    start_state: [f64; N],
    end: f64,
    end_state: [f64; N],
    outcome: Outcome,
    rejected: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn start(&self) -> f64 {
        self.start
    }

    /// Last radius the solution is known at (event location for stopped runs).
    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn end_state(&self) -> [f64; N] {
        self.end_state
    }

    pub fn outcome(&self) -> &Outcome {
        &self.outcome
    }

    pub fn steps(&self) -> &[DenseStep<N>] {
        &self.steps
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    /// Dense solution at `r`, or `None` outside `[start, end]`.
    pub fn eval(&self, r: f64) -> Option<[f64; N]> {
        if r < self.start || r > self.end {
            return None;
        }
        if self.steps.is_empty() || r == self.start {
            return Some(self.start_state);
        }
        if r == self.end {
            return Some(self.end_state);
        }
        let k = self.steps.partition_point(|s| s.r1() < r);
        let k = k.min(self.steps.len() - 1);
        Some(self.steps[k].eval(r))
    }
}

const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrate `y' = rhs(r, y)` from `span.0` to `span.1 > span.0`.
pub fn integrate_ode<const N: usize, F>(
    rhs: F,
    span: (f64, f64),
    y0: [f64; N],
    settings: &OdeSettings,
) -> Result<Trajectory<N>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let traj = integrate_ode_until(rhs, span, y0, settings, |_, _| false)?;
    match traj.outcome {
        Outcome::Failed(e) => Err(e),
        _ => Ok(traj),
    }
}

/// Like [`integrate_ode`] but stops at the first radius where `stop` holds,
/// located by bisection on the dense output. Blow-up and step underflow are
/// reported through [`Trajectory::outcome`] together with the partial solution.
pub fn integrate_ode_until<const N: usize, F, S>(
    mut rhs: F,
    span: (f64, f64),
    y0: [f64; N],
    settings: &OdeSettings,
    mut stop: S,
) -> Result<Trajectory<N>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N]) -> bool,
{
    let (t0, t1) = span;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(OdeError::InvalidSettings(format!("bad span [{t0}, {t1}]")));
    }
    if !(settings.rtol > 0.0 && settings.atol > 0.0) {
        return Err(OdeError::InvalidSettings("tolerances must be positive".into()));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::InvalidSettings("non-finite initial state".into()));
    }
    let span_len = t1 - t0;
    let mut traj = Trajectory {
        steps: Vec::new(),
        start: t0,
        start_state: y0,
        end: t0,
        end_state: y0,
        outcome: Outcome::Reached,
        rejected: 0,
    };
    let mut t = t0;
    let mut y = y0;
    let mut k0 = rhs(t, &y);
    if k0.iter().any(|v| !v.is_finite()) {
        traj.outcome = Outcome::Failed(OdeError::NonFinite { radius: t, state: y.to_vec() });
        return Ok(traj);
    }
    let mut h = settings
        .first_step
        .unwrap_or_else(|| initial_step(&mut rhs, t, &y, &k0, settings))
        .min(span_len);
    let mut last_nonfinite = false;
    let mut accepted = 0usize;

    loop {
        let min_step = (1e-14 * span_len).max(8.0 * f64::EPSILON * t.abs());
        if h < min_step {
            let state = y.to_vec();
            traj.outcome = Outcome::Failed(if last_nonfinite {
                OdeError::NonFinite { radius: t, state }
            } else {
                OdeError::StepUnderflow { radius: t, step: h, state }
            });
            return Ok(traj);
        }
        if accepted >= settings.max_steps {
            traj.outcome = Outcome::Failed(OdeError::TooManySteps { radius: t, steps: accepted });
            return Ok(traj);
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let mut k = [[0.0; N]; 7];
        k[0] = k0;
        for s in 1..7 {
            let ys: [f64; N] = std::array::from_fn(|i| {
                y[i] + h * (0..s).map(|j| A[s - 1][j] * k[j][i]).sum::<f64>()
            });
            k[s] = rhs(t + C[s] * h, &ys);
        }
        // the 7th stage is evaluated at the 5th-order solution (FSAL)
        let y_new: [f64; N] = std::array::from_fn(|i| {
            y[i] + h * (0..6).map(|j| A[5][j] * k[j][i]).sum::<f64>()
        });
        let mut err = 0.0;
        for i in 0..N {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = settings.atol + settings.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            last_nonfinite = true;
            traj.rejected += 1;
            h *= 0.1;
            continue;
        }
        if err > 1.0 {
            last_nonfinite = false;
            traj.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }
        last_nonfinite = false;
        accepted += 1;
        let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
        let bspl: [f64; N] = std::array::from_fn(|i| h * k[0][i] - ydiff[i]);
        let cont = [
            y,
            ydiff,
            bspl,
            std::array::from_fn(|i| ydiff[i] - h * k[6][i] - bspl[i]),
            std::array::from_fn(|i| h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>()),
        ];
        let step = DenseStep { r0: t, h, cont };
        let t_new = if last { t1 } else { t + h };
        traj.steps.push(step);
        if stop(t_new, &y_new) {
            // bisect for the first radius where the predicate holds
            let (mut lo, mut hi) = (t, t_new);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if stop(mid, &step.eval(mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            traj.end = hi;
            traj.end_state = if hi == t_new { y_new } else { step.eval(hi) };
            traj.outcome = Outcome::Stopped;
            return Ok(traj);
        }
        t = t_new;
        y = y_new;
        k0 = k[6];
        traj.end = t;
        traj.end_state = y;
        if last {
            return Ok(traj);
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
}

fn initial_step<const N: usize, F>(
    rhs: &mut F,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    s: &OdeSettings,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let sc: [f64; N] = std::array::from_fn(|i| s.atol + s.rtol * y[i].abs());
    let norm = |v: &[f64; N]| {
        (v.iter().zip(&sc).map(|(a, b)| (a / b).powi(2)).sum::<f64>() / N as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: [f64; N] = std::array::from_fn(|i| y[i] + h0 * f0[i]);
    let f1 = rhs(t + h0, &y1);
    let df: [f64; N] = std::array::from_fn(|i| (f1[i] - f0[i]) / h0);
    let d2 = norm(&df);
    if !d2.is_finite() {
        return h0 * 1e-3;
    }
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let tr = integrate_ode(|_, y: &[f64; 1]| [y[0]], (0.0, 1.0), [1.0], &OdeSettings::with_tol(1e-10))
            .unwrap();
        assert!((tr.end_state()[0] - std::f64::consts::E).abs() < 1e-8);
        let mid = tr.eval(0.5).unwrap()[0];
        assert!((mid - 0.5f64.exp()).abs() < 1e-8, "{mid}");
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let tr = integrate_ode(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            (0.0, 10.0),
            [0.0, 1.0],
            &OdeSettings::with_tol(1e-10),
        )
        .unwrap();
        for k in 0..100 {
            let r = 0.1 * k as f64 + 0.037;
            let y = tr.eval(r).unwrap();
            assert!((y[0] - r.sin()).abs() < 1e-7, "r = {r}");
        }
    }

    #[test]
    fn stop_event_is_located() {
        let tr = integrate_ode_until(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            (0.0, 10.0),
            [0.0, 1.0],
            &OdeSettings::with_tol(1e-10),
            |_, y| y[1] < 0.0,
        )
        .unwrap();
        assert_eq!(tr.outcome(), &Outcome::Stopped);
        assert!((tr.end() - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y², y(0) = 1 blows up at r = 1
        let res = integrate_ode(|_, y: &[f64; 1]| [y[0] * y[0]], (0.0, 2.0), [1.0], &OdeSettings::default());
        let err = res.unwrap_err();
        let r = err.radius().unwrap();
        assert!(r > 0.99 && r <= 1.0, "{err}");
    }
}
