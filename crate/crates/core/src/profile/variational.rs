//! Direct minimization of the discretized energy over nodal values.
//!
//! `f` is piecewise linear on the grid; each element is integrated with
//! two-point Gauss quadrature. The minimizer is found by a projected Newton
//! iteration on the box `0 ≤ f ≤ 1` with the exact tridiagonal Hessian,
//! a Levenberg shift when the Hessian is not positive definite, and Armijo
//! backtracking on the energy.

use crate::numerics::RadialGrid;

use super::{Params, Profile, ProfileError, SolveInfo, SolverKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalOptions {
    /// Convergence threshold on `max_i |∂E/∂f_i| / m_i`, `m_i` the nodal length.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iterations: 500 }
    }
}

/// A converged run together with the energy after every accepted step.
#[derive(Debug, Clone)]
pub struct VariationalRun {
    pub profile: Profile,
    pub energies: Vec<f64>,
}

pub fn solve_variational(params: Params, grid: &RadialGrid, tol: f64) -> Result<Profile, ProfileError> {
    let opts = VariationalOptions { tol, ..VariationalOptions::default() };
    opts.solve_traced(params, grid).map(|run| run.profile)
}

const GAUSS: [(f64, f64); 2] = [
    (0.5 - 0.288_675_134_594_812_9, 0.5),
    (0.5 + 0.288_675_134_594_812_9, 0.5),
];

struct Discrete<'a> {
    p: f64,
    r: &'a [f64],
}

impl Discrete<'_> {
    /// Energy of the piecewise-linear interpolant of `f` on `[0, R]`.
    fn energy(&self, f: &[f64]) -> f64 {
        let p = self.p;
        let mut e = 0.0;
        for i in 0..self.r.len() - 1 {
            let dr = self.r[i + 1] - self.r[i];
            let s = (f[i + 1] - f[i]) / dr;
            for (t, w) in GAUSS {
                let rho = self.r[i] + t * dr;
                let phi = (1.0 - t) * f[i] + t * f[i + 1];
                let g = s * s + (phi / rho).powi(2);
                let pot = 1.0 - phi * phi;
                e += w * dr * rho * ((0.5 * p * g.ln()).exp() + 0.5 * pot * pot);
            }
        }
        e
    }

    /// Gradient and tridiagonal Hessian `(diag, sub)`, sub[i] = H(i+1, i).
    fn derivatives(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let p = self.p;
        let n = self.r.len();
        let mut grad = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n - 1];
        for i in 0..n - 1 {
            let dr = self.r[i + 1] - self.r[i];
            let s = (f[i + 1] - f[i]) / dr;
            for (t, w) in GAUSS {
                let rho = self.r[i] + t * dr;
                let phi = (1.0 - t) * f[i] + t * f[i + 1];
                let q = phi / (rho * rho);
                let g = s * s + phi * q;
                if !(g > 0.0) {
                    continue;
                }
                let gp1 = (0.5 * (p - 2.0) * g.ln()).exp(); // G^{p/2 − 1}
                let gp2 = gp1 / g;
                let l_s = p * gp1 * s;
                let l_phi = p * gp1 * q - 2.0 * phi * (1.0 - phi * phi);
                let l_ss = p * gp1 + p * (p - 2.0) * gp2 * s * s;
                let l_sphi = p * (p - 2.0) * gp2 * s * q;
                let l_phiphi = p * gp1 / (rho * rho) + p * (p - 2.0) * gp2 * q * q - 2.0 + 6.0 * phi * phi;
                let wt = w * dr * rho;
                let ds = [-1.0 / dr, 1.0 / dr];
                let dphi = [1.0 - t, t];
                for a in 0..2 {
                    grad[i + a] += wt * (l_s * ds[a] + l_phi * dphi[a]);
                }
                let h = |a: usize, b: usize| {
                    wt * (l_ss * ds[a] * ds[b]
                        + l_sphi * (ds[a] * dphi[b] + ds[b] * dphi[a])
                        + l_phiphi * dphi[a] * dphi[b])
                };
                diag[i] += h(0, 0);
                diag[i + 1] += h(1, 1);
                sub[i] += h(1, 0);
            }
        }
        (grad, diag, sub)
    }
}

/// Solves the symmetric tridiagonal system by LDLᵀ; `None` if not positive definite.
fn solve_spd_tridiagonal(diag: &[f64], sub: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut d = vec![0.0; n];
    let mut l = vec![0.0; n];
    let mut y = vec![0.0; n];
    for i in 0..n {
        let (prev_l, prev_d) = if i > 0 { (sub[i - 1], d[i - 1]) } else { (0.0, 1.0) };
        if i > 0 {
            l[i] = prev_l / prev_d;
        }
        d[i] = diag[i] - if i > 0 { l[i] * prev_l } else { 0.0 };
        if !(d[i] > 0.0) {
            return None;
        }
        y[i] = rhs[i] - if i > 0 { l[i] * y[i - 1] } else { 0.0 };
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = y[i] / d[i] - if i + 1 < n { l[i + 1] * x[i + 1] } else { 0.0 };
    }
    Some(x)
}

impl VariationalOptions {
    pub fn solve_traced(&self, params: Params, grid: &RadialGrid) -> Result<VariationalRun, ProfileError> {
        let r = grid.nodes();
        let n = r.len();
        let radius = grid.radius();
        if r[0] != 0.0 {
            return Err(ProfileError::InvalidParams("variational grid must start at r = 0".into()));
        }
        if radius <= 2.0 {
            return Err(ProfileError::GridTooShort { radius, p: params.p() });
        }
        let sys = Discrete { p: params.p(), r };
        // comparison function g*: r on [0, 1], 1 beyond
        let mut f: Vec<f64> = r.iter().map(|&x| x.min(1.0)).collect();
        f[n - 1] = params.boundary_value(radius);
        let mass: Vec<f64> = (0..n)
            .map(|i| {
                let left = if i > 0 { r[i] - r[i - 1] } else { 0.0 };
                let right = if i + 1 < n { r[i + 1] - r[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect();
        let mut energy = sys.energy(&f);
        let mut energies = vec![energy];
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        while iterations < self.max_iterations {
            let (grad, diag, sub) = sys.derivatives(&f);
            // free variables: interior nodes not pinned at a bound by the gradient
            let free: Vec<bool> = (0..n)
                .map(|i| {
                    i > 0
                        && i < n - 1
                        && !((f[i] <= 0.0 && grad[i] > 0.0) || (f[i] >= 1.0 && grad[i] < 0.0))
                })
                .collect();
            residual = (1..n - 1)
                .filter(|&i| free[i])
                .map(|i| grad[i].abs() / mass[i])
                .fold(0.0, f64::max);
            if residual <= self.tol {
                break;
            }
            iterations += 1;
            let idx: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
            let m = idx.len();
            let d_sub: Vec<f64> = (0..m.saturating_sub(1))
                .map(|k| if idx[k + 1] == idx[k] + 1 { sub[idx[k]] } else { 0.0 })
                .collect();
            let rhs: Vec<f64> = idx.iter().map(|&i| -grad[i]).collect();
            let base: Vec<f64> = idx.iter().map(|&i| diag[i]).collect();
            let scale = base.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let mut shift = 0.0;
            let step = loop {
                let shifted: Vec<f64> = base.iter().map(|d| d + shift).collect();
                if let Some(x) = solve_spd_tridiagonal(&shifted, &d_sub, &rhs) {
                    break x;
                }
                shift = if shift == 0.0 { 1e-10 * scale } else { shift * 10.0 };
                if shift > 1e6 * scale {
                    return Err(ProfileError::LineSearch { iteration: iterations });
                }
            };
            let slope: f64 = idx.iter().zip(&step).map(|(&i, d)| grad[i] * d).sum();
            let project = |t: f64| {
                let mut trial = f.clone();
                for (&i, d) in idx.iter().zip(&step) {
                    trial[i] = (f[i] + t * d).clamp(0.0, 1.0);
                }
                trial
            };
            // Near the minimizer the energy differences sink below round-off;
            // a full step is then accepted if it does not raise the energy
            // beyond round-off and shrinks the gradient.
            let full = project(1.0);
            let e_full = sys.energy(&full);
            let noise = 64.0 * f64::EPSILON * energy.abs().max(1.0);
            let full_ok = (e_full - energy).abs() <= noise && {
                let (g, _, _) = sys.derivatives(&full);
                let res = (1..n - 1)
                    .filter(|&i| free[i])
                    .map(|i| g[i].abs() / mass[i])
                    .fold(0.0, f64::max);
                res < 0.5 * residual
            };
            let mut accepted = false;
            if full_ok {
                f = full;
                energy = e_full;
                accepted = true;
            } else {
                let mut t = 1.0;
                for _ in 0..60 {
                    let trial = project(t);
                    let e = sys.energy(&trial);
                    // Armijo along the projected path
                    let decrease: f64 = idx.iter().map(|&i| grad[i] * (trial[i] - f[i])).sum();
                    if e <= energy + 1e-4 * decrease.min(t * slope).min(0.0) && e <= energy {
                        f = trial;
                        energy = e;
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
            }
            if !accepted {
                return Err(ProfileError::LineSearch { iteration: iterations });
            }
            energies.push(energy);
        }
        if residual > self.tol && iterations >= self.max_iterations {
            return Err(ProfileError::NotConverged { iterations, gradient: residual });
        }
        let df = nodal_derivative(r, &f);
        let info = SolveInfo {
            solver: SolverKind::Variational,
            tol: self.tol,
            iterations,
            segments: 0,
            closure_radius: None,
            residual,
        };
        let profile = Profile::from_values(params, grid.clone(), f, df, info)?;
        Ok(VariationalRun { profile, energies })
    }
}

/// Derivative of the quadratic through each node and its two neighbours
/// (one-sided at the ends).
pub(crate) fn nodal_derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut df = vec![0.0; n];
    for i in 0..n {
        let c = i.clamp(1, n - 2);
        let (x0, x1, x2) = (x[c - 1], x[c], x[c + 1]);
        let (f0, f1, f2) = (f[c - 1], f[c], f[c + 1]);
        let xi = x[i];
        // derivative of the Lagrange interpolant at xi
        let d0 = ((xi - x1) + (xi - x2)) / ((x0 - x1) * (x0 - x2));
        let d1 = ((xi - x0) + (xi - x2)) / ((x1 - x0) * (x1 - x2));
        let d2 = ((xi - x0) + (xi - x1)) / ((x2 - x0) * (x2 - x1));
        df[i] = d0 * f0 + d1 * f1 + d2 * f2;
    }
    df
}
