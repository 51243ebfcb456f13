//! The shooting profile near the origin against a fixed-step RK4 solution
//! of the Euler-Lagrange equation in `(f, f')`, started at `r = 1e-6` from
//! `f = a r`, `f' = a` alone.

use pgl::numerics::RadialGrid;
use pgl::profile::{solve_shooting, Params};

/// `f''` from `(r W f')' = W f/r − (2/p)(1 − f²) f r`, `W = |∇u|^{p−2}`.
fn second_derivative(p: f64, r: f64, f: f64, df: f64) -> f64 {
    let g2 = df * df + (f / r).powi(2);
    let w = g2.powf(0.5 * p - 1.0);
    let w4 = g2.powf(0.5 * p - 2.0);
    let num = w * (f / r - df) - 2.0 / p * (1.0 - f * f) * f * r - (p - 2.0) * w4 * f * df * (df / r - f / (r * r));
    num / (r * w4 * (g2 + (p - 2.0) * df * df))
}

fn rk4_step(p: f64, r: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    let rhs = |r: f64, y: [f64; 2]| [y[1], second_derivative(p, r, y[0], y[1])];
    let k1 = rhs(r, y);
    let k2 = rhs(r + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = rhs(r + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrates from `1e-6` to each target radius, geometric steps below
/// `1e-3` and `substeps` uniform steps per grid interval above.
fn oracle(p: f64, a: f64, targets: &[f64], substeps: usize) -> Vec<[f64; 2]> {
    let mut r = 1e-6;
    let mut y = [a * r, a];
    while r < 1e-3 {
        let next = (r * 1.01).min(1e-3);
        y = rk4_step(p, r, y, next - r);
        r = next;
    }
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        let h = (t - r) / substeps as f64;
        for _ in 0..substeps {
            y = rk4_step(p, r, y, h);
            r += h;
        }
        r = t;
        out.push(y);
    }
    out
}

#[test]
fn profile_matches_rk4_near_origin() {
    for p in [2.5, 3.0, 4.0, 10.0] {
        let params = Params::new(p).unwrap();
        let grid = RadialGrid::graded(params.default_radius(), 4001).unwrap();
        let prof = solve_shooting(params, &grid, 1e-12).unwrap();
        let a = prof.f_prime_at_zero();
        let idx: Vec<usize> = (0..prof.len()).filter(|&i| prof.r()[i] > 1e-3 && prof.r()[i] <= 1.0).collect();
        let targets: Vec<f64> = idx.iter().map(|&i| prof.r()[i]).collect();
        let ys = oracle(p, a, &targets, 20);
        let mut worst = (0.0f64, 0.0f64);
        for (k, &i) in idx.iter().enumerate() {
            worst.0 = worst.0.max((ys[k][0] - prof.f()[i]).abs());
            worst.1 = worst.1.max((ys[k][1] - prof.df()[i]).abs());
        }
        assert!(worst.0 < 1e-8 && worst.1 < 1e-7, "p = {p}: {worst:?}");
    }
}

#[test]
fn series_coefficient_matches_rk4_curvature() {
    // f' = a (1 − 3c r²/2) + O(r⁴)
    for p in [2.5, 3.0, 6.0] {
        let params = Params::new(p).unwrap();
        let a = 0.5;
        let r = 2e-2;
        let y = oracle(p, a, &[r], 2000)[0];
        let c = (1.0 - y[1] / a) * 2.0 / (3.0 * r * r);
        let expect = params.series_coefficient(a);
        assert!((c - expect).abs() < 1e-2 * expect, "p = {p}: {c} vs {expect}");
    }
}
