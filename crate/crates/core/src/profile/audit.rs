use serde::{Deserialize, Serialize};

use super::Profile;

/// Outcome of one qualitative check. `worst_violation` is the largest amount
/// by which the inequality fails (nonpositive when it holds everywhere).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub worst_violation: f64,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub tol: f64,
    pub checks: Vec<Check>,
}

impl InvariantReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Largest entry of `violations` with its radius.
fn worst(iter: impl Iterator<Item = (f64, f64)>) -> (f64, Option<f64>) {
    iter.fold((f64::NEG_INFINITY, None), |(w, at), (v, r)| {
        if v > w || v.is_nan() {
            (v, Some(r))
        } else {
            (w, at)
        }
    })
}

fn check(name: &str, tol: f64, iter: impl Iterator<Item = (f64, f64)>) -> Check {
    let (v, r) = worst(iter);
    let v = if v == f64::NEG_INFINITY { 0.0 } else { v };
    Check { name: name.into(), passed: v <= tol, worst_violation: v, radius: r }
}

/// Evaluates every qualitative property of the minimizer on the nodes of
/// `profile`. Sign and monotonicity checks pass when their violation is at
/// most `tol`; the concavity check scales second differences by the squared
/// local spacing; the `h → 1` check at the first positive node uses a fixed
/// margin of 0.01.
pub fn audit(profile: &Profile, tol: f64) -> InvariantReport {
    let r = profile.r();
    let f = profile.f();
    let df = profile.df();
    let h = profile.h();
    let n = r.len();
    let p = profile.p();
    let pos = || (0..n).filter(move |&i| r[i] > 0.0);
    let mut checks = Vec::with_capacity(9);

    checks.push(check(
        "f_zero_at_origin",
        0.0,
        (0..n).filter(|&i| r[i] == 0.0).map(|i| (f[i].abs(), r[i])),
    ));
    checks.push(check(
        "f_in_unit_interval",
        tol,
        pos().map(|i| ((-f[i]).max(f[i] - 1.0), r[i])),
    ));
    checks.push(check("df_positive", tol, (0..n).map(|i| (-df[i], r[i]))));
    let lower = -1.0 / (p - 1.0);
    checks.push(check(
        "h_bounds",
        tol,
        (0..n).map(|i| ((h[i] - 1.0).max(lower - h[i]), r[i])),
    ));
    checks.push(check(
        "h_nonincreasing",
        tol,
        (1..n).map(|i| (h[i] - h[i - 1], r[i])),
    ));
    let ratio = |i: usize| if r[i] > 0.0 { f[i] / r[i] } else { profile.f_prime_at_zero() };
    checks.push(check(
        "f_over_r_decreasing",
        tol,
        (1..n).map(|i| (ratio(i) - ratio(i - 1), r[i])),
    ));
    checks.push(check(
        "concave",
        tol,
        (1..n - 1).map(|i| {
            let h0 = r[i] - r[i - 1];
            let h1 = r[i + 1] - r[i];
            let d2 = 2.0 * ((f[i + 1] - f[i]) / h1 - (f[i] - f[i - 1]) / h0) / (h0 + h1);
            (d2 * (0.5 * (h0 + h1)).powi(2), r[i])
        }),
    ));
    checks.push(check(
        "h_tends_to_one",
        0.01,
        pos().take(1).map(|i| ((h[i] - 1.0).abs(), r[i])),
    ));
    checks.push(check(
        "slope_at_origin_positive",
        0.0,
        std::iter::once((-profile.f_prime_at_zero(), 0.0)),
    ));
    InvariantReport { tol, checks }
}
