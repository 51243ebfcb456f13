use serde::Serialize;

use super::coefficients::CoefficientTables;
use super::forms::assemble_g2;
use super::StabilityError;
use crate::profile::Profile;

/// Smooth bump supported on `(lo, hi)`, equal to 1 at the midpoint.
pub fn cutoff(r: f64, lo: f64, hi: f64) -> f64 {
    let t = (2.0 * r - lo - hi) / (hi - lo);
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Derivative of [`cutoff`] in `r`.
pub fn cutoff_slope(r: f64, lo: f64, hi: f64) -> f64 {
    let t = (2.0 * r - lo - hi) / (hi - lo);
    if t.abs() >= 1.0 {
        0.0
    } else {
        let d = 1.0 - t * t;
        cutoff(r, lo, hi) * (-2.0 * t / (d * d)) * 2.0 / (hi - lo)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PiconeReport {
    /// `G₂(u, v)`
    pub g2: f64,
    /// `∫ (−b)(u√(ψ/φ) − v√(φ/ψ))² dr` with `φ = f/r`, `ψ = f′`
    pub bound: f64,
    /// `G₂ − bound`
    pub residual: f64,
    /// `∫ α (u′ − uφ′/φ)² + β (v′ − vψ′/ψ)² dr`, the two Picone defects.
    pub defects: f64,
    pub scale: f64,
    pub passed: bool,
}

/// Lower bound for `G₂` on a pair vanishing at both ends of the grid.
///
/// `u` and `v` are full-grid nodal arrays; the value at `r = 0` is ignored.
/// Passes when `G₂ − bound ≥ −1e-8 · scale`.
pub fn picone_certificate(
    profile: &Profile,
    tables: &CoefficientTables,
    u: &[f64],
    v: &[f64],
) -> Result<PiconeReport, StabilityError> {
    let (g2, _) = assemble_g2(profile);
    let x = g2.pack(&[u, v])?;
    let r = &profile.r()[1..];
    let n = r.len();
    if tables.len() != n {
        return Err(StabilityError::LengthMismatch { expected: n, got: tables.len() });
    }
    for j in [0, n - 1] {
        let worst = if x[2 * j].abs() >= x[2 * j + 1].abs() { x[2 * j] } else { x[2 * j + 1] };
        if worst != 0.0 {
            return Err(StabilityError::SupportTouchesBoundary { radius: r[j], value: worst });
        }
    }
    let h = &profile.h()[1..];
    let (f, df) = (&profile.f()[1..], &profile.df()[1..]);
    let p = profile.p();
    let mut bound = 0.0;
    let mut defects = 0.0;
    for e in 0..n - 1 {
        let dr = r[e + 1] - r[e];
        let du = (x[2 * e + 2] - x[2 * e]) / dr;
        let dv = (x[2 * e + 3] - x[2 * e + 1]) / dr;
        for j in [e, e + 1] {
            let (uj, vj) = (x[2 * j], x[2 * j + 1]);
            let sh = h[j].sqrt();
            let gap = uj * sh - vj / sh;
            bound += 0.5 * dr * (-tables.b[j]) * gap * gap;
            // φ′/φ = (h − 1)/r, ψ′/ψ = f″/f′
            let dh = super::h_slope(p, r[j], f[j], h[j], profile.gradient_norm()[j + 1]);
            let ddf = f[j] / r[j] * dh + f[j] / (r[j] * r[j]) * h[j] * (h[j] - 1.0);
            let pu = du - uj * (h[j] - 1.0) / r[j];
            let pv = dv - vj * ddf / df[j];
            defects += 0.5 * dr * (tables.alpha[j] * pu * pu + tables.beta[j] * pv * pv);
        }
    }
    let value = g2.form_value(&x);
    let scale = g2.scale(&x);
    let residual = value - bound;
    Ok(PiconeReport {
        g2: value,
        bound,
        residual,
        defects,
        scale,
        passed: residual >= -1e-8 * scale,
    })
}
