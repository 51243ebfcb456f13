use serde::Serialize;

use crate::profile::Profile;

/// `h′` from the profile equation written for `h = r f′/f`.
pub fn h_slope(p: f64, r: f64, f: f64, h: f64, grad: f64) -> f64 {
    let one_minus_f2 = (1.0 - f) * (1.0 + f);
    let pull = (2.0 / p) * grad.powf(2.0 - p) * r * one_minus_f2;
    let q = (1.0 + h * h) / (1.0 + (p - 1.0) * h * h);
    q * ((1.0 - h) * (1.0 + (p - 1.0) * h) / r - pull)
}

/// Profile data at one node with `r > 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub r: f64,
    pub f: f64,
    pub df: f64,
    pub h: f64,
    pub grad: f64,
    /// `1 − f²`
    pub v: f64,
    /// `(p/2) |∇u|^{p−2}`
    pub w: f64,
}

pub(crate) fn nodes(profile: &Profile) -> Vec<Node> {
    let p = profile.p();
    (1..profile.len())
        .map(|i| {
            let (r, f) = (profile.r()[i], profile.f()[i]);
            let grad = profile.gradient_norm()[i];
            Node {
                r,
                f,
                df: profile.df()[i],
                h: profile.h()[i],
                grad,
                v: (1.0 - f) * (1.0 + f),
                w: 0.5 * p * grad.powf(p - 2.0),
            }
        })
        .collect()
}

/// Nodal coefficients of `G₂ = ∫ (α u′² + β v′² + a u² + 2b uv + c v²) dr`
/// at the nodes with `r > 0`.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientTables {
    pub p: f64,
    pub r: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// `H = h |∇u|^{p−2} / (1 + h²)`
    pub big_h: Vec<f64>,
    pub big_h_prime: Vec<f64>,
}

impl CoefficientTables {
    pub fn new(profile: &Profile) -> Self {
        let p = profile.p();
        let q = p - 2.0;
        let nodes = nodes(profile);
        let len = nodes.len();
        let mut t = CoefficientTables {
            p,
            r: Vec::with_capacity(len),
            alpha: Vec::with_capacity(len),
            beta: Vec::with_capacity(len),
            a: Vec::with_capacity(len),
            b: Vec::with_capacity(len),
            c: Vec::with_capacity(len),
            big_h: Vec::with_capacity(len),
            big_h_prime: Vec::with_capacity(len),
        };
        for n in &nodes {
            let Node { r, f, df, h, grad, v, w } = *n;
            let w4 = 0.5 * w;
            let s = 1.0 + h * h;
            let gp = grad.powf(p - 2.0);
            let dh = h_slope(p, r, f, h, grad);
            let f_over_r = f / r;
            let d_f_over_r = f / (r * r) * (h - 1.0);
            let ddf = f_over_r * dh + f / (r * r) * h * (h - 1.0);
            let half_dgrad2 = df * ddf + f_over_r * d_f_over_r;
            let big_h = h * gp / s;
            let big_h_prime =
                gp * (1.0 - h * h) * dh / (s * s) + q * grad.powf(p - 4.0) * h / s * half_dgrad2;
            let d_h2_big_h = 2.0 * h * dh * big_h + h * h * big_h_prime;
            let pq4 = 0.25 * p * q;
            t.r.push(r);
            t.alpha.push(w4 * r * (1.0 - q * h * h / s));
            t.beta.push(w4 * r * (1.0 + q * h * h / s));
            t.a.push(w4 * (2.0 + q * (1.0 - h * h)) / r - pq4 * d_h2_big_h - 0.5 * v * r);
            t.b.push(-w4 * (2.0 + q * (1.0 - h * h) / s) / r + pq4 * big_h_prime);
            t.c.push(2.0 * w4 / r - pq4 * big_h_prime + f * f * r - 0.5 * v * r);
            t.big_h.push(big_h);
            t.big_h_prime.push(big_h_prime);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        [&self.alpha, &self.beta, &self.a, &self.b, &self.c, &self.big_h, &self.big_h_prime]
            .iter()
            .all(|col| col.iter().all(|x| x.is_finite()))
    }
}

/// Sign structure `α > 0`, `β > 0`, `b < 0` node by node.
#[derive(Debug, Clone, Serialize)]
pub struct SignCertificate {
    pub p: f64,
    pub alpha_positive: bool,
    pub beta_positive: bool,
    pub b_negative: bool,
    /// Smallest radius with `α ≤ 0`.
    pub first_alpha_violation: Option<f64>,
    pub first_beta_violation: Option<f64>,
    pub first_b_violation: Option<f64>,
    pub min_alpha: f64,
    pub max_b: f64,
    /// `p ≤ 4`, where the signs are expected to hold.
    pub certified_range: bool,
}

impl SignCertificate {
    pub fn holds(&self) -> bool {
        self.alpha_positive && self.beta_positive && self.b_negative
    }
}

pub fn coefficient_signs(tables: &CoefficientTables) -> SignCertificate {
    let first = |col: &[f64], bad: fn(f64) -> bool| {
        col.iter().position(|&x| bad(x)).map(|i| tables.r[i])
    };
    let fa = first(&tables.alpha, |x| !(x > 0.0));
    let fb = first(&tables.beta, |x| !(x > 0.0));
    let fbb = first(&tables.b, |x| !(x < 0.0));
    SignCertificate {
        p: tables.p,
        alpha_positive: fa.is_none(),
        beta_positive: fb.is_none(),
        b_negative: fbb.is_none(),
        first_alpha_violation: fa,
        first_beta_violation: fb,
        first_b_violation: fbb,
        min_alpha: tables.alpha.iter().cloned().fold(f64::INFINITY, f64::min),
        max_b: tables.b.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        certified_range: tables.p <= 4.0,
    }
}
