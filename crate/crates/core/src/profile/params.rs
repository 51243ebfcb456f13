use serde::{Deserialize, Serialize};

use super::ProfileError;

/// Largest exponent accepted; beyond this `|∇u|^p` loses all dynamic range.
pub const MAX_EXPONENT: f64 = 1000.0;

/// Exponents in `(2, SLOW_TAIL_LIMIT]` decay too slowly for the default radius.
pub const SLOW_TAIL_LIMIT: f64 = 2.05;

/// Radius where the series start hands over to the integrator.
pub const START_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    p: f64,
}

impl Params {
    pub fn new(p: f64) -> Result<Self, ProfileError> {
        if !p.is_finite() || p <= 2.0 {
            return Err(ProfileError::InvalidParams(format!("p must exceed 2 (got {p})")));
        }
        if p > MAX_EXPONENT {
            return Err(ProfileError::InvalidParams(format!(
                "p must not exceed {MAX_EXPONENT} (got {p})"
            )));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_slow_tail(&self) -> bool {
        self.p <= SLOW_TAIL_LIMIT
    }

    /// Truncation radius: deep enough that `1 − f² < 1e−3` on a wide window
    /// before `R`, shorter for large `p` where the tail is negligible.
    pub fn default_radius(&self) -> f64 {
        match self.p {
            p if p <= SLOW_TAIL_LIMIT => 40.0,
            p if p < 3.5 => 20.0,
            p if p < 5.0 => 12.0,
            _ => 8.0,
        }
    }

    /// Prescribed value at the truncation radius: the two-term far-field
    /// expansion of [`Params::tail_closure`]. To leading order this is
    /// `1 − (p/4) R^{−p}`.
    pub fn boundary_value(&self, radius: f64) -> f64 {
        self.tail_closure(radius).0
    }

    /// Leading-order far-field value `1 − (p/4) R^{−p}`.
    pub fn leading_boundary_value(&self, radius: f64) -> f64 {
        1.0 - 0.25 * self.p * radius.powf(-self.p)
    }

    /// Far-field slope `(p²/4) R^{−p−1}`.
    pub fn boundary_slope(&self, radius: f64) -> f64 {
        0.25 * self.p * self.p * radius.powf(-self.p - 1.0)
    }

    /// Two-term far-field expansion of `(f, f')`:
    /// `1 − f² = (p/2) r^{−p} (1 + k r^{−p})`, `k = (p − 1)p²/2 − (p − 2)p/4`.
    pub fn tail_closure(&self, r: f64) -> (f64, f64) {
        let p = self.p;
        let k = 0.5 * (p - 1.0) * p * p - 0.25 * (p - 2.0) * p;
        let x = r.powf(-p);
        let e = 0.5 * p * x * (1.0 + k * x);
        let f = (1.0 - e).sqrt();
        let de = -0.5 * p * p * x / r * (1.0 + 2.0 * k * x);
        (f, -de / (2.0 * f))
    }

    /// Coefficient `c` of the small-`r` series `h = 1 − c r²`, `f = a r (1 − c r²/2)`.
    pub fn series_coefficient(&self, a: f64) -> f64 {
        let p = self.p;
        (2.0 * a * a).powf(1.0 - 0.5 * p) / (p * p)
    }
}

/// Limit profile as `p → ∞`: `r/√2` on `[0, √2)`, `1` beyond.
pub fn f_infinity(r: f64) -> f64 {
    if r < std::f64::consts::SQRT_2 {
        r / std::f64::consts::SQRT_2
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_p_at_most_two() {
        assert!(Params::new(2.0).is_err());
        assert!(Params::new(1.5).is_err());
        assert!(Params::new(f64::NAN).is_err());
        assert!(Params::new(1001.0).is_err());
        assert!(Params::new(2.0001).is_ok());
    }

    #[test]
    fn limit_profile_values() {
        assert_eq!(f_infinity(0.0), 0.0);
        assert_eq!(f_infinity(2f64.sqrt()), 1.0);
        assert!((f_infinity(1.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(f_infinity(5.0), 1.0);
    }

    #[test]
    fn closure_matches_leading_order() {
        let par = Params::new(3.0).unwrap();
        let r = 50.0;
        let (f, df) = par.tail_closure(r);
        assert!(((1.0 - f * f) * r.powi(3) / 1.5 - 1.0).abs() < 1e-3);
        assert!((df * r.powi(4) / 2.25 - 1.0).abs() < 1e-3);
        assert!((par.leading_boundary_value(r) - f).abs() < 1e-8);
    }
}
