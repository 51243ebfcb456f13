use super::NumericsError;

/// Final bracket of a converged root search: `f(lo)` and `f(hi)` have opposite
/// signs (or one of them is zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
    pub iterations: usize,
}

/// Brent's method on `[a, b]`. With `tol = 0` the bracket shrinks to a few ulps.
pub fn find_root(f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, NumericsError> {
    find_root_bracketed(f, a, b, tol).map(|b| b.root)
}

pub fn find_root_bracketed(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<RootBracket, NumericsError> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    let done = |x: f64, fx: f64, y: f64, fy: f64, it: usize| {
        let (lo, hi, f_lo, f_hi) = if x <= y { (x, y, fx, fy) } else { (y, x, fy, fx) };
        RootBracket { root: x, lo, hi, f_lo, f_hi, iterations: it }
    };
    if fa == 0.0 {
        return Ok(done(a, fa, a, fa, 0));
    }
    if fb == 0.0 {
        return Ok(done(b, fb, b, fb, 0));
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange { a, b, fa, fb });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    const MAX_ITER: usize = 400;
    for it in 1..=MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(done(b, fb, c, fc, it));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if fb.is_nan() {
            return Err(NumericsError::NoSignChange { a, b, fa, fb });
        }
    }
    Err(NumericsError::RootNotConverged { iterations: MAX_ITER })
}
