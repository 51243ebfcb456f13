use super::coefficients::{nodes, CoefficientTables, Node};
use super::{assemble, Assembled, Boundary, FormKind, Local, ModeOperator, Sector, StabilityError};
use crate::profile::Profile;

fn outer(q: &mut Local, c: &[f64], scale: f64) {
    for i in 0..c.len() {
        for j in 0..c.len() {
            q[i][j] += scale * c[i] * c[j];
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build(
    profile: &Profile,
    kind: FormKind,
    n: usize,
    sector: Sector,
    blocks: usize,
    local: impl Fn(usize, &Node) -> Local,
    boundary: Boundary,
    zero_mode: Option<Vec<f64>>,
) -> ModeOperator {
    let data = nodes(profile);
    let Assembled { matrix, sqrt_mass, locals } =
        assemble(profile.grid(), blocks, |j| local(j, &data[j]), boundary);
    ModeOperator {
        kind,
        n,
        sector,
        p: profile.p(),
        blocks,
        grid: profile.grid().clone(),
        matrix,
        sqrt_mass,
        locals,
        boundary,
        zero_mode,
    }
}

/// Decay exponent `s < 0` of the slow far-field solution `r^s` of mode `n`
/// (for `n = 2` it is `−1`, the decay of the translation modes).
pub fn far_field_exponent(p: f64, n: usize) -> f64 {
    let k = (n as f64 - 1.0).powi(2);
    0.5 * ((p - 2.0) - ((p - 2.0).powi(2) + 4.0 * (p - 1.0) * k).sqrt())
}

/// Energy beyond `R` of the slowly decaying combination `d = (u₁ − σu₂)/2`
/// continued as `d(R)(r/R)^s`: `p|s| R^{2−p} d²`. The other combination is
/// damped by the `f²(σu₁ + u₂)²` term and needs no closure.
fn far_field(p: f64, radius: f64, n: usize, sigma: f64) -> Boundary {
    let k = p * far_field_exponent(p, n).abs() * radius.powf(2.0 - p) / 4.0;
    Boundary([[k, -sigma * k], [-sigma * k, k]])
}

/// The same closure in `(A, B)` variables, where `d = A/2`.
fn far_field_pair(p: f64, radius: f64) -> Boundary {
    Boundary([[0.25 * p * radius.powf(2.0 - p), 0.0], [0.0, 0.0]])
}

fn interleave(profile: &Profile, comp: impl Fn(usize) -> [f64; 2]) -> Vec<f64> {
    (1..profile.len()).flat_map(comp).collect()
}

/// `E₁` restricted to one sector. The imaginary sector is
/// `∫ [(p/2)|∇u|^{p−2}(u′² + u²/r²) − (1 − f²) u²] r dr`; the real sector adds
/// the `(p − 2)` projection term and `2f²u²`. The two sectors do not couple.
///
/// Every form carries the energy of its far-field continuation beyond `R` as a
/// boundary term, so that the kernel directions stay (nearly) in the kernel
/// after truncation.
pub fn assemble_e1(profile: &Profile, sector: Sector) -> ModeOperator {
    let q = profile.p() - 2.0;
    let zero = (sector == Sector::Imaginary).then(|| profile.f()[1..].to_vec());
    // imaginary sector: the bounded exterior solution is u(R) f(r)/f(R), with
    // energy −(p/2)|∇u|^{p−2} h u(R)² at R; the real sector is damped by 2f²
    let boundary = match sector {
        Sector::Imaginary => {
            let last = profile.len() - 1;
            let w = 0.5 * profile.p() * profile.gradient_norm()[last].powf(q);
            Boundary([[-w * profile.h()[last], 0.0], [0.0, 0.0]])
        }
        Sector::Real => Boundary::default(),
    };
    build(
        profile,
        FormKind::E1,
        1,
        sector,
        1,
        |_, nd| {
            let mut m = [[0.0; 4]; 4];
            m[0][0] = nd.w * nd.r;
            m[1][1] = (nd.w / (nd.r * nd.r) - nd.v) * nd.r;
            if sector == Sector::Real {
                let c = [nd.df, nd.f / (nd.r * nd.r)];
                outer(&mut m, &c, q * nd.w * nd.r / (nd.grad * nd.grad));
                m[1][1] += 2.0 * nd.f * nd.f * nd.r;
            }
            m
        },
        boundary,
        zero,
    )
}

/// `Eₙ(φₙ, φ₂₋ₙ)` for `n ≥ 2` restricted to one sector, in the variables
/// `(u₁, u₂) = (φₙ, φ₂₋ₙ)` (real parts, or imaginary parts).
///
/// The imaginary sector equals the real one with `u₁ ↦ −u₁`. For `n = 2` the
/// kernel directions `(Φ₂, Φ₀)` (imaginary) and `(−Φ₂, Φ₀)` (real), with
/// `Φ₀ = f′ + f/r`, `Φ₂ = f/r − f′`, are attached.
pub fn assemble_en(n: usize, profile: &Profile, sector: Sector) -> Result<ModeOperator, StabilityError> {
    if n < 2 {
        return Err(StabilityError::InvalidMode { n, min: 2 });
    }
    let q = profile.p() - 2.0;
    let nf = n as f64;
    let mf = 2.0 - nf;
    let sigma = match sector {
        Sector::Real => 1.0,
        Sector::Imaginary => -1.0,
    };
    let zero = (n == 2).then(|| {
        interleave(profile, |i| {
            let (r, f, df) = (profile.r()[i], profile.f()[i], profile.df()[i]);
            let phi2 = f / r - df;
            [-sigma * phi2, df + f / r]
        })
    });
    Ok(build(
        profile,
        FormKind::En,
        n,
        sector,
        2,
        |_, nd| {
            let r2 = nd.r * nd.r;
            let mut m = [[0.0; 4]; 4];
            m[0][0] = nd.w * nd.r;
            m[1][1] = nd.w * nd.r;
            m[2][2] = (nd.w * nf * nf / r2 - nd.v) * nd.r;
            m[3][3] = (nd.w * mf * mf / r2 - nd.v) * nd.r;
            let fr = nd.f / r2;
            let c = [sigma * nd.df, nd.df, sigma * nf * fr, mf * fr];
            outer(&mut m, &c, 0.5 * q * nd.w * nd.r / (nd.grad * nd.grad));
            outer(&mut m, &[0.0, 0.0, sigma, 1.0], nd.f * nd.f * nd.r);
            m
        },
        far_field(profile.p(), profile.grid().radius(), n, sigma),
        zero,
    ))
}

fn pair_zero_mode(profile: &Profile) -> Vec<f64> {
    interleave(profile, |i| [profile.f()[i] / profile.r()[i], profile.df()[i]])
}

/// `F₂(A, B)`, the imaginary `n = 2` sector with `A = φ₀ + φ₂`, `B = φ₀ − φ₂`.
/// Kernel direction `(f/r, f′)`.
pub fn assemble_f2(profile: &Profile) -> ModeOperator {
    let q = profile.p() - 2.0;
    build(
        profile,
        FormKind::F2,
        2,
        Sector::Imaginary,
        2,
        |_, nd| {
            let w4 = 0.5 * nd.w;
            let r2 = nd.r * nd.r;
            let mut m = [[0.0; 4]; 4];
            m[0][0] = w4 * nd.r;
            m[1][1] = w4 * nd.r;
            outer(&mut m, &[0.0, 0.0, 1.0, -1.0], 2.0 * w4 / nd.r);
            let fr = nd.f / r2;
            outer(&mut m, &[0.0, nd.df, -fr, fr], q * w4 * nd.r / (nd.grad * nd.grad));
            m[3][3] += nd.f * nd.f * nd.r;
            m[2][2] -= 0.5 * nd.v * nd.r;
            m[3][3] -= 0.5 * nd.v * nd.r;
            m
        },
        far_field_pair(profile.p(), profile.grid().radius()),
        Some(pair_zero_mode(profile)),
    )
}

/// `G₂(A, B)` in its canonical form, with the coefficient tables.
pub fn assemble_g2(profile: &Profile) -> (ModeOperator, CoefficientTables) {
    let t = CoefficientTables::new(profile);
    let op = build(
        profile,
        FormKind::G2,
        2,
        Sector::Imaginary,
        2,
        |j, _| {
            let mut m = [[0.0; 4]; 4];
            m[0][0] = t.alpha[j];
            m[1][1] = t.beta[j];
            m[2][2] = t.a[j];
            m[2][3] = t.b[j];
            m[3][2] = t.b[j];
            m[3][3] = t.c[j];
            m
        },
        far_field_pair(profile.p(), profile.grid().radius()),
        Some(pair_zero_mode(profile)),
    );
    (op, t)
}

/// The nonnegative remainder
/// `∫ (p(p−2)/4) |∇u|^{p−2} (hA′ − (h²A − B)/r)² / (1 + h²) r dr`,
/// equal to `F₂ − G₂` on pairs vanishing near both ends.
pub fn remainder_form(profile: &Profile) -> ModeOperator {
    let q = profile.p() - 2.0;
    build(
        profile,
        FormKind::Remainder,
        2,
        Sector::Imaginary,
        2,
        |_, nd| {
            let mut m = [[0.0; 4]; 4];
            let s = 1.0 + nd.h * nd.h;
            let c = [nd.h, 0.0, -nd.h * nd.h / nd.r, 1.0 / nd.r];
            outer(&mut m, &c, 0.5 * q * nd.w * nd.r / s);
            m
        },
        Boundary::default(),
        None,
    )
}
