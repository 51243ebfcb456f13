use std::sync::OnceLock;

use nalgebra::DMatrix;
use pgl::numerics::RadialGrid;
use pgl::profile::{solve_shooting, Params, Profile};
use pgl::stability::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn profile_p3() -> &'static Profile {
    static P: OnceLock<Profile> = OnceLock::new();
    P.get_or_init(|| {
        let params = Params::new(3.0).unwrap();
        let grid = RadialGrid::graded(params.default_radius(), 2000).unwrap();
        solve_shooting(params, &grid, 1e-10).unwrap()
    })
}

struct Pt {
    r: f64,
    f: f64,
    df: f64,
    h: f64,
    g: f64,
    v: f64,
    w: f64,
}

fn pt(pr: &Profile, i: usize) -> Pt {
    let p = pr.p();
    let g = pr.gradient_norm()[i];
    let f = pr.f()[i];
    Pt { r: pr.r()[i], f, df: pr.df()[i], h: pr.h()[i], g, v: 1.0 - f * f, w: 0.5 * p * g.powf(p - 2.0) }
}

/// Trapezoidal sum of an integrand in `(u′…, u…)` with element slopes and
/// nodal values; `x` is packed (nodes `r > 0`).
fn trapezoid(pr: &Profile, m: usize, x: &[f64], integrand: impl Fn(usize, &[f64], &[f64]) -> f64) -> f64 {
    let r = pr.r();
    let mut total = 0.0;
    for e in 0..r.len() - 2 {
        let (i0, i1) = (e + 1, e + 2);
        let dr = r[i1] - r[i0];
        let slopes: Vec<f64> = (0..m).map(|c| (x[(e + 1) * m + c] - x[e * m + c]) / dr).collect();
        for (j, i) in [(e, i0), (e + 1, i1)] {
            total += 0.5 * dr * integrand(i, &slopes, &x[j * m..j * m + m]);
        }
    }
    total
}

fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn assembly_matches_direct_quadrature() {
    let pr = profile_p3();
    let p = pr.p();
    let q = p - 2.0;
    let big_r = pr.grid().radius();
    let last = pr.len() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    for sector in [Sector::Real, Sector::Imaginary] {
        let op = assemble_e1(pr, sector);
        for _ in 0..20 {
            let x = random_vector(&mut rng, op.order());
            let mut direct = trapezoid(pr, 1, &x, |i, d, u| {
                let n = pt(pr, i);
                let mut s = n.w * (d[0] * d[0] + u[0] * u[0] / (n.r * n.r)) * n.r - n.v * u[0] * u[0] * n.r;
                if sector == Sector::Real {
                    let c = n.df * d[0] + n.f * u[0] / (n.r * n.r);
                    s += q * n.w * c * c / (n.g * n.g) * n.r + 2.0 * n.f * n.f * u[0] * u[0] * n.r;
                }
                s
            });
            if sector == Sector::Imaginary {
                let n = pt(pr, last);
                direct -= n.w * n.h * x[x.len() - 1].powi(2);
            }
            assert!(rel(op.form_value(&x), direct) < 1e-10, "E1 {sector:?}");
        }
    }

    for n_mode in [2usize, 3, 6] {
        for sector in [Sector::Real, Sector::Imaginary] {
            let op = assemble_en(n_mode, pr, sector).unwrap();
            let sg = if sector == Sector::Real { 1.0 } else { -1.0 };
            let nf = n_mode as f64;
            let mf = 2.0 - nf;
            let kff = p * far_field_exponent(p, n_mode).abs() * big_r.powf(2.0 - p) / 4.0;
            for _ in 0..20 {
                let x = random_vector(&mut rng, op.order());
                let mut direct = trapezoid(pr, 2, &x, |i, d, u| {
                    let n = pt(pr, i);
                    let r2 = n.r * n.r;
                    let kin = d[0] * d[0] + d[1] * d[1] + nf * nf * u[0] * u[0] / r2 + mf * mf * u[1] * u[1] / r2;
                    let c = n.df * (sg * d[0] + d[1]) + n.f * (nf * sg * u[0] + mf * u[1]) / r2;
                    let pot = n.f * n.f * (sg * u[0] + u[1]).powi(2) - n.v * (u[0] * u[0] + u[1] * u[1]);
                    (n.w * (kin + 0.5 * q * c * c / (n.g * n.g)) + pot) * n.r
                });
                let k = x.len();
                direct += kff * (x[k - 2] - sg * x[k - 1]).powi(2);
                assert!(rel(op.form_value(&x), direct) < 1e-10, "E{n_mode} {sector:?}");
            }
        }
    }

    let f2 = assemble_f2(pr);
    let (g2, t) = assemble_g2(pr);
    let rem = remainder_form(pr);
    let kff = 0.25 * p * big_r.powf(2.0 - p);
    for _ in 0..20 {
        let x = random_vector(&mut rng, f2.order());
        let k = x.len();
        let tail = kff * x[k - 2] * x[k - 2];
        let f2_direct = trapezoid(pr, 2, &x, |i, d, u| {
            let n = pt(pr, i);
            let r2 = n.r * n.r;
            let c = n.df * d[1] - n.f * (u[0] - u[1]) / r2;
            0.5 * n.w * (d[0] * d[0] + d[1] * d[1] + 2.0 * (u[0] - u[1]).powi(2) / r2 + q * c * c / (n.g * n.g)) * n.r
                + n.f * n.f * u[1] * u[1] * n.r
                - 0.5 * n.v * (u[0] * u[0] + u[1] * u[1]) * n.r
        }) + tail;
        assert!(rel(f2.form_value(&x), f2_direct) < 1e-10, "F2");

        let g2_direct = trapezoid(pr, 2, &x, |i, d, u| {
            let n = pt(pr, i);
            let j = i - 1;
            let r2 = n.r * n.r;
            let (a, b) = (u[0], u[1]);
            let s = 1.0 + n.h * n.h;
            let h2 = n.h * n.h;
            let dh = h_slope(p, n.r, n.f, n.h, n.g);
            let hh = t.big_h[j];
            let dhh = t.big_h_prime[j];
            let d_h2h = 2.0 * n.h * dh * hh + h2 * dhh;
            let bracket = d[0] * d[0]
                + d[1] * d[1]
                + 2.0 * (a - b).powi(2) / r2
                + q * (h2 * (d[1] * d[1] - d[0] * d[0]) + (1.0 - h2 * h2) * a * a / r2 - 2.0 * (1.0 - h2) * a * b / r2) / s;
            (0.5 * n.w * bracket + n.f * n.f * b * b - 0.5 * n.v * (a * a + b * b)) * n.r
                + 0.25 * p * q * (dhh * (2.0 * a * b - b * b) - d_h2h * a * a)
        }) + tail;
        assert!(rel(g2.form_value(&x), g2_direct) < 1e-10, "G2");

        let rem_direct = trapezoid(pr, 2, &x, |i, d, u| {
            let n = pt(pr, i);
            let c = n.h * d[0] - (n.h * n.h * u[0] - u[1]) / n.r;
            0.5 * q * n.w * c * c / (1.0 + n.h * n.h) * n.r
        });
        assert!(rel(rem.form_value(&x), rem_direct) < 1e-10, "remainder");
    }
}

#[test]
fn quadratic_scaling_and_zero_vector() {
    let pr = profile_p3();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for op in [assemble_f2(pr), assemble_en(3, pr, Sector::Real).unwrap(), assemble_e1(pr, Sector::Real)] {
        let x = random_vector(&mut rng, op.order());
        let s = rng.gen_range(-3.0..3.0);
        let sx: Vec<f64> = x.iter().map(|v| s * v).collect();
        assert!(rel(op.form_value(&sx), s * s * op.form_value(&x)) < 1e-12);
        assert_eq!(op.form_value(&vec![0.0; op.order()]), 0.0);
    }
}

#[test]
fn rotation_mode_is_in_the_kernel_of_e1() {
    let pr = profile_p3();
    let op = assemble_e1(pr, Sector::Imaginary);
    let x = op.pack(&[pr.f()]).unwrap();
    let val = op.form_value(&x);
    assert!(val.abs() <= 1e-8 * op.scale(&x), "{val:e}");
    let dx = op.pack(&[pr.df()]).unwrap();
    assert!(op.functional(&x, &dx).abs() < 1e-6);
}

#[test]
fn real_part_of_e1_on_the_profile() {
    // only the 2f² and (p − 2) projection terms survive
    let pr = profile_p3();
    let p = pr.p();
    let op = assemble_e1(pr, Sector::Real);
    let x = op.pack(&[pr.f()]).unwrap();
    let dx = op.pack(&[pr.df()]).unwrap();
    let oracle: f64 = (0..pr.len())
        .map(|i| {
            let n = pt(pr, i);
            pr.grid().weights()[i] * (2.0 * n.f.powi(4) + 0.5 * p * (p - 2.0) * n.g.powf(p)) * n.r
        })
        .sum();
    // the kinetic part integrates to its flux at R, which this sector has no
    // boundary term for
    let tail = pt(pr, pr.len() - 1);
    let oracle = oracle + tail.w * tail.h * tail.f * tail.f;
    let got = op.functional(&x, &dx);
    assert!(rel(got, oracle) < 1e-9, "{got} vs {oracle}");
    assert!(rel(op.form_value(&x), oracle) < 1e-6);
}

#[test]
fn e1_ground_state_representation() {
    let pr = profile_p3();
    let p = pr.p();
    let op = assemble_e1(pr, Sector::Imaginary);
    let r = pr.r();
    for (lo, hi) in [(-1.0, 2.5), (0.3, 4.0), (1.0, 9.0)] {
        let w: Vec<f64> = r.iter().map(|&x| cutoff(x, lo, hi)).collect();
        let dw: Vec<f64> = r.iter().map(|&x| cutoff_slope(x, lo, hi)).collect();
        let u: Vec<f64> = (0..r.len()).map(|i| pr.f()[i] * w[i]).collect();
        let du: Vec<f64> = (0..r.len()).map(|i| pr.df()[i] * w[i] + pr.f()[i] * dw[i]).collect();
        let lhs = op.functional(&op.pack(&[&u]).unwrap(), &op.pack(&[&du]).unwrap());
        let rhs: f64 = (0..r.len())
            .map(|i| {
                let n = pt(pr, i);
                pr.grid().weights()[i] * 0.5 * p * n.g.powf(p - 2.0) * n.f * n.f * dw[i] * dw[i] * n.r
            })
            .sum();
        assert!((lhs - rhs).abs() < 1e-8, "({lo}, {hi}): {lhs} vs {rhs}");
    }
}

#[test]
fn higher_modes_dominate_e1_tilde_of_moduli() {
    let pr = profile_p3();
    let e1 = assemble_e1(pr, Sector::Imaginary);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [3, 4, 7] {
        let op = assemble_en(n, pr, Sector::Real).unwrap();
        for _ in 0..5 {
            let x = random_vector(&mut rng, op.order());
            let u1: Vec<f64> = x.iter().step_by(2).map(|v| v.abs()).collect();
            let u2: Vec<f64> = x.iter().skip(1).step_by(2).map(|v| v.abs()).collect();
            assert!(op.form_value(&x) >= e1.form_value(&u1) + e1.form_value(&u2));
        }
    }
    assert!(assemble_en(1, pr, Sector::Real).is_err());
}

#[test]
fn higher_modes_are_strictly_positive_and_ordered() {
    let pr = profile_p3();
    let s3 = spectrum(&assemble_en(3, pr, Sector::Real).unwrap(), 3).unwrap();
    let s5 = spectrum(&assemble_en(5, pr, Sector::Real).unwrap(), 3).unwrap();
    assert!(s3.eigenvalues[0] > 0.0);
    assert!(s5.eigenvalues[0] >= s3.eigenvalues[0]);
    for s in [&s3, &s5] {
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(s.negative_count, 0);
        assert!(s.zero_mode_overlaps.is_empty());
    }
}

#[test]
fn imaginary_e2_is_f2_in_rotated_variables() {
    let pr = profile_p3();
    let e2 = spectrum(&assemble_en(2, pr, Sector::Imaginary).unwrap(), 4).unwrap();
    let f2 = spectrum(&assemble_f2(pr), 4).unwrap();
    for (a, b) in e2.eigenvalues.iter().zip(&f2.eigenvalues).skip(1) {
        assert!(rel(*a, 2.0 * b) < 1e-8, "{a} vs 2·{b}");
    }
    assert!(f2.zero_mode_overlaps[0] > 0.999);
    assert!(e2.zero_mode_overlaps[0] > 0.999);
}

#[test]
fn translation_modes_annihilate_f2_and_g2() {
    let pr = profile_p3();
    let f2 = assemble_f2(pr);
    let (g2, tables) = assemble_g2(pr);
    let x = f2.zero_mode().unwrap().to_vec();
    assert!(f2.form_value(&x).abs() <= 1e-8 * f2.scale(&x));
    assert!(g2.form_value(&x).abs() <= 1e-8 * g2.scale(&x));
    assert!(g2.residual(&x) <= 1e-6);
    assert!(f2.residual(&x) <= 1e-6);
    assert!(tables.all_finite());
    assert!(tables.beta.iter().all(|&b| b > 0.0));
}

fn bump_pair(pr: &Profile, lo: f64, hi: f64, ca: f64, cb: f64) -> [Vec<f64>; 4] {
    let p = pr.p();
    let n = pr.len();
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let (lo2, hi2) = (lo + 0.3 * (hi - lo), hi);
    for i in 1..n {
        let d = pt(pr, i);
        let (c1, s1) = (cutoff(d.r, lo, hi), cutoff_slope(d.r, lo, hi));
        let (c2, s2) = (cutoff(d.r, lo2, hi2), cutoff_slope(d.r, lo2, hi2));
        let phi = d.f / d.r;
        let dphi = d.f / (d.r * d.r) * (d.h - 1.0);
        let dh = h_slope(p, d.r, d.f, d.h, d.g);
        let ddf = phi * dh + d.f / (d.r * d.r) * d.h * (d.h - 1.0);
        out[0][i] = phi * c1 + ca * c2;
        out[1][i] = d.df * c1 + cb * c2;
        out[2][i] = dphi * c1 + phi * s1 + ca * s2;
        out[3][i] = ddf * c1 + d.df * s1 + cb * s2;
    }
    out
}

#[test]
fn f2_minus_g2_is_the_remainder() {
    let pr = profile_p3();
    let f2 = assemble_f2(pr);
    let (g2, _) = assemble_g2(pr);
    let rem = remainder_form(pr);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let lo = rng.gen_range(0.1..2.0);
        let hi = lo + rng.gen_range(2.0..6.0);
        let [u, v, du, dv] = bump_pair(pr, lo, hi, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let x = f2.pack(&[&u, &v]).unwrap();
        let dx = f2.pack(&[&du, &dv]).unwrap();
        assert!(f2.form_value(&x) - g2.form_value(&x) >= -1e-10);
        let gap = f2.functional(&x, &dx) - g2.functional(&x, &dx);
        let r = rem.functional(&x, &dx);
        assert!(r >= 0.0);
        assert!(rel(gap, r) < 1e-6, "{gap:e} vs {r:e}");
    }
}

#[test]
fn coefficient_signs_hold_at_p3() {
    let (_, t) = assemble_g2(profile_p3());
    let c = coefficient_signs(&t);
    assert!(c.holds() && c.certified_range);
    assert!(c.first_alpha_violation.is_none());
}

#[test]
fn picone_certificate_cases() {
    let pr = profile_p3();
    let (_, t) = assemble_g2(pr);
    let r = pr.r();
    let chi: Vec<f64> = r.iter().map(|&x| cutoff(x, 0.2, 6.0)).collect();
    let phi: Vec<f64> = (0..r.len()).map(|i| if i == 0 { 0.0 } else { pr.f()[i] / r[i] * chi[i] }).collect();
    let psi: Vec<f64> = (0..r.len()).map(|i| pr.df()[i] * chi[i]).collect();
    let same = picone_certificate(pr, &t, &phi, &psi).unwrap();
    assert!(same.passed);
    assert!(same.bound.abs() < 1e-20);
    let neg: Vec<f64> = psi.iter().map(|x| -x).collect();
    let flip = picone_certificate(pr, &t, &phi, &neg).unwrap();
    assert!(flip.passed && flip.bound > 0.0 && flip.g2 > 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let lo = rng.gen_range(0.05..3.0);
        let hi = lo + rng.gen_range(0.5..8.0);
        let u: Vec<f64> = r.iter().map(|&x| rng.gen_range(-1.0..1.0) * cutoff(x, lo, hi)).collect();
        let v: Vec<f64> = r.iter().map(|&x| rng.gen_range(-1.0..1.0) * cutoff(x, lo, hi)).collect();
        let rep = picone_certificate(pr, &t, &u, &v).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    let ones = vec![1.0; r.len()];
    assert!(matches!(
        picone_certificate(pr, &t, &ones, &psi),
        Err(StabilityError::SupportTouchesBoundary { .. })
    ));
}

#[test]
fn banded_spectrum_matches_dense_oracle() {
    let params = Params::new(3.0).unwrap();
    let grid = RadialGrid::uniform(8.0, 150).unwrap();
    let pr = solve_shooting(params, &grid, 1e-10).unwrap();
    for op in [assemble_e1(&pr, Sector::Imaginary), assemble_f2(&pr), assemble_en(4, &pr, Sector::Imaginary).unwrap()] {
        let dense = op.matrix().to_dense();
        let n = dense.len();
        let m = DMatrix::from_fn(n, n, |i, j| dense[i][j]);
        let mut oracle: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        let ours = spectrum(&op, 5).unwrap();
        for (a, b) in ours.eigenvalues.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-9 * op.norm(), "{a} vs {b}");
        }
        assert!(ours.zero_mode_overlaps.iter().all(|o| (0.0..=1.0).contains(o)));
    }
}

#[test]
fn kernel_vectors_are_recovered() {
    let pr = profile_p3();
    let e1 = spectrum(&assemble_e1(pr, Sector::Imaginary), 2).unwrap();
    assert!(e1.zero_mode_overlaps[0] > 0.999);
    assert!(e1.eigenvalues[0].abs() < 1e-6);
    assert!(e1.eigenvalues[1] > 1e-3);
}

#[test]
fn real_sector_of_e1_is_strictly_positive() {
    let pr = profile_p3();
    let s = spectrum(&assemble_e1(pr, Sector::Real), 3).unwrap();
    assert!(s.eigenvalues[0] > 1.0, "{:?}", s.eigenvalues);
    assert!(s.zero_mode_overlaps.is_empty());
}
