//! Coefficient signs of the canonical form G₂ and Picone lower bounds on
//! a few compactly supported pairs.

use pgl::profile::{solve_shooting, Params};
use pgl::stability::{assemble_f2, assemble_g2, coefficient_signs, cutoff, picone_certificate, remainder_form};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for p in [2.5, 3.0, 4.0, 6.0] {
        let params = Params::new(p)?;
        let prof = solve_shooting(params, &pgl::default_grid(params)?, 1e-10)?;
        let (_, tables) = assemble_g2(&prof);
        let s = coefficient_signs(&tables);
        println!(
            "p = {p}: alpha > 0 {} (min {:.3e}), beta > 0 {}, b < 0 {} (max {:.3e}){}",
            s.alpha_positive,
            s.min_alpha,
            s.beta_positive,
            s.b_negative,
            s.max_b,
            if s.certified_range { "" } else { "  [diagnostic]" }
        );
    }

    let params = Params::new(3.0)?;
    let prof = solve_shooting(params, &pgl::default_grid(params)?, 1e-10)?;
    let (_, tables) = assemble_g2(&prof);
    let (f2, rem) = (assemble_f2(&prof), remainder_form(&prof));
    let r = prof.r();
    type Pair<'a> = Box<dyn Fn(usize) -> (f64, f64) + 'a>;
    let pairs: [(&str, Pair); 3] = [
        ("cut-off kernel", Box::new(|i| {
            let c = cutoff(r[i], 0.2, 6.0);
            if i == 0 { (0.0, 0.0) } else { (c * prof.f()[i] / r[i], c * prof.df()[i]) }
        })),
        ("flipped sign", Box::new(|i| {
            let c = cutoff(r[i], 0.2, 6.0);
            if i == 0 { (0.0, 0.0) } else { (c * prof.f()[i] / r[i], -c * prof.df()[i]) }
        })),
        ("two bumps", Box::new(|i| (cutoff(r[i], 0.5, 3.0), cutoff(r[i], 2.0, 7.0)))),
    ];
    for (name, pair) in pairs {
        let (u, v): (Vec<f64>, Vec<f64>) = (0..r.len()).map(&pair).unzip();
        let rep = picone_certificate(&prof, &tables, &u, &v)?;
        let x = f2.pack(&[&u, &v])?;
        println!(
            "{name:<15} G2 = {:+.6e}  bound = {:.6e}  defects = {:.6e}  F2 - G2 = remainder {:.6e}  {}",
            rep.g2,
            rep.bound,
            rep.defects,
            rem.form_value(&x),
            if rep.passed { "passed" } else { "FAILED" }
        );
    }
    Ok(())
}
