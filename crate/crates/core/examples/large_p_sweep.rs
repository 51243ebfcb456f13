//! Rates toward the p → ∞ limit, computed in parallel over p.

use pgl::asymptotics::{compact_rate_check, g_vs_g0};
use pgl::energy::{distance_to_limit, energy, expansion_check};
use pgl::profile::{solve_shooting, Params};
use rayon::prelude::*;

fn main() {
    let ps = [20.0, 30.0, 50.0, 100.0, 300.0, 1000.0];
    let rows: Vec<_> = ps
        .par_iter()
        .map(|&p| {
            let params = Params::new(p).unwrap();
            let prof = solve_shooting(params, &pgl::default_grid(params).unwrap(), 1e-10).unwrap();
            let m = energy(&prof).unwrap().total;
            let d = distance_to_limit(&prof);
            let (cf, cd) = compact_rate_check(&prof, 1.0).unwrap();
            (p, m, d, g_vs_g0(&prof, 1.2).unwrap(), expansion_check(&prof, 1.0).unwrap(), cf, cd)
        })
        .collect();
    println!("{:>6} {:>12} {:>14} {:>10} {:>10} {:>10} {:>10}", "p", "(m-1/6)p/lnp", "dist/sqrt(lnp/p)", "p|g-g0|", "expansion", "|f-r/√2|", "|f'-1/√2|");
    for (p, m, d, g, x, cf, cd) in rows {
        println!(
            "{p:>6} {:>12.5} {:>14.5} {:>10.5} {:>10.5} {:>10.2e} {:>10.2e}",
            (m - 1.0 / 6.0) * p / p.ln(),
            d / (p.ln() / p).sqrt(),
            g,
            x,
            cf,
            cd
        );
    }
}
