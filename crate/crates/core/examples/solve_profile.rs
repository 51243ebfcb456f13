//! Solve for the radial profile at one exponent and audit it.
//!
//! cargo run --release --example solve_profile -- 3

use pgl::profile::{audit, solve_shooting, write_profile_csv, Params};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(3.0);
    let params = Params::new(p)?;
    let grid = pgl::default_grid(params)?;
    let prof = solve_shooting(params, &grid, 1e-10)?;

    println!("p = {p}, R = {}, {} nodes", grid.radius(), prof.len());
    println!("f'(0) = {:.12}", prof.f_prime_at_zero());
    let info = prof.info();
    println!("{} iterations over {} segments", info.iterations, info.segments);

    for r_probe in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let i = prof.r().partition_point(|&r| r < r_probe);
        println!("  r = {:>7.4}  f = {:.10}  f' = {:.3e}  h = {:.6}", prof.r()[i], prof.f()[i], prof.df()[i], prof.h()[i]);
    }

    let rep = audit(&prof, 1e-8);
    for c in &rep.checks {
        println!("  {:<4} {:<28} {:+.2e}", if c.passed { "ok" } else { "FAIL" }, c.name, c.worst_violation);
    }

    // first rows of the CSV the CLI writes
    let mut buf = Vec::new();
    write_profile_csv(&prof, &mut buf)?;
    for line in String::from_utf8(buf)?.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
