//! Shooting and direct energy minimization on the same grid.

use std::time::Instant;

use pgl::energy::energy;
use pgl::profile::{solve_shooting, solve_variational, Params};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>5} {:>12} {:>12} {:>10} {:>10} {:>14}", "p", "shoot", "variational", "t_shoot", "t_var", "sup |diff|");
    for p in [2.5, 3.0, 4.0, 6.0, 10.0] {
        let params = Params::new(p)?;
        let grid = pgl::default_grid(params)?;
        let t = Instant::now();
        let a = solve_shooting(params, &grid, 1e-10)?;
        let ta = t.elapsed();
        let t = Instant::now();
        let b = solve_variational(params, &grid, 1e-8)?;
        let tb = t.elapsed();
        println!(
            "{p:>5} {:>12.9} {:>12.9} {:>10.2?} {:>10.2?} {:>14.3e}",
            energy(&a)?.total,
            energy(&b)?.total,
            ta,
            tb,
            a.sup_distance(&b).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
