//! Energy split, Pohozaev residual and the comparison-function upper bound.

use pgl::energy::{energy, upper_bound_check_with};
use pgl::profile::{solve_shooting, Params};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>6} {:>14} {:>14} {:>14} {:>10} {:>14}", "p", "m_p", "kinetic", "potential", "pohozaev", "upper bound");
    for p in [2.5, 3.0, 4.0, 10.0, 20.0, 50.0, 100.0] {
        let params = Params::new(p)?;
        let prof = solve_shooting(params, &pgl::default_grid(params)?, 1e-10)?;
        let e = energy(&prof)?;
        let ub = upper_bound_check_with(&prof)?;
        println!(
            "{p:>6} {:>14.10} {:>14.10} {:>14.10} {:>10.2e} {:>14.10}{}",
            e.total,
            e.kinetic,
            e.potential,
            e.pohozaev_residual / e.total,
            ub.bound,
            if ub.pass { "" } else { "  (violated)" }
        );
    }
    println!("limit 1/6 = {:.10}", 1.0 / 6.0);
    Ok(())
}
