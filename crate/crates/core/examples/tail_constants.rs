//! Far-field constants lim r^p (1 - f²) = p/2 and lim r^{p+1} f' = p²/4,
//! and the gradient maximum.

use pgl::asymptotics::{gradient_bound_check, tail_constants};
use pgl::profile::{solve_shooting, Params};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for p in [2.5, 3.0, 4.0, 6.0, 10.0, 20.0, 50.0, 100.0] {
        let params = Params::new(p)?;
        let prof = solve_shooting(params, &pgl::default_grid(params)?, 1e-10)?;
        let g = gradient_bound_check(&prof);
        match tail_constants(&prof) {
            Ok(fit) => println!(
                "p = {p:>5}: {:>10.5} / {:<6} {:>12.5} / {:<8} window [{:.2}, {:.2}]  sup|grad u| = {:.5}",
                fit.tail_const_potential,
                fit.target_potential,
                fit.tail_const_derivative,
                fit.target_derivative,
                fit.fit_window.0,
                fit.fit_window.1,
                g.sup_norm
            ),
            Err(e) => println!("p = {p:>5}: {e}  sup|grad u| = {:.5}", g.sup_norm),
        }
    }
    Ok(())
}
