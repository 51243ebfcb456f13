//! Lowest second-variation eigenvalues for modes n = 1..8.
//!
//! cargo run --release --example stability_spectrum -- 3 [nodes]

use pgl::profile::Params;
use pgl::stability::{analyze, StabilityOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3.0);
    let nodes: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1000);
    let opts = StabilityOptions { nodes, ..StabilityOptions::default() };
    let rep = analyze(Params::new(p)?, &opts)?;

    println!("p = {p}, {nodes} nodes (drift measured against {} nodes)", 2 * nodes - 1);
    println!("{:>3} {:<10} {:>14} {:>12} {:>12}  near-zero", "n", "part", "lambda_0", "lambda_1", "drift_0");
    for m in &rep.modes {
        let near: Vec<String> = m.near_zero.iter().map(|&i| format!("#{i} overlap {:.9}", m.overlaps[i])).collect();
        println!(
            "{:>3} {:<10} {:>14.6e} {:>12.6e} {:>12.2e}  {}",
            m.n,
            m.sector.as_str(),
            m.eigenvalues[0],
            m.eigenvalues[1],
            m.drift[0],
            near.join(", ")
        );
    }
    println!("kernel dimension {}, negatives {}: {}", rep.kernel_dimension, rep.negative_total, rep.verdict.label());
    Ok(())
}
