//! Drives a random pattern to a local minimum of the penalty with L-BFGS.
//!
//! cargo run --example minimize -- [n] [radius] [seed]

use pucc::energy::energy;
use pucc::its::random_pattern;
use pucc::optimizer::minimize;
use pucc::{Instance, RngSeed, SolverParams};

fn main() -> pucc::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(12);
    let radius = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(29.0);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let inst = Instance::contest(n)?;
    let settings = SolverParams::default().optimizer_settings(n);
    let start = random_pattern(&inst, radius, &mut RngSeed(seed).rng())?;
    println!("start E = {:.6e}", energy(&start, &inst, radius)?.energy);

    let out = minimize(&inst, radius, &start, &settings)?;
    let rep = energy(&out.pattern, &inst, radius)?;
    println!(
        "local minimum E = {:.6e} (max violation {:.3e}) after {} iterations, {} evaluations, {:?}",
        out.energy, rep.max_violation, out.iterations, out.evaluations, out.termination
    );
    Ok(())
}
