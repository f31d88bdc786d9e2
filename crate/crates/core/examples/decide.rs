//! Asks whether the contest disks fit in a container of a given radius,
//! using iterated tabu search or one of the multistart baselines.
//!
//! cargo run --release --example decide -- [n] [radius] [its|mts|sd] [seconds]

use std::time::Duration;

use pucc::its::{its_decide, multistart_decide, LocalSearch};
use pucc::trace::{Clock, Monitor};
use pucc::{Instance, RngSeed, SolverParams};

fn main() -> pucc::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(10);
    let radius = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(22.1);
    let strategy = args.get(2).map(String::as_str).unwrap_or("its");
    let secs = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(10.0);

    let inst = Instance::contest(n)?;
    let params = SolverParams::default();
    let budget = Duration::from_secs_f64(secs);
    let mut rng = RngSeed(7).rng();
    let mut monitor = Monitor::new(Clock::wall());
    let out = match strategy {
        "mts" => multistart_decide(
            &inst,
            radius,
            &params,
            LocalSearch::Tabu,
            budget,
            &mut rng,
            &mut monitor,
        )?,
        "sd" => multistart_decide(
            &inst,
            radius,
            &params,
            LocalSearch::SteepestDescent,
            budget,
            &mut rng,
            &mut monitor,
        )?,
        _ => its_decide(&inst, radius, &params, budget, &mut rng, &mut monitor)?,
    };
    println!(
        "contest{n} at R = {radius}: {} (E = {:.3e}) after {} restarts, {} perturbation rounds, {:.2}s",
        if out.feasible { "feasible" } else { "no packing found" },
        out.energy,
        out.restarts,
        out.perturb_rounds,
        out.elapsed.as_secs_f64()
    );
    Ok(())
}
