//! Runs swap tabu search and steepest descent from the same local minima of
//! a tight decision problem and compares how often each reaches zero energy.
//!
//! cargo run --release --example tabu_vs_descent -- [starts]

use pucc::energy::energy;
use pucc::its::random_pattern;
use pucc::optimizer::minimize;
use pucc::tabu::{steepest_descent, swap_tabu_search};
use pucc::{Instance, RngSeed, SolverParams};

fn main() -> pucc::Result<()> {
    let starts: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20);
    let inst = Instance::contest(12)?;
    let radius = 28.37138944;
    let params = SolverParams::default();
    let settings = params.optimizer_settings(inst.len());
    let tol = params.feasibility_tol;

    let (mut ts_hits, mut sd_hits) = (0, 0);
    let (mut ts_sum, mut sd_sum) = (0.0, 0.0);
    let (mut ts_steps, mut sd_steps) = (0, 0);
    for s in 0..starts {
        let mut rng = RngSeed(s).rng();
        let x0 = random_pattern(&inst, radius, &mut rng)?;
        let x0 = minimize(&inst, radius, &x0, &settings)?.pattern;
        let ts = swap_tabu_search(&x0, &inst, radius, &params, &mut rng)?;
        let sd = steepest_descent(&x0, &inst, radius, &params)?;
        ts_hits += (energy(&ts.pattern, &inst, radius)?.max_violation <= tol) as u32;
        sd_hits += (energy(&sd.pattern, &inst, radius)?.max_violation <= tol) as u32;
        ts_sum += ts.energy;
        sd_sum += sd.energy;
        ts_steps += ts.steps.len();
        sd_steps += sd.steps.len();
    }
    let k = starts as f64;
    println!("strategy          feasible  mean E        mean steps");
    println!(
        "tabu search       {ts_hits:>3}/{starts}    {:<12.6e}  {:.0}",
        ts_sum / k,
        ts_steps as f64 / k
    );
    println!(
        "steepest descent  {sd_hits:>3}/{starts}    {:<12.6e}  {:.0}",
        sd_sum / k,
        sd_steps as f64 / k
    );
    Ok(())
}
