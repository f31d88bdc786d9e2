//! Minimizes the container radius for a contest instance and writes the
//! packing as an SVG drawing.
//!
//! cargo run --release --example solve -- [n] [seconds] [out.svg]

use std::time::Duration;

use pucc::driver::solve;
use pucc::io::render_svg;
use pucc::{Instance, RngSeed, SolverParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(10);
    let secs = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10.0);
    let out = args
        .get(2)
        .cloned()
        .unwrap_or_else(|| format!("contest{n}.svg"));

    let inst = Instance::contest(n)?;
    let run = solve(
        &inst,
        &SolverParams::default(),
        Duration::from_secs_f64(secs),
        RngSeed(1),
    )?;
    for a in &run.history {
        println!(
            "target {:.8} {} at {:.2}s",
            a.target_radius,
            match a.tightened_radius {
                Some(r) => format!("feasible, tightened to {r:.8}"),
                None => "not reached".into(),
            },
            a.elapsed.as_secs_f64()
        );
    }
    println!(
        "best R = {:.8} (max violation {:.1e}), found after {:.2}s",
        run.best.radius,
        run.best.max_violation,
        run.time_to_best.as_secs_f64()
    );
    std::fs::write(&out, render_svg(&inst, &run.best)?)?;
    println!("wrote {out}");
    Ok(())
}
