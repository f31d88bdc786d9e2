//! Records the search trajectory of a reproducible solve and writes the
//! trace and per-attempt history as CSV.
//!
//! cargo run --release --example trace -- [n] [seconds] [trace.csv] [history.csv]

use std::time::Duration;

use pucc::driver::{solve_with, SolveOptions};
use pucc::io::{write_history_csv, write_trace_csv};
use pucc::{Instance, RngSeed, SolverParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(9);
    let secs = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let trace_path = args.get(2).cloned().unwrap_or_else(|| "trace.csv".into());
    let history_path = args.get(3).cloned().unwrap_or_else(|| "history.csv".into());

    let inst = Instance::contest(n)?;
    let mut opts = SolveOptions::new(Duration::from_secs_f64(secs), RngSeed(3));
    opts.deterministic = true;
    opts.trace = true;
    let run = solve_with(&inst, &SolverParams::default(), &opts)?;

    std::fs::write(&trace_path, write_trace_csv(&run.trace)?)?;
    std::fs::write(&history_path, write_history_csv(&run.history)?)?;
    println!(
        "R = {:.8}: {} trace records in {trace_path}, {} attempts in {history_path}",
        run.best.radius,
        run.trace.len(),
        run.history.len()
    );
    Ok(())
}
