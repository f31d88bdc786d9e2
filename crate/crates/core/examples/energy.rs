//! Penalty energy, its largest term and the analytic gradient for a small
//! hand-made packing, checked against central differences.
//!
//! cargo run --example energy

use pucc::energy::{container_overlap, energy, energy_gradient, pair_overlap};
use pucc::optimizer::check_gradient;
use pucc::{Instance, Pattern};

fn main() -> pucc::Result<()> {
    let inst = Instance::new(&[1.0, 2.0, 3.0], "three")?;
    let radius = 4.6;
    let pattern = Pattern::from_centers(&[[-3.5, 0.0], [0.0, 2.5], [1.0, -1.5]])?;

    let rep = energy(&pattern, &inst, radius)?;
    println!(
        "E = {:.6}, max violation = {:.6}",
        rep.energy, rep.max_violation
    );
    for i in 0..inst.len() {
        for j in i + 1..inst.len() {
            println!(
                "  pair ({i}, {j}) depth {:.6}",
                pair_overlap(&pattern, &inst, i, j)?
            );
        }
        println!(
            "  disk {i} vs container {:.6}",
            container_overlap(&pattern, &inst, radius, i)?
        );
    }

    let grad = energy_gradient(&pattern, &inst, radius)?;
    println!("gradient {grad:.6?}");
    let err = check_gradient(&inst, radius, &pattern)?;
    println!("largest relative gap to finite differences: {err:.2e}");
    Ok(())
}
