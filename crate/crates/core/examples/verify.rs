//! Round-trips a packing through the solution file format, verifies it and
//! shows that a tiny overlap is caught.
//!
//! cargo run --example verify

use pucc::io::{load_instance, load_solution, verify_solution, write_solution, WorstTerm};
use pucc::{Pattern, Solution};

fn main() -> pucc::Result<()> {
    let inst = load_instance("# three disks\n3\n1\n2\n1\n", "three")?;
    // sorted radii are 1, 1, 2: the big disk sits between the two small ones
    let pattern = Pattern::from_centers(&[[-3.0, 0.0], [3.0, 0.0], [0.0, 0.0]])?;
    let sol = Solution {
        radius: 4.0,
        pattern,
        max_violation: 0.0,
        instance_name: inst.name().into(),
    };
    let text = write_solution(&sol);
    print!("{text}");

    let loaded = load_solution(&text, &inst)?;
    let rep = verify_solution(&inst, &loaded, 1e-9)?;
    println!(
        "feasible: {}, max violation {:.1e}",
        rep.feasible, rep.max_violation
    );

    let mut squeezed = loaded.clone();
    squeezed.pattern.set_center(0, [-3.0 + 1e-8, 0.0]);
    let rep = verify_solution(&inst, &squeezed, 1e-9)?;
    let worst = match rep.worst {
        Some(WorstTerm::Pair(i, j)) => format!("disks {i} and {j}"),
        Some(WorstTerm::Container(i)) => format!("disk {i} and the container"),
        None => "nothing".into(),
    };
    println!(
        "after nudging: feasible {}, worst overlap {:.1e} between {worst}",
        rep.feasible, rep.max_violation
    );
    Ok(())
}
