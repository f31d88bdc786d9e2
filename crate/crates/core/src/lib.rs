//! Packing unequal circles into the smallest enclosing circle.
//!
//! The search works on local minima of an overlap penalty. A limited-memory
//! quasi-Newton minimizer turns any placement into a local minimum; swap
//! moves between disks of neighboring size define a neighborhood explored by
//! tabu search; random shift moves perturb the incumbent in an iterated local
//! search; and an outer loop shrinks the container radius as long as the
//! fixed-radius problem stays solvable.
//!
//! ```
//! use std::time::Duration;
//! use pucc::{driver, Instance, RngSeed, SolverParams};
//!
//! let inst = Instance::new(&[1.0, 2.0], "pair").unwrap();
//! let mut opts = driver::SolveOptions::new(Duration::from_secs(1), RngSeed(7));
//! opts.deterministic = true;
//! let run = driver::solve_with(&inst, &SolverParams::default(), &opts).unwrap();
//! assert!((run.best.radius - 3.0).abs() < 1e-6);
//! ```

pub mod cli;
pub mod driver;
pub mod energy;
pub mod error;
pub mod io;
pub mod its;
pub mod model;
pub mod optimizer;
pub mod tabu;
pub mod trace;

pub use error::{Error, Result};
pub use model::{Instance, Pattern, RngSeed, ShrinkSchedule, Solution, SolverParams, SolverRng};
