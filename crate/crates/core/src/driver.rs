//! Smallest-container search as a sequence of decision problems with
//! descending radius.
//!
//! The run starts from a collinear lineup that is feasible at `sum r_i`,
//! tightens it by bisection, then repeatedly asks the iterated tabu search
//! for a feasible pattern slightly below the best radius so far. Every
//! success is tightened again and becomes the new best.

use std::time::Duration;

use crate::energy;
use crate::error::{Error, Result};
use crate::its::{its_decide, DecideOutcome};
use crate::model::{Instance, Pattern, RngSeed, Solution, SolverParams, SolverRng};
use crate::optimizer::minimize;
use crate::trace::{Clock, Monitor, TraceRecord};

/// Container radius at which the lineup pattern is feasible: `sum r_i`.
pub fn initial_radius(instance: &Instance) -> f64 {
    instance.sum_radii()
}

/// Disks on the x axis, consecutive ones tangent, spanning the diameter of
/// a container of radius [`initial_radius`].
pub fn lineup_pattern(instance: &Instance) -> Pattern {
    let mut p = Pattern::zeros(instance.len());
    let mut left = -initial_radius(instance);
    for (i, &r) in instance.radii().iter().enumerate() {
        p.set_center(i, [left + r, 0.0]);
        left += 2.0 * r;
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tightened {
    pub pattern: Pattern,
    pub radius: f64,
    pub probes: usize,
    pub evaluations: u64,
}

/// Shrinks the container around `pattern` by bisection on the radius.
///
/// Each probe minimizes from the current pattern at the midpoint radius and
/// counts as feasible only if the optimizer reaches its energy tolerance and
/// the largest overlap is within the feasibility tolerance.
pub fn tighten(
    pattern: &Pattern,
    instance: &Instance,
    radius: f64,
    params: &SolverParams,
) -> Result<Tightened> {
    const MAX_PROBES: usize = 60;
    const REL_WIDTH: f64 = 1e-10;
    let start_violation = energy::max_violation(pattern, instance, radius)?;
    if start_violation > params.feasibility_tol {
        return Err(Error::Precondition(format!(
            "tighten needs a feasible pattern, largest overlap is {start_violation:e}"
        )));
    }
    let settings = params.optimizer_settings(instance.len());
    let mut best = pattern.clone();
    let mut hi = radius;
    let mut lo = instance.largest_radius().min(radius);
    let mut probes = 0;
    let mut evaluations = 0;
    while hi - lo > REL_WIDTH * radius && probes < MAX_PROBES {
        let mid = 0.5 * (lo + hi);
        probes += 1;
        let m = minimize(instance, mid, &best, &settings)?;
        evaluations += m.evaluations;
        let ok = m.energy <= settings.energy_tol
            && energy::max_violation(&m.pattern, instance, mid)? <= params.feasibility_tol;
        if ok {
            hi = mid;
            best = m.pattern;
        } else {
            lo = mid;
        }
    }
    Ok(Tightened {
        pattern: best,
        radius: hi,
        probes,
        evaluations,
    })
}

/// One decision attempt of the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Attempt {
    /// Radius the decision problem was posed at.
    pub target_radius: f64,
    pub feasible: bool,
    /// Radius after tightening, for feasible attempts.
    pub tightened_radius: Option<f64>,
    /// Time slice granted to the attempt.
    pub slice: Duration,
    /// Clock reading when the attempt finished.
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveRun {
    pub best: Solution,
    pub history: Vec<Attempt>,
    pub params: SolverParams,
    pub seed: RngSeed,
    /// Clock reading when `best` was first found.
    pub time_to_best: Duration,
    pub elapsed: Duration,
    pub trace: Vec<TraceRecord>,
}

impl SolveRun {
    /// Radii accepted as new bests, in order.
    pub fn accepted_radii(&self) -> Vec<f64> {
        self.history
            .iter()
            .filter_map(|a| a.tightened_radius)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub budget: Duration,
    pub seed: RngSeed,
    /// Use the deterministic work clock instead of wall time.
    pub deterministic: bool,
    /// Stop as soon as the best radius is at most this.
    pub target_radius: Option<f64>,
    pub trace: bool,
}

impl SolveOptions {
    pub fn new(budget: Duration, seed: RngSeed) -> Self {
        SolveOptions {
            budget,
            seed,
            deterministic: false,
            target_radius: None,
            trace: false,
        }
    }
}

/// Minimizes the container radius within `budget` of wall-clock time.
pub fn solve(
    instance: &Instance,
    params: &SolverParams,
    budget: Duration,
    seed: RngSeed,
) -> Result<SolveRun> {
    solve_with(instance, params, &SolveOptions::new(budget, seed))
}

pub fn solve_with(
    instance: &Instance,
    params: &SolverParams,
    opts: &SolveOptions,
) -> Result<SolveRun> {
    solve_with_decider(instance, params, opts, its_decide)
}

/// Like [`solve_with`], with a caller-chosen procedure for each fixed-radius
/// decision problem.
pub fn solve_with_decider<D>(
    instance: &Instance,
    params: &SolverParams,
    opts: &SolveOptions,
    mut decide: D,
) -> Result<SolveRun>
where
    D: FnMut(
        &Instance,
        f64,
        &SolverParams,
        Duration,
        &mut SolverRng,
        &mut Monitor,
    ) -> Result<DecideOutcome>,
{
    params.validate()?;
    if opts.budget.is_zero() {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    let clock = if opts.deterministic {
        Clock::work()
    } else {
        Clock::wall()
    };
    let mut monitor = Monitor::new(clock);
    if opts.trace {
        monitor = monitor.with_trace();
    }
    let n = instance.len();
    let sched = &params.shrink;

    let start_radius = initial_radius(instance);
    let first = tighten(&lineup_pattern(instance), instance, start_radius, params)?;
    monitor.charge(first.evaluations, n);
    let mut best_pattern = first.pattern;
    let mut best_radius = first.radius;
    let mut time_to_best = monitor.elapsed();
    let mut history = vec![Attempt {
        target_radius: start_radius,
        feasible: true,
        tightened_radius: Some(best_radius),
        slice: Duration::ZERO,
        elapsed: time_to_best,
    }];

    let mut step = sched.initial_step;
    let mut stall = 0;
    let mut attempt_index = 0u64;
    let reached = |r: f64| opts.target_radius.is_some_and(|t| r <= t);
    while !reached(best_radius) {
        let elapsed = monitor.elapsed();
        if elapsed >= opts.budget {
            break;
        }
        let remaining = opts.budget - elapsed;
        let target = best_radius * (1.0 - step);
        let slice = Duration::from_secs_f64(
            (elapsed.as_secs_f64() * sched.slice_fraction).max(sched.min_slice_secs),
        )
        .min(remaining);

        let mut rng = opts.seed.derive(attempt_index).rng();
        attempt_index += 1;
        let outcome = if target > instance.largest_radius() {
            Some(decide(
                instance,
                target,
                params,
                slice,
                &mut rng,
                &mut monitor,
            )?)
        } else {
            None
        };
        let mut attempt = Attempt {
            target_radius: target,
            feasible: false,
            tightened_radius: None,
            slice,
            elapsed: Duration::ZERO,
        };
        match outcome {
            Some(out) if out.feasible => {
                let t = tighten(&out.pattern, instance, target, params)?;
                monitor.charge(t.evaluations, n);
                debug_assert!(t.radius < best_radius);
                best_pattern = t.pattern;
                best_radius = t.radius;
                time_to_best = monitor.elapsed();
                attempt.feasible = true;
                attempt.tightened_radius = Some(best_radius);
                step = sched.initial_step;
                stall = 0;
            }
            _ => {
                if step <= sched.min_step {
                    stall += 1;
                }
                step = (step * 0.5).max(sched.min_step);
            }
        }
        attempt.elapsed = monitor.elapsed();
        history.push(attempt);
        if stall >= sched.max_stall {
            break;
        }
    }

    let max_violation = energy::max_violation(&best_pattern, instance, best_radius)?;
    Ok(SolveRun {
        best: Solution {
            radius: best_radius,
            pattern: best_pattern,
            max_violation,
            instance_name: instance.name().to_string(),
        },
        history,
        params: params.clone(),
        seed: opts.seed,
        time_to_best,
        elapsed: monitor.elapsed(),
        trace: monitor.take_records(),
    })
}
