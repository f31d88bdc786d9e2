//! Iterated tabu search for the fixed-radius decision problem, plus the two
//! multistart baselines used for comparison.
//!
//! Each restart scatters the disks at random, minimizes, and runs swap tabu
//! search. The restart then alternates shift perturbation with tabu search,
//! keeping the result whenever it is no worse, until `PerturbDepth` rounds
//! pass without improvement.

use std::f64::consts::TAU;
use std::time::Duration;

use rand::Rng;

use crate::energy;
use crate::error::{Error, Result};
use crate::model::{Instance, Pattern, SolverParams, SolverRng};
use crate::optimizer::minimize;
use crate::tabu::{steepest_descent, swap_tabu_search, TabuOutcome};
use crate::trace::{Monitor, TraceEvent, TraceRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct DecideOutcome {
    /// Whether `pattern` is within the feasibility tolerance.
    pub feasible: bool,
    /// Lowest-energy pattern over all restarts.
    pub pattern: Pattern,
    pub energy: f64,
    pub restarts: u32,
    pub perturb_rounds: u64,
    pub elapsed: Duration,
}

fn uniform_in_disk(rho: f64, rng: &mut SolverRng) -> [f64; 2] {
    let r = rho * rng.random::<f64>().sqrt();
    let t = TAU * rng.random::<f64>();
    [r * t.cos(), r * t.sin()]
}

/// Scatters every disk uniformly over the positions where it lies inside
/// the container; a disk larger than the container is put at the origin.
pub fn random_pattern(instance: &Instance, radius: f64, rng: &mut SolverRng) -> Result<Pattern> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "container radius must be finite and positive, got {radius}"
        )));
    }
    let mut p = Pattern::zeros(instance.len());
    for (i, &r) in instance.radii().iter().enumerate() {
        p.set_center(i, uniform_in_disk((radius - r).max(0.0), rng));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOutcome {
    pub pattern: Pattern,
    pub energy: f64,
    /// Number of shift moves performed.
    pub strength: usize,
    pub evaluations: u64,
}

/// Relocates `s` random disks one at a time, minimizing after each, where
/// `s` is uniform in `[1, max(1, n/8)]`.
pub fn shift_perturb(
    pattern: &Pattern,
    instance: &Instance,
    radius: f64,
    params: &SolverParams,
    rng: &mut SolverRng,
) -> Result<ShiftOutcome> {
    pattern.check_matches(instance)?;
    let n = instance.len();
    let settings = params.optimizer_settings(n);
    let strength = rng.random_range(1..=params.perturb_strength_max(n));
    let mut current = pattern.clone();
    let mut energy = energy::energy(pattern, instance, radius)?.energy;
    let mut evaluations = 0;
    for _ in 0..strength {
        let i = rng.random_range(0..n);
        current.set_center(
            i,
            uniform_in_disk((radius - instance.radius(i)).max(0.0), rng),
        );
        let m = minimize(instance, radius, &current, &settings)?;
        evaluations += m.evaluations;
        current = m.pattern;
        energy = m.energy;
    }
    Ok(ShiftOutcome {
        pattern: current,
        energy,
        strength,
        evaluations,
    })
}

fn check_decidable(instance: &Instance, radius: f64) -> Result<()> {
    if !radius.is_finite() || radius <= instance.largest_radius() {
        return Err(Error::InfeasibleByConstruction {
            radius,
            largest: instance.largest_radius(),
        });
    }
    Ok(())
}

/// Best pattern across restarts.
struct Incumbent {
    pattern: Option<Pattern>,
    energy: f64,
}

impl Incumbent {
    fn new() -> Self {
        Incumbent {
            pattern: None,
            energy: f64::INFINITY,
        }
    }

    fn offer(&mut self, p: &Pattern, e: f64) {
        if e < self.energy || self.pattern.is_none() {
            self.energy = e;
            self.pattern = Some(p.clone());
        }
    }
}

struct Search<'a> {
    instance: &'a Instance,
    radius: f64,
    params: &'a SolverParams,
    monitor: &'a mut Monitor,
    restart: u32,
    round: u64,
}

impl Search<'_> {
    fn is_feasible(&self, p: &Pattern) -> Result<bool> {
        Ok(energy::max_violation(p, self.instance, self.radius)? <= self.params.feasibility_tol)
    }

    fn record(&mut self, iteration: u64, event: TraceEvent, energy: f64, best: f64) {
        if self.monitor.is_tracing() {
            self.monitor.record(TraceRecord {
                restart: self.restart,
                round: self.round,
                iteration,
                event,
                energy,
                best_energy: best,
            });
        }
    }

    /// Random scatter followed by LBFGS.
    fn fresh_start(&mut self, rng: &mut SolverRng) -> Result<(Pattern, f64)> {
        let n = self.instance.len();
        let scatter = random_pattern(self.instance, self.radius, rng)?;
        let m = minimize(
            self.instance,
            self.radius,
            &scatter,
            &self.params.optimizer_settings(n),
        )?;
        self.monitor.charge(m.evaluations, n);
        self.record(0, TraceEvent::Start, m.energy, m.energy);
        Ok((m.pattern, m.energy))
    }

    fn tabu(&mut self, start: &Pattern, rng: &mut SolverRng) -> Result<TabuOutcome> {
        let out = swap_tabu_search(start, self.instance, self.radius, self.params, rng)?;
        self.monitor.charge(out.evaluations, self.instance.len());
        if self.monitor.is_tracing() {
            for s in &out.steps {
                self.record(
                    s.iteration,
                    TraceEvent::Swap {
                        k: s.k,
                        kind: s.kind,
                    },
                    s.energy,
                    s.best_energy,
                );
            }
            let last = out.steps.last().map_or(0, |s| s.iteration);
            self.record(last, TraceEvent::LocalDone, out.energy, out.energy);
        }
        Ok(out)
    }

    fn finish(
        self,
        best: Incumbent,
        restarts: u32,
        rounds: u64,
        started: Duration,
    ) -> Result<DecideOutcome> {
        let pattern = best.pattern.expect("at least one restart ran");
        let feasible = self.is_feasible(&pattern)?;
        Ok(DecideOutcome {
            feasible,
            pattern,
            energy: best.energy,
            restarts,
            perturb_rounds: rounds,
            elapsed: self.monitor.elapsed().saturating_sub(started),
        })
    }
}

/// Searches for a feasible pattern at container radius `radius` using
/// iterated tabu search, for at most `budget` on the monitor's clock.
///
/// The clock is only consulted between perturbation rounds, so the search
/// may overrun by the length of one round. At least one restart always runs.
pub fn its_decide(
    instance: &Instance,
    radius: f64,
    params: &SolverParams,
    budget: Duration,
    rng: &mut SolverRng,
    monitor: &mut Monitor,
) -> Result<DecideOutcome> {
    check_decidable(instance, radius)?;
    params.validate()?;
    let n = instance.len();
    let started = monitor.elapsed();
    let deadline = started + budget;
    let depth = params.perturb_depth(n);
    let mut search = Search {
        instance,
        radius,
        params,
        monitor,
        restart: 0,
        round: 0,
    };
    let mut best = Incumbent::new();
    let mut restarts = 0u32;
    let mut rounds = 0u64;

    'restarts: loop {
        if restarts > 0 && search.monitor.elapsed() >= deadline {
            break;
        }
        restarts += 1;
        search.restart = restarts - 1;
        search.round = 0;

        let (start, _) = search.fresh_start(rng)?;
        let first = search.tabu(&start, rng)?;
        let mut current = first.pattern;
        let mut current_energy = first.energy;
        best.offer(&current, current_energy);
        if search.is_feasible(&current)? {
            search.record(0, TraceEvent::Feasible, current_energy, current_energy);
            break 'restarts;
        }

        let mut stall = 0;
        while stall < depth {
            if search.monitor.elapsed() >= deadline {
                break 'restarts;
            }
            rounds += 1;
            search.round += 1;
            let shifted = shift_perturb(&current, instance, radius, params, rng)?;
            search.monitor.charge(shifted.evaluations, n);
            let candidate = search.tabu(&shifted.pattern, rng)?;
            let accepted = candidate.energy <= current_energy;
            if accepted {
                if candidate.energy < current_energy {
                    stall = 0;
                } else {
                    stall += 1;
                }
                current = candidate.pattern;
                current_energy = candidate.energy;
            } else {
                stall += 1;
            }
            search.record(
                0,
                TraceEvent::Perturb { accepted },
                candidate.energy,
                current_energy,
            );
            best.offer(&current, current_energy);
            if accepted && search.is_feasible(&current)? {
                search.record(0, TraceEvent::Feasible, current_energy, current_energy);
                break 'restarts;
            }
        }
    }
    search.finish(best, restarts, rounds, started)
}

/// Which local search a multistart baseline runs after each random start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalSearch {
    Tabu,
    SteepestDescent,
}

/// Repeats random start, minimization and one local search until a
/// feasible pattern appears or the budget runs out.
pub fn multistart_decide(
    instance: &Instance,
    radius: f64,
    params: &SolverParams,
    local: LocalSearch,
    budget: Duration,
    rng: &mut SolverRng,
    monitor: &mut Monitor,
) -> Result<DecideOutcome> {
    check_decidable(instance, radius)?;
    params.validate()?;
    let n = instance.len();
    let started = monitor.elapsed();
    let deadline = started + budget;
    let mut search = Search {
        instance,
        radius,
        params,
        monitor,
        restart: 0,
        round: 0,
    };
    let mut best = Incumbent::new();
    let mut restarts = 0u32;
    loop {
        if restarts > 0 && search.monitor.elapsed() >= deadline {
            break;
        }
        search.restart = restarts;
        restarts += 1;
        let (start, start_energy) = search.fresh_start(rng)?;
        let (pattern, energy) = match local {
            LocalSearch::Tabu => {
                let out = search.tabu(&start, rng)?;
                (out.pattern, out.energy)
            }
            LocalSearch::SteepestDescent => {
                let out = steepest_descent(&start, instance, radius, params)?;
                search.monitor.charge(out.evaluations, n);
                let mut best_so_far = start_energy;
                for (i, (mv, e)) in out.steps.iter().enumerate() {
                    best_so_far = best_so_far.min(*e);
                    search.record(
                        i as u64 + 1,
                        TraceEvent::Descent { k: mv.k },
                        *e,
                        best_so_far,
                    );
                }
                search.record(
                    out.steps.len() as u64,
                    TraceEvent::LocalDone,
                    out.energy,
                    out.energy,
                );
                (out.pattern, out.energy)
            }
        };
        best.offer(&pattern, energy);
        if search.is_feasible(&pattern)? {
            search.record(0, TraceEvent::Feasible, energy, energy);
            break;
        }
    }
    search.finish(best, restarts, 0, started)
}
