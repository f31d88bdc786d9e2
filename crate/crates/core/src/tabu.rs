//! Swap-based tabu search over local minima of `E_R`, and the steepest
//! descent baseline on the same neighborhood.
//!
//! A swap move exchanges the centers of two disks that are adjacent in the
//! sorted radius order and then re-minimizes. Only pairs with different
//! radii are considered, so there are at most `n - 1` moves.

use rand::Rng;

use crate::energy;
use crate::error::{Error, Result};
use crate::model::{Instance, Pattern, SolverParams, SolverRng};
use crate::optimizer::{minimize, MinimizeResult, OptimizerSettings};
use crate::trace::SwapKind;

/// Exchange of sorted disks `k` and `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SwapMove {
    pub k: usize,
}

pub fn candidate_moves(instance: &Instance) -> Vec<SwapMove> {
    instance
        .radii()
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(k, _)| SwapMove { k })
        .collect()
}

/// Applies `mv` to a copy of `pattern` and minimizes the result.
pub fn swap_move(
    pattern: &Pattern,
    instance: &Instance,
    radius: f64,
    mv: SwapMove,
    settings: &OptimizerSettings,
) -> Result<MinimizeResult> {
    pattern.check_matches(instance)?;
    if mv.k + 1 >= instance.len() {
        return Err(Error::Index {
            index: mv.k,
            len: instance.len().saturating_sub(1),
        });
    }
    let mut swapped = pattern.clone();
    swapped.swap_centers(mv.k, mv.k + 1);
    minimize(instance, radius, &swapped, settings)
}

/// Per-move tabu bookkeeping: move `k` may not be chosen (unless it
/// aspires) at iterations up to and including `tabu_until[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabuState {
    tabu_until: Vec<u64>,
    pub iteration: u64,
    pub best_pattern: Pattern,
    pub best_energy: f64,
    /// Iterations since `best_energy` last improved.
    pub stall_count: usize,
}

impl TabuState {
    fn new(n_moves: usize, start: Pattern, energy: f64) -> Self {
        TabuState {
            tabu_until: vec![0; n_moves],
            iteration: 0,
            best_pattern: start,
            best_energy: energy,
            stall_count: 0,
        }
    }

    pub fn is_tabu(&self, k: usize) -> bool {
        self.tabu_until[k] >= self.iteration
    }

    /// Iterations left before move `k` is free again.
    pub fn tenure_remaining(&self, k: usize) -> u64 {
        self.tabu_until[k].saturating_sub(self.iteration)
    }
}

/// One applied move of a tabu search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabuStep {
    pub iteration: u64,
    pub k: usize,
    pub tenure: usize,
    pub kind: SwapKind,
    pub energy: f64,
    pub best_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TabuExit {
    /// The best energy reached the optimizer's energy tolerance.
    Feasible,
    /// No improvement in the last `TabuDepth` iterations.
    Stalled,
    /// Every adjacent pair has equal radii.
    NoMoves,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabuOutcome {
    pub pattern: Pattern,
    pub energy: f64,
    pub exit: TabuExit,
    pub steps: Vec<TabuStep>,
    pub evaluations: u64,
}

fn evaluate_all(
    current: &Pattern,
    instance: &Instance,
    radius: f64,
    moves: &[SwapMove],
    settings: &OptimizerSettings,
    evaluations: &mut u64,
) -> Result<Vec<MinimizeResult>> {
    moves
        .iter()
        .map(|&mv| {
            let r = swap_move(current, instance, radius, mv, settings)?;
            *evaluations += r.evaluations;
            Ok(r)
        })
        .collect()
}

/// Tabu search on the swap neighborhood, starting from a local minimum.
///
/// Each iteration moves to the best admissible neighbor even if it is worse
/// than the current pattern. Returns the best pattern seen.
pub fn swap_tabu_search(
    start: &Pattern,
    instance: &Instance,
    radius: f64,
    params: &SolverParams,
    rng: &mut SolverRng,
) -> Result<TabuOutcome> {
    let n = instance.len();
    let settings = params.optimizer_settings(n);
    let moves = candidate_moves(instance);
    let start_energy = energy::energy(start, instance, radius)?.energy;
    let mut state = TabuState::new(n.saturating_sub(1), start.clone(), start_energy);
    let mut evaluations = 0;
    let mut steps = Vec::new();

    if state.best_energy <= settings.energy_tol {
        return Ok(TabuOutcome {
            pattern: state.best_pattern,
            energy: state.best_energy,
            exit: TabuExit::Feasible,
            steps,
            evaluations,
        });
    }
    if moves.is_empty() {
        return Ok(TabuOutcome {
            pattern: state.best_pattern,
            energy: state.best_energy,
            exit: TabuExit::NoMoves,
            steps,
            evaluations,
        });
    }

    let depth = params.tabu_depth(n);
    let mut current = start.clone();
    let mut ties = Vec::with_capacity(moves.len());
    let exit = loop {
        if state.stall_count >= depth {
            break TabuExit::Stalled;
        }
        state.iteration += 1;
        let results = evaluate_all(
            &current,
            instance,
            radius,
            &moves,
            &settings,
            &mut evaluations,
        )?;

        let admissible = |i: usize| -> bool {
            !state.is_tabu(moves[i].k) || results[i].energy < state.best_energy
        };
        let pool: Vec<usize> = (0..moves.len()).filter(|&i| admissible(i)).collect();
        let forced = pool.is_empty();
        let pool: Vec<usize> = if forced {
            (0..moves.len()).collect()
        } else {
            pool
        };
        let lowest = pool
            .iter()
            .map(|&i| results[i].energy)
            .fold(f64::INFINITY, f64::min);
        ties.clear();
        ties.extend(
            pool.iter()
                .copied()
                .filter(|&i| results[i].energy == lowest),
        );
        let chosen = if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.random_range(0..ties.len())]
        };

        let k = moves[chosen].k;
        let kind = if forced {
            SwapKind::Forced
        } else if state.is_tabu(k) {
            SwapKind::Aspired
        } else {
            SwapKind::Free
        };
        let mut results = results;
        let picked = results.swap_remove(chosen);
        current = picked.pattern;
        let current_energy = picked.energy;

        let tenure = params.tabu_tenure(n, rng);
        state.tabu_until[k] = state.iteration + tenure as u64;

        if current_energy < state.best_energy {
            state.best_energy = current_energy;
            state.best_pattern = current.clone();
            state.stall_count = 0;
        } else {
            state.stall_count += 1;
        }
        steps.push(TabuStep {
            iteration: state.iteration,
            k,
            tenure,
            kind,
            energy: current_energy,
            best_energy: state.best_energy,
        });
        if state.best_energy <= settings.energy_tol {
            break TabuExit::Feasible;
        }
    };

    Ok(TabuOutcome {
        pattern: state.best_pattern,
        energy: state.best_energy,
        exit,
        steps,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentExit {
    Feasible,
    /// No neighbor is at least as good as the current pattern.
    LocalMinimum,
    /// `n` consecutive moves without strict improvement.
    Plateau,
    NoMoves,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub pattern: Pattern,
    pub energy: f64,
    pub exit: DescentExit,
    /// `(move, energy after the move)` for each accepted step.
    pub steps: Vec<(SwapMove, f64)>,
    pub evaluations: u64,
}

/// Moves to the best swap neighbor while it is no worse than the current
/// pattern. Ties between neighbors go to the lowest move index.
pub fn steepest_descent(
    start: &Pattern,
    instance: &Instance,
    radius: f64,
    params: &SolverParams,
) -> Result<DescentOutcome> {
    let n = instance.len();
    let settings = params.optimizer_settings(n);
    let moves = candidate_moves(instance);
    let mut current = start.clone();
    let mut current_energy = energy::energy(start, instance, radius)?.energy;
    let mut steps = Vec::new();
    let mut evaluations = 0;
    let mut flat = 0;

    let exit = loop {
        if current_energy <= settings.energy_tol {
            break DescentExit::Feasible;
        }
        if moves.is_empty() {
            break DescentExit::NoMoves;
        }
        let results = evaluate_all(
            &current,
            instance,
            radius,
            &moves,
            &settings,
            &mut evaluations,
        )?;
        let (best, _) = results
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, r)| {
                if r.energy < acc.1 {
                    (i, r.energy)
                } else {
                    acc
                }
            });
        if results[best].energy.is_nan() || results[best].energy > current_energy {
            break DescentExit::LocalMinimum;
        }
        let strict = results[best].energy < current_energy;
        let mut results = results;
        let picked = results.swap_remove(best);
        current = picked.pattern;
        current_energy = picked.energy;
        steps.push((moves[best], current_energy));
        flat = if strict { 0 } else { flat + 1 };
        if flat >= n {
            break DescentExit::Plateau;
        }
    };

    Ok(DescentOutcome {
        pattern: current,
        energy: current_energy,
        exit,
        steps,
        evaluations,
    })
}
