//! Search trajectories and the clock that meters them.

use std::fmt;
use std::time::{Duration, Instant};

/// What happened at one step of a search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    /// A fresh random pattern was minimized.
    Start,
    /// Tabu search applied swap move `k`.
    Swap { k: usize, kind: SwapKind },
    /// Steepest descent applied swap move `k`.
    Descent { k: usize },
    /// Result of one perturb-and-search round of the iterated search.
    Perturb { accepted: bool },
    /// A local search finished at this energy.
    LocalDone,
    /// A pattern within the feasibility tolerance was found.
    Feasible,
}

/// Why a tabu move was admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapKind {
    /// Not tabu.
    Free,
    /// Tabu, but beat the best energy found so far.
    Aspired,
    /// Every candidate was tabu and none aspired; the best one was taken.
    Forced,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Start => f.write_str("start"),
            TraceEvent::Swap { k, kind } => match kind {
                SwapKind::Free => write!(f, "swap:{k}"),
                SwapKind::Aspired => write!(f, "swap-aspired:{k}"),
                SwapKind::Forced => write!(f, "swap-forced:{k}"),
            },
            TraceEvent::Descent { k } => write!(f, "descent:{k}"),
            TraceEvent::Perturb { accepted: true } => f.write_str("perturb-accept"),
            TraceEvent::Perturb { accepted: false } => f.write_str("perturb-reject"),
            TraceEvent::LocalDone => f.write_str("local-done"),
            TraceEvent::Feasible => f.write_str("feasible"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub restart: u32,
    /// Perturbation round within the restart, 0 before the first perturbation.
    pub round: u64,
    /// Step within the local search that produced the record.
    pub iteration: u64,
    pub event: TraceEvent,
    pub energy: f64,
    pub best_energy: f64,
}

/// Source of elapsed time for budgets.
///
/// `Wall` measures real time. `Work` counts penalty evaluations weighted by
/// their term count and converts them at a fixed nominal rate, so that runs
/// under a budget are bit-reproducible.
#[derive(Debug, Clone)]
pub enum Clock {
    Wall { start: Instant },
    Work { units: u64, units_per_second: f64 },
}

impl Clock {
    /// Nominal throughput of the work clock, in units per second.
    pub const NOMINAL_UNITS_PER_SECOND: f64 = 3.8e8;
    /// Units charged per evaluation on top of the `n(n+1)/2` penalty terms,
    /// covering the optimizer's per-step vector work.
    pub const UNITS_PER_EVALUATION: u64 = 75;

    pub fn wall() -> Self {
        Clock::Wall {
            start: Instant::now(),
        }
    }

    pub fn work() -> Self {
        Clock::Work {
            units: 0,
            units_per_second: Self::NOMINAL_UNITS_PER_SECOND,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Clock::Work { .. })
    }

    pub fn elapsed(&self) -> Duration {
        match self {
            Clock::Wall { start } => start.elapsed(),
            Clock::Work {
                units,
                units_per_second,
            } => Duration::from_secs_f64(*units as f64 / units_per_second),
        }
    }

    /// Accounts for `evaluations` penalty evaluations on `n` disks.
    pub fn charge(&mut self, evaluations: u64, n: usize) {
        if let Clock::Work { units, .. } = self {
            let terms = (n * (n + 1) / 2) as u64 + Self::UNITS_PER_EVALUATION;
            *units = units.saturating_add(evaluations.saturating_mul(terms));
        }
    }
}

/// Clock plus optional trajectory recording, carried through a search.
#[derive(Debug, Clone)]
pub struct Monitor {
    clock: Clock,
    records: Option<Vec<TraceRecord>>,
}

impl Monitor {
    pub fn new(clock: Clock) -> Self {
        Monitor {
            clock,
            records: None,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.records = Some(Vec::new());
        self
    }

    pub fn clock(&self) -> &Clock {
        &self.clock
    }

    pub fn elapsed(&self) -> Duration {
        self.clock.elapsed()
    }

    pub fn charge(&mut self, evaluations: u64, n: usize) {
        self.clock.charge(evaluations, n);
    }

    pub fn is_tracing(&self) -> bool {
        self.records.is_some()
    }

    pub fn record(&mut self, rec: TraceRecord) {
        if let Some(r) = self.records.as_mut() {
            r.push(rec);
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        self.records.as_deref().unwrap_or(&[])
    }

    pub fn take_records(&mut self) -> Vec<TraceRecord> {
        self.records
            .as_mut()
            .map(std::mem::take)
            .unwrap_or_default()
    }
}
