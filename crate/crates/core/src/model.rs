//! Problem and solution data shared by every solver stage.
//!
//! Disks are always indexed in nondecreasing radius order. The permutation
//! that sorted the caller's radii is kept on the [`Instance`] so results can be
//! mapped back to input order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optimizer::OptimizerSettings;

/// Generator threaded through every randomized operation.
pub type SolverRng = ChaCha8Rng;

/// Seed for a solver run. Equal seeds and equal inputs give identical runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> SolverRng {
        SolverRng::seed_from_u64(self.0)
    }

    /// An independent seed for the `index`-th sub-run (splitmix64 mixing).
    pub fn derive(self, index: u64) -> RngSeed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

/// An immutable set of disks to pack, radii sorted nondecreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    radii: Vec<f64>,
    /// `radii[k] == input[order[k]]`.
    order: Vec<usize>,
}

impl Instance {
    /// Builds an instance from radii in any order.
    pub fn new(radii: &[f64], name: impl Into<String>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidInstance("no radii given".into()));
        }
        if let Some((i, r)) = radii
            .iter()
            .enumerate()
            .find(|(_, r)| !r.is_finite() || **r <= 0.0)
        {
            return Err(Error::InvalidInstance(format!(
                "radius #{} is {r}, expected a finite positive value",
                i + 1
            )));
        }
        let mut order: Vec<usize> = (0..radii.len()).collect();
        // stable, so equal radii keep their input order
        order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
        let sorted = order.iter().map(|&k| radii[k]).collect();
        Ok(Instance {
            name: name.into(),
            radii: sorted,
            order,
        })
    }

    /// Circle-packing contest instance: `n` disks with radii `1, 2, ..., n`.
    pub fn contest(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInstance(format!(
                "contest instances need at least 2 disks, got {n}"
            )));
        }
        let radii: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        Instance::new(&radii, format!("contest{n}"))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i]
    }

    pub fn largest_radius(&self) -> f64 {
        *self.radii.last().expect("instance is nonempty")
    }

    pub fn sum_radii(&self) -> f64 {
        self.radii.iter().sum()
    }

    /// `sqrt(sum r_i^2)`: the disks' total area must fit in the container.
    pub fn area_lower_bound(&self) -> f64 {
        self.radii.iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    /// Input position of the disk stored at sorted index `k`.
    pub fn input_index(&self, k: usize) -> usize {
        self.order[k]
    }

    /// Radii in the order they were originally given.
    pub fn input_radii(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (k, &i) in self.order.iter().enumerate() {
            out[i] = self.radii[k];
        }
        out
    }
}

/// Positions of all disk centers, stored flat as `x0, y0, x1, y1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    coords: Vec<f64>,
}

impl Pattern {
    pub fn from_coords(coords: Vec<f64>) -> Result<Self> {
        if !coords.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "odd coordinate count {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Pattern { coords })
    }

    pub fn from_centers(centers: &[[f64; 2]]) -> Result<Self> {
        Pattern::from_coords(centers.iter().flatten().copied().collect())
    }

    /// All centers at the origin.
    pub fn zeros(n: usize) -> Self {
        Pattern {
            coords: vec![0.0; 2 * n],
        }
    }

    pub(crate) fn from_coords_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(coords.len().is_multiple_of(2));
        Pattern { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn center(&self, i: usize) -> [f64; 2] {
        [self.coords[2 * i], self.coords[2 * i + 1]]
    }

    pub fn set_center(&mut self, i: usize, c: [f64; 2]) {
        self.coords[2 * i] = c[0];
        self.coords[2 * i + 1] = c[1];
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = [f64; 2]> + '_ {
        self.coords.chunks_exact(2).map(|c| [c[0], c[1]])
    }

    /// Exchanges the centers of disks `i` and `j`.
    pub fn swap_centers(&mut self, i: usize, j: usize) {
        self.coords.swap(2 * i, 2 * j);
        self.coords.swap(2 * i + 1, 2 * j + 1);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub(crate) fn check_matches(&self, instance: &Instance) -> Result<()> {
        if self.len() != instance.len() {
            return Err(Error::InvalidArgument(format!(
                "pattern has {} disks, instance {} has {}",
                self.len(),
                instance.name(),
                instance.len()
            )));
        }
        Ok(())
    }
}

/// A container radius together with a placement of every disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub radius: f64,
    pub pattern: Pattern,
    /// Largest overlap depth of `pattern` at `radius`.
    pub max_violation: f64,
    pub instance_name: String,
}

/// Tuning knobs of the whole solver. Defaults follow the published settings:
/// tenure `n/5 + rand(0,10)`, tabu depth `10n`, perturbation strength
/// `rand(1, n/8)` and perturbation depth `10n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    /// Upper end of the uniform random addition to the tabu tenure.
    pub tenure_random_max: usize,
    /// Tabu search stops after `tabu_depth_per_disk * n` iterations without improvement.
    pub tabu_depth_per_disk: usize,
    /// The perturbation loop stops after `perturb_depth_per_disk * n` rounds without improvement.
    pub perturb_depth_per_disk: usize,
    /// Maximum overlap depth tolerated in a feasible pattern.
    pub feasibility_tol: f64,
    pub lbfgs_memory: usize,
    pub grad_tol: f64,
    pub energy_tol: f64,
    /// LBFGS iteration cap is `lbfgs_iters_per_disk * n`.
    pub lbfgs_iters_per_disk: usize,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    pub shrink: ShrinkSchedule,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tenure_random_max: 10,
            tabu_depth_per_disk: 10,
            perturb_depth_per_disk: 10,
            feasibility_tol: 1e-9,
            lbfgs_memory: 7,
            grad_tol: 1e-12,
            energy_tol: 1e-20,
            lbfgs_iters_per_disk: 200,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
            shrink: ShrinkSchedule::default(),
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("tabu_depth_per_disk", self.tabu_depth_per_disk),
            ("perturb_depth_per_disk", self.perturb_depth_per_disk),
            ("lbfgs_memory", self.lbfgs_memory),
            ("lbfgs_iters_per_disk", self.lbfgs_iters_per_disk),
            ("shrink.max_stall", self.shrink.max_stall),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        let tols = [
            ("feasibility_tol", self.feasibility_tol),
            ("grad_tol", self.grad_tol),
            ("energy_tol", self.energy_tol),
            ("shrink.initial_step", self.shrink.initial_step),
            ("shrink.min_step", self.shrink.min_step),
            ("shrink.min_slice_secs", self.shrink.min_slice_secs),
            ("shrink.slice_fraction", self.shrink.slice_fraction),
        ];
        for (name, v) in tols {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if !(0.0 < self.wolfe_c1 && self.wolfe_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "line search constants need 0 < c1 < c2 < 1, got c1={} c2={}",
                self.wolfe_c1, self.wolfe_c2
            )));
        }
        if self.shrink.min_step > self.shrink.initial_step || self.shrink.initial_step >= 1.0 {
            return Err(Error::InvalidArgument(
                "shrink steps need min_step <= initial_step < 1".into(),
            ));
        }
        Ok(())
    }

    /// `floor(n/5) + uniform{0..=tenure_random_max}`.
    pub fn tabu_tenure(&self, n: usize, rng: &mut SolverRng) -> usize {
        use rand::Rng;
        n / 5 + rng.random_range(0..=self.tenure_random_max)
    }

    pub fn tabu_depth(&self, n: usize) -> usize {
        self.tabu_depth_per_disk * n
    }

    /// Largest number of shift moves in one perturbation: `max(1, floor(n/8))`.
    pub fn perturb_strength_max(&self, n: usize) -> usize {
        (n / 8).max(1)
    }

    pub fn perturb_depth(&self, n: usize) -> usize {
        self.perturb_depth_per_disk * n
    }

    pub fn optimizer_settings(&self, n: usize) -> OptimizerSettings {
        OptimizerSettings {
            memory: self.lbfgs_memory,
            grad_tol: self.grad_tol,
            energy_tol: self.energy_tol,
            max_iters: self.lbfgs_iters_per_disk * n.max(1),
            c1: self.wolfe_c1,
            c2: self.wolfe_c2,
            ..OptimizerSettings::default()
        }
    }
}

/// How the outer loop picks the next, smaller container radius to try.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkSchedule {
    /// First relative shrink below the best radius found so far.
    pub initial_step: f64,
    /// The relative shrink is halved after each failure down to this floor.
    pub min_step: f64,
    /// Give up after this many consecutive failures at the floor step.
    pub max_stall: usize,
    /// Smallest time slice, in seconds, given to one decision attempt.
    pub min_slice_secs: f64,
    /// Each decision attempt gets at least this fraction of the time spent so far.
    pub slice_fraction: f64,
}

impl Default for ShrinkSchedule {
    fn default() -> Self {
        ShrinkSchedule {
            initial_step: 1e-3,
            min_step: 1e-7,
            max_stall: 3,
            min_slice_secs: 5.0,
            slice_fraction: 0.5,
        }
    }
}
