//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! The minimizer is written against [`Objective`] so the packing penalty and
//! plain test functions share one code path.

use std::collections::VecDeque;

use crate::energy::{self, PackingObjective};
use crate::error::{Error, Result};
use crate::model::{Instance, Pattern};

/// A differentiable function of a flat parameter vector.
pub trait Objective {
    fn dim(&self) -> usize;

    /// Returns `f(x)` and writes `grad f(x)` into `grad`.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSettings {
    /// Number of stored correction pairs.
    pub memory: usize,
    /// Stop once the gradient's infinity norm is at most this.
    pub grad_tol: f64,
    /// Stop once the objective is at most this.
    pub energy_tol: f64,
    pub max_iters: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Function evaluations allowed inside one line search.
    pub max_line_search_evals: usize,
    /// Inverse-Hessian scale used before any curvature pair is stored.
    pub initial_scale: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            memory: 7,
            grad_tol: 1e-12,
            energy_tol: 1e-20,
            max_iters: 1000,
            c1: 1e-4,
            c2: 0.9,
            max_line_search_evals: 30,
            // E_R has Hessian eigenvalues around 2 per active term
            initial_scale: 0.5,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.memory == 0 || self.max_iters == 0 || self.max_line_search_evals == 0 {
            return Err(Error::InvalidArgument(
                "memory, max_iters and max_line_search_evals must be positive".into(),
            ));
        }
        if !(self.grad_tol > 0.0 && self.energy_tol > 0.0 && self.initial_scale > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::InvalidArgument("need 0 < c1 < c2 < 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientConverged,
    EnergyConverged,
    IterationCap,
    /// No step along the search direction or `-g` lowers the value. At a
    /// positive-energy minimum this is the usual exit once the remaining
    /// decrease falls below floating point resolution.
    LineSearchFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorMinimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: u64,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub pattern: Pattern,
    pub energy: f64,
    pub iterations: usize,
    /// Number of energy-and-gradient evaluations spent.
    pub evaluations: u64,
    pub termination: Termination,
}

/// Locally minimizes `E_R` starting from `start`.
pub fn minimize(
    instance: &Instance,
    radius: f64,
    start: &Pattern,
    settings: &OptimizerSettings,
) -> Result<MinimizeResult> {
    start.check_matches(instance)?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "container radius must be finite and positive, got {radius}"
        )));
    }
    let objective = PackingObjective::new(instance, radius);
    let min = minimize_objective(&objective, start.as_slice(), settings)?;
    Ok(MinimizeResult {
        pattern: Pattern::from_coords_unchecked(min.x),
        energy: min.value,
        iterations: min.iterations,
        evaluations: min.evaluations,
        termination: min.termination,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

struct Correction {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Two-loop recursion: writes `-H g` into `dir`.
fn search_direction(
    history: &VecDeque<Correction>,
    grad: &[f64],
    initial_scale: f64,
    alpha: &mut Vec<f64>,
    dir: &mut [f64],
) {
    dir.iter_mut().zip(grad).for_each(|(d, g)| *d = -g);
    alpha.clear();
    for c in history.iter().rev() {
        let a = c.rho * dot(&c.s, dir);
        dir.iter_mut().zip(&c.y).for_each(|(d, y)| *d -= a * y);
        alpha.push(a);
    }
    let gamma = match history.back() {
        Some(c) => dot(&c.s, &c.y) / dot(&c.y, &c.y),
        None => initial_scale,
    };
    dir.iter_mut().for_each(|d| *d *= gamma);
    for (c, a) in history.iter().zip(alpha.iter().rev()) {
        let b = c.rho * dot(&c.y, dir);
        dir.iter_mut()
            .zip(&c.s)
            .for_each(|(d, s)| *d += (a - b) * s);
    }
}

/// Minimizer of the cubic interpolating two points with values and slopes,
/// safeguarded into the middle of the bracket.
fn cubic_step(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (hi - lo);
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    let fallback = 0.5 * (a + b);
    if !disc.is_finite() || disc < 0.0 {
        return fallback;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * ((db + d2 - d1) / (db - da + 2.0 * d2));
    if t.is_finite() && t >= lo + margin && t <= hi - margin {
        t
    } else {
        fallback
    }
}

struct LineSearch<'a, O: Objective> {
    objective: &'a O,
    x: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    slope0: f64,
    c1: f64,
    c2: f64,
    budget: usize,
    evals: u64,
    trial_x: &'a mut [f64],
    trial_g: &'a mut [f64],
}

struct Probe {
    alpha: f64,
    value: f64,
    slope: f64,
}

impl<O: Objective> LineSearch<'_, O> {
    fn probe(&mut self, alpha: f64) -> Probe {
        for ((t, x), d) in self.trial_x.iter_mut().zip(self.x).zip(self.dir) {
            *t = x + alpha * d;
        }
        let value = self
            .objective
            .value_and_gradient(self.trial_x, self.trial_g);
        self.evals += 1;
        let slope = dot(self.trial_g, self.dir);
        Probe {
            alpha,
            value,
            slope,
        }
    }

    fn armijo(&self, p: &Probe) -> bool {
        p.value.is_finite() && p.value <= self.f0 + self.c1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &Probe) -> bool {
        p.slope.abs() <= -self.c2 * self.slope0
    }

    /// Returns an accepted step with `trial_x`/`trial_g` holding its point.
    fn run(&mut self, alpha_init: f64) -> Option<Probe> {
        let mut prev = Probe {
            alpha: 0.0,
            value: self.f0,
            slope: self.slope0,
        };
        let mut alpha = alpha_init;
        let mut first = true;
        while (self.evals as usize) < self.budget {
            let cur = self.probe(alpha);
            if !self.armijo(&cur) || (!first && cur.value >= prev.value) {
                return self.zoom(prev, cur);
            }
            if self.curvature(&cur) {
                return Some(cur);
            }
            if cur.slope >= 0.0 {
                return self.zoom(cur, prev);
            }
            first = false;
            prev = cur;
            alpha *= 2.0;
        }
        None
    }

    fn zoom(&mut self, mut lo: Probe, mut hi: Probe) -> Option<Probe> {
        let mut last_alpha = hi.alpha;
        while (self.evals as usize) < self.budget {
            let width = (hi.alpha - lo.alpha).abs();
            if width <= f64::EPSILON * lo.alpha.abs().max(1e-300) {
                break;
            }
            let alpha = if hi.value.is_finite() {
                cubic_step(lo.alpha, lo.value, lo.slope, hi.alpha, hi.value, hi.slope)
            } else {
                0.5 * (lo.alpha + hi.alpha)
            };
            let cur = self.probe(alpha);
            last_alpha = alpha;
            if !self.armijo(&cur) || cur.value >= lo.value {
                hi = cur;
            } else {
                if self.curvature(&cur) {
                    return Some(cur);
                }
                if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = cur;
            }
        }
        // Out of evaluations: settle for sufficient decrease alone.
        if lo.alpha > 0.0 && lo.value < self.f0 {
            if last_alpha != lo.alpha {
                let again = self.probe(lo.alpha);
                return Some(again);
            }
            return Some(lo);
        }
        None
    }
}

/// LBFGS on an arbitrary objective. The objective value never increases
/// between accepted iterates.
pub fn minimize_objective<O: Objective>(
    objective: &O,
    start: &[f64],
    settings: &OptimizerSettings,
) -> Result<VectorMinimum> {
    settings.validate()?;
    let dim = objective.dim();
    if start.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "start has {} coordinates, objective expects {dim}",
            start.len()
        )));
    }
    if start.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidStart("non-finite start coordinate".into()));
    }
    let mut x = start.to_vec();
    let mut grad = vec![0.0; dim];
    let mut f = objective.value_and_gradient(&x, &mut grad);
    let mut evaluations = 1u64;
    if !f.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidStart(format!(
            "objective is {f} at the start"
        )));
    }

    let mut history: VecDeque<Correction> = VecDeque::with_capacity(settings.memory);
    let mut dir = vec![0.0; dim];
    let mut alpha_buf = Vec::with_capacity(settings.memory);
    let mut trial_x = vec![0.0; dim];
    let mut trial_g = vec![0.0; dim];
    let mut iterations = 0;

    let termination = loop {
        if f <= settings.energy_tol {
            break Termination::EnergyConverged;
        }
        if inf_norm(&grad) <= settings.grad_tol {
            break Termination::GradientConverged;
        }
        if iterations >= settings.max_iters {
            break Termination::IterationCap;
        }
        search_direction(
            &history,
            &grad,
            settings.initial_scale,
            &mut alpha_buf,
            &mut dir,
        );
        let mut slope = dot(&grad, &dir);
        if slope.is_nan() || slope >= 0.0 {
            history.clear();
            search_direction(
                &history,
                &grad,
                settings.initial_scale,
                &mut alpha_buf,
                &mut dir,
            );
            slope = dot(&grad, &dir);
        }

        let accepted = {
            let mut ls = LineSearch {
                objective,
                x: &x,
                dir: &dir,
                f0: f,
                slope0: slope,
                c1: settings.c1,
                c2: settings.c2,
                budget: settings.max_line_search_evals,
                evals: 0,
                trial_x: &mut trial_x,
                trial_g: &mut trial_g,
            };
            let out = ls.run(1.0);
            evaluations += ls.evals;
            out
        };
        let Some(step) = accepted else {
            if history.is_empty() {
                break Termination::LineSearchFailure;
            }
            // stale curvature can spoil the direction; retry once along -g
            history.clear();
            continue;
        };
        if step.value.is_nan() || step.value >= f {
            if history.is_empty() {
                break Termination::LineSearchFailure;
            }
            history.clear();
            continue;
        }

        let s: Vec<f64> = trial_x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = trial_g.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            if history.len() == settings.memory {
                history.pop_front();
            }
            history.push_back(Correction {
                s,
                y,
                rho: 1.0 / sy,
            });
        }
        x.copy_from_slice(&trial_x);
        grad.copy_from_slice(&trial_g);
        f = step.value;
        iterations += 1;
    };

    Ok(VectorMinimum {
        x,
        value: f,
        iterations,
        evaluations,
        termination,
    })
}

/// Worst relative disagreement between the analytic gradient of `E_R` and
/// central finite differences with step `1e-6`. Components where both sides
/// are below `1e-6` in magnitude are skipped.
pub fn check_gradient(instance: &Instance, radius: f64, pattern: &Pattern) -> Result<f64> {
    const STEP: f64 = 1e-6;
    const FLOOR: f64 = 1e-6;
    let analytic = energy::energy_gradient(pattern, instance, radius)?;
    let mut probe = pattern.clone();
    let mut worst = 0.0f64;
    for (k, &a) in analytic.iter().enumerate() {
        let orig = probe.as_slice()[k];
        probe.as_mut_slice()[k] = orig + STEP;
        let up = energy::energy(&probe, instance, radius)?.energy;
        probe.as_mut_slice()[k] = orig - STEP;
        let down = energy::energy(&probe, instance, radius)?.energy;
        probe.as_mut_slice()[k] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        let scale = a.abs().max(numeric.abs());
        if scale > FLOOR {
            worst = worst.max((a - numeric).abs() / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    use crate::model::RngSeed;

    struct Quadratic {
        target: Vec<f64>,
        weights: Vec<f64>,
    }

    impl Objective for Quadratic {
        fn dim(&self) -> usize {
            self.target.len()
        }
        fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            let mut f = 0.0;
            for k in 0..x.len() {
                let d = x[k] - self.target[k];
                f += self.weights[k] * d * d;
                grad[k] = 2.0 * self.weights[k] * d;
            }
            f
        }
    }

    struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn dim(&self) -> usize {
            2
        }
        fn value_and_gradient(&self, x: &[f64], g: &mut [f64]) -> f64 {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        }
    }

    fn tight() -> OptimizerSettings {
        OptimizerSettings {
            energy_tol: 1e-300,
            grad_tol: 1e-10,
            ..OptimizerSettings::default()
        }
    }

    #[test]
    fn quadratic_recovers_target_quickly() {
        let mut rng = RngSeed(3).rng();
        for n in [2usize, 5, 10] {
            let target: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let q = Quadratic {
                target: target.clone(),
                weights: vec![1.0; n],
            };
            let out = minimize_objective(&q, &vec![0.0; n], &tight()).unwrap();
            assert!(out.iterations <= 2 * n, "{} iterations", out.iterations);
            for (a, b) in out.x.iter().zip(&target) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ill_conditioned_quadratic() {
        let n = 8;
        let q = Quadratic {
            target: (0..n).map(|k| k as f64).collect(),
            weights: (0..n).map(|k| 10f64.powi(k as i32 % 4)).collect(),
        };
        let out = minimize_objective(&q, &vec![5.0; n], &tight()).unwrap();
        assert_eq!(out.termination, Termination::GradientConverged);
        assert!(out.iterations <= 100, "{} iterations", out.iterations);
    }

    #[test]
    fn rosenbrock_converges() {
        let s = OptimizerSettings {
            max_iters: 500,
            ..tight()
        };
        let out = minimize_objective(&Rosenbrock, &[-1.2, 1.0], &s).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn feasible_start_is_returned_untouched() {
        let inst = Instance::new(&[1.0, 1.0], "t").unwrap();
        let p = Pattern::from_centers(&[[-1.0, 0.0], [1.0, 0.0]]).unwrap();
        let out = minimize(&inst, 2.0, &p, &OptimizerSettings::default()).unwrap();
        assert_eq!(out.pattern, p);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.termination, Termination::EnergyConverged);
    }

    #[test]
    fn coincident_pair_separates() {
        let inst = Instance::new(&[1.0, 1.0], "t").unwrap();
        let p = Pattern::from_centers(&[[0.1, 0.0], [0.1, 0.0]]).unwrap();
        let out = minimize(&inst, 2.5, &p, &OptimizerSettings::default()).unwrap();
        assert!(out.energy <= 1e-20, "energy {}", out.energy);
        let [a, b] = [out.pattern.center(0), out.pattern.center(1)];
        assert!((a[0] - b[0]).hypot(a[1] - b[1]) >= 2.0 - 1e-6);
        assert!(energy::max_violation(&out.pattern, &inst, 2.5).unwrap() <= 1e-9);
    }

    #[test]
    fn non_finite_start_rejected() {
        let inst = Instance::new(&[1.0, 1.0], "t").unwrap();
        let p = Pattern::from_coords_unchecked(vec![f64::NAN, 0.0, 1.0, 0.0]);
        assert!(matches!(
            minimize(&inst, 3.0, &p, &OptimizerSettings::default()),
            Err(Error::InvalidStart(_))
        ));
    }

    #[test]
    fn energy_never_increases_and_result_is_consistent() {
        let mut rng = RngSeed(5).rng();
        let inst = Instance::contest(9).unwrap();
        let s = OptimizerSettings {
            max_iters: 1800,
            ..OptimizerSettings::default()
        };
        for _ in 0..30 {
            let coords: Vec<f64> = (0..18).map(|_| rng.random_range(-15.0..15.0)).collect();
            let start = Pattern::from_coords(coords).unwrap();
            let e0 = energy::energy(&start, &inst, 19.0).unwrap().energy;
            let out = minimize(&inst, 19.0, &start, &s).unwrap();
            assert!(out.energy <= e0);
            let e1 = energy::energy(&out.pattern, &inst, 19.0).unwrap().energy;
            assert!((e1 - out.energy).abs() <= 1e-12 * e1.max(1e-300));
            let again = minimize(&inst, 19.0, &start, &s).unwrap();
            assert_eq!(again, out);
        }
    }

    #[test]
    fn check_gradient_examples() {
        let inst = Instance::new(&[1.0, 1.0], "t").unwrap();
        let feasible = Pattern::from_centers(&[[-1.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(check_gradient(&inst, 2.0, &feasible).unwrap(), 0.0);
        let pen = Pattern::from_centers(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(check_gradient(&inst, 10.0, &pen).unwrap() <= 1e-5);
    }

    #[test]
    fn check_gradient_random_overlaps() {
        let mut rng = RngSeed(9).rng();
        let radii: Vec<f64> = (0..10).map(|_| rng.random_range(0.5..3.0)).collect();
        let inst = Instance::new(&radii, "rand10").unwrap();
        for _ in 0..50 {
            let coords: Vec<f64> = (0..20).map(|_| rng.random_range(-4.0..4.0)).collect();
            let p = Pattern::from_coords(coords).unwrap();
            let d = check_gradient(&inst, 5.0, &p).unwrap();
            assert!(d <= 1e-5, "discrepancy {d}");
        }
    }
}
