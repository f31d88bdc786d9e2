//! Overlap penalty of a packing.
//!
//! `E(X, R)` is the sum of squared overlap depths over every disk pair plus
//! every disk's protrusion beyond the container. A pattern is feasible exactly
//! when `E = 0`; numerically we judge feasibility by the largest single depth.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::model::{Instance, Pattern};
use crate::optimizer::Objective;

/// Value of the penalty together with its largest term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub energy: f64,
    /// Largest un-squared overlap depth over all pair and container terms.
    pub max_violation: f64,
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(Error::Index { index: i, len: n });
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "container radius must be finite and positive, got {r}"
        )));
    }
    Ok(())
}

/// `max{0, r_i + r_j - |c_i - c_j|}`.
pub fn pair_overlap(pattern: &Pattern, instance: &Instance, i: usize, j: usize) -> Result<f64> {
    pattern.check_matches(instance)?;
    let n = instance.len();
    check_index(i, n)?;
    check_index(j, n)?;
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "pair overlap needs two distinct disks, got {i} twice"
        )));
    }
    let [xi, yi] = pattern.center(i);
    let [xj, yj] = pattern.center(j);
    let d = (xi - xj).hypot(yi - yj);
    Ok((instance.radius(i) + instance.radius(j) - d).max(0.0))
}

/// `max{0, |c_i| + r_i - R}`.
pub fn container_overlap(
    pattern: &Pattern,
    instance: &Instance,
    radius: f64,
    i: usize,
) -> Result<f64> {
    pattern.check_matches(instance)?;
    check_index(i, instance.len())?;
    check_radius(radius)?;
    let [x, y] = pattern.center(i);
    Ok((x.hypot(y) + instance.radius(i) - radius).max(0.0))
}

pub fn energy(pattern: &Pattern, instance: &Instance, radius: f64) -> Result<EnergyReport> {
    pattern.check_matches(instance)?;
    check_radius(radius)?;
    Ok(energy_report(instance.radii(), pattern.as_slice(), radius))
}

pub fn max_violation(pattern: &Pattern, instance: &Instance, radius: f64) -> Result<f64> {
    energy(pattern, instance, radius).map(|r| r.max_violation)
}

/// Analytic gradient of `E_R` with respect to the flat center coordinates.
///
/// Inactive terms contribute nothing; at a tangency the derivative from the
/// feasible side (zero) is used.
pub fn energy_gradient(pattern: &Pattern, instance: &Instance, radius: f64) -> Result<Vec<f64>> {
    pattern.check_matches(instance)?;
    check_radius(radius)?;
    let mut grad = vec![0.0; pattern.as_slice().len()];
    energy_and_gradient(instance.radii(), pattern.as_slice(), radius, &mut grad);
    Ok(grad)
}

pub(crate) fn energy_report(radii: &[f64], coords: &[f64], radius: f64) -> EnergyReport {
    let n = radii.len();
    let mut energy = 0.0;
    let mut worst = 0.0f64;
    for i in 0..n {
        let (xi, yi, ri) = (coords[2 * i], coords[2 * i + 1], radii[i]);
        let o = xi.hypot(yi) + ri - radius;
        if o > 0.0 {
            energy += o * o;
            worst = worst.max(o);
        }
        for j in (i + 1)..n {
            let dx = xi - coords[2 * j];
            let dy = yi - coords[2 * j + 1];
            let sum = ri + radii[j];
            let d2 = dx * dx + dy * dy;
            if d2 < sum * sum {
                let o = sum - d2.sqrt();
                energy += o * o;
                worst = worst.max(o);
            }
        }
    }
    EnergyReport {
        energy,
        max_violation: worst,
    }
}

/// Unit vector standing in for `(c_i - c_j)/|c_i - c_j|` when the centers
/// coincide, with `i < j`. Fixed per pair so repeated calls agree.
fn pair_fallback_direction(i: usize, j: usize) -> [f64; 2] {
    let t = ((i + 1) as f64 * 0.618_033_988_749_894_9 + (j + 1) as f64 * 0.754_877_666_246_692_7)
        .fract();
    [(TAU * t).cos(), (TAU * t).sin()]
}

/// Outward unit vector used for a disk sitting exactly at the origin.
fn origin_fallback_direction(i: usize) -> [f64; 2] {
    let t = ((i + 1) as f64 * 0.618_033_988_749_894_9).fract();
    [(TAU * t).cos(), (TAU * t).sin()]
}

/// Writes the gradient of `E_R` into `grad` and returns `E_R`.
pub(crate) fn energy_and_gradient(
    radii: &[f64],
    coords: &[f64],
    radius: f64,
    grad: &mut [f64],
) -> f64 {
    let n = radii.len();
    debug_assert_eq!(coords.len(), 2 * n);
    debug_assert_eq!(grad.len(), 2 * n);
    grad.fill(0.0);
    let mut energy = 0.0;
    for i in 0..n {
        let (xi, yi, ri) = (coords[2 * i], coords[2 * i + 1], radii[i]);
        let norm = xi.hypot(yi);
        let o = norm + ri - radius;
        if o > 0.0 {
            energy += o * o;
            let [ux, uy] = if norm > 0.0 {
                [xi / norm, yi / norm]
            } else {
                origin_fallback_direction(i)
            };
            grad[2 * i] += 2.0 * o * ux;
            grad[2 * i + 1] += 2.0 * o * uy;
        }
        for j in (i + 1)..n {
            let dx = xi - coords[2 * j];
            let dy = yi - coords[2 * j + 1];
            let sum = ri + radii[j];
            let d2 = dx * dx + dy * dy;
            if d2 < sum * sum {
                let d = d2.sqrt();
                let o = sum - d;
                energy += o * o;
                let [ux, uy] = if d > 0.0 {
                    [dx / d, dy / d]
                } else {
                    pair_fallback_direction(i, j)
                };
                let gx = 2.0 * o * ux;
                let gy = 2.0 * o * uy;
                grad[2 * i] -= gx;
                grad[2 * i + 1] -= gy;
                grad[2 * j] += gx;
                grad[2 * j + 1] += gy;
            }
        }
    }
    energy
}

/// `E_R` as an [`Objective`] over flat center coordinates.
#[derive(Debug, Clone, Copy)]
pub struct PackingObjective<'a> {
    radii: &'a [f64],
    radius: f64,
}

impl<'a> PackingObjective<'a> {
    pub fn new(instance: &'a Instance, radius: f64) -> Self {
        PackingObjective {
            radii: instance.radii(),
            radius,
        }
    }
}

impl Objective for PackingObjective<'_> {
    fn dim(&self) -> usize {
        2 * self.radii.len()
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        energy_and_gradient(self.radii, x, self.radius, grad)
    }
}
