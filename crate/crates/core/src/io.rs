//! Text formats, independent solution verification, SVG output and CSV
//! export.
//!
//! Instance file: first non-comment line is the disk count `n`, followed by
//! `n` lines with one positive radius each. Solution file: first line is the
//! container radius, followed by `n` lines `x y` in sorted-radius order.
//! Lines starting with `#` and blank lines are ignored in both.
//!
//! Numbers are written in Rust's shortest round-trip decimal form, so a
//! written solution reads back bit-for-bit.

use std::fmt::Write as _;

use crate::driver::Attempt;
use crate::error::{Error, Result};
use crate::model::{Instance, Pattern, Solution};
use crate::trace::TraceRecord;

/// Non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a number, found {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{s:?} is not finite")));
    }
    Ok(v)
}

pub fn load_instance(text: &str, name: &str) -> Result<Instance> {
    let mut lines = content_lines(text);
    let (count_line, count) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing disk count"))?;
    let n: usize = count.parse().map_err(|_| {
        Error::parse(
            count_line,
            format!("expected a disk count, found {count:?}"),
        )
    })?;
    let mut radii = Vec::with_capacity(n);
    let mut last_line = count_line;
    for (line, s) in lines {
        if radii.len() == n {
            return Err(Error::parse(
                line,
                format!("more than the declared {n} radii"),
            ));
        }
        let r = parse_f64(line, s)?;
        if r <= 0.0 {
            return Err(Error::parse(
                line,
                format!("radius must be positive, found {r}"),
            ));
        }
        radii.push(r);
        last_line = line;
    }
    if radii.len() != n {
        return Err(Error::parse(
            last_line,
            format!("declared {n} radii but found {}", radii.len()),
        ));
    }
    Instance::new(&radii, name).map_err(|e| Error::parse(count_line, e.to_string()))
}

/// Writes the instance in input order.
pub fn write_instance(instance: &Instance) -> String {
    let mut out = format!("# {}\n{}\n", instance.name(), instance.len());
    for r in instance.input_radii() {
        let _ = writeln!(out, "{r}");
    }
    out
}

pub fn write_solution(solution: &Solution) -> String {
    let mut out = format!("{}\n", solution.radius);
    for [x, y] in solution.pattern.centers() {
        let _ = writeln!(out, "{x} {y}");
    }
    out
}

/// Reads a solution for `instance`. The stored file carries no violation
/// figure; it is recomputed with [`verify_solution`].
pub fn load_solution(text: &str, instance: &Instance) -> Result<Solution> {
    let mut lines = content_lines(text);
    let (rl, rs) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing container radius"))?;
    let radius = parse_f64(rl, rs)?;
    if radius <= 0.0 {
        return Err(Error::parse(rl, "container radius must be positive"));
    }
    let mut centers = Vec::with_capacity(instance.len());
    let mut last_line = rl;
    for (line, s) in lines {
        if centers.len() == instance.len() {
            return Err(Error::parse(
                line,
                format!(
                    "more centers than the {} disks of the instance",
                    instance.len()
                ),
            ));
        }
        let mut parts = s.split_whitespace();
        let (Some(x), Some(y), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(line, format!("expected \"x y\", found {s:?}")));
        };
        centers.push([parse_f64(line, x)?, parse_f64(line, y)?]);
        last_line = line;
    }
    if centers.len() != instance.len() {
        return Err(Error::parse(
            last_line,
            format!(
                "instance has {} disks but found {} centers",
                instance.len(),
                centers.len()
            ),
        ));
    }
    let pattern = Pattern::from_centers(&centers)?;
    let mut solution = Solution {
        radius,
        pattern,
        max_violation: 0.0,
        instance_name: instance.name().to_string(),
    };
    solution.max_violation = verify_solution(instance, &solution, f64::INFINITY)?.max_violation;
    Ok(solution)
}

/// The constraint with the largest violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorstTerm {
    Pair(usize, usize),
    Container(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyReport {
    pub feasible: bool,
    pub max_violation: f64,
    /// `None` when no constraint is violated at all.
    pub worst: Option<WorstTerm>,
}

/// Checks every containment and non-overlap constraint from scratch.
pub fn verify_solution(instance: &Instance, solution: &Solution, tol: f64) -> Result<VerifyReport> {
    solution.pattern.check_matches(instance)?;
    let radii = instance.radii();
    let centers: Vec<[f64; 2]> = solution.pattern.centers().collect();
    let mut worst = None;
    let mut max_violation = 0.0f64;
    let mut consider = |v: f64, term: WorstTerm| {
        if v > max_violation {
            max_violation = v;
            worst = Some(term);
        }
    };
    for (i, c) in centers.iter().enumerate() {
        let reach = (c[0] * c[0] + c[1] * c[1]).sqrt() + radii[i];
        consider(reach - solution.radius, WorstTerm::Container(i));
    }
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            let dist = ((centers[i][0] - centers[j][0]).powi(2)
                + (centers[i][1] - centers[j][1]).powi(2))
            .sqrt();
            consider(radii[i] + radii[j] - dist, WorstTerm::Pair(i, j));
        }
    }
    Ok(VerifyReport {
        feasible: max_violation <= tol,
        max_violation,
        worst,
    })
}

/// Container and disks as an SVG document, disks labeled by sorted index.
pub fn render_svg(instance: &Instance, solution: &Solution) -> Result<String> {
    solution.pattern.check_matches(instance)?;
    let r = solution.radius;
    let half = 1.05 * r;
    let stroke = r / 250.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">",
        -half,
        -half,
        2.0 * half,
        2.0 * half
    );
    let _ = writeln!(
        out,
        "  <circle cx=\"0\" cy=\"0\" r=\"{r:.6}\" fill=\"none\" stroke=\"black\" stroke-width=\"{stroke:.6}\"/>"
    );
    for (i, [x, y]) in solution.pattern.centers().enumerate() {
        let ri = instance.radius(i);
        // SVG y grows downward
        let _ = writeln!(
            out,
            "  <circle cx=\"{x:.6}\" cy=\"{:.6}\" r=\"{ri:.6}\" fill=\"#9ecae1\" stroke=\"#08519c\" stroke-width=\"{stroke:.6}\"/>",
            -y
        );
        let _ = writeln!(
            out,
            "  <text x=\"{x:.6}\" y=\"{:.6}\" font-size=\"{:.6}\" text-anchor=\"middle\" dominant-baseline=\"central\">{}</text>",
            -y,
            ri * 0.8,
            i + 1
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub(crate) fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Csv(csv::Error::from(e.into_error())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub const TRACE_HEADER: [&str; 6] = [
    "restart",
    "round",
    "iteration",
    "event",
    "energy",
    "best_energy",
];

pub fn write_trace_csv(records: &[TraceRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER)?;
    for r in records {
        w.write_record([
            r.restart.to_string(),
            r.round.to_string(),
            r.iteration.to_string(),
            r.event.to_string(),
            r.energy.to_string(),
            r.best_energy.to_string(),
        ])?;
    }
    csv_string(w)
}

pub const HISTORY_HEADER: [&str; 6] = [
    "attempt",
    "target_radius",
    "feasible",
    "tightened_radius",
    "slice_s",
    "elapsed_s",
];

pub fn write_history_csv(history: &[Attempt]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HISTORY_HEADER)?;
    for (i, a) in history.iter().enumerate() {
        w.write_record([
            i.to_string(),
            a.target_radius.to_string(),
            a.feasible.to_string(),
            a.tightened_radius
                .map(|r| r.to_string())
                .unwrap_or_default(),
            a.slice.as_secs_f64().to_string(),
            a.elapsed.as_secs_f64().to_string(),
        ])?;
    }
    csv_string(w)
}
