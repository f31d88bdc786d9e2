//! End-to-end acceptance checks. Prints one PASS/FAIL/SKIP line per
//! criterion and exits non-zero if any criterion fails.
//!
//! `PUCC_ACCEPTANCE=1,2,8` restricts the run to the listed criteria.
//! `PUCC_NR_DIR` points at a directory holding `NR10-1.txt` and friends in
//! the instance file format; the default is `data/nr` in this crate.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pucc::driver::{solve_with, SolveOptions, SolveRun};
use pucc::energy::{energy, energy_gradient};
use pucc::io::{load_instance, verify_solution};
use pucc::its::random_pattern;
use pucc::optimizer::minimize;
use pucc::tabu::{steepest_descent, swap_tabu_search};
use pucc::{Instance, Pattern, RngSeed, Solution, SolverParams};

const CONTEST: [f64; 17] = [
    9.00139774,
    11.05704039,
    13.46211067,
    16.22174667,
    19.2331939,
    22.00019301,
    24.96063428,
    28.37138943,
    31.54586701,
    35.09564714,
    38.8379955,
    42.45811643,
    46.29134211,
    50.11976262,
    54.24029359,
    58.40056747,
    62.55887709,
];

fn contest_target(n: usize) -> f64 {
    CONTEST[n - 5]
}

const NR_TARGETS: [(&str, f64); 3] = [
    ("NR10-1", 99.8851),
    ("NR11-1", 60.7100),
    ("NR12-1", 65.0244),
];
const NR15_2_RADIUS: f64 = 38.8380;
const NR15_2_SD_MEAN: f64 = 2.085742;
const ABLATION_RADIUS: f64 = 28.37138944;
const VERIFY_TOL: f64 = 1e-9;
const INJECTED_OVERLAP: f64 = 1e-8;

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    Skip,
}

struct Verdict {
    status: Status,
    detail: String,
}

fn verdict(ok: bool, detail: String) -> Verdict {
    Verdict {
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

struct Ledger {
    /// Every solution produced by a solve run, for verification.
    solutions: Vec<(Instance, Solution)>,
    /// Accepted radii and final radius of each solve run.
    runs: Vec<(Instance, Vec<f64>, f64)>,
}

impl Ledger {
    fn solve(
        &mut self,
        inst: &Instance,
        budget: Duration,
        seed: u64,
        target: Option<f64>,
    ) -> SolveRun {
        let mut opts = SolveOptions::new(budget, RngSeed(seed));
        opts.target_radius = target;
        let run = solve_with(inst, &SolverParams::default(), &opts).expect("solve runs");
        self.solutions.push((inst.clone(), run.best.clone()));
        self.runs
            .push((inst.clone(), run.accepted_radii(), run.best.radius));
        run
    }
}

fn nr_dir() -> PathBuf {
    std::env::var_os("PUCC_NR_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR"))
                .join("data")
                .join("nr")
        })
}

fn load_nr(name: &str) -> Option<Instance> {
    let text = std::fs::read_to_string(nr_dir().join(format!("{name}.txt"))).ok()?;
    Some(load_instance(&text, name).expect("NR instance parses"))
}

// Brute-force oracles, written without reference to the library code.

fn oracle_energy(radii: &[f64], xy: &[f64], big_r: f64) -> f64 {
    let n = radii.len();
    let mut pairs = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dx = xy[2 * i] - xy[2 * j];
            let dy = xy[2 * i + 1] - xy[2 * j + 1];
            let depth = radii[i] + radii[j] - (dx * dx + dy * dy).sqrt();
            if depth > 0.0 {
                pairs += depth * depth;
            }
        }
    }
    let mut wall = 0.0;
    for i in 0..n {
        let (x, y) = (xy[2 * i], xy[2 * i + 1]);
        let depth = (x * x + y * y).sqrt() + radii[i] - big_r;
        if depth > 0.0 {
            wall += depth * depth;
        }
    }
    pairs / 2.0 + wall
}

/// Central difference `(E(x + h e_c) - E(x - h e_c)) / 2h` restricted to
/// the terms that involve coordinate `c`. Each term is a square of a depth
/// that is a difference of lengths, so `t+ - t-` is rewritten as
/// `(o+ + o-)(o+ - o-)` with `|v+| - |v-| = (|v+|^2 - |v-|^2) / (|v+| + |v-|)`
/// and `|v+|^2 - |v-|^2 = 4 u h`, which is the same quantity free of the
/// cancellation that plain subtraction suffers at h = 1e-6.
fn oracle_central_difference(radii: &[f64], xy: &[f64], big_r: f64, c: usize, h: f64) -> f64 {
    let i = c / 2;
    let axis = c % 2;
    let sq_diff = |o_up: f64, o_down: f64, len_up: f64, len_down: f64, u: f64, sign: f64| {
        if o_up <= 0.0 && o_down <= 0.0 {
            return 0.0;
        }
        assert!(o_up > 0.0 && o_down > 0.0, "term crosses its kink");
        let dlen = 4.0 * u * h / (len_up + len_down);
        (o_up + o_down) * sign * dlen
    };
    let mut total = 0.0;
    for j in 0..radii.len() {
        if j == i {
            continue;
        }
        let v = [xy[2 * i] - xy[2 * j], xy[2 * i + 1] - xy[2 * j + 1]];
        let u = v[axis];
        let other = v[1 - axis];
        let len_up = ((u + h) * (u + h) + other * other).sqrt();
        let len_down = ((u - h) * (u - h) + other * other).sqrt();
        let sum_r = radii[i] + radii[j];
        total += sq_diff(sum_r - len_up, sum_r - len_down, len_up, len_down, u, -1.0);
    }
    let v = [xy[2 * i], xy[2 * i + 1]];
    let u = v[axis];
    let other = v[1 - axis];
    let len_up = ((u + h) * (u + h) + other * other).sqrt();
    let len_down = ((u - h) * (u - h) + other * other).sqrt();
    total += sq_diff(
        len_up + radii[i] - big_r,
        len_down + radii[i] - big_r,
        len_up,
        len_down,
        u,
        1.0,
    );
    total / (2.0 * h)
}

/// Signed depths of all terms; a configuration is degenerate when any of them
/// sits near the kink at zero or two centers nearly coincide.
fn signed_depths(radii: &[f64], xy: &[f64], big_r: f64) -> Vec<f64> {
    let n = radii.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = (xy[2 * i] - xy[2 * j]).hypot(xy[2 * i + 1] - xy[2 * j + 1]);
            out.push(radii[i] + radii[j] - d);
        }
        out.push(xy[2 * i].hypot(xy[2 * i + 1]) + radii[i] - big_r);
    }
    out
}

/// Random configuration with modest overlaps, kept away from kinks.
fn gradient_config(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    loop {
        let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
        let big_r = 1.4 * radii.iter().map(|r| r * r).sum::<f64>().sqrt();
        let mut xy: Vec<f64> = Vec::with_capacity(2 * n);
        let mut placed = true;
        for i in 0..n {
            let mut ok = false;
            for _ in 0..2000 {
                let rho = (big_r - radii[i] + 0.4) * rng.random::<f64>().sqrt();
                let th = rng.random_range(0.0..std::f64::consts::TAU);
                let (x, y) = (rho * th.cos(), rho * th.sin());
                let fits = (0..i).all(|j| {
                    let d = (x - xy[2 * j]).hypot(y - xy[2 * j + 1]);
                    d > 1e-3 && radii[i] + radii[j] - d <= 0.5
                });
                if fits {
                    xy.extend([x, y]);
                    ok = true;
                    break;
                }
            }
            if !ok {
                placed = false;
                break;
            }
        }
        if !placed {
            continue;
        }
        let depths = signed_depths(&radii, &xy, big_r);
        let active = depths.iter().filter(|&&d| d > 0.0).count();
        if active > 0 && depths.iter().all(|d| d.abs() > 1e-4) {
            return (radii, xy, big_r);
        }
    }
}

fn criterion_1(_: &mut Ledger) -> Verdict {
    let started = Instant::now();
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut checked, mut worst, mut failures) = (0usize, 0.0f64, 0usize);
    for n in [3, 8, 15] {
        for _ in 0..100 {
            let (radii, xy, big_r) = gradient_config(&mut rng, n);
            let inst = Instance::new(&radii, "g").unwrap();
            // the instance sorts radii, so reorder centers to match
            let order: Vec<usize> = (0..n).map(|k| inst.input_index(k)).collect();
            let sorted_xy: Vec<f64> = order
                .iter()
                .flat_map(|&k| [xy[2 * k], xy[2 * k + 1]])
                .collect();
            let pattern = Pattern::from_coords(sorted_xy.clone()).unwrap();
            let grad = energy_gradient(&pattern, &inst, big_r).unwrap();
            let sorted_radii = inst.radii().to_vec();
            for (c, &g) in grad.iter().enumerate() {
                if g.abs() <= 1e-6 {
                    continue;
                }
                let fd = oracle_central_difference(&sorted_radii, &sorted_xy, big_r, c, h);
                let rel = (g - fd).abs() / g.abs();
                worst = worst.max(rel);
                checked += 1;
                if rel > 1e-5 {
                    failures += 1;
                }
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        failures == 0 && secs < 10.0,
        format!("{checked} components, {failures} over 1e-5, worst rel {worst:.2e}, {secs:.2}s"),
    )
}

fn criterion_2(_: &mut Ledger) -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut failures, mut zero) = (0.0f64, 0usize, 0usize);
    for _ in 0..1000 {
        let n = rng.random_range(1..=20);
        let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let inst = Instance::new(&radii, "e").unwrap();
        let sorted = inst.radii().to_vec();
        let spread = rng.random_range(0.2..2.0) * sorted.iter().sum::<f64>();
        let xy: Vec<f64> = (0..2 * n)
            .map(|_| rng.random_range(-spread..spread))
            .collect();
        let big_r = rng.random_range(0.3..1.5) * sorted.iter().sum::<f64>();
        let lib = energy(&Pattern::from_coords(xy.clone()).unwrap(), &inst, big_r)
            .unwrap()
            .energy;
        let oracle = oracle_energy(&sorted, &xy, big_r);
        if oracle == 0.0 {
            zero += 1;
            if lib != 0.0 {
                failures += 1;
            }
            continue;
        }
        let rel = (lib - oracle).abs() / oracle;
        worst = worst.max(rel);
        if rel > 1e-12 {
            failures += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        failures == 0 && secs < 10.0,
        format!("1000 configs ({zero} feasible), {failures} over 1e-12, worst rel {worst:.2e}, {secs:.2}s"),
    )
}

fn criterion_3(ledger: &mut Ledger) -> Verdict {
    let inst = Instance::new(&[1.0, 2.0], "two").unwrap();
    let mut radii = Vec::new();
    for seed in 0..5 {
        radii.push(
            ledger
                .solve(&inst, Duration::from_secs(10), seed, None)
                .best
                .radius,
        );
    }
    let worst = radii
        .iter()
        .map(|r| (r - 3.0).abs() / 3.0)
        .fold(0.0, f64::max);
    verdict(
        worst <= 1e-6,
        format!("5 seeds, worst |R-3|/3 = {worst:.2e}"),
    )
}

/// Runs seeds `0..runs` until `need` hits are in or can no longer be reached.
fn hit_count(
    ledger: &mut Ledger,
    inst: &Instance,
    budget: Duration,
    runs: u64,
    need: u64,
    hit: impl Fn(f64) -> bool,
    stop_at: f64,
) -> (u64, u64, Vec<f64>) {
    let (mut hits, mut done) = (0, 0);
    let mut times = Vec::new();
    for seed in 0..runs {
        if hits >= need || runs - done < need - hits {
            break;
        }
        let run = ledger.solve(inst, budget, seed, Some(stop_at));
        done += 1;
        if hit(run.best.radius) {
            hits += 1;
            times.push(run.time_to_best.as_secs_f64());
        }
    }
    (hits, done, times)
}

fn criterion_4(ledger: &mut Ledger) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 5..=16 {
        let inst = Instance::contest(n).unwrap();
        let target = contest_target(n);
        let tol = target * 1e-5;
        let (hits, done, times) = hit_count(
            ledger,
            &inst,
            Duration::from_secs(300),
            10,
            8,
            |r| r <= target + tol,
            target + tol,
        );
        let slowest = times.iter().copied().fold(0.0, f64::max);
        ok &= hits >= 8;
        parts.push(format!("n={n} {hits}/{done} (max {slowest:.0}s)"));
    }
    verdict(ok, parts.join(", "))
}

fn criterion_5(ledger: &mut Ledger) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 17..=21 {
        let inst = Instance::contest(n).unwrap();
        let target = contest_target(n);
        let tol = target * 1e-4;
        let (hits, done, times) = hit_count(
            ledger,
            &inst,
            Duration::from_secs(3600),
            5,
            1,
            |r| r <= target + tol,
            target + tol,
        );
        ok &= hits >= 1;
        let t = times
            .first()
            .map(|t| format!("{t:.0}s"))
            .unwrap_or_else(|| "-".into());
        parts.push(format!("n={n} {hits}/{done} ({t})"));
    }
    verdict(ok, parts.join(", "))
}

struct Ablation {
    tabu_feasible: usize,
    descent_feasible: usize,
    descent_mean: f64,
}

fn ablation(inst: &Instance, radius: f64, starts: u64) -> Ablation {
    let params = SolverParams::default();
    let settings = params.optimizer_settings(inst.len());
    let mut out = Ablation {
        tabu_feasible: 0,
        descent_feasible: 0,
        descent_mean: 0.0,
    };
    for s in 0..starts {
        let mut rng = RngSeed(1000 + s).rng();
        let x0 = random_pattern(inst, radius, &mut rng).unwrap();
        let x0 = minimize(inst, radius, &x0, &settings).unwrap().pattern;
        let ts = swap_tabu_search(&x0, inst, radius, &params, &mut rng).unwrap();
        let sd = steepest_descent(&x0, inst, radius, &params).unwrap();
        let feasible = |p: &Pattern| energy(p, inst, radius).unwrap().max_violation <= VERIFY_TOL;
        out.tabu_feasible += feasible(&ts.pattern) as usize;
        out.descent_feasible += feasible(&sd.pattern) as usize;
        out.descent_mean += sd.energy / starts as f64;
    }
    out
}

fn criterion_6(_: &mut Ledger) -> Verdict {
    let started = Instant::now();
    let inst = Instance::contest(12).unwrap();
    let a = ablation(&inst, ABLATION_RADIUS, 20);
    let mut ok = a.tabu_feasible > a.descent_feasible && a.descent_mean > 0.0;
    let mut detail = format!(
        "contest12: tabu {}/20 feasible, descent {}/20, descent mean E {:.4e}",
        a.tabu_feasible, a.descent_feasible, a.descent_mean
    );
    if let Some(nr) = load_nr("NR15-2") {
        let b = ablation(&nr, NR15_2_RADIUS, 20);
        let ratio = b.descent_mean / NR15_2_SD_MEAN;
        ok &= b.tabu_feasible > b.descent_feasible && (0.2..=5.0).contains(&ratio);
        detail += &format!(
            "; NR15-2: tabu {}/20, descent {}/20, descent mean E {:.4}",
            b.tabu_feasible, b.descent_feasible, b.descent_mean
        );
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(ok && secs < 1800.0, format!("{detail}, {secs:.0}s"))
}

fn criterion_7(ledger: &mut Ledger) -> Verdict {
    let loaded: Vec<(Instance, f64)> = NR_TARGETS
        .iter()
        .filter_map(|&(name, r)| load_nr(name).map(|i| (i, r)))
        .collect();
    if loaded.len() < NR_TARGETS.len() {
        return Verdict {
            status: Status::Skip,
            detail: format!("NR radii not found in {}", nr_dir().display()),
        };
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (inst, target) in loaded {
        let (hits, done, _) = hit_count(
            ledger,
            &inst,
            Duration::from_secs(300),
            10,
            8,
            |r| r <= target + 1e-4,
            target + 1e-4,
        );
        ok &= hits >= 8;
        parts.push(format!("{} {hits}/{done}", inst.name()));
    }
    verdict(ok, parts.join(", "))
}

/// Moves the two closest disks together until they overlap by `depth`.
fn inject_pair_overlap(inst: &Instance, sol: &Solution, depth: f64) -> Option<Solution> {
    let n = inst.len();
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in i + 1..n {
            let [xi, yi] = sol.pattern.center(i);
            let [xj, yj] = sol.pattern.center(j);
            let gap = (xi - xj).hypot(yi - yj) - inst.radius(i) - inst.radius(j);
            if best.is_none_or(|(_, _, g)| gap < g) {
                best = Some((i, j, gap));
            }
        }
    }
    let (i, j, _) = best?;
    let [xi, yi] = sol.pattern.center(i);
    let [xj, yj] = sol.pattern.center(j);
    let d = (xj - xi).hypot(yj - yi);
    let want = inst.radius(i) + inst.radius(j) - depth;
    let mut pattern = sol.pattern.clone();
    pattern.set_center(j, [xi + (xj - xi) * want / d, yi + (yj - yi) * want / d]);
    Some(Solution {
        pattern,
        ..sol.clone()
    })
}

/// Shrinks the container so the outermost disk protrudes by `depth`.
fn inject_container_overlap(inst: &Instance, sol: &Solution, depth: f64) -> Solution {
    let reach = (0..inst.len())
        .map(|i| {
            let [x, y] = sol.pattern.center(i);
            x.hypot(y) + inst.radius(i)
        })
        .fold(0.0, f64::max);
    Solution {
        radius: reach - depth,
        ..sol.clone()
    }
}

fn criterion_8(ledger: &mut Ledger) -> Verdict {
    for n in 5..=8 {
        let inst = Instance::contest(n).unwrap();
        ledger.solve(&inst, Duration::from_secs(2), 8, None);
    }
    let mut bad = 0;
    let mut missed = 0;
    for (inst, sol) in &ledger.solutions {
        if !verify_solution(inst, sol, VERIFY_TOL).unwrap().feasible {
            bad += 1;
        }
        let mut fuzzed = vec![inject_container_overlap(inst, sol, INJECTED_OVERLAP)];
        fuzzed.extend(inject_pair_overlap(inst, sol, INJECTED_OVERLAP));
        for f in &fuzzed {
            if verify_solution(inst, f, VERIFY_TOL).unwrap().feasible {
                missed += 1;
            }
        }
    }
    verdict(
        bad == 0 && missed == 0,
        format!(
            "{} solutions, {bad} rejected, {missed} injected overlaps accepted",
            ledger.solutions.len()
        ),
    )
}

fn criterion_9(ledger: &mut Ledger) -> Verdict {
    if ledger.runs.is_empty() {
        let inst = Instance::contest(9).unwrap();
        ledger.solve(&inst, Duration::from_secs(3), 9, None);
    }
    let mut bad = 0;
    for (inst, accepted, last) in &ledger.runs {
        let area = inst.radii().iter().map(|r| r * r).sum::<f64>().sqrt();
        let decreasing = accepted.windows(2).all(|w| w[1] < w[0]);
        if !decreasing || *last < inst.largest_radius().max(area) {
            bad += 1;
        }
    }
    verdict(
        bad == 0,
        format!("{} runs, {bad} violations", ledger.runs.len()),
    )
}

fn criterion_10(_: &mut Ledger) -> Verdict {
    let dir = tempfile::TempDir::new().unwrap();
    let bin = env!("CARGO_BIN_EXE_pucc");
    let inst = dir.path().join("contest10.txt");
    let gen = Command::new(bin)
        .args(["gen-contest", "10", "--out"])
        .arg(&inst)
        .status()
        .unwrap();
    assert!(gen.success());
    let run = |tag: &str| -> Vec<Vec<u8>> {
        let files: Vec<PathBuf> = ["sol.txt", "trace.csv", "history.csv"]
            .iter()
            .map(|f| dir.path().join(format!("{tag}-{f}")))
            .collect();
        let status = Command::new(bin)
            .arg("solve")
            .arg(&inst)
            .args(["--time-limit", "5", "--seed", "2024", "--out"])
            .arg(&files[0])
            .arg("--trace")
            .arg(&files[1])
            .arg("--history")
            .arg(&files[2])
            .output()
            .unwrap();
        assert!(status.status.success());
        files.iter().map(|f| std::fs::read(f).unwrap()).collect()
    };
    let a = run("a");
    let b = run("b");
    let same = a == b;
    let sizes: Vec<usize> = a.iter().map(Vec::len).collect();
    verdict(
        same && sizes.iter().all(|&s| s > 0),
        format!("solution/trace/history bytes {sizes:?}, identical: {same}"),
    )
}

type Criterion = fn(&mut Ledger) -> Verdict;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("gradient vs finite differences", criterion_1),
        ("energy vs brute-force oracle", criterion_2),
        ("two-disk optimum R = 3", criterion_3),
        ("contest n = 5..16", criterion_4),
        ("contest n = 17..21", criterion_5),
        ("tabu vs steepest descent", criterion_6),
        ("NR instances", criterion_7),
        ("emitted solutions verify", criterion_8),
        ("accepted radii monotone and bounded", criterion_9),
        ("seeded solve is byte-identical", criterion_10),
    ];
    let only: Option<Vec<usize>> = std::env::var("PUCC_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut ledger = Ledger {
        solutions: Vec::new(),
        runs: Vec::new(),
    };
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = k + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let started = Instant::now();
        let v = check(&mut ledger);
        let label = match v.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        if v.status == Status::Fail {
            failed += 1;
        }
        println!(
            "{label} {id:>2} {name}: {} [{:.1}s]",
            v.detail,
            started.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
