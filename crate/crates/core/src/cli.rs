//! Command-line front end. The binary is a thin wrapper around [`run`].
//!
//! Exit codes: 0 on success, 1 when the run completed but the answer is
//! negative (no feasible pattern found, solution rejected), 2 on usage,
//! I/O or parse errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};

use crate::driver::{solve_with_decider, SolveOptions, SolveRun};
use crate::error::{Error, Result};
use crate::io;
use crate::its::{its_decide, multistart_decide, DecideOutcome, LocalSearch};
use crate::model::{Instance, RngSeed, Solution, SolverParams, SolverRng};
use crate::trace::{Clock, Monitor};

#[derive(Debug, Parser)]
#[command(
    name = "pucc",
    version,
    about = "Pack unequal circles into the smallest circle"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    /// Iterated tabu search.
    Its,
    /// Multistart tabu search (random restart instead of perturbation).
    Mts,
    /// Multistart steepest descent.
    Sd,
}

impl Strategy {
    fn name(self) -> &'static str {
        match self {
            Strategy::Its => "its",
            Strategy::Mts => "mts",
            Strategy::Sd => "sd",
        }
    }

    fn decide(
        self,
        instance: &Instance,
        radius: f64,
        params: &SolverParams,
        budget: Duration,
        rng: &mut SolverRng,
        monitor: &mut Monitor,
    ) -> Result<DecideOutcome> {
        match self {
            Strategy::Its => its_decide(instance, radius, params, budget, rng, monitor),
            Strategy::Mts => multistart_decide(
                instance,
                radius,
                params,
                LocalSearch::Tabu,
                budget,
                rng,
                monitor,
            ),
            Strategy::Sd => multistart_decide(
                instance,
                radius,
                params,
                LocalSearch::SteepestDescent,
                budget,
                rng,
                monitor,
            ),
        }
    }
}

/// Options shared by the searching commands.
#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Time budget in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub time_limit: f64,
    /// Random seed. Giving a seed also switches budgets to the deterministic
    /// work clock, making every output file reproducible.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Measure budgets in wall-clock time even when a seed is given.
    #[arg(long)]
    pub wall_clock: bool,
    #[arg(long, value_enum, default_value_t = Strategy::Its)]
    pub strategy: Strategy,
    /// Feasibility tolerance on overlap depth.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the smallest container radius within the time limit.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Solution file to write.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Search trajectory CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Per-attempt history CSV.
        #[arg(long)]
        history: Option<PathBuf>,
        /// SVG drawing of the best packing.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Stop once the radius is at most this value.
        #[arg(long)]
        target: Option<f64>,
    },
    /// Look for a feasible packing at a fixed container radius.
    Decide {
        instance: PathBuf,
        #[arg(long)]
        radius: f64,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check a solution file against an instance.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Draw a solution as SVG.
    Render {
        instance: PathBuf,
        solution: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the contest instance with radii 1..n.
    GenContest {
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every instance in a directory for several seeds.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Runs per instance, with seeds `seed, seed+1, ...`.
        #[arg(long, default_value_t = 1)]
        repeat: u64,
        /// File of `name radius` lines with best-known radii.
        #[arg(long)]
        targets: Option<PathBuf>,
        /// Stop each run once it reaches its target radius.
        #[arg(long)]
        stop_at_target: bool,
        /// Results CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parallel worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

/// Relative slack under which a radius counts as reaching its target.
pub const HIT_REL_TOL: f64 = 1e-5;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into())
}

fn load_instance_file(path: &Path) -> Result<Instance> {
    io::load_instance(&read(path)?, &stem(path))
}

fn params_for(run: &RunArgs) -> Result<SolverParams> {
    let mut p = SolverParams::default();
    if let Some(t) = run.tol {
        p.feasibility_tol = t;
    }
    p.validate()?;
    Ok(p)
}

fn budget(run: &RunArgs) -> Result<Duration> {
    if !(run.time_limit.is_finite() && run.time_limit > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "--time-limit must be positive, got {}",
            run.time_limit
        )));
    }
    Ok(Duration::from_secs_f64(run.time_limit))
}

fn seed_and_clock(run: &RunArgs) -> (RngSeed, bool) {
    match run.seed {
        Some(s) => (RngSeed(s), !run.wall_clock),
        None => {
            let t = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0);
            let seed = RngSeed(t).derive(0);
            eprintln!("seed {}", seed.0);
            (seed, false)
        }
    }
}

fn solve_one(
    instance: &Instance,
    run: &RunArgs,
    seed: RngSeed,
    deterministic: bool,
    target: Option<f64>,
    trace: bool,
) -> Result<SolveRun> {
    let params = params_for(run)?;
    let opts = SolveOptions {
        budget: budget(run)?,
        seed,
        deterministic,
        target_radius: target,
        trace,
    };
    let strategy = run.strategy;
    solve_with_decider(instance, &params, &opts, |i, r, p, b, g, m| {
        strategy.decide(i, r, p, b, g, m)
    })
}

fn cmd_solve(
    instance: &Path,
    run: &RunArgs,
    out: Option<&Path>,
    trace: Option<&Path>,
    history: Option<&Path>,
    svg: Option<&Path>,
    target: Option<f64>,
) -> Result<i32> {
    let inst = load_instance_file(instance)?;
    let (seed, deterministic) = seed_and_clock(run);
    let result = solve_one(&inst, run, seed, deterministic, target, trace.is_some())?;
    if let Some(p) = out {
        write(p, &io::write_solution(&result.best))?;
    }
    if let Some(p) = trace {
        write(p, &io::write_trace_csv(&result.trace)?)?;
    }
    if let Some(p) = history {
        write(p, &io::write_history_csv(&result.history)?)?;
    }
    if let Some(p) = svg {
        write(p, &io::render_svg(&inst, &result.best)?)?;
    }
    println!("{} R = {:.10}", inst.name(), result.best.radius);
    Ok(0)
}

fn cmd_decide(
    instance: &Path,
    radius: f64,
    run: &RunArgs,
    out: Option<&Path>,
    trace: Option<&Path>,
) -> Result<i32> {
    let inst = load_instance_file(instance)?;
    let params = params_for(run)?;
    let (seed, deterministic) = seed_and_clock(run);
    let clock = if deterministic {
        Clock::work()
    } else {
        Clock::wall()
    };
    let mut monitor = Monitor::new(clock);
    if trace.is_some() {
        monitor = monitor.with_trace();
    }
    let mut rng = seed.rng();
    let outcome =
        run.strategy
            .decide(&inst, radius, &params, budget(run)?, &mut rng, &mut monitor)?;
    if let Some(p) = trace {
        write(p, &io::write_trace_csv(monitor.records())?)?;
    }
    if let Some(p) = out {
        let sol = Solution {
            radius,
            max_violation: crate::energy::max_violation(&outcome.pattern, &inst, radius)?,
            pattern: outcome.pattern.clone(),
            instance_name: inst.name().to_string(),
        };
        write(p, &io::write_solution(&sol))?;
    }
    println!(
        "{} R = {radius} {} energy {:e} restarts {}",
        inst.name(),
        if outcome.feasible {
            "feasible"
        } else {
            "infeasible"
        },
        outcome.energy,
        outcome.restarts
    );
    Ok(if outcome.feasible { 0 } else { 1 })
}

fn cmd_verify(instance: &Path, solution: &Path, tol: f64) -> Result<i32> {
    let inst = load_instance_file(instance)?;
    let sol = io::load_solution(&read(solution)?, &inst)?;
    let rep = io::verify_solution(&inst, &sol, tol)?;
    let worst = match rep.worst {
        Some(io::WorstTerm::Pair(i, j)) => format!(" (disks {} and {})", i + 1, j + 1),
        Some(io::WorstTerm::Container(i)) => format!(" (disk {} vs container)", i + 1),
        None => String::new(),
    };
    println!(
        "{}: {} max violation {:e}{worst}",
        inst.name(),
        if rep.feasible {
            "feasible"
        } else {
            "INFEASIBLE"
        },
        rep.max_violation
    );
    Ok(if rep.feasible { 0 } else { 1 })
}

fn cmd_render(instance: &Path, solution: &Path, out: Option<&Path>) -> Result<i32> {
    let inst = load_instance_file(instance)?;
    let sol = io::load_solution(&read(solution)?, &inst)?;
    let svg = io::render_svg(&inst, &sol)?;
    match out {
        Some(p) => write(p, &svg)?,
        None => print!("{svg}"),
    }
    Ok(0)
}

fn cmd_gen_contest(n: usize, out: Option<&Path>) -> Result<i32> {
    let text = io::write_instance(&Instance::contest(n)?);
    match out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

/// Reads `name radius` lines.
pub fn load_targets(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(r), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(
                i + 1,
                format!("expected \"name radius\", found {line:?}"),
            ));
        };
        let r: f64 = r
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("bad radius {r:?}")))?;
        out.push((name.to_string(), r));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub seed: u64,
    pub strategy: &'static str,
    pub best_radius: f64,
    pub time_to_best: f64,
    pub feasible: bool,
    pub hit: Option<bool>,
}

pub const RESULTS_HEADER: [&str; 7] = [
    "instance",
    "seed",
    "strategy",
    "best_R",
    "time_to_best_s",
    "feasible",
    "hit",
];

pub fn write_results_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.seed.to_string(),
            r.strategy.to_string(),
            r.best_radius.to_string(),
            r.time_to_best.to_string(),
            r.feasible.to_string(),
            r.hit.map(|h| h.to_string()).unwrap_or_default(),
        ])?;
    }
    io::csv_string(w)
}

fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for e in entries {
        let e = e.map_err(|e| Error::io(dir, e))?;
        let path = e.path();
        let hidden = path
            .file_name()
            .is_some_and(|n| n.to_string_lossy().starts_with('.'));
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    dir: &Path,
    run: &RunArgs,
    repeat: u64,
    targets: Option<&Path>,
    stop_at_target: bool,
    out: Option<&Path>,
    jobs: usize,
) -> Result<i32> {
    let files = instance_files(dir)?;
    if files.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no instance files in {}",
            dir.display()
        )));
    }
    let instances = files
        .iter()
        .map(|f| load_instance_file(f))
        .collect::<Result<Vec<_>>>()?;
    let targets = match targets {
        Some(p) => load_targets(&read(p)?)?,
        None => Vec::new(),
    };
    let target_of = |name: &str| targets.iter().find(|(n, _)| n == name).map(|(_, r)| *r);
    let (base, deterministic) = seed_and_clock(run);
    let cells: Vec<(usize, u64)> = (0..instances.len())
        .flat_map(|i| (0..repeat).map(move |k| (i, base.0.wrapping_add(k))))
        .collect();

    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<Result<BenchRow>>>> =
        Mutex::new((0..cells.len()).map(|_| None).collect());
    let worker = || loop {
        let idx = next.fetch_add(1, Ordering::Relaxed);
        let Some(&(i, seed)) = cells.get(idx) else {
            break;
        };
        let inst = &instances[i];
        let target = target_of(inst.name());
        let row = solve_one(
            inst,
            run,
            RngSeed(seed),
            deterministic,
            target
                .filter(|_| stop_at_target)
                .map(|t| t * (1.0 + HIT_REL_TOL)),
            false,
        )
        .map(|res| BenchRow {
            instance: inst.name().to_string(),
            seed,
            strategy: run.strategy.name(),
            best_radius: res.best.radius,
            time_to_best: res.time_to_best.as_secs_f64(),
            feasible: io::verify_solution(inst, &res.best, res.params.feasibility_tol)
                .is_ok_and(|v| v.feasible),
            hit: target.map(|t| res.best.radius <= t * (1.0 + HIT_REL_TOL)),
        });
        rows.lock().expect("no worker panicked")[idx] = Some(row);
    };
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            s.spawn(worker);
        }
    });
    let rows = rows
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect::<Result<Vec<_>>>()?;
    let csv = write_results_csv(&rows)?;
    match out {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Solve {
            instance,
            run,
            out,
            trace,
            history,
            svg,
            target,
        } => cmd_solve(
            instance,
            run,
            out.as_deref(),
            trace.as_deref(),
            history.as_deref(),
            svg.as_deref(),
            *target,
        ),
        Command::Decide {
            instance,
            radius,
            run,
            out,
            trace,
        } => cmd_decide(instance, *radius, run, out.as_deref(), trace.as_deref()),
        Command::Verify {
            instance,
            solution,
            tol,
        } => cmd_verify(instance, solution, *tol),
        Command::Render {
            instance,
            solution,
            out,
        } => cmd_render(instance, solution, out.as_deref()),
        Command::GenContest { n, out } => cmd_gen_contest(*n, out.as_deref()),
        Command::Bench {
            dir,
            run,
            repeat,
            targets,
            stop_at_target,
            out,
            jobs,
        } => cmd_bench(
            dir,
            run,
            *repeat,
            targets.as_deref(),
            *stop_at_target,
            out.as_deref(),
            *jobs,
        ),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
