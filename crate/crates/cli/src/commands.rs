use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use lowreg::harness::{efficiency_study, spatial_study, temporal_study, ConvergenceReport};
use lowreg::integrators::{energy, evolve, EvolveOptions, Stepper};
use lowreg::selftest::{run_selftest, SelftestOptions};
use lowreg::{KleinGordon, Problem, StateFile};
use serde::Serialize;

use crate::config::{Command, RunConfig};

pub fn execute(command: Command, config: &RunConfig) -> Result<()> {
    if let Some(n) = config.output.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring thread pool")?;
    }
    let dir = &config.output.dir;
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    match command {
        Command::Run => run(config),
        Command::Converge | Command::Spatial | Command::Efficiency => study(command, config),
    }
}

#[derive(Debug, Serialize)]
struct Snapshot {
    t: f64,
    u_h1: f64,
    v_l2: f64,
    energy: Option<f64>,
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    command: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    method: String,
    h: f64,
    steps: usize,
    seed: u64,
    wall_ns: u64,
    initial: Snapshot,
    #[serde(rename = "final")]
    last: Snapshot,
    relative_energy_drift: Option<f64>,
    energy_skipped: bool,
    state_file: String,
}

fn snapshot(system: &KleinGordon, state: &lowreg::State, with_energy: bool) -> Result<Snapshot> {
    let space = system.space();
    Ok(Snapshot {
        t: state.t,
        u_h1: space.sobolev_norm(&state.u, 1.0),
        v_l2: space.sobolev_norm(&state.v, 0.0),
        energy: if with_energy { Some(energy(system, state)?) } else { None },
    })
}

fn run(config: &RunConfig) -> Result<()> {
    let spec = config.problem_spec();
    let grid = spec.grid(spec.n_x)?;
    let problem = Problem::new(grid, spec.rho, lowreg::Nonlinearity::catalogue(&spec.nonlinearity)?)?;
    let system = KleinGordon::new(problem, spec.dealias);
    let data = config.data_spec().generate(config.data.seed, grid)?;
    let init = system.initial_state(data.u0, data.v0)?;

    let s = &config.study;
    let h = s.h.unwrap_or(2f64.powi(-(s.k_max as i32)));
    let t_end = match s.steps {
        Some(n) => n as f64 * h,
        None => config.t_end(Command::Run),
    };
    let stepper = Stepper::new(&system, s.method, h)?;
    let with_energy = s.energy && system.problem().nonlinearity.has_antiderivative();

    let started = Instant::now();
    let traj = evolve(&system, &init, t_end, &stepper, EvolveOptions::default())
        .with_context(|| format!("{} run with h = {h}", s.method))?;
    let wall_ns = started.elapsed().as_nanos() as u64;

    let dir = &config.output.dir;
    let state_path = dir.join("state.bin");
    StateFile::from_state(&traj.final_state, spec.rho)
        .write(&state_path)
        .with_context(|| format!("writing {}", state_path.display()))?;
    let initial = snapshot(&system, &init, with_energy)?;
    let last = snapshot(&system, &traj.final_state, with_energy)?;
    let drift = match (initial.energy, last.energy) {
        (Some(a), Some(b)) if a != 0.0 => Some((b - a).abs() / a.abs()),
        _ => None,
    };
    let summary = RunSummary {
        command: "run",
        version: env!("CARGO_PKG_VERSION"),
        config,
        method: s.method.to_string(),
        h,
        steps: traj.steps,
        seed: config.data.seed,
        wall_ns,
        initial,
        last,
        relative_energy_drift: drift,
        energy_skipped: s.energy && !with_energy,
        state_file: "state.bin".into(),
    };
    write_json(&dir.join("run.json"), &summary)?;
    if !config.output.quiet {
        println!(
            "{} h={h:e} steps={} t={} |u|_H1={:.6e} |v|_L2={:.6e} wall={:.3}s",
            s.method,
            traj.steps,
            summary.last.t,
            summary.last.u_h1,
            summary.last.v_l2,
            wall_ns as f64 * 1e-9
        );
        if summary.energy_skipped {
            println!("energy diagnostic skipped: {} has no antiderivative", spec.nonlinearity);
        }
        println!("wrote {} and {}", state_path.display(), dir.join("run.json").display());
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn study(command: Command, config: &RunConfig) -> Result<()> {
    let spec = config.study_spec(command)?;
    let (name, mut report) = match command {
        Command::Converge => ("converge", temporal_study(&spec)?),
        Command::Spatial => ("spatial", spatial_study(&spec)?),
        Command::Efficiency => ("efficiency", efficiency_study(&spec)?),
        Command::Run => unreachable!("run is not a study"),
    };
    report.config = Some(serde_json::to_value(config)?);
    let dir = &config.output.dir;
    report.write_json(&dir.join(format!("{name}.json")))?;
    report.write_csv(&dir.join(format!("{name}.csv")))?;
    report.write_plot_data(&dir.join(format!("{name}_plot.csv")))?;
    if !config.output.quiet {
        print_report(&report);
        println!("wrote {name}.json, {name}.csv and {name}_plot.csv to {}", dir.display());
    }
    Ok(())
}

fn print_report(report: &ConvergenceReport) {
    println!("{:<10} {:>4} {:>12} {:>12} {:>12}  flags", "method", "k", "h", "err", "wall_ms");
    for r in &report.rows {
        println!(
            "{:<10} {:>4} {:>12.4e} {:>12.4e} {:>12.3}  {}",
            r.method.name(),
            r.k,
            r.h,
            r.err,
            r.wall_ns as f64 * 1e-6,
            r.flags.join(";")
        );
    }
    for f in &report.fits {
        match (f.slope, f.residual) {
            (Some(s), Some(res)) => {
                println!("{}: slope {s:.3} (residual {res:.3}) over k = {}..{}", f.method, f.window.0, f.window.1)
            }
            _ => println!("{}: no slope", f.method),
        }
    }
    for r in &report.ranking {
        match (r.rank, r.wall_ns) {
            (Some(rank), Some(ns)) => println!(
                "rank {rank}: {} reaches target in {:.3} ms ({} steps)",
                r.method,
                ns as f64 * 1e-6,
                r.steps.unwrap_or(0)
            ),
            _ => println!("unranked: {}", r.method),
        }
    }
    if let Some(p) = report.temporal_probe {
        println!("temporal halving probe: {p:.3e}");
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
}

/// Prints the check table and returns whether every check passed.
pub fn selftest(quiet: bool, psi2_threshold: Option<f64>) -> bool {
    let mut opts = SelftestOptions::default();
    if let Some(t) = psi2_threshold {
        opts.psi2_threshold = t;
    }
    let started = Instant::now();
    let results = run_selftest(opts);
    let all = results.iter().all(|r| r.passed);
    if !quiet || !all {
        for r in &results {
            println!(
                "{:<24} {:<4} {:>8.1} ms  {}",
                r.name,
                if r.passed { "PASS" } else { "FAIL" },
                r.wall_ms,
                r.detail
            );
        }
        println!(
            "selftest: {}/{} passed in {:.2} s",
            results.iter().filter(|r| r.passed).count(),
            results.len(),
            started.elapsed().as_secs_f64()
        );
    }
    all
}
