use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;

use super::report::{ConvergenceReport, FitSummary, MethodRanking, ReferenceInfo, Row, SeedRun, StudyKind};
use super::{error_metric, fit_order, DataSpec, OrderFit, ReferenceMode, StudySpec, REFERENCE_FLOOR_FACTOR};
use crate::error::{Error, Result};
use crate::integrators::{evolve, rk4ref_evolve, EvolveOptions, KleinGordon, Method, State, Stepper};

pub const FLAG_FLOOR: &str = "at-reference-floor";
pub const FLAG_NON_MONOTONE: &str = "non-monotone";
pub const FLAG_BLOW_UP: &str = "blow-up";
pub const FLAG_ABSOLUTE: &str = "absolute-norm";

pub const EFFICIENCY_REPEATS: usize = 3;

fn initial_state(system: &KleinGordon, data: &DataSpec, seed: u64) -> Result<State> {
    let d = data.generate(seed, system.problem().grid)?;
    system.initial_state(d.u0, d.v0)
}

fn run_to(system: &KleinGordon, init: &State, t_end: f64, method: Method, h: f64) -> Result<(State, usize)> {
    let stepper = Stepper::new(system, method, h)?;
    let traj = evolve(system, init, t_end, &stepper, EvolveOptions::default())?;
    Ok((traj.final_state, traj.steps))
}

fn reference_solution(system: &KleinGordon, init: &State, t_end: f64, mode: ReferenceMode, h: f64) -> Result<State> {
    match mode {
        ReferenceMode::Rk4ref => rk4ref_evolve(system, init, t_end, h),
        ReferenceMode::FineLri3 => Ok(run_to(system, init, t_end, Method::Lri3, h)?.0),
    }
}

fn reference_order(mode: ReferenceMode) -> i32 {
    match mode {
        ReferenceMode::Rk4ref => 4,
        ReferenceMode::FineLri3 => 3,
    }
}

struct Cell {
    run: SeedRun,
    steps: usize,
}

/// Everything a cell compares against: one seed's system, data and reference.
struct Target<'a> {
    system: &'a KleinGordon,
    init: &'a State,
    reference: &'a State,
    floor: f64,
    seed: u64,
}

fn timed_cell(target: &Target, t_end: f64, method: Method, k: u32, h: f64, repeats: usize) -> Result<Cell> {
    let Target { system, init, reference, floor, seed } = *target;
    let mut wall_ns = u64::MAX;
    let mut outcome = Err(Error::TooFewPoints(0));
    for _ in 0..repeats.max(1) {
        let started = Instant::now();
        outcome = run_to(system, init, t_end, method, h);
        wall_ns = wall_ns.min(started.elapsed().as_nanos() as u64);
    }
    let mut flags = Vec::new();
    let (err, steps) = match outcome {
        Ok((state, steps)) => {
            let e = error_metric(system.space(), &state, reference)?;
            if e.absolute_fallback {
                flags.push(FLAG_ABSOLUTE.to_string());
            }
            if e.value < floor {
                flags.push(FLAG_FLOOR.to_string());
            }
            (e.value, steps)
        }
        Err(Error::BlowUp { step, .. }) => {
            flags.push(FLAG_BLOW_UP.to_string());
            (f64::INFINITY, step)
        }
        Err(e) => return Err(e),
    };
    Ok(Cell { run: SeedRun { seed, method, k, err, wall_ns, flags }, steps })
}

/// Flags each error that is larger than the one at the next coarser `k`.
fn flag_non_monotone(runs: &mut [&mut SeedRun]) {
    runs.sort_by_key(|r| r.k);
    for i in 1..runs.len() {
        if runs[i].err > runs[i - 1].err {
            runs[i].flags.push(FLAG_NON_MONOTONE.to_string());
        }
    }
}

fn fittable(runs: &[&SeedRun], window: (u32, u32)) -> Vec<(f64, f64)> {
    runs.iter()
        .filter(|r| r.k >= window.0 && r.k <= window.1)
        .filter(|r| !r.flags.iter().any(|f| f == FLAG_FLOOR))
        .map(|r| (r.k as f64, r.err))
        .collect()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

/// Seed-averaged rows, in method then `k` order.
fn aggregate(
    runs: &[SeedRun],
    steps: &[((Method, u32), usize)],
    methods: &[Method],
    h_of: impl Fn(u32) -> f64,
    n_of: impl Fn(u32) -> usize,
) -> Vec<Row> {
    let mut rows = Vec::new();
    for &m in methods {
        let ks: BTreeSet<u32> = runs.iter().filter(|r| r.method == m).map(|r| r.k).collect();
        for k in ks {
            let cell: Vec<&SeedRun> = runs.iter().filter(|r| r.method == m && r.k == k).collect();
            let mut flags: Vec<String> = cell.iter().flat_map(|r| r.flags.iter().cloned()).collect();
            flags.sort();
            flags.dedup();
            let wall = cell.iter().map(|r| r.wall_ns).sum::<u64>() / cell.len() as u64;
            let steps = steps.iter().find(|(key, _)| *key == (m, k)).map(|(_, s)| *s).unwrap_or(0);
            rows.push(Row {
                method: m,
                k,
                h: h_of(k),
                n_x: n_of(k),
                steps,
                err: mean(cell.iter().map(|r| r.err)),
                wall_ns: wall,
                flags,
            });
        }
    }
    rows
}

fn summarize_fits(
    report: &mut ConvergenceReport,
    methods: &[Method],
    window: (u32, u32),
    negate: bool,
) {
    let seeds = report.seeds.clone();
    for &m in methods {
        let mut per_seed = Vec::new();
        for &seed in &seeds {
            let runs: Vec<&SeedRun> = report.runs.iter().filter(|r| r.method == m && r.seed == seed).collect();
            let fit = fit_order(&fittable(&runs, window), None).ok().map(|f| orient(f, negate));
            if fit.is_none() {
                report.warnings.push(format!("{m}: no slope for seed {seed} (fewer than 3 usable points)"));
            }
            per_seed.push((seed, fit));
        }
        let slopes: Vec<&OrderFit> = per_seed.iter().filter_map(|(_, f)| f.as_ref()).collect();
        let (slope, residual) = if slopes.is_empty() {
            (None, None)
        } else {
            (Some(mean(slopes.iter().map(|f| f.slope))), Some(mean(slopes.iter().map(|f| f.residual))))
        };
        let points: Vec<(f64, f64)> = report
            .rows_for(m)
            .filter(|r| r.k >= window.0 && r.k <= window.1 && !r.flags.iter().any(|f| f == FLAG_FLOOR))
            .map(|r| (r.k as f64, r.err))
            .collect();
        let mean_error_fit = fit_order(&points, None).ok().map(|f| orient(f, negate));
        report.fits.push(FitSummary { method: m, window, slope, residual, per_seed, mean_error_fit });
    }
}

/// Spatial slopes are reported against `log₂ n_x`, hence negative for a convergent method.
fn orient(mut fit: OrderFit, negate: bool) -> OrderFit {
    if negate {
        fit.slope = -fit.slope;
    }
    fit
}

/// Every method against a fine reference on the ladder `h = 2^{−k}`.
///
/// Cells run in parallel on the current rayon pool; the error columns do not
/// depend on the pool size.
pub fn temporal_study(spec: &StudySpec) -> Result<ConvergenceReport> {
    temporal(spec, Timing::Parallel)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Timing {
    Parallel,
    /// One cell at a time, best of this many repetitions.
    Serial(usize),
}

fn temporal(spec: &StudySpec, timing: Timing) -> Result<ConvergenceReport> {
    spec.validate_temporal()?;
    let mut report = ConvergenceReport::new(StudyKind::Temporal, spec);
    let system = spec.problem.system(spec.problem.n_x)?;
    let seeds = report.seeds.clone();

    let prepared: Vec<(u64, State, State, f64, f64)> = seeds
        .par_iter()
        .map(|&seed| {
            let init = initial_state(&system, &spec.data, seed)?;
            let fine = reference_solution(&system, &init, spec.t_end, spec.reference, spec.h_ref)
                .map_err(|e| Error::Reference(Box::new(e)))?;
            let coarse = reference_solution(&system, &init, spec.t_end, spec.reference, 2.0 * spec.h_ref)
                .map_err(|e| Error::Reference(Box::new(e)))?;
            let difference = error_metric(system.space(), &coarse, &fine)?.value;
            let self_error = difference / (2f64.powi(reference_order(spec.reference)) - 1.0);
            Ok((seed, init, fine, self_error, REFERENCE_FLOOR_FACTOR * self_error))
        })
        .collect::<Result<_>>()?;

    let ladder = spec.stepsizes();
    let mut jobs: Vec<(usize, Method, u32, f64)> = Vec::new();
    for i in 0..prepared.len() {
        for &m in &spec.methods {
            jobs.extend(ladder.iter().map(|&(k, h)| (i, m, k, h)));
        }
    }
    let cell = |&(i, m, k, h): &(usize, Method, u32, f64), repeats: usize| {
        let (seed, init, reference, _, floor) = &prepared[i];
        let target = Target { system: &system, init, reference, floor: *floor, seed: *seed };
        timed_cell(&target, spec.t_end, m, k, h, repeats)
    };
    let cells: Vec<Cell> = match timing {
        Timing::Parallel => jobs.par_iter().map(|j| cell(j, 1)).collect::<Result<_>>()?,
        Timing::Serial(repeats) => jobs.iter().map(|j| cell(j, repeats)).collect::<Result<_>>()?,
    };

    let steps: Vec<((Method, u32), usize)> = cells.iter().map(|c| ((c.run.method, c.run.k), c.steps)).collect();
    report.runs = cells.into_iter().map(|c| c.run).collect();
    for &seed in &seeds {
        for &m in &spec.methods {
            let mut group: Vec<&mut SeedRun> =
                report.runs.iter_mut().filter(|r| r.seed == seed && r.method == m).collect();
            flag_non_monotone(&mut group);
        }
    }
    for r in report.runs.iter().filter(|r| r.flags.iter().any(|f| f == FLAG_BLOW_UP)) {
        report.warnings.push(format!("{}: blow-up at k = {} (seed {})", r.method, r.k, r.seed));
    }
    report.rows = aggregate(&report.runs, &steps, &spec.methods, |k| 2f64.powi(-(k as i32)), |_| spec.problem.n_x);
    report.reference = Some(ReferenceInfo {
        mode: spec.reference,
        h_ref: spec.h_ref,
        n_x: spec.problem.n_x,
        self_error: prepared.iter().map(|p| (p.0, p.3)).collect(),
        floor: prepared.iter().map(|p| (p.0, p.4)).collect(),
    });
    summarize_fits(&mut report, &spec.methods.clone(), spec.fit_window, false);
    Ok(report)
}

/// LRI3 at the fixed stepsize `spatial_h` on each `n_x`, against the projected
/// solution on `spatial_n_ref`. Data are drawn once on the reference grid and
/// projected, so all resolutions share their low modes.
pub fn spatial_study(spec: &StudySpec) -> Result<ConvergenceReport> {
    spec.validate_spatial()?;
    let mut report = ConvergenceReport::new(StudyKind::Spatial, spec);
    let ref_system = spec.problem.system(spec.spatial_n_ref)?;
    let seeds = report.seeds.clone();
    let h = spec.spatial_h;
    let method = Method::Lri3;

    let references: Vec<(u64, State)> = seeds
        .par_iter()
        .map(|&seed| {
            let init = initial_state(&ref_system, &spec.data, seed)?;
            let (fin, _) = run_to(&ref_system, &init, spec.t_end, method, h).map_err(|e| Error::Reference(Box::new(e)))?;
            Ok((seed, fin))
        })
        .collect::<Result<_>>()?;

    let mut n_list = spec.spatial_n_x.clone();
    n_list.sort_unstable();
    let jobs: Vec<(usize, usize)> =
        (0..seeds.len()).flat_map(|i| n_list.iter().map(move |&n| (i, n))).collect();
    let results: Vec<Cell> = jobs
        .par_iter()
        .map(|&(i, n)| {
            let seed = seeds[i];
            let system = spec.problem.system(n)?;
            let grid = system.problem().grid;
            let data = spec.data.generate(seed, ref_system.problem().grid)?.project(grid)?;
            let init = system.initial_state(data.u0, data.v0)?;
            let fin = &references[i].1;
            let reference = State::new(fin.t, fin.u.project(grid)?, fin.v.project(grid)?)?;
            let target = Target { system: &system, init: &init, reference: &reference, floor: 0.0, seed };
            timed_cell(&target, spec.t_end, method, n.trailing_zeros(), h, 1)
        })
        .collect::<Result<_>>()?;

    let steps: Vec<((Method, u32), usize)> = results.iter().map(|c| ((c.run.method, c.run.k), c.steps)).collect();
    report.runs = results.into_iter().map(|c| c.run).collect();
    for &seed in &seeds {
        let mut group: Vec<&mut SeedRun> = report.runs.iter_mut().filter(|r| r.seed == seed).collect();
        // larger k is finer here, so the error must fall as k grows
        group.sort_by_key(|r| r.k);
        for i in 1..group.len() {
            if group[i].err >= group[i - 1].err {
                group[i].flags.push(FLAG_NON_MONOTONE.to_string());
            }
        }
    }
    report.rows = aggregate(&report.runs, &steps, &[method], |_| h, |k| 1usize << k);
    for w in report.rows.windows(2) {
        if w[1].err >= w[0].err {
            report.warnings.push(format!("spatial error not decreasing from n_x = {} to {}", w[0].n_x, w[1].n_x));
        }
    }

    // one halving probe on the finest grid and first seed
    let finest = *n_list.last().unwrap_or(&spec.problem.n_x);
    let system = spec.problem.system(finest)?;
    let data = spec.data.generate(seeds[0], ref_system.problem().grid)?.project(system.problem().grid)?;
    let init = system.initial_state(data.u0, data.v0)?;
    if let (Ok((a, _)), Ok((b, _))) = (
        run_to(&system, &init, spec.t_end, method, h),
        run_to(&system, &init, spec.t_end, method, 2.0 * h),
    ) {
        let probe = error_metric(system.space(), &b, &a)?.value;
        report.temporal_probe = Some(probe);
        let smallest = report.rows.iter().map(|r| r.err).fold(f64::INFINITY, f64::min);
        if probe > 0.1 * smallest {
            report.warnings.push(format!(
                "temporal error is not negligible: halving probe {probe:e} vs smallest spatial error {smallest:e}"
            ));
        }
    } else {
        report.warnings.push("halving probe failed; 2h does not divide T".into());
    }

    let lo = n_list.first().map(|n| n.trailing_zeros()).unwrap_or(0);
    let hi = n_list.last().map(|n| n.trailing_zeros()).unwrap_or(0);
    summarize_fits(&mut report, &[method], (lo, hi), true);
    Ok(report)
}

/// Wall time against error for every `(method, h)`, with methods ranked by
/// the cheapest run that reaches `target_err`.
///
/// Cells run one at a time and each wall time is the best of
/// [`EFFICIENCY_REPEATS`] runs, so timings do not compete for cores.
pub fn efficiency_study(spec: &StudySpec) -> Result<ConvergenceReport> {
    let mut report = temporal(spec, Timing::Serial(EFFICIENCY_REPEATS))?;
    report.kind = StudyKind::Efficiency;
    let mut ranking: Vec<MethodRanking> = spec
        .methods
        .iter()
        .map(|&m| {
            let best = report
                .rows_for(m)
                .filter(|r| r.err <= spec.target_err)
                .min_by_key(|r| r.wall_ns);
            MethodRanking {
                method: m,
                rank: None,
                k: best.map(|r| r.k),
                steps: best.map(|r| r.steps),
                wall_ns: best.map(|r| r.wall_ns),
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..ranking.len()).filter(|&i| ranking[i].wall_ns.is_some()).collect();
    order.sort_by_key(|&i| ranking[i].wall_ns);
    for (rank, &i) in order.iter().enumerate() {
        ranking[i].rank = Some(rank + 1);
    }
    for r in ranking.iter().filter(|r| r.rank.is_none()) {
        report.warnings.push(format!("{}: target {:e} not reached on the ladder", r.method, spec.target_err));
    }
    report.ranking = ranking;
    Ok(report)
}
