use std::collections::VecDeque;

use serde::Serialize;

use super::{KleinGordon, State, Stepper};
use crate::error::{Error, Result};

const HISTORY_LEN: usize = 8;

/// Number of steps of size `h` covering `duration`, which must be an integer
/// multiple of `h` up to roundoff.
pub(crate) fn step_count(duration: f64, h: f64) -> Result<usize> {
    let tol = 1e-9 * duration.abs().max(1.0);
    let n = (duration / h).round();
    if duration < -tol || !n.is_finite() || (n * h - duration).abs() > tol {
        return Err(Error::NonIntegerSteps { t_end: duration, h });
    }
    Ok(n.max(0.0) as usize)
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct EvolveOptions {
    /// Record a diagnostic sample every this many steps (0: only the endpoints).
    pub sample_every: usize,
    pub energy: bool,
    pub norms: bool,
    /// Also keep the sampled states themselves.
    pub keep_states: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub step: usize,
    pub t: f64,
    pub energy: Option<f64>,
    pub u_h1: Option<f64>,
    pub v_l2: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_state: State,
    pub steps: usize,
    pub samples: Vec<Sample>,
    pub states: Vec<State>,
    /// Energy was requested but the nonlinearity has no antiderivative.
    pub energy_skipped: bool,
}

fn sample(system: &KleinGordon, state: &State, step: usize, opts: &EvolveOptions, energy_ok: bool) -> Result<Sample> {
    let space = system.space();
    Ok(Sample {
        step,
        t: state.t,
        energy: if opts.energy && energy_ok { Some(energy(system, state)?) } else { None },
        u_h1: opts.norms.then(|| space.sobolev_norm(&state.u, 1.0)),
        v_l2: opts.norms.then(|| space.sobolev_norm(&state.v, 0.0)),
    })
}

/// Repeated stepping from `state.t` to `t_end`. Times are `t₀ + k·h`, not
/// accumulated sums.
pub fn evolve(
    system: &KleinGordon,
    state: &State,
    t_end: f64,
    stepper: &Stepper,
    opts: EvolveOptions,
) -> Result<Trajectory> {
    let steps = step_count(t_end - state.t, stepper.h)?;
    let energy_ok = system.problem().nonlinearity.has_antiderivative();
    let sampling = opts.energy || opts.norms || opts.keep_states;
    let t0 = state.t;

    let mut samples = Vec::new();
    let mut states = Vec::new();
    if sampling {
        samples.push(sample(system, state, 0, &opts, energy_ok)?);
        if opts.keep_states {
            states.push(state.clone());
        }
    }

    let mut history: VecDeque<f64> = VecDeque::with_capacity(HISTORY_LEN);
    let mut current = state.clone();
    for k in 1..=steps {
        let mut next = match stepper.step(system, &current) {
            Ok(s) => s,
            Err(Error::BlowUp { .. }) => {
                return Err(Error::BlowUp { step: k, t: t0 + k as f64 * stepper.h, history: history.into() })
            }
            Err(e) => return Err(e),
        };
        next.t = t0 + k as f64 * stepper.h;
        if history.len() == HISTORY_LEN {
            history.pop_front();
        }
        history.push_back(next.u.max_abs());
        let due = opts.sample_every > 0 && k % opts.sample_every == 0;
        if sampling && (due || k == steps) {
            samples.push(sample(system, &next, k, &opts, energy_ok)?);
            if opts.keep_states {
                states.push(next.clone());
            }
        }
        current = next;
    }
    Ok(Trajectory { final_state: current, steps, samples, states, energy_skipped: opts.energy && !energy_ok })
}

/// `E = ½∫(v² + |∇u|² + ρu²) dx − ∫F(u) dx` with `F' = f`.
///
/// Quadratic parts use Parseval; the potential uses grid quadrature.
pub fn energy(system: &KleinGordon, state: &State) -> Result<f64> {
    let nl = &system.problem().nonlinearity;
    if !nl.has_antiderivative() {
        return Err(Error::MissingAntiderivative(nl.name()));
    }
    let space = system.space();
    let rho = system.problem().rho;
    let volume = space.grid().volume();
    let quadratic: f64 = state
        .u
        .coeffs()
        .iter()
        .zip(state.v.coeffs())
        .zip(space.wavenumber_sq())
        .map(|((u, v), k2)| v.norm_sqr() + (k2 + rho) * u.norm_sqr())
        .sum();
    let potential = if nl.is_zero() {
        0.0
    } else {
        let u = space.to_physical(&state.u)?;
        let big_f: Vec<f64> = u.iter().map(|&x| nl.antiderivative(x).unwrap_or(0.0)).collect();
        space.integrate(&big_f)
    };
    Ok(0.5 * volume * quadratic - potential)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_counts() {
        assert_eq!(step_count(1.0, 0.25).unwrap(), 4);
        assert_eq!(step_count(0.0, 0.25).unwrap(), 0);
        assert_eq!(step_count(1.0, 1.0 / 3.0).unwrap(), 3);
        assert!(step_count(1.0, 0.3).is_err());
        assert!(step_count(-1.0, 0.5).is_err());
    }
}
