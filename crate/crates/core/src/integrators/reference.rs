//! Classical RK4 on the spectral first-order system `u' = v, v' = −𝒜u + f(u)`.
//!
//! It shares nothing with the trigonometric schemes beyond the nonlinear-term
//! interpolant, which makes it a method-independent oracle.

use super::{KleinGordon, State};
use crate::error::{Error, Result};
use crate::spectral::{SpectralField, SymbolTable};

/// RK4 is stable on the imaginary axis up to `|hω| = 2√2`; keep a margin.
pub const RK4_STABILITY_LIMIT: f64 = 2.8;

pub fn rk4_stability_bound(symbols: &SymbolTable) -> f64 {
    let w = symbols.omega_max();
    if w == 0.0 {
        f64::INFINITY
    } else {
        RK4_STABILITY_LIMIT / w
    }
}

fn rhs(system: &KleinGordon, u: &SpectralField, v: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    let mut dv = system.nonlinear_term(u)?;
    let omega = system.symbols().omega();
    for ((d, uc), w) in dv.coeffs_mut().iter_mut().zip(u.coeffs()).zip(omega) {
        *d -= w * w * uc;
    }
    Ok((v.clone(), dv))
}

fn shifted(base: &SpectralField, alpha: f64, dir: &SpectralField) -> Result<SpectralField> {
    let mut out = base.clone();
    out.axpy(alpha, dir)?;
    Ok(out)
}

pub(super) fn rk4_step(system: &KleinGordon, state: &State, h: f64) -> Result<State> {
    let (u, v) = (&state.u, &state.v);
    let (k1u, k1v) = rhs(system, u, v)?;
    let (k2u, k2v) = rhs(system, &shifted(u, 0.5 * h, &k1u)?, &shifted(v, 0.5 * h, &k1v)?)?;
    let (k3u, k3v) = rhs(system, &shifted(u, 0.5 * h, &k2u)?, &shifted(v, 0.5 * h, &k2v)?)?;
    let (k4u, k4v) = rhs(system, &shifted(u, h, &k3u)?, &shifted(v, h, &k3v)?)?;
    let mut un = u.clone();
    let mut vn = v.clone();
    for (k, w) in [(&k1u, 1.0), (&k2u, 2.0), (&k3u, 2.0), (&k4u, 1.0)] {
        un.axpy(h * w / 6.0, k)?;
    }
    for (k, w) in [(&k1v, 1.0), (&k2v, 2.0), (&k3v, 2.0), (&k4v, 1.0)] {
        vn.axpy(h * w / 6.0, k)?;
    }
    Ok(State { t: state.t + h, u: un, v: vn })
}

/// Integrates from `state.t` to `t_end` with fixed RK4 steps of size `h_fine`.
pub fn rk4ref_evolve(system: &KleinGordon, state: &State, t_end: f64, h_fine: f64) -> Result<State> {
    if !(h_fine > 0.0 && h_fine.is_finite()) {
        return Err(Error::InvalidParameter { name: "h_fine", reason: format!("must be > 0, got {h_fine}") });
    }
    let bound = rk4_stability_bound(system.symbols());
    if h_fine > bound {
        return Err(Error::Unstable { h: h_fine, bound });
    }
    let steps = super::evolve::step_count(t_end - state.t, h_fine)?;
    let t0 = state.t;
    let mut current = state.clone();
    for k in 1..=steps {
        let mut next = rk4_step(system, &current, h_fine)?;
        if !next.is_finite() {
            return Err(Error::Unstable { h: h_fine, bound });
        }
        next.t = t0 + k as f64 * h_fine;
        current = next;
    }
    Ok(current)
}
