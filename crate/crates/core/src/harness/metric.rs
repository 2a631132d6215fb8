use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrators::State;
use crate::spectral::SpectralSpace;

/// Reference norms below this switch the metric to absolute errors.
pub const REFERENCE_NORM_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorValue {
    pub value: f64,
    /// Set when a reference norm was too small to divide by.
    pub absolute_fallback: bool,
}

/// `‖u − u_ref‖_{H¹}/‖u_ref‖_{H¹} + ‖v − v_ref‖_{L²}/‖v_ref‖_{L²}`.
pub fn error_metric(space: &SpectralSpace, numeric: &State, reference: &State) -> Result<ErrorValue> {
    numeric.u.ensure_same_grid(&reference.u)?;
    if numeric.u.grid() != space.grid() {
        return Err(Error::GridMismatch);
    }
    let tol = 1e-9 * reference.t.abs().max(1.0);
    if (numeric.t - reference.t).abs() > tol {
        return Err(Error::TimeMismatch { left: numeric.t, right: reference.t });
    }
    let du = space.sobolev_norm(&numeric.u.sub(&reference.u)?, 1.0);
    let dv = space.sobolev_norm(&numeric.v.sub(&reference.v)?, 0.0);
    let nu = space.sobolev_norm(&reference.u, 1.0);
    let nv = space.sobolev_norm(&reference.v, 0.0);
    let mut fallback = false;
    let mut rel = |diff: f64, norm: f64| {
        if norm < REFERENCE_NORM_FLOOR {
            fallback = true;
            diff
        } else {
            diff / norm
        }
    };
    let value = rel(du, nu) + rel(dv, nv);
    Ok(ErrorValue { value, absolute_fallback: fallback })
}
