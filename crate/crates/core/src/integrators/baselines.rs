//! Comparison integrators: a third-order exponential Runge–Kutta method and
//! two classical second-order trigonometric schemes.

use num_complex::Complex64;

use super::{KleinGordon, State};
use crate::error::{Error, Result};
use crate::opfunc::{sinc, trig_phi};
use crate::spectral::{SpectralField, SymbolTable};

/// Exact flow of `u'' = −𝒜u` over a signed time `h`.
#[derive(Debug, Clone)]
pub struct LinearFlow {
    pub h: f64,
    pub cos_h: Vec<f64>,
    /// `h sinc(hω)`.
    pub h_sinc: Vec<f64>,
    /// `ω² h sinc(hω)`.
    pub omega_sinc: Vec<f64>,
}

impl LinearFlow {
    pub fn build(symbols: &SymbolTable, h: f64) -> Self {
        let mut flow = Self { h, cos_h: vec![], h_sinc: vec![], omega_sinc: vec![] };
        for &w in symbols.omega() {
            let m = h * w;
            let s = sinc(m);
            flow.cos_h.push(m.cos());
            flow.h_sinc.push(h * s);
            flow.omega_sinc.push(w * w * h * s);
        }
        flow
    }

    fn apply(&self, u: &SpectralField, v: &SpectralField) -> Result<(SpectralField, SpectralField)> {
        let grid = *u.grid();
        let (uc, vc) = (u.coeffs(), v.coeffs());
        let mut un = Vec::with_capacity(uc.len());
        let mut vn = Vec::with_capacity(uc.len());
        for i in 0..uc.len() {
            un.push(self.cos_h[i] * uc[i] + self.h_sinc[i] * vc[i]);
            vn.push(-self.omega_sinc[i] * uc[i] + self.cos_h[i] * vc[i]);
        }
        Ok((SpectralField::new(grid, un)?, SpectralField::new(grid, vn)?))
    }
}

/// Closed-form solution of `u'' = −𝒜u` at time `t`, mode by mode.
pub fn linear_solution(system: &KleinGordon, state: &State, t: f64) -> Result<State> {
    let flow = LinearFlow::build(system.symbols(), t - state.t);
    let (u, v) = flow.apply(&state.u, &state.v)?;
    Ok(State { t, u, v })
}

/// `a_k(hω)` for `k = 0..=4` and `a_k(hω/2)` for `k = 0..=2`.
///
/// With `Z = h [[0, 1], [−ω², 0]]` the exponential-integrator functions are
/// `φ_k(Z) = a_k I + a_{k+1} Z`, so `φ_k(Z)(0, g) = (h a_{k+1} g, a_k g)`.
#[derive(Debug, Clone)]
pub struct EtdTables {
    pub h: f64,
    full: [Vec<f64>; 5],
    half: [Vec<f64>; 3],
    omega_sq: Vec<f64>,
}

impl EtdTables {
    pub fn build(symbols: &SymbolTable, h: f64) -> Self {
        let full = std::array::from_fn(|k| symbols.omega().iter().map(|w| trig_phi(k, h * w)).collect());
        let half = std::array::from_fn(|k| symbols.omega().iter().map(|w| trig_phi(k, 0.5 * h * w)).collect());
        let omega_sq = symbols.omega().iter().map(|w| w * w).collect();
        Self { h, full, half, omega_sq }
    }
}

/// Three-stage exponential Runge–Kutta method of Cox and Matthews (nodes 0, 1/2, 1)
/// applied to the first-order system `(u, v)' = L(u, v) + (0, f(u))`:
///
/// ```text
/// a  = e^{hL/2}U + (h/2) φ₁(hL/2) N(U)
/// b  = e^{hL}U + h φ₁(hL)(2N(a) − N(U))
/// U⁺ = e^{hL}U + h[(φ₁ − 3φ₂ + 4φ₃)N(U) + (4φ₂ − 8φ₃)N(a) + (4φ₃ − φ₂)N(b)]
/// ```
pub(super) fn etdrk3(system: &KleinGordon, state: &State, t: &EtdTables) -> Result<State> {
    let h = t.h;
    let hh = 0.5 * h;
    let grid = *state.u.grid();
    let (u, v) = (state.u.coeffs(), state.v.coeffs());
    let n = u.len();
    let zero = Complex64::new(0.0, 0.0);
    let [a0, a1, a2, a3, a4] = &t.full;
    let [b0, b1, b2] = &t.half;
    let w2 = &t.omega_sq;

    let n0 = system.nonlinear_term(&state.u)?;
    let n0c = n0.coeffs();

    // Stage a (only its u component feeds the nonlinearity).
    let mut au = Vec::with_capacity(n);
    for i in 0..n {
        au.push(b0[i] * u[i] + hh * b1[i] * v[i] + hh * hh * b2[i] * n0c[i]);
    }
    let na = system.nonlinear_term(&SpectralField::new(grid, au)?)?;
    let nac = na.coeffs();

    let mut bu = Vec::with_capacity(n);
    for i in 0..n {
        let g = 2.0 * nac[i] - n0c[i];
        bu.push(a0[i] * u[i] + h * a1[i] * v[i] + h * h * a2[i] * g);
    }
    let nb = system.nonlinear_term(&SpectralField::new(grid, bu)?)?;
    let nbc = nb.coeffs();

    let mut un = vec![zero; n];
    let mut vn = vec![zero; n];
    for i in 0..n {
        let g1 = n0c[i];
        let g2 = -3.0 * n0c[i] + 4.0 * nac[i] - nbc[i];
        let g3 = 4.0 * n0c[i] - 8.0 * nac[i] + 4.0 * nbc[i];
        un[i] = a0[i] * u[i] + h * a1[i] * v[i] + h * h * (a2[i] * g1 + a3[i] * g2 + a4[i] * g3);
        vn[i] = a0[i] * v[i] - h * w2[i] * a1[i] * u[i] + h * (a1[i] * g1 + a2[i] * g2 + a3[i] * g3);
    }
    Ok(State { t: state.t + h, u: SpectralField::new(grid, un)?, v: SpectralField::new(grid, vn)? })
}

/// Multipliers of the one-step Gautschi-type method.
#[derive(Debug, Clone)]
pub struct GautschiTables {
    pub flow: LinearFlow,
    /// `sinc²(hω/2)`.
    pub filter: Vec<f64>,
}

impl GautschiTables {
    pub fn build(symbols: &SymbolTable, h: f64) -> Self {
        let filter = symbols.omega().iter().map(|w| sinc(0.5 * h * w).powi(2)).collect();
        Self { flow: LinearFlow::build(symbols, h), filter }
    }
}

/// ```text
/// u⁺ = cos(hω)u + h sinc(hω)v + (h²/2) sinc²(hω/2) f(u)
/// v⁺ = −hω² sinc(hω)u + cos(hω)v + (h/2)(cos(hω) f(u) + f(u⁺))
/// ```
pub(super) fn gautschi2(system: &KleinGordon, state: &State, t: &GautschiTables) -> Result<State> {
    let h = t.flow.h;
    let grid = *state.u.grid();
    let (mut u1, mut v1) = t.flow.apply(&state.u, &state.v)?;
    if system.problem().nonlinearity.is_zero() {
        return Ok(State { t: state.t + h, u: u1, v: v1 });
    }
    let g0 = system.nonlinear_term(&state.u)?;
    let g0c = g0.coeffs();
    for (i, c) in u1.coeffs_mut().iter_mut().enumerate() {
        *c += 0.5 * h * h * t.filter[i] * g0c[i];
    }
    let g1 = system.nonlinear_term(&u1)?;
    let g1c = g1.coeffs();
    for (i, c) in v1.coeffs_mut().iter_mut().enumerate() {
        *c += 0.5 * h * (t.flow.cos_h[i] * g0c[i] + g1c[i]);
    }
    debug_assert_eq!(*u1.grid(), grid);
    Ok(State { t: state.t + h, u: u1, v: v1 })
}

/// Kick–drift–kick splitting: half kick with `f(u)`, exact linear flow, half kick.
pub(super) fn strang2(system: &KleinGordon, state: &State, flow: &LinearFlow) -> Result<State> {
    let h = flow.h;
    if system.problem().nonlinearity.is_zero() {
        let (u, v) = flow.apply(&state.u, &state.v)?;
        return Ok(State { t: state.t + h, u, v });
    }
    let mut v_half = state.v.clone();
    v_half.axpy(0.5 * h, &system.nonlinear_term(&state.u)?)?;
    let (u, mut v) = flow.apply(&state.u, &v_half)?;
    v.axpy(0.5 * h, &system.nonlinear_term(&u)?)?;
    Ok(State { t: state.t + h, u, v })
}

fn check_step(h: f64, allow_negative: bool) -> Result<()> {
    let ok = h.is_finite() && h != 0.0 && (allow_negative || h > 0.0);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "h", reason: format!("invalid stepsize {h}") })
    }
}

fn finite(next: State) -> Result<State> {
    if next.is_finite() {
        Ok(next)
    } else {
        Err(next.non_finite())
    }
}

/// One exponential Runge–Kutta step, building the φ tables on the fly.
pub fn etdrk3_step(system: &KleinGordon, state: &State, h: f64) -> Result<State> {
    check_step(h, false)?;
    finite(etdrk3(system, state, &EtdTables::build(system.symbols(), h))?)
}

pub fn gautschi2_step(system: &KleinGordon, state: &State, h: f64) -> Result<State> {
    check_step(h, false)?;
    finite(gautschi2(system, state, &GautschiTables::build(system.symbols(), h))?)
}

/// Strang splitting step. Negative `h` runs the scheme backwards; every
/// substep is invertible, so `step(−h) ∘ step(h)` is the identity up to roundoff.
pub fn strang2_step(system: &KleinGordon, state: &State, h: f64) -> Result<State> {
    check_step(h, true)?;
    finite(strang2(system, state, &LinearFlow::build(system.symbols(), h))?)
}
