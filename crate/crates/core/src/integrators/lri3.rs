//! Third-order low-regularity trigonometric integrator.
//!
//! ```text
//! u⁺ = cos(h√𝒜)u + h sinc(h√𝒜)v + h²Φ₁ f(u) + h³Ψ₁ f'(u)v + h⁴Ψ₂ F₁(u,v)
//! v⁺ = −h𝒜 sinc(h√𝒜)u + cos(h√𝒜)v + hΦ₂ f(u) + h²Φ₁ f'(u)v + h³Ψ₁ (F₁(u,v) + f'(u)f(u))
//! F₁ = f''(u)(v² − |∇u|²) + ρ f(u) − ρ f'(u)u
//! ```
//!
//! Transform budget per step: `d + 2` inverse transforms (`u`, `v`, `∂ₖu`) and
//! four forward transforms (`f`, `f'v`, `F₁`, `f'f`).

use num_complex::Complex64;

use super::{KleinGordon, State};
use crate::error::{Error, Result};
use crate::opfunc::CoefficientSet;
use crate::spectral::SpectralField;

/// One step of size `coeffs.h`.
pub fn lri3_step(system: &KleinGordon, state: &State, coeffs: &CoefficientSet) -> Result<State> {
    if coeffs.len() != system.symbols().len() {
        return Err(Error::ShapeMismatch { expected: system.symbols().len(), actual: coeffs.len() });
    }
    let next = step(system, state, coeffs)?;
    if !next.is_finite() {
        return Err(next.non_finite());
    }
    Ok(next)
}

/// Spectral images of the four nonlinear grid products.
struct Products {
    f: SpectralField,
    df_v: SpectralField,
    f1: SpectralField,
    df_f: SpectralField,
}

fn products(system: &KleinGordon, state: &State) -> Result<Products> {
    let space = system.space();
    let rho = system.problem().rho;
    let nl = &system.problem().nonlinearity;
    let u = space.to_physical(&state.u)?;
    let v = space.to_physical(&state.v)?;
    let grad2 = space.gradient_squared(&state.u)?;

    let n = u.len();
    let mut f = Vec::with_capacity(n);
    let mut df_v = Vec::with_capacity(n);
    let mut f1 = Vec::with_capacity(n);
    let mut df_f = Vec::with_capacity(n);
    for j in 0..n {
        let (fu, dfu, d2fu) = nl.eval(u[j]);
        f.push(fu);
        df_v.push(dfu * v[j]);
        f1.push(d2fu * (v[j] * v[j] - grad2[j]) + rho * fu - rho * dfu * u[j]);
        df_f.push(dfu * fu);
    }
    Ok(Products {
        f: system.project_product(&f)?,
        df_v: system.project_product(&df_v)?,
        f1: system.project_product(&f1)?,
        df_f: system.project_product(&df_f)?,
    })
}

pub(super) fn step(system: &KleinGordon, state: &State, c: &CoefficientSet) -> Result<State> {
    let h = c.h;
    let grid = *state.u.grid();
    let u = state.u.coeffs();
    let v = state.v.coeffs();
    let mut u_next = Vec::with_capacity(u.len());
    let mut v_next = Vec::with_capacity(u.len());

    if system.problem().nonlinearity.is_zero() {
        for i in 0..u.len() {
            u_next.push(c.cos_h[i] * u[i] + h * c.sinc_h[i] * v[i]);
            v_next.push(-c.omega_sinc[i] * u[i] + c.cos_h[i] * v[i]);
        }
    } else {
        let p = products(system, state)?;
        let (f, dfv, f1, dff) = (p.f.coeffs(), p.df_v.coeffs(), p.f1.coeffs(), p.df_f.coeffs());
        let (h2, h3, h4) = (h * h, h * h * h, h * h * h * h);
        for i in 0..u.len() {
            let un: Complex64 = c.cos_h[i] * u[i]
                + h * c.sinc_h[i] * v[i]
                + h2 * c.phi1[i] * f[i]
                + h3 * c.psi1[i] * dfv[i]
                + h4 * c.psi2[i] * f1[i];
            let vn: Complex64 = -c.omega_sinc[i] * u[i]
                + c.cos_h[i] * v[i]
                + h * c.phi2[i] * f[i]
                + h2 * c.phi1[i] * dfv[i]
                + h3 * c.psi1[i] * (f1[i] + dff[i]);
            u_next.push(un);
            v_next.push(vn);
        }
    }
    Ok(State {
        t: state.t + h,
        u: SpectralField::new(grid, u_next)?,
        v: SpectralField::new(grid, v_next)?,
    })
}
