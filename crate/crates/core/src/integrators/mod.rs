//! Time steppers for the spectrally discretized Klein–Gordon equation.
//!
//! All steppers work on [`State`]s held in Fourier space. Nonlinear terms are
//! evaluated pointwise on the collocation grid and transformed back once per
//! product.

mod baselines;
mod evolve;
mod lri3;
mod reference;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opfunc::CoefficientSet;
use crate::problems::Problem;
use crate::spectral::{SpectralField, SpectralSpace, SymbolTable};

pub use baselines::{
    etdrk3_step, gautschi2_step, linear_solution, strang2_step, EtdTables, GautschiTables, LinearFlow,
};
pub use evolve::{energy, evolve, EvolveOptions, Sample, Trajectory};
pub use lri3::lri3_step;
pub use reference::{rk4_stability_bound, rk4ref_evolve, RK4_STABILITY_LIMIT};

/// Numerical solution `(u, v) ≈ (u, ∂ₜu)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: SpectralField,
    pub v: SpectralField,
}

impl State {
    pub fn new(t: f64, u: SpectralField, v: SpectralField) -> Result<Self> {
        u.ensure_same_grid(&v)?;
        Ok(Self { t, u, v })
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    fn non_finite(&self) -> Error {
        Error::BlowUp { step: 0, t: self.t, history: vec![self.u.max_abs()] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lri3,
    Etdrk3,
    Gautschi2,
    Strang2,
    Rk4ref,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::Lri3, Method::Etdrk3, Method::Gautschi2, Method::Strang2, Method::Rk4ref];

    /// Classical order on smooth data.
    pub fn order(self) -> u32 {
        match self {
            Method::Lri3 | Method::Etdrk3 => 3,
            Method::Gautschi2 | Method::Strang2 => 2,
            Method::Rk4ref => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Lri3 => "lri3",
            Method::Etdrk3 => "etdrk3",
            Method::Gautschi2 => "gautschi2",
            Method::Strang2 => "strang2",
            Method::Rk4ref => "rk4ref",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown method `{s}` (expected lri3, etdrk3, gautschi2, strang2 or rk4ref)"))
    }
}

/// The semi-discrete system: grid, operator symbols and nonlinearity.
///
/// Immutable once built and `Sync`, so one instance can serve a whole study grid.
#[derive(Debug, Clone)]
pub struct KleinGordon {
    space: SpectralSpace,
    symbols: SymbolTable,
    problem: Problem,
    dealias: bool,
}

impl KleinGordon {
    pub fn new(problem: Problem, dealias: bool) -> Self {
        let space = SpectralSpace::new(problem.grid);
        let symbols = space.symbols(problem.rho);
        Self { space, symbols, problem, dealias }
    }

    pub fn space(&self) -> &SpectralSpace {
        &self.space
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    pub fn initial_state(&self, u0: SpectralField, v0: SpectralField) -> Result<State> {
        if *u0.grid() != self.problem.grid {
            return Err(Error::GridMismatch);
        }
        State::new(0.0, u0, v0)
    }

    /// Grid values back to Fourier space, with the optional 2/3 truncation.
    pub(crate) fn project_product(&self, values: &[f64]) -> Result<SpectralField> {
        let mut field = self.space.to_spectral(values)?;
        if self.dealias {
            self.space.dealias(&mut field);
        }
        Ok(field)
    }

    /// Interpolant of `f(u)`.
    pub fn nonlinear_term(&self, u: &SpectralField) -> Result<SpectralField> {
        if self.problem.nonlinearity.is_zero() {
            return Ok(SpectralField::zeros(*u.grid()));
        }
        let mut values = self.space.to_physical(u)?;
        let nl = &self.problem.nonlinearity;
        values.iter_mut().for_each(|x| *x = nl.f(*x));
        self.project_product(&values)
    }
}

/// Precomputed per-mode tables for one `(method, h)` pair.
#[derive(Debug, Clone)]
pub enum StepTables {
    Lri3(CoefficientSet),
    Etdrk3(EtdTables),
    Gautschi2(GautschiTables),
    Strang2(LinearFlow),
    /// Explicit RK4 needs no tables.
    Rk4ref,
}

/// A method bound to a stepsize, with its multipliers built once.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub method: Method,
    pub h: f64,
    tables: StepTables,
}

impl Stepper {
    pub fn new(system: &KleinGordon, method: Method, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter { name: "h", reason: format!("must be > 0, got {h}") });
        }
        let symbols = system.symbols();
        let tables = match method {
            Method::Lri3 => StepTables::Lri3(CoefficientSet::build(symbols, h)),
            Method::Etdrk3 => StepTables::Etdrk3(EtdTables::build(symbols, h)),
            Method::Gautschi2 => StepTables::Gautschi2(GautschiTables::build(symbols, h)),
            Method::Strang2 => StepTables::Strang2(LinearFlow::build(symbols, h)),
            Method::Rk4ref => {
                let bound = rk4_stability_bound(symbols);
                if h > bound {
                    return Err(Error::Unstable { h, bound });
                }
                StepTables::Rk4ref
            }
        };
        Ok(Self { method, h, tables })
    }

    pub fn tables(&self) -> &StepTables {
        &self.tables
    }

    /// Advances by one step of size `h`.
    pub fn step(&self, system: &KleinGordon, state: &State) -> Result<State> {
        let next = match &self.tables {
            StepTables::Lri3(c) => lri3::step(system, state, c)?,
            StepTables::Etdrk3(t) => baselines::etdrk3(system, state, t)?,
            StepTables::Gautschi2(t) => baselines::gautschi2(system, state, t)?,
            StepTables::Strang2(t) => baselines::strang2(system, state, t)?,
            StepTables::Rk4ref => reference::rk4_step(system, state, self.h)?,
        };
        if !next.is_finite() {
            return Err(next.non_finite());
        }
        Ok(next)
    }
}

/// Step configuration as read from a study or run spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub method: Method,
    pub h: f64,
    pub dealias: bool,
}

/// Steppers keyed by `(method, h)` for one [`KleinGordon`] system.
#[derive(Debug, Default)]
pub struct StepperCache {
    entries: HashMap<(Method, u64), Arc<Stepper>>,
}

impl StepperCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, system: &KleinGordon, method: Method, h: f64) -> Result<Arc<Stepper>> {
        let key = (method, h.to_bits());
        if let Some(s) = self.entries.get(&key) {
            return Ok(Arc::clone(s));
        }
        let stepper = Arc::new(Stepper::new(system, method, h)?);
        self.entries.insert(key, Arc::clone(&stepper));
        Ok(stepper)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Nonlinearity, RoughData};
    use crate::spectral::TorusGrid;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("rk45".parse::<Method>().is_err());
    }

    #[test]
    fn cache_reuses_tables() {
        let grid = TorusGrid::periodic(1, 16).unwrap();
        let sys = KleinGordon::new(Problem::new(grid, 0.0, Nonlinearity::Sine).unwrap(), false);
        let mut cache = StepperCache::new();
        let a = cache.get(&sys, Method::Lri3, 0.1).unwrap();
        let b = cache.get(&sys, Method::Lri3, 0.1).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        cache.get(&sys, Method::Etdrk3, 0.1).unwrap();
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn stepper_rejects_bad_h() {
        let grid = TorusGrid::periodic(1, 64).unwrap();
        let sys = KleinGordon::new(Problem::new(grid, 0.0, Nonlinearity::Sine).unwrap(), false);
        assert!(Stepper::new(&sys, Method::Lri3, 0.0).is_err());
        assert!(Stepper::new(&sys, Method::Lri3, -1.0).is_err());
        assert!(matches!(Stepper::new(&sys, Method::Rk4ref, 0.5), Err(Error::Unstable { .. })));
    }

    #[test]
    fn blow_up_is_reported() {
        let grid = TorusGrid::periodic(1, 16).unwrap();
        let sys = KleinGordon::new(Problem::new(grid, 0.0, Nonlinearity::Sine).unwrap(), false);
        let data = RoughData::generate(2.0, 1, grid).unwrap();
        let mut u = data.u0.clone();
        u.coeffs_mut()[1].re = f64::NAN;
        let state = State::new(0.0, u, data.v0).unwrap();
        let stepper = Stepper::new(&sys, Method::Strang2, 0.1).unwrap();
        assert!(stepper.step(&sys, &state).is_err());
    }
}
