//! Fourier pseudospectral solver for the semilinear Klein–Gordon equation
//! `∂ₜₜu − Δu + ρu = f(u)` on a periodic box, with a third-order low-regularity
//! trigonometric integrator, comparison schemes and a convergence harness.

pub mod error;
pub mod harness;
pub mod integrators;
pub mod opfunc;
pub mod problems;
pub mod selftest;
pub mod spectral;
pub mod statefile;

pub use error::{Error, Result};
pub use harness::{
    efficiency_study, error_metric, fit_order, spatial_study, temporal_study, ConvergenceReport, DataSpec,
    ErrorValue, OrderFit, ProblemSpec, ReferenceMode, StudySpec,
};
pub use integrators::{evolve, EvolveOptions, KleinGordon, Method, State, Stepper, Trajectory};
pub use opfunc::CoefficientSet;
pub use problems::{Nonlinearity, Problem, RoughData};
pub use spectral::{SpectralField, SpectralSpace, SymbolTable, TorusGrid};
pub use statefile::StateFile;
