//! Convergence, spatial-accuracy and efficiency studies.

mod fit;
mod metric;
mod report;
mod study;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{KleinGordon, Method};
use crate::problems::{Nonlinearity, Problem, RoughData};
use crate::spectral::TorusGrid;

pub use fit::{fit_order, least_squares, OrderFit};
pub use metric::{error_metric, ErrorValue, REFERENCE_NORM_FLOOR};
pub use report::{ConvergenceReport, FitSummary, MethodRanking, ReferenceInfo, Row, StudyKind};
pub use study::{efficiency_study, spatial_study, temporal_study};

/// Errors below this multiple of the reference self-error are flagged and left out of fits.
pub const REFERENCE_FLOOR_FACTOR: f64 = 100.0;

/// Physical setup shared by every run of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dim: usize,
    pub n_x: usize,
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    pub nonlinearity: String,
    pub dealias: bool,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            dim: 1,
            n_x: 256,
            a: -std::f64::consts::PI,
            b: std::f64::consts::PI,
            rho: 0.0,
            nonlinearity: "sine".into(),
            dealias: false,
        }
    }
}

impl ProblemSpec {
    pub fn grid(&self, n_x: usize) -> Result<TorusGrid> {
        TorusGrid::new(self.dim, n_x, self.a, self.b)
    }

    pub fn problem(&self, n_x: usize) -> Result<Problem> {
        Problem::new(self.grid(n_x)?, self.rho, Nonlinearity::catalogue(&self.nonlinearity)?)
    }

    pub fn system(&self, n_x: usize) -> Result<KleinGordon> {
        Ok(KleinGordon::new(self.problem(n_x)?, self.dealias))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataSpec {
    /// Random data in `H^θ × H^{θ−1}`.
    Rough { theta: f64 },
    /// `u₀ = cos x₁`, `v₀ = 0`.
    Smooth,
}

impl DataSpec {
    pub fn generate(&self, seed: u64, grid: TorusGrid) -> Result<RoughData> {
        match *self {
            DataSpec::Rough { theta } => RoughData::generate(theta, seed, grid),
            DataSpec::Smooth => Ok(RoughData::smooth(grid)),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, DataSpec::Rough { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMode {
    /// Classical RK4 at a fine step (method independent).
    Rk4ref,
    /// The third-order integrator itself at a fine step.
    FineLri3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub problem: ProblemSpec,
    pub data: DataSpec,
    pub seed: u64,
    /// Seeds `seed, seed+1, …` averaged for random data.
    pub ensemble: usize,
    pub t_end: f64,
    pub methods: Vec<Method>,
    /// Stepsize ladder `h = 2^{−k}`, `k = k_min..=k_max`.
    pub k_min: u32,
    pub k_max: u32,
    /// Inclusive fit window in `k`.
    pub fit_window: (u32, u32),
    pub reference: ReferenceMode,
    pub h_ref: f64,
    /// Spatial study: fixed stepsize, resolutions and reference resolution.
    pub spatial_h: f64,
    pub spatial_n_x: Vec<usize>,
    pub spatial_n_ref: usize,
    /// Efficiency study: target error for the ranking.
    pub target_err: f64,
}

impl Default for StudySpec {
    fn default() -> Self {
        Self {
            problem: ProblemSpec::default(),
            data: DataSpec::Rough { theta: 2.0 },
            seed: 1,
            ensemble: 1,
            t_end: 1.0,
            methods: vec![Method::Lri3, Method::Etdrk3, Method::Gautschi2, Method::Strang2],
            k_min: 2,
            k_max: 8,
            fit_window: (4, 8),
            reference: ReferenceMode::Rk4ref,
            h_ref: 2f64.powi(-14),
            spatial_h: 1e-5,
            spatial_n_x: vec![32, 64, 128, 256, 512],
            spatial_n_ref: 2048,
            target_err: 1e-6,
        }
    }
}

impl StudySpec {
    pub fn stepsizes(&self) -> Vec<(u32, f64)> {
        (self.k_min..=self.k_max).map(|k| (k, 2f64.powi(-(k as i32)))).collect()
    }

    pub fn seeds(&self) -> Vec<u64> {
        let count = if self.data.is_random() { self.ensemble.max(1) } else { 1 };
        (0..count as u64).map(|i| self.seed + i).collect()
    }

    /// Checks the invariants of a temporal or efficiency study.
    pub fn validate_temporal(&self) -> Result<()> {
        self.validate_common()?;
        if self.k_min > self.k_max {
            return Err(invalid("k_min", "ladder must be strictly decreasing in h (k_min ≤ k_max)"));
        }
        if self.methods.is_empty() {
            return Err(invalid("methods", "at least one method is required"));
        }
        let h_min = 2f64.powi(-(self.k_max as i32));
        if !(self.h_ref > 0.0) || self.h_ref > h_min / 32.0 * (1.0 + 1e-12) {
            return Err(invalid("h_ref", &format!("must be ≤ (smallest h)/32 = {:e}", h_min / 32.0)));
        }
        Ok(())
    }

    pub fn validate_spatial(&self) -> Result<()> {
        self.validate_common()?;
        if !(self.spatial_h > 0.0) {
            return Err(invalid("h", "must be > 0"));
        }
        if self.spatial_n_x.len() < 3 {
            return Err(invalid("n_x_list", "need at least three resolutions"));
        }
        let largest = *self.spatial_n_x.iter().max().unwrap_or(&0);
        for &n in &self.spatial_n_x {
            self.problem.grid(n)?;
        }
        self.problem.grid(self.spatial_n_ref)?;
        if self.spatial_n_ref < 4 * largest {
            return Err(invalid("n_x_ref", "must be at least 4× the largest n_x"));
        }
        Ok(())
    }

    fn validate_common(&self) -> Result<()> {
        self.problem.problem(self.problem.n_x)?;
        if let DataSpec::Rough { theta } = self.data {
            if !(theta > 0.5) {
                return Err(invalid("theta", "must satisfy θ > 1/2"));
            }
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(invalid("T", "must be > 0"));
        }
        Ok(())
    }
}

fn invalid(name: &'static str, reason: &str) -> Error {
    Error::InvalidParameter { name, reason: reason.to_string() }
}
