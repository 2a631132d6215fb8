//! Problem definitions and initial data.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, SpectralSpace, TorusGrid};

type ScalarFn = fn(f64) -> f64;

/// User-supplied nonlinearity. `antiderivative` is only needed for the energy diagnostic.
#[derive(Clone, Copy)]
pub struct CustomNonlinearity {
    pub name: &'static str,
    pub f: ScalarFn,
    pub df: ScalarFn,
    pub d2f: ScalarFn,
    pub antiderivative: Option<ScalarFn>,
    pub globally_bounded: bool,
}

impl fmt::Debug for CustomNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomNonlinearity").field("name", &self.name).finish_non_exhaustive()
    }
}

/// Pointwise nonlinearity `f` together with `f'` and `f''`.
#[derive(Debug, Clone, Copy)]
pub enum Nonlinearity {
    Zero,
    Sine,
    /// `λu³`. Its derivatives are unbounded, so it only fits the convergence
    /// theory on bounded states.
    Cubic { lambda: f64 },
    Custom(CustomNonlinearity),
}

impl Nonlinearity {
    /// Looks up `zero`, `sine` (alias `sin`), `cubic` (λ = 1) or `cubic(λ)`.
    pub fn catalogue(name: &str) -> Result<Self> {
        let key = name.trim().to_ascii_lowercase();
        match key.as_str() {
            "zero" | "linear" => return Ok(Self::Zero),
            "sine" | "sin" => return Ok(Self::Sine),
            "cubic" => return Ok(Self::Cubic { lambda: 1.0 }),
            _ => {}
        }
        if let Some(arg) = key.strip_prefix("cubic(").and_then(|s| s.strip_suffix(')')) {
            if let Ok(lambda) = arg.trim().parse::<f64>() {
                if lambda.is_finite() {
                    return Ok(Self::Cubic { lambda });
                }
            }
        }
        Err(Error::UnknownNonlinearity(name.to_string()))
    }

    pub fn name(&self) -> String {
        match self {
            Self::Zero => "zero".into(),
            Self::Sine => "sine".into(),
            Self::Cubic { lambda } => format!("cubic({lambda})"),
            Self::Custom(c) => c.name.into(),
        }
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Sine => u.sin(),
            Self::Cubic { lambda } => lambda * u * u * u,
            Self::Custom(c) => (c.f)(u),
        }
    }

    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Sine => u.cos(),
            Self::Cubic { lambda } => 3.0 * lambda * u * u,
            Self::Custom(c) => (c.df)(u),
        }
    }

    #[inline]
    pub fn d2f(&self, u: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Sine => -u.sin(),
            Self::Cubic { lambda } => 6.0 * lambda * u,
            Self::Custom(c) => (c.d2f)(u),
        }
    }

    /// `(f, f', f'')` at `u`.
    pub fn eval(&self, u: f64) -> (f64, f64, f64) {
        match self {
            Self::Sine => {
                let (s, c) = u.sin_cos();
                (s, c, -s)
            }
            _ => (self.f(u), self.df(u), self.d2f(u)),
        }
    }

    /// `F` with `F' = f` and `F(0) = 0`, if registered.
    pub fn antiderivative(&self, u: f64) -> Option<f64> {
        match self {
            Self::Zero => Some(0.0),
            Self::Sine => Some(1.0 - u.cos()),
            Self::Cubic { lambda } => Some(0.25 * lambda * u.powi(4)),
            Self::Custom(c) => c.antiderivative.map(|g| g(u)),
        }
    }

    pub fn has_antiderivative(&self) -> bool {
        self.antiderivative(0.0).is_some()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    /// Whether `f, f', f''` are globally bounded, as the third-order error bound assumes.
    pub fn globally_bounded(&self) -> bool {
        match self {
            Self::Zero | Self::Sine => true,
            Self::Cubic { lambda } => *lambda == 0.0,
            Self::Custom(c) => c.globally_bounded,
        }
    }
}

impl Serialize for Nonlinearity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

/// `∂ₜₜu − Δu + ρu = f(u)` on a periodic box.
#[derive(Debug, Clone, Serialize)]
pub struct Problem {
    pub grid: TorusGrid,
    pub rho: f64,
    pub nonlinearity: Nonlinearity,
}

impl Problem {
    pub fn new(grid: TorusGrid, rho: f64, nonlinearity: Nonlinearity) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter { name: "rho", reason: format!("must be ≥ 0, got {rho}") });
        }
        Ok(Self { grid, rho, nonlinearity })
    }

    /// Same physics on another resolution.
    pub fn with_grid(&self, grid: TorusGrid) -> Self {
        Self { grid, ..self.clone() }
    }
}

/// Initial data `(u₀, v₀)` with `u₀ ∈ H^θ`, `v₀ ∈ H^{θ−1}`.
#[derive(Debug, Clone)]
pub struct RoughData {
    /// `f64::INFINITY` for the smooth single-mode preset.
    pub theta: f64,
    pub seed: u64,
    pub u0: SpectralField,
    pub v0: SpectralField,
    /// Normalization factors applied to the raw mode draws.
    pub u_scale: f64,
    pub v_scale: f64,
}

const STREAM_U: u64 = 0x75;
const STREAM_V: u64 = 0x76;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in `[-1,1]²` keyed by `(seed, stream, ξ)` only, so refining the
/// grid extends the data instead of reshuffling it. Returns the draw for `ξ`
/// with `Z_{−ξ} = conj(Z_ξ)` and a real draw at `ξ = 0`.
pub fn mode_draw(seed: u64, stream: u64, xi: [i64; 3]) -> Complex64 {
    let first_nonzero = xi.iter().copied().find(|&m| m != 0);
    let (canonical, flip) = match first_nonzero {
        None => return real_draw(seed, stream, xi),
        Some(m) if m > 0 => (xi, false),
        Some(_) => ([-xi[0], -xi[1], -xi[2]], true),
    };
    let z = draw(seed, stream, canonical);
    if flip {
        z.conj()
    } else {
        z
    }
}

fn mode_rng(seed: u64, stream: u64, xi: [i64; 3]) -> ChaCha8Rng {
    let key = xi
        .iter()
        .fold(splitmix(seed ^ splitmix(stream)), |acc, &m| splitmix(acc ^ (m as u64)));
    ChaCha8Rng::seed_from_u64(key)
}

fn draw(seed: u64, stream: u64, xi: [i64; 3]) -> Complex64 {
    let mut rng = mode_rng(seed, stream, xi);
    let re = rng.random_range(-1.0..=1.0);
    let im = rng.random_range(-1.0..=1.0);
    Complex64::new(re, im)
}

fn real_draw(seed: u64, stream: u64, xi: [i64; 3]) -> Complex64 {
    let mut rng = mode_rng(seed, stream, xi);
    Complex64::new(rng.random_range(-1.0..=1.0), 0.0)
}

fn weighted_field(grid: TorusGrid, seed: u64, stream: u64, exponent: f64) -> SpectralField {
    let space_k2 = |flat: usize| -> f64 {
        let slots = grid.unflatten(flat);
        (0..grid.dim()).map(|ax| grid.wavenumber(slots[ax]).powi(2)).sum()
    };
    let mut field = SpectralField::zeros(grid);
    for flat in 0..grid.len() {
        if grid.touches_nyquist(flat) {
            continue;
        }
        let z = mode_draw(seed, stream, grid.modes(flat));
        field.coeffs_mut()[flat] = z * (1.0 + space_k2(flat)).powf(-0.5 * exponent);
    }
    field
}

impl RoughData {
    /// Random data with `û₀(ξ) = Z_ξ (1+|ξ|²)^{−θ/2}` and
    /// `v̂₀(ξ) = W_ξ (1+|ξ|²)^{−(θ−1)/2}`, scaled to `‖u₀‖_{H^θ} = ‖v₀‖_{H^{θ−1}} = 1`
    /// on this grid. Modes touching the Nyquist index are left at zero.
    pub fn generate(theta: f64, seed: u64, grid: TorusGrid) -> Result<Self> {
        if !(theta > 0.5) || !theta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: format!("must satisfy θ > 1/2, got {theta}"),
            });
        }
        let space = SpectralSpace::new(grid);
        let mut u0 = weighted_field(grid, seed, STREAM_U, theta);
        let mut v0 = weighted_field(grid, seed, STREAM_V, theta - 1.0);
        let u_scale = 1.0 / space.sobolev_norm(&u0, theta);
        let v_scale = 1.0 / space.sobolev_norm(&v0, (theta - 1.0).max(0.0));
        u0.scale(u_scale);
        v0.scale(v_scale);
        Ok(Self { theta, seed, u0, v0, u_scale, v_scale })
    }

    /// `u₀ = cos(2πx₁/L)` (that is `û₀(±1) = 1/2` along the first axis), `v₀ = 0`.
    pub fn smooth(grid: TorusGrid) -> Self {
        let mut u0 = SpectralField::zeros(grid);
        u0.set_mode([1, 0, 0], Complex64::new(0.5, 0.0));
        u0.set_mode([-1, 0, 0], Complex64::new(0.5, 0.0));
        Self {
            theta: f64::INFINITY,
            seed: 0,
            u0,
            v0: SpectralField::zeros(grid),
            u_scale: 1.0,
            v_scale: 1.0,
        }
    }

    /// Spectral projection onto a coarser grid over the same box.
    pub fn project(&self, coarse: TorusGrid) -> Result<Self> {
        Ok(Self { u0: self.u0.project(coarse)?, v0: self.v0.project(coarse)?, ..self.clone() })
    }

    pub fn grid(&self) -> &TorusGrid {
        self.u0.grid()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn catalogue_entries() {
        let sine = Nonlinearity::catalogue("sine").unwrap();
        assert_eq!(sine.eval(0.0), (0.0, 1.0, -0.0));
        let (f, df, d2f) = sine.eval(PI / 2.0);
        assert!((f - 1.0).abs() < 1e-16 && df.abs() < 1e-16 && (d2f + 1.0).abs() < 1e-16);
        let cubic = Nonlinearity::catalogue("cubic(1)").unwrap();
        assert_eq!(cubic.eval(2.0), (8.0, 12.0, 12.0));
        assert!(!cubic.globally_bounded());
        assert!(sine.globally_bounded());
        assert_eq!(Nonlinearity::catalogue("zero").unwrap().eval(3.0), (0.0, 0.0, 0.0));
        assert!(matches!(Nonlinearity::catalogue("cubic(2.5)"), Ok(Nonlinearity::Cubic { lambda }) if lambda == 2.5));
        assert!(matches!(Nonlinearity::catalogue("tanh"), Err(Error::UnknownNonlinearity(_))));
        assert!(Nonlinearity::catalogue("cubic(x)").is_err());
    }

    #[test]
    fn catalogue_derivatives_match_finite_differences() {
        let eps = 1e-6;
        for nl in [
            Nonlinearity::Zero,
            Nonlinearity::Sine,
            Nonlinearity::Cubic { lambda: 1.0 },
            Nonlinearity::Cubic { lambda: -0.5 },
        ] {
            for i in 0..=40 {
                let u = -2.0 + 0.1 * i as f64;
                let fd1 = (nl.f(u + eps) - nl.f(u - eps)) / (2.0 * eps);
                let fd2 = (nl.df(u + eps) - nl.df(u - eps)) / (2.0 * eps);
                assert!((nl.df(u) - fd1).abs() <= 1e-8, "{} f' at {u}", nl.name());
                assert!((nl.d2f(u) - fd2).abs() <= 1e-8, "{} f'' at {u}", nl.name());
                if let Some(big_f) = nl.antiderivative(u) {
                    let fd0 = (nl.antiderivative(u + eps).unwrap() - nl.antiderivative(u - eps).unwrap())
                        / (2.0 * eps);
                    assert!((nl.f(u) - fd0).abs() <= 1e-8);
                    let _ = big_f;
                }
            }
            assert_eq!(nl.f(0.0), 0.0);
        }
    }

    #[test]
    fn rough_data_is_normalized_and_real() {
        let grid = TorusGrid::periodic(1, 64).unwrap();
        let space = SpectralSpace::new(grid);
        let data = RoughData::generate(2.0, 7, grid).unwrap();
        assert!((space.sobolev_norm(&data.u0, 2.0) - 1.0).abs() < 1e-14);
        assert!((space.sobolev_norm(&data.v0, 1.0) - 1.0).abs() < 1e-14);
        assert!(data.u0.hermitian_residue() < 1e-16);
        assert!(data.v0.hermitian_residue() < 1e-16);
        space.to_physical(&data.u0).unwrap();
    }

    #[test]
    fn rough_data_rejects_low_theta() {
        let grid = TorusGrid::periodic(1, 16).unwrap();
        assert!(RoughData::generate(0.5, 1, grid).is_err());
        assert!(RoughData::generate(0.4, 1, grid).is_err());
    }

    #[test]
    fn rough_data_is_deterministic() {
        let grid = TorusGrid::periodic(2, 16).unwrap();
        let a = RoughData::generate(3.0, 11, grid).unwrap();
        let b = RoughData::generate(3.0, 11, grid).unwrap();
        let c = RoughData::generate(3.0, 12, grid).unwrap();
        assert_eq!(a.u0, b.u0);
        assert_eq!(a.v0, b.v0);
        assert_ne!(a.u0, c.u0);
    }

    #[test]
    fn smooth_preset_is_cosine() {
        let grid = TorusGrid::periodic(1, 16).unwrap();
        let space = SpectralSpace::new(grid);
        let data = RoughData::smooth(grid);
        let vals = space.to_physical(&data.u0).unwrap();
        for (j, v) in vals.iter().enumerate() {
            assert!((v - grid.node(j).cos()).abs() < 1e-15);
        }
        assert_eq!(data.v0.max_abs(), 0.0);
    }

    #[test]
    fn mode_draws_are_hermitian() {
        let z = mode_draw(3, STREAM_U, [2, -1, 0]);
        assert_eq!(mode_draw(3, STREAM_U, [-2, 1, 0]), z.conj());
        assert_eq!(mode_draw(3, STREAM_U, [0, 0, 0]).im, 0.0);
        assert!(z.re.abs() <= 1.0 && z.im.abs() <= 1.0);
    }
}
