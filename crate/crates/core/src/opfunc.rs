//! Scalar coefficient functions of the trigonometric integrators and their
//! per-mode tabulation.
//!
//! Every function has a removable singularity at `m = 0`. Below a per-function
//! threshold the direct formula cancels catastrophically and an even Taylor
//! series is used instead. Term counts keep the series truncation error under
//! `1e-16` relative at the threshold:
//!
//! | function | threshold | series terms |
//! |----------|-----------|--------------|
//! | `sinc`   | `1e-4`    | 4            |
//! | `psi1`   | `1e-2`    | 5            |
//! | `psi2`   | `0.5`     | 8            |

use serde::Serialize;

use crate::spectral::SymbolTable;

pub const SINC_THRESHOLD: f64 = 1e-4;
pub const PSI1_THRESHOLD: f64 = 1e-2;
pub const PSI2_THRESHOLD: f64 = 0.5;

/// Threshold below which [`trig_phi`] sums its power series.
pub const TRIG_PHI_THRESHOLD: f64 = 1.0;

const SINC_SERIES: [f64; 4] = [1.0, -1.0 / 6.0, 1.0 / 120.0, -1.0 / 5040.0];

// (-1)^{j+1} j / (2j+1)!, j = 1..5
const PSI1_SERIES: [f64; 5] =
    [1.0 / 6.0, -1.0 / 60.0, 1.0 / 1680.0, -1.0 / 90720.0, 1.0 / 7_983_360.0];

// (-1)^k (k-1) / (2k)!, k = 2..9
const PSI2_SERIES: [f64; 8] = [
    1.0 / 24.0,
    -1.0 / 360.0,
    1.0 / 13440.0,
    -1.0 / 907_200.0,
    1.0 / 95_800_320.0,
    -1.0 / 14_529_715_200.0,
    1.0 / 2_988_969_984_000.0,
    -1.0 / 800_296_713_216_000.0,
];

/// `Σ c_j x^j` by Horner, with `x = m²`.
fn even_series(coeffs: &[f64], m2: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * m2 + c)
}

/// `sin(m)/m`, with `sinc(0) = 1`.
pub fn sinc(m: f64) -> f64 {
    if m.abs() < SINC_THRESHOLD {
        even_series(&SINC_SERIES, m * m)
    } else {
        m.sin() / m
    }
}

/// `Φ₁(m) = sinc(m)/2`.
pub fn phi1(m: f64) -> f64 {
    0.5 * sinc(m)
}

/// `Φ₂(m) = (cos m + sinc m)/2`.
pub fn phi2(m: f64) -> f64 {
    0.5 * (m.cos() + sinc(m))
}

/// `Ψ₁(m) = (sinc m − cos m)/(2m²)`, `Ψ₁(0) = 1/6`.
pub fn psi1(m: f64) -> f64 {
    if m < PSI1_THRESHOLD {
        even_series(&PSI1_SERIES, m * m)
    } else {
        (sinc(m) - m.cos()) / (2.0 * m * m)
    }
}

/// `Ψ₂(m) = (1 − cos m − (m/2) sin m)/m⁴`, `Ψ₂(0) = 1/24`.
pub fn psi2(m: f64) -> f64 {
    psi2_with_threshold(m, PSI2_THRESHOLD)
}

/// [`psi2`] with an explicit branch threshold. Exposed so the self-test can
/// demonstrate that a badly chosen threshold is caught.
pub fn psi2_with_threshold(m: f64, threshold: f64) -> f64 {
    if m < threshold {
        even_series(&PSI2_SERIES, m * m)
    } else {
        let m2 = m * m;
        (1.0 - m.cos() - 0.5 * m * m.sin()) / (m2 * m2)
    }
}

/// Series and direct branch of a coefficient function, for continuity checks.
pub fn branches(name: &str, m: f64) -> Option<(f64, f64)> {
    let m2 = m * m;
    match name {
        "sinc" => Some((even_series(&SINC_SERIES, m2), m.sin() / m)),
        "psi1" => Some((even_series(&PSI1_SERIES, m2), (m.sin() / m - m.cos()) / (2.0 * m2))),
        "psi2" => Some((
            even_series(&PSI2_SERIES, m2),
            (1.0 - m.cos() - 0.5 * m * m.sin()) / (m2 * m2),
        )),
        _ => None,
    }
}

/// `a_k(m) = Σ_j (−m²)^j/(2j+k)!`.
///
/// For the first-order Klein–Gordon system the exponential-integrator functions
/// satisfy `φ_k(Z) = a_k(m) I + a_{k+1}(m) Z`, since `Z² = −m² I`. So `a_0 = cos`,
/// `a_1 = sinc`, and `a_{k+2} = (1/k! − a_k)/m²`. Supports `k ≤ 5`.
pub fn trig_phi(k: usize, m: f64) -> f64 {
    assert!(k <= 5, "trig_phi supports k ≤ 5");
    let m = m.abs();
    if m < TRIG_PHI_THRESHOLD {
        let x = -m * m;
        let mut term = 1.0 / factorial(k);
        let mut sum = term;
        for j in 1..14 {
            term *= x / (((2 * j + k - 1) * (2 * j + k)) as f64);
            sum += term;
        }
        return sum;
    }
    let m2 = m * m;
    let mut a = [0.0; 6];
    a[0] = m.cos();
    a[1] = m.sin() / m;
    for j in 2..=k {
        a[j] = (1.0 / factorial(j - 2) - a[j - 2]) / m2;
    }
    a[k]
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Per-mode multipliers of the third-order low-regularity integrator for one stepsize.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientSet {
    pub h: f64,
    pub cos_h: Vec<f64>,
    pub sinc_h: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub psi1: Vec<f64>,
    pub psi2: Vec<f64>,
    /// Symbol of `𝒜 h sinc(h√𝒜)`: `ω² h sinc(hω)`.
    pub omega_sinc: Vec<f64>,
}

impl CoefficientSet {
    pub fn build(symbols: &SymbolTable, h: f64) -> Self {
        assert!(h > 0.0 && h.is_finite(), "stepsize must be positive");
        let n = symbols.len();
        let mut set = Self {
            h,
            cos_h: Vec::with_capacity(n),
            sinc_h: Vec::with_capacity(n),
            phi1: Vec::with_capacity(n),
            phi2: Vec::with_capacity(n),
            psi1: Vec::with_capacity(n),
            psi2: Vec::with_capacity(n),
            omega_sinc: Vec::with_capacity(n),
        };
        for &w in symbols.omega() {
            let m = h * w;
            let s = sinc(m);
            set.cos_h.push(m.cos());
            set.sinc_h.push(s);
            set.phi1.push(0.5 * s);
            set.phi2.push(phi2(m));
            set.psi1.push(psi1(m));
            set.psi2.push(psi2(m));
            set.omega_sinc.push(w * w * h * s);
        }
        set
    }

    pub fn len(&self) -> usize {
        self.cos_h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cos_h.is_empty()
    }

    /// Checks finiteness and the uniform bounds on `Φ₁, Φ₂, mΨ₁, m²Ψ₂`.
    pub fn check_bounds(&self, symbols: &SymbolTable) -> Result<(), String> {
        for (i, &w) in symbols.omega().iter().enumerate() {
            let m = self.h * w;
            let row = [
                self.cos_h[i],
                self.sinc_h[i],
                self.phi1[i],
                self.phi2[i],
                self.psi1[i],
                self.psi2[i],
                self.omega_sinc[i],
            ];
            if row.iter().any(|v| !v.is_finite()) {
                return Err(format!("non-finite coefficient at mode {i}"));
            }
            let tol = 1e-12;
            if self.phi1[i].abs() > 0.5 + tol
                || self.phi2[i].abs() > 1.0 + tol
                || (m * self.psi1[i]).abs() > 1.0
                || (m * m * self.psi2[i]).abs() > 1.0
            {
                return Err(format!("coefficient bound violated at mode {i} (m = {m})"));
            }
        }
        Ok(())
    }
}
