//! Fourier collocation on the periodic box `[a, b)^d`.
//!
//! Coefficients follow the mean-preserving convention
//! `û(ξ) = L^{-d} ∫ e^{-i x·ξ} u(x) dx`, with `ξ` the physical wavenumber
//! `2πk/L`. The DFT works relative to the left endpoint `a`, so coefficients
//! carry the phase `e^{-iξ·a}` when moving between the two conventions.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on the imaginary residue of an inverse transform.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Uniform periodic grid on `[a, b)^d` with `n` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    a: f64,
    b: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize, a: f64, b: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n_x must be a power of two ≥ 4, got {n}")));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidGrid(format!("need finite a < b, got [{a}, {b}]")));
        }
        Ok(Self { dim, n, a, b })
    }

    /// The box `(-π, π)^d`, where integer mode indices equal physical wavenumbers.
    pub fn periodic(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, -PI, PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Total number of nodes (and of Fourier modes), `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }

    /// Quadrature weight of one node, `(L/n)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `L^d`.
    pub fn volume(&self) -> f64 {
        self.length().powi(self.dim as i32)
    }

    /// Coordinate of node `j` along one axis.
    pub fn node(&self, j: usize) -> f64 {
        self.a + j as f64 * self.spacing()
    }

    /// Signed mode index in `{-n/2, …, n/2 - 1}` for DFT slot `k`.
    pub fn mode_index(&self, k: usize) -> i64 {
        let n = self.n as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// DFT slot for signed mode index `m`, if representable on this grid.
    pub fn slot(&self, m: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if m < -half || m >= half {
            None
        } else {
            Some(m.rem_euclid(self.n as i64) as usize)
        }
    }

    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * PI * self.mode_index(k) as f64 / self.length()
    }

    /// Per-axis slots of a flat row-major index (unused axes are zero).
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rest % self.n;
            rest /= self.n;
        }
        out
    }

    pub fn flatten(&self, slots: [usize; 3]) -> usize {
        (0..self.dim).fold(0, |acc, axis| acc * self.n + slots[axis])
    }

    /// Signed mode indices of a flat index.
    pub fn modes(&self, flat: usize) -> [i64; 3] {
        let slots = self.unflatten(flat);
        let mut out = [0; 3];
        for axis in 0..self.dim {
            out[axis] = self.mode_index(slots[axis]);
        }
        out
    }

    /// Flat index of the mode `-ξ`, aliased back onto the grid.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let mut slots = self.unflatten(flat);
        for s in slots.iter_mut().take(self.dim) {
            *s = (self.n - *s) % self.n;
        }
        self.flatten(slots)
    }

    /// True if some component of the mode is the unpaired `-n/2`.
    pub fn touches_nyquist(&self, flat: usize) -> bool {
        let slots = self.unflatten(flat);
        slots[..self.dim].contains(&(self.n / 2))
    }

    /// Physical coordinates of node `flat`.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let slots = self.unflatten(flat);
        let mut out = [0.0; 3];
        for axis in 0..self.dim {
            out[axis] = self.node(slots[axis]);
        }
        out
    }

    /// `e^{-iξ·a}`: converts DFT (left-endpoint) coefficients into the absolute convention.
    fn phase(&self, flat: usize) -> Complex64 {
        let slots = self.unflatten(flat);
        let arg: f64 = (0..self.dim).map(|axis| self.wavenumber(slots[axis]) * self.a).sum();
        Complex64::from_polar(1.0, -arg)
    }
}

/// Truncated Fourier coefficients of a real function on a [`TorusGrid`].
///
/// Indexed in DFT order along each axis, row-major over axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), actual: coeffs.len() });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of the signed mode `ξ` (only the first `d` entries are read).
    pub fn mode(&self, xi: [i64; 3]) -> Option<Complex64> {
        let mut slots = [0; 3];
        for axis in 0..self.grid.dim() {
            slots[axis] = self.grid.slot(xi[axis])?;
        }
        Some(self.coeffs[self.grid.flatten(slots)])
    }

    pub fn set_mode(&mut self, xi: [i64; 3], value: Complex64) -> Option<()> {
        let mut slots = [0; 3];
        for axis in 0..self.grid.dim() {
            slots[axis] = self.grid.slot(xi[axis])?;
        }
        let idx = self.grid.flatten(slots);
        self.coeffs[idx] = value;
        Some(())
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= alpha);
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) -> Result<()> {
        self.ensure_same_grid(other)?;
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += alpha * o;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from `û(-ξ) = conj(û(ξ))`, measured in the DFT
    /// convention so that self-paired Nyquist modes are checked for realness.
    pub fn hermitian_residue(&self) -> f64 {
        let grid = &self.grid;
        (0..grid.len())
            .map(|i| {
                let j = grid.conjugate_index(i);
                let ci = self.coeffs[i] * grid.phase(i).conj();
                let cj = self.coeffs[j] * grid.phase(j).conj();
                (ci - cj.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Restriction to a coarser grid over the same box: keeps modes representable
    /// on `coarse`, and drops coarse Nyquist modes so the result stays real.
    pub fn project(&self, coarse: TorusGrid) -> Result<Self> {
        if coarse.dim() != self.grid.dim()
            || coarse.a() != self.grid.a()
            || coarse.b() != self.grid.b()
            || coarse.n() > self.grid.n()
        {
            return Err(Error::GridMismatch);
        }
        let mut out = Self::zeros(coarse);
        for flat in 0..coarse.len() {
            if coarse.touches_nyquist(flat) {
                continue;
            }
            if let Some(c) = self.mode(coarse.modes(flat)) {
                out.coeffs[flat] = c;
            }
        }
        Ok(out)
    }

    /// Zero-pads onto a finer grid over the same box.
    pub fn prolong(&self, fine: TorusGrid) -> Result<Self> {
        if fine.dim() != self.grid.dim()
            || fine.a() != self.grid.a()
            || fine.b() != self.grid.b()
            || fine.n() < self.grid.n()
        {
            return Err(Error::GridMismatch);
        }
        let mut out = Self::zeros(fine);
        for flat in 0..self.grid.len() {
            if self.grid.touches_nyquist(flat) {
                continue;
            }
            out.set_mode(self.grid.modes(flat), self.coeffs[flat]);
        }
        Ok(out)
    }
}

/// FFT plans and wavenumber tables for one grid.
///
/// Immutable after construction; share it behind an `Arc` across threads.
#[derive(Clone)]
pub struct SpectralSpace {
    grid: TorusGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `e^{-iξ·a}` per mode.
    phase: Vec<Complex64>,
    /// Physical wavenumber per slot along one axis.
    axis_wavenumber: Vec<f64>,
    /// `|ξ|²` per mode.
    wavenumber_sq: Vec<f64>,
}

thread_local! {
    /// FFT scratch space reused across transforms on this thread.
    static SCRATCH: RefCell<Vec<Complex64>> = const { RefCell::new(Vec::new()) };
}

impl std::fmt::Debug for SpectralSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralSpace").field("grid", &self.grid).finish_non_exhaustive()
    }
}

impl SpectralSpace {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n());
        let inverse = planner.plan_fft_inverse(grid.n());
        let axis_wavenumber: Vec<f64> = (0..grid.n()).map(|k| grid.wavenumber(k)).collect();
        let phase = (0..grid.len()).map(|i| grid.phase(i)).collect();
        let wavenumber_sq = (0..grid.len())
            .map(|i| {
                let slots = grid.unflatten(i);
                (0..grid.dim()).map(|ax| axis_wavenumber[slots[ax]].powi(2)).sum()
            })
            .collect();
        Self { grid, forward, inverse, phase, axis_wavenumber, wavenumber_sq }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// `|ξ|²` per mode, physical wavenumbers.
    pub fn wavenumber_sq(&self) -> &[f64] {
        &self.wavenumber_sq
    }

    pub fn symbols(&self, rho: f64) -> SymbolTable {
        SymbolTable::new(self, rho)
    }

    fn check_field(&self, field: &SpectralField) -> Result<()> {
        if *field.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn transform_axes(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        SCRATCH.with(|cell| {
            let mut scratch = cell.borrow_mut();
            let len = plan.get_inplace_scratch_len();
            if scratch.len() < len {
                scratch.resize(len, Complex64::new(0.0, 0.0));
            }
            self.transform_axes_with(buf, plan, &mut scratch[..len]);
        });
    }

    fn transform_axes_with(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>, scratch: &mut [Complex64]) {
        let n = self.grid.n();
        let dim = self.grid.dim();
        // Last axis is contiguous: one batched call covers every line.
        plan.process_with_scratch(buf, scratch);
        if dim == 1 {
            return;
        }
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..dim - 1 {
            let stride = n.pow((dim - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..buf.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, l) in line.iter_mut().enumerate() {
                        *l = buf[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, scratch);
                    for (j, l) in line.iter().enumerate() {
                        buf[base + j * stride] = *l;
                    }
                }
            }
        }
    }

    /// Grid samples to Fourier coefficients; `û(0)` is the mean.
    pub fn to_spectral(&self, values: &[f64]) -> Result<SpectralField> {
        if values.len() != self.grid.len() {
            return Err(Error::ShapeMismatch { expected: self.grid.len(), actual: values.len() });
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform_axes(&mut buf, &self.forward);
        let norm = 1.0 / self.grid.len() as f64;
        for (c, p) in buf.iter_mut().zip(&self.phase) {
            *c *= p * norm;
        }
        Ok(SpectralField { grid: self.grid, coeffs: buf })
    }

    /// Fourier coefficients to real grid samples.
    ///
    /// Fails if the inverse transform carries an imaginary part larger than
    /// [`HERMITIAN_TOLERANCE`] relative to the largest sample.
    pub fn to_physical(&self, field: &SpectralField) -> Result<Vec<f64>> {
        self.check_field(field)?;
        let mut buf: Vec<Complex64> =
            field.coeffs.iter().zip(&self.phase).map(|(c, p)| c * p.conj()).collect();
        self.transform_axes(&mut buf, &self.inverse);
        let scale = buf.iter().map(|c| c.re.abs().max(c.im.abs())).fold(0.0, f64::max);
        let residue = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if residue > HERMITIAN_TOLERANCE * scale.max(f64::MIN_POSITIVE) && residue > 1e-300 {
            return Err(Error::HermitianViolation { residue, tolerance: HERMITIAN_TOLERANCE * scale });
        }
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    /// `‖f‖_{H^ν} = (L^d Σ (1+|ξ|²)^ν |f̂(ξ)|²)^{1/2}`.
    pub fn sobolev_norm(&self, field: &SpectralField, nu: f64) -> f64 {
        debug_assert!(nu >= 0.0);
        let sum: f64 = if nu == 0.0 {
            field.coeffs.iter().map(|c| c.norm_sqr()).sum()
        } else {
            field
                .coeffs
                .iter()
                .zip(&self.wavenumber_sq)
                .map(|(c, k2)| (1.0 + k2).powf(nu) * c.norm_sqr())
                .sum()
        };
        (self.grid.volume() * sum).sqrt()
    }

    /// Diagonal multiplier `û(ξ) ↦ σ(ξ) û(ξ)`.
    pub fn apply_symbol(&self, field: &SpectralField, sigma: &[f64]) -> Result<SpectralField> {
        self.check_field(field)?;
        if sigma.len() != field.coeffs.len() {
            return Err(Error::ShapeMismatch { expected: field.coeffs.len(), actual: sigma.len() });
        }
        let coeffs = field.coeffs.iter().zip(sigma).map(|(c, s)| c * s).collect();
        Ok(SpectralField { grid: self.grid, coeffs })
    }

    /// `∂u/∂x_axis` with the unpaired Nyquist component zeroed.
    pub fn derivative(&self, field: &SpectralField, axis: usize) -> Result<SpectralField> {
        self.check_field(field)?;
        assert!(axis < self.grid.dim(), "axis {axis} out of range");
        let n = self.grid.n();
        let mut out = field.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let slot = self.grid.unflatten(i)[axis];
            if slot == n / 2 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c *= Complex64::new(0.0, self.axis_wavenumber[slot]);
            }
        }
        Ok(out)
    }

    /// Pointwise `Σ_k (∂_k u)²` on the grid.
    pub fn gradient_squared(&self, field: &SpectralField) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.grid.len()];
        for axis in 0..self.grid.dim() {
            let d = self.to_physical(&self.derivative(field, axis)?)?;
            for (o, g) in out.iter_mut().zip(d) {
                *o += g * g;
            }
        }
        Ok(out)
    }

    /// 2/3-rule truncation: zeroes every mode with some `|ξ_k| > n/3`.
    pub fn dealias(&self, field: &mut SpectralField) {
        let cutoff = (self.grid.n() / 3) as i64;
        for (i, c) in field.coeffs.iter_mut().enumerate() {
            let modes = self.grid.modes(i);
            if modes[..self.grid.dim()].iter().any(|m| m.abs() > cutoff) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Exact `∫ u w dx` for trigonometric polynomials, via Parseval.
    pub fn inner_product(&self, u: &SpectralField, w: &SpectralField) -> f64 {
        let sum: f64 = u.coeffs.iter().zip(&w.coeffs).map(|(a, b)| (a * b.conj()).re).sum();
        self.grid.volume() * sum
    }

    /// Grid quadrature `(L/n)^d Σ_j w_j`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.grid.cell_volume() * values.iter().sum::<f64>()
    }
}

/// Per-mode frequencies `ω_ξ = √(ρ + |ξ|²)` of `√(-Δ + ρ)`.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    rho: f64,
    omega: Vec<f64>,
}

impl SymbolTable {
    pub fn new(space: &SpectralSpace, rho: f64) -> Self {
        assert!(rho >= 0.0 && rho.is_finite(), "mass parameter must be finite and ≥ 0");
        let omega = space.wavenumber_sq().iter().map(|k2| (rho + k2).sqrt()).collect();
        Self { rho, omega }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn omega_max(&self) -> f64 {
        self.omega.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space_1d(n: usize) -> SpectralSpace {
        SpectralSpace::new(TorusGrid::periodic(1, n).unwrap())
    }

    fn sample(grid: &TorusGrid, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..grid.len()).map(|i| f(grid.point(i))).collect()
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::periodic(1, 100).is_err());
        assert!(TorusGrid::periodic(1, 2).is_err());
        assert!(TorusGrid::periodic(4, 8).is_err());
        assert!(TorusGrid::new(1, 8, 1.0, 1.0).is_err());
        let g = TorusGrid::periodic(2, 8).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.mode_index(4), -4);
        assert_eq!(g.mode_index(3), 3);
        assert_eq!(g.slot(-1), Some(7));
        assert_eq!(g.slot(4), None);
        for i in 0..g.len() {
            assert_eq!(g.flatten(g.unflatten(i)), i);
        }
    }

    #[test]
    fn constant_has_unit_mean_coefficient() {
        for dim in 1..=3 {
            let grid = TorusGrid::new(dim, 8, 0.0, 3.0).unwrap();
            let space = SpectralSpace::new(grid);
            let f = space.to_spectral(&vec![1.0; grid.len()]).unwrap();
            assert!((f.coeffs()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            assert!(f.coeffs()[1..].iter().all(|c| c.norm() < 1e-15));
        }
    }

    #[test]
    fn cosine_coefficients() {
        let space = space_1d(16);
        let f = space.to_spectral(&sample(space.grid(), |x| x[0].cos())).unwrap();
        for m in -8..8 {
            let c = f.mode([m, 0, 0]).unwrap();
            let expected = if m.abs() == 1 { 0.5 } else { 0.0 };
            assert!((c - Complex64::new(expected, 0.0)).norm() < 1e-15, "mode {m}: {c}");
        }
    }

    #[test]
    fn shifted_box_keeps_absolute_phase() {
        // sin(2πx/L) on [0.3, 0.3 + L): coefficient at ξ = +1 is -i/2 regardless of the offset.
        let grid = TorusGrid::new(1, 16, 0.3, 2.3).unwrap();
        let space = SpectralSpace::new(grid);
        let k = 2.0 * PI / grid.length();
        let f = space.to_spectral(&sample(&grid, |x| (k * x[0]).sin())).unwrap();
        assert!((f.mode([1, 0, 0]).unwrap() - Complex64::new(0.0, -0.5)).norm() < 1e-14);
        assert!(f.hermitian_residue() < 1e-15);
    }

    #[test]
    fn to_physical_of_constant_and_cosine() {
        let space = space_1d(16);
        let mut f = SpectralField::zeros(*space.grid());
        f.set_mode([0, 0, 0], Complex64::new(2.0, 0.0));
        assert!(space.to_physical(&f).unwrap().iter().all(|v| (v - 2.0).abs() < 1e-15));
        let mut g = SpectralField::zeros(*space.grid());
        g.set_mode([1, 0, 0], Complex64::new(0.5, 0.0));
        g.set_mode([-1, 0, 0], Complex64::new(0.5, 0.0));
        let vals = space.to_physical(&g).unwrap();
        for (j, v) in vals.iter().enumerate() {
            assert!((v - space.grid().node(j).cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn to_physical_rejects_non_hermitian() {
        let space = space_1d(8);
        let mut f = SpectralField::zeros(*space.grid());
        f.set_mode([1, 0, 0], Complex64::new(1.0, 0.0));
        assert!(matches!(space.to_physical(&f), Err(Error::HermitianViolation { .. })));
    }

    #[test]
    fn shape_errors() {
        let space = space_1d(8);
        assert!(matches!(space.to_spectral(&[0.0; 7]), Err(Error::ShapeMismatch { .. })));
        let f = SpectralField::zeros(*space.grid());
        assert!(space.apply_symbol(&f, &[1.0; 3]).is_err());
        let other = SpectralField::zeros(TorusGrid::periodic(1, 16).unwrap());
        assert!(matches!(space.to_physical(&other), Err(Error::GridMismatch)));
    }

    #[test]
    fn cosine_sobolev_norms() {
        let space = space_1d(16);
        let f = space.to_spectral(&sample(space.grid(), |x| x[0].cos())).unwrap();
        assert!((space.sobolev_norm(&f, 0.0) - PI.sqrt()).abs() < 1e-14);
        assert!((space.sobolev_norm(&f, 1.0) - (2.0 * PI).sqrt()).abs() < 1e-14);
        // Quadrature cross-check of ∫cos² = π.
        let vals = sample(space.grid(), |x| x[0].cos().powi(2));
        assert!((space.integrate(&vals) - PI).abs() < 1e-13);
        assert_eq!(space.sobolev_norm(&SpectralField::zeros(*space.grid()), 2.5), 0.0);
    }

    #[test]
    fn symbol_squared_on_cosine() {
        let space = space_1d(16);
        let symbols = space.symbols(0.0);
        let sigma: Vec<f64> = symbols.omega().iter().map(|w| w * w).collect();
        let f = space.to_spectral(&sample(space.grid(), |x| x[0].cos())).unwrap();
        let twice = space.apply_symbol(&space.apply_symbol(&f, &sigma).unwrap(), &sigma).unwrap();
        for (a, b) in twice.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
        let ones = vec![1.0; f.coeffs().len()];
        assert_eq!(space.apply_symbol(&f, &ones).unwrap(), f);
    }

    #[test]
    fn omega_zero_mode_and_monotone() {
        let space = space_1d(32);
        assert_eq!(space.symbols(0.0).omega()[0], 0.0);
        let s = space.symbols(2.0);
        assert!((s.omega()[0] - 2f64.sqrt()).abs() < 1e-15);
        let mut pairs: Vec<(f64, f64)> =
            space.wavenumber_sq().iter().copied().zip(s.omega().iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pairs.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn gradient_squared_cases() {
        let space = space_1d(16);
        let c = space.to_spectral(&[3.0; 16]).unwrap();
        assert!(space.gradient_squared(&c).unwrap().iter().all(|v| v.abs() < 1e-28));
        let s = space.to_spectral(&sample(space.grid(), |x| x[0].sin())).unwrap();
        let g = space.gradient_squared(&s).unwrap();
        for (j, v) in g.iter().enumerate() {
            assert!((v - space.grid().node(j).cos().powi(2)).abs() < 1e-14);
        }

        let grid2 = TorusGrid::periodic(2, 16).unwrap();
        let space2 = SpectralSpace::new(grid2);
        let u = space2.to_spectral(&sample(&grid2, |x| x[0].sin() + x[1].cos())).unwrap();
        let g2 = space2.gradient_squared(&u).unwrap();
        for (i, v) in g2.iter().enumerate() {
            let x = grid2.point(i);
            let expected = x[0].cos().powi(2) + x[1].sin().powi(2);
            assert!((v - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_zeroes_nyquist() {
        let space = space_1d(8);
        // Alternating sequence is the pure Nyquist mode.
        let vals: Vec<f64> = (0..8).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let f = space.to_spectral(&vals).unwrap();
        let d = space.derivative(&f, 0).unwrap();
        assert!(d.max_abs() < 1e-15);
    }

    #[test]
    fn round_trip_three_dims() {
        let grid = TorusGrid::new(3, 8, -1.0, 2.0).unwrap();
        let space = SpectralSpace::new(grid);
        let vals: Vec<f64> = (0..grid.len()).map(|i| ((i * 7919) % 113) as f64 / 17.0 - 3.0).collect();
        let back = space.to_physical(&space.to_spectral(&vals).unwrap()).unwrap();
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12 * 3.7);
        }
    }

    #[test]
    fn project_and_prolong() {
        let fine = TorusGrid::periodic(1, 32).unwrap();
        let coarse = TorusGrid::periodic(1, 8).unwrap();
        let space = SpectralSpace::new(fine);
        let f = space.to_spectral(&sample(&fine, |x| (3.0 * x[0]).cos() + (9.0 * x[0]).sin())).unwrap();
        let p = f.project(coarse).unwrap();
        assert!((p.mode([3, 0, 0]).unwrap().re - 0.5).abs() < 1e-15);
        assert!(p.mode([-4, 0, 0]).unwrap().norm() == 0.0);
        let back = p.prolong(fine).unwrap();
        assert!(back.mode([9, 0, 0]).unwrap().norm() == 0.0);
        assert!((back.mode([-3, 0, 0]).unwrap().re - 0.5).abs() < 1e-15);
        assert!(coarse.n() < fine.n() && f.project(TorusGrid::periodic(2, 8).unwrap()).is_err());
    }

    #[test]
    fn dealias_truncates_high_modes() {
        let space = space_1d(12usize.next_power_of_two());
        let mut f = SpectralField::zeros(*space.grid());
        f.coeffs_mut().iter_mut().for_each(|c| *c = Complex64::new(1.0, 0.0));
        space.dealias(&mut f);
        for i in 0..f.coeffs().len() {
            let m = space.grid().mode_index(i).abs();
            assert_eq!(f.coeffs()[i].re, if m > 5 { 0.0 } else { 1.0 });
        }
    }
}
