//! Versioned binary state files.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `LOWREGKG` |
//! | 4     | format version (`u32`, currently 1) |
//! | 4     | dimension `d` (`u32`) |
//! | 4     | points per axis `n_x` (`u32`) |
//! | 8     | `ρ` (`f64`) |
//! | 8     | `t` (`f64`) |
//! | 16·N  | `û` as `(re, im)` `f64` pairs, row-major DFT mode order |
//! | 16·N  | `v̂`, same layout |
//!
//! with `N = n_x^d`. The box is not stored; readers supply it.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrators::State;
use crate::spectral::{SpectralField, TorusGrid};

pub const MAGIC: &[u8; 8] = b"LOWREGKG";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 + 4 + 8 + 8;

#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub dim: u32,
    pub n_x: u32,
    pub rho: f64,
    pub t: f64,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl StateFile {
    pub fn from_state(state: &State, rho: f64) -> Self {
        let grid = state.u.grid();
        Self {
            dim: grid.dim() as u32,
            n_x: grid.n() as u32,
            rho,
            t: state.t,
            u: state.u.coeffs().to_vec(),
            v: state.v.coeffs().to_vec(),
        }
    }

    /// Rebuilds the state on `[a, b)^d`.
    pub fn to_state(&self, a: f64, b: f64) -> Result<State> {
        let grid = TorusGrid::new(self.dim as usize, self.n_x as usize, a, b)?;
        State::new(self.t, SpectralField::new(grid, self.u.clone())?, SpectralField::new(grid, self.v.clone())?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 16 * (self.u.len() + self.v.len()));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.dim.to_le_bytes());
        out.extend_from_slice(&self.n_x.to_le_bytes());
        out.extend_from_slice(&self.rho.to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        for c in self.u.iter().chain(&self.v) {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::StateFormat(format!("truncated header ({} bytes)", bytes.len())));
        }
        if &bytes[..8] != MAGIC {
            return Err(Error::StateFormat("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != FORMAT_VERSION {
            return Err(Error::StateFormat(format!("unsupported version {version}")));
        }
        let (dim, n_x) = (u32_at(12), u32_at(16));
        if !(1..=3).contains(&dim) {
            return Err(Error::StateFormat(format!("dimension {dim} out of range")));
        }
        let count = (n_x as usize)
            .checked_pow(dim)
            .ok_or_else(|| Error::StateFormat("mode count overflows".into()))?;
        let expected = HEADER_LEN + 32 * count;
        if bytes.len() != expected {
            return Err(Error::StateFormat(format!("expected {expected} bytes, found {}", bytes.len())));
        }
        let body = &bytes[HEADER_LEN..];
        let pair = |i: usize| Complex64::new(f64_at_slice(body, 16 * i), f64_at_slice(body, 16 * i + 8));
        Ok(Self {
            dim,
            n_x,
            rho: f64_at(20),
            t: f64_at(28),
            u: (0..count).map(pair).collect(),
            v: (count..2 * count).map(pair).collect(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

fn f64_at_slice(bytes: &[u8], o: usize) -> f64 {
    f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::RoughData;

    #[test]
    fn round_trip_is_bit_exact() {
        let grid = TorusGrid::periodic(2, 8).unwrap();
        let data = RoughData::generate(1.3, 5, grid).unwrap();
        let state = State::new(0.1 + 0.2, data.u0, data.v0).unwrap();
        let file = StateFile::from_state(&state, 0.7);
        let bytes = file.to_bytes();
        assert_eq!(bytes.len(), HEADER_LEN + 32 * 64);
        let back = StateFile::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        let restored = back.to_state(grid.a(), grid.b()).unwrap();
        assert_eq!(restored.t.to_bits(), state.t.to_bits());
        for (x, y) in restored.u.coeffs().iter().chain(restored.v.coeffs()).zip(state.u.coeffs().iter().chain(state.v.coeffs())) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let grid = TorusGrid::periodic(1, 4).unwrap();
        let state = State::new(0.0, SpectralField::zeros(grid), SpectralField::zeros(grid)).unwrap();
        let bytes = StateFile::from_state(&state, 0.0).to_bytes();
        assert!(StateFile::from_bytes(&bytes[..10]).is_err());
        assert!(StateFile::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(StateFile::from_bytes(&bad).is_err());
        let mut newer = bytes;
        newer[8] = 2;
        assert!(matches!(StateFile::from_bytes(&newer), Err(Error::StateFormat(_))));
    }
}
