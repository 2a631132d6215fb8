use lowreg::{RoughData, SpectralField, SpectralSpace, TorusGrid};
use num_complex::Complex64;
use proptest::prelude::*;

/// Direct O(n²) sum `û(ξ) = n⁻¹ Σ_j u(x_j) e^{−iξ x_j}` in one dimension.
fn naive_coefficients(grid: &TorusGrid, values: &[f64]) -> Vec<Complex64> {
    let n = grid.n();
    (0..n)
        .map(|k| {
            let xi = grid.wavenumber(k);
            let sum: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, &u)| u * Complex64::from_polar(1.0, -xi * grid.node(j)))
                .sum();
            sum / n as f64
        })
        .collect()
}

fn samples(len: usize, seed: u64) -> Vec<f64> {
    let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..len)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

#[test]
fn forward_transform_matches_direct_sum_on_shifted_box() {
    let grid = TorusGrid::new(1, 64, -1.3, 2.9).unwrap();
    let space = SpectralSpace::new(grid);
    let values = samples(grid.len(), 7);
    let fast = space.to_spectral(&values).unwrap();
    let slow = naive_coefficients(&grid, &values);
    for (a, b) in fast.coeffs().iter().zip(&slow) {
        assert!((a - b).norm() <= 1e-14, "{a} vs {b}");
    }
}

#[test]
fn parseval_in_three_dimensions() {
    let grid = TorusGrid::new(3, 8, 0.0, 3.0).unwrap();
    let space = SpectralSpace::new(grid);
    let values = samples(grid.len(), 11);
    let field = space.to_spectral(&values).unwrap();
    let quadrature = space.integrate(&values.iter().map(|v| v * v).collect::<Vec<_>>());
    let norm = space.sobolev_norm(&field, 0.0);
    assert!((norm * norm - quadrature).abs() <= 1e-12 * quadrature);
}

#[test]
fn derivative_of_trigonometric_polynomial() {
    let grid = TorusGrid::new(2, 16, 0.0, 2.0).unwrap();
    let space = SpectralSpace::new(grid);
    let k = std::f64::consts::PI;
    let u: Vec<f64> = (0..grid.len()).map(|i| {
        let p = grid.point(i);
        (k * p[0]).sin() * (2.0 * k * p[1]).cos()
    }).collect();
    let du: Vec<f64> = (0..grid.len()).map(|i| {
        let p = grid.point(i);
        -2.0 * k * (k * p[0]).sin() * (2.0 * k * p[1]).sin()
    }).collect();
    let got = space.to_physical(&space.derivative(&space.to_spectral(&u).unwrap(), 1).unwrap()).unwrap();
    for (a, b) in got.iter().zip(&du) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn project_then_prolong_keeps_low_modes() {
    let fine = TorusGrid::periodic(1, 64).unwrap();
    let coarse = TorusGrid::periodic(1, 16).unwrap();
    let data = RoughData::generate(1.5, 4, fine).unwrap();
    let back = data.u0.project(coarse).unwrap().prolong(fine).unwrap();
    for m in -7..=7i64 {
        assert_eq!(back.mode([m, 0, 0]), data.u0.mode([m, 0, 0]));
    }
    for m in 9..32i64 {
        assert_eq!(back.mode([m, 0, 0]), Some(Complex64::new(0.0, 0.0)));
    }
}

#[test]
fn mismatched_grids_are_rejected() {
    let a = SpectralField::zeros(TorusGrid::periodic(1, 16).unwrap());
    let b = SpectralField::zeros(TorusGrid::periodic(1, 32).unwrap());
    assert!(a.sub(&b).is_err());
    assert!(TorusGrid::periodic(1, 24).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_is_identity(seed in any::<u64>(), log_n in 2u32..8) {
        let grid = TorusGrid::new(1, 1 << log_n, -2.0, 5.0).unwrap();
        let space = SpectralSpace::new(grid);
        let values = samples(grid.len(), seed);
        let back = space.to_physical(&space.to_spectral(&values).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&values) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn transform_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), alpha in -3.0f64..3.0) {
        let grid = TorusGrid::new(2, 8, 0.0, 1.0).unwrap();
        let space = SpectralSpace::new(grid);
        let (x, y) = (samples(grid.len(), s1), samples(grid.len(), s2));
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + b).collect();
        let mut expected = space.to_spectral(&x).unwrap();
        expected.scale(alpha);
        expected.axpy(1.0, &space.to_spectral(&y).unwrap()).unwrap();
        let got = space.to_spectral(&combo).unwrap();
        for (a, b) in got.coeffs().iter().zip(expected.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-14);
        }
    }

    #[test]
    fn sobolev_norm_is_monotone_in_order(seed in any::<u64>(), nu in 0.0f64..3.0, step in 0.0f64..2.0) {
        let grid = TorusGrid::periodic(1, 32).unwrap();
        let space = SpectralSpace::new(grid);
        let field = space.to_spectral(&samples(grid.len(), seed)).unwrap();
        prop_assert!(space.sobolev_norm(&field, nu) <= space.sobolev_norm(&field, nu + step) * (1.0 + 1e-15));
    }
}
