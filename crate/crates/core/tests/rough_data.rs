use lowreg::{RoughData, SpectralSpace, TorusGrid};

/// Mean of `(1+|ξ|²)^θ |û(ξ)|² / scale²` over the modes `2^j ≤ |ξ| < 2^{j+1}`.
fn shell_means(data: &RoughData, theta: f64, shells: u32) -> Vec<f64> {
    let grid = data.grid();
    let mut sums = vec![0.0; shells as usize];
    let mut counts = vec![0usize; shells as usize];
    for (flat, c) in data.u0.coeffs().iter().enumerate() {
        let m = grid.modes(flat)[0].unsigned_abs();
        if m == 0 || grid.touches_nyquist(flat) {
            continue;
        }
        let j = m.ilog2() as usize;
        if j < sums.len() {
            let xi2 = grid.wavenumber(grid.slot(m as i64).unwrap()).powi(2);
            sums[j] += (1.0 + xi2).powf(theta) * c.norm_sqr() / data.u_scale.powi(2);
            counts[j] += 1;
        }
    }
    sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect()
}

#[test]
fn normalized_in_the_target_spaces() {
    for (theta, dim, n) in [(0.75, 1, 128), (2.0, 1, 256), (1.5, 2, 32)] {
        let grid = TorusGrid::periodic(dim, n).unwrap();
        let space = SpectralSpace::new(grid);
        let data = RoughData::generate(theta, 3, grid).unwrap();
        assert!((space.sobolev_norm(&data.u0, theta) - 1.0).abs() <= 1e-13);
        assert!((space.sobolev_norm(&data.v0, (theta - 1.0f64).max(0.0)) - 1.0).abs() <= 1e-13);
    }
}

#[test]
fn fields_are_real_and_nyquist_free() {
    let grid = TorusGrid::periodic(2, 16).unwrap();
    let data = RoughData::generate(2.0, 12, grid).unwrap();
    for field in [&data.u0, &data.v0] {
        assert_eq!(field.hermitian_residue(), 0.0);
        for flat in 0..grid.len() {
            if grid.touches_nyquist(flat) {
                assert_eq!(field.coeffs()[flat].norm(), 0.0);
            }
        }
    }
}

#[test]
fn weighted_energy_is_flat_across_dyadic_shells() {
    let theta = 2.0;
    let grid = TorusGrid::periodic(1, 256).unwrap();
    let shells = 7;
    let mut mean = vec![0.0; shells as usize];
    for seed in 1..=32 {
        let data = RoughData::generate(theta, seed, grid).unwrap();
        for (m, s) in mean.iter_mut().zip(shell_means(&data, theta, shells)) {
            *m += s / 32.0;
        }
    }
    let max = mean.iter().cloned().fold(0.0, f64::max);
    let min = mean.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min <= 4.0, "{mean:?}");
}

#[test]
fn coefficients_decay_at_the_prescribed_rate() {
    let theta = 1.25;
    let grid = TorusGrid::periodic(1, 512).unwrap();
    let data = RoughData::generate(theta, 7, grid).unwrap();
    for (flat, c) in data.u0.coeffs().iter().enumerate() {
        let xi2 = grid.wavenumber(flat).powi(2);
        let bound = data.u_scale * 2f64.sqrt() * (1.0 + xi2).powf(-theta / 2.0);
        assert!(c.norm() <= bound * (1.0 + 1e-12), "mode {}", grid.mode_index(flat));
    }
}

#[test]
fn refining_the_grid_extends_the_data() {
    let coarse = RoughData::generate(2.0, 5, TorusGrid::periodic(1, 64).unwrap()).unwrap();
    let fine = RoughData::generate(2.0, 5, TorusGrid::periodic(1, 512).unwrap()).unwrap();
    let ratio = fine.u_scale / coarse.u_scale;
    for m in -31..=31i64 {
        let (a, b) = (coarse.u0.mode([m, 0, 0]).unwrap(), fine.u0.mode([m, 0, 0]).unwrap());
        assert!((a * ratio - b).norm() <= 1e-15 * b.norm().max(1e-300) + 1e-300, "mode {m}");
    }
}

#[test]
fn seeds_give_distinct_draws() {
    let grid = TorusGrid::periodic(1, 32).unwrap();
    let a = RoughData::generate(2.0, 1, grid).unwrap();
    let b = RoughData::generate(2.0, 2, grid).unwrap();
    let again = RoughData::generate(2.0, 1, grid).unwrap();
    assert_ne!(a.u0, b.u0);
    assert_eq!(a.u0, again.u0);
    assert_eq!(a.v0, again.v0);
    assert!(RoughData::generate(0.5, 1, grid).is_err());
}
