//! Shared fixtures for the benchmarks.

use lowreg::{KleinGordon, Nonlinearity, Problem, RoughData, State, TorusGrid};

/// One-dimensional sine-Gordon system on `n` nodes with rough data of regularity `theta`.
pub fn fixture(n: usize, theta: f64) -> (KleinGordon, State) {
    let grid = TorusGrid::periodic(1, n).expect("power-of-two grid");
    let system = KleinGordon::new(Problem::new(grid, 0.0, Nonlinearity::Sine).expect("valid problem"), false);
    let data = RoughData::generate(theta, 1, grid).expect("valid theta");
    let state = system.initial_state(data.u0, data.v0).expect("matching grids");
    (system, state)
}
