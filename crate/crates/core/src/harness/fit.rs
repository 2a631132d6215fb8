use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderFit {
    /// Observed order: slope of `log₂ err` against `−k`.
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the `log₂ err` residuals.
    pub residual: f64,
    pub used: usize,
    /// `k` values dropped because their error was zero, negative or not finite.
    pub excluded: Vec<f64>,
}

/// Least-squares line `y ≈ a + b x`; returns `(b, a, rms residual)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
    (b, a, (rss / n).sqrt())
}

/// Fits `err ≈ C 2^{−p k}` over the points with `k` inside `window` (inclusive).
pub fn fit_order(points: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<OrderFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for &(k, err) in points {
        if let Some((lo, hi)) = window {
            if k < lo || k > hi {
                continue;
            }
        }
        if err.is_finite() && err > 0.0 {
            xs.push(-k);
            ys.push(err.log2());
        } else {
            excluded.push(k);
        }
    }
    if xs.len() < 3 {
        return Err(Error::TooFewPoints(xs.len()));
    }
    let (slope, intercept, residual) = least_squares(&xs, &ys);
    Ok(OrderFit { slope, intercept, residual, used: xs.len(), excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synthetic(order: f64, c: f64, ks: std::ops::RangeInclusive<i32>) -> Vec<(f64, f64)> {
        ks.map(|k| (k as f64, c * 2f64.powf(-order * k as f64))).collect()
    }

    #[test]
    fn exact_third_order() {
        let fit = fit_order(&synthetic(3.0, 0.7, 1..=8), None).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn exact_second_order() {
        let fit = fit_order(&synthetic(2.0, 5.0, 1..=8), None).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_third_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let pts: Vec<(f64, f64)> = (2..=8)
                .map(|k| {
                    let eps: f64 = rng.random_range(-1.0..1.0);
                    (k as f64, 0.3 * 2f64.powi(-3 * k) * (1.0 + 0.05 * eps))
                })
                .collect();
            let fit = fit_order(&pts, None).unwrap();
            assert!((fit.slope - 3.0).abs() < 0.1, "slope {}", fit.slope);
        }
    }

    #[test]
    fn window_and_exclusions() {
        let mut pts = synthetic(3.0, 1.0, 1..=8);
        pts[7].1 = 0.0;
        pts[0].1 = 1e3;
        let fit = fit_order(&pts, Some((2.0, 8.0))).unwrap();
        assert_eq!(fit.excluded, vec![8.0]);
        assert_eq!(fit.used, 6);
        assert!((fit.slope - 3.0).abs() < 1e-12);
        let short = [(1.0, 1.0), (2.0, f64::NAN), (3.0, 0.1)];
        assert!(matches!(fit_order(&short, None), Err(Error::TooFewPoints(2))));
    }

    proptest! {
        #[test]
        fn shift_invariance(order in 0.5f64..5.0, c in 1e-3f64..1e3, shift in -20i32..20) {
            let base = synthetic(order, c, 1..=7);
            let moved: Vec<_> = base.iter().map(|&(k, e)| (k + shift as f64, e)).collect();
            let a = fit_order(&base, None).unwrap();
            let b = fit_order(&moved, None).unwrap();
            prop_assert!((a.slope - order).abs() < 1e-9);
            prop_assert!((a.slope - b.slope).abs() < 1e-9);
        }
    }
}
