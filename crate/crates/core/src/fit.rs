//! Ordinary least-squares line fits.

use serde::Serialize;

use crate::error::{Error, Result};

/// Fewest samples a slope fit accepts.
pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Fits `y ≈ slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return Err(Error::WindowTooShort {
            samples: n,
            required: 2,
        });
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = (0..n)
        .map(|i| (y[i] - slope * x[i] - intercept).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        samples: n,
    })
}

/// Indices of `taus` inside `[lo, hi]`, with a relative slack for grid roundoff.
pub fn window_indices(taus: &[f64], window: [f64; 2]) -> Vec<usize> {
    let slack = 1e-9 * window[1].abs().max(1.0);
    taus.iter()
        .enumerate()
        .filter(|(_, t)| **t >= window[0] - slack && **t <= window[1] + slack)
        .map(|(i, _)| i)
        .collect()
}

/// Least-squares slope of `values` (already on a log scale) over `window`.
pub fn windowed_fit(taus: &[f64], values: &[f64], window: [f64; 2]) -> Result<LinearFit> {
    let idx = window_indices(taus, window);
    if idx.len() < MIN_FIT_SAMPLES {
        return Err(Error::WindowTooShort {
            samples: idx.len(),
            required: MIN_FIT_SAMPLES,
        });
    }
    let x: Vec<f64> = idx.iter().map(|&i| taus[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    linear_fit(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t - 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.intercept + 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_window() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let err = windowed_fit(&t, &t, [0.0, 0.5]).unwrap_err();
        assert_eq!(err, Error::WindowTooShort { samples: 6, required: 10 });
    }

    proptest! {
        #[test]
        fn slope_is_shift_invariant(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64) {
            let x: Vec<f64> = (0..15).map(|i| i as f64 * 0.3).collect();
            let y: Vec<f64> = x.iter().map(|t| a * t + b + 0.01 * (t * 7.0).sin()).collect();
            let y2: Vec<f64> = y.iter().map(|v| v + c).collect();
            let f1 = linear_fit(&x, &y).unwrap();
            let f2 = linear_fit(&x, &y2).unwrap();
            prop_assert!((f1.slope - f2.slope).abs() < 1e-10);
        }
    }
}
