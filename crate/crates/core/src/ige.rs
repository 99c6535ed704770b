//! Volume-based entropy of geodesic flows: the logarithm of the time-averaged
//! statistical volume swept along a trajectory, and its linear growth rate.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{closed_form_geodesic, fmt_num, ClosedFormGeodesicParams};
use crate::error::{Error, Result};
use crate::fit::windowed_fit;
use crate::geometry::{self, MetricField};

/// Grid density required by the cumulative average.
pub const MIN_POINTS_PER_UNIT: f64 = 100.0;

/// Upper edge of the normalized linear spectrum `ρ(ω) = ω` on `[0, √2]`.
pub const LINEAR_SPECTRUM_CUTOFF: f64 = std::f64::consts::SQRT_2;

/// `√det g` at `x`.
pub fn volume_density<F: MetricField + ?Sized>(field: &F, x: &[f64]) -> Result<f64> {
    geometry::volume_density(field, x)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

fn log_sum(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::NEG_INFINITY, log_add)
}

/// `ln ΔV` swept by the closed-form geodesic between `0` and `tau` on the
/// product of `3N` Gaussian pairs.
pub fn log_delta_volume_gaussian(p: &ClosedFormGeodesicParams, n_particles: usize, tau: f64) -> f64 {
    let (mu0, s0) = closed_form_geodesic(p, 0.0);
    let (mu, s) = closed_form_geodesic(p, tau);
    let per_pair = std::f64::consts::SQRT_2 * (mu - mu0).abs() * (1.0 / s - 1.0 / s0).abs();
    3.0 * n_particles as f64 * per_pair.ln()
}

/// Swept volume magnitude `[√2 |Δμ| |Δ(1/σ)|]^{3N}`.
pub fn delta_volume_gaussian(p: &ClosedFormGeodesicParams, n_particles: usize, tau: f64) -> f64 {
    log_delta_volume_gaussian(p, n_particles, tau).exp()
}

fn check_amplitudes(frequencies: &[f64], xi: &[f64]) -> Result<()> {
    if xi.len() != frequencies.len() {
        return Err(Error::DimensionMismatch {
            expected: frequencies.len(),
            got: xi.len(),
        });
    }
    if xi.iter().chain(frequencies).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("amplitudes and frequencies must be finite".into()));
    }
    Ok(())
}

/// `ln ΔV` for oscillators on the growing branch `θ_j = Ξ_j e^{ω_j τ}`.
///
/// Two oscillators use the exact integral of `1 + ½(ω₁²θ₁² + ω₂²θ₂²)` over
/// the box spanned by the origin and `θ(τ)`. A multiple of three uses the
/// asymptotic product form
/// `(1/3n) 2^{−3n/2} ∏Ξ_i e^{Ωτ} [Σ Ξ_j² ω_j² e^{2ω_j τ}]^{3n/2}`.
pub fn log_delta_volume_iho(frequencies: &[f64], xi: &[f64], tau: f64) -> Result<f64> {
    check_amplitudes(frequencies, xi)?;
    if tau < 0.0 {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be nonnegative")));
    }
    let d = frequencies.len();
    if d == 2 {
        let t1 = xi[0] * (frequencies[0] * tau).exp();
        let t2 = xi[1] * (frequencies[1] * tau).exp();
        let w1 = frequencies[0].powi(2);
        let w2 = frequencies[1].powi(2);
        let v = t1 * t2 * (1.0 + (w1 * t1 * t1 + w2 * t2 * t2) / 6.0);
        return Ok(v.abs().ln());
    }
    if d == 0 || d % 3 != 0 {
        return Err(Error::InvalidArgument(format!(
            "swept volume needs 2 or 3n oscillators, got {d}"
        )));
    }
    let m = d as f64;
    let omega: f64 = frequencies.iter().sum();
    let log_amp: f64 = xi.iter().map(|x| x.abs().ln()).sum();
    let spread = log_sum(
        frequencies
            .iter()
            .zip(xi)
            .map(|(w, x)| 2.0 * (x.abs() * w).ln() + 2.0 * w * tau),
    );
    Ok(-m.ln() - 0.5 * m * 2f64.ln() + log_amp + omega * tau + 0.5 * m * spread)
}

/// Swept volume for oscillators, see [`log_delta_volume_iho`].
pub fn delta_volume_iho(frequencies: &[f64], xi: &[f64], tau: f64) -> Result<f64> {
    Ok(log_delta_volume_iho(frequencies, xi, tau)?.exp())
}

fn check_grid(taus: &[f64], len: usize) -> Result<()> {
    if taus.len() != len {
        return Err(Error::DimensionMismatch {
            expected: taus.len(),
            got: len,
        });
    }
    if taus.len() < 2 {
        return Err(Error::InvalidArgument("series needs at least two samples".into()));
    }
    let widest = taus.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    if widest * MIN_POINTS_PER_UNIT > 1.0 + 1e-9 {
        return Err(Error::GridTooCoarse {
            per_unit: 1.0 / widest,
            required: MIN_POINTS_PER_UNIT,
        });
    }
    Ok(())
}

/// `ln⟨ΔV⟩(τ)` from `ln ΔV` samples: cumulative trapezoid divided by the
/// elapsed time, with the first sample taken as the right limit `ΔV(τ₀)`.
/// Works in log space so large exponents do not overflow.
pub fn log_average_volume(taus: &[f64], log_dv: &[f64]) -> Result<Vec<f64>> {
    check_grid(taus, log_dv.len())?;
    let mut out = Vec::with_capacity(taus.len());
    out.push(log_dv[0]);
    let mut acc = f64::NEG_INFINITY;
    for k in 1..taus.len() {
        let h = taus[k] - taus[k - 1];
        acc = log_add(acc, (0.5 * h).ln() + log_add(log_dv[k - 1], log_dv[k]));
        out.push(acc - (taus[k] - taus[0]).ln());
    }
    Ok(out)
}

/// `⟨ΔV⟩(τ) = (1/τ) ∫₀^τ ΔV` on a sampled series.
pub fn average_volume(taus: &[f64], dv: &[f64]) -> Result<Vec<f64>> {
    if let Some(k) = dv.iter().position(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("volume sample {k} is negative or non-finite")));
    }
    let logs: Vec<f64> = dv.iter().map(|v| v.ln()).collect();
    Ok(log_average_volume(taus, &logs)?.into_iter().map(f64::exp).collect())
}

/// Entropy series with its windowed growth rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IGEReport {
    pub scenario: String,
    pub window: [f64; 2],
    pub fitted_slope: f64,
    pub predicted_slope: f64,
    pub relative_error: f64,
    pub r_squared: f64,
    /// Fitted slope over `Ω = Σω_i`, for oscillator scenarios.
    pub omega_ratio: Option<f64>,
    #[serde(skip)]
    pub taus: Vec<f64>,
    #[serde(skip)]
    pub log_delta_v: Vec<f64>,
    /// `S(τ) = ln⟨ΔV⟩(τ)`.
    #[serde(skip)]
    pub entropy: Vec<f64>,
}

#[derive(Serialize)]
struct ReportView<'a> {
    fitted_slope: f64,
    predicted_slope: f64,
    relative_error: f64,
    window: [f64; 2],
    r_squared: f64,
    scenario: &'a str,
}

impl IGEReport {
    /// Columns `tau,delta_v,avg_v,entropy`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,delta_v,avg_v,entropy\n");
        for k in 0..self.taus.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_num(self.taus[k]),
                fmt_num(self.log_delta_v[k].exp()),
                fmt_num(self.entropy[k].exp()),
                fmt_num(self.entropy[k])
            );
        }
        out
    }

    /// Compact JSON summary of the fit.
    pub fn to_json(&self) -> String {
        let view = ReportView {
            fitted_slope: self.fitted_slope,
            predicted_slope: self.predicted_slope,
            relative_error: self.relative_error,
            window: self.window,
            r_squared: self.r_squared,
            scenario: &self.scenario,
        };
        serde_json::to_string_pretty(&view).expect("report serializes")
    }
}

/// Fits `S(τ) = ln⟨ΔV⟩` over `window` from a log-volume series.
pub fn ige(
    taus: &[f64],
    log_delta_v: &[f64],
    window: [f64; 2],
    predicted_slope: f64,
    scenario: &str,
) -> Result<IGEReport> {
    let entropy = log_average_volume(taus, log_delta_v)?;
    for (t, s) in taus.iter().zip(&entropy) {
        if *t >= window[0] - 1e-9 && *t <= window[1] + 1e-9 && !s.is_finite() {
            return Err(Error::NonPositiveVolume { tau: *t });
        }
    }
    let fit = windowed_fit(taus, &entropy, window)?;
    Ok(IGEReport {
        scenario: scenario.to_string(),
        window,
        fitted_slope: fit.slope,
        predicted_slope,
        relative_error: (fit.slope - predicted_slope) / predicted_slope.abs(),
        r_squared: fit.r_squared,
        omega_ratio: None,
        taus: taus.to_vec(),
        log_delta_v: log_delta_v.to_vec(),
        entropy,
    })
}

/// Entropy of the Gaussian product flow along the closed-form geodesic;
/// the predicted rate is `3Nλ`.
pub fn ige_gaussian(
    p: &ClosedFormGeodesicParams,
    n_particles: usize,
    taus: &[f64],
    window: [f64; 2],
) -> Result<IGEReport> {
    let logs: Vec<f64> = taus.iter().map(|t| log_delta_volume_gaussian(p, n_particles, *t)).collect();
    let name = format!("gaussian(N={n_particles},lambda={},Lambda={})", p.lambda, p.big_lambda);
    ige(taus, &logs, window, 3.0 * n_particles as f64 * p.lambda, &name)
}

/// Rate expected for two oscillators: `4ω` for equal frequencies, otherwise
/// `3 max(ω₁, ω₂)`, the dominant-frequency limit.
pub fn predicted_slope_iho_2set(frequencies: [f64; 2]) -> f64 {
    let [a, b] = frequencies;
    if (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) {
        4.0 * a
    } else {
        3.0 * a.max(b)
    }
}

/// Entropy of two oscillators on the growing branch.
pub fn ige_iho_2set(frequencies: [f64; 2], xi: [f64; 2], taus: &[f64], window: [f64; 2]) -> Result<IGEReport> {
    let logs = taus
        .iter()
        .map(|t| log_delta_volume_iho(&frequencies, &xi, *t))
        .collect::<Result<Vec<_>>>()?;
    let name = format!("iho_2set(omega=[{},{}])", frequencies[0], frequencies[1]);
    let mut report = ige(taus, &logs, window, predicted_slope_iho_2set(frequencies), &name)?;
    report.omega_ratio = Some(report.fitted_slope / (frequencies[0] + frequencies[1]));
    Ok(report)
}

/// Draws `3n` frequencies with density `ρ(ω) = ω` on `[0, √2]`.
///
/// Normalization of the density fixes the cutoff at `√2`; `cutoff` is the
/// caller's `ξΩ` and must equal it.
pub fn sample_frequency_spectrum(n: usize, cutoff: f64, seed: u64) -> Result<Vec<f64>> {
    if (cutoff - LINEAR_SPECTRUM_CUTOFF).abs() > 1e-9 {
        return Err(Error::InconsistentCutoff { product: cutoff });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..3 * n)
        .map(|_| LINEAR_SPECTRUM_CUTOFF * rng.random::<f64>().sqrt())
        .collect())
}

/// `ξ = √2 / Ω` for a sampled spectrum.
pub fn cutoff_multiplier(frequencies: &[f64]) -> f64 {
    LINEAR_SPECTRUM_CUTOFF / frequencies.iter().sum::<f64>()
}

/// Continuum estimate
/// `ln[(1/3n) 2^{−3n/2} Ξ^{6n} (ξ²Ω²/2)^{3n/2} e^{(3/2)nξΩτ} / τ]`.
pub fn log_average_volume_continuum(n: usize, xi_omega: f64, amplitude: f64, tau: f64) -> f64 {
    let m = 3.0 * n as f64;
    -m.ln() - 0.5 * m * 2f64.ln() + 2.0 * m * amplitude.abs().ln() + 0.5 * m * (0.5 * xi_omega * xi_omega).ln()
        + 0.5 * m * xi_omega * tau
        - tau.ln()
}

/// Entropy of `3n` oscillators through the asymptotic product form, compared
/// with the continuum rate `(3/2) n ξΩ`.
pub fn ige_iho_appendix(
    n: usize,
    frequencies: &[f64],
    xi: &[f64],
    taus: &[f64],
    window: [f64; 2],
) -> Result<IGEReport> {
    if frequencies.len() != 3 * n {
        return Err(Error::DimensionMismatch {
            expected: 3 * n,
            got: frequencies.len(),
        });
    }
    let logs = taus
        .iter()
        .map(|t| log_delta_volume_iho(frequencies, xi, *t))
        .collect::<Result<Vec<_>>>()?;
    let omega: f64 = frequencies.iter().sum();
    let predicted = 1.5 * n as f64 * LINEAR_SPECTRUM_CUTOFF;
    let name = format!("iho_appendix(n={n})");
    let mut report = ige(taus, &logs, window, predicted, &name)?;
    report.omega_ratio = Some(report.fitted_slope / omega);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::uniform_grid;
    use crate::models::StatisticalModel;

    #[test]
    fn volume_density_values() {
        let m = StatisticalModel::gaussian_product(1).unwrap();
        let mut x = vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let single = 2f64.sqrt();
        assert!((volume_density(&m, &x).unwrap() - single.powi(3)).abs() < 1e-12);
        x[1] = 2.0;
        assert!((volume_density(&m, &x).unwrap() - single.powi(3) / 4.0).abs() < 1e-12);
        let iho = StatisticalModel::iho(vec![1.0, 1.0]).unwrap();
        assert!((volume_density(&iho, &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_series_averages_to_itself() {
        let ts = uniform_grid(0.0, 3.0, 0.01);
        let avg = average_volume(&ts, &vec![2.5; ts.len()]).unwrap();
        assert!(avg.iter().all(|v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn exponential_average_matches_closed_form() {
        let ts = uniform_grid(0.0, 5.0, 0.001);
        let dv: Vec<f64> = ts.iter().map(|t| t.exp()).collect();
        let avg = average_volume(&ts, &dv).unwrap();
        for (t, a) in ts.iter().zip(&avg).skip(1) {
            let exact = t.exp_m1() / t;
            assert!((a / exact - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let ts = uniform_grid(0.0, 1.0, 0.05);
        assert!(matches!(
            average_volume(&ts, &vec![1.0; ts.len()]),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn synthetic_exponential_slope() {
        let ts = uniform_grid(0.0, 10.0, 0.01);
        let logs: Vec<f64> = ts.iter().map(|t| 6.0 * t + t.ln()).collect();
        let r = ige(&ts, &logs, [5.0, 10.0], 6.0, "synthetic").unwrap();
        // ⟨τ e^{6τ}⟩ = e^{6τ}(1 − 1/(6τ)) + 1/(36τ), slope 6 up to O(1/τ²)
        assert!(r.relative_error.abs() < 1e-3);
    }

    #[test]
    fn gaussian_volume_starts_at_zero_and_grows() {
        let p = ClosedFormGeodesicParams::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(delta_volume_gaussian(&p, 1, 0.0), 0.0);
        let ts = uniform_grid(0.0, 10.0, 0.01);
        // σ decreases from the start once Λ² ≥ 8λ²
        let expanding = ClosedFormGeodesicParams::new(3.0, 1.0, 0.0).unwrap();
        let v: Vec<f64> = ts.iter().map(|t| log_delta_volume_gaussian(&expanding, 2, *t)).collect();
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
        let r = ige_gaussian(&p, 1, &ts, [5.0, 10.0]).unwrap();
        assert!(r.relative_error.abs() < 0.05, "{}", r.relative_error);
    }

    #[test]
    fn iho_small_time_oracle() {
        let v = delta_volume_iho(&[1.0, 1.0], &[1.0, 1.0], 0.0).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn iho_slopes() {
        let w = 0.5;
        let ts = uniform_grid(0.0, 20.0 / w, 0.01);
        let r = ige_iho_2set([w, w], [1.0, 1.0], &ts, [10.0 / w, 20.0 / w]).unwrap();
        assert!(r.relative_error.abs() < 0.05);
        let ts = uniform_grid(0.0, 20.0, 0.01);
        let r = ige_iho_2set([1.0, 0.01], [1.0, 1.0], &ts, [10.0, 20.0]).unwrap();
        assert!(r.relative_error.abs() < 0.05);
    }

    #[test]
    fn spectrum_is_reproducible_and_normalised() {
        let a = sample_frequency_spectrum(1, LINEAR_SPECTRUM_CUTOFF, 7).unwrap();
        assert_eq!(a, sample_frequency_spectrum(1, LINEAR_SPECTRUM_CUTOFF, 7).unwrap());
        assert_eq!(a.len(), 3);
        let big = sample_frequency_spectrum(100_000, LINEAR_SPECTRUM_CUTOFF, 11).unwrap();
        let mean = big.iter().sum::<f64>() / big.len() as f64;
        assert!((mean - 2.0 * 2f64.sqrt() / 3.0).abs() < 3e-3);
        let below = big.iter().filter(|w| **w <= 1.0).count() as f64 / big.len() as f64;
        assert!((below - 0.5).abs() < 3e-3);
        assert!(matches!(
            sample_frequency_spectrum(1, 1.0, 7),
            Err(Error::InconsistentCutoff { .. })
        ));
    }

    #[test]
    fn appendix_slope_is_homogeneous() {
        let freqs = sample_frequency_spectrum(2, LINEAR_SPECTRUM_CUTOFF, 3).unwrap();
        let doubled: Vec<f64> = freqs.iter().map(|w| 2.0 * w).collect();
        let xi = vec![1.0; 6];
        let ts = uniform_grid(0.0, 10.0, 0.01);
        let a = ige_iho_appendix(2, &freqs, &xi, &ts, [5.0, 10.0]).unwrap();
        let ts2 = uniform_grid(0.0, 5.0, 0.01);
        let b = ige_iho_appendix(2, &doubled, &xi, &ts2, [2.5, 5.0]).unwrap();
        assert!((b.fitted_slope / a.fitted_slope - 2.0).abs() < 0.02);
    }

    #[test]
    fn report_json_keys() {
        let ts = uniform_grid(0.0, 2.0, 0.01);
        let logs: Vec<f64> = ts.iter().map(|t| 2.0 * t).collect();
        let r = ige(&ts, &logs, [1.0, 2.0], 2.0, "s").unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for k in ["fitted_slope", "predicted_slope", "relative_error", "window", "r_squared", "scenario"] {
            assert!(v.get(k).is_some());
        }
        assert!(r.to_csv().starts_with("tau,delta_v,avg_v,entropy\n"));
    }
}
