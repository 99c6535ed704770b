//! Built-in acceptance suite: ten criteria, each a set of claims comparing a
//! predicted value against a measured one, plus a runtime budget.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{
    closed_form_family_variation, closed_form_geodesic, closed_form_initial_state, closed_form_residual,
    integrate_geodesic, integrate_jlc, isotropic_jacobi_solution, lyapunov_estimate, uniform_grid,
    ClosedFormGeodesicParams, FlowOptions, GeodesicState,
};
use crate::error::Result;
use crate::geometry::fixtures::HyperbolicPlane;
use crate::geometry::{self, Backend, FiniteDiff};
use crate::iho::{self, Branch};
use crate::ige::{self, LINEAR_SPECTRUM_CUTOFF};
use crate::models::StatisticalModel;

/// How a claim's measured value is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|measured − predicted| ≤ tolerance`.
    Absolute,
    /// `|measured − predicted| ≤ tolerance · |predicted|`.
    Relative,
    /// `measured > predicted`.
    GreaterThan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub name: String,
    pub predicted: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Claim {
    pub fn new(name: impl Into<String>, predicted: f64, measured: f64, tolerance: f64, comparison: Comparison) -> Self {
        let pass = match comparison {
            Comparison::Absolute => (measured - predicted).abs() <= tolerance,
            Comparison::Relative => (measured - predicted).abs() <= tolerance * predicted.abs(),
            Comparison::GreaterThan => measured > predicted,
        };
        Self {
            name: name.into(),
            predicted,
            measured,
            tolerance,
            comparison,
            pass,
        }
    }

    pub fn absolute(name: impl Into<String>, predicted: f64, measured: f64, tolerance: f64) -> Self {
        Self::new(name, predicted, measured, tolerance, Comparison::Absolute)
    }

    pub fn relative(name: impl Into<String>, predicted: f64, measured: f64, tolerance: f64) -> Self {
        Self::new(name, predicted, measured, tolerance, Comparison::Relative)
    }

    /// Failed evaluation, recorded so the criterion still reports.
    fn errored(name: impl Into<String>, predicted: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            predicted,
            measured: f64::NAN,
            tolerance,
            comparison: Comparison::Absolute,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: String,
    pub claims: Vec<Claim>,
    pub notes: Vec<String>,
    pub runtime_seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionOutcome {
    pub fn within_budget(&self) -> bool {
        self.runtime_seconds <= self.budget_seconds
    }

    pub fn pass(&self) -> bool {
        !self.claims.is_empty() && self.claims.iter().all(|c| c.pass) && self.within_budget()
    }

    /// `PASS`/`FAIL` line followed by one indented line per failing claim.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} criterion {:>2}: {} ({:.2}s of {:.0}s)",
            if self.pass() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.runtime_seconds,
            self.budget_seconds
        );
        for c in self.claims.iter().filter(|c| !c.pass) {
            out.push_str(&format!(
                "\n    {}: predicted {:.6e}, measured {:.6e}, tolerance {:.1e}",
                c.name, c.predicted, c.measured, c.tolerance
            ));
        }
        if !self.within_budget() {
            out.push_str("\n    runtime budget exceeded");
        }
        out
    }
}

struct Criterion {
    id: u32,
    title: &'static str,
    budget_seconds: f64,
    body: fn(&mut Vec<String>) -> Vec<Claim>,
}

const CRITERIA: [Criterion; 10] = [
    Criterion {
        id: 1,
        title: "Gaussian product scalar curvature is -3N",
        budget_seconds: 10.0,
        body: curvature_constants,
    },
    Criterion {
        id: 2,
        title: "correlated model curvature closed form",
        budget_seconds: 5.0,
        body: correlated_curvature,
    },
    Criterion {
        id: 3,
        title: "numeric metric oracle agrees with closed forms",
        budget_seconds: 10.0,
        body: metric_oracle,
    },
    Criterion {
        id: 4,
        title: "integrated geodesics follow the closed form",
        budget_seconds: 10.0,
        body: geodesic_closed_form,
    },
    Criterion {
        id: 5,
        title: "Jacobi field growth rate",
        budget_seconds: 30.0,
        body: jacobi_rate,
    },
    Criterion {
        id: 6,
        title: "entropy slope 3N lambda",
        budget_seconds: 60.0,
        body: ige_linear_growth,
    },
    Criterion {
        id: 7,
        title: "two-oscillator entropy exponents",
        budget_seconds: 30.0,
        body: iho_exponents,
    },
    Criterion {
        id: 8,
        title: "linear-spectrum oscillator sweep",
        budget_seconds: 30.0,
        body: appendix_sweep,
    },
    Criterion {
        id: 9,
        title: "Jacobi-metric geodesics reproduce Newtonian motion",
        budget_seconds: 10.0,
        body: newton_reduction,
    },
    Criterion {
        id: 10,
        title: "anisotropy tensor",
        budget_seconds: 10.0,
        body: anisotropy,
    },
];

/// Number of criteria in the suite.
pub const CRITERION_COUNT: u32 = CRITERIA.len() as u32;

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: u32) -> Option<CriterionOutcome> {
    let c = CRITERIA.iter().find(|c| c.id == id)?;
    let mut notes = Vec::new();
    let start = Instant::now();
    let claims = (c.body)(&mut notes);
    Some(CriterionOutcome {
        id: c.id,
        title: c.title.to_string(),
        claims,
        notes,
        runtime_seconds: start.elapsed().as_secs_f64(),
        budget_seconds: c.budget_seconds,
    })
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    (1..=CRITERION_COUNT).filter_map(run_criterion).collect()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Random `(μ, σ)` coordinates for `pairs` pairs.
fn random_pairs(rng: &mut ChaCha8Rng, pairs: usize) -> Vec<f64> {
    (0..pairs)
        .flat_map(|_| [0, 1])
        .map(|k| if k == 0 { uniform(rng, -3.0, 3.0) } else { uniform(rng, 0.3, 3.0) })
        .collect()
}

/// Largest `|value − target|`, or `NaN` when any evaluation failed.
fn worst_deviation(values: &[Result<f64>], target: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for v in values {
        match v {
            Ok(v) => worst = worst.max((v - target).abs()),
            Err(_) => return f64::NAN,
        }
    }
    worst
}

fn curvature_constants(_notes: &mut Vec<String>) -> Vec<Claim> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let backend = Backend::FiniteDiff(FiniteDiff::with_step(1e-5));
    (1..=5)
        .map(|n| {
            let m = StatisticalModel::gaussian_product(n).expect("valid model");
            let target = -3.0 * n as f64;
            let values: Vec<Result<f64>> = (0..20)
                .map(|_| geometry::ricci_scalar(&m, &random_pairs(&mut rng, 3 * n), backend))
                .collect();
            let dev = worst_deviation(&values, target);
            Claim::absolute(format!("R(N={n}) worst of 20 points"), target, target + dev, 1e-6)
        })
        .collect()
}

/// Closed-form scalar curvature of the correlated bivariate model.
pub fn correlated_ricci_closed_form(r: f64) -> f64 {
    let r2 = r * r;
    -(8.0 * (r2 - 2.0) + 2.0 * r2 * (3.0 * r2 - 2.0)) / (8.0 * (r2 - 1.0))
}

fn correlated_curvature(notes: &mut Vec<String>) -> Vec<Claim> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let backend = Backend::FiniteDiff(FiniteDiff::with_step(1e-5));
    let mut claims = Vec::new();
    for r in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let m = StatisticalModel::correlated_gaussian(r).expect("valid model");
        let values: Vec<Result<f64>> = (0..10)
            .map(|_| geometry::ricci_scalar(&m, &random_pairs(&mut rng, 2), backend))
            .collect();
        let ok: Vec<f64> = values.iter().filter_map(|v| v.as_ref().ok().copied()).collect();
        let predicted = correlated_ricci_closed_form(r);
        if ok.len() != values.len() {
            claims.push(Claim::errored(format!("R(r={r})"), predicted, 1e-6));
            continue;
        }
        let first = ok[0];
        let spread = ok.iter().fold(0.0f64, |a, v| a.max((v - first).abs()));
        let worst = ok.iter().copied().fold(first, |a, v| if (v - predicted).abs() > (a - predicted).abs() { v } else { a });
        notes.push(format!("r = {r}: measured R = {first:.9}"));
        claims.push(Claim::absolute(format!("R(r={r}) worst of 10 points"), predicted, worst, 1e-6));
        claims.push(Claim::absolute(format!("R(r={r}) spread over 10 points"), 0.0, spread, 1e-6));
    }
    claims
}

fn metric_oracle(_notes: &mut Vec<String>) -> Vec<Claim> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = [0.0f64; 3];
    let mut failed = [false; 3];
    for k in 0..50 {
        let family = k % 3;
        let outcome = (|| -> Result<f64> {
            let (model, coords) = match family {
                0 => {
                    let n = 1 + rng.random_range(0..2);
                    (StatisticalModel::gaussian_product(n)?, random_pairs(&mut rng, 3 * n))
                }
                1 => (
                    StatisticalModel::correlated_gaussian(uniform(&mut rng, -0.9, 0.9))?,
                    random_pairs(&mut rng, 2),
                ),
                _ => {
                    let d = 1 + rng.random_range(0..3);
                    let freqs = (0..d).map(|_| uniform(&mut rng, 0.0, 2.0)).collect();
                    let theta = (0..d).map(|_| uniform(&mut rng, -2.0, 2.0)).collect::<Vec<_>>();
                    (StatisticalModel::iho(freqs)?, theta)
                }
            };
            let point = model.point(&coords)?;
            let exact = model.metric_at(&point)?;
            let numeric = match model {
                StatisticalModel::Iho { .. } => model.jacobi_metric_numeric(&point)?,
                _ => model.fisher_rao_numeric(&point, 40)?,
            };
            Ok((numeric.components - exact.components).amax())
        })();
        match outcome {
            Ok(d) => worst[family] = worst[family].max(d),
            Err(_) => failed[family] = true,
        }
    }
    ["gaussian product", "correlated gaussian", "oscillator jacobi metric"]
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let measured = if failed[i] { f64::NAN } else { worst[i] };
            Claim::absolute(format!("{name}: worst entry difference"), 0.0, measured, 1e-8)
        })
        .collect()
}

fn geodesic_closed_form(_notes: &mut Vec<String>) -> Vec<Claim> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let model = StatisticalModel::gaussian_product(1).expect("valid model");
    let opts = FlowOptions::default().with_output_step(0.05);
    let mut worst_path: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    for _ in 0..20 {
        let p = ClosedFormGeodesicParams::new(
            uniform(&mut rng, 0.5, 2.0),
            uniform(&mut rng, 0.5, 2.0),
            uniform(&mut rng, -1.0, 1.0),
        )
        .expect("positive parameters");
        let init = closed_form_initial_state(&p, 3, 0.0);
        match integrate_geodesic(&model, &init, 5.0, &opts) {
            Ok(traj) => {
                for s in &traj.states {
                    let (mu, sigma) = closed_form_geodesic(&p, s.tau);
                    for pair in 0..3 {
                        worst_path = worst_path
                            .max((s.theta[2 * pair] - mu).abs())
                            .max((s.theta[2 * pair + 1] - sigma).abs());
                    }
                }
            }
            Err(_) => worst_path = f64::NAN,
        }
        for t in uniform_grid(0.0, 5.0, 0.05) {
            let [a, b] = closed_form_residual(&p, t);
            worst_residual = worst_residual.max(a.abs()).max(b.abs());
        }
    }
    vec![
        Claim::absolute("integrated vs closed-form geodesic, worst pointwise", 0.0, worst_path, 1e-6),
        Claim::absolute("closed-form geodesic equation residual", 0.0, worst_residual, 1e-9),
    ]
}

fn jacobi_rate(notes: &mut Vec<String>) -> Vec<Claim> {
    let mut claims = Vec::new();
    for n in 1..=2 {
        for lambda in [0.5, 1.0, 2.0] {
            let name = format!("lambda_J(N={n}, lambda={lambda})");
            let outcome = (|| -> Result<(f64, f64)> {
                let p = ClosedFormGeodesicParams::new(1.0, lambda, 0.0)?;
                let model = StatisticalModel::gaussian_product(n)?;
                let init = closed_form_initial_state(&p, 3 * n, 0.0);
                let opts = FlowOptions::default().with_output_step(0.01 / lambda);
                let traj = integrate_geodesic(&model, &init, 10.0 / lambda, &opts)?;
                let (j0, dj0) = closed_form_family_variation(&p, 3 * n, 0.0);
                let jf = integrate_jlc(&model, &traj, &j0, &dj0, &opts)?;
                let est = lyapunov_estimate(&jf.taus, &jf.intensity, [5.0 / lambda, 10.0 / lambda])?;
                Ok((est.lambda_j, est.prefactor))
            })();
            match outcome {
                Ok((rate, prefactor)) => {
                    notes.push(format!("N={n}, lambda={lambda}: prefactor {prefactor:.6e}"));
                    claims.push(Claim::relative(name, lambda, rate, 0.05));
                }
                Err(e) => {
                    notes.push(format!("{name}: {e}"));
                    claims.push(Claim::errored(name, lambda, 0.05));
                }
            }
        }
    }
    let sinh = (|| -> Result<f64> {
        let k = -1.0;
        let hp = HyperbolicPlane::new(k)?;
        let init = GeodesicState {
            tau: 0.0,
            theta: vec![0.0, 1.0],
            velocity: vec![0.0, 1.0],
        };
        let opts = FlowOptions::default().with_output_step(0.05);
        let traj = integrate_geodesic(&hp, &init, 5.0, &opts)?;
        let jf = integrate_jlc(&hp, &traj, &[0.0, 0.0], &[1.0, 0.0], &opts)?;
        let mut worst: f64 = 0.0;
        for (t, i) in jf.taus.iter().zip(&jf.intensity).skip(1) {
            let exact = isotropic_jacobi_solution(k, 1.0, *t)?;
            worst = worst.max(((i - exact) / exact).abs());
        }
        Ok(worst)
    })();
    claims.push(Claim::absolute(
        "constant K=-1 Jacobi field vs sinh, worst relative",
        0.0,
        sinh.unwrap_or(f64::NAN),
        1e-6,
    ));
    claims
}

fn ige_linear_growth(_notes: &mut Vec<String>) -> Vec<Claim> {
    let mut claims = Vec::new();
    for n in 1..=3 {
        for lambda in [0.5, 1.0, 2.0] {
            let name = format!("S slope(N={n}, lambda={lambda})");
            let predicted = 3.0 * n as f64 * lambda;
            let p = ClosedFormGeodesicParams::new(1.0, lambda, 0.0).expect("positive parameters");
            let taus = uniform_grid(0.0, 10.0 / lambda, 0.01);
            match ige::ige_gaussian(&p, n, &taus, [5.0 / lambda, 10.0 / lambda]) {
                Ok(r) => claims.push(Claim::relative(name, predicted, r.fitted_slope, 0.05)),
                Err(_) => claims.push(Claim::errored(name, predicted, 0.05)),
            }
        }
    }
    claims
}

fn iho_slope(freqs: [f64; 2], scale: f64) -> Result<f64> {
    let lo = 10.0 / scale;
    let hi = 20.0 / scale;
    let taus = uniform_grid(0.0, hi, 0.01);
    Ok(ige::ige_iho_2set(freqs, [1.0, 1.0], &taus, [lo, hi])?.fitted_slope)
}

fn iho_exponents(_notes: &mut Vec<String>) -> Vec<Claim> {
    let mut claims = Vec::new();
    for w in [0.5, 1.0] {
        let measured = iho_slope([w, w], w).unwrap_or(f64::NAN);
        claims.push(Claim::relative(format!("slope(omega1=omega2={w})"), 4.0 * w, measured, 0.05));
    }
    let dominant = [1.0, 0.01];
    let measured = iho_slope(dominant, 1.0).unwrap_or(f64::NAN);
    claims.push(Claim::relative("slope(omega=[1, 0.01])", 3.0, measured, 0.05));
    for (freqs, scale) in [([0.5, 0.5], 0.5), (dominant, 1.0)] {
        let base = iho_slope(freqs, scale).unwrap_or(f64::NAN);
        let doubled = iho_slope([2.0 * freqs[0], 2.0 * freqs[1]], 2.0 * scale).unwrap_or(f64::NAN);
        claims.push(Claim::relative(
            format!("slope ratio under omega -> 2 omega, omega=[{}, {}]", freqs[0], freqs[1]),
            2.0,
            doubled / base,
            0.01,
        ));
    }
    claims
}

/// Seed of the sampled spectra in the oscillator sweep.
pub const SWEEP_SEED: u64 = 20_080_101;

fn appendix_sweep(notes: &mut Vec<String>) -> Vec<Claim> {
    let mut claims = Vec::new();
    for n in [1usize, 2, 4] {
        let name = format!("slope/(n xi Omega), n={n}");
        let outcome = (|| -> Result<(f64, f64)> {
            let freqs = ige::sample_frequency_spectrum(n, LINEAR_SPECTRUM_CUTOFF, SWEEP_SEED + n as u64)?;
            let xi = vec![1.0; 3 * n];
            let taus = uniform_grid(0.0, 10.0, 0.01);
            let r = ige::ige_iho_appendix(n, &freqs, &xi, &taus, [5.0, 10.0])?;
            Ok((r.fitted_slope, freqs.iter().sum()))
        })();
        match outcome {
            Ok((slope, omega)) => {
                notes.push(format!(
                    "n={n}: Omega = {omega:.6}, xi = {:.6}, slope = {slope:.6}, slope/Omega = {:.6}",
                    LINEAR_SPECTRUM_CUTOFF / omega,
                    slope / omega
                ));
                claims.push(Claim::relative(name, 1.5, slope / (n as f64 * LINEAR_SPECTRUM_CUTOFF), 0.05));
            }
            Err(_) => claims.push(Claim::errored(name, 1.5, 0.05)),
        }
    }
    claims
}

fn newton_reduction(_notes: &mut Vec<String>) -> Vec<Claim> {
    let mut claims = Vec::new();
    let theta0 = [0.5, 0.5];
    for w1 in [0.5, 1.0, 2.0] {
        for w2 in [0.5, 1.0, 2.0] {
            let freqs = [w1, w2];
            let outcome = (|| -> Result<f64> {
                let model = StatisticalModel::iho(freqs.to_vec())?;
                let v0 = iho::normalize_energy(&freqs, &theta0, &[w1 * theta0[0], w2 * theta0[1]])?;
                let newton = iho::newtonian_via_geodesic(&model, &theta0, &v0, 3.0, &FlowOptions::default())?;
                let reference = iho::newtonian_reference(&freqs, &theta0, &newton.taus, &Branch::Velocity(v0))?;
                // compare on the requested span only
                let keep = newton.taus.iter().take_while(|t| **t <= 3.0 + 1e-12).count();
                let mut worst: f64 = 0.0;
                for k in 0..keep {
                    for j in 0..2 {
                        let (a, b) = (newton.thetas[k][j], reference.thetas[k][j]);
                        worst = worst.max((a - b).abs() / b.abs().max(1.0));
                    }
                }
                Ok(worst)
            })();
            claims.push(Claim::absolute(
                format!("relative trajectory gap, omega=[{w1}, {w2}]"),
                0.0,
                outcome.unwrap_or(f64::NAN),
                1e-5,
            ));
        }
    }
    claims
}

fn anisotropy(notes: &mut Vec<String>) -> Vec<Claim> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let mut largest_closed: f64 = 0.0;
    for _ in 0..100 {
        let w = uniform(&mut rng, 0.1, 2.0);
        let x = [uniform(&mut rng, -2.0, 2.0), uniform(&mut rng, -2.0, 2.0)];
        let closed = iho::weyl_1212_iho(w, x[0], x[1]);
        largest_closed = largest_closed.max(closed.abs());
        let engine = StatisticalModel::iho(vec![w, w])
            .and_then(|m| geometry::weyl_projective(&m, &x, Backend::Analytic))
            .map(|wt| wt.tensor.get(0, 1, 0, 1));
        match engine {
            Ok(e) => worst = worst.max((e - closed).abs()),
            Err(_) => worst = f64::NAN,
        }
    }
    notes.push(format!("largest closed-form W_1212 over the sample: {largest_closed:.6e}"));
    let mut flat: f64 = 0.0;
    for x in [[1.0, 0.0], [0.3, -1.2], [2.0, 2.0]] {
        let engine = StatisticalModel::iho(vec![0.0, 0.0])
            .and_then(|m| geometry::weyl_projective(&m, &x, Backend::Analytic))
            .map(|w| w.max_abs)
            .unwrap_or(f64::NAN);
        flat = flat.max(engine).max(iho::weyl_1212_iho(0.0, x[0], x[1]).abs());
    }
    let gaussian = StatisticalModel::gaussian_product(1)
        .and_then(|m| geometry::weyl_projective(&m, &[0.0, 1.0, 0.5, 0.7, -1.0, 2.0], Backend::Analytic))
        .map(|w| w.max_abs)
        .unwrap_or(f64::NAN);
    vec![
        Claim::absolute("W_1212 closed form vs engine, worst of 100 points", 0.0, worst, 1e-6),
        Claim::absolute("max|W| at omega = 0", 0.0, flat, 1e-12),
        Claim::new("max|W| on the Gaussian product, N=1", 0.0, gaussian, 0.0, Comparison::GreaterThan),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claim_comparisons() {
        assert!(Claim::relative("a", 1.0, 1.04, 0.05).pass);
        assert!(!Claim::relative("a", 1.0, 1.07, 0.05).pass);
        assert!(!Claim::absolute("a", 0.0, f64::NAN, 1.0).pass);
        assert!(Claim::new("a", 0.0, 1e-300, 0.0, Comparison::GreaterThan).pass);
    }

    #[test]
    fn correlated_closed_form_values() {
        assert_eq!(correlated_ricci_closed_form(0.0), -2.0);
        assert!((correlated_ricci_closed_form(0.5) + 2.4375).abs() < 1e-15);
    }

    #[test]
    fn unknown_criterion_is_none() {
        assert!(run_criterion(0).is_none());
        assert!(run_criterion(CRITERION_COUNT + 1).is_none());
    }
}
