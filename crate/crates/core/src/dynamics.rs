//! Geodesic flow, geodesic deviation and growth-rate estimation.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{self, LinearFit};
use crate::geometry::{self, Backend, MetricField};
use crate::ode::{self, StepControl};

/// Position and velocity at affine parameter `tau`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicState {
    pub tau: f64,
    pub theta: Vec<f64>,
    pub velocity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegratorInfo {
    pub name: String,
    pub rtol: f64,
    pub atol: f64,
    pub accepted_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicTrajectory {
    pub states: Vec<GeodesicState>,
    pub integrator: IntegratorInfo,
    pub model_id: String,
    /// Largest relative change of `g(v, v)` over the recorded states.
    pub kinetic_drift: f64,
}

impl GeodesicTrajectory {
    pub fn taus(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.tau).collect()
    }

    pub fn last(&self) -> &GeodesicState {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// CSV with header `tau,theta_0..,vel_0..`.
    pub fn to_csv(&self) -> String {
        let d = self.states.first().map_or(0, |s| s.theta.len());
        let mut out = String::from("tau");
        for i in 0..d {
            let _ = write!(out, ",theta_{i}");
        }
        for i in 0..d {
            let _ = write!(out, ",vel_{i}");
        }
        out.push('\n');
        for s in &self.states {
            out.push_str(&fmt_num(s.tau));
            for v in s.theta.iter().chain(&s.velocity) {
                out.push(',');
                out.push_str(&fmt_num(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Fixed-format number used by every CSV writer, so outputs are byte-stable.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.12e}")
}

/// Integration settings for geodesics and Jacobi fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub control: StepControl,
    pub backend: Backend,
    /// Record on a uniform grid of this spacing; `None` records every step.
    pub output_step: Option<f64>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            control: StepControl::default(),
            backend: Backend::Analytic,
            output_step: None,
        }
    }
}

impl FlowOptions {
    pub fn with_output_step(mut self, dt: f64) -> Self {
        self.output_step = Some(dt);
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }
}

/// Uniform grid `t0, t0 + dt, …` ending exactly at `t_end`.
pub fn uniform_grid(t0: f64, t_end: f64, dt: f64) -> Vec<f64> {
    let span = t_end - t0;
    let steps = (span / dt - 1e-9).ceil().max(1.0) as usize;
    (0..=steps)
        .map(|k| if k == steps { t_end } else { t0 + dt * k as f64 })
        .collect()
}

fn as_domain(e: Error) -> Error {
    match e {
        Error::BoundaryTooClose { coordinate } => {
            Error::Domain(format!("stencil for coordinate {coordinate} leaves the domain"))
        }
        other => other,
    }
}

fn geodesic_acceleration(gamma: &geometry::Tensor3, v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for (mu, o) in out.iter_mut().enumerate().take(n) {
        let mut acc = 0.0;
        for nu in 0..n {
            if v[nu] == 0.0 {
                continue;
            }
            for rho in 0..n {
                acc += gamma.get(mu, nu, rho) * v[nu] * v[rho];
            }
        }
        *o = -acc;
    }
}

struct GeodesicSystem<'a, F: ?Sized> {
    field: &'a F,
    backend: Backend,
    n: usize,
}

impl<F: MetricField + ?Sized> ode::OdeSystem for GeodesicSystem<'_, F> {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.n;
        let gamma = geometry::christoffel(self.field, &y[..n], self.backend).map_err(as_domain)?;
        dy[..n].copy_from_slice(&y[n..]);
        geodesic_acceleration(&gamma, &y[n..], &mut dy[n..]);
        Ok(())
    }
}

/// Runs `integrate` and samples either every step or on `grid`.
fn run_sampled<S: ode::OdeSystem + ?Sized>(
    system: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    control: &StepControl,
    grid: Option<&[f64]>,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, usize)> {
    let mut taus = vec![t0];
    let mut ys = vec![y0.to_vec()];
    let mut steps = 0usize;
    let mut next = 1usize;
    ode::integrate(system, t0, y0, t_end, control, |step| {
        steps += 1;
        match grid {
            None => {
                taus.push(step.t1);
                ys.push(step.y1.clone());
            }
            Some(g) => {
                while next < g.len() && g[next] <= step.t1 {
                    let y = if g[next] == step.t1 {
                        step.y1.clone()
                    } else {
                        step.eval(g[next])
                    };
                    taus.push(g[next]);
                    ys.push(y);
                    next += 1;
                }
            }
        }
        Ok(true)
    })?;
    Ok((taus, ys, steps))
}

/// Integrates `Θ̈^μ + Γ^μ_{νρ} Θ̇^ν Θ̇^ρ = 0` from `initial` to `tau_end`.
///
/// Leaving the domain (for instance `σ` reaching its lower bound) ends the
/// run with [`Error::DomainExit`] carrying the last accepted `τ`.
pub fn integrate_geodesic<F: MetricField + ?Sized>(
    field: &F,
    initial: &GeodesicState,
    tau_end: f64,
    options: &FlowOptions,
) -> Result<GeodesicTrajectory> {
    let n = field.dim();
    if initial.theta.len() != n || initial.velocity.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: initial.theta.len().min(initial.velocity.len()),
        });
    }
    if !(tau_end > initial.tau) {
        return Err(Error::InvalidArgument("tau_end must exceed the initial tau".into()));
    }
    field.check_domain(&initial.theta)?;
    let system = GeodesicSystem {
        field,
        backend: options.backend,
        n,
    };
    let y0: Vec<f64> = initial.theta.iter().chain(&initial.velocity).copied().collect();
    let grid = options.output_step.map(|dt| uniform_grid(initial.tau, tau_end, dt));
    let (taus, ys, steps) = run_sampled(&system, initial.tau, &y0, tau_end, &options.control, grid.as_deref())?;

    let states: Vec<GeodesicState> = taus
        .iter()
        .zip(&ys)
        .map(|(t, y)| GeodesicState {
            tau: *t,
            theta: y[..n].to_vec(),
            velocity: y[n..].to_vec(),
        })
        .collect();
    let kinetic_drift = kinetic_drift(field, &states)?;
    Ok(GeodesicTrajectory {
        states,
        integrator: IntegratorInfo {
            name: "dopri5".into(),
            rtol: options.control.rtol,
            atol: options.control.atol,
            accepted_steps: steps,
        },
        model_id: field.name(),
        kinetic_drift,
    })
}

/// `g(v, v)` at a state.
pub fn kinetic_form<F: MetricField + ?Sized>(field: &F, state: &GeodesicState) -> Result<f64> {
    let g = field.metric(&state.theta)?;
    Ok(geometry::metric_inner(&g, &state.velocity, &state.velocity))
}

fn kinetic_drift<F: MetricField + ?Sized>(field: &F, states: &[GeodesicState]) -> Result<f64> {
    let k0 = kinetic_form(field, &states[0])?;
    if k0 == 0.0 {
        return Ok(0.0);
    }
    let mut worst: f64 = 0.0;
    for s in &states[1..] {
        worst = worst.max(((kinetic_form(field, s)? - k0) / k0).abs());
    }
    Ok(worst)
}

/// Integration constants `(Λ, λ, C)` of the closed-form Gaussian geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormGeodesicParams {
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    pub lambda: f64,
    pub offset: f64,
}

impl ClosedFormGeodesicParams {
    pub fn new(big_lambda: f64, lambda: f64, offset: f64) -> Result<Self> {
        if !(big_lambda > 0.0 && lambda > 0.0 && offset.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need Lambda > 0 and lambda > 0, got {big_lambda}, {lambda}"
            )));
        }
        Ok(Self {
            big_lambda,
            lambda,
            offset,
        })
    }
}

// cosh(x) − sinh(x) is written as exp(−x) to avoid cancellation.
fn closed_form_parts(p: &ClosedFormGeodesicParams, tau: f64) -> (f64, f64, f64) {
    let (bl, l) = (p.big_lambda, p.lambda);
    let e2 = (-2.0 * l * tau).exp();
    let d = e2 + bl * bl / (8.0 * l * l);
    (e2, d, (-l * tau).exp())
}

/// `(μ(τ), σ(τ))` of the closed-form geodesic of one Gaussian pair.
pub fn closed_form_geodesic(p: &ClosedFormGeodesicParams, tau: f64) -> (f64, f64) {
    let (_, d, e1) = closed_form_parts(p, tau);
    let bl = p.big_lambda;
    (bl * bl / (2.0 * p.lambda) / d + p.offset, bl * e1 / d)
}

/// `(dμ/dτ, dσ/dτ)` of the closed form.
pub fn closed_form_velocity(p: &ClosedFormGeodesicParams, tau: f64) -> (f64, f64) {
    let (e2, d, e1) = closed_form_parts(p, tau);
    let (bl, l) = (p.big_lambda, p.lambda);
    let dd = -2.0 * l * e2;
    let a = bl * bl / (2.0 * l);
    let dmu = -a * dd / (d * d);
    let dsigma = bl * (-l * e1 * d - e1 * dd) / (d * d);
    (dmu, dsigma)
}

/// Residuals of the two pair geodesic equations
/// `μ'' − (2/σ) μ'σ' = 0` and `σ'' − σ'²/σ + μ'²/(2σ) = 0`, with all
/// derivatives taken by eighth-order central differences of the closed form.
pub fn closed_form_residual(p: &ClosedFormGeodesicParams, tau: f64) -> [f64; 2] {
    const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    const D2: [f64; 4] = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
    const D2_CENTER: f64 = -205.0 / 72.0;
    let h = 0.025 / p.lambda;
    let (m0, s0) = closed_form_geodesic(p, tau);
    let (mut m1, mut s1, mut m2, mut s2) = (0.0, 0.0, D2_CENTER * m0, D2_CENTER * s0);
    for k in 0..4 {
        let off = (k + 1) as f64 * h;
        let (mp, sp) = closed_form_geodesic(p, tau + off);
        let (mm, sm) = closed_form_geodesic(p, tau - off);
        m1 += D1[k] * (mp - mm);
        s1 += D1[k] * (sp - sm);
        m2 += D2[k] * (mp + mm);
        s2 += D2[k] * (sp + sm);
    }
    let (m1, s1, m2, s2) = (m1 / h, s1 / h, m2 / (h * h), s2 / (h * h));
    [m2 - 2.0 / s0 * m1 * s1, s2 - s1 * s1 / s0 + m1 * m1 / (2.0 * s0)]
}

/// Initial state on the Gaussian product manifold with every pair on the
/// closed-form geodesic.
pub fn closed_form_initial_state(p: &ClosedFormGeodesicParams, pairs: usize, tau: f64) -> GeodesicState {
    let (mu, sigma) = closed_form_geodesic(p, tau);
    let (dmu, dsigma) = closed_form_velocity(p, tau);
    GeodesicState {
        tau,
        theta: (0..pairs).flat_map(|_| [mu, sigma]).collect(),
        velocity: (0..pairs).flat_map(|_| [dmu, dsigma]).collect(),
    }
}

/// `∂/∂λ` of the closed-form state (position and velocity) at `tau`, the
/// Jacobi field of the one-parameter family of geodesics.
pub fn closed_form_family_variation(p: &ClosedFormGeodesicParams, pairs: usize, tau: f64) -> (Vec<f64>, Vec<f64>) {
    let h = 1e-6 * p.lambda;
    let plus = ClosedFormGeodesicParams {
        lambda: p.lambda + h,
        ..*p
    };
    let minus = ClosedFormGeodesicParams {
        lambda: p.lambda - h,
        ..*p
    };
    let sp = closed_form_initial_state(&plus, pairs, tau);
    let sm = closed_form_initial_state(&minus, pairs, tau);
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) / (2.0 * h)).collect::<Vec<f64>>();
    (diff(&sp.theta, &sm.theta), diff(&sp.velocity, &sm.velocity))
}

/// Jacobi field along a geodesic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiField {
    pub taus: Vec<f64>,
    pub host: Vec<GeodesicState>,
    pub j: Vec<Vec<f64>>,
    /// Covariant derivative `DJ/dτ = J̇ + Γ(Θ̇, J)`.
    pub dj: Vec<Vec<f64>>,
    pub intensity: Vec<f64>,
    pub j0: Vec<f64>,
    pub dj0: Vec<f64>,
    /// Largest coordinate gap between the re-integrated host and the input trajectory.
    pub host_deviation: f64,
}

impl JacobiField {
    /// Trajectory columns followed by `J_0..,DJ_0..,intensity`.
    pub fn to_csv(&self) -> String {
        let d = self.j0.len();
        let mut out = String::from("tau");
        for prefix in ["theta", "vel", "J", "DJ"] {
            for i in 0..d {
                let _ = write!(out, ",{prefix}_{i}");
            }
        }
        out.push_str(",intensity\n");
        for k in 0..self.taus.len() {
            out.push_str(&fmt_num(self.taus[k]));
            let h = &self.host[k];
            for v in h.theta.iter().chain(&h.velocity).chain(&self.j[k]).chain(&self.dj[k]) {
                out.push(',');
                out.push_str(&fmt_num(*v));
            }
            out.push(',');
            out.push_str(&fmt_num(self.intensity[k]));
            out.push('\n');
        }
        out
    }
}

struct JlcSystem<'a, F: ?Sized> {
    field: &'a F,
    backend: Backend,
    n: usize,
}

impl<F: MetricField + ?Sized> ode::OdeSystem for JlcSystem<'_, F> {
    fn dim(&self) -> usize {
        4 * self.n
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.n;
        let (theta, v, j, jdot) = (&y[..n], &y[n..2 * n], &y[2 * n..3 * n], &y[3 * n..]);
        let (gamma, dgamma) = geometry::connection_with_jacobian(self.field, theta, self.backend).map_err(as_domain)?;
        dy[..n].copy_from_slice(v);
        geodesic_acceleration(&gamma, v, &mut dy[n..2 * n]);
        dy[2 * n..3 * n].copy_from_slice(jdot);
        // J̈^μ = −∂_κΓ^μ_{νρ} J^κ v^ν v^ρ − 2 Γ^μ_{νρ} v^ν J̇^ρ
        for mu in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                if j[k] == 0.0 {
                    continue;
                }
                for nu in 0..n {
                    if v[nu] == 0.0 {
                        continue;
                    }
                    for rho in 0..n {
                        acc += dgamma.get(k, mu, nu, rho) * j[k] * v[nu] * v[rho];
                    }
                }
            }
            for nu in 0..n {
                if v[nu] == 0.0 {
                    continue;
                }
                for rho in 0..n {
                    acc += 2.0 * gamma.get(mu, nu, rho) * v[nu] * jdot[rho];
                }
            }
            dy[3 * n + mu] = -acc;
        }
        Ok(())
    }
}

fn covariant(gamma: &geometry::Tensor3, v: &[f64], j: &[f64], jdot: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|mu| {
            let mut acc = jdot[mu];
            for nu in 0..n {
                for rho in 0..n {
                    acc += gamma.get(mu, nu, rho) * v[nu] * j[rho];
                }
            }
            acc
        })
        .collect()
}

/// Solves the geodesic deviation equation along `trajectory`.
///
/// The covariant form `D²J/dτ² + R(J, Θ̇)Θ̇ = 0` is integrated as the
/// linearised geodesic equation in coordinates, jointly with the host
/// geodesic, so the connection is evaluated at exactly the integrator's
/// stage points. Output is sampled at the trajectory's `τ` values.
pub fn integrate_jlc<F: MetricField + ?Sized>(
    field: &F,
    trajectory: &GeodesicTrajectory,
    j0: &[f64],
    dj0: &[f64],
    options: &FlowOptions,
) -> Result<JacobiField> {
    let n = field.dim();
    if j0.len() != n || dj0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: j0.len().min(dj0.len()),
        });
    }
    let start = &trajectory.states[0];
    let curvature_failed = |tau: f64, e: Error| Error::CurvatureEvaluationFailed {
        tau,
        reason: e.to_string(),
    };
    let gamma0 = geometry::christoffel(field, &start.theta, options.backend).map_err(|e| curvature_failed(start.tau, e))?;
    // J̇(0) = DJ(0) − Γ(v, J)
    let mut jdot0 = dj0.to_vec();
    for (mu, slot) in jdot0.iter_mut().enumerate() {
        for nu in 0..n {
            for rho in 0..n {
                *slot -= gamma0.get(mu, nu, rho) * start.velocity[nu] * j0[rho];
            }
        }
    }
    let y0: Vec<f64> = start
        .theta
        .iter()
        .chain(&start.velocity)
        .chain(j0)
        .chain(&jdot0)
        .copied()
        .collect();
    let grid = trajectory.taus();
    let t_end = *grid.last().unwrap();
    let system = JlcSystem {
        field,
        backend: options.backend,
        n,
    };
    let (taus, ys) = if grid.len() > 1 {
        let (taus, ys, _) = run_sampled(&system, start.tau, &y0, t_end, &options.control, Some(&grid)).map_err(
            |e| match e {
                Error::DomainExit { tau } => curvature_failed(tau, Error::DomainExit { tau }),
                Error::AnalyticUnavailable => curvature_failed(start.tau, e),
                other => other,
            },
        )?;
        (taus, ys)
    } else {
        (vec![start.tau], vec![y0])
    };

    let mut out = JacobiField {
        taus: taus.clone(),
        host: Vec::with_capacity(taus.len()),
        j: Vec::with_capacity(taus.len()),
        dj: Vec::with_capacity(taus.len()),
        intensity: Vec::with_capacity(taus.len()),
        j0: j0.to_vec(),
        dj0: dj0.to_vec(),
        host_deviation: 0.0,
    };
    for (k, (t, y)) in taus.iter().zip(&ys).enumerate() {
        let (theta, v, j, jdot) = (&y[..n], &y[n..2 * n], &y[2 * n..3 * n], &y[3 * n..]);
        let g = field.metric(theta).map_err(|e| curvature_failed(*t, e))?;
        let gamma = geometry::christoffel(field, theta, options.backend).map_err(|e| curvature_failed(*t, e))?;
        out.dj.push(covariant(&gamma, v, j, jdot));
        out.intensity.push(geometry::metric_inner(&g, j, j).max(0.0).sqrt());
        out.j.push(j.to_vec());
        let reference = &trajectory.states[k];
        let dev = reference
            .theta
            .iter()
            .zip(theta)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        out.host_deviation = out.host_deviation.max(dev);
        out.host.push(GeodesicState {
            tau: *t,
            theta: theta.to_vec(),
            velocity: v.to_vec(),
        });
    }
    Ok(out)
}

/// `J(τ) = ω₀ sinh(√−K τ)/√−K`, the deviation on a space of constant `K < 0`.
pub fn isotropic_jacobi_solution(k: f64, omega0: f64, tau: f64) -> Result<f64> {
    if !(k < 0.0) {
        return Err(Error::NonNegativeK(k));
    }
    let s = (-k).sqrt();
    Ok(omega0 * (s * tau).sinh() / s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    /// Least-squares slope of `ln ‖J‖` on the window.
    pub lambda_j: f64,
    pub r_squared: f64,
    /// `exp(intercept)` of the fit, i.e. the measured amplitude of `‖J‖`.
    pub prefactor: f64,
    /// `(1/τ) ln(‖J(τ)‖/‖J(0)‖)` at the window end, when `‖J(0)‖ > 0`.
    pub ratio_form: Option<f64>,
    pub samples: usize,
}

/// Exponential growth rate of an intensity series over `window`.
pub fn lyapunov_estimate(taus: &[f64], intensity: &[f64], window: [f64; 2]) -> Result<LyapunovEstimate> {
    let idx = fit::window_indices(taus, window);
    if idx.len() < fit::MIN_FIT_SAMPLES {
        return Err(Error::WindowTooShort {
            samples: idx.len(),
            required: fit::MIN_FIT_SAMPLES,
        });
    }
    if let Some(&i) = idx.iter().find(|&&i| !(intensity[i] > 0.0)) {
        return Err(Error::NonPositiveIntensity { tau: taus[i] });
    }
    let x: Vec<f64> = idx.iter().map(|&i| taus[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| intensity[i].ln()).collect();
    let LinearFit {
        slope,
        intercept,
        r_squared,
        samples,
    } = fit::linear_fit(&x, &y)?;
    let last = *idx.last().unwrap();
    let ratio_form = (intensity[0] > 0.0 && taus[last] > taus[0])
        .then(|| (intensity[last] / intensity[0]).ln() / (taus[last] - taus[0]));
    Ok(LyapunovEstimate {
        lambda_j: slope,
        r_squared,
        prefactor: intercept.exp(),
        ratio_form,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures::{Euclidean, HyperbolicPlane};
    use crate::models::StatisticalModel;

    #[test]
    fn closed_form_values() {
        let p = ClosedFormGeodesicParams::new(1.0, 1.0, 0.0).unwrap();
        let (mu, s) = closed_form_geodesic(&p, 0.0);
        assert!((mu - 4.0 / 9.0).abs() < 1e-15);
        assert!((s - 8.0 / 9.0).abs() < 1e-15);
        let (mu, s) = closed_form_geodesic(&p, 40.0);
        assert!((mu - 4.0).abs() < 1e-12 && s < 1e-15);
        let r = closed_form_residual(&p, 1.3);
        assert!(r[0].abs() < 1e-9 && r[1].abs() < 1e-9);
        assert!(ClosedFormGeodesicParams::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_velocity_matches_difference() {
        let p = ClosedFormGeodesicParams::new(1.3, 0.7, 0.2).unwrap();
        let h = 1e-6;
        let (a, b) = closed_form_geodesic(&p, 2.0 + h);
        let (c, d) = closed_form_geodesic(&p, 2.0 - h);
        let (dm, ds) = closed_form_velocity(&p, 2.0);
        assert!((dm - (a - c) / (2.0 * h)).abs() < 1e-8);
        assert!((ds - (b - d) / (2.0 * h)).abs() < 1e-8);
    }

    #[test]
    fn geodesic_follows_closed_form() {
        let p = ClosedFormGeodesicParams::new(1.0, 1.0, 0.0).unwrap();
        let m = StatisticalModel::gaussian_product(1).unwrap();
        let init = closed_form_initial_state(&p, 3, 0.0);
        let traj = integrate_geodesic(&m, &init, 5.0, &FlowOptions::default().with_output_step(0.1)).unwrap();
        assert_eq!(traj.states.len(), 51);
        for s in &traj.states {
            let (mu, sigma) = closed_form_geodesic(&p, s.tau);
            assert!((s.theta[0] - mu).abs() < 1e-6);
            assert!((s.theta[5] - sigma).abs() < 1e-6);
        }
        assert!(traj.kinetic_drift < 1e-8);
    }

    #[test]
    fn zero_velocity_stays_put() {
        let m = StatisticalModel::correlated_gaussian(0.3).unwrap();
        let init = GeodesicState {
            tau: 0.0,
            theta: vec![0.1, 1.0, 0.2, 2.0],
            velocity: vec![0.0; 4],
        };
        let traj = integrate_geodesic(&m, &init, 3.0, &FlowOptions::default()).unwrap();
        assert_eq!(traj.last().theta, init.theta);
    }

    #[test]
    fn domain_exit_is_reported() {
        let m = StatisticalModel::gaussian_product(1).unwrap();
        let init = GeodesicState {
            tau: 0.0,
            theta: vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
            velocity: vec![0.0, -5.0, 0.0, 0.0, 0.0, 0.0],
        };
        // σ(τ) = exp(−5τ) reaches 1e−6 near τ ≈ 2.76
        let err = integrate_geodesic(&m, &init, 10.0, &FlowOptions::default()).unwrap_err();
        match err {
            Error::DomainExit { tau } => assert!((tau - 2.763).abs() < 0.01, "{tau}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flat_jacobi_field_is_linear() {
        let e = Euclidean::new(2);
        let init = GeodesicState {
            tau: 0.0,
            theta: vec![0.0, 0.0],
            velocity: vec![1.0, 0.5],
        };
        let opts = FlowOptions::default().with_output_step(0.5);
        let traj = integrate_geodesic(&e, &init, 4.0, &opts).unwrap();
        let jf = integrate_jlc(&e, &traj, &[0.0, 0.0], &[0.3, -0.2], &opts).unwrap();
        for (t, j) in jf.taus.iter().zip(&jf.j) {
            assert!((j[0] - 0.3 * t).abs() < 1e-12 && (j[1] + 0.2 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_curvature_jacobi_field_is_sinh() {
        let k = -1.0;
        let hp = HyperbolicPlane::new(k).unwrap();
        let init = GeodesicState {
            tau: 0.0,
            theta: vec![0.0, 1.0],
            velocity: vec![0.0, 1.0],
        };
        let opts = FlowOptions::default().with_output_step(0.05);
        let traj = integrate_geodesic(&hp, &init, 5.0, &opts).unwrap();
        let jf = integrate_jlc(&hp, &traj, &[0.0, 0.0], &[1.0, 0.0], &opts).unwrap();
        for (t, i) in jf.taus.iter().zip(&jf.intensity).skip(1) {
            let exact = isotropic_jacobi_solution(k, 1.0, *t).unwrap();
            assert!(((i - exact) / exact).abs() < 1e-6, "t={t}");
        }
        let at1 = jf.taus.iter().position(|t| (t - 1.0).abs() < 1e-12).unwrap();
        assert!((jf.intensity[at1] - 1.1752011936).abs() < 1e-6);
    }

    #[test]
    fn isotropic_solution_values() {
        assert!((isotropic_jacobi_solution(-4.0, 1.0, 1.0).unwrap() - 2f64.sinh() / 2.0).abs() < 1e-15);
        assert_eq!(isotropic_jacobi_solution(-2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(isotropic_jacobi_solution(0.0, 1.0, 1.0), Err(Error::NonNegativeK(0.0)));
    }

    #[test]
    fn lyapunov_on_exact_exponential() {
        let t = uniform_grid(0.0, 10.0, 0.01);
        let y: Vec<f64> = t.iter().map(|t| (2.0 * t).exp()).collect();
        let est = lyapunov_estimate(&t, &y, [5.0, 10.0]).unwrap();
        assert!((est.lambda_j - 2.0).abs() < 1e-10);
        assert!((est.r_squared - 1.0).abs() < 1e-12);
        assert!((est.ratio_form.unwrap() - 2.0).abs() < 1e-10);
        let s: Vec<f64> = t.iter().map(|t| t.sinh()).collect();
        let est = lyapunov_estimate(&t, &s, [5.0, 10.0]).unwrap();
        assert!((est.lambda_j - 1.0).abs() < 0.01);
        assert!(est.ratio_form.is_none());
    }

    #[test]
    fn lyapunov_rejects_bad_windows() {
        let t = uniform_grid(0.0, 1.0, 0.1);
        let y = vec![1.0; t.len()];
        assert!(matches!(lyapunov_estimate(&t, &y, [0.0, 0.5]), Err(Error::WindowTooShort { .. })));
        let mut z = vec![1.0; t.len()];
        z[3] = 0.0;
        assert!(matches!(lyapunov_estimate(&t, &z, [0.0, 1.0]), Err(Error::NonPositiveIntensity { .. })));
    }

    #[test]
    fn grid_ends_on_target() {
        let g = uniform_grid(0.0, 1.0, 0.3);
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        let g = uniform_grid(0.0, 1.0, 0.25);
        assert_eq!(g.len(), 5);
    }
}
