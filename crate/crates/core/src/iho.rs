//! Inverted harmonic oscillators as geodesic flow of the Jacobi metric
//! `(1 − Φ) δ` at energy `E = 1`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dynamics::{self, fmt_num, FlowOptions, GeodesicState, GeodesicTrajectory};
use crate::error::{Error, Result};
use crate::models::{potential, StatisticalModel};
use crate::quadrature::GaussLegendre;

/// Which exact solution `newtonian_reference` returns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Branch {
    /// `θ_j = Ξ_j e^{ω_j τ}`.
    Growing,
    /// `θ_j = Ξ_j e^{−ω_j τ}`.
    Decaying,
    /// `θ_j = Ξ_j cosh(ω_j τ) + (v_j/ω_j) sinh(ω_j τ)`; free motion when `ω_j = 0`.
    Velocity(Vec<f64>),
}

/// Time-stamped oscillator positions and velocities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonianTrajectory {
    pub taus: Vec<f64>,
    pub thetas: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

impl NewtonianTrajectory {
    /// Same column layout as geodesic trajectories.
    pub fn to_csv(&self) -> String {
        let d = self.thetas.first().map_or(0, Vec::len);
        let mut out = String::from("tau");
        for i in 0..d {
            let _ = write!(out, ",theta_{i}");
        }
        for i in 0..d {
            let _ = write!(out, ",vel_{i}");
        }
        out.push('\n');
        for k in 0..self.taus.len() {
            out.push_str(&fmt_num(self.taus[k]));
            for v in self.thetas[k].iter().chain(&self.velocities[k]) {
                out.push(',');
                out.push_str(&fmt_num(*v));
            }
            out.push('\n');
        }
        out
    }

    /// Largest `|θ_a − θ_b| / max(1, |θ_b|)` against `other` sampled at the same times.
    pub fn max_relative_gap(&self, other: &NewtonianTrajectory) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, b) in self.thetas.iter().zip(&other.thetas) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs() / y.abs().max(1.0));
            }
        }
        worst
    }
}

fn reference_component(w: f64, xi: f64, branch: &Branch, j: usize, t: f64) -> (f64, f64, f64) {
    match branch {
        Branch::Growing => {
            let e = (w * t).exp();
            (xi * e, w * xi * e, w * w * xi * e)
        }
        Branch::Decaying => {
            let e = (-w * t).exp();
            (xi * e, -w * xi * e, w * w * xi * e)
        }
        Branch::Velocity(v) => {
            let v = v[j];
            if w == 0.0 {
                (xi + v * t, v, 0.0)
            } else {
                let (c, s) = ((w * t).cosh(), (w * t).sinh());
                let th = xi * c + v / w * s;
                (th, xi * w * s + v * c, w * w * th)
            }
        }
    }
}

/// Exact solutions of `θ̈_j = ω_j² θ_j` on `taus`.
pub fn newtonian_reference(frequencies: &[f64], xi: &[f64], taus: &[f64], branch: &Branch) -> Result<NewtonianTrajectory> {
    let n = frequencies.len();
    if xi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: xi.len(),
        });
    }
    if let Branch::Velocity(v) = branch {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    if xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("amplitudes must be finite".into()));
    }
    let mut thetas = Vec::with_capacity(taus.len());
    let mut velocities = Vec::with_capacity(taus.len());
    for &t in taus {
        let parts: Vec<(f64, f64, f64)> = (0..n)
            .map(|j| reference_component(frequencies[j], xi[j], branch, j, t))
            .collect();
        thetas.push(parts.iter().map(|p| p.0).collect());
        velocities.push(parts.iter().map(|p| p.1).collect());
    }
    Ok(NewtonianTrajectory {
        taus: taus.to_vec(),
        thetas,
        velocities,
    })
}

/// Largest `|θ̈ − ω²θ|` of the reference solution, with `θ̈` in closed form.
pub fn newtonian_residual(frequencies: &[f64], xi: &[f64], taus: &[f64], branch: &Branch) -> f64 {
    let mut worst: f64 = 0.0;
    for &t in taus {
        for j in 0..frequencies.len() {
            let (th, _, acc) = reference_component(frequencies[j], xi[j], branch, j, t);
            worst = worst.max((acc - frequencies[j].powi(2) * th).abs() / th.abs().max(1.0));
        }
    }
    worst
}

/// Scalar curvature of the two-oscillator Jacobi metric in closed form.
pub fn ricci_scalar_iho_2set(omega1: f64, omega2: f64, theta1: f64, theta2: f64) -> f64 {
    let (w1, w2) = (omega1 * omega1, omega2 * omega2);
    let (t1, t2) = (theta1 * theta1, theta2 * theta2);
    let num = 4.0 * (t1 * w1 * w1 + t2 * w2 * w2) - 4.0 * (t1 + t2) * w1 * w2 - 8.0 * (w1 + w2);
    num / (t1 * w1 + t2 * w2 + 2.0).powi(3)
}

/// Closed-form `W_{1212}` for two oscillators of equal frequency.
pub fn weyl_1212_iho(omega: f64, theta1: f64, theta2: f64) -> f64 {
    let w2 = omega * omega;
    let (t1, t2) = (theta1 * theta1, theta2 * theta2);
    let num = 8.0 * w2 * w2 * (t1 + t2) + 2.0 * w2.powi(3) * (t1 * t1 + t2 * t2) + 4.0 * w2.powi(3) * t1 * t2;
    num / ((t1 + t2) * w2 + 2.0).powi(3)
}

fn conformal_factor(frequencies: &[f64], theta: &[f64]) -> f64 {
    1.0 - potential(frequencies, theta)
}

fn frequencies_of(model: &StatisticalModel) -> Result<&[f64]> {
    match model {
        StatisticalModel::Iho { frequencies } => Ok(frequencies),
        _ => Err(Error::InvalidArgument("expected the oscillator model".into())),
    }
}

/// Rescales a Newtonian velocity to energy `E = 1` keeping its direction.
pub fn normalize_energy(frequencies: &[f64], theta: &[f64], velocity: &[f64]) -> Result<Vec<f64>> {
    let speed2: f64 = velocity.iter().map(|v| v * v).sum();
    if speed2 == 0.0 {
        return Err(Error::InvalidArgument("launch direction must be nonzero".into()));
    }
    let target = 2.0 * conformal_factor(frequencies, theta);
    let s = (target / speed2).sqrt();
    Ok(velocity.iter().map(|v| v * s).collect())
}

/// Geodesic initial state matching a Newtonian state of energy 1:
/// `θ'(0) = θ̇(0) / (1 − Φ)`, so that `g(θ', θ') = 2` and `ds = (1 − Φ) dt`.
pub fn jacobi_launch(model: &StatisticalModel, theta: &[f64], newtonian_velocity: &[f64]) -> Result<GeodesicState> {
    let freqs = frequencies_of(model)?;
    let f = conformal_factor(freqs, theta);
    let energy = 0.5 * newtonian_velocity.iter().map(|v| v * v).sum::<f64>() + potential(freqs, theta);
    if (energy - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "Newtonian state has energy {energy}, the Jacobi metric is built for E = 1"
        )));
    }
    Ok(GeodesicState {
        tau: 0.0,
        theta: theta.to_vec(),
        velocity: newtonian_velocity.iter().map(|v| v / f).collect(),
    })
}

/// Cumulative `∫ rate(θ(s)) ds` over samples, with `θ` between samples
/// interpolated by cubic Hermite polynomials and each panel integrated by
/// Gauss-Legendre quadrature.
fn hermite_cumulative(ss: &[f64], thetas: &[Vec<f64>], dthetas: &[Vec<f64>], rate: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let rule = GaussLegendre::new(8);
    let n = thetas.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(ss.len());
    out.push(0.0);
    let mut acc = 0.0;
    let mut buf = vec![0.0; n];
    for k in 1..ss.len() {
        let (s0, s1) = (ss[k - 1], ss[k]);
        let h = s1 - s0;
        acc += rule.integrate(s0, s1, |s| {
            let u = (s - s0) / h;
            let (u2, u3) = (u * u, u * u * u);
            let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
            let h10 = u3 - 2.0 * u2 + u;
            let h01 = -2.0 * u3 + 3.0 * u2;
            let h11 = u3 - u2;
            for i in 0..n {
                buf[i] = h00 * thetas[k - 1][i]
                    + h10 * h * dthetas[k - 1][i]
                    + h01 * thetas[k][i]
                    + h11 * h * dthetas[k][i];
            }
            rate(&buf)
        });
        out.push(acc);
    }
    out
}

/// Converts a Jacobi-metric geodesic to physical time.
///
/// With energy 1 the Newtonian speed satisfies `½|θ̇|² = 1 − Φ`, which gives
/// `dt/ds = √(κ/2) / (1 − Φ)` for a geodesic of constant `κ = g(θ', θ')`;
/// for the launch of [`jacobi_launch`] (`κ = 2`) this is `ds = (1 − Φ) dt`.
pub fn maupertuis_reparametrize(model: &StatisticalModel, trajectory: &GeodesicTrajectory) -> Result<NewtonianTrajectory> {
    let freqs = frequencies_of(model)?;
    let states = &trajectory.states;
    let first = &states[0];
    let f0 = conformal_factor(freqs, &first.theta);
    let kappa = f0 * first.velocity.iter().map(|v| v * v).sum::<f64>();
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument("geodesic has zero speed".into()));
    }
    let root = (kappa / 2.0).sqrt();
    let ss: Vec<f64> = states.iter().map(|s| s.tau).collect();
    let thetas: Vec<Vec<f64>> = states.iter().map(|s| s.theta.clone()).collect();
    let dthetas: Vec<Vec<f64>> = states.iter().map(|s| s.velocity.clone()).collect();
    let ts = hermite_cumulative(&ss, &thetas, &dthetas, |th| root / conformal_factor(freqs, th));
    let velocities = states
        .iter()
        .map(|s| {
            let f = conformal_factor(freqs, &s.theta);
            s.velocity.iter().map(|v| v * f / root).collect()
        })
        .collect();
    Ok(NewtonianTrajectory {
        taus: ts.iter().map(|t| t + first.tau).collect(),
        thetas,
        velocities,
    })
}

/// Inverse of [`maupertuis_reparametrize`] for energy-1 Newtonian samples:
/// `s = ∫ (1 − Φ) dt`, `θ' = θ̇ / (1 − Φ)`.
pub fn newtonian_to_jacobi(model: &StatisticalModel, trajectory: &NewtonianTrajectory) -> Result<GeodesicTrajectory> {
    let freqs = frequencies_of(model)?;
    let ss = hermite_cumulative(&trajectory.taus, &trajectory.thetas, &trajectory.velocities, |th| {
        conformal_factor(freqs, th)
    });
    let states = trajectory
        .thetas
        .iter()
        .zip(&trajectory.velocities)
        .zip(&ss)
        .map(|((th, v), s)| {
            let f = conformal_factor(freqs, th);
            GeodesicState {
                tau: s + trajectory.taus[0],
                theta: th.clone(),
                velocity: v.iter().map(|x| x / f).collect(),
            }
        })
        .collect();
    Ok(GeodesicTrajectory {
        states,
        integrator: dynamics::IntegratorInfo {
            name: "reparametrized".into(),
            rtol: 0.0,
            atol: 0.0,
            accepted_steps: 0,
        },
        model_id: model.id(),
        kinetic_drift: 0.0,
    })
}

/// Newtonian motion from `theta0` with velocity `velocity0` (energy 1)
/// obtained as a Jacobi-metric geodesic, reparametrized to physical time and
/// integrated until `t_end` is covered.
pub fn newtonian_via_geodesic(
    model: &StatisticalModel,
    theta0: &[f64],
    velocity0: &[f64],
    t_end: f64,
    options: &FlowOptions,
) -> Result<NewtonianTrajectory> {
    let init = jacobi_launch(model, theta0, velocity0)?;
    let freqs = frequencies_of(model)?;
    let mut s_end = t_end * conformal_factor(freqs, theta0).max(1.0);
    for _ in 0..64 {
        let traj = dynamics::integrate_geodesic(model, &init, s_end, options)?;
        let newton = maupertuis_reparametrize(model, &traj)?;
        if newton.taus.last().copied().unwrap_or(0.0) >= t_end {
            return Ok(newton);
        }
        s_end *= 2.0;
    }
    Err(Error::InvalidArgument("physical time span could not be reached".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::uniform_grid;
    use crate::geometry::{self, Backend};

    #[test]
    fn reference_values() {
        let r = newtonian_reference(&[1.0], &[1.0], &[1.0], &Branch::Growing).unwrap();
        assert!((r.thetas[0][0] - std::f64::consts::E).abs() < 1e-15);
        let free = newtonian_reference(&[0.0], &[2.0], &[0.0, 3.0], &Branch::Velocity(vec![0.5])).unwrap();
        assert_eq!(free.thetas[1][0], 3.5);
        let ts = uniform_grid(0.0, 3.0, 0.1);
        assert!(newtonian_residual(&[0.7, 2.0], &[1.0, -0.3], &ts, &Branch::Velocity(vec![0.2, 1.0])) < 1e-14);
    }

    #[test]
    fn closed_form_curvature_values() {
        assert!((ricci_scalar_iho_2set(1.0, 1.0, 0.0, 0.0) + 2.0).abs() < 1e-15);
        assert!((weyl_1212_iho(1.0, 1.0, 0.0) - 10.0 / 27.0).abs() < 1e-15);
        assert_eq!(weyl_1212_iho(0.0, 0.4, 1.0), 0.0);
        assert_eq!(weyl_1212_iho(1.0, 0.0, 0.0), 0.0);
        // equal frequencies keep the scalar negative
        for t in [0.0, 0.5, 3.0, 10.0] {
            assert!(ricci_scalar_iho_2set(1.3, 1.3, t, -t) < 0.0);
        }
        // a strongly anisotropic pair far out along the stiff axis is positive
        assert!(ricci_scalar_iho_2set(2.0, 0.1, 3.0, 0.0) > 0.0);
    }

    #[test]
    fn closed_form_scalar_matches_engine() {
        let m = StatisticalModel::iho(vec![2.0, 0.1]).unwrap();
        for x in [[1.0, 0.0], [0.3, -2.0], [-1.5, 0.7]] {
            let r = geometry::ricci_scalar(&m, &x, Backend::Analytic).unwrap();
            assert!((r - ricci_scalar_iho_2set(2.0, 0.1, x[0], x[1])).abs() < 1e-10);
        }
    }

    #[test]
    fn flat_potential_reparametrization_is_identity() {
        let m = StatisticalModel::iho(vec![0.0, 0.0]).unwrap();
        let v0 = normalize_energy(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 2.0]).unwrap();
        let init = jacobi_launch(&m, &[0.0, 0.0], &v0).unwrap();
        let traj = dynamics::integrate_geodesic(&m, &init, 2.0, &FlowOptions::default().with_output_step(0.1)).unwrap();
        let newton = maupertuis_reparametrize(&m, &traj).unwrap();
        for (s, t) in traj.taus().iter().zip(&newton.taus) {
            assert!((s - t).abs() < 1e-12);
        }
    }

    #[test]
    fn geodesic_reproduces_newtonian_motion() {
        let freqs = [1.0, 0.5];
        let m = StatisticalModel::iho(freqs.to_vec()).unwrap();
        let theta0 = [0.5, 0.5];
        let v0 = normalize_energy(&freqs, &theta0, &[0.5, 0.25]).unwrap();
        let newton = newtonian_via_geodesic(&m, &theta0, &v0, 3.0, &FlowOptions::default()).unwrap();
        let reference = newtonian_reference(&freqs, &theta0, &newton.taus, &Branch::Velocity(v0.clone())).unwrap();
        assert!(newton.max_relative_gap(&reference) < 1e-7);
    }

    #[test]
    fn round_trip_recovers_time() {
        let freqs = [1.0, 2.0];
        let m = StatisticalModel::iho(freqs.to_vec()).unwrap();
        let v0 = normalize_energy(&freqs, &[0.3, -0.2], &[1.0, 1.0]).unwrap();
        let ts = uniform_grid(0.0, 2.0, 0.002);
        let newton = newtonian_reference(&freqs, &[0.3, -0.2], &ts, &Branch::Velocity(v0)).unwrap();
        let jac = newtonian_to_jacobi(&m, &newton).unwrap();
        let back = maupertuis_reparametrize(&m, &jac).unwrap();
        for (a, b) in back.taus.iter().zip(&ts) {
            assert!((a - b).abs() < 1e-8 * b.max(1.0));
        }
    }

    #[test]
    fn energy_mismatch_is_rejected() {
        let m = StatisticalModel::iho(vec![1.0, 1.0]).unwrap();
        assert!(jacobi_launch(&m, &[1.0, 1.0], &[1.0, 1.0]).is_err());
    }
}
