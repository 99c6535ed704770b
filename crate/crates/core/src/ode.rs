//! Adaptive Dormand-Prince 5(4) integrator with continuous (dense) output.
//!
//! Coefficients and the fourth-order continuous extension follow Hairer,
//! Nørsett & Wanner, *Solving Ordinary Differential Equations I*, §II.5/II.6.

use crate::error::{Error, Result};

/// Tolerances and step limits for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            initial_step: None,
            max_step: f64::INFINITY,
            min_step: 1e-13,
            max_steps: 2_000_000,
        }
    }
}

/// Right-hand side `dy/dt = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

impl<F> OdeSystem for (usize, F)
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    fn dim(&self) -> usize {
        self.0
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        (self.1)(t, y, dy)
    }
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    /// Derivative at `t1` (FSAL stage), handy for Hermite records.
    pub dy1: Vec<f64>,
    rcont: [Vec<f64>; 5],
}

impl DenseStep {
    /// Interpolated state at `t` in `[t0, t1]`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let h = self.t1 - self.t0;
        let s = if h == 0.0 { 1.0 } else { (t - self.t0) / h };
        let s1 = 1.0 - s;
        (0..self.y0.len())
            .map(|i| {
                self.rcont[0][i]
                    + s * (self.rcont[1][i]
                        + s1 * (self.rcont[2][i] + s * (self.rcont[3][i] + s1 * self.rcont[4][i])))
            })
            .collect()
    }
}

/// Result of a run: either the full span or an early stop requested by the observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Completed { t: f64 },
    Stopped { t: f64 },
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..out.len() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

/// Integrate from `t0` to `t_end` (which may lie before `t0`).
///
/// `observer` is called for each accepted step; returning `Ok(false)` stops
/// the run. A failing right-hand side (for instance a stage point outside the
/// model domain) rejects the trial step and halves `h`; if that drives the
/// step below `min_step`, the run ends with [`Error::DomainExit`].
pub fn integrate<S, O>(
    system: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    control: &StepControl,
    mut observer: O,
) -> Result<Outcome>
where
    S: OdeSystem + ?Sized,
    O: FnMut(&DenseStep) -> Result<bool>,
{
    let n = system.dim();
    if y0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y0.len(),
        });
    }
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    if span == 0.0 {
        return Ok(Outcome::Completed { t: t0 });
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    system.rhs(t, &y, &mut k1)?;
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];

    let mut h = control
        .initial_step
        .unwrap_or_else(|| initial_step(&y, &k1, control, span))
        .min(control.max_step)
        .min(span);
    let mut steps = 0usize;
    let mut fac_old: f64 = 1e-4;

    loop {
        if steps >= control.max_steps {
            return Err(Error::TooManySteps { tau: t });
        }
        let remaining = (t_end - t).abs();
        if remaining <= 1e-14 * span.max(1.0) {
            return Ok(Outcome::Completed { t });
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = dir * h;

        let stages = (|| -> Result<()> {
            axpy(&mut ytmp, &y, hs, &[(A21, &k1)]);
            system.rhs(t + C2 * hs, &ytmp, &mut k2)?;
            axpy(&mut ytmp, &y, hs, &[(A31, &k1), (A32, &k2)]);
            system.rhs(t + C3 * hs, &ytmp, &mut k3)?;
            axpy(&mut ytmp, &y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            system.rhs(t + C4 * hs, &ytmp, &mut k4)?;
            axpy(
                &mut ytmp,
                &y,
                hs,
                &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
            );
            system.rhs(t + C5 * hs, &ytmp, &mut k5)?;
            axpy(
                &mut ytmp,
                &y,
                hs,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            );
            system.rhs(t + hs, &ytmp, &mut k6)?;
            axpy(
                &mut ynew,
                &y,
                hs,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            system.rhs(t + hs, &ynew, &mut k7)?;
            Ok(())
        })();

        if let Err(e) = stages {
            match e {
                Error::Domain(_) | Error::SingularMetric | Error::BoundaryTooClose { .. } => {
                    h *= 0.5;
                    if h < control.min_step {
                        return Err(Error::DomainExit { tau: t });
                    }
                    continue;
                }
                other => return Err(other),
            }
        }

        let mut err = 0.0;
        for i in 0..n {
            let e = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = control.atol + control.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        steps += 1;

        if !err.is_finite() {
            h *= 0.2;
            if h < control.min_step {
                return Err(Error::StepUnderflow { tau: t, step: h });
            }
            continue;
        }

        // Lund-stabilised step-size controller.
        let beta = 0.04;
        let expo1 = 0.2 - beta * 0.75;
        let fac11 = err.powf(expo1);
        let mut fac = fac11 / fac_old.powf(beta) / 0.9;
        fac = fac.clamp(0.1, 5.0);
        let hnew = h / fac;

        if err <= 1.0 {
            fac_old = err.max(1e-4);
            let mut rcont = [
                y.clone(),
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
            ];
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = hs * k1[i] - ydiff;
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - hs * k7[i] - bspl;
                rcont[4][i] = hs
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let t_next = if last { t_end } else { t + hs };
            let step = DenseStep {
                t0: t,
                t1: t_next,
                y0: y.clone(),
                y1: ynew.clone(),
                dy1: k7.clone(),
                rcont,
            };
            let keep_going = observer(&step)?;
            t = t_next;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            if !keep_going {
                return Ok(Outcome::Stopped { t });
            }
            if last {
                return Ok(Outcome::Completed { t });
            }
            h = hnew.min(control.max_step);
        } else {
            h /= (fac11 / 0.9).min(5.0);
        }
        if h < control.min_step {
            return Err(Error::StepUnderflow { tau: t, step: h });
        }
    }
}

fn initial_step(y: &[f64], dy: &[f64], control: &StepControl, span: f64) -> f64 {
    let n = y.len() as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (yi, fi) in y.iter().zip(dy) {
        let sc = control.atol + control.rtol * yi.abs();
        d0 += (yi / sc).powi(2);
        d1 += (fi / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(span).max(1e-10)
}

/// Samples the solution at every requested time in `grid` (ascending in the
/// direction of integration, starting at `t0`).
pub fn integrate_on_grid<S>(
    system: &S,
    y0: &[f64],
    grid: &[f64],
    control: &StepControl,
) -> Result<Vec<Vec<f64>>>
where
    S: OdeSystem + ?Sized,
{
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let t0 = grid[0];
    let t_end = *grid.last().unwrap();
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0.to_vec());
    let mut next = 1usize;
    let forward = t_end >= t0;
    integrate(system, t0, y0, t_end, control, |step| {
        while next < grid.len() {
            let tg = grid[next];
            let inside = if forward {
                tg <= step.t1
            } else {
                tg >= step.t1
            };
            if !inside {
                break;
            }
            if tg == step.t1 {
                out.push(step.y1.clone());
            } else {
                out.push(step.eval(tg));
            }
            next += 1;
        }
        Ok(true)
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator() -> (usize, impl Fn(f64, &[f64], &mut [f64]) -> Result<()>) {
        (2, |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        })
    }

    #[test]
    fn harmonic_oscillator_matches_exact_solution() {
        let sys = oscillator();
        let grid: Vec<f64> = (0..=100).map(|k| 0.1 * k as f64).collect();
        let ys = integrate_on_grid(&sys, &[1.0, 0.0], &grid, &StepControl::default()).unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-9, "t={t}");
            assert!((y[1] + t.sin()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn dense_output_is_accurate_between_steps() {
        let sys = oscillator();
        let control = StepControl {
            rtol: 1e-8,
            ..Default::default()
        };
        let mut worst: f64 = 0.0;
        integrate(&sys, 0.0, &[1.0, 0.0], 10.0, &control, |s| {
            for k in 1..10 {
                let t = s.t0 + (s.t1 - s.t0) * k as f64 / 10.0;
                worst = worst.max((s.eval(t)[0] - t.cos()).abs());
            }
            Ok(true)
        })
        .unwrap();
        assert!(worst < 1e-7, "dense output error {worst}");
    }

    #[test]
    fn backward_integration() {
        let sys = (1usize, |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[0];
            Ok(())
        });
        let ys = integrate_on_grid(&sys, &[1.0], &[0.0, -1.0, -2.0], &StepControl::default()).unwrap();
        assert!((ys[2][0] - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn observer_can_stop_early() {
        let sys = oscillator();
        let out = integrate(&sys, 0.0, &[1.0, 0.0], 10.0, &StepControl::default(), |s| {
            Ok(s.t1 < 1.0)
        })
        .unwrap();
        match out {
            Outcome::Stopped { t } => assert!(t >= 1.0 && t < 2.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn failing_rhs_becomes_domain_exit() {
        let sys = (1usize, |_t: f64, y: &[f64], dy: &mut [f64]| {
            if y[0] <= 0.0 {
                return Err(Error::Domain("negative".into()));
            }
            dy[0] = -1.0;
            Ok(())
        });
        let err = integrate(&sys, 0.0, &[1.0], 5.0, &StepControl::default(), |_| Ok(true)).unwrap_err();
        match err {
            Error::DomainExit { tau } => assert!((tau - 1.0).abs() < 1e-6),
            other => panic!("unexpected {other:?}"),
        }
    }
}
