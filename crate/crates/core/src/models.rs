//! Statistical manifolds: Gaussian product, correlated bivariate Gaussian and
//! the Jacobi metric of uncoupled inverted oscillators.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{MetricField, Tensor3, Tensor4};
use crate::quadrature::{GaussHermite, GaussLegendre};

/// Role of a coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CoordKind {
    Mean,
    Stddev,
    Lagrangian,
}

/// Compact box that standard deviations are restricted to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaBounds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for SigmaBounds {
    fn default() -> Self {
        Self {
            lower: 1e-6,
            upper: 1e6,
        }
    }
}

/// A point of a model's parameter space together with its coordinate tags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterPoint {
    pub coords: Vec<f64>,
    pub labels: Vec<CoordKind>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParameterPoint {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn check(&self) -> Result<()> {
        for (i, &c) in self.coords.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::Domain(format!("coordinate {i} is not finite")));
            }
            if self.labels[i] == CoordKind::Stddev && c <= 0.0 {
                return Err(Error::Domain(format!("standard deviation {i} = {c} must be positive")));
            }
            if c < self.lower[i] || c > self.upper[i] {
                return Err(Error::Domain(format!(
                    "coordinate {i} = {c} outside [{}, {}]",
                    self.lower[i], self.upper[i]
                )));
            }
        }
        Ok(())
    }
}

/// A metric evaluated at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    pub point: Vec<f64>,
    pub components: DMatrix<f64>,
}

impl MetricTensor {
    pub fn dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let g = &self.components;
        (0..g.nrows()).all(|i| (0..i).all(|j| (g[(i, j)] - g[(j, i)]).abs() <= tol))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.components.clone().cholesky().is_some()
    }
}

/// The statistical manifolds supported by the library.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum StatisticalModel {
    /// `3N` independent Gaussian pairs `(μ, σ)`, coordinates ordered
    /// `μ_0, σ_0, μ_1, σ_1, …`.
    GaussianProduct {
        n_particles: usize,
        sigma_bounds: SigmaBounds,
    },
    /// Bivariate Gaussian with fixed correlation `r`, coordinates
    /// `(μ_x, σ_x, μ_y, σ_y)`.
    CorrelatedGaussian { r: f64, sigma_bounds: SigmaBounds },
    /// Jacobi metric `(1 − Φ) δ` with `Φ = −½ Σ ω_j² θ_j²` at energy 1.
    Iho { frequencies: Vec<f64> },
}

impl StatisticalModel {
    pub fn gaussian_product(n_particles: usize) -> Result<Self> {
        if n_particles == 0 {
            return Err(Error::InvalidArgument("n_particles must be positive".into()));
        }
        Ok(Self::GaussianProduct {
            n_particles,
            sigma_bounds: SigmaBounds::default(),
        })
    }

    pub fn correlated_gaussian(r: f64) -> Result<Self> {
        if !(r.abs() < 1.0) {
            return Err(Error::Domain(format!("correlation r = {r} must satisfy |r| < 1")));
        }
        Ok(Self::CorrelatedGaussian {
            r,
            sigma_bounds: SigmaBounds::default(),
        })
    }

    pub fn iho(frequencies: Vec<f64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::InvalidArgument("at least one frequency is required".into()));
        }
        if let Some(w) = frequencies.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidArgument(format!("frequency {w} must be finite and >= 0")));
        }
        Ok(Self::Iho { frequencies })
    }

    pub fn with_sigma_bounds(mut self, bounds: SigmaBounds) -> Self {
        match &mut self {
            Self::GaussianProduct { sigma_bounds, .. } | Self::CorrelatedGaussian { sigma_bounds, .. } => {
                *sigma_bounds = bounds
            }
            Self::Iho { .. } => {}
        }
        self
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        match self {
            Self::GaussianProduct { n_particles, .. } => format!("gaussian_product(N={n_particles})"),
            Self::CorrelatedGaussian { r, .. } => format!("correlated_gaussian(r={r})"),
            Self::Iho { frequencies } => format!("iho(n={})", frequencies.len()),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::GaussianProduct { n_particles, .. } => 6 * n_particles,
            Self::CorrelatedGaussian { .. } => 4,
            Self::Iho { frequencies } => frequencies.len(),
        }
    }

    /// Number of microvariables `X` the density is defined over.
    pub fn micro_dimension(&self) -> Result<usize> {
        match self {
            Self::GaussianProduct { n_particles, .. } => Ok(3 * n_particles),
            Self::CorrelatedGaussian { .. } => Ok(2),
            Self::Iho { .. } => Err(Error::NoDensity("the oscillator Jacobi metric".into())),
        }
    }

    pub fn labels(&self) -> Vec<CoordKind> {
        match self {
            Self::GaussianProduct { .. } | Self::CorrelatedGaussian { .. } => (0..self.dimension())
                .map(|i| if i % 2 == 0 { CoordKind::Mean } else { CoordKind::Stddev })
                .collect(),
            Self::Iho { frequencies } => vec![CoordKind::Lagrangian; frequencies.len()],
        }
    }

    /// Wraps raw coordinates into a checked [`ParameterPoint`].
    pub fn point(&self, coords: &[f64]) -> Result<ParameterPoint> {
        let n = self.dimension();
        if coords.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: coords.len(),
            });
        }
        let labels = self.labels();
        let (lo, hi) = match self {
            Self::GaussianProduct { sigma_bounds, .. } | Self::CorrelatedGaussian { sigma_bounds, .. } => {
                (sigma_bounds.lower, sigma_bounds.upper)
            }
            Self::Iho { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        };
        let lower = labels
            .iter()
            .map(|l| if *l == CoordKind::Stddev { lo } else { f64::NEG_INFINITY })
            .collect();
        let upper = labels
            .iter()
            .map(|l| if *l == CoordKind::Stddev { hi } else { f64::INFINITY })
            .collect();
        let p = ParameterPoint {
            coords: coords.to_vec(),
            labels,
            lower,
            upper,
        };
        p.check()?;
        Ok(p)
    }

    /// Closed-form metric at `point`.
    pub fn metric_at(&self, point: &ParameterPoint) -> Result<MetricTensor> {
        let components = self.metric(&point.coords)?;
        Ok(MetricTensor {
            point: point.coords.clone(),
            components,
        })
    }

    /// Potential `Φ(θ) = −½ Σ ω² θ²` of the oscillator model.
    pub fn potential(&self, theta: &[f64]) -> Result<f64> {
        match self {
            Self::Iho { frequencies } => Ok(potential(frequencies, theta)),
            _ => Err(Error::InvalidArgument("potential is defined for the oscillator model only".into())),
        }
    }

    /// Probability density of the microstate `micro` at `point`.
    pub fn pdf(&self, micro: &[f64], point: &ParameterPoint) -> Result<f64> {
        let m = self.micro_dimension()?;
        if micro.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: micro.len(),
            });
        }
        self.check_domain(&point.coords)?;
        Ok(self.log_pdf(micro, &point.coords).exp())
    }

    fn log_pdf(&self, micro: &[f64], theta: &[f64]) -> f64 {
        match self {
            Self::GaussianProduct { .. } => micro
                .iter()
                .enumerate()
                .map(|(a, &x)| normal_log_pdf(x, theta[2 * a], theta[2 * a + 1]))
                .sum(),
            Self::CorrelatedGaussian { r, .. } => {
                let (mx, sx, my, sy) = (theta[0], theta[1], theta[2], theta[3]);
                let u = (micro[0] - mx) / sx;
                let v = (micro[1] - my) / sy;
                let one_r2 = 1.0 - r * r;
                -(2.0 * PI * sx * sy * one_r2.sqrt()).ln() - (u * u - 2.0 * r * u * v + v * v) / (2.0 * one_r2)
            }
            Self::Iho { .. } => f64::NAN,
        }
    }

    /// Fisher-Rao metric from its defining expectation of score products,
    /// with scores from finite differences of the log-density and the
    /// expectation from Gauss-Hermite quadrature. The result at
    /// `quadrature_order` is compared with `quadrature_order + 10`.
    pub fn fisher_rao_numeric(&self, point: &ParameterPoint, quadrature_order: usize) -> Result<MetricTensor> {
        if quadrature_order < 20 {
            return Err(Error::InvalidArgument("quadrature_order must be at least 20".into()));
        }
        self.check_domain(&point.coords)?;
        let a = self.fisher_rao_at_order(&point.coords, quadrature_order)?;
        let b = self.fisher_rao_at_order(&point.coords, quadrature_order + 10)?;
        let scale = a.amax().max(1.0);
        let difference = (&a - &b).amax();
        if difference > 1e-10 * scale {
            return Err(Error::QuadratureNotConverged {
                order: quadrature_order,
                next_order: quadrature_order + 10,
                difference,
            });
        }
        Ok(MetricTensor {
            point: point.coords.clone(),
            components: b,
        })
    }

    fn fisher_rao_at_order(&self, theta: &[f64], order: usize) -> Result<DMatrix<f64>> {
        let rule = GaussHermite::new(order);
        match self {
            Self::GaussianProduct { n_particles, .. } => {
                let pairs = 3 * n_particles;
                let n = 6 * n_particles;
                let mut g = DMatrix::zeros(n, n);
                // Each pair's score depends on its own microvariable only, so
                // cross-pair blocks factor into products of mean scores.
                let mut mean_scores = Vec::with_capacity(pairs);
                for a in 0..pairs {
                    let (mu, s) = (theta[2 * a], theta[2 * a + 1]);
                    let score = |x: f64| {
                        let f = |p: &[f64]| normal_log_pdf(x, p[0], p[1]);
                        score_fd(&f, &[mu, s], &[1e-3 * s, 1e-3 * s])
                    };
                    let mut block = [[0.0; 2]; 2];
                    let mut mean = [0.0; 2];
                    for i in 0..2 {
                        mean[i] = rule.expect_standard_normal(|z| score(mu + s * z)[i]);
                        for j in 0..2 {
                            block[i][j] = rule.expect_standard_normal(|z| {
                                let sc = score(mu + s * z);
                                sc[i] * sc[j]
                            });
                        }
                    }
                    for i in 0..2 {
                        for j in 0..2 {
                            g[(2 * a + i, 2 * a + j)] = block[i][j];
                        }
                    }
                    mean_scores.push(mean);
                }
                for a in 0..pairs {
                    for b in 0..pairs {
                        if a == b {
                            continue;
                        }
                        for i in 0..2 {
                            for j in 0..2 {
                                g[(2 * a + i, 2 * b + j)] = mean_scores[a][i] * mean_scores[b][j];
                            }
                        }
                    }
                }
                Ok(g)
            }
            Self::CorrelatedGaussian { r, .. } => {
                let (mx, sx, my, sy) = (theta[0], theta[1], theta[2], theta[3]);
                let cov = Matrix2::new(sx * sx, r * sx * sy, r * sx * sy, sy * sy);
                let l = cov.cholesky().ok_or(Error::SingularMetric)?.l();
                let steps = [1e-3 * sx, 1e-3 * sx, 1e-3 * sy, 1e-3 * sy];
                let mut g = DMatrix::zeros(4, 4);
                for i in 0..4 {
                    for j in i..4 {
                        let v = rule.expect_standard_normal_2d(|z1, z2| {
                            let x = mx + l[(0, 0)] * z1;
                            let y = my + l[(1, 0)] * z1 + l[(1, 1)] * z2;
                            let f = |p: &[f64]| self.log_pdf(&[x, y], p);
                            let sc = score_fd(&f, theta, &steps);
                            sc[i] * sc[j]
                        });
                        g[(i, j)] = v;
                        g[(j, i)] = v;
                    }
                }
                Ok(g)
            }
            Self::Iho { .. } => Err(Error::NoDensity("the oscillator Jacobi metric".into())),
        }
    }

    /// Kinetic-energy metric of the oscillator Lagrangian built numerically:
    /// `(E − Φ) ∂²T/∂θ̇_i∂θ̇_j` with `T` and `Φ` recovered from `L = T − Φ`
    /// by differencing. Serves as the independent check of the closed form
    /// for the model that has no density.
    pub fn jacobi_metric_numeric(&self, point: &ParameterPoint) -> Result<MetricTensor> {
        let Self::Iho { frequencies } = self else {
            return Err(Error::InvalidArgument("Jacobi metric is defined for the oscillator model".into()));
        };
        self.check_domain(&point.coords)?;
        let n = frequencies.len();
        let theta = &point.coords;
        let lagrangian = |v: &[f64]| -> f64 {
            let t: f64 = 0.5 * v.iter().map(|x| x * x).sum::<f64>();
            t - potential(frequencies, theta)
        };
        let zero = vec![0.0; n];
        let phi = -lagrangian(&zero);
        let energy = 1.0;
        let h = 1e-3;
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let eval = |si: f64, sj: f64| {
                    let mut v = zero.clone();
                    v[i] += si * h;
                    v[j] += sj * h;
                    lagrangian(&v)
                };
                let d2 = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * h * h);
                g[(i, j)] = (energy - phi) * d2;
            }
        }
        Ok(MetricTensor {
            point: theta.clone(),
            components: g,
        })
    }

    /// Differential entropy relative to a uniform box prior of absolute
    /// width `prior_width` per microvariable, centred on the means:
    /// `S = −∫ P log(P/m)`.
    pub fn relative_entropy(&self, point: &ParameterPoint, prior_width: f64) -> Result<f64> {
        self.relative_entropy_perturbed(point, prior_width, 0.0)
    }

    /// As [`relative_entropy`](Self::relative_entropy) with the first
    /// marginal replaced by `p(z)(1 + ε He₄(z))`, which keeps mass, mean and
    /// variance fixed.
    pub fn relative_entropy_perturbed(&self, point: &ParameterPoint, prior_width: f64, epsilon: f64) -> Result<f64> {
        self.check_domain(&point.coords)?;
        if !(prior_width > 0.0) {
            return Err(Error::InvalidArgument("prior width must be positive".into()));
        }
        let theta = &point.coords;
        let half = 0.5 * prior_width;
        let rule = GaussLegendre::new(12);
        let panels = 400;
        match self {
            Self::GaussianProduct { n_particles, .. } => {
                let sigmas: Vec<f64> = (0..3 * n_particles).map(|a| theta[2 * a + 1]).collect();
                check_clipping(&sigmas, half)?;
                let mut total = 0.0;
                for (a, &s) in sigmas.iter().enumerate() {
                    let eps = if a == 0 { epsilon } else { 0.0 };
                    let density = |z: f64| normal_pdf(z) * (1.0 + eps * hermite4(z)) / s;
                    let zh = half / s;
                    if eps != 0.0 && (-zh..=zh).contains(&3f64.sqrt()) && 1.0 - 6.0 * eps.abs() <= 0.0 {
                        return Err(Error::InvalidArgument("perturbation makes the density negative".into()));
                    }
                    // integrate over z, x = μ + s z
                    total += rule.integrate_composite(-zh, zh, panels, |z| {
                        let p = density(z);
                        if p <= 0.0 {
                            0.0
                        } else {
                            -p * (p * prior_width).ln() * s
                        }
                    });
                }
                Ok(total)
            }
            Self::CorrelatedGaussian { .. } => {
                let (mx, sx, my, sy) = (theta[0], theta[1], theta[2], theta[3]);
                check_clipping(&[sx, sy], half)?;
                let rule = GaussLegendre::new(8);
                let panels = 120;
                let hx = prior_width / panels as f64;
                let hy = prior_width / panels as f64;
                let m = prior_width * prior_width;
                let mut total = 0.0;
                for i in 0..panels {
                    let x0 = mx - half + hx * i as f64;
                    for j in 0..panels {
                        let y0 = my - half + hy * j as f64;
                        total += rule.integrate_2d((x0, x0 + hx), (y0, y0 + hy), |x, y| {
                            let mut p = self.log_pdf(&[x, y], theta).exp();
                            if epsilon != 0.0 {
                                p *= 1.0 + epsilon * hermite4((x - mx) / sx);
                            }
                            if p <= 0.0 {
                                0.0
                            } else {
                                -p * (p * m).ln()
                            }
                        });
                    }
                }
                Ok(total)
            }
            Self::Iho { .. } => Err(Error::NoDensity("the oscillator Jacobi metric".into())),
        }
    }

    /// Quadrature integral of each one-dimensional marginal density.
    pub fn marginal_masses(&self, point: &ParameterPoint) -> Result<Vec<f64>> {
        self.check_domain(&point.coords)?;
        let theta = &point.coords;
        let rule = GaussLegendre::new(12);
        let sigmas: Vec<(f64, f64)> = match self {
            Self::GaussianProduct { n_particles, .. } => {
                (0..3 * n_particles).map(|a| (theta[2 * a], theta[2 * a + 1])).collect()
            }
            Self::CorrelatedGaussian { .. } => vec![(theta[0], theta[1]), (theta[2], theta[3])],
            Self::Iho { .. } => return Err(Error::NoDensity("the oscillator Jacobi metric".into())),
        };
        Ok(sigmas
            .iter()
            .map(|&(mu, s)| {
                rule.integrate_composite(mu - 12.0 * s, mu + 12.0 * s, 200, |x| {
                    normal_log_pdf(x, mu, s).exp()
                })
            })
            .collect())
    }
}

/// Default prior width: twenty standard deviations of the widest marginal.
pub fn default_prior_width(point: &ParameterPoint) -> f64 {
    let widest = point
        .coords
        .iter()
        .zip(&point.labels)
        .filter(|(_, l)| **l == CoordKind::Stddev)
        .map(|(c, _)| *c)
        .fold(0.0, f64::max);
    20.0 * widest
}

fn check_clipping(sigmas: &[f64], half_width: f64) -> Result<()> {
    let clipped_mass: f64 = sigmas
        .iter()
        .map(|s| libm::erfc(half_width / (s * SQRT_2)))
        .sum();
    if clipped_mass > 1e-12 {
        return Err(Error::PriorTooNarrow { clipped_mass });
    }
    Ok(())
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

fn normal_log_pdf(x: f64, mu: f64, s: f64) -> f64 {
    let z = (x - mu) / s;
    -0.5 * z * z - s.ln() - 0.5 * (2.0 * PI).ln()
}

fn hermite4(z: f64) -> f64 {
    let z2 = z * z;
    z2 * z2 - 6.0 * z2 + 3.0
}

pub(crate) fn potential(frequencies: &[f64], theta: &[f64]) -> f64 {
    -0.5 * frequencies.iter().zip(theta).map(|(w, t)| w * w * t * t).sum::<f64>()
}

/// Gradient of `f` by fourth-order central differences with per-coordinate
/// steps `h`.
fn score_fd(f: &dyn Fn(&[f64]) -> f64, p: &[f64], steps: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    let mut q = p.to_vec();
    for k in 0..p.len() {
        let h = steps[k];
        let mut at = |d: f64| {
            q[k] = p[k] + d;
            let v = f(&q);
            q[k] = p[k];
            v
        };
        let (f1, fm1, f2, fm2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
        out[k] = (8.0 * (f1 - fm1) - (f2 - fm2)) / (12.0 * h);
    }
    out
}

/// Entries `c · σ_x^{px} σ_y^{py}` of the correlated metric.
fn correlated_terms(r: f64) -> [(usize, usize, f64, i32, i32); 8] {
    let d = 1.0 - r * r;
    [
        (0, 0, 1.0 / d, -2, 0),
        (1, 1, (2.0 - r * r) / d, -2, 0),
        (0, 2, -r / d, -1, -1),
        (2, 0, -r / d, -1, -1),
        (1, 3, -r * r / d, -1, -1),
        (3, 1, -r * r / d, -1, -1),
        (2, 2, 1.0 / d, 0, -2),
        (3, 3, (2.0 - r * r) / d, 0, -2),
    ]
}

impl MetricField for StatisticalModel {
    fn name(&self) -> String {
        self.id()
    }

    fn dim(&self) -> usize {
        self.dimension()
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        self.point(x).map(|_| ())
    }

    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_domain(x)?;
        let n = self.dimension();
        match self {
            Self::GaussianProduct { n_particles, .. } => {
                let mut g = DMatrix::zeros(n, n);
                for a in 0..3 * n_particles {
                    let s2 = x[2 * a + 1] * x[2 * a + 1];
                    g[(2 * a, 2 * a)] = 1.0 / s2;
                    g[(2 * a + 1, 2 * a + 1)] = 2.0 / s2;
                }
                Ok(g)
            }
            Self::CorrelatedGaussian { r, .. } => {
                let mut g = DMatrix::zeros(4, 4);
                for (i, j, c, px, py) in correlated_terms(*r) {
                    g[(i, j)] = c * x[1].powi(px) * x[3].powi(py);
                }
                Ok(g)
            }
            Self::Iho { frequencies } => {
                let f = 1.0 - potential(frequencies, x);
                Ok(DMatrix::from_diagonal(&DVector::from_element(n, f)))
            }
        }
    }

    fn metric_jacobian(&self, x: &[f64]) -> Result<Tensor3> {
        self.check_domain(x)?;
        let n = self.dimension();
        let mut d = Tensor3::zeros(n);
        match self {
            Self::GaussianProduct { n_particles, .. } => {
                for a in 0..3 * n_particles {
                    let s3 = x[2 * a + 1].powi(3);
                    d.set(2 * a + 1, 2 * a, 2 * a, -2.0 / s3);
                    d.set(2 * a + 1, 2 * a + 1, 2 * a + 1, -4.0 / s3);
                }
            }
            Self::CorrelatedGaussian { r, .. } => {
                let (sx, sy) = (x[1], x[3]);
                for (i, j, c, px, py) in correlated_terms(*r) {
                    if px != 0 {
                        d.set(1, i, j, c * px as f64 * sx.powi(px - 1) * sy.powi(py));
                    }
                    if py != 0 {
                        d.set(3, i, j, c * py as f64 * sx.powi(px) * sy.powi(py - 1));
                    }
                }
            }
            Self::Iho { frequencies } => {
                for k in 0..n {
                    let df = frequencies[k].powi(2) * x[k];
                    for i in 0..n {
                        d.set(k, i, i, df);
                    }
                }
            }
        }
        Ok(d)
    }

    fn metric_hessian(&self, x: &[f64]) -> Result<Tensor4> {
        self.check_domain(x)?;
        let n = self.dimension();
        let mut h = Tensor4::zeros(n);
        match self {
            Self::GaussianProduct { n_particles, .. } => {
                for a in 0..3 * n_particles {
                    let k = 2 * a + 1;
                    let s4 = x[k].powi(4);
                    h.set(k, k, 2 * a, 2 * a, 6.0 / s4);
                    h.set(k, k, k, k, 12.0 / s4);
                }
            }
            Self::CorrelatedGaussian { r, .. } => {
                let (sx, sy) = (x[1], x[3]);
                for (i, j, c, px, py) in correlated_terms(*r) {
                    let (pxf, pyf) = (px as f64, py as f64);
                    h.set(1, 1, i, j, c * pxf * (pxf - 1.0) * sx.powi(px - 2) * sy.powi(py));
                    h.set(3, 3, i, j, c * pyf * (pyf - 1.0) * sx.powi(px) * sy.powi(py - 2));
                    let cross = c * pxf * pyf * sx.powi(px - 1) * sy.powi(py - 1);
                    h.set(1, 3, i, j, cross);
                    h.set(3, 1, i, j, cross);
                }
            }
            Self::Iho { frequencies } => {
                for k in 0..n {
                    for i in 0..n {
                        h.set(k, k, i, i, frequencies[k].powi(2));
                    }
                }
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{self, Backend};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gaussian_pair_metric_block() {
        let m = StatisticalModel::gaussian_product(1).unwrap();
        let p = m.point(&[0.0, 2.0, 1.0, 1.0, -1.0, 3.0]).unwrap();
        let g = m.metric_at(&p).unwrap();
        assert_eq!(g.components[(0, 0)], 0.25);
        assert_eq!(g.components[(1, 1)], 0.5);
        assert!(g.is_symmetric(1e-12) && g.is_positive_definite());
    }

    #[test]
    fn correlated_decouples_at_zero() {
        let m = StatisticalModel::correlated_gaussian(0.0).unwrap();
        let g = m.metric(&[0.3, 1.0, -0.2, 1.0]).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 1.0, 2.0]));
        assert_eq!(g, expected);
    }

    #[test]
    fn iho_metric_at_origin_is_identity() {
        let m = StatisticalModel::iho(vec![1.0, 1.0]).unwrap();
        assert_eq!(m.metric(&[0.0, 0.0]).unwrap(), DMatrix::identity(2, 2));
        let g = m.metric(&[1.0, -2.0]).unwrap();
        let f = 1.0 + 0.5 * (1.0 + 4.0);
        assert!(close(g.determinant(), f * f, 1e-12));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(StatisticalModel::correlated_gaussian(1.0), Err(Error::Domain(_))));
        let m = StatisticalModel::gaussian_product(1).unwrap();
        assert!(matches!(m.point(&[0.0, -1.0, 0.0, 1.0, 0.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(m.point(&[0.0, 1.0]), Err(Error::DimensionMismatch { expected: 6, got: 2 })));
    }

    #[test]
    fn pdf_values() {
        let m = StatisticalModel::gaussian_product(1).unwrap();
        let p = m.point(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        let v = m.pdf(&[0.0, 0.0, 0.0], &p).unwrap();
        assert!(close(v, (2.0 * PI).powf(-1.5), 1e-15));

        let c = StatisticalModel::correlated_gaussian(0.5).unwrap();
        let p = c.point(&[1.0, 1.0, 2.0, 1.0]).unwrap();
        assert!(close(c.pdf(&[1.0, 2.0], &p).unwrap(), 1.0 / (2.0 * PI * 0.75f64.sqrt()), 1e-15));

        let c0 = StatisticalModel::correlated_gaussian(0.0).unwrap();
        let p = c0.point(&[0.0, 1.0, 0.0, 2.0]).unwrap();
        let joint = c0.pdf(&[0.3, -0.7], &p).unwrap();
        let prod = normal_log_pdf(0.3, 0.0, 1.0).exp() * normal_log_pdf(-0.7, 0.0, 2.0).exp();
        assert!(close(joint, prod, 1e-15));
    }

    #[test]
    fn fisher_rao_matches_closed_form() {
        let m = StatisticalModel::gaussian_product(1).unwrap();
        let p = m.point(&[0.5, 2.0, -1.0, 1.0, 0.0, 0.7]).unwrap();
        let num = m.fisher_rao_numeric(&p, 20).unwrap();
        let exact = m.metric_at(&p).unwrap();
        assert!((num.components - exact.components).amax() < 1e-10);

        let c = StatisticalModel::correlated_gaussian(0.5).unwrap();
        let p = c.point(&[0.0, 1.0, 0.0, 1.0]).unwrap();
        let num = c.fisher_rao_numeric(&p, 20).unwrap();
        assert!((num.components - c.metric_at(&p).unwrap().components).amax() < 1e-8);
    }

    #[test]
    fn fisher_rao_rejects_low_order_and_missing_density() {
        let m = StatisticalModel::gaussian_product(1).unwrap();
        let p = m.point(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(m.fisher_rao_numeric(&p, 5), Err(Error::InvalidArgument(_))));
        let iho = StatisticalModel::iho(vec![1.0]).unwrap();
        let p = iho.point(&[0.3]).unwrap();
        assert!(matches!(iho.fisher_rao_numeric(&p, 20), Err(Error::NoDensity(_))));
        let num = iho.jacobi_metric_numeric(&p).unwrap();
        assert!((num.components - iho.metric_at(&p).unwrap().components).amax() < 1e-9);
    }

    #[test]
    fn entropy_properties() {
        let m = StatisticalModel::gaussian_product(1).unwrap();
        let p1 = m.point(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        let p2 = m.point(&[0.0, 2.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        let w = 60.0;
        let s1 = m.relative_entropy(&p1, w).unwrap();
        let s2 = m.relative_entropy(&p2, w).unwrap();
        assert!(close(s2 - s1, 2f64.ln(), 1e-10));
        assert_eq!(m.relative_entropy_perturbed(&p1, w, 0.0).unwrap(), s1);
        let sp = m.relative_entropy_perturbed(&p1, w, 1e-2).unwrap();
        assert!(sp < s1);
        // leading order is −12ε², the cubic term is positive
        assert!(close(sp - s1, -12.0 * 1e-4, 3e-4), "{}", sp - s1);
    }

    #[test]
    fn narrow_prior_is_rejected() {
        let m = StatisticalModel::gaussian_product(1).unwrap();
        let p = m.point(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(m.relative_entropy(&p, 8.0), Err(Error::PriorTooNarrow { .. })));
        assert!(m.relative_entropy(&p, default_prior_width(&p)).is_ok());
    }

    #[test]
    fn marginals_are_normalised() {
        let m = StatisticalModel::correlated_gaussian(0.3).unwrap();
        let p = m.point(&[1.0, 0.4, -2.0, 3.0]).unwrap();
        for mass in m.marginal_masses(&p).unwrap() {
            assert!(close(mass, 1.0, 1e-9));
        }
    }

    #[test]
    fn analytic_derivatives_agree_with_differences() {
        let models = [
            (StatisticalModel::correlated_gaussian(0.6).unwrap(), vec![0.1, 1.3, -0.4, 0.8]),
            (StatisticalModel::iho(vec![1.0, 0.3]).unwrap(), vec![0.7, -1.1]),
            (StatisticalModel::gaussian_product(1).unwrap(), vec![0.0, 1.5, 1.0, 0.6, 2.0, 2.2]),
        ];
        for (m, x) in models {
            let a = geometry::christoffel(&m, &x, Backend::Analytic).unwrap();
            let f = geometry::christoffel(&m, &x, Backend::default()).unwrap();
            assert!(a.max_abs_diff(&f) < 1e-8, "{}", m.id());
            let ra = geometry::ricci_scalar(&m, &x, Backend::Analytic).unwrap();
            let rf = geometry::ricci_scalar(&m, &x, Backend::default()).unwrap();
            assert!(close(ra, rf, 1e-6), "{} {ra} {rf}", m.id());
        }
    }
}
