//! Reference metrics with known curvature, used to validate the engine.

use nalgebra::DMatrix;

use super::{MetricField, Tensor3, Tensor4};
use crate::error::{Error, Result};

fn check_len(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite coordinate".into()));
    }
    Ok(())
}

/// Flat `δ_ij` on `R^n`.
#[derive(Debug, Clone, Copy)]
pub struct Euclidean {
    n: usize,
}

impl Euclidean {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl MetricField for Euclidean {
    fn name(&self) -> String {
        format!("euclidean(n={})", self.n)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn check_domain(&self, x: &[f64]) -> Result<()> {
        check_len(x, self.n)
    }
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_domain(x)?;
        Ok(DMatrix::identity(self.n, self.n))
    }
    fn metric_jacobian(&self, _x: &[f64]) -> Result<Tensor3> {
        Ok(Tensor3::zeros(self.n))
    }
    fn metric_hessian(&self, _x: &[f64]) -> Result<Tensor4> {
        Ok(Tensor4::zeros(self.n))
    }
}

/// Upper half-plane `(dx² + dy²) / (|K| y²)`, constant curvature `K < 0`.
#[derive(Debug, Clone, Copy)]
pub struct HyperbolicPlane {
    curvature: f64,
}

impl HyperbolicPlane {
    pub fn new(curvature: f64) -> Result<Self> {
        if !(curvature < 0.0) {
            return Err(Error::NonNegativeK(curvature));
        }
        Ok(Self { curvature })
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    fn scale(&self) -> f64 {
        1.0 / self.curvature.abs()
    }
}

impl MetricField for HyperbolicPlane {
    fn name(&self) -> String {
        format!("hyperbolic_plane(K={})", self.curvature)
    }
    fn dim(&self) -> usize {
        2
    }
    fn check_domain(&self, x: &[f64]) -> Result<()> {
        check_len(x, 2)?;
        if x[1] <= 0.0 {
            return Err(Error::Domain(format!("y = {} must be positive", x[1])));
        }
        Ok(())
    }
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_domain(x)?;
        let f = self.scale() / (x[1] * x[1]);
        Ok(DMatrix::from_diagonal_element(2, 2, f))
    }
    fn metric_jacobian(&self, x: &[f64]) -> Result<Tensor3> {
        self.check_domain(x)?;
        let df = -2.0 * self.scale() / x[1].powi(3);
        let mut d = Tensor3::zeros(2);
        d.set(1, 0, 0, df);
        d.set(1, 1, 1, df);
        Ok(d)
    }
    fn metric_hessian(&self, x: &[f64]) -> Result<Tensor4> {
        self.check_domain(x)?;
        let d2f = 6.0 * self.scale() / x[1].powi(4);
        let mut h = Tensor4::zeros(2);
        h.set(1, 1, 0, 0, d2f);
        h.set(1, 1, 1, 1, d2f);
        Ok(h)
    }
}

/// Round 2-sphere of radius `a` in colatitude/longitude `(θ, φ)`, `θ ∈ (0, π)`.
#[derive(Debug, Clone, Copy)]
pub struct Sphere2 {
    radius: f64,
}

impl Sphere2 {
    pub fn new(radius: f64) -> Self {
        Self { radius }
    }
}

impl MetricField for Sphere2 {
    fn name(&self) -> String {
        format!("sphere(a={})", self.radius)
    }
    fn dim(&self) -> usize {
        2
    }
    fn check_domain(&self, x: &[f64]) -> Result<()> {
        check_len(x, 2)?;
        if x[0] <= 0.0 || x[0] >= std::f64::consts::PI {
            return Err(Error::Domain(format!("colatitude {} outside (0, pi)", x[0])));
        }
        Ok(())
    }
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_domain(x)?;
        let a2 = self.radius * self.radius;
        Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            a2,
            a2 * x[0].sin().powi(2),
        ])))
    }
    fn metric_jacobian(&self, x: &[f64]) -> Result<Tensor3> {
        self.check_domain(x)?;
        let a2 = self.radius * self.radius;
        let mut d = Tensor3::zeros(2);
        d.set(0, 1, 1, a2 * (2.0 * x[0]).sin());
        Ok(d)
    }
    fn metric_hessian(&self, x: &[f64]) -> Result<Tensor4> {
        self.check_domain(x)?;
        let a2 = self.radius * self.radius;
        let mut h = Tensor4::zeros(2);
        h.set(0, 0, 1, 1, 2.0 * a2 * (2.0 * x[0]).cos());
        Ok(h)
    }
}
