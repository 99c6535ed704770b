//! Gaussian quadrature rules.
//!
//! Nodes are found by Newton iteration on the three-term recurrences of the
//! orthonormal Hermite and Legendre polynomials, which keeps the weights
//! accurate to a few ulps for the orders used here (up to a few hundred).

use std::f64::consts::PI;

/// Gauss-Hermite rule for the weight `exp(-x^2)` on the real line.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Self {
        assert!(order > 0, "quadrature order must be positive");
        let n = order;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let pim4 = PI.powf(-0.25);
        let m = n.div_ceil(2);
        let mut z = 0.0_f64;
        for i in 0..m {
            z = match i {
                0 => {
                    let t = (2 * n + 1) as f64;
                    t.sqrt() - 1.855_75 * t.powf(-1.0 / 6.0)
                }
                1 => z - 1.14 * (n as f64).powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * n as f64).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        // Ascending node order.
        x.reverse();
        w.reverse();
        Self { nodes: x, weights: w }
    }

    /// `E[f(Z)]` for `Z ~ N(0, 1)`.
    pub fn expect_standard_normal<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let scale = std::f64::consts::SQRT_2;
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(scale * x);
        }
        acc / PI.sqrt()
    }

    /// `E[f(Z1, Z2)]` for independent standard normals.
    pub fn expect_standard_normal_2d<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        let scale = std::f64::consts::SQRT_2;
        let mut acc = 0.0;
        for (xi, wi) in self.nodes.iter().zip(&self.weights) {
            for (xj, wj) in self.nodes.iter().zip(&self.weights) {
                acc += wi * wj * f(scale * xi, scale * xj);
            }
        }
        acc / PI
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order > 0, "quadrature order must be positive");
        let n = order;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
                }
                pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-16 {
                    break;
                }
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            w[n - 1 - i] = w[i];
        }
        Self { nodes: x, weights: w }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite rule over `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }

    /// Tensor-product rule on the rectangle `[ax, bx] x [ay, by]`.
    pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
        &self,
        (ax, bx): (f64, f64),
        (ay, by): (f64, f64),
        mut f: F,
    ) -> f64 {
        let (mx, hx) = (0.5 * (ax + bx), 0.5 * (bx - ax));
        let (my, hy) = (0.5 * (ay + by), 0.5 * (by - ay));
        let mut acc = 0.0;
        for (xi, wi) in self.nodes.iter().zip(&self.weights) {
            for (yj, wj) in self.nodes.iter().zip(&self.weights) {
                acc += wi * wj * f(mx + hx * xi, my + hy * yj);
            }
        }
        acc * hx * hy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_normal_moments() {
        let rule = GaussHermite::new(20);
        assert!((rule.expect_standard_normal(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!(rule.expect_standard_normal(|z| z).abs() < 1e-14);
        assert!((rule.expect_standard_normal(|z| z * z) - 1.0).abs() < 1e-13);
        assert!((rule.expect_standard_normal(|z| z.powi(4)) - 3.0).abs() < 1e-12);
        assert!((rule.expect_standard_normal(|z| z.powi(8)) - 105.0).abs() < 1e-10);
    }

    #[test]
    fn hermite_high_order_is_stable() {
        let rule = GaussHermite::new(120);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - PI.sqrt()).abs() < 1e-13);
        assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
        assert!((rule.expect_standard_normal(|z| z.cos()) - (-0.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // degree 15 is exact for 8 nodes
        let v = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let v = rule.integrate_2d((0.0, 1.0), (0.0, 1.0), |x, y| 1.0 + 0.5 * (x * x + y * y));
        assert!((v - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_composite_smooth_function() {
        let rule = GaussLegendre::new(10);
        let v = rule.integrate_composite(0.0, 10.0, 20, |x| (-x).exp());
        assert!((v - (1.0 - (-10.0f64).exp())).abs() < 1e-14);
    }
}
