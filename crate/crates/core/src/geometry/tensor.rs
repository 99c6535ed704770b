//! Dense rank-3 and rank-4 arrays over a fixed dimension.

use serde::Serialize;

/// `n x n x n` array, row-major in `(a, b, c)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.n + b) * self.n + c
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[self.idx(a, b, c)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        let i = self.idx(a, b, c);
        self.data[i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Componentwise `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Tensor3) -> Tensor3 {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + s * b)
            .collect();
        Tensor3 { n: self.n, data }
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `n x n x n x n` array, row-major in `(a, b, c, d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.n + b) * self.n + c) * self.n + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[self.idx(a, b, c, d)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let i = self.idx(a, b, c, d);
        self.data[i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major() {
        let mut t = Tensor3::zeros(3);
        t.set(1, 2, 0, 5.0);
        assert_eq!(t.as_slice()[(3 + 2) * 3], 5.0);
        let mut q = Tensor4::zeros(2);
        q.set(1, 0, 1, 1, -2.0);
        assert_eq!(q.get(1, 0, 1, 1), -2.0);
        assert_eq!(q.max_abs(), 2.0);
    }

    #[test]
    fn axpy_and_diff() {
        let mut a = Tensor3::zeros(2);
        a.set(0, 0, 0, 1.0);
        let b = a.axpy(2.0, &a);
        assert_eq!(b.get(0, 0, 0), 3.0);
        assert_eq!(b.max_abs_diff(&a), 2.0);
    }
}
