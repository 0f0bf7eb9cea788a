//! Small dense symmetric matrices and Cholesky solves.
//!
//! Window systems are at most a few dozen unknowns, so a plain row-major
//! `Vec<f64>` with an in-place lower-triangular factorization is all that is
//! needed.

use std::ops::{Index, IndexMut};

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Adds `lambda` to every diagonal entry.
    pub fn add_ridge(&mut self, lambda: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += lambda;
        }
    }

    /// Max-norm of `self * x - rhs`.
    pub fn residual_inf(&self, x: &[f64], rhs: &[f64]) -> f64 {
        self.mul_vec(x)
            .iter()
            .zip(rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

/// The matrix is not numerically positive definite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NotPositiveDefinite {
    pub pivot: usize,
}

impl Cholesky {
    /// Factors a symmetric matrix. Only the lower triangle of `a` is read.
    pub fn factor(a: &Matrix) -> Result<Self, NotPositiveDefinite> {
        let n = a.dim();
        let mut l = Matrix::zeros(n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d.is_nan() || d <= 0.0 || !d.is_finite() {
                return Err(NotPositiveDefinite { pivot: j });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.l.dim();
        assert_eq!(rhs.len(), n);
        let l = &self.l;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        y
    }

    pub fn factor_matrix(&self) -> &Matrix {
        &self.l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_and_solves_2x2() {
        let a = Matrix::from_fn(2, |i, j| if i == j { 1.0 } else { 0.5 });
        let chol = Cholesky::factor(&a).unwrap();
        let x = chol.solve(&[1.0, 1.0]);
        assert!((x[0] - 1.0 / 1.5).abs() < 1e-15);
        assert!((x[1] - 1.0 / 1.5).abs() < 1e-15);
        assert!(a.residual_inf(&x, &[1.0, 1.0]) < 1e-15);
    }

    #[test]
    fn rejects_indefinite() {
        let a = Matrix::from_fn(2, |i, j| if i == j { 1.0 } else { 2.0 });
        assert_eq!(Cholesky::factor(&a).unwrap_err(), NotPositiveDefinite { pivot: 1 });
        let singular = Matrix::from_fn(2, |_, _| 1.0);
        assert!(Cholesky::factor(&singular).is_err());
    }

    #[test]
    fn ridge_shifts_diagonal() {
        let mut a = Matrix::from_fn(3, |_, _| 1.0);
        a.add_ridge(1e-6);
        assert_eq!(a[(1, 1)], 1.0 + 1e-6);
        assert_eq!(a[(0, 1)], 1.0);
        assert!(Cholesky::factor(&a).is_ok());
    }
}
