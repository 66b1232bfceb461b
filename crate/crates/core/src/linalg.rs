//! Small dense real linear algebra: LU with partial pivoting and a one-sided
//! Jacobi SVD. Sizes here never exceed a few dozen, so clarity wins over
//! blocking.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::math;
use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(math::abs(*v)))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    // scaled to avoid overflow on controls of size 1e6 and beyond
    let scale = a.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
    if scale == 0.0 {
        return 0.0;
    }
    scale * math::sqrt(a.iter().map(|v| (v / scale) * (v / scale)).sum())
}

/// Residual `‖Ax − b‖₂`.
pub fn residual_norm(a: &Matrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    norm2(&r)
}

/// Solves a square system by Gaussian elimination with partial pivoting.
pub fn lu_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return Err(Error::InvalidSpec(alloc::format!("lu_solve needs a square system, got {}x{} with rhs {}", a.rows, a.cols, b.len())));
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = a.max_abs();
    if scale == 0.0 {
        return Err(Error::SingularSystem);
    }
    for k in 0..n {
        let (p, pv) = (k..n).fold((k, 0.0), |acc, i| {
            let v = math::abs(m[(i, k)]);
            if v > acc.1 {
                (i, v)
            } else {
                acc
            }
        });
        if pv < 1e-300 * scale {
            return Err(Error::SingularSystem);
        }
        if p != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
            x.swap(k, p);
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[(k, j)] * x[j]).sum();
        x[k] = (x[k] - s) / m[(k, k)];
    }
    Ok(x)
}

/// Thin singular value decomposition `A = U Σ Vᵀ` of an `m × n` matrix with
/// `m ≥ n`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    /// One-sided (Hestenes) Jacobi. Accurate in the relative sense for the
    /// small singular values, which is what the ill-conditioned control
    /// systems need.
    pub fn new(a: &Matrix) -> Svd {
        let (m, n) = (a.rows, a.cols);
        assert!(m >= n, "Svd::new expects rows >= cols");
        // column-major working copy
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
        let mut vcols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let eps = f64::EPSILON;
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = dot(&cols[p], &cols[p]);
                    let beta = dot(&cols[q], &cols[q]);
                    let gamma = dot(&cols[p], &cols[q]);
                    if gamma == 0.0 || math::abs(gamma) <= eps * math::sqrt(alpha * beta) {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (math::abs(zeta) + math::sqrt(1.0 + zeta * zeta));
                    let cs = 1.0 / math::sqrt(1.0 + t * t);
                    let sn = cs * t;
                    rotate(&mut cols, p, q, cs, sn);
                    rotate(&mut vcols, p, q, cs, sn);
                }
            }
            if !rotated {
                break;
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        let norms: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
        order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
        let mut u = Matrix::zeros(m, n);
        let mut v = Matrix::zeros(n, n);
        let mut sigma = Vec::with_capacity(n);
        for (k, &j) in order.iter().enumerate() {
            let s = norms[j];
            sigma.push(s);
            for i in 0..m {
                u[(i, k)] = if s > 0.0 { cols[j][i] / s } else { 0.0 };
            }
            for i in 0..n {
                v[(i, k)] = vcols[j][i];
            }
        }
        Svd { u, sigma, v }
    }

    /// `σ_max / σ_min`; infinite when the matrix is singular.
    pub fn condition(&self) -> f64 {
        let smax = self.sigma.first().copied().unwrap_or(0.0);
        let smin = self.sigma.last().copied().unwrap_or(0.0);
        if smin == 0.0 {
            f64::INFINITY
        } else {
            smax / smin
        }
    }

    /// Coefficients `uᵢᵀ b`.
    pub fn project(&self, b: &[f64]) -> Vec<f64> {
        (0..self.sigma.len()).map(|k| (0..self.u.rows).map(|i| self.u[(i, k)] * b[i]).sum()).collect()
    }

    /// Filtered solution `Σ fᵢ (uᵢᵀb/σᵢ) vᵢ` for filter weights `fᵢ`.
    pub fn combine(&self, weights: &[f64]) -> Vec<f64> {
        let n = self.v.rows;
        let mut x = vec![0.0; n];
        for (k, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            for i in 0..n {
                x[i] += w * self.v[(i, k)];
            }
        }
        x
    }

    /// Minimum-norm least-squares solution, discarding singular values below
    /// `rcond · σ_max`.
    pub fn solve_min_norm(&self, b: &[f64], rcond: f64) -> Vec<f64> {
        let beta = self.project(b);
        let cutoff = rcond * self.sigma.first().copied().unwrap_or(0.0);
        let w: Vec<f64> = self.sigma.iter().zip(&beta).map(|(s, bb)| if *s > cutoff && *s > 0.0 { bb / s } else { 0.0 }).collect();
        self.combine(&w)
    }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, cs: f64, sn: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = cs * x - sn * y;
        *b = sn * x + cs * y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(n: usize) -> Matrix {
        let mut h = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] = 1.0 / (i + j + 1) as f64;
            }
        }
        h
    }

    #[test]
    fn lu_identity() {
        let a = Matrix::identity(4);
        let x = lu_solve(&a, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(x, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn lu_needs_pivoting() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]);
        let x = lu_solve(&a, &[2.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lu_singular() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(lu_solve(&a, &[1.0, 1.0]), Err(Error::SingularSystem));
    }

    #[test]
    fn svd_reconstructs() {
        let a = Matrix::from_rows(&[vec![3.0, 1.0, 0.5], vec![-1.0, 2.0, 4.0], vec![0.0, 7.0, -2.0]]);
        let svd = Svd::new(&a);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| svd.u[(i, k)] * svd.sigma[k] * svd.v[(j, k)]).sum();
                assert!((r - a[(i, j)]).abs() < 1e-13);
            }
        }
        assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_hilbert_condition() {
        // cond_2(H_8) = 1.525757556e10
        let svd = Svd::new(&hilbert(8));
        let k = svd.condition();
        assert!((k / 1.525_757_556e10 - 1.0).abs() < 1e-6, "{k}");
    }

    #[test]
    fn min_norm_matches_lu_on_well_conditioned() {
        let a = Matrix::from_rows(&[vec![4.0, 1.0], vec![2.0, 3.0]]);
        let b = [1.0, -2.0];
        let x1 = lu_solve(&a, &b).unwrap();
        let x2 = Svd::new(&a).solve_min_norm(&b, 1e-15);
        assert!((x1[0] - x2[0]).abs() < 1e-14 && (x1[1] - x2[1]).abs() < 1e-14);
    }
}
