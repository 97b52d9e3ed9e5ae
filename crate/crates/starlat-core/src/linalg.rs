//! Small dense linear algebra: the constrained frame systems are a few
//! hundred DOFs, so a dense LU with partial pivoting is the whole solver.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::Result;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            y[r] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    /// `max |a_ij - a_ji|`, zero for a symmetric matrix.
    pub fn asymmetry(&self) -> f64 {
        debug_assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                let d = libm::fabs(self.get(r, c) - self.get(c, r));
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Numerical rank via Gaussian elimination with full pivoting.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let mut a = self.clone();
        let (m, n) = (a.rows, a.cols);
        let scale = a.data.iter().fold(0.0f64, |acc, v| acc.max(libm::fabs(*v)));
        if scale == 0.0 {
            return 0;
        }
        let tol = rel_tol * scale;
        let mut rank = 0;
        let mut rows: Vec<usize> = (0..m).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        while rank < m.min(n) {
            // full pivot over the remaining block
            let mut best = (rank, rank, 0.0f64);
            for i in rank..m {
                for j in rank..n {
                    let v = libm::fabs(a.get(rows[i], cols[j]));
                    if v > best.2 {
                        best = (i, j, v);
                    }
                }
            }
            if best.2 <= tol {
                break;
            }
            rows.swap(rank, best.0);
            cols.swap(rank, best.1);
            let p = a.get(rows[rank], cols[rank]);
            for i in (rank + 1)..m {
                let f = a.get(rows[i], cols[rank]) / p;
                if f != 0.0 {
                    for j in rank..n {
                        let v = a.get(rows[rank], cols[j]);
                        a.add(rows[i], cols[j], -f * v);
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

pub fn vec_norm(x: &[f64]) -> f64 {
    libm::sqrt(x.iter().map(|v| v * v).sum())
}

/// Solves `A x = b` by LU with partial pivoting. `A` is consumed.
pub fn lu_solve(mut a: Mat, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows;
    debug_assert_eq!(a.cols, n);
    debug_assert_eq!(b.len(), n);
    let mut x: Vec<f64> = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        // partial pivot
        let mut p = k;
        let mut pmax = libm::fabs(a.get(perm[k], k));
        for i in (k + 1)..n {
            let v = libm::fabs(a.get(perm[i], k));
            if v > pmax {
                pmax = v;
                p = i;
            }
        }
        if pmax == 0.0 || !pmax.is_finite() {
            return Err(Error::SingularSystem);
        }
        perm.swap(k, p);
        let pivot = a.get(perm[k], k);
        for i in (k + 1)..n {
            let f = a.get(perm[i], k) / pivot;
            if f != 0.0 {
                a.set(perm[i], k, f); // store the multiplier
                for j in (k + 1)..n {
                    let v = a.get(perm[k], j);
                    a.add(perm[i], j, -f * v);
                }
            }
        }
    }

    // forward substitution on the permuted rhs
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = x[perm[i]];
        for j in 0..i {
            s -= a.get(perm[i], j) * y[j];
        }
        y[i] = s;
    }
    // back substitution
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in (i + 1)..n {
            s -= a.get(perm[i], j) * x[j];
        }
        let d = a.get(perm[i], i);
        x[i] = s / d;
        if !x[i].is_finite() {
            return Err(Error::SingularSystem);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solves_small_system() {
        let mut a = Mat::zeros(3, 3);
        let rows = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        for r in 0..3 {
            for c in 0..3 {
                a.set(r, c, rows[r][c]);
            }
        }
        let b = [3.0, 5.0, 3.0];
        let x = lu_solve(a.clone(), &b).unwrap();
        let r = a.matvec(&x);
        for i in 0..3 {
            assert_relative_eq!(r[i], b[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let mut a = Mat::zeros(2, 2);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        let x = lu_solve(a, &[2.0, 3.0]).unwrap();
        assert_relative_eq!(x[0], 3.0);
        assert_relative_eq!(x[1], 2.0);
    }

    #[test]
    fn singular_matrix_errors() {
        let mut a = Mat::zeros(2, 2);
        a.set(0, 0, 1.0);
        a.set(0, 1, 2.0);
        a.set(1, 0, 2.0);
        a.set(1, 1, 4.0);
        assert!(lu_solve(a, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn rank_detects_deficiency() {
        let mut a = Mat::zeros(3, 3);
        // rank 2: third row = row0 + row1
        let rows = [[1.0, 0.0, 2.0], [0.0, 1.0, 1.0], [1.0, 1.0, 3.0]];
        for r in 0..3 {
            for c in 0..3 {
                a.set(r, c, rows[r][c]);
            }
        }
        assert_eq!(a.rank(1e-12), 2);
    }
}
