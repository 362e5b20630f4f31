//! Small dense linear algebra: real least squares (Householder QR), a
//! one-sided Jacobi SVD for minimum-norm solves, 3×3 symmetric eigen
//! decomposition and complex LU for the Bloch generator.

#[allow(unused_imports)] // shadowed by std methods when a dev-dependency links std
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular;

/// Row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Full-rank least squares `min |Ax - b|` by Householder QR.
///
/// Columns are normalised before factorising so that badly scaled
/// monomials do not trip the rank test. Fails when a diagonal of R falls
/// below `1e-12` of the largest.
pub fn lstsq(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, Singular> {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(b.len(), m);
    if m < n {
        return Err(Singular);
    }
    let mut q = a.clone();
    let mut scale = vec![0.0; n];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = (0..m).map(|i| q[(i, j)] * q[(i, j)]).sum::<f64>().sqrt();
        *s = if norm > 0.0 { norm } else { 1.0 };
        for i in 0..m {
            q[(i, j)] /= *s;
        }
    }
    let mut rhs = b.to_vec();
    let mut diag = vec![0.0; n];
    for k in 0..n {
        let norm = (k..m).map(|i| q[(i, k)] * q[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Singular);
        }
        let alpha = if q[(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| q[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let dot: f64 = (k..m).map(|i| v[i - k] * q[(i, j)]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..m {
                    q[(i, j)] -= f * v[i - k];
                }
            }
            let dot: f64 = (k..m).map(|i| v[i - k] * rhs[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                rhs[i] -= f * v[i - k];
            }
        }
        diag[k] = q[(k, k)];
    }
    let dmax = diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
    if diag.iter().any(|d| d.abs() <= 1e-12 * dmax) {
        return Err(Singular);
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= q[(k, j)] * x[j];
        }
        x[k] = s / q[(k, k)];
    }
    for (xi, s) in x.iter_mut().zip(&scale) {
        *xi /= s;
    }
    Ok(x)
}

/// Thin SVD `A = U diag(s) Vᵀ` by one-sided Jacobi on the columns.
/// Returns `(U, s, V)` with `U` m×n and `V` n×n.
pub fn svd(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (m, n) = (a.rows, a.cols);
    let mut u = a.clone();
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        v[(i, i)] = 1.0;
    }
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    alpha += u[(i, p)] * u[(i, p)];
                    beta += u[(i, q)] * u[(i, q)];
                    gamma += u[(i, p)] * u[(i, q)];
                }
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
                for i in 0..n {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut s = vec![0.0; n];
    for j in 0..n {
        let norm = (0..m).map(|i| u[(i, j)] * u[(i, j)]).sum::<f64>().sqrt();
        s[j] = norm;
        if norm > 0.0 {
            for i in 0..m {
                u[(i, j)] /= norm;
            }
        }
    }
    (u, s, v)
}

/// Minimum-norm least-squares solution `A⁺ b`. Singular values below
/// `rcond · s_max` are treated as zero.
pub fn pinv_solve(a: &Matrix, b: &[f64], rcond: f64) -> Vec<f64> {
    let (u, s, v) = svd(a);
    let smax = s.iter().fold(0.0_f64, |acc, x| acc.max(*x));
    let n = a.cols;
    let mut x = vec![0.0; n];
    for k in 0..n {
        if s[k] <= rcond * smax || s[k] == 0.0 {
            continue;
        }
        let coef: f64 = (0..a.rows).map(|i| u[(i, k)] * b[i]).sum::<f64>() / s[k];
        for i in 0..n {
            x[i] += coef * v[(i, k)];
        }
    }
    x
}

/// Eigen decomposition of a symmetric 3×3 matrix by cyclic Jacobi.
/// Eigenvalues ascending; `vectors[k]` is the unit eigenvector of `values[k]`.
pub fn sym_eigen3(a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut m = a;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..50 {
        let off = m[0][1].abs() + m[0][2].abs() + m[1][2].abs();
        let scale = m[0][0].abs() + m[1][1].abs() + m[2][2].abs();
        if off <= 1e-300 || off <= 1e-17 * scale {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if m[p][q] == 0.0 {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let (mkp, mkq) = (m[k][p], m[k][q]);
                m[k][p] = c * mkp - s * mkq;
                m[k][q] = s * mkp + c * mkq;
            }
            for k in 0..3 {
                let (mpk, mqk) = (m[p][k], m[q][k]);
                m[p][k] = c * mpk - s * mqk;
                m[q][k] = s * mpk + c * mqk;
            }
            for row in v.iter_mut() {
                let (vp, vq) = (row[p], row[q]);
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| m[i][i].partial_cmp(&m[j][j]).unwrap_or(core::cmp::Ordering::Equal));
    let values = [m[order[0]][order[0]], m[order[1]][order[1]], m[order[2]][order[2]]];
    let mut vectors = [[0.0; 3]; 3];
    for (k, &col) in order.iter().enumerate() {
        for i in 0..3 {
            vectors[k][i] = v[i][col];
        }
    }
    (values, vectors)
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn scaled(&self, s: Complex64) -> CMatrix {
        CMatrix { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn add_diagonal(&self, s: Complex64) -> CMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out[(i, i)] += s;
        }
        out
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        let n = self.n;
        assert_eq!(n, other.n);
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n).map(|i| self.data[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
    }

    pub fn lu(&self) -> Result<CLu, Singular> {
        CLu::new(self.clone())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.n + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.n + c]
    }
}

/// LU factorisation with partial pivoting.
#[derive(Debug, Clone)]
pub struct CLu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl CLu {
    fn new(mut a: CMatrix) -> Result<Self, Singular> {
        let n = a.n;
        let scale = a.max_abs();
        if scale == 0.0 {
            return Err(Singular);
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].norm();
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-14 * scale {
                return Err(Singular);
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
            }
        }
        Ok(CLu { lu: a, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &CMatrix) -> CMatrix {
        let n = b.n;
        let mut out = CMatrix::zeros(n);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let mut a = Matrix::zeros(4, 2);
        let mut b = vec![0.0; 4];
        for (i, x) in xs.iter().enumerate() {
            a[(i, 0)] = 1.0;
            a[(i, 1)] = *x;
            b[i] = 2.0 - 0.5 * x;
        }
        let sol = lstsq(&a, &b).unwrap();
        assert!((sol[0] - 2.0).abs() < 1e-12 && (sol[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn lstsq_flags_rank_deficiency() {
        let a = Matrix::from_rows(3, 2, vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert_eq!(lstsq(&a, &[1.0, 2.0, 3.0]), Err(Singular));
    }

    #[test]
    fn pinv_gives_minimum_norm() {
        // x + y = 2 has min-norm solution (1, 1)
        let a = Matrix::from_rows(1, 2, vec![1.0, 1.0]);
        let x = pinv_solve(&a, &[2.0], 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_reconstructs() {
        let a = Matrix::from_rows(3, 3, vec![4.0, 1.0, -2.0, 0.5, 3.0, 1.0, -1.0, 2.0, 5.0]);
        let (u, s, v) = svd(&a);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| u[(i, k)] * s[k] * v[(j, k)]).sum();
                assert!((r - a[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigen3_diagonalises() {
        let a = [[2.0, 1.0, 0.3], [1.0, -1.0, 0.2], [0.3, 0.2, 4.0]];
        let (vals, vecs) = sym_eigen3(a);
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
        for k in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i][j] * vecs[k][j]).sum();
                assert!((av - vals[k] * vecs[k][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn complex_lu_solves() {
        let mut a = CMatrix::zeros(3);
        let vals = [(1.0, 1.0), (2.0, 0.0), (0.0, -1.0), (0.0, 3.0), (1.0, 0.0), (2.0, 2.0), (1.0, 0.0), (0.0, 0.0), (4.0, -1.0)];
        for (k, (re, im)) in vals.iter().enumerate() {
            a.data[k] = Complex64::new(*re, *im);
        }
        let x = [Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, 1.0)];
        let b = a.mul_vec(&x);
        let sol = a.lu().unwrap().solve(&b);
        for (s, e) in sol.iter().zip(&x) {
            assert!((s - e).norm() < 1e-13);
        }
    }
}
