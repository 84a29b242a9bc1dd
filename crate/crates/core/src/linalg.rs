// SPDX-License-Identifier: Apache-2.0

//! Small dense linear algebra: row-major matrices, an in-order Householder QR
//! that detects rank deficiency column by column, and a cyclic Jacobi
//! eigensolver for symmetric matrices.
//!
//! Problem sizes here are a few thousand rows by a few dozen columns (or 7x7
//! for PCA), so clarity wins over blocking.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![T::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    /// Builds from row slices; all rows must share a length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::domain("ragged rows"));
        }
        Ok(Self { nrows: rows.len(), ncols, data: rows.iter().flatten().copied().collect() })
    }

    /// Builds from column vectors of equal length.
    pub fn from_columns(cols: &[Vec<T>]) -> Result<Self> {
        let nrows = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != nrows) {
            return Err(Error::domain("ragged columns"));
        }
        Ok(Self::from_fn(nrows, cols.len(), |i, j| cols[j][i]))
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.nrows, cols.len(), |i, j| self[(i, cols[j])])
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(rows.len(), self.ncols, |i, j| self[(rows[i], j)])
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.ncols != rhs.nrows {
            return Err(Error::domain(format!(
                "matmul shape mismatch: {}x{} * {}x{}",
                self.nrows, self.ncols, rhs.nrows, rhs.ncols
            )));
        }
        let mut out = Self::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.ncols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.ncols);
        (0..self.nrows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `Xᵀ v` without materializing the transpose.
    pub fn t_matvec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.nrows);
        let mut out = vec![T::zero(); self.ncols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(self.row(i)) {
                *o += x * vi;
            }
        }
        out
    }

    /// `Xᵀ X`.
    pub fn gram(&self) -> Self {
        let p = self.ncols;
        let mut g = Self::zeros(p, p);
        for i in 0..self.nrows {
            let r = self.row(i);
            for a in 0..p {
                for b in a..p {
                    g[(a, b)] += r[a] * r[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                g[(a, b)] = g[(b, a)];
            }
        }
        g
    }

    pub fn scale(&self, c: T) -> Self {
        Self { nrows: self.nrows, ncols: self.ncols, data: self.data.iter().map(|&x| x * c).collect() }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols)).map(|i| self[(i, i)]).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.ncols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.ncols + j]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Householder reflector `I - beta v vᵀ` acting on rows `offset..`.
#[derive(Debug, Clone)]
struct Reflector<T> {
    offset: usize,
    v: Vec<T>,
    beta: T,
}

impl<T: Scalar> Reflector<T> {
    fn apply(&self, x: &mut [T]) {
        let tail = &mut x[self.offset..];
        let s = dot(&self.v, tail) * self.beta;
        for (t, &v) in tail.iter_mut().zip(&self.v) {
            *t -= s * v;
        }
    }
}

/// QR factorization that walks the columns in their given order and drops any
/// column whose component orthogonal to the already-retained columns is below
/// `tol` times its own norm. A later duplicate therefore always loses to the
/// earlier column.
#[derive(Debug, Clone)]
pub struct OrderedQr<T> {
    nrows: usize,
    reflectors: Vec<Reflector<T>>,
    /// Upper-triangular factor over the retained columns (k x k).
    r: Matrix<T>,
    retained: Vec<usize>,
    dropped: Vec<usize>,
}

impl<T: Scalar> OrderedQr<T> {
    pub fn new(x: &Matrix<T>, tol: T) -> Self {
        let n = x.nrows();
        let p = x.ncols();
        let mut reflectors: Vec<Reflector<T>> = Vec::new();
        let mut r_cols: Vec<Vec<T>> = Vec::new();
        let mut retained = Vec::new();
        let mut dropped = Vec::new();

        for j in 0..p {
            let mut col = x.column(j);
            let orig = norm(&col);
            for h in &reflectors {
                h.apply(&mut col);
            }
            let k = reflectors.len();
            if k >= n {
                dropped.push(j);
                continue;
            }
            let tail_norm = norm(&col[k..]);
            if orig == T::zero() || tail_norm <= tol * orig {
                dropped.push(j);
                continue;
            }
            // v = x - alpha e1 with alpha = -sign(x0) |x|, avoiding cancellation.
            let x0 = col[k];
            let alpha = if x0 >= T::zero() { -tail_norm } else { tail_norm };
            let mut v: Vec<T> = col[k..].to_vec();
            v[0] = x0 - alpha;
            let vnorm2 = dot(&v, &v);
            let beta = if vnorm2 == T::zero() { T::zero() } else { T::lit(2.0) / vnorm2 };
            let h = Reflector { offset: k, v, beta };
            h.apply(&mut col);
            reflectors.push(h);
            r_cols.push(col[..=k].to_vec());
            retained.push(j);
        }

        let k = retained.len();
        let mut r = Matrix::zeros(k, k);
        for (j, c) in r_cols.iter().enumerate() {
            for (i, &v) in c.iter().enumerate() {
                r[(i, j)] = v;
            }
        }
        Self { nrows: n, reflectors, r, retained, dropped }
    }

    pub fn rank(&self) -> usize {
        self.retained.len()
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn r(&self) -> &Matrix<T> {
        &self.r
    }

    /// `Qᵀ y`.
    pub fn qt_mul(&self, y: &[T]) -> Vec<T> {
        debug_assert_eq!(y.len(), self.nrows);
        let mut out = y.to_vec();
        for h in &self.reflectors {
            h.apply(&mut out);
        }
        out
    }

    /// Least-squares coefficients for the retained columns.
    pub fn solve(&self, y: &[T]) -> Vec<T> {
        let qty = self.qt_mul(y);
        solve_upper(&self.r, &qty[..self.rank()])
    }

    /// `(XᵀX)⁻¹` over the retained columns, via `R⁻¹ R⁻ᵀ`.
    pub fn xtx_inverse(&self) -> Matrix<T> {
        let k = self.rank();
        let rinv = upper_inverse(&self.r);
        Matrix::from_fn(k, k, |i, j| {
            let start = i.max(j);
            (start..k).map(|m| rinv[(i, m)] * rinv[(j, m)]).sum()
        })
    }
}

/// Back substitution for upper-triangular `r`.
pub fn solve_upper<T: Scalar>(r: &Matrix<T>, b: &[T]) -> Vec<T> {
    let k = r.nrows();
    let mut x = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut s = b[i];
        for j in i + 1..k {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    x
}

fn upper_inverse<T: Scalar>(r: &Matrix<T>) -> Matrix<T> {
    let k = r.nrows();
    let mut inv = Matrix::zeros(k, k);
    for col in 0..k {
        let mut e = vec![T::zero(); k];
        e[col] = T::one();
        let x = solve_upper(r, &e);
        for i in 0..k {
            inv[(i, col)] = x[i];
        }
    }
    inv
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order and the matching unit eigenvectors
/// as columns.
pub fn symmetric_eigen<T: Scalar>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::domain("eigendecomposition needs a square matrix"));
    }
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let scale = m.as_slice().iter().fold(T::zero(), |s, &x| s.max(x.abs()));
    if scale == T::zero() {
        return Ok((vec![T::zero(); n], v));
    }
    let eps = T::epsilon() * scale;

    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off.sqrt() <= eps {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = v.select_columns(&order);
    Ok((values, vectors))
}
