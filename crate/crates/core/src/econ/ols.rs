// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{Matrix, OrderedQr};
use crate::scalar::Scalar;

/// Relative tolerance below which a column counts as linearly dependent on
/// the columns before it.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OlsFit<T> {
    /// One entry per input column; dropped columns hold zero.
    pub coefficients: Vec<T>,
    pub retained: Vec<usize>,
    pub dropped: Vec<usize>,
    pub fitted: Vec<T>,
    pub residuals: Vec<T>,
    /// `(XᵀX)⁻¹` over the retained columns.
    pub bread: Matrix<T>,
    pub n_obs: usize,
}

impl<T: Scalar> OlsFit<T> {
    pub fn rank(&self) -> usize {
        self.retained.len()
    }

    pub fn ssr(&self) -> T {
        self.residuals.iter().map(|&u| u * u).sum()
    }

    /// Coefficients of the retained columns only.
    pub fn retained_coefficients(&self) -> Vec<T> {
        self.retained.iter().map(|&j| self.coefficients[j]).collect()
    }
}

/// Least squares via an ordered Householder QR. Later columns that are
/// (numerically) spanned by earlier ones are dropped.
pub fn ols_fit<T: Scalar>(x: &Matrix<T>, y: &[T]) -> Result<OlsFit<T>> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::domain(format!("response has {} rows, design has {n}", y.len())));
    }
    let qr = OrderedQr::new(x, T::lit(RANK_TOLERANCE));
    let rank = qr.rank();
    if n <= rank {
        return Err(Error::Underdetermined { n_obs: n, rank });
    }
    let beta_r = qr.solve(y);
    let mut coefficients = vec![T::zero(); x.ncols()];
    for (&j, &b) in qr.retained().iter().zip(&beta_r) {
        coefficients[j] = b;
    }
    let fitted = x.matvec(&coefficients);
    let residuals = y.iter().zip(&fitted).map(|(&a, &b)| a - b).collect();
    Ok(OlsFit {
        coefficients,
        retained: qr.retained().to_vec(),
        dropped: qr.dropped().to_vec(),
        fitted,
        residuals,
        bread: qr.xtx_inverse(),
        n_obs: n,
    })
}

/// Centered R²: `1 - SSR / Σ(y - ȳ)²`. Zero when `y` has no variation.
pub fn r_squared<T: Scalar>(y: &[T], ssr: T) -> T {
    let n = T::from_count(y.len());
    let mean = y.iter().copied().sum::<T>() / n;
    let sst: T = y.iter().map(|&v| (v - mean) * (v - mean)).sum();
    if sst == T::zero() {
        return T::zero();
    }
    T::one() - ssr / sst
}
