// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// `A · M · A` for symmetric `A`.
pub fn sandwich<T: Scalar>(bread: &Matrix<T>, meat: &Matrix<T>) -> Result<Matrix<T>> {
    bread.matmul(meat)?.matmul(bread)
}

fn outer_add<T: Scalar>(acc: &mut Matrix<T>, s: &[T]) {
    for a in 0..s.len() {
        for b in 0..s.len() {
            acc[(a, b)] += s[a] * s[b];
        }
    }
}

/// `Σᵢ (xᵢuᵢ)(xᵢuᵢ)ᵀ`.
pub fn hc_meat<T: Scalar>(x: &Matrix<T>, u: &[T]) -> Matrix<T> {
    let k = x.ncols();
    let mut meat = Matrix::zeros(k, k);
    let mut s = vec![T::zero(); k];
    for (i, &ui) in u.iter().enumerate() {
        for (sj, &xij) in s.iter_mut().zip(x.row(i)) {
            *sj = xij * ui;
        }
        outer_add(&mut meat, &s);
    }
    meat
}

/// `Σ_g (X_gᵀu_g)(X_gᵀu_g)ᵀ` with clusters in order of first appearance.
/// Returns the meat and the number of non-empty clusters.
pub fn cluster_meat<T: Scalar>(x: &Matrix<T>, u: &[T], clusters: &[usize]) -> (Matrix<T>, usize) {
    let k = x.ncols();
    let g = clusters.iter().map(|&c| c + 1).max().unwrap_or(0);
    let mut scores = vec![vec![T::zero(); k]; g];
    for (i, (&c, &ui)) in clusters.iter().zip(u).enumerate() {
        for (sj, &xij) in scores[c].iter_mut().zip(x.row(i)) {
            *sj += xij * ui;
        }
    }
    let mut used = vec![false; g];
    for &c in clusters {
        used[c] = true;
    }
    let mut meat = Matrix::zeros(k, k);
    for s in &scores {
        outer_add(&mut meat, s);
    }
    (meat, used.iter().filter(|&&b| b).count())
}

fn resid_df(n: usize, k: usize, absorbed: usize) -> Result<usize> {
    n.checked_sub(k + absorbed)
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::domain(format!("no residual degrees of freedom (n={n}, k={k}, absorbed={absorbed})")))
}

/// `s² (XᵀX)⁻¹` with `s² = SSR / (n - k - absorbed)`.
pub fn classical_vcov<T: Scalar>(bread: &Matrix<T>, u: &[T], k: usize, absorbed: usize) -> Result<Matrix<T>> {
    let df = resid_df(u.len(), k, absorbed)?;
    let ssr: T = u.iter().map(|&v| v * v).sum();
    Ok(bread.scale(ssr / T::from_count(df)))
}

/// HC1 small-sample factor `n / (n - k - absorbed)`.
pub fn hc1_factor<T: Scalar>(n: usize, k: usize, absorbed: usize) -> Result<T> {
    let df = resid_df(n, k, absorbed)?;
    if df < 2 {
        return Err(Error::domain(format!("HC1 needs at least two residual degrees of freedom (n={n}, k={k})")));
    }
    Ok(T::from_count(n) / T::from_count(df))
}

/// CR1 small-sample factor `G/(G-1) · (n-1)/(n - k - absorbed)`.
pub fn cr1_factor<T: Scalar>(g: usize, n: usize, k: usize, absorbed: usize) -> Result<T> {
    if g < 2 {
        return Err(Error::domain(format!("clustered covariance needs at least 2 clusters, got {g}")));
    }
    let df = resid_df(n, k, absorbed)?;
    let g = T::from_count(g);
    Ok(g / (g - T::one()) * T::from_count(n - 1) / T::from_count(df))
}

pub fn hc1_vcov<T: Scalar>(x: &Matrix<T>, u: &[T], bread: &Matrix<T>, absorbed: usize) -> Result<Matrix<T>> {
    let f = hc1_factor(u.len(), x.ncols(), absorbed)?;
    Ok(sandwich(bread, &hc_meat(x, u))?.scale(f))
}

/// CR1 cluster-robust covariance; `clusters` are dense ids `0..G`.
pub fn cluster_robust_vcov<T: Scalar>(x: &Matrix<T>, u: &[T], clusters: &[usize], bread: &Matrix<T>, absorbed: usize) -> Result<Matrix<T>> {
    if clusters.len() != u.len() {
        return Err(Error::domain("cluster labels and residuals differ in length"));
    }
    let (meat, g) = cluster_meat(x, u, clusters);
    let f = cr1_factor(g, u.len(), x.ncols(), absorbed)?;
    Ok(sandwich(bread, &meat)?.scale(f))
}

/// Dense ids for labels in order of first appearance, and the label list.
pub fn dense_ids(labels: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut seen: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    let mut names = Vec::new();
    let ids = labels
        .iter()
        .map(|l| {
            *seen.entry(l.as_str()).or_insert_with(|| {
                names.push(l.clone());
                names.len() - 1
            })
        })
        .collect();
    (ids, names)
}
