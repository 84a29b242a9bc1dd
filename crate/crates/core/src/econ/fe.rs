// SPDX-License-Identifier: Apache-2.0

use crate::scalar::Scalar;

/// Relative size below which a demeaned column is treated as group-constant.
pub const CONSTANT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Within<T> {
    pub columns: Vec<Vec<T>>,
    /// Column was constant within every group and is now all zeros.
    pub constant: Vec<bool>,
    pub n_groups: usize,
}

/// Group means of `v`; `groups` are dense ids `0..n_groups`.
pub fn group_means<T: Scalar>(v: &[T], groups: &[usize], n_groups: usize) -> Vec<T> {
    let mut sum = vec![T::zero(); n_groups];
    let mut cnt = vec![0usize; n_groups];
    for (&x, &g) in v.iter().zip(groups) {
        sum[g] += x;
        cnt[g] += 1;
    }
    sum.iter().zip(&cnt).map(|(&s, &c)| if c == 0 { T::zero() } else { s / T::from_count(c) }).collect()
}

pub fn demean<T: Scalar>(v: &[T], groups: &[usize], n_groups: usize) -> Vec<T> {
    let means = group_means(v, groups, n_groups);
    v.iter().zip(groups).map(|(&x, &g)| x - means[g]).collect()
}

/// Subtracts group means from each column. Columns that are constant within
/// every group are set to exactly zero and flagged.
pub fn within_transform<T: Scalar>(columns: &[Vec<T>], groups: &[usize]) -> Within<T> {
    let n_groups = groups.iter().map(|&g| g + 1).max().unwrap_or(0);
    let mut out = Vec::with_capacity(columns.len());
    let mut constant = Vec::with_capacity(columns.len());
    for col in columns {
        let mut d = demean(col, groups, n_groups);
        let scale = col.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        let spread = d.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        let flat = spread <= T::lit(CONSTANT_TOLERANCE) * scale || scale == T::zero();
        if flat {
            d.iter_mut().for_each(|x| *x = T::zero());
        }
        constant.push(flat);
        out.push(d);
    }
    Within { columns: out, constant, n_groups }
}
