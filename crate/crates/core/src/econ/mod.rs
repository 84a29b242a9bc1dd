// SPDX-License-Identifier: Apache-2.0

//! Least squares with optional chair or meeting fixed effects, classical,
//! HC1 and meeting-clustered (CR1) standard errors, and table rendering.

pub mod fe;
pub mod ols;
pub mod regress;
pub mod render;
pub mod spec;
pub mod vcov;

pub use fe::{within_transform, Within};
pub use ols::{ols_fit, r_squared, OlsFit, RANK_TOLERANCE};
pub use regress::{p_value, run_regression, stars, t_critical, CoefEstimate, DataFrame, DataSource, GroupKind, RegressionResult, DROP_ABSORBED, INTERCEPT};
pub use render::{format_coef, format_se, render_csv, render_json, render_table, table_cells, Layout};
pub use spec::{FixedEffects, RegressionSpec, SampleFilter, SeType, TableSpec};
pub use vcov::{classical_vcov, cluster_meat, cluster_robust_vcov, cr1_factor, dense_ids, hc1_factor, hc1_vcov, hc_meat, sandwich};
