// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::fe::within_transform;
use super::ols::{ols_fit, r_squared};
use super::spec::{FixedEffects, RegressionSpec, SampleFilter, SeType};
use super::vcov::{classical_vcov, cluster_robust_vcov, dense_ids, hc1_vcov};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::panel::Panel;

pub const INTERCEPT: &str = "_cons";

pub const DROP_NO_VARIATION: &str = "no variation after deletion";
pub const DROP_ABSORBED: &str = "absorbed by fixed effects";
pub const DROP_COLLINEAR: &str = "collinear";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Meeting,
    Chair,
}

/// Tabular input to a regression: named numeric columns plus meeting and
/// chair labels per row.
pub trait DataSource {
    fn n_rows(&self) -> usize;
    fn column(&self, name: &str) -> Result<Vec<Option<f64>>>;
    fn labels(&self, kind: GroupKind) -> Vec<String>;
}

impl DataSource for Panel {
    fn n_rows(&self) -> usize {
        self.len()
    }

    fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        Panel::column(self, name)
    }

    fn labels(&self, kind: GroupKind) -> Vec<String> {
        match kind {
            GroupKind::Meeting => self.meeting_labels(),
            GroupKind::Chair => self.chair_labels(),
        }
    }
}

/// An in-memory [`DataSource`]; `a*b` names give products.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DataFrame {
    pub columns: BTreeMap<String, Vec<Option<f64>>>,
    pub meeting: Vec<String>,
    pub chair: Vec<String>,
}

impl DataFrame {
    pub fn new(meeting: Vec<String>, chair: Vec<String>) -> Self {
        Self { columns: BTreeMap::new(), meeting, chair }
    }

    pub fn with_column(mut self, name: &str, values: Vec<Option<f64>>) -> Self {
        self.columns.insert(name.to_string(), values);
        self
    }

    pub fn with_dense(self, name: &str, values: &[f64]) -> Self {
        self.with_column(name, values.iter().map(|&v| Some(v)).collect())
    }
}

impl DataSource for DataFrame {
    fn n_rows(&self) -> usize {
        self.meeting.len()
    }

    fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        if let Some((a, b)) = name.split_once('*') {
            let (ca, cb) = (self.column(a.trim())?, self.column(b.trim())?);
            return Ok(ca.into_iter().zip(cb).map(|(x, y)| Some(x? * y?)).collect());
        }
        self.columns.get(name).cloned().ok_or_else(|| Error::spec(format!("unknown column {name:?}")))
    }

    fn labels(&self, kind: GroupKind) -> Vec<String> {
        match kind {
            GroupKind::Meeting => self.meeting.clone(),
            GroupKind::Chair => self.chair.clone(),
        }
    }
}

pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

/// Two-sided p-value of a t statistic.
pub fn p_value(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    match StudentsT::new(0.0, 1.0, df) {
        Ok(dist) => (2.0 * dist.cdf(-t.abs())).min(1.0),
        Err(_) => f64::NAN,
    }
}

/// Two-sided critical value at level `alpha`.
pub fn t_critical(alpha: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).map(|d| d.inverse_cdf(1.0 - alpha / 2.0)).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefEstimate {
    pub name: String,
    pub coef: f64,
    pub se: Option<f64>,
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub stars: String,
    /// Reason the regressor left the fit, if it did.
    pub dropped: Option<String>,
}

impl CoefEstimate {
    fn dropped(name: &str, reason: &str) -> Self {
        Self { name: name.into(), coef: 0.0, se: None, t_stat: None, p_value: None, stars: String::new(), dropped: Some(reason.into()) }
    }

    pub fn is_dropped(&self) -> bool {
        self.dropped.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub dependent: String,
    pub label: String,
    pub fixed_effects: FixedEffects,
    pub se_type: SeType,
    /// In spec order.
    pub coefficients: Vec<CoefEstimate>,
    pub intercept: Option<CoefEstimate>,
    /// Within R² under fixed effects, centered R² otherwise.
    pub r_squared: f64,
    pub r_squared_overall: f64,
    pub n_obs: usize,
    pub n_clusters: Option<usize>,
    pub absorbed: usize,
    pub df_resid: usize,
    pub df_inference: f64,
    /// Names of the estimated parameters, indexing `vcov`.
    pub vcov_names: Vec<String>,
    pub vcov: Vec<Vec<f64>>,
    pub sample_filter: Option<String>,
    pub dof_note: String,
}

impl RegressionResult {
    pub fn coef(&self, name: &str) -> Option<&CoefEstimate> {
        self.coefficients.iter().chain(self.intercept.as_ref()).find(|c| c.name == name)
    }

    /// Two-sided `level` confidence interval for a fitted coefficient.
    pub fn confidence_interval(&self, name: &str, level: f64) -> Option<(f64, f64)> {
        let c = self.coef(name)?;
        let se = c.se?;
        let q = t_critical(1.0 - level, self.df_inference);
        Some((c.coef - q * se, c.coef + q * se))
    }
}

fn sample_mask(data: &impl DataSource, filter: Option<&str>) -> Result<Vec<bool>> {
    let n = data.n_rows();
    let Some(f) = filter else { return Ok(vec![true; n]) };
    let f: SampleFilter = f.parse()?;
    if f.is_text() {
        let kind = if f.column == "chair" { GroupKind::Chair } else { GroupKind::Meeting };
        return Ok(data.labels(kind).iter().map(|v| f.matches_text(v)).collect());
    }
    data.column(&f.column)?.into_iter().map(|v| f.matches_number(v)).collect()
}

/// Listwise deletion, optional within transform, OLS, covariance and stars.
pub fn run_regression(data: &impl DataSource, spec: &RegressionSpec) -> Result<RegressionResult> {
    spec.validate()?;
    let y_all = data.column(spec.dependent.trim())?;
    let x_all: Vec<Vec<Option<f64>>> = spec.regressors.iter().map(|r| data.column(r.trim())).collect::<Result<_>>()?;
    let mask = sample_mask(data, spec.sample_filter.as_deref())?;

    let candidates: Vec<usize> = (0..data.n_rows()).filter(|&i| mask[i] && y_all[i].is_some()).collect();
    let mut reasons: Vec<Option<&'static str>> = x_all
        .iter()
        .map(|col| candidates.iter().all(|&i| col[i].is_none()).then_some(DROP_NO_VARIATION))
        .collect();
    let active: Vec<usize> = (0..x_all.len()).filter(|&j| reasons[j].is_none()).collect();
    let rows: Vec<usize> = candidates.into_iter().filter(|&i| active.iter().all(|&j| x_all[j][i].is_some())).collect();
    let n = rows.len();

    let y: Vec<f64> = rows.iter().map(|&i| y_all[i].unwrap_or_default()).collect();
    let mut cols: Vec<Vec<f64>> = active.iter().map(|&j| rows.iter().map(|&i| x_all[j][i].unwrap_or_default()).collect()).collect();

    let pick = |kind: GroupKind| {
        let labels = data.labels(kind);
        let sub: Vec<String> = rows.iter().map(|&i| labels[i].clone()).collect();
        dense_ids(&sub).0
    };

    let (y_fit, absorbed, has_intercept) = match spec.fixed_effects {
        FixedEffects::None => {
            cols.insert(0, vec![1.0; n]);
            (y.clone(), 0, true)
        }
        fe => {
            let groups = pick(if fe == FixedEffects::Meeting { GroupKind::Meeting } else { GroupKind::Chair });
            let w = within_transform(&cols, &groups);
            for (a, &flat) in w.constant.iter().enumerate() {
                if flat {
                    reasons[active[a]] = Some(DROP_ABSORBED);
                }
            }
            let wy = within_transform(std::slice::from_ref(&y), &groups);
            cols = w.columns;
            (wy.columns.into_iter().next().unwrap_or_default(), w.n_groups, false)
        }
    };
    let offset = usize::from(has_intercept);
    // column index in the design -> spec regressor index (None for the intercept)
    let design_to_spec: Vec<Option<usize>> = (0..cols.len()).map(|c| if c < offset { None } else { Some(active[c - offset]) }).collect();

    if n == 0 {
        return Err(Error::Underdetermined { n_obs: 0, rank: 0 });
    }
    let x = Matrix::from_columns(&cols)?;
    let fit = ols_fit(&x, &y_fit)?;
    for &d in &fit.dropped {
        if let Some(j) = design_to_spec[d] {
            reasons[j].get_or_insert(DROP_COLLINEAR);
        }
    }
    let k = fit.rank();
    let xr = x.select_columns(&fit.retained);

    let (vcov, df_inference, n_clusters) = match spec.se {
        SeType::Classical => (classical_vcov(&fit.bread, &fit.residuals, k, absorbed)?, 0.0, None),
        SeType::Hc1 => (hc1_vcov(&xr, &fit.residuals, &fit.bread, absorbed)?, 0.0, None),
        SeType::ClusterMeeting => {
            let clusters = pick(GroupKind::Meeting);
            let g = clusters.iter().map(|&c| c + 1).max().unwrap_or(0);
            (cluster_robust_vcov(&xr, &fit.residuals, &clusters, &fit.bread, absorbed)?, (g as f64) - 1.0, Some(g))
        }
    };
    let df_resid = n - k - absorbed;
    let df_inference = if n_clusters.is_some() { df_inference } else { df_resid as f64 };

    let mut estimates: Vec<Option<CoefEstimate>> = vec![None; spec.regressors.len()];
    let mut intercept = None;
    let mut vcov_names = Vec::with_capacity(k);
    for (pos, &d) in fit.retained.iter().enumerate() {
        let coef = fit.coefficients[d];
        let se = vcov[(pos, pos)].max(0.0).sqrt();
        let t = coef / se;
        let p = p_value(t, df_inference);
        let name = match design_to_spec[d] {
            Some(j) => spec.regressors[j].trim().to_string(),
            None => INTERCEPT.to_string(),
        };
        vcov_names.push(name.clone());
        let est = CoefEstimate { name, coef, se: Some(se), t_stat: Some(t), p_value: Some(p), stars: stars(p).to_string(), dropped: None };
        match design_to_spec[d] {
            Some(j) => estimates[j] = Some(est),
            None => intercept = Some(est),
        }
    }
    if has_intercept && intercept.is_none() {
        intercept = Some(CoefEstimate::dropped(INTERCEPT, DROP_COLLINEAR));
    }
    let coefficients = estimates
        .into_iter()
        .enumerate()
        .map(|(j, e)| e.unwrap_or_else(|| CoefEstimate::dropped(spec.regressors[j].trim(), reasons[j].unwrap_or(DROP_COLLINEAR))))
        .collect();

    let ssr = fit.ssr();
    let r2 = r_squared(&y_fit, ssr);
    let r2_overall = r_squared(&y, ssr);
    let vcov_rows = (0..k).map(|i| (0..k).map(|j| vcov[(i, j)]).collect()).collect();
    Ok(RegressionResult {
        dependent: spec.dependent.trim().to_string(),
        label: spec.label.clone().unwrap_or_else(|| spec.dependent.trim().to_string()),
        fixed_effects: spec.fixed_effects,
        se_type: spec.se,
        coefficients,
        intercept,
        r_squared: r2,
        r_squared_overall: r2_overall,
        n_obs: n,
        n_clusters,
        absorbed,
        df_resid,
        df_inference,
        vcov_names,
        vcov: vcov_rows,
        sample_filter: spec.sample_filter.clone(),
        dof_note: format!("residual df = n - k - absorbed = {n} - {k} - {absorbed}"),
    })
}
