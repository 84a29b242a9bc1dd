// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedEffects {
    #[default]
    None,
    Chair,
    Meeting,
}

impl FromStr for FixedEffects {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(FixedEffects::None),
            "chair" => Ok(FixedEffects::Chair),
            "meeting" => Ok(FixedEffects::Meeting),
            other => Err(Error::spec(format!("unknown fixed effects {other:?} (expected none, chair or meeting)"))),
        }
    }
}

impl fmt::Display for FixedEffects {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixedEffects::None => "none",
            FixedEffects::Chair => "chair",
            FixedEffects::Meeting => "meeting",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SeType {
    Classical,
    Hc1,
    #[default]
    ClusterMeeting,
}

impl FromStr for SeType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "classical" => Ok(SeType::Classical),
            "hc1" | "robust" => Ok(SeType::Hc1),
            "cluster:meeting" | "cluster" => Ok(SeType::ClusterMeeting),
            other => Err(Error::spec(format!("unknown standard error type {other:?} (expected cluster:meeting, hc1 or classical)"))),
        }
    }
}

impl TryFrom<String> for SeType {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SeType> for String {
    fn from(s: SeType) -> String {
        s.to_string()
    }
}

impl fmt::Display for SeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeType::Classical => "classical",
            SeType::Hc1 => "hc1",
            SeType::ClusterMeeting => "cluster:meeting",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// Row predicate `<column> <op> <value>`, where the column may also be
/// `chair` or `meeting_id` (compared as text with `==`/`!=`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFilter {
    pub column: String,
    pub op: CompareOp,
    pub value: String,
}

impl FromStr for SampleFilter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        for (tok, op) in [("==", CompareOp::Eq), ("!=", CompareOp::Ne), ("<=", CompareOp::Le), (">=", CompareOp::Ge), ("<", CompareOp::Lt), (">", CompareOp::Gt)] {
            if let Some((l, r)) = s.split_once(tok) {
                let (column, value) = (l.trim().to_string(), r.trim().to_string());
                if column.is_empty() || value.is_empty() {
                    break;
                }
                return Ok(SampleFilter { column, op, value });
            }
        }
        Err(Error::spec(format!("cannot parse sample filter {s:?}")))
    }
}

impl SampleFilter {
    pub fn is_text(&self) -> bool {
        self.column == "chair" || self.column == "meeting_id"
    }

    pub fn matches_text(&self, v: &str) -> bool {
        match self.op {
            CompareOp::Eq => v.eq_ignore_ascii_case(&self.value),
            CompareOp::Ne => !v.eq_ignore_ascii_case(&self.value),
            _ => false,
        }
    }

    /// Absent values never match.
    pub fn matches_number(&self, v: Option<f64>) -> Result<bool> {
        let rhs: f64 = self.value.parse().map_err(|_| Error::spec(format!("sample filter value {:?} is not a number", self.value)))?;
        let Some(v) = v else { return Ok(false) };
        Ok(match self.op {
            CompareOp::Eq => v == rhs,
            CompareOp::Ne => v != rhs,
            CompareOp::Lt => v < rhs,
            CompareOp::Le => v <= rhs,
            CompareOp::Gt => v > rhs,
            CompareOp::Ge => v >= rhs,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSpec {
    pub dependent: String,
    pub regressors: Vec<String>,
    #[serde(default)]
    pub fixed_effects: FixedEffects,
    #[serde(default)]
    pub se: SeType,
    /// Column heading; defaults to the dependent variable.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub sample_filter: Option<String>,
}

impl RegressionSpec {
    pub fn new(dependent: &str, regressors: &[&str], fixed_effects: FixedEffects, se: SeType) -> Self {
        Self {
            dependent: dependent.into(),
            regressors: regressors.iter().map(|s| s.to_string()).collect(),
            fixed_effects,
            se,
            label: None,
            sample_filter: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dependent.trim().is_empty() {
            return Err(Error::spec("empty dependent variable"));
        }
        if self.regressors.iter().any(|r| r.trim() == self.dependent.trim()) {
            return Err(Error::spec(format!("dependent variable {:?} also appears among the regressors", self.dependent)));
        }
        let mut seen = std::collections::HashSet::new();
        for r in &self.regressors {
            if !seen.insert(r.trim()) {
                return Err(Error::spec(format!("regressor {r:?} listed twice")));
            }
        }
        if let Some(f) = &self.sample_filter {
            f.parse::<SampleFilter>()?;
        }
        Ok(())
    }
}

/// A table of regressions read from a spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    #[serde(default)]
    pub title: String,
    #[serde(rename = "column")]
    pub columns: Vec<RegressionSpec>,
    /// Display names for regressor rows.
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

impl TableSpec {
    pub fn parse_str(text: &str, origin: &Path) -> Result<Self> {
        let spec: TableSpec = toml::from_str(text).map_err(|e| Error::spec(format!("{}: {e}", origin.display())))?;
        if spec.columns.is_empty() {
            return Err(Error::spec(format!("{}: no [[column]] entries", origin.display())));
        }
        for (i, c) in spec.columns.iter().enumerate() {
            c.validate().map_err(|e| Error::spec(format!("{}: column {}: {e}", origin.display(), i + 1)))?;
        }
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text, path)
    }

    /// Replaces every column's SE type.
    pub fn with_se(mut self, se: SeType) -> Self {
        for c in &mut self.columns {
            c.se = se;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_toml() {
        let text = r#"
title = "demo"
[[column]]
dependent = "abs_pct_spy"
regressors = ["negative_facial_lag", "hawkish"]
fixed_effects = "meeting"
se = "hc1"

[[column]]
dependent = "abs_pct_vix"
regressors = ["negative_facial_lag"]

[labels]
negative_facial_lag = "Negative Facial"
"#;
        let t = TableSpec::parse_str(text, Path::new("demo.spec")).unwrap();
        assert_eq!(t.columns.len(), 2);
        assert_eq!(t.columns[0].fixed_effects, FixedEffects::Meeting);
        assert_eq!(t.columns[0].se, SeType::Hc1);
        assert_eq!(t.columns[1].se, SeType::ClusterMeeting);
        assert_eq!(t.labels["negative_facial_lag"], "Negative Facial");
    }

    #[test]
    fn dependent_among_regressors_rejected() {
        let s = RegressionSpec::new("y", &["x", "y"], FixedEffects::None, SeType::Hc1);
        assert!(matches!(s.validate(), Err(Error::Spec(_))));
    }

    #[test]
    fn se_round_trip() {
        for s in [SeType::Classical, SeType::Hc1, SeType::ClusterMeeting] {
            assert_eq!(s.to_string().parse::<SeType>().unwrap(), s);
        }
        assert!("hc3".parse::<SeType>().is_err());
    }

    #[test]
    fn sample_filter_parsing() {
        let f: SampleFilter = "chair == Powell".parse().unwrap();
        assert!(f.is_text() && f.matches_text("powell"));
        let g: SampleFilter = "cfquart>=3".parse().unwrap();
        assert!(g.matches_number(Some(3.0)).unwrap());
        assert!(!g.matches_number(None).unwrap());
        assert!("nonsense".parse::<SampleFilter>().is_err());
    }
}
