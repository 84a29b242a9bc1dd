// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::Serialize;

use super::regress::{CoefEstimate, RegressionResult};
use super::spec::FixedEffects;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Layout {
    /// Coefficient line, standard error on the line below.
    #[default]
    Stacked,
    /// `coef (se)` in one cell.
    Inline,
}

pub fn format_coef(c: &CoefEstimate) -> String {
    if c.is_dropped() {
        return "0.000".into();
    }
    format!("{:.3}{}", c.coef, c.stars)
}

pub fn format_se(c: &CoefEstimate) -> String {
    match (c.is_dropped(), c.se) {
        (false, Some(se)) => format!("({se:.3})"),
        _ => "(.)".into(),
    }
}

fn yes_no(b: bool) -> String {
    if b { "Yes" } else { "No" }.into()
}

/// The table as a grid of cells: header rows, regressor rows, footer rows.
pub fn table_cells(results: &[RegressionResult], labels: &BTreeMap<String, String>, layout: Layout) -> Result<Vec<Vec<String>>> {
    if results.is_empty() {
        return Err(Error::spec("cannot render an empty table"));
    }
    let mut names: Vec<&str> = Vec::new();
    for r in results {
        for c in &r.coefficients {
            if !names.contains(&c.name.as_str()) {
                names.push(&c.name);
            }
        }
    }
    let mut grid = Vec::new();
    let mut head = vec![String::new()];
    head.extend((1..=results.len()).map(|i| format!("({i})")));
    grid.push(head);
    let mut deps = vec![String::new()];
    deps.extend(results.iter().map(|r| r.label.clone()));
    grid.push(deps);

    for name in names {
        let label = labels.get(name).cloned().unwrap_or_else(|| name.to_string());
        let cells: Vec<Option<&CoefEstimate>> = results.iter().map(|r| r.coefficients.iter().find(|c| c.name == name)).collect();
        match layout {
            Layout::Stacked => {
                let mut top = vec![label];
                let mut bottom = vec![String::new()];
                for c in &cells {
                    top.push(c.map(format_coef).unwrap_or_default());
                    bottom.push(c.map(format_se).unwrap_or_default());
                }
                grid.push(top);
                grid.push(bottom);
            }
            Layout::Inline => {
                let mut row = vec![label];
                row.extend(cells.iter().map(|c| c.map(|c| format!("{} {}", format_coef(c), format_se(c))).unwrap_or_default()));
                grid.push(row);
            }
        }
    }
    let footer = |label: &str, f: &dyn Fn(&RegressionResult) -> String| {
        let mut row = vec![label.to_string()];
        row.extend(results.iter().map(f));
        row
    };
    grid.push(footer("Chair FE", &|r| yes_no(r.fixed_effects == FixedEffects::Chair)));
    grid.push(footer("Meeting FE", &|r| yes_no(r.fixed_effects == FixedEffects::Meeting)));
    grid.push(footer("r^2", &|r| format!("{:.3}", r.r_squared)));
    grid.push(footer("N", &|r| r.n_obs.to_string()));
    Ok(grid)
}

/// Plain-text grid, label column left-aligned, value columns right-aligned.
pub fn render_table(results: &[RegressionResult], labels: &BTreeMap<String, String>, layout: Layout) -> Result<String> {
    let grid = table_cells(results, labels, layout)?;
    let ncols = grid[0].len();
    let widths: Vec<usize> = (0..ncols).map(|j| grid.iter().map(|r| r[j].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &grid {
        let mut line = String::new();
        for (j, cell) in row.iter().enumerate() {
            let pad = widths[j] - cell.chars().count();
            if j == 0 {
                line.push_str(cell);
                line.push_str(&" ".repeat(pad));
            } else {
                line.push_str("  ");
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    Ok(out)
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(results: &[RegressionResult], labels: &BTreeMap<String, String>) -> Result<String> {
    let grid = table_cells(results, labels, Layout::Stacked)?;
    let mut out = String::new();
    for row in grid {
        out.push_str(&row.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport<'a> {
    pub provenance: String,
    pub title: &'a str,
    pub columns: &'a [RegressionResult],
}

pub fn render_json(title: &str, results: &[RegressionResult], provenance: &str) -> Result<String> {
    let report = TableReport { provenance: provenance.to_string(), title, columns: results };
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::spec::SeType;

    fn result(coefs: Vec<CoefEstimate>, fe: FixedEffects) -> RegressionResult {
        RegressionResult {
            dependent: "abs_pct_spy".into(),
            label: "% Δ SPY".into(),
            fixed_effects: fe,
            se_type: SeType::ClusterMeeting,
            coefficients: coefs,
            intercept: None,
            r_squared: 0.049,
            r_squared_overall: 0.3,
            n_obs: 1359,
            n_clusters: Some(46),
            absorbed: 46,
            df_resid: 1300,
            df_inference: 45.0,
            vcov_names: vec![],
            vcov: vec![],
            sample_filter: None,
            dof_note: String::new(),
        }
    }

    fn est(name: &str, coef: f64, se: f64, stars: &str) -> CoefEstimate {
        CoefEstimate { name: name.into(), coef, se: Some(se), t_stat: None, p_value: None, stars: stars.into(), dropped: None }
    }

    #[test]
    fn stacked_cell_shape() {
        let r = result(vec![est("negative_facial_lag", -0.007, 0.002, "**")], FixedEffects::Meeting);
        let grid = table_cells(&[r], &BTreeMap::new(), Layout::Stacked).unwrap();
        assert_eq!(grid[2][1], "-0.007**");
        assert_eq!(grid[3][1], "(0.002)");
        assert_eq!(grid[4], vec!["Chair FE", "No"]);
        assert_eq!(grid[5], vec!["Meeting FE", "Yes"]);
        assert_eq!(grid[6], vec!["r^2", "0.049"]);
        assert_eq!(grid[7], vec!["N", "1359"]);
    }

    #[test]
    fn dropped_cell_renders_placeholder() {
        let mut d = est("mpu", 0.0, 0.0, "");
        d.se = None;
        d.dropped = Some("absorbed by fixed effects".into());
        let r = result(vec![d], FixedEffects::Meeting);
        let inline = table_cells(std::slice::from_ref(&r), &BTreeMap::new(), Layout::Inline).unwrap();
        assert_eq!(inline[2][1], "0.000 (.)");
        let text = render_table(&[r], &BTreeMap::new(), Layout::Stacked).unwrap();
        assert!(text.contains("0.000") && text.contains("(.)"));
    }

    #[test]
    fn tiny_negative_keeps_sign() {
        assert_eq!(format_coef(&est("x", -0.0001, 0.0, "")), "-0.000");
    }

    #[test]
    fn empty_table_is_an_error() {
        assert!(render_table(&[], &BTreeMap::new(), Layout::Stacked).is_err());
    }

    #[test]
    fn labels_and_missing_cells() {
        let a = result(vec![est("x", 1.0, 0.5, "*")], FixedEffects::None);
        let b = result(vec![est("z", 2.0, 0.5, "")], FixedEffects::Chair);
        let labels = BTreeMap::from([("x".to_string(), "Ex".to_string())]);
        let csv = render_csv(&[a, b], &labels).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], ",(1),(2)");
        assert_eq!(lines[2], "Ex,1.000*,");
        assert_eq!(lines[4], "z,,2.000");
    }
}
