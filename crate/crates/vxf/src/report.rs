//! Regression tables: CSV records and a plain-text layout with estimates,
//! robust standard errors in parentheses and significance stars.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use vxf_core::RegressionResult;

/// Two-sided p-value of a t statistic.
pub fn p_value(t: f64, df: usize) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    match StudentsT::new(0.0, 1.0, df as f64) {
        Ok(dist) => 2.0 * (1.0 - dist.cdf(t.abs())),
        Err(_) => f64::NAN,
    }
}

/// `***` below 0.01, `**` below 0.05, `*` below 0.1.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub spec: String,
    pub metric: String,
    pub term: String,
    pub estimate: f64,
    pub robust_se: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub stars: String,
    pub covariance: String,
    pub n_obs: usize,
    pub df_resid: usize,
    pub r2: f64,
    pub adj_r2: f64,
    pub r2_overall: f64,
}

pub fn coefficient_records(results: &[RegressionResult]) -> Vec<CoefficientRecord> {
    let mut out = Vec::new();
    for r in results {
        for c in &r.coefficients {
            let t = c.estimate / c.robust_se;
            let p = p_value(t, r.df_resid);
            out.push(CoefficientRecord {
                spec: r.spec.name().to_string(),
                metric: r.metric.name().to_string(),
                term: c.name.clone(),
                estimate: c.estimate,
                robust_se: c.robust_se,
                t_stat: t,
                p_value: p,
                stars: stars(p).to_string(),
                covariance: r.covariance.name().to_string(),
                n_obs: r.n_obs,
                df_resid: r.df_resid,
                r2: r.r2,
                adj_r2: r.adj_r2,
                r2_overall: r.r2_overall,
            });
        }
    }
    out
}

fn term_group(name: &str) -> u8 {
    match name {
        "y_lag" => 0,
        "n" => 1,
        "dlog_K" => 2,
        _ if name.ends_with("_H") || name.contains("_H_") || name == "H_lag" => 4,
        _ => 3,
    }
}

/// Rows ordered as lagged income, population, capital, complexity terms in
/// order of appearance, then human capital.
fn term_order(results: &[RegressionResult]) -> Vec<String> {
    let mut terms: Vec<String> = Vec::new();
    for r in results {
        for c in &r.coefficients {
            if !terms.contains(&c.name) {
                terms.push(c.name.clone());
            }
        }
    }
    terms.sort_by_key(|t| term_group(t));
    terms
}

fn signed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // Avoid "-0.000".
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

pub fn render_table(results: &[RegressionResult]) -> String {
    let terms = term_order(results);
    let label_w = terms.iter().map(String::len).chain(["Adjusted R2".len(), "Dependent: dy".len()]).max().unwrap_or(12) + 2;
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::new()];
    let mut models = vec![String::new()];
    for (k, r) in results.iter().enumerate() {
        header.push(format!("({})", k + 1));
        models.push(format!("{} {}", r.metric.label(), r.spec.name()));
    }
    cells.push(header);
    cells.push(models);
    for term in &terms {
        let mut est = vec![term.clone()];
        let mut se = vec![String::new()];
        for r in results {
            match r.coefficient(term) {
                Some(c) => {
                    let p = p_value(c.estimate / c.robust_se, r.df_resid);
                    est.push(format!("{}{}", signed(c.estimate, 3), stars(p)));
                    se.push(format!("({})", signed(c.robust_se, 3)));
                }
                None => {
                    est.push(String::new());
                    se.push(String::new());
                }
            }
        }
        cells.push(est);
        cells.push(se);
    }
    let rule_at = cells.len();
    let stat = |name: &str, f: &dyn Fn(&RegressionResult) -> String| {
        let mut row = vec![name.to_string()];
        row.extend(results.iter().map(f));
        row
    };
    cells.push(stat("Country FE", &|_| "yes".into()));
    cells.push(stat("Period FE", &|_| "yes".into()));
    cells.push(stat("Observations", &|r| r.n_obs.to_string()));
    cells.push(stat("R2", &|r| format!("{:.3}", r.r2)));
    cells.push(stat("Adjusted R2", &|r| format!("{:.3}", r.adj_r2)));
    cells.push(stat("R2 (overall)", &|r| format!("{:.3}", r.r2_overall)));

    let col_w = cells
        .iter()
        .flat_map(|row| row.iter().skip(1).map(String::len))
        .max()
        .unwrap_or(8)
        .max(8)
        + 2;
    let width = label_w + col_w * results.len();
    let mut out = String::new();
    let rule = "=".repeat(width);
    let _ = writeln!(out, "{rule}");
    let _ = writeln!(out, "{:<label_w$}{:>w$}", "Dependent: dy", "", w = col_w * results.len());
    for (k, row) in cells.iter().enumerate() {
        if k == 2 || k == rule_at {
            let _ = writeln!(out, "{}", "-".repeat(width));
        }
        let _ = write!(out, "{:<label_w$}", row[0]);
        for c in &row[1..] {
            let _ = write!(out, "{c:>col_w$}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "{rule}");
    let cov = results.first().map_or("HC1", |r| r.covariance.name());
    let _ = writeln!(
        out,
        "Individual and period fixed effects in all models; {cov} robust standard errors.\n* p<0.1; ** p<0.05; *** p<0.01"
    );
    out
}

/// One point of the growth scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRecord {
    pub country: String,
    pub metric: String,
    pub start: i32,
    pub end: i32,
    pub gdp_growth: f64,
    pub metric_growth: f64,
}

/// Simple-regression summary of one scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterFitRecord {
    pub metric: String,
    pub start: i32,
    pub end: i32,
    pub n: usize,
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
}
