//! Least squares with two-way (country and period) fixed effects and
//! heteroskedasticity-robust covariance.
//!
//! Fixed effects are absorbed either with explicit dummies (one per country
//! plus one per period after the first, no intercept) or by the within
//! transformation. Both give identical slope estimates. `r2` is measured on
//! the demeaned model; `adj_r2` uses the residual degrees of freedom of the
//! dummy model, `n - p - N - T + 1`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::math::{mean, sum};
use crate::panel::{Metric, PanelDataset, PanelRow, Transform, WINDOWS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceType {
    Hc0,
    #[default]
    Hc1,
    Hc2,
    Hc3,
}

impl CovarianceType {
    pub fn name(self) -> &'static str {
        match self {
            CovarianceType::Hc0 => "HC0",
            CovarianceType::Hc1 => "HC1",
            CovarianceType::Hc2 => "HC2",
            CovarianceType::Hc3 => "HC3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hc0" => Some(CovarianceType::Hc0),
            "hc1" => Some(CovarianceType::Hc1),
            "hc2" => Some(CovarianceType::Hc2),
            "hc3" => Some(CovarianceType::Hc3),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
    /// `(X'X)^-1`.
    pub xtx_inv: DMatrix<f64>,
    pub rss: f64,
}

const COLLINEAR_TOL: f64 = 1e-10;

/// OLS through a QR factorization. A column whose component orthogonal to
/// the earlier columns is negligible is reported as collinear.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            what: "response",
            expected: n.to_string(),
            found: y.len().to_string(),
        });
    }
    if n < k {
        return Err(Error::InsufficientObservations { needed: k, have: n });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..k {
        let norm = x.column(j).norm();
        if norm == 0.0 || r[(j, j)].abs() <= COLLINEAR_TOL * norm {
            return Err(Error::Collinear {
                column: names.get(j).cloned().unwrap_or_else(|| alloc::format!("x{j}")),
            });
        }
    }
    let qty = qr.q().transpose() * y;
    let coefficients = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::Collinear { column: "?".into() })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::Collinear { column: "?".into() })?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let residuals = y - x * &coefficients;
    let rss = residuals.norm_squared();
    Ok(OlsFit {
        coefficients,
        residuals,
        xtx_inv,
        rss,
    })
}

/// Diagonal of the hat matrix `X (X'X)^-1 X'`.
pub fn leverage(x: &DMatrix<f64>, xtx_inv: &DMatrix<f64>) -> Vec<f64> {
    let xa = x * xtx_inv;
    (0..x.nrows())
        .map(|i| xa.row(i).dot(&x.row(i)))
        .collect()
}

/// Sandwich covariance `(X'X)^-1 X' diag(w_i e_i^2) X (X'X)^-1`.
///
/// `df_params` is the parameter count used in the HC1 correction and
/// `hat` the leverage used by HC2/HC3; both refer to the full model, which
/// may have more columns than `x` when fixed effects were partialled out.
pub fn robust_covariance(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    xtx_inv: &DMatrix<f64>,
    kind: CovarianceType,
    df_params: usize,
    hat: Option<&[f64]>,
) -> DMatrix<f64> {
    let (n, k) = x.shape();
    let mut meat = DMatrix::zeros(k, k);
    for i in 0..n {
        let e2 = residuals[i] * residuals[i];
        let h = hat.map_or(0.0, |h| h[i]);
        let w = match kind {
            CovarianceType::Hc0 | CovarianceType::Hc1 => e2,
            CovarianceType::Hc2 | CovarianceType::Hc3 if h >= 1.0 - 1e-12 => 0.0,
            CovarianceType::Hc2 => e2 / (1.0 - h),
            CovarianceType::Hc3 => e2 / ((1.0 - h) * (1.0 - h)),
        };
        if w == 0.0 {
            continue;
        }
        let xi = x.row(i);
        meat += w * xi.transpose() * xi;
    }
    let mut cov = xtx_inv * meat * xtx_inv;
    if kind == CovarianceType::Hc1 && n > df_params {
        cov *= n as f64 / (n - df_params) as f64;
    }
    cov
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSpec {
    /// Change in log GDP per capita on its lagged level, the change and
    /// lagged level of complexity, and the growth covariates.
    FirstDifferencedDynamic,
    /// Non-dynamic robustness model without lagged levels.
    WithinFe,
}

impl ModelSpec {
    pub fn name(self) -> &'static str {
        match self {
            ModelSpec::FirstDifferencedDynamic => "fd-dynamic",
            ModelSpec::WithinFe => "within-fe",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fd-dynamic" => Some(ModelSpec::FirstDifferencedDynamic),
            "within-fe" => Some(ModelSpec::WithinFe),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    #[default]
    DummyVariables,
    Within,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitOptions {
    pub covariance: CovarianceType,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub robust_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub spec: ModelSpec,
    pub metric: Metric,
    pub coefficients: Vec<Coefficient>,
    /// R² of the demeaned (within) model.
    pub r2: f64,
    pub adj_r2: f64,
    /// R² of the dummy-variable model against the raw mean of `dy`.
    pub r2_overall: f64,
    pub n_obs: usize,
    pub n_entities: usize,
    pub n_periods: usize,
    pub df_resid: usize,
    pub covariance: CovarianceType,
    /// Always `["individual", "time"]`.
    pub fixed_effects: [&'static str; 2],
    pub residuals: Vec<f64>,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// Names of the complexity regressors, e.g. `dlog_VXF` / `log_VXF_lag` or
/// `d_ECI` / `ECI_lag`.
pub fn complexity_names(metric: Metric, transform: Transform) -> (String, String) {
    match transform {
        Transform::Log => (
            alloc::format!("dlog_{}", metric.label()),
            alloc::format!("log_{}_lag", metric.label()),
        ),
        Transform::Level => (
            alloc::format!("d_{}", metric.label()),
            alloc::format!("{}_lag", metric.label()),
        ),
    }
}

fn human_capital_names(transform: Transform) -> (&'static str, &'static str) {
    match transform {
        Transform::Log => ("dlog_H", "log_H_lag"),
        Transform::Level => ("d_H", "H_lag"),
    }
}

type Column = (String, fn(&PanelRow) -> f64);

/// Regressor columns of a specification, in table order.
pub fn regressors(panel: &PanelDataset, spec: ModelSpec) -> Vec<Column> {
    let (dc, c_lag) = complexity_names(panel.metric, panel.metric_transform);
    let (dh, h_lag) = human_capital_names(panel.human_capital_transform);
    let mut cols: Vec<Column> = Vec::new();
    if spec == ModelSpec::FirstDifferencedDynamic {
        cols.push(("y_lag".into(), |r| r.y_lag));
    }
    cols.push(("n".into(), |r| r.n));
    cols.push(("dlog_K".into(), |r| r.dk));
    cols.push((dc, |r| r.dc));
    if spec == ModelSpec::FirstDifferencedDynamic {
        cols.push((c_lag, |r| r.c_lag));
    }
    cols.push((dh.into(), |r| r.dh));
    if spec == ModelSpec::FirstDifferencedDynamic {
        cols.push((h_lag.into(), |r| r.h_lag));
    }
    cols
}

/// Dense design pieces for a two-way fixed-effects model.
#[derive(Debug, Clone)]
pub struct TwoWayDesign {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub entity: Vec<usize>,
    pub period: Vec<usize>,
    pub entity_names: Vec<String>,
    pub n_periods: usize,
}

impl TwoWayDesign {
    pub fn from_panel(panel: &PanelDataset, spec: ModelSpec) -> Self {
        let cols = regressors(panel, spec);
        let entity_names = panel.countries();
        let index: BTreeMap<&str, usize> = entity_names
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        let n = panel.rows.len();
        let x = DMatrix::from_fn(n, cols.len(), |i, j| (cols[j].1)(&panel.rows[i]));
        let y = DVector::from_fn(n, |i, _| panel.rows[i].dy);
        Self {
            names: cols.into_iter().map(|c| c.0).collect(),
            x,
            y,
            entity: panel.rows.iter().map(|r| index[r.country.as_str()]).collect(),
            period: panel.rows.iter().map(|r| r.period).collect(),
            entity_names,
            n_periods: WINDOWS.len(),
        }
    }

    pub fn n_entities(&self) -> usize {
        self.entity_names.len()
    }

    /// Periods that actually occur.
    fn used_periods(&self) -> Vec<usize> {
        let mut p = self.period.clone();
        p.sort_unstable();
        p.dedup();
        p
    }

    /// Country dummies (all) followed by period dummies (all but the first
    /// period present).
    pub fn dummies(&self) -> (DMatrix<f64>, Vec<String>) {
        let n = self.y.len();
        let periods = self.used_periods();
        let ne = self.n_entities();
        let nd = ne + periods.len().saturating_sub(1);
        let mut d = DMatrix::zeros(n, nd);
        for i in 0..n {
            d[(i, self.entity[i])] = 1.0;
            if let Some(k) = periods.iter().position(|&p| p == self.period[i]) {
                if k > 0 {
                    d[(i, ne + k - 1)] = 1.0;
                }
            }
        }
        let mut names: Vec<String> = self
            .entity_names
            .iter()
            .map(|c| alloc::format!("fe_country[{c}]"))
            .collect();
        for &p in periods.iter().skip(1) {
            let (a, b) = WINDOWS.get(p).copied().unwrap_or((0, 0));
            names.push(alloc::format!("fe_period[{a}-{b}]"));
        }
        (d, names)
    }

    /// Residualizes every column of `m` on the fixed effects by alternating
    /// entity and period demeaning until the largest update is below 1e-14
    /// of the column scale. Exact after one sweep for balanced panels.
    pub fn within(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = m.clone();
        let ne = self.n_entities();
        let np = self.n_periods;
        for mut col in out.column_iter_mut() {
            let scale = col.amax().max(1.0);
            for _ in 0..10_000 {
                let mut shift: f64 = 0.0;
                for (groups, ids) in [(ne, &self.entity), (np, &self.period)] {
                    let mut s = vec![0.0; groups];
                    let mut cnt = vec![0usize; groups];
                    for (i, &g) in ids.iter().enumerate() {
                        s[g] += col[i];
                        cnt[g] += 1;
                    }
                    for (i, &g) in ids.iter().enumerate() {
                        let m = s[g] / cnt[g] as f64;
                        col[i] -= m;
                        shift = shift.max(m.abs());
                    }
                }
                if shift <= 1e-14 * scale {
                    break;
                }
            }
        }
        out
    }
}

fn fit_design(
    design: &TwoWayDesign,
    spec: ModelSpec,
    metric: Metric,
    opts: FitOptions,
) -> Result<RegressionResult> {
    let n = design.y.len();
    let p = design.x.ncols();
    let (d, d_names) = design.dummies();
    let k_total = p + d.ncols();
    if n <= k_total {
        return Err(Error::InsufficientObservations {
            needed: k_total + 1,
            have: n,
        });
    }

    // y and X residualized on the fixed effects alone; gives the within TSS
    // and, for the within estimator, the regression inputs.
    let dummy_fit = ols(&d, &design.y, &d_names)?;
    let tss_within = dummy_fit.rss;

    let (coef, residuals, cov) = match opts.estimator {
        Estimator::DummyVariables => {
            let mut full = DMatrix::zeros(n, k_total);
            full.columns_mut(0, p).copy_from(&design.x);
            full.columns_mut(p, d.ncols()).copy_from(&d);
            let mut names = design.names.clone();
            names.extend(d_names.iter().cloned());
            let fit = ols(&full, &design.y, &names)?;
            let hat = leverage(&full, &fit.xtx_inv);
            let cov = robust_covariance(&full, &fit.residuals, &fit.xtx_inv, opts.covariance, k_total, Some(&hat));
            (
                fit.coefficients.rows(0, p).into_owned(),
                fit.residuals,
                cov.view((0, 0), (p, p)).into_owned(),
            )
        }
        Estimator::Within => {
            let xw = design.within(&design.x);
            let yw = design.within(&DMatrix::from_column_slice(n, 1, design.y.as_slice()));
            let yw = DVector::from_column_slice(yw.as_slice());
            let fit = ols(&xw, &yw, &design.names)?;
            let hat_d = leverage(&d, &dummy_fit.xtx_inv);
            let hat_x = leverage(&xw, &fit.xtx_inv);
            let hat: Vec<f64> = hat_d.iter().zip(&hat_x).map(|(a, b)| a + b).collect();
            let cov = robust_covariance(&xw, &fit.residuals, &fit.xtx_inv, opts.covariance, k_total, Some(&hat));
            (fit.coefficients, fit.residuals, cov)
        }
    };

    let rss = residuals.norm_squared();
    let r2 = if tss_within > 0.0 { 1.0 - rss / tss_within } else { 0.0 };
    let df_resid = n - k_total;
    let adj_r2 = 1.0 - (1.0 - r2) * (n - 1) as f64 / df_resid as f64;
    let y_mean = mean(design.y.as_slice());
    let tss = sum(design.y.iter().map(|v| (v - y_mean) * (v - y_mean)));
    let r2_overall = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };

    let coefficients = design
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| Coefficient {
            name: name.clone(),
            estimate: coef[j],
            robust_se: crate::math::sqrt(cov[(j, j)]),
        })
        .collect();

    Ok(RegressionResult {
        spec,
        metric,
        coefficients,
        r2,
        adj_r2,
        r2_overall,
        n_obs: n,
        n_entities: design.n_entities(),
        n_periods: design.used_periods().len(),
        df_resid,
        covariance: opts.covariance,
        fixed_effects: ["individual", "time"],
        residuals: residuals.iter().copied().collect(),
    })
}

pub fn fit_panel(panel: &PanelDataset, spec: ModelSpec, opts: FitOptions) -> Result<RegressionResult> {
    let design = TwoWayDesign::from_panel(panel, spec);
    fit_design(&design, spec, panel.metric, opts)
}

pub fn fit_fd_dynamic(panel: &PanelDataset, opts: FitOptions) -> Result<RegressionResult> {
    fit_panel(panel, ModelSpec::FirstDifferencedDynamic, opts)
}

pub fn fit_within_fe(panel: &PanelDataset, opts: FitOptions) -> Result<RegressionResult> {
    fit_panel(panel, ModelSpec::WithinFe, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleFit {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
    pub n: usize,
}

/// OLS of `y` on `x` with an intercept.
pub fn unconditional_correlation(x: &[f64], y: &[f64]) -> Result<SimpleFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "paired observations",
            expected: x.len().to_string(),
            found: y.len().to_string(),
        });
    }
    if x.len() < 3 {
        return Err(Error::InsufficientObservations {
            needed: 3,
            have: x.len(),
        });
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx = sum(x.iter().map(|v| (v - mx) * (v - mx)));
    let sxy = sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let syy = sum(y.iter().map(|v| (v - my) * (v - my)));
    if sxx == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(SimpleFit {
        intercept: my - slope * mx,
        slope,
        r2,
        n: x.len(),
    })
}
