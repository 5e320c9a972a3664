mod support;

use support::*;
use vxf_core::regression::{fit_fd_dynamic, fit_within_fe, Estimator, FitOptions, TwoWayDesign};
use vxf_core::{CovarianceType, Error, ModelSpec};

#[test]
fn recovers_generating_coefficient() {
    let mut r = rng(41);
    let panel = synthetic_panel(&mut r, 40, 0.3, 1e-6);
    let fd = fit_fd_dynamic(&panel, FitOptions::default()).unwrap();
    let fe = fit_within_fe(&panel, FitOptions::default()).unwrap();
    for res in [&fd, &fe] {
        let b = res.coefficient("dlog_VXF").unwrap().estimate;
        assert!((b - 0.3).abs() < 1e-3, "{b}");
        assert_eq!(res.n_obs, 120);
    }
    assert_eq!(fd.coefficients.len(), 7);
    assert_eq!(fe.coefficients.len(), 4);
}

#[test]
fn within_estimator_equals_dummy_variables() {
    let mut r = rng(42);
    let panel = synthetic_panel(&mut r, 25, 0.3, 0.1);
    for spec in [ModelSpec::FirstDifferencedDynamic, ModelSpec::WithinFe] {
        for cov in [CovarianceType::Hc0, CovarianceType::Hc1, CovarianceType::Hc2, CovarianceType::Hc3] {
            let dummy = vxf_core::regression::fit_panel(&panel, spec, FitOptions { covariance: cov, estimator: Estimator::DummyVariables }).unwrap();
            let within = vxf_core::regression::fit_panel(&panel, spec, FitOptions { covariance: cov, estimator: Estimator::Within }).unwrap();
            for (a, b) in dummy.coefficients.iter().zip(&within.coefficients) {
                assert!((a.estimate - b.estimate).abs() < 1e-10, "{}", a.name);
                assert!((a.robust_se - b.robust_se).abs() < 1e-10, "{} {cov:?}", a.name);
            }
            assert!((dummy.r2 - within.r2).abs() < 1e-10);
        }
    }
}

#[test]
fn hc1_matches_explicit_sandwich() {
    let mut r = rng(43);
    let panel = synthetic_panel(&mut r, 30, 0.3, 0.1);
    for spec in [ModelSpec::FirstDifferencedDynamic, ModelSpec::WithinFe] {
        let res = vxf_core::regression::fit_panel(&panel, spec, FitOptions::default()).unwrap();
        let (x, y) = full_design(&panel, spec);
        let o = ols_hc1(&x, &y);
        for (j, c) in res.coefficients.iter().enumerate() {
            assert!((c.estimate - o.beta[j]).abs() < 1e-10, "{}", c.name);
            assert!((c.robust_se - o.cov[j][j].sqrt()).abs() < 1e-10, "{}", c.name);
        }
        assert!(max_abs_diff(&res.residuals, &o.resid) < 1e-10);
    }
}

#[test]
fn residuals_orthogonal_to_design() {
    let mut r = rng(44);
    let panel = synthetic_panel(&mut r, 40, 0.3, 0.05);
    for spec in [ModelSpec::FirstDifferencedDynamic, ModelSpec::WithinFe] {
        for estimator in [Estimator::DummyVariables, Estimator::Within] {
            let res = vxf_core::regression::fit_panel(&panel, spec, FitOptions { estimator, ..Default::default() }).unwrap();
            let (x, _) = full_design(&panel, spec);
            for j in 0..x[0].len() {
                let dot: f64 = x.iter().zip(&res.residuals).map(|(row, e)| row[j] * e).sum();
                assert!(dot.abs() < 1e-8, "column {j}: {dot}");
            }
        }
    }
}

#[test]
fn duplicated_rows_leave_estimates_unchanged() {
    let mut r = rng(45);
    let panel = synthetic_panel(&mut r, 20, 0.3, 0.1);
    let mut doubled = panel.clone();
    doubled.rows.extend(panel.rows.iter().cloned());
    let a = fit_fd_dynamic(&panel, FitOptions::default()).unwrap();
    let b = fit_fd_dynamic(&doubled, FitOptions::default()).unwrap();
    for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
        assert!((x.estimate - y.estimate).abs() < 1e-10);
    }
    assert_eq!(b.n_obs, 2 * a.n_obs);
}

#[test]
fn r2_does_not_depend_on_omitted_country() {
    let mut r = rng(46);
    let panel = synthetic_panel(&mut r, 12, 0.3, 0.2);
    let res = fit_within_fe(&panel, FitOptions::default()).unwrap();
    let d = TwoWayDesign::from_panel(&panel, ModelSpec::WithinFe);
    let ne = d.n_entities();
    for omit in 0..ne {
        // Intercept + all but one country + all but one period.
        let dummies = |i: usize| -> Vec<f64> {
            let mut v = vec![1.0];
            v.extend((0..ne).filter(|&e| e != omit).map(|e| (d.entity[i] == e) as u8 as f64));
            v.extend((1..d.n_periods).map(|t| (d.period[i] == t) as u8 as f64));
            v
        };
        let y: Vec<f64> = d.y.iter().copied().collect();
        let full: Vec<Vec<f64>> = (0..y.len())
            .map(|i| d.x.row(i).iter().copied().chain(dummies(i)).collect())
            .collect();
        let fe_only: Vec<Vec<f64>> = (0..y.len()).map(dummies).collect();
        let rss: f64 = ols_hc1(&full, &y).resid.iter().map(|e| e * e).sum();
        let tss: f64 = ols_hc1(&fe_only, &y).resid.iter().map(|e| e * e).sum();
        assert!((1.0 - rss / tss - res.r2).abs() < 1e-10);
    }
    assert!(res.adj_r2 <= res.r2);
}

#[test]
fn collinear_regressor_is_named() {
    let mut r = rng(47);
    let mut panel = synthetic_panel(&mut r, 10, 0.3, 0.1);
    for row in panel.rows.iter_mut() {
        row.dh = 2.0 * row.dk;
    }
    match fit_within_fe(&panel, FitOptions::default()) {
        Err(Error::Collinear { column }) => assert_eq!(column, "dlog_H"),
        other => panic!("{other:?}"),
    }
}
