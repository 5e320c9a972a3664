use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn vxf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vxf")).args(args).output().expect("spawn vxf")
}

fn error_of(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stderr).unwrap_or_else(|e| {
        panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr))
    });
    v["error"].clone()
}

fn path(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn column(file: &str, name: &str) -> Vec<String> {
    let mut rd = csv::Reader::from_path(file).unwrap();
    let idx = rd.headers().unwrap().iter().position(|h| h == name).unwrap();
    rd.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

#[test]
fn vax_writes_matrix_and_report() {
    let d = tempfile::tempdir().unwrap();
    let (out, rep) = (path(&d, "vax.csv"), path(&d, "report.csv"));
    let o = vxf(&["vax", "--iot", &fixture("iot_2014.csv"), "--out", &out, "--report", &rep]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(column(&out, "vax").len(), 12);
    assert_eq!(column(&rep, "country"), ["AUS", "BRA", "CHN", "DEU"]);
    assert!(o.stderr.is_empty());
}

#[test]
fn missing_input_is_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let o = vxf(&["vax", "--iot", "/nonexistent/table.csv", "--out", &path(&d, "v.csv")]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_of(&o)["code"], "input_not_found");
}

#[test]
fn identity_violation_is_exit_3() {
    let d = tempfile::tempdir().unwrap();
    let o = vxf(&["vax", "--iot", &fixture("iot_bad_identity.csv"), "--out", &path(&d, "v.csv")]);
    assert_eq!(o.status.code(), Some(3));
    let e = error_of(&o);
    assert_eq!(e["code"], "accounting_identity");
    assert_eq!(e["details"]["activity"], "BRA/C10");
    assert!(!d.path().join("v.csv").exists());
}

#[test]
fn usage_errors_are_exit_2() {
    let o = vxf(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_of(&o)["code"], "usage");
    let o = vxf(&["--tol", "-1", "rank", "--scores", &fixture("scores.csv")]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(vxf(&["--help"]).status.code(), Some(0));
}

#[test]
fn vxf_scores_have_unit_mean() {
    let d = tempfile::tempdir().unwrap();
    let (vax, scores, q) = (path(&d, "vax.csv"), path(&d, "s.csv"), path(&d, "q.csv"));
    assert!(vxf(&["vax", "--iot", &fixture("iot_2014.csv"), "--out", &vax]).status.success());
    let o = vxf(&["metrics", "--metric", "vxf", "--input", &vax, "--out", &scores, "--complexity-out", &q]);
    assert_eq!(o.status.code(), Some(0));
    for f in [&scores, &q] {
        let v: Vec<f64> = column(f, "value").iter().map(|s| s.parse().unwrap()).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 1.0).abs() < 1e-9, "{f}: {mean}");
    }
    assert_eq!(column(&scores, "rank"), ["1", "2", "3", "4"]);
    assert!(column(&scores, "converged").iter().all(|c| c == "true"));
}

#[test]
fn eci_on_column_stochastic_is_exit_5() {
    let d = tempfile::tempdir().unwrap();
    let o = vxf(&["metrics", "--metric", "eci", "--input", &fixture("column_stochastic.csv"), "--out", &path(&d, "e.csv")]);
    assert_eq!(o.status.code(), Some(5));
    assert_eq!(error_of(&o)["code"], "eci_degenerate_weighted");
}

#[test]
fn unconverged_ef_is_exit_4_with_partial_output() {
    let d = tempfile::tempdir().unwrap();
    let out = path(&d, "ef.csv");
    let o = vxf(&["--max-iter", "1", "metrics", "--metric", "ef", "--input", &fixture("binary.csv"), "--out", &out]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_of(&o)["code"], "not_converged");
    let flags = column(&out, "converged");
    assert_eq!(flags.len(), 6);
    assert!(flags.iter().all(|c| c == "false"));
}

#[test]
fn ef_and_eci_from_gross_exports() {
    let d = tempfile::tempdir().unwrap();
    for (metric, extra) in [("ef", None), ("eci", None), ("eci", Some("eigenvector"))] {
        let out = path(&d, &format!("{metric}.csv"));
        let mut args = vec!["metrics", "--metric", metric, "--input-kind", "exports"];
        let input = fixture("exports.csv");
        args.extend(["--input", &input, "--out", &out]);
        if let Some(m) = extra {
            args.extend(["--eci-method", m]);
        }
        let o = vxf(&args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(column(&out, "country").len(), 6);
    }
}

#[test]
fn ef_rejects_weighted_input() {
    let d = tempfile::tempdir().unwrap();
    let o = vxf(&["metrics", "--metric", "ef", "--input", &fixture("column_stochastic.csv"), "--out", &path(&d, "x.csv")]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_of(&o)["code"], "not_binary");
}

fn regress_args<'a>(aux: &'a str, scores: &'a str, out: &'a str) -> Vec<&'a str> {
    vec!["regress", "--aux", aux, "--scores", scores, "--out", out]
}

#[test]
fn regress_on_complete_panel() {
    let d = tempfile::tempdir().unwrap();
    let (out, table, scatter) = (path(&d, "coef.csv"), path(&d, "t.txt"), path(&d, "sc.csv"));
    let scores = fixture("scores.csv");
    let aux = fixture("aux.csv");
    let mut args = regress_args(&aux, &scores, &out);
    args.extend(["--table", &table, "--scatter", &scatter]);
    let o = vxf(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let terms = column(&out, "term");
    assert_eq!(terms.iter().filter(|t| *t == "dlog_VXF").count(), 2);
    // LUX is excluded by default.
    assert!(column(&out, "n_obs").iter().all(|n| n == "24"));
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.contains("Observations"));
    assert_eq!(column(&scatter, "country").len(), 8);
}

#[test]
fn regress_names_missing_endpoint() {
    let d = tempfile::tempdir().unwrap();
    let out = path(&d, "coef.csv");
    let (aux, scores) = (fixture("aux.csv"), fixture("scores_missing_2009.csv"));
    let o = vxf(&regress_args(&aux, &scores, &out));
    assert_eq!(o.status.code(), Some(6));
    let e = error_of(&o);
    assert_eq!(e["code"], "panel_incomplete");
    assert_eq!(e["details"]["missing"][0]["country"], "DNK");
    assert_eq!(e["details"]["missing"][0]["year"], 2009);
    assert!(e["message"].as_str().unwrap().contains("DNK 2009"));

    let o = vxf(&[regress_args(&aux, &scores, &out), vec!["--allow-incomplete"]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(column(&out, "n_obs").iter().all(|n| n == "23"));
}

#[test]
fn ingest_round_trips_wide_and_long() {
    let d = tempfile::tempdir().unwrap();
    let (wide, long) = (path(&d, "w.csv"), path(&d, "l.csv"));
    let src = fixture("iot_2013_2014.csv");
    assert!(vxf(&["ingest", "--iot", &src, "--out", &wide, "--out-format", "wide-csv"]).status.success());
    assert!(vxf(&["ingest", "--iot", &wide, "--out", &long]).status.success());
    let mut vax = Vec::new();
    for (k, f) in [&src, &wide, &long].into_iter().enumerate() {
        let out = path(&d, &format!("vax{k}.csv"));
        assert!(vxf(&["vax", "--iot", f, "--out", &out]).status.success());
        vax.push(column(&out, "vax").iter().map(|s| s.parse::<f64>().unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(vax[0].len(), 24);
    for v in &vax[1..] {
        for (a, b) in vax[0].iter().zip(v) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn row_order_does_not_matter() {
    let d = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("iot_2014.csv")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let header = lines.remove(0);
    // Reverse inside each block so sectors still appear in the same order.
    let (flows, rest): (Vec<&str>, Vec<&str>) = lines.iter().partition(|l| !l.contains(",VA,") && !l.contains(",GO,"));
    let mut shuffled: Vec<&str> = rest.clone();
    shuffled.extend(flows.iter().rev());
    let permuted = d.path().join("permuted.csv");
    std::fs::write(&permuted, format!("{header}\n{}\n", shuffled.join("\n"))).unwrap();

    let (a, b) = (path(&d, "a.csv"), path(&d, "b.csv"));
    assert!(vxf(&["vax", "--iot", &fixture("iot_2014.csv"), "--out", &a]).status.success());
    let o = vxf(&["vax", "--iot", permuted.to_str().unwrap(), "--out", &b]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (va, vb) = (column(&a, "vax"), column(&b, "vax"));
    assert_eq!(column(&a, "sector"), column(&b, "sector"));
    for (x, y) in va.iter().zip(&vb) {
        let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
        assert!((x - y).abs() <= 1e-10 * x.abs());
    }
}

#[test]
fn aux_rows_checked_against_table_countries() {
    let o = vxf(&["ingest", "--iot", &fixture("iot_2014.csv"), "--aux", &fixture("aux.csv")]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_of(&o)["code"], "unknown_country");
    let o = vxf(&["ingest", "--aux", &fixture("aux.csv")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn outputs_and_manifests_are_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let mut digests = Vec::new();
    for run in 0..2 {
        let (vax, m) = (path(&d, &format!("vax{run}.csv")), path(&d, &format!("m{run}.json")));
        let o = vxf(&["vax", "--iot", &fixture("iot_2014.csv"), "--out", &vax, "--manifest", &m]);
        assert!(o.status.success());
        digests.push((std::fs::read(&vax).unwrap(), std::fs::read_to_string(&m).unwrap()));
    }
    assert_eq!(digests[0].0, digests[1].0);
    // Manifests differ only in the output path.
    assert_eq!(digests[0].1.replace("vax0.csv", "vax1.csv").replace("m0", "m1"), digests[1].1);
}

#[test]
fn manifest_verify_and_replay() {
    let d = tempfile::tempdir().unwrap();
    let (vax, scores, m1, m2) = (path(&d, "vax.csv"), path(&d, "s.csv"), path(&d, "m1.json"), path(&d, "m2.json"));
    assert!(vxf(&["vax", "--iot", &fixture("iot_2014.csv"), "--out", &vax, "--manifest", &m1]).status.success());
    let o = vxf(&["--tol", "1e-12", "metrics", "--metric", "vxf", "--input", &vax, "--out", &scores, "--manifest", &m2]);
    assert!(o.status.success());

    let m: Value = serde_json::from_str(&std::fs::read_to_string(&m2).unwrap()).unwrap();
    assert_eq!(m["params"]["tol"], 1e-12);
    assert_eq!(m["command"], "metrics");
    assert_eq!(m["inputs"][0]["path"], vax.as_str());

    assert_eq!(vxf(&["manifest", "verify", &m2]).status.code(), Some(0));
    let before = std::fs::read(&scores).unwrap();
    std::fs::remove_file(&scores).unwrap();
    let o = vxf(&["manifest", "replay", &m2]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&scores).unwrap(), before);

    std::fs::write(&scores, "tampered\n").unwrap();
    let o = vxf(&["manifest", "verify", &m2]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_of(&o)["code"], "manifest_mismatch");
}

#[test]
fn adjacency_kinds() {
    let d = tempfile::tempdir().unwrap();
    let b = path(&d, "b.csv");
    assert!(vxf(&["adjacency", "--kind", "binary", "--exports", &fixture("exports.csv"), "--out", &b]).status.success());
    assert!(column(&b, "value").iter().all(|v| matches!(v.parse::<f64>().unwrap(), 0.0 | 1.0)));

    let (vax, w) = (path(&d, "vax.csv"), path(&d, "w.csv"));
    assert!(vxf(&["vax", "--iot", &fixture("iot_2014.csv"), "--out", &vax]).status.success());
    assert!(vxf(&["adjacency", "--kind", "weighted", "--vax", &vax, "--out", &w]).status.success());
    let acts = column(&w, "activity");
    let vals: Vec<f64> = column(&w, "value").iter().map(|v| v.parse().unwrap()).collect();
    for a in ["A01", "C10", "M72"] {
        let s: f64 = acts.iter().zip(&vals).filter(|(x, _)| *x == a).map(|(_, v)| v).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn json_output_format() {
    let d = tempfile::tempdir().unwrap();
    let out = path(&d, "rank.json");
    let o = vxf(&["--format", "json", "rank", "--scores", &fixture("scores.csv"), "--year", "2014", "--out", &out]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 9);
    assert_eq!(v[0]["rank"], 1);
}
