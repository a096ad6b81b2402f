use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mfig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfig")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = mfig(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn arithmetic_effectiveness() {
    let r = report(&["two-point", "--mean", "arithmetic", "--energy", "shannon", "--efct"]);
    let e = r["result"]["efct"]["efct"].as_f64().unwrap();
    assert!((e - 0.72134752).abs() < 1e-6, "{e}");
    assert_eq!(r["pass"], true);
}

#[test]
fn spectral_global_curvature_on_two_points() {
    let r = report(&["curvature", "--graph", "k2", "--mean", "spectral", "--energy", "shannon", "--global"]);
    let k = r["result"]["global"]["kappa0"].as_f64().unwrap();
    assert!((k - 0.5).abs() < 1e-4, "{k}");
}

#[test]
fn geometric_effectiveness_is_negative_infinity() {
    let r = report(&["two-point", "--mean", "geometric", "--efct"]);
    assert_eq!(r["result"]["efct"]["efct"], "-inf");
}

#[test]
fn garbage_config_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("out.json");
    let csv = dir.path().join("trace.csv");
    for text in ["", "not json", "{\"common\": 3}"] {
        std::fs::write(&cfg, text).unwrap();
        let o = mfig(&[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(2), "{text:?}");
        assert!(stderr(&o).contains("--config"));
        assert!(!out.exists() && !csv.exists());
    }
}

#[test]
fn unknown_names_exit_2_naming_the_field() {
    for (args, field) in [
        (vec!["curvature", "--mean", "median"], "--mean"),
        (vec!["curvature", "--graph", "petersen"], "--graph"),
        (vec!["curvature", "--energy", "{\"kind\":\"bogus\"}"], "--energy"),
        (vec!["curvature", "--graph", "file:/nonexistent/g.txt"], "--graph"),
        (vec!["flow", "--p0", "0.5,0.6"], "--p0"),
        (vec!["curvature", "--margin", "0.7"], "--margin"),
    ] {
        let o = mfig(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(field), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(mfig(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(mfig(&[]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_1_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lsi.json");
    let o = mfig(&["lsi", "--kappa", "50", "--samples", "200", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(r["pass"], false);
    assert!(r["result"]["lsi"]["worst_slack"].as_f64().unwrap() < 0.0);
}

#[test]
fn precondition_failure_exits_1() {
    let o = mfig(&["lsi", "--mean", "arithmetic", "--energy", "{\"kind\":\"linear\",\"V\":[0,1]}", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn reports_are_deterministic_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    let cfg = dir.path().join("cfg.json");
    let args = ["lsi", "--graph", "cycle4", "--samples", "300", "--seed", "9", "--kappa", "1.5"];
    for path in [&a, &b] {
        let mut full = args.to_vec();
        full.extend(["--out", path.to_str().unwrap()]);
        assert!(mfig(&full).status.success());
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());

    let r: Value = serde_json::from_slice(&bytes).unwrap();
    std::fs::write(&cfg, serde_json::to_string(&r["config"]).unwrap()).unwrap();
    assert!(mfig(&["--config", cfg.to_str().unwrap(), "--out", c.to_str().unwrap()]).status.success());
    assert_eq!(bytes, std::fs::read(&c).unwrap());
}

fn csv_header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn traces_are_written_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let c = csv.to_str().unwrap();

    report(&["geodesic", "--graph", "path3", "--p", "0.2,0.3,0.5", "--f", "1,0,-1", "--csv", c]);
    assert_eq!(csv_header(&csv), "t,p1,p2,p3,f1,f2,f3,gamma1,energy");

    report(&["flow", "--p0", "0.9,0.1", "--kappa", "2", "--csv", c]);
    assert_eq!(csv_header(&csv), "t,p1,p2,E,I,J");

    let r = report(&["costa", "--t-end", "0.5", "--csv", c]);
    assert_eq!(csv_header(&csv), "t,p1,p2,E,I,J,N");
    assert!((r["result"]["costa"]["m_inverse"].as_f64().unwrap() - 1.58353).abs() < 1e-3);

    report(&["two-point", "--kappa-grid", "9", "--csv", c]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().any(|l| l == "0.5,2"));
}

#[test]
fn two_point_distance_and_kappa() {
    let r = report(&["two-point", "--mean", "logarithmic", "--distance", "0", "1", "--kappa-at", "0.5"]);
    let d = r["result"]["distance"]["value"].as_f64().unwrap();
    assert!((d - 1.558707451).abs() < 1e-6);
    assert!((r["result"]["kappa_at"]["kappa"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn edge_list_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("c4.txt");
    std::fs::write(&g, "# four cycle\nn 4\n1 2\n2 3\n3 4\n4 1\n").unwrap();
    let spec = format!("file:{}", g.display());
    let a = report(&["curvature", "--graph", &spec, "--p", "0.1,0.2,0.3,0.4"]);
    let b = report(&["curvature", "--graph", "cycle4", "--p", "0.1,0.2,0.3,0.4"]);
    assert_eq!(a["result"]["local"], b["result"]["local"]);
}

#[test]
fn product_check_on_two_squares() {
    let r = report(&["product-check", "--g", "k2", "--h", "k2", "--c4-samples", "500", "--grid", "9"]);
    assert_eq!(r["pass"], true);
    assert!(r["result"]["product_bound"]["kappa_product"].as_f64().unwrap() >= 2.0 - 1e-4);
    assert!(r["result"]["c4_property"]["worst_gap"].as_f64().unwrap() >= -1e-9);

    let o = mfig(&["product-check", "--mean", "arithmetic", "--g", "k2", "--h", "k2", "--c4-samples", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["result"]["product_bound"]["kappa_product"], "-inf");
    assert!(r["result"]["c4_property"].is_null());
    assert!(r["result"]["c4_skipped"].as_str().unwrap().contains("compatible"));
}
