use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn frob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frob")).args(args).output().expect("frob runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}):\n{}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn check_status<'a>(r: &'a Value, name: &str) -> &'a str {
    r["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))["status"]
        .as_str()
        .unwrap()
}

/// Arguments that make each catalog entry run quickly.
fn sample_args(name: &str) -> Vec<String> {
    let s = match name {
        "hecke-verify" => "q=5 t=2",
        "hecke-operator" => "q=5 t=2 x=3",
        "hecke-trace" => "q=5 t=2",
        "hecke-ttan" => "q=5 t=2",
        "zeta-conj4" => "q=5 t=2 points=3 n_max=2",
        "zeta-product" => "q=3 order=6",
        "dyn-cheb" => "q=5 n=2",
        "dyn-cheb-sweep" => "limit=200 a_max=4",
        "dyn-torus" => "poly=9,-6,6,-2,1 n_max=3",
        "dyn-elliptic" => "qs=2,3,5",
        "span-zm" => "q=2 n_max=2 m_max=2",
        "span-ray" => "q=2 n_max=3",
        "span-radon" => "q=3",
        "span-prop1" => "q=11 count=3",
        "span-algebra" => "kind=additive q=5",
        "span-suite" => "q=2 trials=2 n_max=2 m_max=2",
        "lattice-transfer-check" => "dims=2,2 size_max=2",
        "lattice-partition" => "lattice=2,2,1",
        "lattice-reduce" => "n=2 sizes=1,2",
        "charsum-xn" => "q=5 x=3 exclusion=include-x",
        "charsum-xn-check" => "q=5 exclusion=include-x",
        _ => "",
    };
    let mut v: Vec<String> = vec![name.to_string()];
    v.extend(s.split_whitespace().map(String::from));
    match name {
        "lattice-super" => v.push(format!("model={}", data("super_model.json"))),
        "charsum-xprime" => v.extend([format!("matrix_file={}", data("matrix_function.json")), "q=5".into()]),
        _ => {}
    }
    v
}

#[test]
fn catalog_lists_every_experiment_and_each_runs() {
    let out = frob(&["list"]);
    assert!(out.status.success());
    let cat: Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = cat.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    for n in ["hecke-verify", "lattice-transfer-check", "span-zm", "charsum-xprime"] {
        assert!(names.contains(&n), "{n} missing from catalog");
    }
    for e in cat.as_array().unwrap() {
        let name = e["name"].as_str().unwrap();
        assert!(!e["topic"].as_str().unwrap().is_empty());
        let args = sample_args(name);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = frob(&refs);
        let r = report(&out);
        assert_eq!(r["experiment"], name);
        let status = r["status"].as_str().unwrap();
        assert!(["pass", "fail", "report-only"].contains(&status), "{name}: status {status}");
        let code = out.status.code().unwrap();
        assert_eq!(code, if status == "fail" { 1 } else { 0 }, "{name}");
        if e["class"] == "report-only" {
            assert_eq!(status, "report-only", "{name}");
        }
    }
}

#[test]
fn hecke_verify_reports_literal_and_signed_klein() {
    let out = frob(&["run", "hecke-verify", "q=5", "t=2"]);
    let r = report(&out);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(r["status"], "fail");
    assert_eq!(check_status(&r, "property-2-sum-identity"), "pass");
    assert_eq!(check_status(&r, "property-3-klein-closure"), "fail");
    assert_eq!(check_status(&r, "property-3-klein-up-to-sign"), "pass");
    assert_eq!(check_status(&r, "property-4-real-spectrum"), "pass");
    for key in ["experiment", "topic", "params", "seed", "versions", "timing", "status", "checks", "results"] {
        assert!(r.get(key).is_some(), "report lacks {key}");
    }
}

#[test]
fn trace_identities_pass_with_group_syntax() {
    let out = frob(&["hecke", "trace", "q=7", "t=3"]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["experiment"], "hecke-trace");
    assert_eq!(r["results"]["trace_txd_expected"], "7/36");
}

#[test]
fn conj4_is_report_only() {
    let out = frob(&["zeta-conj4", "--q", "5", "--t", "2", "--points", "3", "--n-max", "2"]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["status"], "report-only");
    assert_eq!(r["results"]["sequence"], serde_json::json!(["0", "0"]));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["frobnicate"],
        vec!["hecke-verify", "q=5"],
        vec!["hecke-verify", "q=5", "t=2", "colour=blue"],
        vec!["hecke-verify", "q=five", "t=2"],
        vec!["hecke-verify", "q=6", "t=2"],
        vec!["span-zm", "--budget-points", "0"],
    ] {
        let out = frob(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let r = report(&out);
        assert!(r["error"]["message"].is_string(), "{args:?}");
    }
}

#[test]
fn budget_exceeded_is_structured() {
    let out = frob(&["span-zm", "q=3", "n_max=3", "--budget-points", "10"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "error");
    assert_eq!(r["error"]["kind"], "budget");
    assert_eq!(r["error"]["limit"], "10");
    assert_eq!(r["budget_points"], 10);
}

#[test]
fn config_file_out_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out_path = dir.path().join("report.json");
    let csv = dir.path().join("table.csv");
    std::fs::write(
        &cfg,
        serde_json::json!({"experiment": "span-zm", "params": {"q": 2, "n_max": 2, "m_max": 3}, "seed": 4}).to_string(),
    )
    .unwrap();
    let out = frob(&["--config", cfg.to_str().unwrap(), "--out", out_path.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["seed"], 4);
    assert_eq!(r["params"]["m_max"], "3");
    // Frobenius on A¹ over F_2: Z(n, m) = 2^gcd(n, m)
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), "2,2,2\n2,4,2\n");

    // an inline value overrides the config
    let out = frob(&["--config", cfg.to_str().unwrap(), "m_max=1"]);
    assert_eq!(report(&out)["params"]["m_max"], "1");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"experiment": "span-radon", "params": {"q": 3}, "colour": 1}"#).unwrap();
    assert_eq!(frob(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn same_seed_same_report() {
    let run = |seed: &str| {
        let mut r = report(&frob(&["lattice-transfer-check", "dims=2,2", "size_max=2", "--seed", seed]));
        r["timing"] = Value::Null;
        serde_json::to_string(&r).unwrap()
    };
    assert_eq!(run("3"), run("3"));
    let mut a = report(&frob(&["lattice-partition", "--seed", "1"]));
    let mut b = report(&frob(&["lattice-partition", "--seed", "2"]));
    a["timing"] = Value::Null;
    b["timing"] = Value::Null;
    assert_ne!(a["results"]["graph"], b["results"]["graph"]);
}

#[test]
fn file_correspondence_and_column_bound() {
    let file = data("square_map.json");
    let r = report(&frob(&["span-zm", "builtin=file", &format!("file={file}"), "n_max=2", "m_max=2"]));
    assert_eq!(r["status"], "pass");
    let r = report(&frob(&["span-zm", "q=2", "n_max=7", "m_max=3", "column_order_bound=3"]));
    assert_eq!(check_status(&r, "columns-exponential-sums"), "pass");
    let r = report(&frob(&["span-zm", "q=2", "n_max=3", "m_max=3"]));
    assert_eq!(check_status(&r, "columns-exponential-sums"), "report-only");
}

#[test]
fn xprime_comparison_is_reported() {
    let r = report(&frob(&["charsum-xprime", "q=5", &format!("matrix_file={}", data("matrix_function.json")), "compare_x=3"]));
    assert_eq!(r["status"], "report-only");
    assert!(r["results"]["comparison"]["max_discrepancy"].is_number());
}
