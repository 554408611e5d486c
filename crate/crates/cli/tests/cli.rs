use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn cohatlas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohatlas")).args(args).env_remove("COHATLAS_DIM_CAP").output().unwrap()
}

fn run_json(kind: &str, config: &Path) -> (i32, Value) {
    let out = cohatlas(&[kind, "--config", config.to_str().unwrap()]);
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, v)
}

fn item<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["body"]["items"].as_array().unwrap().iter().find(|i| i["name"] == name).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn classify_sum_map() {
    let (code, rep) = run_json("classify-map", &configs().join("classify-map.json"));
    assert_eq!(code, 0);
    assert_eq!(rep["schema"], "cohatlas-report/1");
    let sum = item(&rep, "sum");
    assert_eq!(sum["classification"], "Mixed");
    assert_eq!(sum["witness"]["monomial"], "w\u{304}");
}

#[test]
fn vacuum_test_identity_and_sum() {
    let (code, rep) = run_json("vacuum-test", &configs().join("vacuum-test.json"));
    assert_eq!(code, 0);
    assert_eq!(f(&item(&rep, "identity")["vacuum_residual"]), 0.0);
    assert_eq!(f(&item(&rep, "sum")["vacuum_residual"]), 1.0);
    assert!((f(&item(&rep, "eps")["vacuum_residual"]) - 0.3).abs() < 1e-15);
    assert_eq!(item(&rep, "shift")["verdict"], "displaced");
}

#[test]
fn resolve_unity_default_grid() {
    let (code, rep) = run_json("resolve-unity", &configs().join("resolve-unity.json"));
    assert_eq!(code, 0);
    assert!(f(&item(&rep, "coherent")["max_residual"]) < 1e-8);
    assert!(f(&item(&rep, "sum")["max_residual"]) > 0.1);
}

#[test]
fn vacuum_csv_has_fixed_columns() {
    let out =
        cohatlas(&["vacuum-test", "--config", configs().join("vacuum-test.json").to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,classification,vacuum_residual,overlap,verdict"));
    assert_eq!(lines.next(), Some("identity,Holomorphic,0.0000000000000000e0,1.0000000000000000e0,shared"));
}

#[test]
fn duality_csv_categories() {
    let out = cohatlas(&[
        "duality-filter",
        "--config",
        configs().join("duality-filter.json").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "category").unwrap();
    let mut cats: Vec<String> = reader.records().map(|r| r.unwrap()[col].to_string()).collect();
    cats.sort();
    cats.dedup();
    assert_eq!(cats, ["holomorphic-canonical", "non-canonical", "nonholomorphic-canonical"]);
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let cfg = configs().join("coherence-test.json");
    let (_, rep) = run_json("coherence-test", &cfg);
    let out = cohatlas(&["coherence-test", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let sq = &item(&rep, "square")["probes"][1]["residual"];
    let row = rows.iter().find(|r| &r[0] == "square" && &r[1] == "1").unwrap();
    assert_eq!(row[2].parse::<f64>().unwrap().to_bits(), f(sq).to_bits());
}

#[test]
fn writes_to_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = cohatlas(&[
        "classify-map",
        "--config",
        configs().join("classify-map.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(v["meta"]["duration_seconds"].is_number());
}

#[test]
fn validation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(cohatlas(&["classify-map", "--config", missing.to_str().unwrap()]).status.code(), Some(2));

    let wrong_kind = cohatlas(&["vacuum-test", "--config", configs().join("classify-map.json").to_str().unwrap()]);
    assert_eq!(wrong_kind.status.code(), Some(2));
    assert!(!wrong_kind.stderr.is_empty());

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"schema": "cohatlas-config/1", "kind": "classify-map", "maps": [{"name": "x", "path": "x.poly"}]}"#,
    )
    .unwrap();
    std::fs::write(dir.path().join("x.poly"), "polymap 1\nout 0\n1 0 : 7 : 0\nend\n").unwrap();
    assert_eq!(cohatlas(&["classify-map", "--config", bad.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(cohatlas(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn dimension_cap_from_environment() {
    let cfg = configs().join("vacuum-test.json");
    let out = Command::new(env!("CARGO_BIN_EXE_cohatlas"))
        .args(["vacuum-test", "--config", cfg.to_str().unwrap()])
        .env("COHATLAS_DIM_CAP", "16")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let coarse = dir.path().join("coarse.json");
    std::fs::write(
        &coarse,
        r#"{"schema": "cohatlas-config/1", "kind": "resolve-unity", "modes": {"n_modes": 1, "cutoff": 16},
            "grid": {"radial_order": 4, "angular_count": 8, "radius_cut": 6.0}, "families": [{"name": "coherent"}]}"#,
    )
    .unwrap();
    let (code, rep) = run_json("resolve-unity", &coarse);
    assert_eq!(code, 3);
    let it = item(&rep, "coherent");
    assert_eq!(it["converged"], false);
    assert!(it["max_residual"].as_f64().unwrap() > 1e-8);

    let unwritable = dir.path().join("missing-dir").join("r.json");
    let o = cohatlas(&[
        "classify-map",
        "--config",
        configs().join("classify-map.json").to_str().unwrap(),
        "--out",
        unwritable.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn degree_above_cutoff_is_recorded_per_item() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cube.poly"), "polymap 1\nout 0\n1 0 : 3 : 0\nend\n").unwrap();
    std::fs::write(dir.path().join("id.poly"), "polymap 1\nout 0\n1 0 : 1 : 0\nend\n").unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"schema": "cohatlas-config/1", "kind": "vacuum-test", "modes": {"n_modes": 1, "cutoff": 2},
            "maps": [{"name": "cube", "path": "cube.poly"}, {"name": "id", "path": "id.poly"}]}"#,
    )
    .unwrap();
    let (code, rep) = run_json("vacuum-test", &cfg);
    assert_eq!(code, 3);
    assert!(item(&rep, "cube")["error"].as_str().unwrap().contains("exceeds the cutoff"));
    assert_eq!(f(&item(&rep, "id")["vacuum_residual"]), 0.0);
}
