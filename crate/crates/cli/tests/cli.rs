use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coarse-entropy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn classify_ultrametric_product() {
    let v = json(&["classify", "--space", "ultrametric_product"]);
    assert_eq!(v["schema"], "v1");
    assert_eq!(v["verdict"], "zero");
    assert_eq!(v["rule"], "ultrametric");
    assert_eq!(v["certified"], true);
}

#[test]
fn rates_at_zero_length() {
    let v = json(&["rates", "--space", "integer_line", "--n", "0"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["count"], 1);
    assert_eq!(rows[0]["rate"], 0.0);
}

#[test]
fn obstruct_tree_line_into_prime_cycle() {
    let v = json(&["obstruct", "--space", "tree_line", "--target", "prime_cycle"]);
    assert_eq!(v["obstruction"], true);
    assert_eq!(v["source_verdict"], "infinite");
    assert_eq!(v["target_verdict"], "zero");
    let back = json(&["obstruct", "--space", "prime_cycle", "--target", "tree_line"]);
    assert_eq!(back["obstruction"], false);
}

#[test]
fn csv_and_json_agree() {
    let args = ["rates", "--space", "integer_line", "--n", "1..4", "--radius", "3"];
    let v = json(&args);
    let out = run(&[&args[..], &["--format", "csv"]].concat());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,count,certificate,rate,covering_log_bound"));
    for (line, row) in lines.zip(v["rows"].as_array().unwrap()) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], row["n"].to_string());
        assert_eq!(cells[1], row["count"].to_string());
        assert_eq!(cells[3].parse::<f64>().unwrap(), row["rate"].as_f64().unwrap());
    }
}

#[test]
fn growth_csv_has_decimal_column() {
    let out = run(&["growth", "--space", "integer_line", "--n", "3", "--format", "csv"]);
    assert_eq!(stdout(&out), "l,value,value_decimal,log_value\n0,1,1.0,0.0\n1,3,3.0,1.0986122886681098\n2,5,5.0,1.6094379124341003\n3,7,7.0,1.9459101490553132\n");
}

#[test]
fn reports_are_deterministic() {
    let args = ["bgcheck", "--space", "branch_tree", "--depths", "1..4"];
    let a = run(&args);
    let b = run(&args);
    let c = run(&[&args[..], &["--sequential"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn log_base_rescales_rates() {
    let e = json(&["witness", "--space", "tree_line", "--delta", "4", "--radius", "4"]);
    let two = json(&["witness", "--space", "tree_line", "--delta", "4", "--radius", "4", "--log-base", "2"]);
    let (a, b) = (e["rate_bound"].as_f64().unwrap(), two["rate_bound"].as_f64().unwrap());
    assert!((a / std::f64::consts::LN_2 - b).abs() < 1e-15);
    assert_eq!(two["log_base"], "2");
    assert_eq!(e["witness"]["family_size"], 16);
}

#[test]
fn strict_inconclusive_exits_two() {
    let mut cfg = tempfile::NamedTempFile::new().unwrap();
    write!(cfg, r#"{{"command": "classify", "space": "integer_line", "classify": {{"rules": ["measured-volume"]}}}}"#).unwrap();
    let path = cfg.path().to_str().unwrap();
    let relaxed = run(&["--config", path]);
    assert_eq!(relaxed.status.code(), Some(0));
    let strict = run(&["--config", path, "--strict"]);
    assert_eq!(strict.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&strict.stdout).unwrap();
    assert_eq!(v["verdict"], "inconclusive");
}

#[test]
fn config_errors_exit_one() {
    let mut cfg = tempfile::NamedTempFile::new().unwrap();
    write!(cfg, r#"{{"command": "classify", "space": "integer_line", "colour": "red"}}"#).unwrap();
    let out = run(&["--config", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));

    for args in [
        &["classify"][..],
        &["classify", "--space", "nowhere"],
        &["rates", "--space", "integer_line", "--delta", "0"],
        &["rates", "--space", "integer_line", "--log-base", "1"],
        &["witness", "--space", "integer_line"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    }
}

#[test]
fn cap_errors_exit_one() {
    let out = run(&["orbits", "--space", "integer_line", "--n", "20", "--paths", "--cap", "1000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn edge_list_input() {
    let mut edges = tempfile::NamedTempFile::new().unwrap();
    writeln!(edges, "src,dst,weight\na,b,1\nb,c,1/2\nc,d,3").unwrap();
    let path = edges.path().to_str().unwrap();
    let v = json(&["orbits", "--edges", path, "--n", "2", "--delta", "1"]);
    assert_eq!(v["counts"][0]["count"], "5");
    let c = json(&["classify", "--edges", path]);
    assert_eq!(c["verdict"], "zero");
    assert_eq!(c["certified"], true);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&["qgcheck", "--space", "integer_line", "--window", "5000", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
}
