use std::process::{Command, Output};

fn weakval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakval"))
        .args(args)
        .env_remove("WEAKVAL_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn csv_rows_match_header() {
    let out = weakval(&["fig2", "--steps", "11"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,lower,product,upper,lower_weak"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 5);
        for cell in cells {
            assert!(cell.contains('e'), "{cell}");
            cell.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn json_output_parses() {
    let out = weakval(&["ramanujan", "--s-max", "5", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["columns"][0], "s");
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    let phi = v["rows"][4][3].as_f64().unwrap();
    assert!((0.0..=0.5).contains(&phi));
}

#[test]
fn expectation_exact_matches_direct() {
    let out = weakval(&[
        "expectation",
        "--operator",
        "pt:r=1,s=2,t=3,theta=0.4",
        "--state",
        "bloch:0.7,0.2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .skip(1)
        .take(4)
        .map(|x| x.parse().unwrap())
        .collect();
    assert!((row[0] - row[2]).abs() < 1e-12 && (row[1] - row[3]).abs() < 1e-12);
}

#[test]
fn negative_arguments_are_accepted() {
    let out = weakval(&["pt", "--r", "0.5", "--s", "-2", "--t", "-3", "--theta", "-0.3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn parse_errors_exit_2() {
    for args in [
        &["nonsense"][..],
        &["expectation", "--operator", "lowering:s=4", "--state", "bogus:1"],
        &["expectation", "--operator", "[[1,2]]", "--state", "plus"],
        &["fig1", "--format", "xml"],
        &["pt", "--r", "abc", "--s", "1", "--t", "1"],
    ] {
        let out = weakval(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn math_domain_errors_exit_3() {
    for args in [
        &[
            "pt",
            "--r",
            "1",
            "--s",
            "1",
            "--t",
            "1",
            "--theta",
            "1.5707963267948966",
        ][..],
        &["channel", "--kraus", "amp-damp:p=2", "--state", "plus"],
        &["expectation", "--operator", "lowering:s=2", "--state", "plus"],
        &[
            "expectation",
            "--operator",
            "pauli:x",
            "--state",
            "plus",
            "--method",
            "stochastic",
            "--grid-points",
            "100",
        ],
    ] {
        let out = weakval(args);
        assert_eq!(
            out.status.code(),
            Some(3),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn out_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let out = weakval(&[
        "fig1",
        "--s-max",
        "4",
        "--seed",
        "11",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let table = std::fs::read_to_string(&path).unwrap();
    assert_eq!(table.lines().count(), 5);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig1.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "fig1");
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["format"], "csv");
    assert_eq!(manifest["parameters"]["s_max"], 4);
    assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["timestamp"].as_str().unwrap().ends_with('Z'));
}

#[test]
fn no_manifest_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_weakval"))
        .args(["fig1", "--s-max", "2"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn help_documents_columns() {
    let out = weakval(&["fig2", "--help"]);
    let text = stdout(&out);
    assert!(
        text.contains("Columns: p, lower, product, upper, lower_weak"),
        "{text}"
    );
}

#[test]
fn dirac_table_has_all_points() {
    let out = weakval(&["dirac", "--state", "number:1", "--dim", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 10);
    // |1> against the computational basis: only row i = 1 is non-zero.
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let re: f64 = cells[2].parse().unwrap();
        if cells[0] != "1" {
            assert!(re.abs() < 1e-15, "{line}");
        }
    }
}
