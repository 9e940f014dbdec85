use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_octant-vp")).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_octant-vp"))
        .args(args)
        .env("OCTANT_VP_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

const EXAMPLE: [&str; 6] = ["--theta0", "-1", "--r1", "1.5", "--r2", "0"];

fn with<'a>(cmd: &'a str, base: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(base);
    v.extend_from_slice(extra);
    v
}

#[test]
fn classify_example_is_spiral_optimal() {
    let o = run(&with("classify", &EXAMPLE, &[]));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: SpiralOptimal"));
    let j = json(&run(&with("classify", &EXAMPLE, &["--json"])));
    assert_eq!(j["verdict"], "SpiralOptimal");
    assert!((j["axis_cost"].as_f64().unwrap() - 8.0 / 19.0).abs() < 1e-12);
}

#[test]
fn classify_identity_is_inconclusive() {
    let o = run(&["classify", "--theta0", "-1", "--r1", "0", "--r2", "0", "--json"]);
    assert_eq!(o.status.code(), Some(2));
    let j = json(&o);
    assert_eq!(j["candidate"], "GradualOptimal");
    assert_eq!(j["verdict"], "Inconclusive");
}

#[test]
fn classify_positive_drift_is_unstable() {
    let o = run(&["classify", "--theta0", "1", "--r1", "0", "--r2", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error: unstable"));
}

#[test]
fn malformed_input_exits_one() {
    assert_eq!(run(&["classify", "--theta0", "-1", "--r1", "x", "--r2", "0"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "--theta0", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "--input", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn classify_reads_json_input() {
    let dir = std::env::temp_dir().join(format!("octant-vp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let rs = dir.join("rs.json");
    std::fs::write(&rs, r#"{"theta0": -1, "r1": 1.5, "r2": 0}"#).unwrap();
    let general = dir.join("general.json");
    std::fs::write(
        &general,
        r#"{"theta": [-1, -1, -1], "Gamma": [[1,0,0],[0,1,0],[0,0,1]], "R": [[1,0,1.5],[1.5,1,0],[0,1.5,1]]}"#,
    )
    .unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"theta0": -1"#).unwrap();
    let a = json(&run(&["classify", "--json", "--input", rs.to_str().unwrap()]));
    let b = json(&run(&["classify", "--json", "--input", general.to_str().unwrap()]));
    assert_eq!(a, b);
    assert_eq!(a["verdict"], "SpiralOptimal");
    assert_eq!(run(&["classify", "--input", bad.to_str().unwrap()]).status.code(), Some(1));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn classification_json_round_trips() {
    let o = run(&with("classify", &EXAMPLE, &["--json"]));
    let v = json(&o);
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(v, again);
    let params = serde_json::to_string(&v["params"]).unwrap();
    let back: octant_vp::geometry::RsParams = serde_json::from_str(&params).unwrap();
    assert_eq!(back, octant_vp::geometry::RsParams::unit(-1.0, 1.5, 0.0).unwrap());
}

#[test]
fn cost_values_and_provenance() {
    let j = json(&run(&with("cost", &EXAMPLE, &["--family", "reflected", "--faces", "1,2", "--to", "0,0,1", "--json"])));
    assert!((j["value"].as_f64().unwrap() - 0.4211).abs() < 1e-4);
    assert_eq!(j["provenance"], "ClosedForm");
    let j = json(&run(&with("cost", &EXAMPLE, &["--family", "direct", "--to", "0,0,1", "--json"])));
    assert!((j["value"].as_f64().unwrap() - (1.0 + 3f64.sqrt())).abs() < 1e-12);
    let j = json(&run(&with("cost", &EXAMPLE, &["--family", "direct", "--from", "1,2,3", "--to", "1,2,3", "--json"])));
    assert_eq!(j["value"].as_f64().unwrap(), 0.0);
    let o = run(&with("cost", &EXAMPLE, &["--family", "reflected", "--faces", "1", "--to", "0,0,1"]));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("closed form"));
}

#[test]
fn cost_composites_and_best() {
    let j = json(&run(&with(
        "cost",
        &EXAMPLE,
        &["--family", "via-axis", "--faces", "2,3", "--axis-face", "2", "--to", "0,0,1", "--json"],
    )));
    assert!(j["value"].as_f64().unwrap() < 8.0 / 19.0);
    assert_eq!(j["via"].as_array().unwrap().len(), 1);
    let j = json(&run(&with("cost", &EXAMPLE, &["--family", "best", "--to", "0,0,1", "--json"])));
    assert!((j["value"].as_f64().unwrap() - 4.0 / 17.0).abs() < 1e-6);
    assert_eq!(j["path_family"], "Spiral");
    let path: octant_vp::paths::PathJson = serde_json::from_value(j["path"].clone()).unwrap();
    assert!(!path.segments.is_empty());
}

#[test]
fn cost_rejects_bad_face_point_combinations() {
    for extra in [
        &["--family", "reflected", "--faces", "1", "--to", "1,1,1"][..],
        &["--family", "one-piece", "--faces", "4", "--to", "0,1,1"][..],
        &["--family", "via-axis", "--faces", "2,3", "--axis-face", "1", "--to", "0,0,1"][..],
        &["--family", "via-axis", "--faces", "2,3", "--to", "0,0,1"][..],
        &["--family", "via-face", "--faces", "1", "--to", "0,1,1"][..],
        &["--family", "direct", "--to", "-1,0,0"][..],
    ] {
        let o = run(&with("cost", &EXAMPLE, extra));
        assert_eq!(o.status.code(), Some(1), "{extra:?}");
    }
}

const HEADER: &str = "r1,r2,theta0,stable,completely_s,p_matrix,condition1,axis_cost,spiral_cost,k_star,verdict";

#[test]
fn sweep_three_by_three() {
    let o = run(&["sweep", "--r1-range", "0,1,3", "--r2-range", "0,1,3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 10);
    let keys: Vec<(f64, f64)> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 11);
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
    // (1, 1) sits on the r1 + r2 = 2 boundary: unstable, no costs.
    assert_eq!(lines[9], "1,1,-1,false,true,false,false,,,,");
}

#[test]
fn sweep_cell_matches_classify() {
    let out = stdout(&run(&["sweep", "--r1-range", "1.5,2,2", "--r2-range", "0,1,2"]));
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..2], &["1.5", "0"]);
    let c = json(&run(&with("classify", &EXAMPLE, &["--json"])));
    assert_eq!(row[3], c["stability"]["stable"].to_string());
    assert_eq!(row[4], c["stability"]["completely_s"].to_string());
    assert_eq!(row[5], c["stability"]["p_matrix"].to_string());
    assert_eq!(row[6], c["condition1"].to_string());
    // JSON float parsing may land one ulp away from the printed value.
    let same = |csv: &str, j: &Value| (csv.parse::<f64>().unwrap() - j.as_f64().unwrap()).abs() <= 1e-15;
    assert!(same(row[7], &c["axis_cost"]));
    assert!(same(row[8], &c["spiral"]["total_cost"]));
    assert!(same(row[9], &c["spiral"]["k_star"]));
    assert_eq!(row[10], c["verdict"].as_str().unwrap());
}

#[test]
fn sweep_stable_column_matches_closed_form() {
    let out = stdout(&run(&["sweep", "--r1-range", "-1.5,2.5,17", "--r2-range", "-1.5,2.5,17", "--theta0", "-0.5"]));
    let mut rows = 0;
    for line in out.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (r1, r2): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        let s = r1 + r2;
        assert_eq!(f[3] == "true", s > -1.0 && s < 2.0, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 17 * 17);
    let out = stdout(&run(&["sweep", "--r1-range", "0,1,3", "--r2-range", "0,1,3", "--theta0", "1"]));
    assert!(out.lines().skip(1).all(|l| l.split(',').nth(3) == Some("false")));
}

#[test]
fn sweep_is_byte_stable_across_thread_counts() {
    let args = ["sweep", "--r1-range", "-0.5,2,11", "--r2-range", "-0.5,2,11"];
    let one = run_env(&args, "1");
    let four = run_env(&args, "4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run_env(&args, "zero").status.code(), Some(1));
}

#[test]
fn sweep_rejects_bad_specs() {
    assert_eq!(run(&["sweep", "--r1-range", "0,1,1", "--r2-range", "0,1,3"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--r1-range", "0,nan,3", "--r2-range", "0,1,3"]).status.code(), Some(1));
    let o = run(&["sweep", "--r1-range", "0,1,3", "--r2-range", "0,1,3", "--output", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_writes_file() {
    let path = std::env::temp_dir().join(format!("octant-vp-sweep-{}.csv", std::process::id()));
    let o = run(&["sweep", "--r1-range", "0,1,2", "--r2-range", "0,1,2", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 5);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn reproduce_reports_every_quantity() {
    let o = run(&["reproduce", "--json"]);
    let j = json(&o);
    let q = j["quantities"].as_array().unwrap();
    assert_eq!(q.len(), 5);
    let all = q.iter().all(|x| x["pass"] == true);
    assert_eq!(j["all_pass"], all);
    assert_eq!(o.status.code(), Some(if all { 0 } else { 3 }));
    for name in ["axis cost", "reflectivity vector"] {
        assert!(q.iter().any(|x| x["name"] == name && x["pass"] == true), "{name}");
    }
}

#[test]
fn reproduce_refuses_other_data() {
    let o = run(&["reproduce", "--theta0", "-1", "--r1", "1.6", "--r2", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&with("reproduce", &EXAMPLE, &["--json"]));
    assert!(o.status.code() != Some(1));
}

#[test]
fn validate_exit_codes() {
    let o = run(&["validate", "--seed", "42", "--samples", "300"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(run(&["validate", "--samples", "0"]).status.code(), Some(1));
    let o = run(&["validate", "--samples", "300", "--adversarial", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let j = json(&o);
    let adv = j["checks"].as_array().unwrap().iter().find(|c| c["expect_violations"] == true).unwrap();
    assert!(adv["violations"].as_u64().unwrap() > 0);
}

#[test]
fn validate_report_file_round_trips() {
    let path = std::env::temp_dir().join(format!("octant-vp-validate-{}.json", std::process::id()));
    let o = run(&["validate", "--samples", "200", "--seed", "3", "--json", "--output", path.to_str().unwrap()]);
    let printed = json(&o);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(printed, saved);
    assert_eq!(saved["seed"], 3);
    std::fs::remove_file(&path).unwrap();
}
