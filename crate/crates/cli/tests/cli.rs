use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use axcgp::circuit::CgpGenome;
use axcgp::experiment::{read_results_csv, strip_generated_stamp, ResultRow};
use axcgp::golden::{generate_golden, GoldenSpec};
use serde_json::Value;

fn axcgp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_axcgp")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const DESK: &str = r#"{
  "golden": {"kind": "multiplier", "width": 4},
  "cgp": {"nodes": 90},
  "search": {"max_evaluations": 1500, "repeats": 3, "seed": 11},
  "constraint_grid": [
    {"name": "wce5", "constraints": [{"metric": "WCE", "threshold": 5}]},
    {"name": "mae1", "constraints": [{"metric": "MAE", "threshold": 1}]},
    {"name": "mae1_er50", "constraints": [
      {"metric": "MAE", "threshold": 1}, {"metric": "ER", "threshold": 50}]}
  ],
  "gauss_report": {"sigma": 4}
}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_desk(dir: &Path, out: &str) -> (PathBuf, Vec<ResultRow>) {
    let cfg = write(dir, "desk.json", DESK);
    let out = dir.join(out);
    let o = axcgp(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--workers", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_results_csv(fs::File::open(out.join("results.csv")).unwrap()).unwrap();
    (out, rows)
}

#[test]
fn run_writes_one_row_per_run_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (out, rows) = run_desk(dir.path(), "a");
    assert_eq!(rows.len(), 9);
    assert_eq!(rows.iter().filter(|r| r.config == "mae1_er50").count(), 3);
    assert!(rows.iter().all(|r| r.gauss_ok.is_some() && r.evaluations == 1500));
    let first = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(first.starts_with("# schema: axcgp-results/v1\n# generated: "));
    for stem in ["wce5_r0", "mae1_r2", "mae1_er50_r1"] {
        assert!(out.join("runs").join(format!("{stem}.json")).is_file());
        assert!(out.join("circuits").join(format!("{stem}.v")).is_file());
        assert!(out.join("circuits").join(format!("{stem}.genome.json")).is_file());
    }

    let (out2, _) = run_desk(dir.path(), "b");
    let second = fs::read_to_string(out2.join("results.csv")).unwrap();
    assert_eq!(strip_generated_stamp(&first), strip_generated_stamp(&second));
}

#[test]
fn genome_sidecars_reevaluate_to_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (out, rows) = run_desk(dir.path(), "o");
    let mut counts = std::collections::HashMap::new();
    for row in &rows {
        let r = counts.entry(row.config.clone()).or_insert(0);
        let sidecar = out.join("circuits").join(format!("{}_r{}.genome.json", row.config, r));
        *r += 1;
        let o = axcgp(&["eval", "--genome", sidecar.to_str().unwrap(), "--golden", "multiplier:4"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        let rel = &v["profile"]["relative"];
        assert_eq!(rel["wce"].as_f64().unwrap(), row.wce_pct);
        assert_eq!(rel["mae"].as_f64().unwrap(), row.mae_pct);
        assert_eq!(rel["er"].as_f64().unwrap(), row.er_pct);
        assert_eq!(rel["mre"].as_f64().unwrap(), row.mre_pct);
        assert_eq!(rel["avg"].as_f64().unwrap(), row.avg_pct);
        assert_eq!(v["profile"]["acc0"].as_u64().unwrap(), row.acc0 as u64);
        assert_eq!(v["relative_power"].as_f64().unwrap(), row.relative_power);
    }
}

#[test]
fn invalid_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = DESK.replace("\"nodes\": 90", "\"nodes\": 90, \"bogus\": true");
    let cfg = write(dir.path(), "bad.json", &bad);
    let o = axcgp(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let msg = stderr(&o);
    assert!(msg.contains("line 3") && msg.contains("bogus"), "{msg}");
    assert!(!dir.path().join("results.csv").exists());
}

fn golden_file(dir: &Path, spec: GoldenSpec, nodes: usize) -> (CgpGenome, PathBuf) {
    let g = generate_golden(&spec, spec.params(nodes)).unwrap();
    let p = write(dir, "golden.json", &serde_json::to_string(&g).unwrap());
    (g, p)
}

#[test]
fn eval_golden_against_itself_is_error_free() {
    let dir = tempfile::tempdir().unwrap();
    let (_, path) = golden_file(dir.path(), GoldenSpec::multiplier(3), 40);
    let o = axcgp(&["eval", "--genome", path.to_str().unwrap(), "--golden", "multiplier:3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    for k in ["wce", "mae", "er", "mre", "avg", "stddev"] {
        assert_eq!(v["profile"][k].as_f64().unwrap(), 0.0, "{k}");
    }
    assert_eq!(v["profile"]["acc0"], 1);
    assert_eq!(v["relative_power"].as_f64().unwrap(), 1.0);
}

#[test]
fn eval_truncated_two_by_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GoldenSpec::multiplier(2);
    let (g, _) = golden_file(dir.path(), spec, 12);
    let params = g.params().clone();
    let mut genes = g.genes().to_vec();
    let spare = params.nodes - 1;
    let const0 = params.functions.iter().position(|f| f.name() == "CONST0").unwrap();
    genes[spare * 3 + 2] = const0 as u32;
    genes[params.nodes * 3] = (params.inputs + spare) as u32;
    let trunc = CgpGenome::new(params, genes).unwrap();
    let path = write(dir.path(), "trunc.json", &serde_json::to_string(&trunc).unwrap());
    let o = axcgp(&["eval", "--genome", path.to_str().unwrap(), "--golden", "multiplier:2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p = &serde_json::from_slice::<Value>(&o.stdout).unwrap()["profile"];
    assert_eq!(p["wce"], 1);
    assert_eq!(p["mae"].as_f64().unwrap(), 0.25);
    assert_eq!(p["er"].as_f64().unwrap(), 0.25);
    assert!((p["mre"].as_f64().unwrap() - 16.0 / 144.0).abs() < 1e-12);
    assert_eq!(p["acc0"], 1);
    assert_eq!(p["avg"].as_f64().unwrap(), 0.25);
}

#[test]
fn eval_missing_file_exits_2() {
    let o = axcgp(&["eval", "--genome", "/definitely/not/here.json", "--golden", "multiplier:2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/definitely/not/here.json"));
    assert!(o.stdout.is_empty());
}

#[test]
fn eval_malformed_genome_names_position() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _) = golden_file(dir.path(), GoldenSpec::multiplier(2), 12);
    let text = serde_json::to_string_pretty(&g).unwrap().replace("\"genes\"", "\"genez\"");
    let path = write(dir.path(), "bad.json", &text);
    let o = axcgp(&["eval", "--genome", path.to_str().unwrap(), "--golden", "multiplier:2"]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("genez") && msg.contains("line"), "{msg}");
}

#[test]
fn export_verilog_to_stdout_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let (_, path) = golden_file(dir.path(), GoldenSpec::adder(2), 20);
    let o = axcgp(&["export-verilog", "--genome", path.to_str().unwrap(), "--module", "add2"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("module add2 ("));
    let v = dir.path().join("add2.v");
    let o = axcgp(&["export-verilog", "--genome", path.to_str().unwrap(), "--module", "add2", "-o", v.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(v).unwrap(), text);
    let o = axcgp(&["export-verilog", "--genome", path.to_str().unwrap(), "--module", "2bad"]);
    assert!(!o.status.success());
}

const HEADER: &str = "config,seed,evaluations,relative_power,wce_pct,mae_pct,er_pct,mre_pct,avg_pct,acc0,stddev,gauss_ok\n";

#[test]
fn analyze_single_row_front() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "r.csv", &format!("# schema: axcgp-results/v1\n{HEADER}a,1,10,0.5,1,0.5,20,3,0.1,1,2,\n"));
    let out = dir.path().join("an");
    let o = axcgp(&["analyze", "--results", csv.to_str().unwrap(), "--mode", "pareto", "--out-dir", out.to_str().unwrap(), "--svg"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let front = fs::read_to_string(out.join("pareto_wce.csv")).unwrap();
    assert_eq!(front.lines().count(), 2);
    assert!(out.join("pareto_mae.svg").is_file());
}

#[test]
fn analyze_identical_groups_are_not_significant() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = HEADER.to_string();
    for config in ["x", "y"] {
        for (i, p) in [0.4, 0.5, 0.55, 0.6, 0.7, 0.75, 0.8, 0.9].iter().enumerate() {
            text += &format!("{config},{i},10,{p},1,1,1,1,0,1,1,\n");
        }
    }
    let csv = write(dir.path(), "r.csv", &text);
    let o = axcgp(&["analyze", "--results", csv.to_str().unwrap(), "--mode", "significance", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sig = fs::read_to_string(dir.path().join("significance.csv")).unwrap();
    let row: Vec<&str> = sig.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..2], ["x", "y"]);
    assert!(row[6].parse::<f64>().unwrap() > 0.99);

    let o = axcgp(&["analyze", "--results", csv.to_str().unwrap(), "--mode", "correlation", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(dir.path().join("correlation.csv")).unwrap().lines().count(), 7);
}

#[test]
fn analyze_schema_mismatch_names_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "r.csv", "config,seed,evaluations,relative_power\na,1,1,0.5\n");
    let o = axcgp(&["analyze", "--results", csv.to_str().unwrap(), "--mode", "pareto", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("wce_pct"), "{}", stderr(&o));
}

#[test]
fn paper_scale_config_runs_under_wall_clock() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/paper_8x8.json");
    let out = dir.path().join("o");
    let o = axcgp(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--wall-clock-secs",
        "0.05",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_results_csv(fs::File::open(out.join("results.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| r.relative_power <= 1.0));
    assert!(rows.iter().filter(|r| r.config.starts_with("wce")).all(|r| r.wce_pct <= 0.5));
    assert!(rows.iter().filter(|r| r.config == "wce0.5_gauss").all(|r| r.gauss_ok == Some(1)));
    let run: Value = serde_json::from_str(&fs::read_to_string(out.join("runs/mae0.1_r0.json")).unwrap()).unwrap();
    assert_eq!(run["result"]["stopped_by_wall_clock"], true);
}
