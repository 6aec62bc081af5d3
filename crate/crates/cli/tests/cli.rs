use std::process::{Command, Output};

use serde_json::Value;

fn qqlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qqlab"))
        .args(args)
        .env_remove("QQLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(o)).unwrap()
}

/// Keys in the order they appear on the wire.
fn wire_keys(text: &str) -> Vec<String> {
    let v: serde_json::Map<String, Value> = serde_json::from_str(text).unwrap();
    let mut keys: Vec<(usize, String)> =
        v.keys().map(|k| (text.find(&format!("\"{k}\":")).unwrap(), k.clone())).collect();
    keys.sort();
    keys.into_iter().map(|(_, k)| k).collect()
}

#[test]
fn badprob_report() {
    let o = qqlab(&["badprob", "--n", "64", "--r", "8", "--trials", "1000", "--seed", "7"]);
    let v = json(&o);
    assert_eq!(v["exact_per_image"], "0");
    assert_eq!(v["union_bound"], "0");
    assert_eq!(v["mc_rate"], 0.0);
    assert_eq!(v["wilson"].as_array().unwrap().len(), 2);
    assert_eq!(wire_keys(stdout(&o).trim()), ["exact_per_image", "mc_rate", "union_bound", "wilson"]);
    assert!(stdout(&o).ends_with('\n'));
}

#[test]
fn badprob_with_small_constant_is_nonzero() {
    let v = json(&qqlab(&["badprob", "--n", "16", "--r", "4", "--trials", "2000", "--constant", "1/2"]));
    assert_eq!(v["exact_per_image"], "1/13");
    assert_eq!(v["union_bound"], "4/13");
    let rate = v["mc_rate"].as_f64().unwrap();
    assert!(rate > 0.0);
}

#[test]
fn adversary_comesfrom_matches_closed_form() {
    let v = json(&qqlab(&["adversary", "--mode", "comesfrom", "--n", "8", "--r", "4", "--profile", "3,1"]));
    assert_eq!(v["closed_form_match"], true);
    assert_eq!((v["m"].as_u64(), v["l"].as_u64()), (Some(3), Some(2)));
    assert_eq!((v["m_prime"].as_u64(), v["l_prime"].as_u64()), (Some(3), Some(2)));
    assert!((v["bound"].as_f64().unwrap() - 1.5).abs() < 1e-12);
}

#[test]
fn adversary_grover_and_custom() {
    let v = json(&qqlab(&["adversary", "--mode", "grover", "--n", "16"]));
    assert_eq!(v["bound"], 4.0);
    assert!(v["closed_form_match"].is_null());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rel.json");
    std::fs::write(&path, r#"{"x":[[0,0,0,0]],"y":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],"pairs":[[0,0],[0,1],[0,2],[0,3]]}"#)
        .unwrap();
    let v = json(&qqlab(&["adversary", "--mode", "custom", "--relation", path.to_str().unwrap()]));
    assert_eq!(v["bound"], 2.0);
    assert!(v["closed_form_match"].is_null());
}

#[test]
fn adversary_rejects_inconsistent_n() {
    let o = qqlab(&["adversary", "--mode", "comesfrom", "--n", "16", "--r", "4", "--profile", "3,1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn odd_n_is_a_precondition_error() {
    let o = qqlab(&["reduce", "--n", "7"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n must be even"));
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_command_prints_usage() {
    let o = qqlab(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn reduce_emits_records_in_field_order() {
    let o = qqlab(&["reduce", "--n", "16", "--r", "4", "--count", "5", "--origin", "equivalent"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 5);
    for line in text.lines() {
        assert_eq!(wire_keys(line), ["origin", "a", "b"]);
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["origin"], "equivalent");
        assert_eq!(v["a"].as_array().unwrap().len(), 8);
    }
}

#[test]
fn same_config_gives_identical_bytes() {
    let args = ["simulate", "--alg", "cuberoot", "--n", "64", "--trials", "50", "--seed", "11"];
    let a = qqlab(&args);
    let b = qqlab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut parallel = args.to_vec();
    parallel.extend(["--jobs", "3"]);
    assert_eq!(qqlab(&parallel).stdout, a.stdout);
}

#[test]
fn seed_precedence() {
    let base = ["reduce", "--n", "8", "--count", "3"];
    let with_flag = qqlab(&[&base[..], &["--seed", "5"]].concat());
    let env = Command::new(env!("CARGO_BIN_EXE_qqlab")).args(base).env("QQLAB_SEED", "5").output().unwrap();
    assert_eq!(with_flag.stdout, env.stdout);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"seed": 5, "n": 8, "count": 3}"#).unwrap();
    let from_file = qqlab(&["reduce", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file.stdout, with_flag.stdout);
    // Flags win over the file.
    let overridden = qqlab(&["reduce", "--config", cfg.to_str().unwrap(), "--seed", "6"]);
    assert_ne!(overridden.stdout, with_flag.stdout);
    assert_eq!(overridden.stdout, qqlab(&[&base[..], &["--seed", "6"]].concat()).stdout);
}

#[test]
fn config_may_name_the_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"command": "bounds", "n": 1048576}"#).unwrap();
    let v = json(&qqlab(&["--config", cfg.to_str().unwrap()]));
    assert_eq!(v["optimal_r"], 1024);
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"nn": 3}"#).unwrap();
    assert_eq!(qqlab(&["bounds", "--n", "64", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let args = ["bounds", "--n", "65536", "--grid", "divisors"];
    let o = qqlab(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), qqlab(&args).stdout);
}

#[test]
fn unwritable_out_path_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("report.json");
    let o = qqlab(&["bounds", "--n", "64", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn csv_headers() {
    let o = qqlab(&["inv", "--n", "16", "--r", "4", "--trials", "4"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,r,seed,origin,disp,bad,counts"));
    for line in lines {
        assert!(line.starts_with("16,4,"));
        assert!(line.ends_with("]\""));
    }

    let o = qqlab(&["bounds", "--sweep", "16384..67108864"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,r_star,value,slope_so_far");
    assert_eq!(lines.len(), 14);
    let last: Vec<&str> = lines[13].split(',').collect();
    let slope: f64 = last[3].parse().unwrap();
    assert!((slope - 0.40).abs() <= 0.05, "{slope}");
}

#[test]
fn unsupported_format_is_rejected() {
    assert_eq!(qqlab(&["badprob", "--n", "8", "--r", "4", "--format", "csv"]).status.code(), Some(1));
}

#[test]
fn table_classifies_exact_comparison() {
    let o = qqlab(&["simulate", "--alg", "table", "--n", "64", "--r", "8", "--trials", "100"]);
    let v = json(&o);
    assert_eq!(v["dichotomy"], "collision_solver_exists");
    assert_eq!(v["pc1"], 1.0);
}

#[test]
fn simulate_rows_respect_budgets() {
    let o = qqlab(&["simulate", "--alg", "sqrtn", "--n", "64", "--trials", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 41);
    for row in &rows[..40] {
        let t = &row["tally"];
        let total = t["oracle_calls_a"].as_u64().unwrap() + t["oracle_calls_b"].as_u64().unwrap();
        assert!(total <= row["budget"].as_u64().unwrap());
    }
    assert_eq!(rows[40]["kind"], "summary");
    assert_eq!(rows[40]["disjoint_success"], 1.0);
}
