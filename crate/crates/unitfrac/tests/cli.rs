//! End-to-end checks of the binary: exit codes, JSON shape, determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitfrac"))
        .args(args)
        .env("UNITFRAC_SIEVE_LIMIT", "300000")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn decompose_roundtrips_through_verify() {
    let out = run(&["decompose", "--r", "1", "--N", "2"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let terms: Vec<u64> = v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_u64().unwrap())
        .collect();
    assert!(!terms.is_empty());
    let terms_arg = terms
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let check = run(&["verify", "--r", "1", "--N", "2", "--terms", &terms_arg]);
    assert!(check.status.success());
    assert_eq!(stdout_json(&check)["ok"], serde_json::json!(true));
}

#[test]
fn identical_flags_identical_bytes() {
    let a = run(&["decompose", "--r", "2/3", "--N", "12"]);
    let b = run(&["decompose", "--r", "2/3", "--N", "12"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_one() {
    let out = run(&["decompose", "--r", "0", "--N", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["reason"], "invalid-input");
    let out = run(&["decompose", "--r", "0.5", "--N", "10"]);
    assert_eq!(out.status.code(), Some(1));
    // malformed flags also exit 1
    let out = run(&["decompose", "--r", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn infeasible_exits_two_with_reason() {
    let out = run(&["decompose", "--r", "5", "--N", "3", "--max-ratio", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert!(v["reason"].is_string());
}

#[test]
fn manifest_lands_on_stderr() {
    let out = run(&["rho", "--u", "2"]);
    assert!(out.status.success());
    let manifest: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr manifest is JSON");
    assert_eq!(manifest["command"], "rho");
    let v = stdout_json(&out);
    let rho = v["rho"].as_f64().unwrap();
    assert!((rho - (1.0 - 2f64.ln())).abs() < 1e-6);
}

#[test]
fn count_subcommand_reads_instance_files() {
    let dir = std::env::temp_dir().join(format!("unitfrac-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tiny.instance");
    std::fs::write(&path, "2 6 6\n2\n3\n6\n").unwrap();
    let out = run(&[
        "count",
        "--instance",
        path.to_str().unwrap(),
        "--target",
        "1",
        "--brute",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["count"], 1);
    assert_eq!(v["agreement"], true);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn batch_mode_emits_one_row_per_n() {
    let out = run(&[
        "decompose", "--r", "1/2", "--N", "10", "--N-end", "13", "--jobs", "2",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row["N"].as_u64().unwrap(), 10 + i as u64);
    }
}

#[test]
fn min_ratio_subcommand() {
    let out = run(&["min-ratio", "--r", "1", "--N", "2", "--x-max", "12"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["witness"], serde_json::json!([2, 3, 6]));
}
