//! Drives the installed binary end to end: exit codes, report shapes,
//! config merging, and the tolerance override surface.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn kenwarp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kenwarp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("kenwarp-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn passing_run_exits_zero() {
    let out = kenwarp(&["verify", "--model", "euclidean_kahler", "--samples", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("overall: PASS"), "{text}");
    assert!(text.contains("nijenhuis.broken_control"), "{text}");
}

#[test]
fn inapplicable_identity_fails_honestly() {
    let out = kenwarp(&[
        "verify",
        "--model",
        "sasakian_r3",
        "--check",
        "kenmotsu",
        "--samples",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL kenmotsu.nabla_phi"), "{text}");
    assert!(text.contains("overall: FAIL"), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &["verify", "--model", "moebius"],
        &["verify", "--model", "sasakian_r3", "--check", "lee"],
        &["verify", "--param", "bogus=1", "--samples", "10"],
        &["verify", "--param", "warp=t +", "--check", "axioms"],
        &["verify", "--param", "warp=0 - 1", "--check", "axioms"],
        &["verify", "--model", "tower", "--levels", "0"],
        &["verify", "--config", "/nonexistent/config.json"],
        &["verify", "--tol", "lee"],
        &["verify", "--frobnicate"],
    ];
    for args in cases {
        let out = kenwarp(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "args {args:?} gave {:?}: {}",
            out.status.code(),
            stderr(&out)
        );
        assert!(out.stdout.is_empty(), "usage errors must not print reports");
    }
}

#[test]
fn malformed_config_exits_two() {
    let path = tmp_path("broken.json");
    fs::write(&path, "{\"model\": \"sasakian_r3\", \"unknown_key\": 1}").unwrap();
    let out = kenwarp(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad config"), "{}", stderr(&out));
    let _ = fs::remove_file(&path);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "verify",
        "--model",
        "euclidean_kahler",
        "--samples",
        "15",
        "--seed",
        "7",
        "--json",
    ];
    let a = kenwarp(&args);
    let b = kenwarp(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn out_flag_writes_the_report_and_keeps_stdout_quiet() {
    let path = tmp_path("report.json");
    let out = kenwarp(&[
        "verify",
        "--model",
        "euclidean_kahler",
        "--check",
        "kahler",
        "--samples",
        "10",
        "--json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).contains("report written"));
    let body = fs::read_to_string(&path).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(parsed["model"]["name"], "euclidean_kahler");
    assert_eq!(parsed["overall_pass"], true);
    let _ = fs::remove_file(&path);
}

#[test]
fn config_file_merges_under_explicit_flags() {
    let path = tmp_path("merge.json");
    fs::write(
        &path,
        r#"{"model": "sasakian_r3", "check": "contact_scale", "samples": 18, "seed": 7, "json": true}"#,
    )
    .unwrap();
    let out = kenwarp(&[
        "verify",
        "--config",
        path.to_str().unwrap(),
        "--check",
        "axioms",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["model"]["name"], "sasakian_r3");
    assert_eq!(parsed["samples"], 18);
    assert_eq!(parsed["seed"], 7);
    let names: Vec<&str> = parsed["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.iter().all(|n| n.starts_with("axioms.")), "{names:?}");
    let _ = fs::remove_file(&path);
}

#[test]
fn list_models_names_the_catalog() {
    let out = kenwarp(&["list-models"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in [
        "euclidean_kahler",
        "kenmotsu_example",
        "kenmotsu_cosh",
        "sasakian_r3",
        "tower",
    ] {
        assert!(text.contains(name), "missing {name} in listing");
    }
}

#[test]
fn tolerance_overrides_respect_bound_direction() {
    // Tightening an upper bound below machine noise flips it to FAIL.
    let out = kenwarp(&[
        "verify",
        "--check",
        "lee",
        "--samples",
        "15",
        "--tol",
        "lee=1e-20",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL lee.identity"));

    // Raising a separation threshold above the observed gap also fails:
    // the override direction follows the check, not a global rule.
    let out = kenwarp(&[
        "verify",
        "--model",
        "sasakian_r3",
        "--check",
        "contact_scale",
        "--samples",
        "15",
        "--tol",
        "contact_scale.loser_separated=0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL contact_scale.loser_separated"));
}

#[test]
fn levels_flag_is_parameter_sugar() {
    let out = kenwarp(&[
        "verify",
        "--model",
        "tower",
        "--levels",
        "1",
        "--samples",
        "15",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["model"]["parameters"]["levels"], "1");
    assert_eq!(parsed["calibrated"]["kappa"], 2.0);

    // The sugar still goes through parameter validation for other models.
    let out = kenwarp(&["verify", "--model", "euclidean_kahler", "--levels", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown parameter `levels`"));
}
