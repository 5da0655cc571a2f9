//! Compare reports against stored output. Set `RELCI_BLESS=1` to rewrite.

use std::path::PathBuf;
use std::process::Command;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_relci"))
        .current_dir(dir())
        .args(args)
        .args(["--json", "-"])
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn golden(name: &str, expect_code: i32, args: &[&str]) {
    let (code, out) = run(args);
    assert_eq!(code, expect_code, "{}: unexpected exit code", name);
    let path = dir().join("tests/golden").join(format!("{}.json", name));
    if std::env::var_os("RELCI_BLESS").is_some() {
        std::fs::write(&path, &out).unwrap();
        return;
    }
    let stored = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {} (run with RELCI_BLESS=1)", path.display(), e));
    assert_eq!(out, stored, "{} differs from stored output", name);
}

#[test]
fn check_regular() {
    golden("check_regular_hypersurface", 0, &["check-regular", "scenarios/hypersurface.json"]);
    golden("check_regular_not_regular", 1, &["check-regular", "scenarios/not_regular.json"]);
}

#[test]
fn tables() {
    golden("tor_hypersurface", 0, &["tor", "scenarios/hypersurface.json", "--which", "both", "--max-hdeg", "5", "--max-ideg", "6"]);
    golden("ext_two_sequence", 0, &["ext", "scenarios/two_sequence.json", "--max-hdeg", "4", "--max-ideg", "5"]);
    golden("series_free_module", 0, &["series", "scenarios/free_module.json"]);
}

#[test]
fn comparisons() {
    golden("verify_t2_hypersurface", 0, &["verify-t2", "scenarios/hypersurface.json", "--max-hdeg", "4", "--max-ideg", "5"]);
    golden("verify_t9_annihilator", 0, &["verify-t9", "scenarios/hypersurface_annihilator.json"]);
}

#[test]
fn rational_and_prime_tables_agree() {
    let args = ["tor", "scenarios/two_sequence.json", "--max-hdeg", "4", "--max-ideg", "5"];
    let (_, p) = run(&args);
    let (_, q) = run(&[&args[..], &["--rational"]].concat());
    let p: serde_json::Value = serde_json::from_str(&p).unwrap();
    let q: serde_json::Value = serde_json::from_str(&q).unwrap();
    assert_eq!(p["tables"], q["tables"]);
    assert_eq!(q["field"], "Q");
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["verify-t2", "scenarios/two_sequence.json", "--max-hdeg", "4", "--max-ideg", "5", "--verbose-operators"];
    let first = run(&args);
    for _ in 0..2 {
        assert_eq!(run(&args), first);
    }
}

#[test]
fn usage_errors_exit_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_relci")).args(["tor", "no/such/file.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/file.json"));
}
