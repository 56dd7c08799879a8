use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn limid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_limid"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(name: &str) -> String {
    data(name).to_str().unwrap().to_string()
}

fn golden(name: &str) -> String {
    fs::read_to_string(data(name)).unwrap()
}

#[test]
fn solve_matches_golden() {
    let out = limid(&["solve", &path("minimal.json"), "--arch", "ss"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("minimal_solve_ss.txt"));
}

#[test]
fn compare_matches_golden() {
    let out = limid(&["compare", &path("reconstructed.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("reconstructed_compare.csv"));
}

#[test]
fn compile_dump_matches_golden() {
    let out = limid(&["compile", &path("reconstructed.json"), "--dump-jt"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("reconstructed_jt.txt"));
}

#[test]
fn lazy_solve_with_barren_child_needs_no_division() {
    let out = limid(&[
        "solve",
        &path("barren.json"),
        "--arch",
        "lp",
        "--report",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("expected_utility,,"));
    assert!(text.lines().any(|l| l == "ops,divs,0"));
}

#[test]
fn hugin_refuses_general_updating() {
    let out = limid(&["gen", "--seed", "3", "--decisions", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let file = std::env::temp_dir().join("limid_cli_general.json");
    fs::write(&file, &out.stdout).unwrap();
    let out = limid(&[
        "solve",
        file.to_str().unwrap(),
        "--arch",
        "hugin",
        "--general",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hugin-cannot-retract"));
    let out = limid(&["compare", file.to_str().unwrap(), "--general"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!stdout(&out).lines().any(|l| l.starts_with("HUGIN,")));
}

#[test]
fn argument_and_input_errors_exit_2() {
    assert_eq!(
        limid(&["solve", &path("minimal.json"), "--arch", "jt"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        limid(&["solve", &path("missing.json"), "--arch", "lp"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        limid(&["gen", "--seed", "1", "--chance", "0", "--decisions", "0"])
            .status
            .code(),
        Some(2)
    );
    let bad = std::env::temp_dir().join("limid_cli_bad.json");
    fs::write(&bad, "{ \"format\": ").unwrap();
    let out = limid(&["solve", bad.to_str().unwrap(), "--arch", "lp"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn non_soluble_input_without_general_exits_3() {
    let out = limid(&["gen", "--seed", "5", "--decisions", "3"]);
    let file = std::env::temp_dir().join("limid_cli_nonsoluble.json");
    fs::write(&file, &out.stdout).unwrap();
    let out = limid(&["solve", file.to_str().unwrap(), "--arch", "lp"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not-soluble"));
}

#[test]
fn gen_is_byte_deterministic() {
    let a = limid(&["gen", "--seed", "1", "--soluble"]);
    let b = limid(&["gen", "--seed", "1", "--soluble"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(
        String::from_utf8(a.stdout).unwrap(),
        golden("gen_seed1.json")
    );
}

#[test]
fn single_clique_compare_agrees() {
    let out = limid(&["compare", &path("minimal.json"), "--report", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for label in ["S-S", "HUGIN", "LP", "Init S-S/HUGIN", "Init LP"] {
        assert!(text.lines().any(|l| l.starts_with(label)), "{label}");
    }
}

#[test]
fn oracle_agrees_with_solvers() {
    let out = limid(&["oracle", &path("reconstructed.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let eu: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("expected utility: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((eu - 24.02344512).abs() < 1e-9);
}
