use std::path::Path;
use std::process::{Command, Output};

fn phscale(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phscale"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generate_then_persist() {
    let dir = tempfile::tempdir().unwrap();
    let out = phscale(
        &[
            "generate",
            "--kind",
            "hypercube",
            "--n",
            "2",
            "--format",
            "csv",
            "--out",
            "sq.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let out = phscale(&["persist", "sq.csv", "--format", "csv"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("hom_dim,birth,death\n"));
    assert!(text.contains("0,0.0,inf"));
    assert!(text.contains("1,1.0,1.4142135623730951"));
}

#[test]
fn compare_exits_zero_on_audit_failures() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sc.json"),
        r#"{"name":"dbl","cloud":{"kind":"hypercube","n":2},"transform":{"kind":"single","factors":[2,2]},"max_dim":2,"seed":0}"#,
    )
    .unwrap();
    let out = phscale(&["compare", "sc.json", "--format", "csv"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("claim_id,hom_dim,bound,measured,margin,verdict\n"));
    assert!(text.contains("thm31_upper,1,0.0,0.41421356237309515,0.41421356237309515,FAIL"));
}

#[test]
fn writes_markdown_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = phscale(
        &["montecarlo", "--trials", "20", "--format", "markdown", "--out", "mc.md"],
        dir.path(),
    );
    assert!(out.status.success());
    let md = std::fs::read_to_string(dir.path().join("mc.md")).unwrap();
    assert!(md.contains("thm35_expected:order_statistics"));
}

#[test]
fn usage_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(phscale(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(phscale(&["compare", "missing.json"], dir.path()).status.code(), Some(1));
    assert_eq!(
        phscale(&["montecarlo", "--a", "2", "--b", "1"], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(phscale(&["audit", "--max-dim", "7"], dir.path()).status.code(), Some(1));
    assert_eq!(phscale(&["--help"], dir.path()).status.code(), Some(0));
}
