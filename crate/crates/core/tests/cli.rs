use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn residua(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_residua"))
        .args(args)
        .env_remove("RESIDUA_SEED")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut out: Vec<String> = walk(dir)
        .into_iter()
        .map(|p| p.strip_prefix(dir).unwrap().to_string_lossy().into_owned())
        .collect();
    out.sort();
    out
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let Ok(entries) = std::fs::read_dir(dir) else { return out };
    for e in entries {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn happy_path_writes_program_and_reports() {
    let dir = fixture("dead_branch");
    let out = tempfile::tempdir().unwrap();
    let keep = format!("keep:{}", s(&dir.join("keep.txt")));
    let o = residua(&[
        "--src", s(&dir),
        "--constraints", s(&dir.join("app.pec")),
        "--policy", &keep,
        "--emit", "both",
        "--out", s(out.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files = files_in(out.path());
    assert!(files.contains(&"report.json".to_string()), "{files:?}");
    assert!(files.contains(&"report.html".to_string()));
    assert!(files.iter().any(|f| f.ends_with(".f")));
    assert!(files.iter().any(|f| f.starts_with("units")));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    assert!(json["policy"].as_str().unwrap().starts_with("keep:"));
}

#[test]
fn html_shows_removed_statements() {
    let dir = fixture("dead_branch");
    let out = tempfile::tempdir().unwrap();
    let o = residua(&[
        "--src", s(&dir),
        "--constraints", s(&dir.join("app.pec")),
        "--emit", "report",
        "--format", "html",
        "--out", s(out.path()),
    ]);
    assert!(o.status.success());
    let pages: String = walk(&out.path().join("units"))
        .iter()
        .map(|p| std::fs::read_to_string(p).unwrap())
        .collect();
    assert!(pages.contains("<del>"));
    assert!(pages.contains("dead-branch"));
    assert!(!out.path().join("report.json").exists());
}

#[test]
fn missing_constraint_file_is_an_input_error() {
    let out = tempfile::tempdir().unwrap();
    let o = residua(&[
        "--src", s(&fixture("pi")),
        "--constraints", "/nonexistent/app.pec",
        "--out", s(out.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error: /nonexistent/app.pec"), "{err}");
    assert!(files_in(out.path()).is_empty());
}

#[test]
fn bad_constraint_line_reports_its_position() {
    let dir = tempfile::tempdir().unwrap();
    let pec = dir.path().join("bad.pec");
    std::fs::write(&pec, "GLOBAL:\n  PI = \n").unwrap();
    let o = residua(&["--src", s(&fixture("pi")), "--constraints", s(&pec), "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.pec:2:"), "{err}");
}

#[test]
fn unknown_policy_is_rejected() {
    let out = tempfile::tempdir().unwrap();
    let o = residua(&["--src", s(&fixture("pi")), "--policy", "some", "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn syntax_error_points_at_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("bad.f");
    std::fs::write(&src, "PROGRAM M\n  X = = 1\nEND\n").unwrap();
    let o = residua(&["--src", s(&src), "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.f:2:"), "{err}");
}

#[test]
fn output_is_deterministic() {
    let dir = fixture("solve");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for out in [&a, &b] {
        let o = residua(&["--src", s(&dir), "--constraints", s(&dir.join("app.pec")), "--out", s(out.path())]);
        assert!(o.status.success());
    }
    let fa = files_in(a.path());
    assert_eq!(fa, files_in(b.path()));
    for f in &fa {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn residual_can_be_fed_back() {
    let dir = fixture("mode_physics");
    let once = tempfile::tempdir().unwrap();
    let twice = tempfile::tempdir().unwrap();
    let pec = dir.join("app.pec");
    let o = residua(&["--src", s(&dir), "--constraints", s(&pec), "--emit", "program", "--out", s(once.path())]);
    assert!(o.status.success());
    let o = residua(&["--src", s(once.path()), "--constraints", s(&pec), "--emit", "program", "--out", s(twice.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in files_in(once.path()) {
        assert_eq!(
            std::fs::read_to_string(once.path().join(&f)).unwrap(),
            std::fs::read_to_string(twice.path().join(&f)).unwrap()
        );
    }
}

#[test]
fn emit_report_only_skips_the_program() {
    let dir = fixture("zero_trip");
    let out = tempfile::tempdir().unwrap();
    let o = residua(&[
        "--src", s(&dir),
        "--constraints", s(&dir.join("app.pec")),
        "--emit", "report",
        "--format", "json",
        "--out", s(out.path()),
    ]);
    assert!(o.status.success());
    assert_eq!(files_in(out.path()), ["report.json"]);
}

fn mutant() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("mutants/scale")
}

#[test]
fn corrupted_residual_fails_verification_and_writes_nothing() {
    let m = mutant();
    let out = tempfile::tempdir().unwrap();
    let o = residua(&[
        "--src", s(&m.join("original")),
        "--constraints", s(&m.join("app.pec")),
        "--residual", s(&m.join("residual")),
        "--emit", "program",
        "--out", s(&out.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("residual differs"), "{err}");
    assert!(!out.path().join("o").exists());
}

#[test]
fn honest_residual_passes_verification() {
    let m = mutant();
    let gen = tempfile::tempdir().unwrap();
    let pec = m.join("app.pec");
    let o = residua(&["--src", s(&m.join("original")), "--constraints", s(&pec), "--emit", "program", "--out", s(gen.path())]);
    assert!(o.status.success());
    let out = tempfile::tempdir().unwrap();
    let o = residua(&[
        "--src", s(&m.join("original")),
        "--constraints", s(&pec),
        "--residual", s(gen.path()),
        "--emit", "program",
        "--out", s(out.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(files_in(out.path()), files_in(gen.path()));
}

#[test]
fn solve_report_matches_golden_page() {
    let dir = fixture("solve");
    let out = tempfile::tempdir().unwrap();
    let o = residua(&[
        "--src", s(&dir),
        "--constraints", s(&dir.join("app.pec")),
        "--emit", "report",
        "--format", "html",
        "--out", s(out.path()),
    ]);
    assert!(o.status.success());
    let got = std::fs::read_to_string(out.path().join("report.html")).unwrap();
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/solve_report.html");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
        std::fs::write(&golden, &got).unwrap();
    }
    assert!(got.contains("SOLVE_1") && got.contains("SOLVE_2"));
    assert_eq!(got, std::fs::read_to_string(&golden).unwrap());
}
