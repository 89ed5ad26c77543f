use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn plab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plab")).args(args).output().unwrap()
}

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn check_accepts_the_demo() {
    let out = plab(&["check", "--spec", spec("demo.plab").to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("ok (2 ideals, 4 families, 5 experiments)"));
}

#[test]
fn check_reports_positions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.plab");
    std::fs::write(&bad, "ring d=2 p=2 regular\nfamily F = frobenius(J)\n").unwrap();
    let out = plab(&["check", "--spec", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("bad.plab:2:22: unknown identifier 'J'"), "{}", text(&out.stderr));
    let out = plab(&["check", "--spec", dir.path().join("missing.plab").to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn run_writes_reports_and_reuses_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = |out: &Path, threads: &str| {
        plab(&[
            "run",
            "--spec",
            spec("demo.plab").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
            "--cache-dir",
            cache.to_str().unwrap(),
        ])
    };
    let cold = dir.path().join("cold");
    let out = run(&cold, "1");
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("4-fujita-corners") && stdout.contains("5-validate-squares               Fail"));
    assert!(cache.exists());
    let warm = dir.path().join("warm");
    assert!(run(&warm, "4").status.success());
    let mut files: Vec<_> = std::fs::read_dir(&cold).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    assert_eq!(files.len(), 13);
    for f in files {
        let a = std::fs::read(cold.join(&f)).unwrap();
        let b = std::fs::read(warm.join(&f)).unwrap();
        assert_eq!(a, b, "{f:?}");
    }
    let pbody = std::fs::read_to_string(cold.join("1-volmult-F-pbody.csv")).unwrap();
    assert_eq!(pbody.lines().next(), Some("e,q,value_num,value_den,limit,target,verdict"));
    assert!(pbody.lines().skip(1).all(|l| l.contains(",6,1,")));

    let out = plab(&["clean-cache", "--cache-dir", cache.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(!cache.exists());
}

#[test]
fn json_output_and_seed_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = plab(&[
        "run",
        "--spec",
        spec("a1.plab").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--format",
        "json",
        "--seed",
        "5",
        "--no-cache",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let json = std::fs::read_to_string(dir.path().join("a1").join("1-volmult-F.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["reports"][0]["tag"], "length");
    assert_eq!(v["reports"][1]["report"]["extrapolated_limit"], "3/2");
}

#[test]
fn bad_flags_are_rejected() {
    assert!(!plab(&["run"]).status.success());
    assert!(!plab(&["run", "--spec", "x", "--format", "xml"]).status.success());
}
