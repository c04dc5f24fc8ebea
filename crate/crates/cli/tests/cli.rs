use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_torusgh"))
}

#[test]
fn lists_and_dumps_builtins() {
    let out = bin().arg("list-builtins").output().unwrap();
    assert!(out.status.success());
    let names = String::from_utf8(out.stdout).unwrap();
    assert!(names.lines().any(|l| l == "killer_sqrt2_noncommutative"));
    let out = bin().args(["dump-builtin", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_dumped_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["dump-builtin", "gw_vectorfield_goldenratio"]).output().unwrap();
    let scenario = dir.path().join("golden.json");
    fs::write(&scenario, out.stdout).unwrap();
    let out_dir = dir.path().join("out");
    let run = bin()
        .arg("analyze")
        .arg(&scenario)
        .arg("--out")
        .arg(&out_dir)
        .args(["--ell-max", "2048", "--formats", "json,csv"])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.contains("GH_TypeI"), "{stdout}");
    for f in ["report.json", "eigen_track.csv", "witness.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let report = fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(report.contains("\"ell_max\": 2048"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"name": "x", "omega": [1.0, 0.0], "colour": 3}"#).unwrap();
    let run = bin().arg("analyze").arg(&bad).arg("--quiet").output().unwrap();
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("colour"));

    let short = dir.path().join("short.json");
    fs::write(
        &short,
        r#"{"name": "short decimal", "omega": [1.41421356, 0.0], "alpha": {"decimal": "1.41421356"},
        "perturbation": {"kind": "killer_noncommutative", "count": 12}, "epsilon": [[1.0, 0.0]],
        "ell_max": 256, "K": 4, "outputs": ["report"]}"#,
    )
    .unwrap();
    let run = bin()
        .arg("analyze")
        .arg(&short)
        .arg("--out")
        .arg(dir.path().join("o"))
        .arg("--quiet")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(2));
    assert!(dir.path().join("o/report.json").exists());

    let run = bin().arg("analyze").arg(dir.path().join("none.json")).output().unwrap();
    assert_eq!(run.status.code(), Some(1));
    let run = bin().arg("analyze").arg(&short).args(["--ell-max", "8"]).output().unwrap();
    assert_eq!(run.status.code(), Some(1));
}

