use std::fs;

use torusgh::error::Error;
use torusgh::gh::Verdict;
use torusgh::report::{analyze, builtin, emit_report, run_scenario, Format, OutputKind, Scenario};

#[test]
fn builtin_verdicts() {
    let cases = [
        ("gw_vectorfield_goldenratio", Verdict::GH_TypeI),
        ("killer_sqrt2_noncommutative", Verdict::NotGH_IntegerHits),
        ("beta_nonzero_offdiag", Verdict::GH_TypeII),
        ("liouville_vectorfield", Verdict::NotGH_LiouvillePattern),
    ];
    for (name, expected) in cases {
        let r = analyze(&builtin(name).unwrap());
        assert!(r.errors.is_empty(), "{name}: {:?}", r.errors);
        assert!(r.verdicts().iter().all(|v| *v == expected), "{name}: {:?}", r.verdicts());
    }
}

#[test]
fn killer_report_keeps_exact_integers() {
    let r = analyze(&builtin("killer_sqrt2_noncommutative").unwrap());
    let k = r.killer.as_ref().unwrap();
    let qs: Vec<&str> = k.result.special.iter().map(|s| s.q.as_str()).collect();
    assert_eq!(qs, ["2", "12", "70", "408", "2378", "13860"]);
    let json = r.to_json();
    assert!(json.contains("\"sigma\": \"19601\""));
    let w = r.witness.unwrap().result;
    assert!(w.g_identically_zero);
}

#[test]
fn file_counts_and_stability() {
    let mut sc = builtin("gw_vectorfield_sqrt2").unwrap();
    sc.ell_max = 1024;
    let dir = tempfile::tempdir().unwrap();
    let r = analyze(&sc);
    let one = emit_report(&r, &dir.path().join("a"), &[Format::Json]).unwrap();
    assert_eq!(one.len(), 1);
    let two = emit_report(&r, &dir.path().join("b"), &[Format::Json, Format::Csv]).unwrap();
    assert_eq!(sc.outputs, vec![OutputKind::Report, OutputKind::EigenTrack]);
    assert_eq!(two.len(), 2);
    let csv = fs::read_to_string(dir.path().join("b/eigen_track.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("ell,j,m,re,im,dist_to_Z"));
    assert_eq!(lines.count(), 1024);
    let again = emit_report(&analyze(&sc), &dir.path().join("c"), &[Format::Json, Format::Csv]).unwrap();
    for (x, y) in two.iter().zip(&again) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
}

#[test]
fn series_and_witness_csv() {
    let mut sc = builtin("series_sqrt_gamma").unwrap();
    sc.outputs.push(OutputKind::Witness);
    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&analyze(&sc), dir.path(), &[Format::Csv]).unwrap();
    let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["series.csv", "witness.csv"]);
    let series = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    // 3 levels, 2 labels, K + 1 coefficients
    assert_eq!(series.lines().count(), 1 + 3 * 2 * 9);
    assert!(series.lines().nth(1).unwrap().starts_with("8,1,0,-8.0000000000000000e0"));
}

#[test]
fn schema_errors_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    let mut v: serde_json::Value = serde_json::from_str(&builtin("series_sqrt_gamma").unwrap().to_json()).unwrap();
    v["perturbation"]["shape"] = serde_json::json!("round");
    fs::write(&p, v.to_string()).unwrap();
    match run_scenario(&p) {
        Err(Error::Schema { pointer, .. }) => assert!(pointer.starts_with("/perturbation"), "{pointer}"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(run_scenario(&dir.path().join("missing.json")), Err(Error::Io { .. })));
}

#[test]
fn analysis_errors_are_embedded() {
    let text = r#"{"name": "short decimal", "omega": [1.41421356, 0.0], "alpha": {"decimal": "1.41421356"},
        "perturbation": {"kind": "killer_noncommutative", "count": 12}, "epsilon": [[1.0, 0.0]],
        "ell_max": 256, "K": 4, "outputs": ["report"]}"#;
    let sc = Scenario::parse(text).unwrap();
    let r = analyze(&sc);
    assert_eq!(r.exit_code(), 2);
    assert_eq!(r.errors[0].kind, "PrecisionExhausted");
}
