//! Batch backend driven through small shell scripts standing in for PVS.

use mathpvs_core::prover::{check, prove, BackendKind, ProofStatus, ProverConfig, ProverError};
use mathpvs_core::pvs::PreludeIndex;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};

const THEORY: &str = "Demo: THEORY\nBEGIN\n  IMPORTING functions\n  T: TYPE\n  f: [T -> T]\n  \
                      main: THEOREM bijective?(f) IMPLIES injective?(f)\nEND Demo\n";

fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

fn pvs_config(check: &Path, prove: &Path) -> ProverConfig {
    ProverConfig {
        backend: BackendKind::Pvs,
        check_command: format!("{} {{file}} {{theory}}", check.display()),
        prove_command: format!("{} {{file}}", prove.display()),
        check_timeout_secs: 2,
        proof_timeout_secs: 1,
        ..ProverConfig::default()
    }
}

#[test]
fn typecheck_success_and_placeholders() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(
        dir.path(),
        "tc",
        r#"test -f "$1" || exit 9; grep -q "Demo: THEORY" "$1" || exit 8; echo "$2 typechecked"; echo "No errors""#,
    );
    let r = check(THEORY, &pvs_config(&s, &s), &PreludeIndex::bundled()).unwrap();
    assert_eq!(r.backend, BackendKind::Pvs);
    assert!(r.parse_ok && r.typecheck_ok, "{r:?}");
    assert!(r.raw_output.contains("Demo typechecked"));
}

#[test]
fn error_lines_become_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(dir.path(), "tc", r#"echo "Demo.pvs:5:3: Expecting an expression""#);
    let r = check(THEORY, &pvs_config(&s, &s), &PreludeIndex::bundled()).unwrap();
    assert!(r.parse_ok && !r.typecheck_ok);
    assert_eq!(r.diagnostics.len(), 1);
    let d = &r.diagnostics[0];
    assert_eq!((d.code.as_str(), d.span.line, d.span.column), ("E_PVS", 5, 3));
    assert_eq!(d.message, "Expecting an expression");

    let s = script(dir.path(), "pe", r#"echo "Parser error in Demo""#);
    let r = check(THEORY, &pvs_config(&s, &s), &PreludeIndex::bundled()).unwrap();
    assert!(!r.parse_ok && !r.typecheck_ok);
}

#[test]
fn unclassifiable_output_is_preserved() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(dir.path(), "odd", r#"echo "something else entirely""#);
    match check(THEORY, &pvs_config(&s, &s), &PreludeIndex::bundled()) {
        Err(ProverError::OutputUnparseable { raw_output }) => assert!(raw_output.contains("something else")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn check_timeout() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(dir.path(), "slow", "sleep 5");
    let mut config = pvs_config(&s, &s);
    config.check_timeout_secs = 1;
    let start = std::time::Instant::now();
    assert_eq!(check(THEORY, &config, &PreludeIndex::bundled()), Err(ProverError::Timeout(1)));
    assert!(start.elapsed().as_secs() < 4);
}

#[test]
fn output_is_capped() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(dir.path(), "loud", "i=0; while [ $i -lt 3000 ]; do echo 'typechecked xxxxxxxxxxxxxxxxxxxx'; i=$((i+1)); done");
    let mut config = pvs_config(&s, &s);
    config.output_cap_bytes = 1000;
    let r = check(THEORY, &config, &PreludeIndex::bundled()).unwrap();
    assert_eq!(r.raw_output.len(), 1000);
}

#[test]
fn proof_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let tc = script(dir.path(), "tc", "echo typechecked");
    let cases = [
        (r#"grep -q '%|- (grind)' "$1" && echo "  main.............proved - complete""#, ProofStatus::Proved),
        (r#"echo "  main.............unfinished""#, ProofStatus::Unfinished),
        (r#"echo "  other............proved - complete""#, ProofStatus::Error),
        ("sleep 5", ProofStatus::Timeout),
    ];
    for (i, (body, expected)) in cases.into_iter().enumerate() {
        let p = script(dir.path(), &format!("prove{i}"), body);
        let a = prove(THEORY, "main", "grind", &pvs_config(&tc, &p), &PreludeIndex::bundled()).unwrap();
        assert_eq!(a.status, expected, "{body}");
        assert_eq!(a.tactic_script, "(grind)");
    }
}

#[test]
fn program_resolved_from_pvs_home() {
    let dir = tempfile::tempdir().unwrap();
    script(dir.path(), "fake-pvs-batch", "echo typechecked");
    let config = ProverConfig {
        backend: BackendKind::Pvs,
        check_command: "fake-pvs-batch {file}".into(),
        pvs_home_env: "MATHPVS_TEST_PVS_HOME".into(),
        ..ProverConfig::default()
    };
    assert!(matches!(
        check(THEORY, &config, &PreludeIndex::bundled()),
        Err(ProverError::BackendUnavailable(_))
    ));
    // Only this test reads the variable.
    unsafe { std::env::set_var("MATHPVS_TEST_PVS_HOME", dir.path()) };
    assert!(check(THEORY, &config, &PreludeIndex::bundled()).unwrap().typecheck_ok);
}
