use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rabimod(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabimod"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["reproduce", "fig99"][..],
        &["evolve", "--g=-1"],
        &["evolve", "--fock", "1"],
        &["evolve", "--samples", "1"],
        &["evolve", "--init", "x7"],
    ] {
        let out = rabimod(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[params]\nunknown_key = 3\n").unwrap();
    let out = rabimod(&["evolve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_convergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = rabimod(&["converge", "fig8", "--fock", "3", "--samples", "101"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fig8.convergence.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(false));
}

#[test]
fn converged_scenario_exits_with_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = rabimod(&["converge", "fig3", "--samples", "101"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reproduce_is_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["reproduce", "fig2", "--samples", "41", "--nu-step", "0.5"];
    let mut one = args.to_vec();
    one.extend(["--jobs", "1"]);
    let mut many = args.to_vec();
    many.extend(["--jobs", "4"]);
    assert!(rabimod(&one, a.path()).status.success());
    assert!(rabimod(&many, b.path()).status.success());
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| !n.to_string_lossy().ends_with("timing.json"))
        .collect();
    names.sort();
    assert!(names.iter().any(|n| n == "fig2a.csv") && names.iter().any(|n| n == "fig2b.csv"));
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn uncoupled_custom_run_keeps_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        rabimod(&["evolve", "--g", "0", "--xi", "1.0", "--nu", "2", "--t-max", "20", "--samples", "11"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("evolve.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,P_g0,P_e0,P_g1,P_e1");
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - 1.0).abs() < 1e-9 && v[4].abs() < 1e-9, "{line}");
    }
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("evolve.json")).unwrap()).unwrap();
    assert_eq!(meta["scenario"], "custom");
}

#[test]
fn sidebands_lists_resonant_term() {
    let dir = tempfile::tempdir().unwrap();
    let out = rabimod(&["sidebands", "--g", "0.05", "--xi", "2.40483", "--nu", "2"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("m0 = -1"));
    let text = fs::read_to_string(dir.path().join("sidebands.csv")).unwrap();
    assert!(text.starts_with("order,counter_rotating,coupling,detuning\n"));
}
