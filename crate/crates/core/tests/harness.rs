use std::fs;

use rabimod::harness::output::read_csv;
use rabimod::harness::{self, compute, convergence_report, resolve, ExperimentSpec, Overlay, Scenario};

fn quick(scenario: Scenario) -> ExperimentSpec {
    let mut spec = ExperimentSpec::preset(scenario);
    spec.grid.samples = 61;
    spec
}

#[test]
fn fig3_tables_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let summary = harness::run(&quick(Scenario::Fig3), dir.path()).unwrap();
    assert_eq!(summary.csv.len(), 2);
    let t = read_csv(&dir.path().join("fig3_nu2.csv")).unwrap();
    assert_eq!(t.headers(), ["t_g_over_2pi", "P_g0_exact", "P_e1_exact", "P_g0_analytic", "P_e1_analytic"]);
    assert_eq!(t.rows(), 61);
    let peak = t.column("P_e1_exact").unwrap().iter().cloned().fold(0.0, f64::max);
    assert!(peak > 0.97);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fig3_nu2.json")).unwrap()).unwrap();
    assert_eq!(meta["scenario"], "fig3");
    assert_eq!(meta["rows"], 61);
    assert!(dir.path().join("fig3.timing.json").exists());
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let mut a = quick(Scenario::Fig2);
    a.grid.coarse_step = 0.25;
    let mut b = a.clone();
    a.solver.jobs = Some(1);
    b.solver.jobs = Some(3);
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let sa = harness::run(&a, da.path()).unwrap();
    harness::run(&b, db.path()).unwrap();
    for path in sa.csv.iter().chain(&sa.metadata) {
        let name = path.file_name().unwrap();
        assert_eq!(fs::read(path).unwrap(), fs::read(db.path().join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn custom_without_coupling_stays_put() {
    let overlay = Overlay::parse("[params]\ng = 0.0\nxi = 1.0\nnu = 2.0\n[grid]\nt_max = 30.0\nsamples = 11").unwrap();
    let spec = resolve(None, None, &overlay).unwrap();
    assert_eq!(spec.scenario, Scenario::Custom);
    let out = compute(&spec).unwrap();
    let t = &out.tables[0];
    assert!(t.column("P_g0").unwrap().iter().all(|p| (p - 1.0).abs() < 1e-10));
    assert!(t.column("P_e1").unwrap().iter().all(|p| p.abs() < 1e-10));
}

#[test]
fn config_file_refines_a_preset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "scenario = \"fig9\"\n[params]\nn_fock = 7\n[grid]\nnu_panels = [30.0]\n").unwrap();
    let file = Overlay::load(&path).unwrap();
    let spec = resolve(None, Some(&file), &Overlay::default()).unwrap();
    assert_eq!(spec.scenario, Scenario::Fig9);
    assert_eq!(spec.params.n_fock, 7);
    assert_eq!(spec.params.g, 0.5);
    assert_eq!(spec.grid.nu_panels, vec![30.0]);
}

#[test]
fn convergence_detects_a_small_cutoff() {
    let mut spec = quick(Scenario::Fig8);
    spec.params.n_fock = 3;
    let report = convergence_report(&spec).unwrap();
    assert!(!report.pass);
    assert!(report.checks[0].deviation > 1e-3);
    assert!(report.summary().contains("FAIL"));

    let ok = convergence_report(&quick(Scenario::Fig3)).unwrap();
    assert!(ok.pass, "{}", ok.summary());
}
