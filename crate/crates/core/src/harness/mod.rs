//! Figure scenarios, configuration and deterministic CSV/JSON output.

pub mod config;
pub mod converge;
pub mod output;
pub mod spec;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use crate::dynamics::{
    ajc_analytic, fidelity_trace, jc_analytic, pmax_sweep, populations, EffectiveModel, HamiltonianChoice, InitialState,
};
use crate::error::{Error, Result};
use crate::exec::par_map;
use crate::model::{resonant_cr_order, BasisLabel, EnhancedCouplings, ModelParams};
use crate::numerics::bessel::bessel_j;
use crate::opensys::{flux_sweep, flux_trace};

pub use config::{resolve, Overlay};
pub use converge::{convergence_report, ConvergenceReport};
pub use output::Table;
pub use spec::{ExperimentSpec, GridSettings, Scenario};

/// Tables and notices produced by one run.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
}

/// Files written by [`run`].
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub csv: Vec<PathBuf>,
    pub metadata: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub wall_seconds: f64,
}

/// Label for a panel value: `2`, `0.6`, `2.40483`.
pub fn fmt_value(x: f64) -> String {
    format!("{x}")
}

fn scaled(times: &[f64], factor: f64) -> Vec<f64> {
    times.iter().map(|t| t * factor).collect()
}

fn dynamics_time(spec: &ExperimentSpec, times: &[f64]) -> (&'static str, Vec<f64>) {
    if spec.params.g > 0.0 {
        ("t_g_over_2pi", scaled(times, spec.params.g / (2.0 * PI)))
    } else {
        ("t", times.to_vec())
    }
}

fn prefix_warnings(tag: &str, w: Vec<String>) -> impl Iterator<Item = String> + '_ {
    w.into_iter().map(move |m| format!("{tag}: {m}"))
}

fn fidelity_panels(spec: &ExperimentSpec, effective: EffectiveModel, name: &str, out: &mut RunOutput) -> Result<()> {
    let t_max = spec.grid.t_max.unwrap_or_else(|| spec.t_s());
    let times = spec.grid.times(t_max)?;
    let (tname, tcol) = dynamics_time(spec, &times);
    let mut table = Table::new(name).with(tname, tcol);
    for &nu in &spec.grid.nu_panels {
        let p = spec.params.with_nu(nu);
        let ts = fidelity_trace(&p, &spec.init, effective, &times, &spec.solver)?;
        table.push(format!("F_nu{}", fmt_value(nu)), ts.channel("F").unwrap_or_default().to_vec());
        out.warnings.extend(prefix_warnings(&format!("nu = {nu}"), ts.warnings));
    }
    out.tables.push(table);
    Ok(())
}

fn fidelity_sweep(spec: &ExperimentSpec, effective: EffectiveModel, name: &str, out: &mut RunOutput) -> Result<()> {
    let t_s = spec.t_s();
    let mut grid = spec.grid.uniform_nu()?;
    if effective == EffectiveModel::Enhanced {
        if grid.iter().any(|&nu| nu <= 0.0) {
            out.warnings.push("skipped nu = 0: the enhanced model needs a resonant sideband".into());
        }
        grid.retain(|&nu| nu > 0.0);
    }
    let runs = par_map(&grid, spec.solver.jobs(), |&nu| {
        fidelity_trace(&spec.params.with_nu(nu), &spec.init, effective, &[t_s], &spec.solver)
    });
    let mut f = Vec::with_capacity(grid.len());
    let mut rwa = 0;
    for (nu, r) in grid.iter().zip(runs) {
        let ts = r?;
        f.push(ts.channel("F").unwrap_or_default()[0]);
        rwa += usize::from(!ts.warnings.is_empty());
        if ts.warnings.iter().any(|w| w.contains("not converged") || w.contains("drift")) {
            out.warnings.extend(prefix_warnings(&format!("nu = {nu}"), ts.warnings));
        }
    }
    if rwa > 0 {
        out.warnings.push(format!("{rwa} of {} grid points lie outside the RWA validity conditions", grid.len()));
    }
    out.tables.push(Table::new(name).with("nu_over_omega0", scaled(&grid, 1.0 / spec.params.omega0)).with("F_ts", f));
    Ok(())
}

fn fig3(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<()> {
    let labels = [BasisLabel::g(0), BasisLabel::e(1)];
    for &nu in &spec.grid.nu_panels {
        let p = spec.params.with_nu(nu);
        let c = EnhancedCouplings::new(&p)?;
        if c.g_c == 0.0 && spec.grid.t_max.is_none() {
            return Err(Error::InvalidParams(format!("g J_{}(xi) vanishes at nu = {nu}", c.m0)));
        }
        let t_max = spec.grid.t_max.unwrap_or(2.0 * PI / c.g_c.abs());
        let times = spec.grid.times(t_max)?;
        let exact = populations(&p, HamiltonianChoice::Exact, &spec.init, &labels, &times, &spec.solver)?;
        let ana = ajc_analytic(&p, &times)?;
        let (tname, tcol) = dynamics_time(spec, &times);
        let name =
            if spec.grid.nu_panels.len() == 1 { "fig3".to_string() } else { format!("fig3_nu{}", fmt_value(nu)) };
        let mut table = Table::new(name)
            .with(tname, tcol)
            .with("P_g0_exact", exact.channel("P_g0").unwrap_or_default().to_vec())
            .with("P_e1_exact", exact.channel("P_e1").unwrap_or_default().to_vec())
            .with("P_g0_analytic", ana.channel("P_g0").unwrap_or_default().to_vec())
            .with("P_e1_analytic", ana.channel("P_e1").unwrap_or_default().to_vec());
        table.meta.insert("nu".into(), json!(nu));
        table.meta.insert("m0".into(), json!(c.m0));
        table.meta.insert("g_c".into(), json!(c.g_c));
        out.tables.push(table);
        out.warnings.extend(prefix_warnings(&format!("nu = {nu}"), exact.warnings));
    }
    Ok(())
}

/// Half width of the refined region around the |m0| = m peak: three
/// predicted linewidths, at least 0.02.
pub fn comb_half_width(p: &ModelParams, m: i32) -> Result<f64> {
    Ok((3.0 * (2.0 * p.g * bessel_j(m, p.xi)? / m as f64).abs()).max(0.02))
}

pub fn fig4_grid(spec: &ExperimentSpec) -> Result<Vec<f64>> {
    spec.grid.refined_nu(&spec.params, |m| comb_half_width(&spec.params, m))
}

fn fig4(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<()> {
    let grid = fig4_grid(spec)?;
    let t_max = match spec.grid.t_max {
        Some(t) => t,
        None => spec.comb_horizon()?,
    };
    let sweep = pmax_sweep(&spec.params, &grid, t_max, &spec.solver)?;
    let mut table = Table::new("fig4")
        .with(sweep.axis_name.clone(), sweep.axis.clone())
        .with("pmax", sweep.column("pmax").unwrap_or_default().to_vec());
    table.meta.insert("t_max".into(), json!(t_max));
    out.tables.push(table);
    out.warnings.extend(sweep.flags);
    Ok(())
}

/// ξ maximizing |J_{m0}(ξ)| at modulation frequency ν (0 without modulation).
pub fn xi_for_peak(p: &ModelParams, nu: f64) -> Result<f64> {
    if nu == 0.0 {
        return Ok(0.0);
    }
    spec::xi_maximizing(resonant_cr_order(&p.with_nu(nu))?)
}

fn flux_panel(spec: &ExperimentSpec, name: String, curves: &[(f64, f64)], out: &mut RunOutput) -> Result<()> {
    let horizon = spec.grid.t_max.unwrap_or_else(|| spec.flux.horizon(&spec.params));
    let times = spec.grid.times(horizon)?;
    let runs = par_map(curves, spec.solver.jobs(), |&(nu, xi)| {
        flux_trace(&ModelParams { nu, xi, ..spec.params }, &times, &spec.solver, &spec.flux)
    });
    let mut table = Table::new(name).with("t_gamma_c", scaled(&times, spec.params.gamma_c));
    for (&(nu, xi), r) in curves.iter().zip(runs) {
        let col = format!("phi_nu{}", fmt_value(nu));
        table.meta.insert(format!("xi_{col}"), json!(xi));
        table.push(col, r?.phi_out);
    }
    out.tables.push(table);
    Ok(())
}

fn fig5(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<()> {
    let panels = &spec.grid.nu_panels;
    if spec.grid.maximize_xi {
        let curves = panels.iter().map(|&nu| Ok((nu, xi_for_peak(&spec.params, nu)?))).collect::<Result<Vec<_>>>()?;
        flux_panel(spec, "fig5a".into(), &curves, out)?;
    }
    for &xi in &spec.grid.xi_curves {
        let name = match (spec.grid.xi_curves.len(), spec.grid.maximize_xi) {
            (1, true) => "fig5b".to_string(),
            (1, false) => "fig5".to_string(),
            _ => format!("fig5_xi{}", fmt_value(xi)),
        };
        let curves: Vec<(f64, f64)> = panels.iter().map(|&nu| (nu, xi)).collect();
        flux_panel(spec, name, &curves, out)?;
    }
    Ok(())
}

pub fn fig6_grid(spec: &ExperimentSpec) -> Result<Vec<f64>> {
    spec.grid.refined_nu(&spec.params, |_| Ok(0.02))
}

fn fig6(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<()> {
    let grid = fig6_grid(spec)?;
    let mut table = Table::new("fig6").with("nu_over_omega0", scaled(&grid, 1.0 / spec.params.omega0));
    for &xi in &spec.grid.xi_curves {
        let sweep = flux_sweep(&spec.params.with_xi(xi), &grid, &spec.solver, &spec.flux)?;
        let tag = fmt_value(xi);
        table.push(format!("flux_ss_xi{tag}"), sweep.column("flux_ss").unwrap_or_default().to_vec());
        table.push(format!("flux_std_xi{tag}"), sweep.column("flux_std").unwrap_or_default().to_vec());
        out.warnings.extend(prefix_warnings(&format!("xi = {xi}"), sweep.flags));
    }
    table.meta.insert("horizon".into(), json!(spec.flux.horizon(&spec.params)));
    out.tables.push(table);
    Ok(())
}

fn population_panels(
    spec: &ExperimentSpec,
    name: &str,
    labels: &[BasisLabel],
    t_max: f64,
    out: &mut RunOutput,
) -> Result<Table> {
    let times = spec.grid.times(t_max)?;
    let (tname, tcol) = dynamics_time(spec, &times);
    let mut table = Table::new(name).with(tname, tcol);
    for &nu in &spec.grid.nu_panels {
        let p = spec.params.with_nu(nu);
        let ts = populations(&p, HamiltonianChoice::Exact, &spec.init, labels, &times, &spec.solver)?;
        for l in labels {
            table
                .push(format!("P_{l}_nu{}", fmt_value(nu)), ts.channel(&format!("P_{l}")).unwrap_or_default().to_vec());
        }
        out.warnings.extend(prefix_warnings(&format!("nu = {nu}"), ts.warnings));
    }
    Ok(table)
}

fn fig9(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<()> {
    let g_r = (spec.params.g * bessel_j(0, spec.params.xi)?).abs();
    let t_max = spec.grid.t_max.unwrap_or(if g_r > 0.0 { 2.0 * PI / g_r } else { spec.t_s() });
    let labels = [BasisLabel::e(0), BasisLabel::g(1)];
    let mut table = population_panels(spec, "fig9", &labels, t_max, out)?;
    let times = spec.grid.times(t_max)?;
    let jc = jc_analytic(&spec.params, &times)?;
    table.push("P_e0_jc", jc.channel("P_e0").unwrap_or_default().to_vec());
    table.push("P_g1_jc", jc.channel("P_g1").unwrap_or_default().to_vec());
    out.warnings.extend(jc.warnings);
    out.tables.push(table);
    Ok(())
}

fn custom(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<()> {
    let t_max = spec.grid.t_max.unwrap_or_else(|| spec.t_s());
    let times = spec.grid.times(t_max)?;
    let labels = [BasisLabel::g(0), BasisLabel::e(0), BasisLabel::g(1), BasisLabel::e(1)];
    let ts = populations(&spec.params, HamiltonianChoice::Exact, &spec.init, &labels, &times, &spec.solver)?;
    let mut table = Table::new("custom").with("t", times.clone());
    for c in ts.channels {
        table.push(c.name, c.values);
    }
    out.tables.push(table);
    out.warnings.extend(ts.warnings);
    Ok(())
}

/// Computes every table of a scenario without touching the filesystem.
pub fn compute(spec: &ExperimentSpec) -> Result<RunOutput> {
    spec.validate()?;
    let mut out = RunOutput::default();
    match spec.scenario {
        Scenario::Fig2 => {
            fidelity_panels(spec, EffectiveModel::Enhanced, "fig2a", &mut out)?;
            fidelity_sweep(spec, EffectiveModel::Enhanced, "fig2b", &mut out)?;
        }
        Scenario::Fig3 => fig3(spec, &mut out)?,
        Scenario::Fig4 => fig4(spec, &mut out)?,
        Scenario::Fig5 => fig5(spec, &mut out)?,
        Scenario::Fig6 => fig6(spec, &mut out)?,
        Scenario::Fig7 => {
            fidelity_panels(spec, EffectiveModel::Suppressed, "fig7a", &mut out)?;
            fidelity_sweep(spec, EffectiveModel::Suppressed, "fig7b", &mut out)?;
        }
        Scenario::Fig8 => {
            let t_max = spec.grid.t_max.unwrap_or_else(|| spec.t_s());
            let table = population_panels(spec, "fig8", &[BasisLabel::g(0)], t_max, &mut out)?;
            out.tables.push(table);
        }
        Scenario::Fig9 => fig9(spec, &mut out)?,
        Scenario::Custom => custom(spec, &mut out)?,
    }
    Ok(out)
}

fn init_label(init: &InitialState) -> String {
    match init {
        InitialState::Ground => "g0".into(),
        InitialState::Excited => "e0".into(),
        InitialState::Basis { label } => label.to_string(),
        InitialState::SuperpositionCoherent { alpha_re, alpha_im } => {
            format!("(g+e)/sqrt2 x coherent({alpha_re}{alpha_im:+}i)")
        }
    }
}

/// Flat metadata object describing one table.
pub fn metadata(spec: &ExperimentSpec, table: &Table, warnings: &[String]) -> BTreeMap<String, Value> {
    let p = &spec.params;
    let s = &spec.solver;
    let mut m: BTreeMap<String, Value> = BTreeMap::new();
    m.insert("figure".into(), json!(spec.scenario.figure()));
    m.insert("scenario".into(), json!(spec.scenario.name()));
    m.insert("table".into(), json!(table.name));
    m.insert("columns".into(), json!(table.headers()));
    m.insert("rows".into(), json!(table.rows()));
    for (k, v) in [
        ("omega0", p.omega0),
        ("omegac", p.omegac),
        ("g", p.g),
        ("xi", p.xi),
        ("nu", p.nu),
        ("gamma_a", p.gamma_a),
        ("gamma_c", p.gamma_c),
        ("atol", s.atol),
        ("rtol", s.rtol),
        ("rwa_factor", s.rwa_factor),
        ("keep_fraction", spec.flux.keep_fraction),
        ("window_periods", spec.flux.window_periods),
    ] {
        m.insert(k.into(), json!(v));
    }
    m.insert("n_fock".into(), json!(p.n_fock));
    m.insert("n_max".into(), json!(s.n_max));
    m.insert("samples".into(), json!(spec.grid.samples));
    m.insert("nu_panels".into(), json!(spec.grid.nu_panels));
    m.insert("xi_curves".into(), json!(spec.grid.xi_curves));
    m.insert("t_max".into(), json!(spec.grid.t_max));
    m.insert("seed".into(), json!(spec.seed));
    m.insert("initial_state".into(), json!(init_label(&spec.init)));
    m.insert("frequency_unit".into(), json!("omega0"));
    m.insert("warnings".into(), json!(warnings));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    for (k, v) in &table.meta {
        m.insert(k.clone(), v.clone());
    }
    m
}

/// Runs a scenario and writes `<table>.csv` plus a `<table>.json` sidecar for
/// every table, and `<scenario>.timing.json` with the wall time. The CSV and
/// sidecar files are byte-identical across reruns and worker counts.
pub fn run(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunSummary> {
    let start = Instant::now();
    let out = compute(spec)?;
    write_outputs(spec, &out, out_dir, start.elapsed().as_secs_f64())
}

pub fn write_outputs(spec: &ExperimentSpec, out: &RunOutput, out_dir: &Path, wall: f64) -> Result<RunSummary> {
    output::ensure_dir(out_dir)?;
    let mut summary =
        RunSummary { csv: Vec::new(), metadata: Vec::new(), warnings: out.warnings.clone(), wall_seconds: wall };
    for table in &out.tables {
        let csv = out_dir.join(format!("{}.csv", table.name));
        output::write_csv(&csv, table)?;
        let meta = out_dir.join(format!("{}.json", table.name));
        output::write_json(&meta, &metadata(spec, table, &out.warnings))?;
        summary.csv.push(csv);
        summary.metadata.push(meta);
    }
    let mut timing = BTreeMap::new();
    timing.insert("scenario".to_string(), json!(spec.scenario.name()));
    timing.insert("wall_seconds".to_string(), json!(wall));
    output::write_json(&out_dir.join(format!("{}.timing.json", spec.scenario.name())), &timing)?;
    for w in &out.warnings {
        log::warn!("{w}");
    }
    Ok(summary)
}
