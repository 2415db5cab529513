//! Cutoff convergence: the headline observable of a scenario is recomputed
//! with a larger Fock cutoff and a larger sideband cutoff.

use serde::Serialize;

use super::spec::{ExperimentSpec, Scenario};
use super::{compute, fig4_grid, xi_for_peak};
use crate::dynamics::pmax_point;
use crate::error::Result;
use crate::exec::par_map;
use crate::opensys::{steady_flux, FluxOptions};

pub const PROBABILITY_TOL: f64 = 1e-3;
pub const FLUX_REL_TOL: f64 = 0.02;
pub const EXTRA_FOCK: usize = 5;
pub const EXTRA_SIDEBANDS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableKind {
    Probability,
    Flux,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceCheck {
    pub label: String,
    pub n_fock: usize,
    pub n_max: usize,
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub scenario: Scenario,
    pub observable: String,
    pub kind: ObservableKind,
    pub tolerance: f64,
    pub n_fock: usize,
    pub n_max: usize,
    pub checks: Vec<ConvergenceCheck>,
    pub pass: bool,
}

impl ConvergenceReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} {} ({}, n_fock = {}, n_max = {}): {}\n",
            self.scenario,
            self.observable,
            match self.kind {
                ObservableKind::Probability => format!("absolute tolerance {:e}", self.tolerance),
                ObservableKind::Flux => format!("relative tolerance {}%", self.tolerance * 100.0),
            },
            self.n_fock,
            self.n_max,
            if self.pass { "PASS" } else { "FAIL" }
        );
        for c in &self.checks {
            s.push_str(&format!(
                "  {:<10} n_fock = {:<3} n_max = {:<3} deviation = {:.3e}  {}\n",
                c.label,
                c.n_fock,
                c.n_max,
                c.deviation,
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        s
    }
}

/// Description and values of the observable a scenario is judged by.
fn headline(spec: &ExperimentSpec) -> Result<(String, ObservableKind, Vec<f64>)> {
    match spec.scenario {
        Scenario::Fig4 => {
            let grid = fig4_grid(spec)?;
            let p = &spec.params;
            let centers: Vec<f64> = (1..=5)
                .map(|m| (p.omega0 + p.omegac) / m as f64)
                .filter(|c| grid.first().is_some_and(|lo| c >= lo) && grid.last().is_some_and(|hi| c <= hi))
                .collect();
            let t_max = match spec.grid.t_max {
                Some(t) => t,
                None => spec.comb_horizon()?,
            };
            let vals = par_map(&centers, spec.solver.jobs(), |&nu| pmax_point(&p.with_nu(nu), t_max, &spec.solver));
            Ok((
                "pmax at the predicted peaks".into(),
                ObservableKind::Probability,
                vals.into_iter().collect::<Result<_>>()?,
            ))
        }
        Scenario::Fig6 => {
            let p = &spec.params;
            let mut points = Vec::new();
            for &xi in &spec.grid.xi_curves {
                for m in [1.0, 2.0] {
                    points.push((xi, (p.omega0 + p.omegac) / m));
                }
            }
            let opts: FluxOptions = spec.flux;
            let vals = par_map(&points, spec.solver.jobs(), |&(xi, nu)| {
                let run = steady_flux(&p.with_xi(xi).with_nu(nu), &spec.solver, &opts)?;
                Ok(run.steady.map_or(f64::NAN, |s| s.mean))
            });
            Ok((
                "steady flux at the m0 = -1, -2 peaks".into(),
                ObservableKind::Flux,
                vals.into_iter().collect::<Result<_>>()?,
            ))
        }
        Scenario::Fig5 => {
            let mut s = spec.clone();
            if s.grid.maximize_xi {
                let nu = s.grid.nu_panels.first().copied().unwrap_or(0.0);
                s.grid.xi_curves = vec![xi_for_peak(&s.params, nu)?];
                s.grid.maximize_xi = false;
                s.grid.nu_panels.truncate(1);
            }
            Ok(("output flux trace".into(), ObservableKind::Flux, all_columns(&s)?))
        }
        Scenario::Fig2 | Scenario::Fig7 => {
            let mut s = spec.clone();
            // panels only; the fidelity sweep is a coarse overview
            s.grid.nu_values = Some(Vec::new());
            Ok(("fidelity traces".into(), ObservableKind::Probability, all_columns(&s)?))
        }
        _ => Ok(("population traces".into(), ObservableKind::Probability, all_columns(spec)?)),
    }
}

/// Every non-axis column of every table, concatenated.
fn all_columns(spec: &ExperimentSpec) -> Result<Vec<f64>> {
    let out = compute(spec)?;
    let mut v = Vec::new();
    for t in &out.tables {
        for (name, col) in t.columns.iter().skip(1) {
            if !name.starts_with("flux_std") {
                v.extend_from_slice(col);
            }
        }
    }
    Ok(v)
}

fn deviation(kind: ObservableKind, base: &[f64], other: &[f64]) -> f64 {
    let n = base.len().min(other.len());
    match kind {
        ObservableKind::Probability => (0..n).map(|i| (base[i] - other[i]).abs()).fold(0.0, f64::max),
        ObservableKind::Flux => {
            let floor = 1e-3 * base.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            (0..n)
                .map(|i| (base[i] - other[i]).abs() / base[i].abs().max(floor).max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        }
    }
}

/// Reruns the headline observable at n_fock + 5 and n_max + 10. PASS needs
/// an absolute shift below 1e-3 for probabilities and a relative shift below
/// 2% for flux.
pub fn convergence_report(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    spec.validate()?;
    let (observable, kind, base) = headline(spec)?;
    let tolerance = match kind {
        ObservableKind::Probability => PROBABILITY_TOL,
        ObservableKind::Flux => FLUX_REL_TOL,
    };
    let mut checks = Vec::new();
    for (label, df, dn) in [("n_fock+5", EXTRA_FOCK, 0), ("n_max+10", 0, EXTRA_SIDEBANDS)] {
        let mut s = spec.clone();
        s.params.n_fock += df;
        s.solver.n_max += dn;
        let (_, _, vals) = headline(&s)?;
        let dev = deviation(kind, &base, &vals);
        checks.push(ConvergenceCheck {
            label: label.into(),
            n_fock: s.params.n_fock,
            n_max: s.solver.n_max,
            deviation: dev,
            pass: dev < tolerance,
        });
    }
    Ok(ConvergenceReport {
        scenario: spec.scenario,
        observable,
        kind,
        tolerance,
        n_fock: spec.params.n_fock,
        n_max: spec.solver.n_max,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_deviation_uses_floor() {
        let d = deviation(ObservableKind::Flux, &[1.0, 0.0], &[1.01, 1e-4]);
        assert!((d - 0.1).abs() < 1e-12);
        assert!((deviation(ObservableKind::Probability, &[0.2, 0.5], &[0.25, 0.5]) - 0.05).abs() < 1e-15);
    }
}
