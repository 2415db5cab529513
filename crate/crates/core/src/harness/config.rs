//! Configuration overlays. A preset is refined first by a TOML file and then
//! by command-line flags, each of which only touches the keys it sets.
//!
//! ```toml
//! scenario = "fig4"
//!
//! [params]
//! g = 0.05
//! xi = 2.40483
//!
//! [solver]
//! rtol = 1e-9
//!
//! [grid]
//! nu_min = 0.5
//! ```

use std::path::Path;

use serde::Deserialize;

use super::spec::{ExperimentSpec, Scenario};
use crate::dynamics::InitialState;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsOverlay {
    pub omega0: Option<f64>,
    pub omegac: Option<f64>,
    pub g: Option<f64>,
    pub xi: Option<f64>,
    pub nu: Option<f64>,
    pub gamma_a: Option<f64>,
    pub gamma_c: Option<f64>,
    pub n_fock: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverlay {
    pub n_max: Option<usize>,
    pub atol: Option<f64>,
    pub rtol: Option<f64>,
    pub check_convergence: Option<bool>,
    pub rwa_factor: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverlay {
    pub nu_panels: Option<Vec<f64>>,
    pub xi_curves: Option<Vec<f64>>,
    pub maximize_xi: Option<bool>,
    pub t_max: Option<f64>,
    pub samples: Option<usize>,
    pub nu_min: Option<f64>,
    pub nu_max: Option<f64>,
    pub coarse_step: Option<f64>,
    pub fine_step: Option<f64>,
    pub nu_values: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxOverlay {
    pub keep_fraction: Option<f64>,
    pub horizon: Option<f64>,
    pub window_periods: Option<f64>,
    pub samples_per_window: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOverlay {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub init: Option<InitialState>,
}

/// A partial [`ExperimentSpec`].
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overlay {
    pub scenario: Option<String>,
    #[serde(default)]
    pub params: ParamsOverlay,
    #[serde(default)]
    pub solver: SolverOverlay,
    #[serde(default)]
    pub grid: GridOverlay,
    #[serde(default)]
    pub flux: FluxOverlay,
    #[serde(default)]
    pub run: RunOverlay,
}

macro_rules! set {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src.clone() {
            $dst = v;
        }
    };
}

impl Overlay {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn scenario(&self) -> Result<Option<Scenario>> {
        self.scenario.as_deref().map(str::parse).transpose()
    }

    /// Applies every key this overlay sets. An explicit `nu` (or `xi`)
    /// collapses the panels (or curves) to that single value.
    pub fn apply(&self, spec: &mut ExperimentSpec) {
        let (p, q) = (&mut spec.params, &self.params);
        set!(p.omega0, q.omega0);
        set!(p.omegac, q.omegac);
        set!(p.g, q.g);
        set!(p.xi, q.xi);
        set!(p.nu, q.nu);
        set!(p.gamma_a, q.gamma_a);
        set!(p.gamma_c, q.gamma_c);
        set!(p.n_fock, q.n_fock);
        if let Some(nu) = q.nu {
            spec.grid.nu_panels = vec![nu];
        }
        if let Some(xi) = q.xi {
            spec.grid.xi_curves = vec![xi];
            spec.grid.maximize_xi = false;
        }

        let (s, q) = (&mut spec.solver, &self.solver);
        set!(s.n_max, q.n_max);
        set!(s.atol, q.atol);
        set!(s.rtol, q.rtol);
        set!(s.check_convergence, q.check_convergence);
        set!(s.rwa_factor, q.rwa_factor);

        let (g, q) = (&mut spec.grid, &self.grid);
        set!(g.nu_panels, q.nu_panels);
        set!(g.xi_curves, q.xi_curves);
        set!(g.maximize_xi, q.maximize_xi);
        if q.t_max.is_some() {
            g.t_max = q.t_max;
        }
        set!(g.samples, q.samples);
        set!(g.nu_min, q.nu_min);
        set!(g.nu_max, q.nu_max);
        set!(g.coarse_step, q.coarse_step);
        set!(g.fine_step, q.fine_step);
        if q.nu_values.is_some() {
            g.nu_values = q.nu_values.clone();
        }

        let (f, q) = (&mut spec.flux, &self.flux);
        set!(f.keep_fraction, q.keep_fraction);
        if q.horizon.is_some() {
            f.horizon = q.horizon;
        }
        set!(f.window_periods, q.window_periods);
        set!(f.samples_per_window, q.samples_per_window);

        set!(spec.seed, self.run.seed);
        set!(spec.init, self.run.init);
        if self.run.jobs.is_some() {
            spec.solver.jobs = self.run.jobs;
        }
    }
}

/// Preset of the scenario named by the CLI, else by the file, else `custom`,
/// refined by the file and then by the CLI overlay.
pub fn resolve(cli_scenario: Option<Scenario>, file: Option<&Overlay>, cli: &Overlay) -> Result<ExperimentSpec> {
    let scenario = match cli_scenario.or(cli.scenario()?) {
        Some(s) => s,
        None => file.map(Overlay::scenario).transpose()?.flatten().unwrap_or(Scenario::Custom),
    };
    let mut spec = ExperimentSpec::preset(scenario);
    if let Some(f) = file {
        f.apply(&mut spec);
    }
    cli.apply(&mut spec);
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_cli_over_file_over_preset() {
        let file = Overlay::parse(
            r#"
            scenario = "fig3"
            [params]
            g = 0.04
            n_fock = 9
            [solver]
            rtol = 1e-9
            "#,
        )
        .unwrap();
        let cli = Overlay { params: ParamsOverlay { g: Some(0.03), ..Default::default() }, ..Default::default() };
        let spec = resolve(None, Some(&file), &cli).unwrap();
        assert_eq!(spec.scenario, Scenario::Fig3);
        assert_eq!(spec.params.g, 0.03);
        assert_eq!(spec.params.n_fock, 9);
        assert_eq!(spec.solver.rtol, 1e-9);
        assert_eq!(spec.params.xi, ExperimentSpec::preset(Scenario::Fig3).params.xi);
        assert_eq!(spec.grid.nu_panels, vec![1.0, 2.0]);
    }

    #[test]
    fn explicit_nu_collapses_panels() {
        let cli = Overlay { params: ParamsOverlay { nu: Some(2.0), ..Default::default() }, ..Default::default() };
        let spec = resolve(Some(Scenario::Fig3), None, &cli).unwrap();
        assert_eq!(spec.grid.nu_panels, vec![2.0]);
    }

    #[test]
    fn bad_files_are_config_errors() {
        assert!(matches!(Overlay::parse("[params]\nfoo = 1"), Err(Error::Config(_))));
        assert!(matches!(Overlay::parse("[params\n"), Err(Error::Config(_))));
        let o = Overlay::parse("scenario = \"fig99\"").unwrap();
        assert!(matches!(resolve(None, Some(&o), &Overlay::default()), Err(Error::UnknownScenario(_))));
        let o = Overlay::parse("[params]\ng = -1.0").unwrap();
        assert!(resolve(None, Some(&o), &Overlay::default()).unwrap_err().is_validation());
    }

    #[test]
    fn initial_state_from_file() {
        let o = Overlay::parse("[run.init]\nkind = \"basis\"\nlabel = \"e1\"").unwrap();
        let spec = resolve(None, Some(&o), &Overlay::default()).unwrap();
        assert_eq!(spec.init, InitialState::Basis { label: crate::model::BasisLabel::e(1) });
    }
}
