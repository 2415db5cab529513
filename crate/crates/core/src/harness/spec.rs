use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::InitialState;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::bessel::bessel_j;
use crate::opensys::FluxOptions;
use crate::series::{linspace_step, refined_grid};
use crate::settings::SolverSettings;

pub const XI_J0_ZERO: f64 = 2.40483;
pub const XI_J1_MAX: f64 = 1.84118;
pub const XI_J0_TENTH: f64 = 2.21868;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Fig2,
        Scenario::Fig3,
        Scenario::Fig4,
        Scenario::Fig5,
        Scenario::Fig6,
        Scenario::Fig7,
        Scenario::Fig8,
        Scenario::Fig9,
        Scenario::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Fig4 => "fig4",
            Scenario::Fig5 => "fig5",
            Scenario::Fig6 => "fig6",
            Scenario::Fig7 => "fig7",
            Scenario::Fig8 => "fig8",
            Scenario::Fig9 => "fig9",
            Scenario::Custom => "custom",
        }
    }

    /// Short description of the figure a scenario mirrors.
    pub fn figure(self) -> &'static str {
        match self {
            Scenario::Fig2 => "Fig. 2: fidelity of the enhanced effective Hamiltonian",
            Scenario::Fig3 => "Fig. 3: anti-JC Rabi oscillation between |g,0> and |e,1>",
            Scenario::Fig4 => "Fig. 4: maximal |e,1> population versus modulation frequency",
            Scenario::Fig5 => "Fig. 5: output photon flux rate versus time",
            Scenario::Fig6 => "Fig. 6: steady-state output photon flux rate versus modulation frequency",
            Scenario::Fig7 => "Fig. 7: fidelity of the suppressed effective Hamiltonian",
            Scenario::Fig8 => "Fig. 8: |g,0> population in the ultrastrong regime",
            Scenario::Fig9 => "Fig. 9: JC exchange between |e,0> and |g,1> in the ultrastrong regime",
            Scenario::Custom => "custom run",
        }
    }

    /// Whether outputs are flux-type (relative convergence) rather than
    /// probabilities (absolute convergence).
    pub fn is_flux(self) -> bool {
        matches!(self, Scenario::Fig5 | Scenario::Fig6)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Scenario::ALL.into_iter().find(|sc| sc.name() == key).ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Time and frequency grids of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSettings {
    /// Modulation frequencies of the time-trace panels.
    pub nu_panels: Vec<f64>,
    /// Modulation amplitudes of the flux curves.
    pub xi_curves: Vec<f64>,
    /// Add a flux panel whose ξ maximizes |J_{m0}(ξ)| for each ν.
    pub maximize_xi: bool,
    /// Evolution time; scenario-specific default when absent.
    pub t_max: Option<f64>,
    /// Number of time samples, including t = 0.
    pub samples: usize,
    pub nu_min: f64,
    pub nu_max: f64,
    pub coarse_step: f64,
    /// Step near predicted resonances (0 disables refinement).
    pub fine_step: f64,
    /// Explicit sweep grid, replacing the generated one.
    pub nu_values: Option<Vec<f64>>,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            nu_panels: Vec::new(),
            xi_curves: Vec::new(),
            maximize_xi: false,
            t_max: None,
            samples: 801,
            nu_min: 0.3,
            nu_max: 2.5,
            coarse_step: 0.01,
            fine_step: 0.002,
            nu_values: None,
        }
    }
}

impl GridSettings {
    pub fn times(&self, t_max: f64) -> Result<Vec<f64>> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::InvalidParams(format!("t_max must be positive and finite, got {t_max}")));
        }
        if self.samples < 2 {
            return Err(Error::InvalidParams("at least two time samples are needed".into()));
        }
        let n = self.samples - 1;
        Ok((0..=n).map(|k| t_max * k as f64 / n as f64).collect())
    }

    fn check_range(&self) -> Result<()> {
        if !(self.nu_min >= 0.0 && self.nu_max > self.nu_min && self.coarse_step > 0.0 && self.fine_step >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "bad sweep grid: nu in [{}, {}], steps {} / {}",
                self.nu_min, self.nu_max, self.coarse_step, self.fine_step
            )));
        }
        Ok(())
    }

    /// Uniform sweep grid, or the explicit one.
    pub fn uniform_nu(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.nu_values {
            return Ok(v.clone());
        }
        self.check_range()?;
        Ok(linspace_step(self.nu_min, self.nu_max, self.coarse_step))
    }

    /// Sweep grid refined around ν = (ω0 + ωc)/|m| with the given half widths.
    pub fn refined_nu(&self, p: &ModelParams, half_width: impl Fn(i32) -> Result<f64>) -> Result<Vec<f64>> {
        if let Some(v) = &self.nu_values {
            return Ok(v.clone());
        }
        self.check_range()?;
        if self.fine_step == 0.0 {
            return self.uniform_nu();
        }
        let mut centers = Vec::new();
        for m in 1..=64 {
            let c = (p.omega0 + p.omegac) / m as f64;
            if c < self.nu_min {
                break;
            }
            if c <= self.nu_max {
                centers.push((c, half_width(m)?));
            }
        }
        Ok(refined_grid(self.nu_min, self.nu_max, self.coarse_step, self.fine_step, &centers))
    }
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub params: ModelParams,
    pub solver: SolverSettings,
    pub grid: GridSettings,
    pub flux: FluxOptions,
    pub init: InitialState,
    /// Reserved; every computation is deterministic.
    pub seed: u64,
}

impl ExperimentSpec {
    /// The parameter set of the figure caption.
    pub fn preset(scenario: Scenario) -> Self {
        let weak =
            ModelParams { omega0: 1.0, omegac: 1.0, g: 0.05, xi: XI_J0_ZERO, n_fock: 10, ..ModelParams::default() };
        let ultra = ModelParams { g: 0.5, xi: XI_J0_TENTH, n_fock: 15, ..weak };
        let open = ModelParams { gamma_a: 0.02, gamma_c: 0.02, n_fock: 11, ..weak };
        let coherent = InitialState::superposition_coherent(crate::C64::new(0.1, 0.0));
        let mut spec = Self {
            scenario,
            params: weak,
            solver: SolverSettings::default(),
            grid: GridSettings::default(),
            flux: FluxOptions::default(),
            init: InitialState::Ground,
            seed: 0,
        };
        match scenario {
            Scenario::Fig2 => {
                spec.init = coherent;
                spec.grid.nu_panels = vec![0.2, 0.6, 1.0];
                spec.grid.nu_min = 0.1;
                spec.grid.nu_max = 3.0;
                spec.grid.coarse_step = 0.05;
            }
            Scenario::Fig3 => {
                spec.grid.nu_panels = vec![1.0, 2.0];
            }
            Scenario::Fig4 => {
                spec.params.n_fock = 8;
            }
            Scenario::Fig5 => {
                spec.params = open;
                spec.grid.nu_panels = vec![2.0, 1.0, 0.0];
                spec.grid.xi_curves = vec![XI_J0_ZERO];
                spec.grid.maximize_xi = true;
            }
            Scenario::Fig6 => {
                spec.params = open;
                spec.grid.xi_curves = vec![XI_J1_MAX, XI_J0_ZERO];
            }
            Scenario::Fig7 => {
                spec.params = ultra;
                spec.init = coherent;
                spec.grid.nu_panels = vec![0.0, 5.0, 30.0];
                spec.grid.nu_min = 0.0;
                spec.grid.nu_max = 40.0;
                spec.grid.coarse_step = 0.5;
            }
            Scenario::Fig8 => {
                spec.params = ultra;
                spec.grid.nu_panels = vec![0.0, 5.0, 30.0];
            }
            Scenario::Fig9 => {
                spec.params = ultra;
                spec.init = InitialState::Excited;
                spec.grid.nu_panels = vec![0.0, 10.0, 30.0];
            }
            Scenario::Custom => {
                spec.params.xi = 0.0;
            }
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.solver.atol > 0.0 && self.solver.rtol > 0.0) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        if self.solver.n_max < 1 {
            return Err(Error::InvalidParams("n_max must be >= 1".into()));
        }
        if self.grid.samples < 2 {
            return Err(Error::InvalidParams("at least two time samples are needed".into()));
        }
        if self.grid.nu_panels.iter().chain(&self.grid.xi_curves).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("panel values must be finite".into()));
        }
        if self.grid.nu_panels.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParams("panel modulation frequencies must be >= 0".into()));
        }
        if self.scenario.is_flux() && !(self.params.gamma_c > 0.0) {
            return Err(Error::InvalidParams(format!("{} needs gamma_c > 0", self.scenario)));
        }
        Ok(())
    }

    /// t_s = 2π/g, the fidelity reference time.
    pub fn t_s(&self) -> f64 {
        if self.params.g > 0.0 {
            2.0 * PI / self.params.g
        } else {
            100.0
        }
    }

    /// π/|g J_m(ξ)| for the slowest resonance with |m| ≤ 5: one full period
    /// of the |e,1⟩ population at each of those peaks.
    pub fn comb_horizon(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for m in 1..=5 {
            let gc = (self.params.g * bessel_j(m, self.params.xi)?).abs();
            if gc == 0.0 {
                return Err(Error::InvalidParams(format!("J_{m}(xi) vanishes; the comb horizon is unbounded")));
            }
            worst = worst.max(PI / gc);
        }
        Ok(worst)
    }
}

/// First maximum of |J_m(ξ)| over ξ > 0.
pub fn xi_maximizing(m: i32) -> Result<f64> {
    let m = m.abs();
    if m == 0 {
        return Ok(0.0);
    }
    let slope = |x: f64| -> Result<f64> { Ok(0.5 * (bessel_j(m - 1, x)? - bessel_j(m + 1, x)?)) };
    let (mut lo, mut hi) = (0.5 * m as f64, m as f64 + 2.0 * (m as f64).cbrt() + 1.0);
    if slope(lo)? <= 0.0 || slope(hi)? >= 0.0 {
        return Err(Error::Domain(format!("could not bracket the first maximum of J_{m}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
