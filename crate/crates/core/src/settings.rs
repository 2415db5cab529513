use serde::{Deserialize, Serialize};

use crate::exec::Jobs;
use crate::model::DEFAULT_N_MAX;
use crate::numerics::OdeOptions;

/// Numerical settings shared by the closed- and open-system pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Sideband cutoff for the exact rotating-frame Hamiltonian.
    pub n_max: usize,
    pub atol: f64,
    pub rtol: f64,
    /// Rerun at `n_fock + 5` and attach a warning when observables move by
    /// more than the convergence tolerance.
    pub check_convergence: bool,
    /// Factor in the enhanced-regime conditions ν > factor·g, ν > factor·|Δ_{m0}|.
    pub rwa_factor: f64,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { n_max: DEFAULT_N_MAX, atol: 1e-10, rtol: 1e-8, check_convergence: false, rwa_factor: 10.0, jobs: None }
    }
}

impl SolverSettings {
    pub fn ode(&self) -> OdeOptions {
        OdeOptions::with_tolerances(self.atol, self.rtol)
    }

    pub fn jobs(&self) -> Jobs {
        self.jobs.map_or(Jobs::ALL, Jobs)
    }
}
