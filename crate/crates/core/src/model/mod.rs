//! Hamiltonians and operators of the frequency-modulated Rabi model on a
//! truncated qubit ⊗ Fock space, and the Jacobi–Anger sideband picture.

pub mod generators;
pub mod hamiltonians;
pub mod operators;
pub mod params;
pub mod sidebands;

pub use generators::{HarmonicSeries, ModulatedHamiltonian};
pub use hamiltonians::{h_cr, h_eff_enhanced, h_eff_suppressed, h_jc, h_lab_frame, h_rabi, h_rotating_frame};
pub use operators::{build_operators, BasisLabel, OperatorSet};
pub use params::ModelParams;
pub use sidebands::{
    enhanced_warnings, resonant_cr_order, sidebands, suppressed_coupling, suppressed_warnings, EnhancedCouplings,
    SidebandKind, SidebandTerm, DEFAULT_N_MAX,
};
