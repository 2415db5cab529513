//! Quantum Rabi model with a sinusoidally modulated qubit frequency.
//!
//! The modulation splits the qubit transition into Bessel-weighted sidebands,
//! which lets counter-rotating couplings be brought onto resonance (weak
//! coupling) or pushed far off resonance (ultrastrong coupling). The crate
//! covers the closed dynamics of both regimes, dressed-basis dissipation with
//! cavity photon output, and a harness that writes deterministic CSV/JSON
//! records for each experiment.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod opensys;
pub mod series;
pub mod settings;

pub use error::{Error, Result};
pub use exec::Jobs;
pub use model::ModelParams;
pub use num_complex::Complex64 as C64;
pub use settings::SolverSettings;
