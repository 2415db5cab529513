use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the modulated Rabi model. Frequencies and rates are
/// angular and expressed in units of the bare qubit splitting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub omega0: f64,
    pub omegac: f64,
    pub g: f64,
    /// Dimensionless modulation amplitude ξ.
    pub xi: f64,
    /// Modulation frequency ν.
    pub nu: f64,
    pub gamma_a: f64,
    pub gamma_c: f64,
    /// Highest retained photon number.
    pub n_fock: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { omega0: 1.0, omegac: 1.0, g: 0.05, xi: 0.0, nu: 0.0, gamma_a: 0.0, gamma_c: 0.0, n_fock: 15 }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("omega0", self.omega0),
            ("omegac", self.omegac),
            ("g", self.g),
            ("nu", self.nu),
            ("gamma_a", self.gamma_a),
            ("gamma_c", self.gamma_c),
        ];
        for (name, v) in named {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !self.xi.is_finite() || self.xi.abs() > crate::numerics::bessel::MAX_ARG {
            return Err(Error::InvalidParams(format!("xi must be finite with |xi| <= 50, got {}", self.xi)));
        }
        if self.n_fock < 2 {
            return Err(Error::InvalidParams(format!("n_fock must be >= 2, got {}", self.n_fock)));
        }
        if self.dim() > crate::numerics::eigen::MAX_DIM {
            return Err(Error::InvalidParams(format!("n_fock = {} exceeds the supported dimension", self.n_fock)));
        }
        Ok(())
    }

    /// Hilbert-space dimension 2(n_fock + 1).
    pub fn dim(&self) -> usize {
        2 * (self.n_fock + 1)
    }

    /// δ = ω0 − ωc
    pub fn delta(&self) -> f64 {
        self.omega0 - self.omegac
    }

    /// Rotating-sideband detuning δ + nν.
    pub fn rotating_detuning(&self, n: i32) -> f64 {
        self.delta() + n as f64 * self.nu
    }

    /// Counter-rotating detuning Δ_m = ω0 + ωc + mν.
    pub fn cr_detuning(&self, m: i32) -> f64 {
        self.omega0 + self.omegac + m as f64 * self.nu
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_fock(mut self, n_fock: usize) -> Self {
        self.n_fock = n_fock;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_detunings() {
        let p = ModelParams { omega0: 1.0, omegac: 0.8, nu: 0.5, ..ModelParams::default() };
        assert!((p.delta() - 0.2).abs() < 1e-15);
        assert!((p.cr_detuning(-3) - 0.3).abs() < 1e-15);
        assert!((p.rotating_detuning(2) - 1.2).abs() < 1e-15);
        assert_eq!(p.dim(), 32);
    }

    #[test]
    fn validation() {
        assert!(ModelParams::default().validate().is_ok());
        assert!(ModelParams { g: -0.1, ..ModelParams::default() }.validate().is_err());
        assert!(ModelParams { n_fock: 1, ..ModelParams::default() }.validate().is_err());
        assert!(ModelParams { nu: f64::NAN, ..ModelParams::default() }.validate().is_err());
        assert!(ModelParams { xi: 60.0, ..ModelParams::default() }.validate().is_err());
        assert!(ModelParams { n_fock: 300, ..ModelParams::default() }.validate().is_err());
    }
}
