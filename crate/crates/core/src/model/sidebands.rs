//! Jacobi–Anger decomposition of the rotating-frame coupling.

use serde::{Deserialize, Serialize};

use super::ModelParams;
use crate::error::{Error, Result};
use crate::numerics::bessel::{bessel_j, bessel_j_symmetric};

pub const DEFAULT_N_MAX: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SidebandKind {
    /// σ+a e^{i(δ+nν)t} + H.c.
    Rotating,
    /// σ+a† e^{iΔ_m t} + H.c.
    CounterRotating,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandTerm {
    pub order: i32,
    pub kind: SidebandKind,
    /// g J_order(ξ)
    pub coupling: f64,
    pub detuning: f64,
}

/// All `2(2 n_max + 1)` sideband terms, sorted by |detuning| (ties keep
/// rotating before counter-rotating, then ascending order).
pub fn sidebands(p: &ModelParams, n_max: usize) -> Result<Vec<SidebandTerm>> {
    if n_max < 1 {
        return Err(Error::InvalidParams("sideband cutoff n_max must be >= 1".into()));
    }
    let j = bessel_j_symmetric(n_max, p.xi)?;
    let nm = n_max as i32;
    let mut terms = Vec::with_capacity(2 * (2 * n_max + 1));
    for (kind, detune) in [
        (SidebandKind::Rotating, &(|n| p.rotating_detuning(n)) as &dyn Fn(i32) -> f64),
        (SidebandKind::CounterRotating, &|m| p.cr_detuning(m)),
    ] {
        for order in -nm..=nm {
            terms.push(SidebandTerm { order, kind, coupling: p.g * j[(order + nm) as usize], detuning: detune(order) });
        }
    }
    terms.sort_by(|a, b| a.detuning.abs().total_cmp(&b.detuning.abs()));
    Ok(terms)
}

/// m0 = Round[−(ω0 + ωc)/ν], halves rounded away from zero.
pub fn resonant_cr_order(p: &ModelParams) -> Result<i32> {
    if p.nu == 0.0 {
        return Err(Error::UndefinedOrder);
    }
    if !(p.nu > 0.0) {
        return Err(Error::InvalidParams(format!("modulation frequency must be positive, got {}", p.nu)));
    }
    let x = -(p.omega0 + p.omegac) / p.nu;
    if x.abs() > i32::MAX as f64 {
        return Err(Error::InvalidParams(format!("resonant order {x} does not fit an integer")));
    }
    Ok(x.round() as i32)
}

/// Effective couplings of the enhanced-regime Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnhancedCouplings {
    pub m0: i32,
    /// g J_0(ξ)
    pub g_r: f64,
    /// g J_{m0}(ξ)
    pub g_c: f64,
    /// Δ_{m0}
    pub delta_m0: f64,
}

impl EnhancedCouplings {
    pub fn new(p: &ModelParams) -> Result<Self> {
        let m0 = resonant_cr_order(p)?;
        Ok(Self { m0, g_r: p.g * bessel_j(0, p.xi)?, g_c: p.g * bessel_j(m0, p.xi)?, delta_m0: p.cr_detuning(m0) })
    }

    /// (ω̃c, ω̃0) = ((Δ_{m0} − δ)/2, (Δ_{m0} + δ)/2), the frequencies of the
    /// equivalent anisotropic Rabi model. Informational only.
    pub fn effective_frequencies(&self, p: &ModelParams) -> (f64, f64) {
        ((self.delta_m0 - p.delta()) / 2.0, (self.delta_m0 + p.delta()) / 2.0)
    }
}

/// g_r = g J_0(ξ) for the suppressed regime.
pub fn suppressed_coupling(p: &ModelParams) -> Result<f64> {
    Ok(p.g * bessel_j(0, p.xi)?)
}

/// Parameter conditions under which the enhanced effective Hamiltonian is
/// trustworthy: ν > `factor`·g and ν > `factor`·|Δ_{m0}|. Returns one message
/// per violated condition.
pub fn enhanced_warnings(p: &ModelParams, factor: f64) -> Result<Vec<String>> {
    let c = EnhancedCouplings::new(p)?;
    let mut out = Vec::new();
    if p.nu <= factor * p.g {
        out.push(format!("nu = {} is not >> g = {} (factor {factor})", p.nu, p.g));
    }
    if p.nu <= factor * c.delta_m0.abs() {
        out.push(format!("nu = {} is not >> |Delta_m0| = {} (factor {factor})", p.nu, c.delta_m0.abs()));
    }
    Ok(out)
}

/// Condition ν > ω0 + ωc for the suppressed effective Hamiltonian.
pub fn suppressed_warnings(p: &ModelParams) -> Vec<String> {
    if p.nu > p.omega0 + p.omegac {
        Vec::new()
    } else {
        vec![format!("nu = {} does not exceed omega0 + omegac = {}", p.nu, p.omega0 + p.omegac)]
    }
}
