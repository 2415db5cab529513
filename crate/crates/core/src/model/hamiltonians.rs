//! Dense Hamiltonians of the modulated Rabi model.

use num_complex::Complex64 as C64;

use super::sidebands::{suppressed_coupling, EnhancedCouplings};
use super::{ModelParams, OperatorSet};
use crate::error::{Error, Result};
use crate::numerics::bessel::bessel_j_symmetric;
use crate::numerics::matrix::ComplexMatrix;

fn ops(p: &ModelParams) -> Result<OperatorSet> {
    super::build_operators(p)
}

/// H_JC = ωc a†a + (ω0/2)σz + g(σ+a + a†σ−)
pub fn h_jc(p: &ModelParams) -> Result<ComplexMatrix> {
    let o = ops(p)?;
    let free = &o.number().scale_real(p.omegac) + &o.sigma_z.scale_real(p.omega0 / 2.0);
    let coupling = &o.sigma_plus.matmul(&o.a) + &o.a_dag.matmul(&o.sigma_minus);
    Ok(&free + &coupling.scale_real(p.g))
}

/// H_CR = g(σ−a + a†σ+)
pub fn h_cr(p: &ModelParams) -> Result<ComplexMatrix> {
    let o = ops(p)?;
    let coupling = &o.sigma_minus.matmul(&o.a) + &o.a_dag.matmul(&o.sigma_plus);
    Ok(coupling.scale_real(p.g))
}

/// H_R = H_JC + H_CR
pub fn h_rabi(p: &ModelParams) -> Result<ComplexMatrix> {
    Ok(&h_jc(p)? + &h_cr(p)?)
}

/// H(t) = H_R + (ξν/2) cos(νt) σz
pub fn h_lab_frame(p: &ModelParams, t: f64) -> Result<ComplexMatrix> {
    let o = ops(p)?;
    let drive = 0.5 * p.xi * p.nu * (p.nu * t).cos();
    Ok(&h_rabi(p)? + &o.sigma_z.scale_real(drive))
}

fn phase(freq: f64, t: f64) -> C64 {
    C64::from_polar(1.0, freq * t)
}

/// A σ+a e^{iθ_r} + B σ+a† e^{iθ_c} + H.c. for complex prefactors.
fn coupling_pair(o: &OperatorSet, rot: C64, cr: C64) -> ComplexMatrix {
    let sp_a = o.sigma_plus.matmul(&o.a);
    let sp_ad = o.sigma_plus.matmul(&o.a_dag);
    let half = &sp_a.scale(rot) + &sp_ad.scale(cr);
    &half + &half.adjoint()
}

/// Rotating-frame Hamiltonian as a sideband sum truncated at |n|, |m| ≤ n_max.
pub fn h_rotating_frame(p: &ModelParams, t: f64, n_max: usize) -> Result<ComplexMatrix> {
    if n_max < 1 {
        return Err(Error::InvalidParams("sideband cutoff n_max must be >= 1".into()));
    }
    let o = ops(p)?;
    let j = bessel_j_symmetric(n_max, p.xi)?;
    let nm = n_max as i32;
    let mut rot = C64::new(0.0, 0.0);
    let mut cr = C64::new(0.0, 0.0);
    for n in -nm..=nm {
        let jn = j[(n + nm) as usize];
        rot += jn * phase(p.rotating_detuning(n), t);
        cr += jn * phase(p.cr_detuning(n), t);
    }
    Ok(coupling_pair(&o, rot * p.g, cr * p.g))
}

/// Enhanced-regime effective Hamiltonian keeping the zeroth rotating sideband
/// and the resonant counter-rotating sideband m0.
pub fn h_eff_enhanced(p: &ModelParams, t: f64) -> Result<ComplexMatrix> {
    let c = EnhancedCouplings::new(p)?;
    let o = ops(p)?;
    Ok(coupling_pair(&o, c.g_r * phase(p.delta(), t), c.g_c * phase(c.delta_m0, t)))
}

/// Suppressed-regime effective Hamiltonian: a JC coupling of strength g J_0(ξ).
pub fn h_eff_suppressed(p: &ModelParams, t: f64) -> Result<ComplexMatrix> {
    let g_r = suppressed_coupling(p)?;
    let o = ops(p)?;
    Ok(coupling_pair(&o, g_r * phase(p.delta(), t), C64::new(0.0, 0.0)))
}
