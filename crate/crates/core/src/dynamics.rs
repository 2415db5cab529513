//! Closed-system experiments: fidelity of the effective Hamiltonians,
//! basis-state populations, the analytic anti-JC oscillation and the
//! sideband-resonance sweep of the maximal |e,1⟩ population.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::par_map;
use crate::model::{
    enhanced_warnings, resonant_cr_order, suppressed_warnings, BasisLabel, EnhancedCouplings, ModelParams,
    ModulatedHamiltonian,
};
use crate::numerics::bessel::bessel_j;
use crate::numerics::matrix::ComplexVector;
use crate::numerics::ode::{propagate_schrodinger, Event, Generator};
use crate::series::{SweepResult, TimeSeries};
use crate::settings::SolverSettings;

pub const TIME_UNIT: &str = "1/omega0";
/// Probability shift at n_fock + 5 above which a run is reported unconverged.
pub const PROBABILITY_CONVERGENCE_TOL: f64 = 1e-3;
const NORM_DRIFT_PER_STEP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InitialState {
    /// |g,0⟩
    Ground,
    /// |e,0⟩
    Excited,
    /// (|g⟩ + |e⟩)|α⟩/√2
    SuperpositionCoherent {
        alpha_re: f64,
        alpha_im: f64,
    },
    Basis {
        label: BasisLabel,
    },
}

impl InitialState {
    pub fn superposition_coherent(alpha: C64) -> Self {
        Self::SuperpositionCoherent { alpha_re: alpha.re, alpha_im: alpha.im }
    }

    pub fn state(&self, n_fock: usize) -> Result<ComplexVector> {
        let dim = 2 * (n_fock + 1);
        match *self {
            Self::Ground => Ok(ComplexVector::basis(dim, BasisLabel::g(0).index(n_fock))),
            Self::Excited => Ok(ComplexVector::basis(dim, BasisLabel::e(0).index(n_fock))),
            Self::Basis { label } => {
                label.check(n_fock)?;
                Ok(ComplexVector::basis(dim, label.index(n_fock)))
            }
            Self::SuperpositionCoherent { alpha_re, alpha_im } => {
                let fock = coherent_amplitudes(C64::new(alpha_re, alpha_im), n_fock);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let mut v = ComplexVector::zeros(dim);
                for (n, &c) in fock.iter().enumerate() {
                    v[BasisLabel::g(n).index(n_fock)] = c * s;
                    v[BasisLabel::e(n).index(n_fock)] = c * s;
                }
                Ok(v)
            }
        }
    }
}

/// Coherent-state amplitudes on photon numbers `0..=n_fock`, renormalized
/// after truncation.
pub fn coherent_amplitudes(alpha: C64, n_fock: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(n_fock + 1);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..=n_fock {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amps.iter().map(|z| z / norm).collect()
}

/// Probability weight a coherent state loses to the Fock cutoff.
pub fn coherent_truncation_error(alpha: C64, n_fock: usize) -> f64 {
    let mut c = (-alpha.norm_sqr()).exp();
    let mut kept = 0.0;
    for n in 0..=n_fock {
        if n > 0 {
            c *= alpha.norm_sqr() / n as f64;
        }
        kept += c;
    }
    (1.0 - kept).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianChoice {
    /// Full rotating-frame sideband sum.
    Exact,
    EffectiveEnhanced,
    EffectiveSuppressed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectiveModel {
    Enhanced,
    Suppressed,
}

impl From<EffectiveModel> for HamiltonianChoice {
    fn from(e: EffectiveModel) -> Self {
        match e {
            EffectiveModel::Enhanced => HamiltonianChoice::EffectiveEnhanced,
            EffectiveModel::Suppressed => HamiltonianChoice::EffectiveSuppressed,
        }
    }
}

pub fn generator(p: &ModelParams, choice: HamiltonianChoice, s: &SolverSettings) -> Result<ModulatedHamiltonian> {
    match choice {
        HamiltonianChoice::Exact => ModulatedHamiltonian::rotating_frame(p, s.n_max),
        HamiltonianChoice::EffectiveEnhanced => ModulatedHamiltonian::enhanced(p),
        HamiltonianChoice::EffectiveSuppressed => ModulatedHamiltonian::suppressed(p),
    }
}

fn rwa_notices(p: &ModelParams, choice: HamiltonianChoice, s: &SolverSettings) -> Result<Vec<String>> {
    let w = match choice {
        HamiltonianChoice::Exact => Vec::new(),
        HamiltonianChoice::EffectiveEnhanced => enhanced_warnings(p, s.rwa_factor)?,
        HamiltonianChoice::EffectiveSuppressed => suppressed_warnings(p),
    };
    for msg in &w {
        log::warn!("{msg}");
    }
    Ok(w)
}

/// States sampled on `t_grid`, plus a warning if the norm drifted beyond
/// 1e-8 per accepted step.
pub fn evolve(
    gen: &dyn Generator,
    psi0: &ComplexVector,
    t_grid: &[f64],
    s: &SolverSettings,
) -> Result<(Vec<ComplexVector>, Option<String>)> {
    let mut states = Vec::with_capacity(t_grid.len());
    let stats = propagate_schrodinger(gen, psi0, t_grid, &s.ode(), false, |ev| {
        if let Event::Sample { y, .. } = ev {
            states.push(ComplexVector(y.to_vec()));
        }
    })?;
    let drift = states.iter().map(|v| (v.norm_sqr() - 1.0).abs()).fold(0.0, f64::max);
    let bound = NORM_DRIFT_PER_STEP * (stats.accepted.max(1) as f64);
    let warning = (drift > bound).then(|| format!("norm drift {drift:.3e} exceeds {bound:.3e}"));
    Ok((states, warning))
}

fn fidelity_core(
    p: &ModelParams,
    init: &InitialState,
    effective: EffectiveModel,
    t_grid: &[f64],
    s: &SolverSettings,
) -> Result<TimeSeries> {
    p.validate()?;
    let psi0 = init.state(p.n_fock)?;
    let exact = generator(p, HamiltonianChoice::Exact, s)?;
    let approx = generator(p, effective.into(), s)?;
    let (phi, w1) = evolve(&exact, &psi0, t_grid, s)?;
    let (psi, w2) = evolve(&approx, &psi0, t_grid, s)?;
    let f: Vec<f64> = phi.iter().zip(&psi).map(|(a, b)| a.inner(b).norm_sqr().min(1.0)).collect();
    let mut ts = TimeSeries::new(TIME_UNIT, t_grid.to_vec());
    ts.push("F", f);
    ts.warnings.extend(w1.into_iter().chain(w2));
    ts.warnings.extend(rwa_notices(p, effective.into(), s)?);
    Ok(ts)
}

fn attach_convergence<F>(mut ts: TimeSeries, p: &ModelParams, s: &SolverSettings, rerun: F) -> Result<TimeSeries>
where
    F: Fn(&ModelParams) -> Result<TimeSeries>,
{
    if s.check_convergence {
        let bigger = rerun(&p.with_fock(p.n_fock + 5))?;
        let dev = ts.max_deviation(&bigger);
        if dev > PROBABILITY_CONVERGENCE_TOL {
            ts.warnings.push(format!(
                "Fock cutoff not converged: observables shift by {dev:.3e} at n_fock = {}",
                p.n_fock + 5
            ));
        }
    }
    Ok(ts)
}

/// F(t) = |⟨φ(t)|ψ(t)⟩|² between the exact rotating-frame evolution φ and the
/// evolution ψ under the chosen effective Hamiltonian.
pub fn fidelity_trace(
    p: &ModelParams,
    init: &InitialState,
    effective: EffectiveModel,
    t_grid: &[f64],
    s: &SolverSettings,
) -> Result<TimeSeries> {
    let ts = fidelity_core(p, init, effective, t_grid, s)?;
    attach_convergence(ts, p, s, |q| fidelity_core(q, init, effective, t_grid, s))
}

fn populations_core(
    p: &ModelParams,
    choice: HamiltonianChoice,
    init: &InitialState,
    projectors: &[BasisLabel],
    t_grid: &[f64],
    s: &SolverSettings,
) -> Result<TimeSeries> {
    p.validate()?;
    for l in projectors {
        l.check(p.n_fock)?;
    }
    let psi0 = init.state(p.n_fock)?;
    let gen = generator(p, choice, s)?;
    let (states, warn) = evolve(&gen, &psi0, t_grid, s)?;
    let mut ts = TimeSeries::new(TIME_UNIT, t_grid.to_vec());
    for l in projectors {
        let k = l.index(p.n_fock);
        ts.push(format!("P_{l}"), states.iter().map(|v| v[k].norm_sqr()).collect());
    }
    ts.warnings.extend(warn);
    ts.warnings.extend(rwa_notices(p, choice, s)?);
    Ok(ts)
}

/// Channels `P_<label>(t) = |⟨label|ψ(t)⟩|²`.
pub fn populations(
    p: &ModelParams,
    choice: HamiltonianChoice,
    init: &InitialState,
    projectors: &[BasisLabel],
    t_grid: &[f64],
    s: &SolverSettings,
) -> Result<TimeSeries> {
    let ts = populations_core(p, choice, init, projectors, t_grid, s)?;
    attach_convergence(ts, p, s, |q| populations_core(q, choice, init, projectors, t_grid, s))
}

/// Closed-form anti-JC oscillation from |g,0⟩:
/// P_g0 = A cos²(Ωt/2), P_e1 = A sin²(Ωt/2) with Ω = √(4g_c² + Δ²) and
/// A = 4g_c²/Ω².
pub fn ajc_analytic(p: &ModelParams, t_grid: &[f64]) -> Result<TimeSeries> {
    let c = EnhancedCouplings::new(p)?;
    let omega2 = 4.0 * c.g_c * c.g_c + c.delta_m0 * c.delta_m0;
    let (amp, omega) = if omega2 > 0.0 { (4.0 * c.g_c * c.g_c / omega2, omega2.sqrt()) } else { (0.0, 0.0) };
    let mut ts = TimeSeries::new(TIME_UNIT, t_grid.to_vec());
    ts.push("P_g0", t_grid.iter().map(|&t| amp * (0.5 * omega * t).cos().powi(2)).collect());
    ts.push("P_e1", t_grid.iter().map(|&t| amp * (0.5 * omega * t).sin().powi(2)).collect());
    Ok(ts)
}

/// Resonant JC exchange from |e,0⟩ under the suppressed effective model at
/// δ = 0: P_e0 = cos²(g_r t), P_g1 = sin²(g_r t).
pub fn jc_analytic(p: &ModelParams, t_grid: &[f64]) -> Result<TimeSeries> {
    let g_r = crate::model::suppressed_coupling(p)?;
    let mut ts = TimeSeries::new(TIME_UNIT, t_grid.to_vec());
    ts.push("P_e0", t_grid.iter().map(|&t| (g_r * t).cos().powi(2)).collect());
    ts.push("P_g1", t_grid.iter().map(|&t| (g_r * t).sin().powi(2)).collect());
    if p.delta() != 0.0 {
        ts.warnings.push("jc_analytic assumes delta = 0".into());
    }
    Ok(ts)
}

/// Smallest horizon that lets every grid point's resonant sideband complete
/// a full Rabi period π/|g J_{m0}(ξ)|.
pub fn required_horizon(p: &ModelParams, nu_grid: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &nu in nu_grid.iter().filter(|&&nu| nu > 0.0) {
        let q = p.with_nu(nu);
        let m0 = resonant_cr_order(&q)?;
        let gc = (p.g * bessel_j(m0, p.xi)?).abs();
        worst = worst.max(if gc > 0.0 { PI / gc } else { f64::INFINITY });
    }
    Ok(worst)
}

/// Maximum over t ∈ [0, t_max] of P_e1 for the exact dynamics from |g,0⟩.
/// Every accepted integrator step is sampled, and steps are capped at 1/400
/// of the local Rabi period.
pub fn pmax_point(p: &ModelParams, t_max: f64, s: &SolverSettings) -> Result<f64> {
    let gen = ModulatedHamiltonian::rotating_frame(p, s.n_max)?;
    let psi0 = InitialState::Ground.state(p.n_fock)?;
    let e1 = BasisLabel::e(1).index(p.n_fock);
    let mut opts = s.ode();
    if let Ok(c) = EnhancedCouplings::new(p) {
        let omega = (4.0 * c.g_c * c.g_c + c.delta_m0 * c.delta_m0).sqrt().max(2.0 * c.g_c.abs());
        if omega > 0.0 {
            opts.max_step = Some(2.0 * PI / omega / 400.0);
        }
    }
    let mut best: f64 = 0.0;
    propagate_schrodinger(&gen, &psi0, &[t_max], &opts, true, |ev| {
        let y = match ev {
            Event::Sample { y, .. } | Event::Step { y, .. } => y,
        };
        best = best.max(y[e1].norm_sqr());
    })?;
    Ok(best)
}

/// P_e1^max over a grid of modulation frequencies. Zero frequencies are
/// skipped with a notice.
pub fn pmax_sweep(p: &ModelParams, nu_grid: &[f64], t_max: f64, s: &SolverSettings) -> Result<SweepResult> {
    p.validate()?;
    if !(t_max > 0.0) {
        return Err(Error::InvalidParams(format!("horizon must be positive, got {t_max}")));
    }
    let mut result = SweepResult::new("nu_over_omega0");
    let kept: Vec<f64> = nu_grid.iter().copied().filter(|&nu| nu > 0.0).collect();
    for &nu in nu_grid.iter().filter(|&&nu| nu <= 0.0) {
        result.flags.push(format!("skipped nu = {nu}: no resonant sideband without modulation"));
    }
    let needed = required_horizon(p, &kept)?;
    if t_max < needed {
        result.flags.push(format!(
            "horizon {t_max:.6} is shorter than the slowest resonant Rabi period {needed:.6}; \
             the narrowest resonances may not reach their maximum"
        ));
    }
    let values = par_map(&kept, s.jobs(), |&nu| pmax_point(&p.with_nu(nu), t_max, s));
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    result.axis = kept.iter().map(|nu| nu / p.omega0).collect();
    result.push_column("pmax", values);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::linspace_step;

    fn settings() -> SolverSettings {
        SolverSettings::default()
    }

    #[test]
    fn coherent_state_is_normalized_and_small_tail() {
        let alpha = C64::new(0.1, 0.0);
        let v = InitialState::superposition_coherent(alpha).state(15).unwrap();
        assert!(v.is_normalized(1e-14));
        assert!(coherent_truncation_error(alpha, 15) < 1e-12);
        assert!(coherent_truncation_error(C64::new(3.0, 0.0), 2) > 0.5);
        let amps = coherent_amplitudes(alpha, 15);
        assert!((amps[1] / amps[0] - alpha).norm() < 1e-15);
    }

    #[test]
    fn basis_initial_states() {
        let v = InitialState::Excited.state(3).unwrap();
        assert_eq!(v[BasisLabel::e(0).index(3)].re, 1.0);
        assert!(InitialState::Basis { label: BasisLabel::g(9) }.state(3).is_err());
    }

    #[test]
    fn zero_coupling_gives_unit_fidelity() {
        let p = ModelParams { g: 0.0, xi: 2.40483, nu: 1.0, n_fock: 4, ..ModelParams::default() };
        let t = linspace_step(0.0, 20.0, 2.0);
        let init = InitialState::superposition_coherent(C64::new(0.1, 0.0));
        let f = fidelity_trace(&p, &init, EffectiveModel::Enhanced, &t, &settings()).unwrap();
        assert!(f.channel("F").unwrap().iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn resonant_jc_from_excited_state() {
        let p = ModelParams { g: 0.5, xi: 2.21868, nu: 30.0, n_fock: 6, ..ModelParams::default() };
        let t = linspace_step(0.0, 4.0 * PI, 0.1);
        let pops = populations(
            &p,
            HamiltonianChoice::EffectiveSuppressed,
            &InitialState::Excited,
            &[BasisLabel::e(0), BasisLabel::g(1)],
            &t,
            &settings(),
        )
        .unwrap();
        let exact = jc_analytic(&p, &t).unwrap();
        assert!(pops.max_deviation(&exact) < 1e-7, "{}", pops.max_deviation(&exact));
        assert!(pops.warnings.is_empty());
    }

    #[test]
    fn analytic_limits() {
        let p = ModelParams { xi: 2.40483, nu: 2.0, ..ModelParams::default() };
        let c = EnhancedCouplings::new(&p).unwrap();
        let t_half = PI / (2.0 * c.g_c.abs());
        let a = ajc_analytic(&p, &[0.0, t_half]).unwrap();
        assert!((a.channel("P_e1").unwrap()[1] - 1.0).abs() < 1e-12);
        assert!((a.channel("P_g0").unwrap()[0] - 1.0).abs() < 1e-12);

        // |Δ_{m0}| = 2|g_c| halves the maximum
        let gc = c.g_c.abs();
        let nu = (2.0 - 2.0 * gc) / 1.0;
        let q = p.with_nu(nu);
        let cq = EnhancedCouplings::new(&q).unwrap();
        assert_eq!(cq.m0, -1);
        let omega = (4.0 * cq.g_c.powi(2) + cq.delta_m0.powi(2)).sqrt();
        let a = ajc_analytic(&q, &[PI / omega]).unwrap();
        let expect = 4.0 * cq.g_c.powi(2) / (4.0 * cq.g_c.powi(2) + 4.0 * gc * gc);
        assert!((a.channel("P_e1").unwrap()[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn sweep_skips_zero_frequency() {
        let p = ModelParams { xi: 2.40483, n_fock: 3, ..ModelParams::default() };
        let s = SolverSettings { jobs: Some(1), ..settings() };
        let r = pmax_sweep(&p, &[0.0, 2.0], 50.0, &s).unwrap();
        assert_eq!(r.axis, vec![2.0]);
        assert!(r.flags.iter().any(|f| f.contains("skipped nu = 0")));
        assert!(r.flags.iter().any(|f| f.contains("horizon")));
        assert!(pmax_sweep(&p, &[2.0], -1.0, &s).is_err());
    }
}
