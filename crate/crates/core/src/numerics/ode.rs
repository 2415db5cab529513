//! Adaptive Dormand–Prince 5(4) integration of complex linear systems,
//! with the Schrödinger and master-equation front ends.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::eigen::eigh;
use super::matrix::{ComplexMatrix, ComplexVector, I, ZERO};
use crate::error::{Error, Result};

/// `dy/dt = f(t, y)` on a flat complex state.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]);
}

/// A time-dependent Hermitian generator applied as `out = H(t) psi`.
pub trait Generator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]);
    /// Largest explicit angular frequency in the time dependence.
    fn max_frequency(&self) -> f64;
}

/// A master-equation right-hand side `out = L(t)[rho]`, with `rho` stored
/// row-major.
pub trait Liouvillian: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, t: f64, rho: &[C64], out: &mut [C64]);
    fn max_frequency(&self) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Upper bound on the step; `None` means unbounded.
    pub max_step: Option<f64>,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { atol: 1e-10, rtol: 1e-8, max_step: None, min_step: 1e-12, max_steps: 50_000_000 }
    }
}

impl OdeOptions {
    pub fn with_tolerances(atol: f64, rtol: f64) -> Self {
        Self { atol, rtol, ..Self::default() }
    }

    /// Caps the step at `(2π/ω_fast)/20` in addition to any existing cap.
    pub fn capped_for_frequency(mut self, omega_fast: f64) -> Self {
        if omega_fast > 0.0 {
            let cap = std::f64::consts::TAU / omega_fast / 20.0;
            self.max_step = Some(self.max_step.map_or(cap, |m| m.min(cap)));
        }
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// What the integrator hands to an observer.
#[derive(Debug)]
pub enum Event<'a> {
    /// The state exactly at `t_grid[index]`.
    Sample { index: usize, t: f64, y: &'a [C64] },
    /// The state after an accepted internal step (only if requested).
    Step { t: f64, y: &'a [C64] },
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller constants
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

struct Workspace {
    k: [Vec<C64>; 7],
    ytmp: Vec<C64>,
    ynew: Vec<C64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self { k: std::array::from_fn(|_| vec![ZERO; n]), ytmp: vec![ZERO; n], ynew: vec![ZERO; n] }
    }
}

fn err_norm(y: &[C64], ynew: &[C64], err: &[C64], opts: &OdeOptions) -> f64 {
    let n = y.len().max(1) as f64;
    let s: f64 = y
        .iter()
        .zip(ynew)
        .zip(err)
        .map(|((a, b), e)| {
            let sk = opts.atol + opts.rtol * a.norm().max(b.norm());
            e.norm_sqr() / (sk * sk)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates from `t0` through every time in `t_grid` (non-decreasing, all
/// `>= t0`), calling `observer` at each grid time and, if `report_steps`, after
/// each accepted step.
pub fn integrate<S, F>(
    sys: &S,
    y0: &[C64],
    t0: f64,
    t_grid: &[f64],
    opts: &OdeOptions,
    report_steps: bool,
    mut observer: F,
) -> Result<OdeStats>
where
    S: OdeSystem + ?Sized,
    F: FnMut(Event<'_>),
{
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::Contract(format!("initial state has length {}, system dimension is {n}", y0.len())));
    }
    if let Some(&first) = t_grid.first() {
        if first < t0 {
            return Err(Error::Contract(format!("first sample time {first} precedes start time {t0}")));
        }
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Contract("sample times must be finite and non-decreasing".into()));
    }

    let mut stats = OdeStats::default();
    let mut ws = Workspace::new(n);
    let mut y = y0.to_vec();
    let mut t = t0;
    let t_end = t_grid.last().copied().unwrap_or(t0);
    let h_max = opts.max_step.unwrap_or(f64::INFINITY).min((t_end - t0).abs().max(f64::MIN_POSITIVE));

    sys.rhs(t, &y, &mut ws.k[0]);
    stats.rhs_evals += 1;

    // initial step from the scaled sizes of y and f(y)
    let mut h = {
        let scale = |v: &[C64]| -> f64 {
            let s: f64 = v
                .iter()
                .zip(&y)
                .map(|(a, yy)| {
                    let sk = opts.atol + opts.rtol * yy.norm();
                    a.norm_sqr() / (sk * sk)
                })
                .sum();
            (s / n.max(1) as f64).sqrt()
        };
        let d0 = scale(&y);
        let d1 = scale(&ws.k[0]);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0.min(h_max)
    };
    let mut err_old: f64 = 1e-4;
    let mut reject = false;

    for (index, &target) in t_grid.iter().enumerate() {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::TooManySteps(opts.max_steps));
            }
            let remaining = target - t;
            let mut step = h.min(h_max);
            let mut hits_target = false;
            if step >= remaining {
                step = remaining;
                hits_target = true;
            } else if step > 0.5 * remaining && remaining < h_max {
                // split the remainder evenly instead of leaving a sliver
                step = 0.5 * remaining;
            }
            if !hits_target && step < opts.min_step {
                return Err(Error::Stiffness { t, step, floor: opts.min_step });
            }

            let Workspace { k, ytmp, ynew } = &mut ws;
            let [k1, k2, k3, k4, k5, k6, k7] = k;

            for i in 0..n {
                ytmp[i] = y[i] + step * (A21 * k1[i]);
            }
            sys.rhs(t + C2 * step, ytmp, k2);
            for i in 0..n {
                ytmp[i] = y[i] + step * (A31 * k1[i] + A32 * k2[i]);
            }
            sys.rhs(t + C3 * step, ytmp, k3);
            for i in 0..n {
                ytmp[i] = y[i] + step * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            sys.rhs(t + C4 * step, ytmp, k4);
            for i in 0..n {
                ytmp[i] = y[i] + step * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            sys.rhs(t + C5 * step, ytmp, k5);
            for i in 0..n {
                ytmp[i] = y[i] + step * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let t_new = if hits_target { target } else { t + step };
            sys.rhs(t_new, ytmp, k6);
            for i in 0..n {
                ynew[i] = y[i] + step * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            sys.rhs(t_new, ynew, k7);
            stats.rhs_evals += 6;
            // error estimate reuses ytmp
            for i in 0..n {
                ytmp[i] = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let err = err_norm(&y, ynew, ytmp, opts);

            if !err.is_finite() {
                stats.rejected += 1;
                h = step * FAC_MIN;
                reject = true;
                continue;
            }

            let fac11 = err.powf(EXPO1);
            if err <= 1.0 {
                let mut fac = fac11 / err_old.powf(BETA);
                fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_next = step / fac;
                if reject {
                    h_next = h_next.min(step);
                }
                err_old = err.max(1e-4);
                reject = false;
                stats.accepted += 1;
                std::mem::swap(&mut y, ynew);
                k1.copy_from_slice(k7);
                t = t_new;
                // a step shortened to land on the grid says nothing about h
                if !hits_target || h_next > h {
                    h = h_next;
                }
                if report_steps {
                    observer(Event::Step { t, y: &y });
                }
            } else {
                let fac = (fac11 / SAFETY).min(1.0 / FAC_MIN);
                h = step / fac;
                reject = true;
                stats.rejected += 1;
            }
        }
        observer(Event::Sample { index, t: target, y: &y });
    }
    Ok(stats)
}

fn check_time_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        None => return Err(Error::Contract("empty time grid".into())),
        Some(&t) if t < 0.0 => return Err(Error::Contract("time grid must start at or after t = 0".into())),
        _ => {}
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Contract("time grid must be strictly increasing".into()));
    }
    Ok(())
}

struct SchrodingerSystem<'a, G: ?Sized>(&'a G);

impl<G: Generator + ?Sized> OdeSystem for SchrodingerSystem<'_, G> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        self.0.apply(t, y, dy);
        for z in dy.iter_mut() {
            *z *= -I;
        }
    }
}

/// Step options for a Schrödinger run: the caller's tolerances plus the
/// frequency-based step cap of the generator.
pub fn schrodinger_options<G: Generator + ?Sized>(gen: &G, opts: &OdeOptions) -> OdeOptions {
    opts.capped_for_frequency(gen.max_frequency())
}

/// Propagates `psi0` under `i dψ/dt = H(t) ψ` from `t = 0`, calling `observer`
/// with every sample (and every accepted step if `report_steps`).
pub fn propagate_schrodinger<G, F>(
    gen: &G,
    psi0: &ComplexVector,
    t_grid: &[f64],
    opts: &OdeOptions,
    report_steps: bool,
    observer: F,
) -> Result<OdeStats>
where
    G: Generator + ?Sized,
    F: FnMut(Event<'_>),
{
    check_time_grid(t_grid)?;
    if psi0.dim() != gen.dim() {
        return Err(Error::Contract(format!("state dimension {} != generator dimension {}", psi0.dim(), gen.dim())));
    }
    if !psi0.is_normalized(1e-9) {
        return Err(Error::Contract(format!("initial state not normalized (|psi|^2 = {})", psi0.norm_sqr())));
    }
    let opts = schrodinger_options(gen, opts);
    integrate(&SchrodingerSystem(gen), psi0, 0.0, t_grid, &opts, report_steps, observer)
}

/// Samples of ψ(t) at each time of `t_grid`.
pub fn integrate_schrodinger<G: Generator + ?Sized>(
    gen: &G,
    psi0: &ComplexVector,
    t_grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<ComplexVector>> {
    let mut out = Vec::with_capacity(t_grid.len());
    propagate_schrodinger(gen, psi0, t_grid, opts, false, |ev| {
        if let Event::Sample { y, .. } = ev {
            out.push(ComplexVector(y.to_vec()));
        }
    })?;
    Ok(out)
}

struct MasterSystem<'a, L: ?Sized>(&'a L);

impl<L: Liouvillian + ?Sized> OdeSystem for MasterSystem<'_, L> {
    fn dim(&self) -> usize {
        let d = self.0.dim();
        d * d
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        self.0.apply(t, y, dy);
    }
}

/// Checks the density-matrix preconditions: Hermitian, unit trace and
/// positive semidefinite, each within `tol`.
pub fn check_density_matrix(rho: &ComplexMatrix, tol: f64) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::Contract("density matrix must be square".into()));
    }
    let herm = rho.hermiticity_defect();
    if herm > tol {
        return Err(Error::Contract(format!("density matrix not Hermitian (defect {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::Contract(format!("density matrix trace is {tr}, expected 1")));
    }
    let min_eig = eigh(rho)?.values[0];
    if min_eig < -tol {
        return Err(Error::Contract(format!("density matrix has negative eigenvalue {min_eig:.3e}")));
    }
    Ok(())
}

/// Propagates a density matrix under a Liouvillian, calling `observer` with
/// row-major `rho` at each sample.
pub fn propagate_master<L, F>(
    liouv: &L,
    rho0: &ComplexMatrix,
    t_grid: &[f64],
    opts: &OdeOptions,
    observer: F,
) -> Result<OdeStats>
where
    L: Liouvillian + ?Sized,
    F: FnMut(Event<'_>),
{
    check_time_grid(t_grid)?;
    if rho0.rows() != liouv.dim() {
        return Err(Error::Contract(format!(
            "density matrix dimension {} != Liouvillian dimension {}",
            rho0.rows(),
            liouv.dim()
        )));
    }
    check_density_matrix(rho0, 1e-10)?;
    let opts = opts.capped_for_frequency(liouv.max_frequency());
    integrate(&MasterSystem(liouv), rho0.as_slice(), 0.0, t_grid, &opts, false, observer)
}

/// Samples of ρ(t) at each time of `t_grid`.
pub fn integrate_master<L: Liouvillian + ?Sized>(
    liouv: &L,
    rho0: &ComplexMatrix,
    t_grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<ComplexMatrix>> {
    let d = liouv.dim();
    let mut out = Vec::with_capacity(t_grid.len());
    propagate_master(liouv, rho0, t_grid, opts, |ev| {
        if let Event::Sample { y, .. } = ev {
            out.push(ComplexMatrix::from_vec(d, d, y.to_vec()));
        }
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay(f64);

    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[C64], dy: &mut [C64]) {
            dy[0] = -self.0 * y[0];
        }
    }

    struct Zero(usize);

    impl Generator for Zero {
        fn dim(&self) -> usize {
            self.0
        }
        fn apply(&self, _t: f64, _psi: &[C64], out: &mut [C64]) {
            out.iter_mut().for_each(|z| *z = ZERO);
        }
        fn max_frequency(&self) -> f64 {
            0.0
        }
    }

    #[test]
    fn exponential_decay_accuracy() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        let mut worst = 0.0f64;
        integrate(&Decay(1.3), &[C64::new(1.0, 0.0)], 0.0, &grid, &OdeOptions::default(), false, |ev| {
            if let Event::Sample { t, y, .. } = ev {
                worst = worst.max((y[0].re - (-1.3 * t).exp()).abs());
            }
        })
        .unwrap();
        assert!(worst < 1e-8, "worst error {worst}");
    }

    #[test]
    fn zero_generator_is_identity() {
        let psi0 = ComplexVector(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let out = integrate_schrodinger(&Zero(2), &psi0, &[0.0, 1.0, 5.0], &OdeOptions::default()).unwrap();
        assert_eq!(out.len(), 3);
        for s in out {
            assert_eq!(s, psi0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let psi = ComplexVector(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let o = OdeOptions::default();
        assert!(matches!(integrate_schrodinger(&Zero(2), &psi, &[0.0, 1.0], &o), Err(Error::Contract(_))));
        let psi = ComplexVector::basis(2, 0);
        assert!(integrate_schrodinger(&Zero(2), &psi, &[0.0, 0.0], &o).is_err());
        assert!(integrate_schrodinger(&Zero(2), &psi, &[-1.0, 0.0], &o).is_err());
        assert!(integrate_schrodinger(&Zero(2), &psi, &[], &o).is_err());
        assert!(integrate_schrodinger(&Zero(3), &psi, &[1.0], &o).is_err());
    }

    #[test]
    fn stiffness_error_on_underflow() {
        let opts = OdeOptions { min_step: 1e-2, atol: 1e-14, rtol: 1e-14, ..OdeOptions::default() };
        let r = integrate(&Decay(500.0), &[C64::new(1.0, 0.0)], 0.0, &[1.0], &opts, false, |_| {});
        assert!(matches!(r, Err(Error::Stiffness { .. })));
    }

    #[test]
    fn frequency_cap() {
        let o = OdeOptions::default().capped_for_frequency(std::f64::consts::TAU);
        assert!((o.max_step.unwrap() - 0.05).abs() < 1e-15);
        let o = OdeOptions::default().capped_for_frequency(0.0);
        assert!(o.max_step.is_none());
    }
}
