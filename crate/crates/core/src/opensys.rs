//! Zero-temperature dissipation in the dressed basis of the Rabi Hamiltonian
//! and the cavity output photon flux.
//!
//! The density matrix is propagated as ρ̃ = U†ρU, where the columns of U are
//! the eigenvectors of H_R. In that basis H_R is diagonal, the modulation
//! enters through the dressed σz, and every jump operator |ε_j⟩⟨ε_k| is a
//! single matrix unit, so the dissipator costs O(d²).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::par_map;
use crate::model::{h_rabi, BasisLabel, ModelParams, OperatorSet};
use crate::numerics::eigen::{eigh, EigenDecomposition};
use crate::numerics::matrix::{ComplexMatrix, I, ZERO};
use crate::numerics::ode::{propagate_master, Event, Liouvillian};
use crate::series::SweepResult;
use crate::settings::SolverSettings;

/// Fraction of the spectrum, counted from the bottom, whose transitions enter
/// the dissipator.
pub const DEFAULT_KEEP_FRACTION: f64 = 0.7;
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Relative change of the windowed mean between the last two windows above
/// which a steady value is flagged.
pub const DRIFT_TOL: f64 = 0.05;

/// Eigenbasis of H_R with the transition elements of σx and a + a†.
#[derive(Clone, Debug)]
pub struct DressedBasis {
    pub eigen: EigenDecomposition,
    /// ⟨ε_j|σx|ε_k⟩
    pub c_a: ComplexMatrix,
    /// ⟨ε_j|(a + a†)|ε_k⟩
    pub c_c: ComplexMatrix,
    /// Σ_{k>j} C^(c)_{jk} |ε_j⟩⟨ε_k| over retained pairs, in the dressed basis.
    pub x_c: ComplexMatrix,
    /// Eigenstates `0..n_keep` take part in dissipation.
    pub n_keep: usize,
    /// Parity eigenvalue (±1) of each eigenstate.
    pub parity: Vec<i8>,
}

impl DressedBasis {
    pub fn dim(&self) -> usize {
        self.eigen.dim()
    }

    pub fn energies(&self) -> &[f64] {
        &self.eigen.values
    }

    /// Whether the pair (j, k) with j < k enters the dissipator.
    pub fn retained(&self, j: usize, k: usize) -> bool {
        j < k && k < self.n_keep && self.eigen.values[k] - self.eigen.values[j] >= DEGENERACY_TOL
    }

    /// U† A U
    pub fn to_dressed(&self, bare: &ComplexMatrix) -> ComplexMatrix {
        bare.similarity_adj(&self.eigen.vectors)
    }

    /// U Ã U†
    pub fn to_bare(&self, dressed: &ComplexMatrix) -> ComplexMatrix {
        let u = &self.eigen.vectors;
        u.matmul(&dressed.matmul(&u.adjoint()))
    }

    /// X̃_c†X̃_c, whose expectation times γ_c is the output flux.
    pub fn flux_operator(&self) -> ComplexMatrix {
        self.x_c.adjoint().matmul(&self.x_c)
    }
}

/// Number of eigenstates kept when the top `1 − keep_fraction` are discarded.
pub fn default_keep(dim: usize, keep_fraction: f64) -> usize {
    ((dim as f64 * keep_fraction).round() as usize).clamp(1, dim)
}

/// Diagonalizes H_R within each parity sector, so that every eigenvector has
/// a definite parity, and fixes the phase of each eigenvector to make its
/// largest component real and positive.
pub fn dressed_basis(p: &ModelParams, n_keep: usize) -> Result<DressedBasis> {
    p.validate()?;
    let dim = p.dim();
    if n_keep == 0 || n_keep > dim {
        return Err(Error::InvalidParams(format!("n_keep = {n_keep} outside 1..={dim}")));
    }
    let h = h_rabi(p)?;
    let ops = OperatorSet::new(p.n_fock);
    let pi = ops.parity();

    let mut pairs: Vec<(f64, i8, Vec<C64>)> = Vec::with_capacity(dim);
    for sector in [1.0, -1.0] {
        let idx: Vec<usize> = (0..dim).filter(|&k| pi[(k, k)].re == sector).collect();
        let block = ComplexMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])]);
        let e = eigh(&block)?;
        for k in 0..idx.len() {
            let mut v = vec![ZERO; dim];
            for (i, &row) in idx.iter().enumerate() {
                v[row] = e.vectors[(i, k)];
            }
            pairs.push((e.values[k], sector as i8, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let values: Vec<f64> = pairs.iter().map(|x| x.0).collect();
    let parity: Vec<i8> = pairs.iter().map(|x| x.1).collect();
    let mut vectors = ComplexMatrix::zeros(dim, dim);
    for (k, (_, _, v)) in pairs.iter().enumerate() {
        let big = v.iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())).unwrap_or(ZERO);
        let phase = if big.norm() > 0.0 { big.conj() / big.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            vectors[(i, k)] = v[i] * phase;
        }
    }
    let eigen = EigenDecomposition { values, vectors };

    let clean = |m: ComplexMatrix| {
        let mut m = m;
        for j in 0..dim {
            for k in 0..dim {
                let z = m[(j, k)];
                m[(j, k)] = if parity[j] == parity[k] { ZERO } else { C64::new(z.re, 0.0) };
            }
        }
        m
    };
    let c_a = clean(ops.sigma_x.similarity_adj(&eigen.vectors));
    let c_c = clean(ops.quadrature().similarity_adj(&eigen.vectors));

    let mut basis = DressedBasis { eigen, c_a, c_c, x_c: ComplexMatrix::zeros(dim, dim), n_keep, parity };
    for j in 0..dim {
        for k in (j + 1)..dim {
            if basis.retained(j, k) {
                basis.x_c[(j, k)] = basis.c_c[(j, k)];
            }
        }
    }
    Ok(basis)
}

/// Master equation dρ̃/dt = −i[H̃(t), ρ̃] + Σ_{k>j} Γ_kj D[|ε_j⟩⟨ε_k|]ρ̃ in the
/// dressed basis, with H̃(t) = diag(ε) + (ξν/2) cos(νt) S̃_z.
#[derive(Clone, Debug)]
pub struct MasterEquation {
    dim: usize,
    energies: Vec<f64>,
    /// Nonzero entries of the dressed σz, row by row (it is real symmetric).
    sz: Vec<Vec<(usize, f64)>>,
    drive: f64,
    fast: f64,
    nu: f64,
    /// (j, k, Γ_kj)
    jumps: Vec<(usize, usize, f64)>,
    /// Λ_k = Σ_j Γ_kj
    loss: Vec<f64>,
}

impl MasterEquation {
    pub fn new(p: &ModelParams, basis: &DressedBasis) -> Self {
        let d = basis.dim();
        let ops = OperatorSet::new(p.n_fock);
        let sz = basis.to_dressed(&ops.sigma_z);
        let sz =
            (0..d).map(|a| (0..d).map(|b| (b, sz[(a, b)].re)).filter(|&(_, v)| v.abs() > 1e-15).collect()).collect();
        let mut jumps = Vec::new();
        let mut loss = vec![0.0; d];
        for k in 0..d {
            for j in 0..k {
                if !basis.retained(j, k) {
                    continue;
                }
                let rate = p.gamma_a * basis.c_a[(j, k)].norm_sqr() + p.gamma_c * basis.c_c[(j, k)].norm_sqr();
                if rate > 0.0 {
                    jumps.push((j, k, rate));
                    loss[k] += rate;
                }
            }
        }
        Self {
            dim: d,
            energies: basis.energies().to_vec(),
            sz,
            drive: 0.5 * p.xi * p.nu,
            fast: p.omega0 + p.omegac,
            nu: p.nu,
            jumps,
            loss,
        }
    }

    pub fn rates(&self) -> &[(usize, usize, f64)] {
        &self.jumps
    }
}

impl Liouvillian for MasterEquation {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for a in 0..d {
            for b in 0..d {
                let w = self.energies[a] - self.energies[b];
                out[a * d + b] = -I * w * rho[a * d + b] - 0.5 * (self.loss[a] + self.loss[b]) * rho[a * d + b];
            }
        }
        let f = self.drive * (self.nu * t).cos();
        if f != 0.0 {
            let mi_f = -I * f;
            for (a, row) in self.sz.iter().enumerate() {
                // (S ρ)_{a·}
                for &(c, s) in row {
                    let w = mi_f * s;
                    for b in 0..d {
                        out[a * d + b] += w * rho[c * d + b];
                    }
                }
                // (ρ S)_{·a}, using S_ca = S_ac
                for &(c, s) in row {
                    let w = mi_f * s;
                    for r in 0..d {
                        out[r * d + a] -= w * rho[r * d + c];
                    }
                }
            }
        }
        for &(j, k, rate) in &self.jumps {
            out[j * d + j] += rate * rho[k * d + k];
        }
    }

    fn max_frequency(&self) -> f64 {
        self.fast.max(self.nu)
    }
}

/// dρ/dt in the bare basis for the lab-frame Hamiltonian
/// H(t) = H_R + (ξν/2) cos(νt) σz with dressed-basis dissipators.
pub fn lindblad_rhs(p: &ModelParams, basis: &DressedBasis, rho: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let me = MasterEquation::new(p, basis);
    let d = basis.dim();
    let rt = basis.to_dressed(rho);
    let mut out = ComplexMatrix::zeros(d, d);
    me.apply(t, rt.as_slice(), out.as_mut_slice());
    basis.to_bare(&out)
}

/// Output photon flux rate Φ_out(t) = γ_c Tr[ρ(t) X_c†X_c].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxSeries {
    pub times: Vec<f64>,
    pub phi_out: Vec<f64>,
    pub steady: Option<SteadyFlux>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyFlux {
    /// Mean over the trailing window.
    pub mean: f64,
    /// Standard deviation over the trailing window.
    pub std: f64,
    /// Mean over the window before it.
    pub previous_mean: f64,
    pub converged: bool,
}

impl SteadyFlux {
    fn from_windows(prev: &[f64], last: &[f64]) -> Self {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (m_prev, m_last) = (mean(prev), mean(last));
        let var = last.iter().map(|x| (x - m_last).powi(2)).sum::<f64>() / last.len() as f64;
        let scale = m_last.abs().max(1e-10);
        Self {
            mean: m_last,
            std: var.sqrt(),
            previous_mean: m_prev,
            converged: (m_last - m_prev).abs() <= DRIFT_TOL * scale,
        }
    }
}

/// Φ_out(t) from bare-basis density matrices.
pub fn photon_flux(p: &ModelParams, basis: &DressedBasis, times: &[f64], rhos: &[ComplexMatrix]) -> FluxSeries {
    let n = basis.to_bare(&basis.flux_operator());
    let phi_out = rhos.iter().map(|r| p.gamma_c * trace_product(r.as_slice(), n.as_slice(), basis.dim())).collect();
    FluxSeries { times: times.to_vec(), phi_out, steady: None, warnings: Vec::new() }
}

/// Re Tr[A B] for row-major square matrices.
fn trace_product(a: &[C64], b: &[C64], d: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..d {
        for k in 0..d {
            acc += (a[i * d + k] * b[k * d + i]).re;
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluxOptions {
    pub keep_fraction: f64,
    /// Total evolution time; `None` means 8π/γ_c.
    pub horizon: Option<f64>,
    /// Averaging window in modulation periods (periods of 2π/ω0 when ν = 0).
    pub window_periods: f64,
    pub samples_per_window: usize,
}

impl Default for FluxOptions {
    fn default() -> Self {
        Self { keep_fraction: DEFAULT_KEEP_FRACTION, horizon: None, window_periods: 10.0, samples_per_window: 400 }
    }
}

impl FluxOptions {
    pub fn horizon(&self, p: &ModelParams) -> f64 {
        self.horizon.unwrap_or(8.0 * PI / p.gamma_c)
    }

    pub fn window(&self, p: &ModelParams) -> f64 {
        let period = if p.nu > 0.0 { 2.0 * PI / p.nu } else { 2.0 * PI / p.omega0 };
        self.window_periods * period
    }

    pub fn keep(&self, p: &ModelParams) -> Result<usize> {
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            return Err(Error::InvalidParams(format!("keep_fraction must lie in (0, 1], got {}", self.keep_fraction)));
        }
        Ok(default_keep(p.dim(), self.keep_fraction))
    }
}

/// Open-system evolution from |g,0⟩ of the bare basis.
pub struct OpenSystem {
    pub params: ModelParams,
    pub basis: DressedBasis,
    pub equation: MasterEquation,
    flux_op: ComplexMatrix,
}

impl OpenSystem {
    pub fn new(p: &ModelParams, opts: &FluxOptions) -> Result<Self> {
        let basis = dressed_basis(p, opts.keep(p)?)?;
        Ok(Self::with_basis(p, basis))
    }

    /// Reuses a basis computed for the same H_R (it does not depend on ξ or ν).
    pub fn with_basis(p: &ModelParams, basis: DressedBasis) -> Self {
        let equation = MasterEquation::new(p, &basis);
        let flux_op = basis.flux_operator();
        Self { params: *p, basis, equation, flux_op }
    }

    pub fn initial_ground(&self) -> ComplexMatrix {
        let d = self.basis.dim();
        let k = BasisLabel::g(0).index(self.params.n_fock);
        let row = self.basis.eigen.vectors.row(k).to_vec();
        // ρ̃ = U†|g,0⟩⟨g,0|U
        ComplexMatrix::from_fn(d, d, |a, b| row[a].conj() * row[b])
    }

    /// Calls `observer(t, ρ̃)` at each grid time.
    pub fn propagate<F: FnMut(f64, &[C64])>(
        &self,
        rho0: &ComplexMatrix,
        t_grid: &[f64],
        s: &SolverSettings,
        mut observer: F,
    ) -> Result<()> {
        propagate_master(&self.equation, rho0, t_grid, &s.ode(), |ev| {
            if let Event::Sample { t, y, .. } = ev {
                observer(t, y);
            }
        })?;
        Ok(())
    }

    pub fn flux_of(&self, rho_dressed: &[C64]) -> f64 {
        self.params.gamma_c * trace_product(rho_dressed, self.flux_op.as_slice(), self.basis.dim())
    }

    /// Dressed energy Tr[ρ H_R].
    pub fn energy_of(&self, rho_dressed: &[C64]) -> f64 {
        let d = self.basis.dim();
        (0..d).map(|k| self.basis.eigen.values[k] * rho_dressed[k * d + k].re).sum()
    }

    /// Bare-basis populations |label⟩⟨label| of ρ.
    pub fn populations_of(&self, rho_dressed: &[C64], labels: &[BasisLabel]) -> Vec<f64> {
        let d = self.basis.dim();
        let u = &self.basis.eigen.vectors;
        labels
            .iter()
            .map(|l| {
                let row = u.row(l.index(self.params.n_fock));
                let mut acc = ZERO;
                for a in 0..d {
                    for b in 0..d {
                        acc += row[a] * rho_dressed[a * d + b] * row[b].conj();
                    }
                }
                acc.re
            })
            .collect()
    }
}

fn check_rates(p: &ModelParams) -> Result<()> {
    if !(p.gamma_c > 0.0) {
        return Err(Error::InvalidParams("photon flux needs a positive cavity decay rate gamma_c".into()));
    }
    Ok(())
}

/// Φ_out on `t_grid` for the evolution from |g,0⟩.
pub fn flux_trace(p: &ModelParams, t_grid: &[f64], s: &SolverSettings, opts: &FluxOptions) -> Result<FluxSeries> {
    check_rates(p)?;
    let sys = OpenSystem::new(p, opts)?;
    flux_trace_with(&sys, t_grid, s)
}

fn flux_trace_with(sys: &OpenSystem, t_grid: &[f64], s: &SolverSettings) -> Result<FluxSeries> {
    let mut phi = Vec::with_capacity(t_grid.len());
    sys.propagate(&sys.initial_ground(), t_grid, s, |_, rho| phi.push(sys.flux_of(rho)))?;
    Ok(FluxSeries { times: t_grid.to_vec(), phi_out: phi, steady: None, warnings: Vec::new() })
}

/// Sample times covering the last two averaging windows, at window midpoints.
fn window_grid(horizon: f64, window: f64, n: usize) -> Vec<f64> {
    let start = horizon - 2.0 * window;
    (0..2 * n).map(|i| start + (i as f64 + 0.5) * window / n as f64).collect()
}

/// Mean and standard deviation of Φ_out over the trailing window, flagged as
/// unconverged when the mean moved by more than 5% since the window before.
pub fn steady_flux(p: &ModelParams, s: &SolverSettings, opts: &FluxOptions) -> Result<FluxSeries> {
    check_rates(p)?;
    let sys = OpenSystem::new(p, opts)?;
    steady_flux_with(&sys, s, opts)
}

fn steady_flux_with(sys: &OpenSystem, s: &SolverSettings, opts: &FluxOptions) -> Result<FluxSeries> {
    let p = &sys.params;
    let horizon = opts.horizon(p);
    let window = opts.window(p);
    if horizon < 5.0 * PI / p.gamma_c {
        return Err(Error::InvalidParams(format!(
            "horizon {horizon} is shorter than 5 pi / gamma_c = {}",
            5.0 * PI / p.gamma_c
        )));
    }
    if opts.window_periods < 5.0 {
        return Err(Error::InvalidParams(format!("window of {} periods is below 5", opts.window_periods)));
    }
    if 2.0 * window > horizon {
        return Err(Error::InvalidParams(format!("two windows of length {window} do not fit in horizon {horizon}")));
    }
    let n = opts.samples_per_window.max(2);
    let grid = window_grid(horizon, window, n);
    let mut fs = flux_trace_with(sys, &grid, s)?;
    let steady = SteadyFlux::from_windows(&fs.phi_out[..n], &fs.phi_out[n..]);
    if !steady.converged {
        fs.warnings.push(format!(
            "steady flux not converged at nu = {}: window mean moved from {:.6e} to {:.6e}",
            p.nu, steady.previous_mean, steady.mean
        ));
    }
    fs.steady = Some(steady);
    Ok(fs)
}

/// Steady flux over a grid of modulation frequencies. The dressed basis is
/// computed once and shared by all points.
pub fn flux_sweep(p: &ModelParams, nu_grid: &[f64], s: &SolverSettings, opts: &FluxOptions) -> Result<SweepResult> {
    check_rates(p)?;
    if nu_grid.iter().any(|&nu| !(nu >= 0.0)) {
        return Err(Error::InvalidParams("modulation frequencies must be non-negative".into()));
    }
    let basis = dressed_basis(p, opts.keep(p)?)?;
    let runs = par_map(nu_grid, s.jobs(), |&nu| {
        let sys = OpenSystem::with_basis(&p.with_nu(nu), basis.clone());
        steady_flux_with(&sys, s, opts)
    });
    let mut result = SweepResult::new("nu_over_omega0");
    result.axis = nu_grid.iter().map(|nu| nu / p.omega0).collect();
    let mut mean = Vec::with_capacity(runs.len());
    let mut std = Vec::with_capacity(runs.len());
    for run in runs {
        let run = run?;
        let st = run.steady.expect("steady flux is always attached");
        mean.push(st.mean);
        std.push(st.std);
        result.flags.extend(run.warnings);
    }
    result.push_column("flux_ss", mean);
    result.push_column("flux_std", std);
    Ok(result)
}
