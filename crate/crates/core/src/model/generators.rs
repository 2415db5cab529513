//! Sparse time-dependent generators used for propagation.
//!
//! Each Hamiltonian is stored as an optional static part, an optional
//! `A cos(νt)` diagonal drive and a list of couplings `c(t) O + c(t)* O†`
//! whose coefficients are sums of harmonics sharing one spacing.

use num_complex::Complex64 as C64;

use super::sidebands::{suppressed_coupling, EnhancedCouplings};
use super::{hamiltonians, ModelParams, OperatorSet};
use crate::error::{Error, Result};
use crate::numerics::bessel::bessel_j_symmetric;
use crate::numerics::matrix::{ComplexMatrix, SparseMatrix, ZERO};
use crate::numerics::ode::Generator;

/// Amplitudes below this are dropped from sideband sums.
const NEGLIGIBLE_BESSEL: f64 = 1e-15;

/// c(t) = Σ_k amps[k] · exp(i (carrier + (first + k)·spacing) t)
#[derive(Clone, Debug)]
pub struct HarmonicSeries {
    pub carrier: f64,
    pub spacing: f64,
    pub first: i32,
    pub amps: Vec<f64>,
}

impl HarmonicSeries {
    pub fn single(amp: f64, freq: f64) -> Self {
        Self { carrier: freq, spacing: 0.0, first: 0, amps: vec![amp] }
    }

    /// Bessel-weighted series `scale Σ_{|n|≤n_max} J_n(ξ) e^{i(carrier + nν)t}`,
    /// trimmed of negligible outer orders.
    pub fn bessel(scale: f64, xi: f64, carrier: f64, nu: f64, n_max: usize) -> Result<Self> {
        let j = bessel_j_symmetric(n_max, xi)?;
        let lo = j.iter().position(|v| v.abs() > NEGLIGIBLE_BESSEL).unwrap_or(n_max);
        let hi = j.iter().rposition(|v| v.abs() > NEGLIGIBLE_BESSEL).unwrap_or(n_max);
        Ok(Self {
            carrier,
            spacing: nu,
            first: lo as i32 - n_max as i32,
            amps: j[lo..=hi].iter().map(|v| v * scale).collect(),
        })
    }

    #[inline]
    pub fn eval(&self, t: f64) -> C64 {
        let step = C64::from_polar(1.0, self.spacing * t);
        let mut w = C64::from_polar(1.0, (self.carrier + self.first as f64 * self.spacing) * t);
        let mut acc = ZERO;
        for &a in &self.amps {
            acc += a * w;
            w *= step;
        }
        acc
    }

    pub fn max_frequency(&self) -> f64 {
        let last = self.first + self.amps.len() as i32 - 1;
        let f = |n: i32| (self.carrier + n as f64 * self.spacing).abs();
        let mut m = f(self.first).max(f(last));
        if self.amps.len() > 1 {
            m = m.max(self.spacing.abs());
        }
        m
    }
}

#[derive(Clone, Debug)]
struct Coupling {
    op: SparseMatrix,
    op_dag: SparseMatrix,
    coeff: HarmonicSeries,
}

#[derive(Clone, Debug)]
struct DiagonalDrive {
    diag: Vec<f64>,
    amplitude: f64,
    freq: f64,
}

#[derive(Clone, Debug)]
pub struct ModulatedHamiltonian {
    dim: usize,
    static_part: Option<SparseMatrix>,
    drive: Option<DiagonalDrive>,
    couplings: Vec<Coupling>,
}

fn sparse(m: &ComplexMatrix) -> SparseMatrix {
    SparseMatrix::from_dense(m, 0.0)
}

fn coupling(op: &ComplexMatrix, coeff: HarmonicSeries) -> Coupling {
    Coupling { op: sparse(op), op_dag: sparse(&op.adjoint()), coeff }
}

impl ModulatedHamiltonian {
    /// H(t) = H_R + (ξν/2) cos(νt) σz
    pub fn lab_frame(p: &ModelParams) -> Result<Self> {
        let o = super::build_operators(p)?;
        let hr = hamiltonians::h_rabi(p)?;
        let drive = (p.xi * p.nu != 0.0).then(|| DiagonalDrive {
            diag: o.sigma_z.diag().iter().map(|z| z.re).collect(),
            amplitude: 0.5 * p.xi * p.nu,
            freq: p.nu,
        });
        Ok(Self { dim: p.dim(), static_part: Some(sparse(&hr)), drive, couplings: Vec::new() })
    }

    /// Exact interaction-picture Hamiltonian with |n|, |m| ≤ n_max sidebands.
    pub fn rotating_frame(p: &ModelParams, n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParams("sideband cutoff n_max must be >= 1".into()));
        }
        let o = super::build_operators(p)?;
        let rot = HarmonicSeries::bessel(p.g, p.xi, p.delta(), p.nu, n_max)?;
        let cr = HarmonicSeries::bessel(p.g, p.xi, p.omega0 + p.omegac, p.nu, n_max)?;
        Ok(Self::from_couplings(p, &o, rot, cr))
    }

    /// Enhanced-regime effective Hamiltonian (zeroth rotating + m0 CR sideband).
    pub fn enhanced(p: &ModelParams) -> Result<Self> {
        let c = EnhancedCouplings::new(p)?;
        let o = super::build_operators(p)?;
        Ok(Self::from_couplings(
            p,
            &o,
            HarmonicSeries::single(c.g_r, p.delta()),
            HarmonicSeries::single(c.g_c, c.delta_m0),
        ))
    }

    /// Suppressed-regime effective JC Hamiltonian.
    pub fn suppressed(p: &ModelParams) -> Result<Self> {
        let g_r = suppressed_coupling(p)?;
        let o = super::build_operators(p)?;
        let op = o.sigma_plus.matmul(&o.a);
        Ok(Self {
            dim: p.dim(),
            static_part: None,
            drive: None,
            couplings: vec![coupling(&op, HarmonicSeries::single(g_r, p.delta()))],
        })
    }

    fn from_couplings(p: &ModelParams, o: &OperatorSet, rot: HarmonicSeries, cr: HarmonicSeries) -> Self {
        let sp_a = o.sigma_plus.matmul(&o.a);
        let sp_ad = o.sigma_plus.matmul(&o.a_dag);
        Self {
            dim: p.dim(),
            static_part: None,
            drive: None,
            couplings: vec![coupling(&sp_a, rot), coupling(&sp_ad, cr)],
        }
    }

    pub fn to_dense(&self, t: f64) -> ComplexMatrix {
        let mut h = ComplexMatrix::zeros(self.dim, self.dim);
        for k in 0..self.dim {
            let mut col = vec![ZERO; self.dim];
            col[k] = C64::new(1.0, 0.0);
            let mut out = vec![ZERO; self.dim];
            self.apply(t, &col, &mut out);
            for (i, v) in out.into_iter().enumerate() {
                h[(i, k)] = v;
            }
        }
        h
    }
}

impl Generator for ModulatedHamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = ZERO);
        if let Some(s) = &self.static_part {
            s.mul_add(C64::new(1.0, 0.0), psi, out);
        }
        if let Some(d) = &self.drive {
            let f = d.amplitude * (d.freq * t).cos();
            for ((o, &x), &e) in out.iter_mut().zip(psi).zip(&d.diag) {
                *o += f * e * x;
            }
        }
        for c in &self.couplings {
            let z = c.coeff.eval(t);
            c.op.mul_add(z, psi, out);
            c.op_dag.mul_add(z.conj(), psi, out);
        }
    }

    fn max_frequency(&self) -> f64 {
        let drive = self.drive.as_ref().map_or(0.0, |d| d.freq.abs());
        self.couplings.iter().map(|c| c.coeff.max_frequency()).fold(drive, f64::max)
    }
}
