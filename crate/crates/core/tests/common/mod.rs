//! Reference computations shared by the integration and acceptance tests.
//! Nothing here calls the library routine it is used to check.

#![allow(dead_code)]

use std::f64::consts::PI;

use rabimod::dynamics::{evolve, generator, HamiltonianChoice};
use rabimod::model::{BasisLabel, ModulatedHamiltonian};
use rabimod::numerics::{ComplexMatrix, ComplexVector};
use rabimod::opensys::{dressed_basis, OpenSystem};
use rabimod::{ModelParams, SolverSettings, C64};

/// J_n(x) = (1/2π) ∫_0^{2π} cos(nτ − x sin τ) dτ by the trapezoid rule, which
/// converges geometrically for this periodic integrand.
pub fn bessel_quadrature(n: i32, x: f64) -> f64 {
    let m = 4096;
    let h = 2.0 * PI / m as f64;
    (0..m).map(|k| (n as f64 * k as f64 * h - x * (k as f64 * h).sin()).cos()).sum::<f64>() / m as f64
}

/// exp(−iHt) by Taylor series with scaling and squaring.
pub fn expm_minus_i(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let n = h.rows();
    let a = h.scale(C64::new(0.0, -t));
    let norm = a.max_abs() * n as f64;
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = a.scale_real(0.5f64.powi(s));
    let mut term = ComplexMatrix::identity(n);
    let mut sum = ComplexMatrix::identity(n);
    for k in 1..30 {
        term = term.matmul(&a).scale_real(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..s {
        sum = sum.matmul(&sum);
    }
    sum
}

/// Maps a lab-frame state to the interaction picture of
/// H0(t) = (ω0/2 + (ξν/2) cos νt) σz + ωc a†a.
pub fn lab_to_rotating(p: &ModelParams, t: f64, psi: &[C64]) -> Vec<C64> {
    let theta = p.omega0 * t + if p.nu != 0.0 { p.xi * (p.nu * t).sin() } else { 0.0 };
    (0..psi.len())
        .map(|i| {
            let l = BasisLabel::from_index(i, p.n_fock);
            let s = if l.excited { 1.0 } else { -1.0 };
            psi[i] * C64::from_polar(1.0, 0.5 * s * theta + p.omegac * l.n as f64 * t)
        })
        .collect()
}

/// Minimum over `times` of |⟨ψ_rot|V†ψ_lab⟩|², both started from `psi0`.
pub fn lab_rotating_fidelity(p: &ModelParams, psi0: &ComplexVector, times: &[f64], s: &SolverSettings) -> f64 {
    let lab = ModulatedHamiltonian::lab_frame(p).unwrap();
    let rot = generator(p, HamiltonianChoice::Exact, s).unwrap();
    let (a, _) = evolve(&lab, psi0, times, s).unwrap();
    let (b, _) = evolve(&rot, psi0, times, s).unwrap();
    times
        .iter()
        .zip(a.iter().zip(&b))
        .map(|(&t, (x, y))| y.inner(&lab_to_rotating(p, t, &x.0)).norm_sqr())
        .fold(1.0, f64::min)
}

/// Largest entry of |ρ_open(t) − |ψ(t)⟩⟨ψ(t)|| in the bare basis when both
/// rates vanish and both start from |g,0⟩.
pub fn open_closed_deviation(p: &ModelParams, times: &[f64], s: &SolverSettings) -> f64 {
    let p = ModelParams { gamma_a: 0.0, gamma_c: 0.0, ..*p };
    let sys = OpenSystem::with_basis(&p, dressed_basis(&p, p.dim()).unwrap());
    let d = p.dim();
    let mut rhos = Vec::new();
    sys.propagate(&sys.initial_ground(), times, s, |_, r| {
        rhos.push(sys.basis.to_bare(&ComplexMatrix::from_vec(d, d, r.to_vec())))
    })
    .unwrap();
    let lab = ModulatedHamiltonian::lab_frame(&p).unwrap();
    let psi0 = ComplexVector::basis(d, BasisLabel::g(0).index(p.n_fock));
    let (psis, _) = evolve(&lab, &psi0, times, s).unwrap();
    rhos.iter().zip(&psis).map(|(r, psi)| r.max_abs_diff(&psi.outer())).fold(0.0, f64::max)
}

/// Hermitian matrix with entries drawn from `next` in [-1, 1).
pub fn random_hermitian(n: usize, mut next: impl FnMut() -> f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(next(), 0.0);
        for j in (i + 1)..n {
            let z = C64::new(next(), next());
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}
