mod common;

use std::f64::consts::PI;

use common::*;
use rabimod::dynamics::{
    ajc_analytic, evolve, fidelity_trace, jc_analytic, populations, EffectiveModel, HamiltonianChoice, InitialState,
};
use rabimod::model::{h_rabi, sidebands, BasisLabel, ModulatedHamiltonian, OperatorSet, SidebandKind};
use rabimod::numerics::{bessel_j, eigh, ComplexMatrix, ComplexVector};
use rabimod::opensys::{dressed_basis, photon_flux, FluxOptions, OpenSystem};
use rabimod::{ModelParams, SolverSettings, C64};

fn weak(nu: f64) -> ModelParams {
    ModelParams { g: 0.05, xi: 2.40483, nu, n_fock: 8, ..ModelParams::default() }
}

#[test]
fn bessel_agrees_with_quadrature() {
    for n in [-7, -2, 0, 1, 3, 10, 25] {
        for x in [0.0, 0.3, 1.84118, 2.40483, 7.5, 20.0, 45.0] {
            let a = bessel_j(n, x).unwrap();
            let b = bessel_quadrature(n, x);
            assert!((a - b).abs() < 1e-12, "J_{n}({x}): {a} vs {b}");
        }
    }
}

#[test]
fn tabulated_bessel_values() {
    assert!(bessel_j(0, 2.40483).unwrap().abs() < 1e-4);
    assert!((bessel_j(1, 1.84118).unwrap().abs() - 0.581865).abs() < 1e-4);
    assert!((bessel_j(2, 3.05424).unwrap().abs() - 0.486499).abs() < 1e-4);
    assert!((bessel_j(0, 2.21868).unwrap() - 0.1).abs() < 1e-4);
}

#[test]
fn sidebands_resum_to_the_phase_factor() {
    let p = weak(1.3);
    for &t in &[0.0, 0.77, 12.3, 101.0] {
        let mut rot = C64::new(0.0, 0.0);
        let mut cr = C64::new(0.0, 0.0);
        for s in sidebands(&p, 40).unwrap() {
            let w = s.coupling * C64::from_polar(1.0, s.detuning * t);
            match s.kind {
                SidebandKind::Rotating => rot += w,
                SidebandKind::CounterRotating => cr += w,
            }
        }
        let phase = p.xi * (p.nu * t).sin();
        let want_rot = p.g * C64::from_polar(1.0, p.delta() * t + phase);
        let want_cr = p.g * C64::from_polar(1.0, (p.omega0 + p.omegac) * t + phase);
        assert!((rot - want_rot).norm() < 1e-10 && (cr - want_cr).norm() < 1e-10);
    }
}

#[test]
fn time_independent_evolution_matches_matrix_exponential() {
    let p = ModelParams { g: 0.3, n_fock: 5, ..ModelParams::default() };
    let h = h_rabi(&p).unwrap();
    let lab = ModulatedHamiltonian::lab_frame(&p).unwrap();
    let psi0 = ComplexVector::basis(p.dim(), BasisLabel::e(1).index(p.n_fock));
    let times = [0.0, 1.0, 7.3, 40.0];
    let (states, warn) = evolve(&lab, &psi0, &times, &SolverSettings::default()).unwrap();
    assert!(warn.is_none());
    for (t, psi) in times.iter().zip(&states) {
        let want = expm_minus_i(&h, *t).mul_vec(&psi0.0);
        let err = psi.0.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-6, "t = {t}: {err}");
    }
}

#[test]
fn lab_and_rotating_frames_agree() {
    let s = SolverSettings::default();
    for (p, init) in [
        (weak(2.0), InitialState::Ground),
        (weak(0.7), InitialState::Basis { label: BasisLabel::e(1) }),
        (ModelParams { g: 0.5, xi: 2.21868, nu: 5.0, n_fock: 10, ..ModelParams::default() }, InitialState::Excited),
    ] {
        let psi0 = init.state(p.n_fock).unwrap();
        let f = lab_rotating_fidelity(&p, &psi0, &uniform_grid(2.0 * PI / p.g, 41), &s);
        assert!(f >= 1.0 - 1e-6, "{p:?}: {f}");
    }
}

#[test]
fn closed_limit_of_the_master_equation() {
    let s = SolverSettings { atol: 1e-11, rtol: 1e-9, ..SolverSettings::default() };
    let p = ModelParams { n_fock: 6, ..weak(2.0) };
    let d = open_closed_deviation(&p, &uniform_grid(2.0 * PI / p.g, 21), &s);
    assert!(d <= 1e-6, "{d}");
}

#[test]
fn anti_jc_oscillation_follows_analytic_form() {
    let p = weak(2.0);
    let s = SolverSettings::default();
    let gc = (p.g * bessel_j(1, p.xi).unwrap()).abs();
    let times = uniform_grid(2.0 * PI / gc, 201);
    let exact =
        populations(&p, HamiltonianChoice::Exact, &InitialState::Ground, &[BasisLabel::e(1)], &times, &s).unwrap();
    let ana = ajc_analytic(&p, &times).unwrap();
    let dev = exact
        .channel("P_e1")
        .unwrap()
        .iter()
        .zip(ana.channel("P_e1").unwrap())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(dev < 0.05, "{dev}");
}

#[test]
fn suppressed_regime_follows_jc() {
    let p = ModelParams { g: 0.5, xi: 2.21868, nu: 30.0, n_fock: 6, ..ModelParams::default() };
    let s = SolverSettings::default();
    let times = uniform_grid(2.0 * PI / (0.1 * p.g), 101);
    let labels = [BasisLabel::e(0), BasisLabel::g(1)];
    let exact = populations(&p, HamiltonianChoice::Exact, &InitialState::Excited, &labels, &times, &s).unwrap();
    let jc = jc_analytic(&p, &times).unwrap();
    for name in ["P_e0", "P_g1"] {
        let dev = exact
            .channel(name)
            .unwrap()
            .iter()
            .zip(jc.channel(name).unwrap())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev < 0.05, "{name}: {dev}");
    }
}

#[test]
fn effective_model_fidelity_is_high_when_valid() {
    let p = weak(1.0);
    let ts = fidelity_trace(
        &p,
        &InitialState::superposition_coherent(C64::new(0.1, 0.0)),
        EffectiveModel::Enhanced,
        &uniform_grid(2.0 * PI / p.g, 51),
        &SolverSettings::default(),
    )
    .unwrap();
    assert!(*ts.channel("F").unwrap().last().unwrap() >= 0.95);
}

#[test]
fn jc_two_level_block_diagonalizes_exactly() {
    let (w, g, n) = (1.0, 0.07, 3usize);
    let h = ComplexMatrix::from_vec(
        2,
        2,
        vec![
            C64::new(w * n as f64 + 0.5 * w, 0.0),
            C64::new(g * (n as f64 + 1.0).sqrt(), 0.0),
            C64::new(g * (n as f64 + 1.0).sqrt(), 0.0),
            C64::new(w * (n as f64 + 1.0) - 0.5 * w, 0.0),
        ],
    );
    let e = eigh(&h).unwrap();
    let mid = w * (n as f64 + 0.5);
    let split = g * (n as f64 + 1.0).sqrt();
    assert!((e.values[0] - (mid - split)).abs() < 1e-14);
    assert!((e.values[1] - (mid + split)).abs() < 1e-14);
}

#[test]
fn dressed_couplings_obey_parity_selection() {
    let p = ModelParams { g: 0.4, n_fock: 10, ..ModelParams::default() };
    let b = dressed_basis(&p, p.dim()).unwrap();
    let o = OperatorSet::new(p.n_fock);
    let u = &b.eigen.vectors;
    for op in [&o.sigma_x, &o.quadrature()] {
        let c = op.similarity_adj(u);
        for j in 0..p.dim() {
            for k in 0..p.dim() {
                if b.parity[j] == b.parity[k] {
                    assert!(c[(j, k)].norm() < 1e-10);
                }
            }
        }
    }
    let h = h_rabi(&p).unwrap();
    assert!(b.eigen.max_residual(&h) < 1e-10 && b.eigen.orthonormality_defect() < 1e-10);
}

#[test]
fn weak_coupling_dressed_operator_is_annihilation() {
    let p = ModelParams { g: 1e-8, omegac: 0.7, n_fock: 6, ..ModelParams::default() };
    let b = dressed_basis(&p, p.dim()).unwrap();
    let o = OperatorSet::new(p.n_fock);
    let a_dressed = o.a.similarity_adj(&b.eigen.vectors);
    let dev = b.x_c.max_abs_diff(&a_dressed);
    assert!(dev < 1e-6, "{dev}");
}

#[test]
fn ground_state_is_mostly_vacuum_at_weak_coupling() {
    let p = ModelParams { g: 0.05, n_fock: 8, ..ModelParams::default() };
    let b = dressed_basis(&p, p.dim()).unwrap();
    let overlap = b.eigen.vectors[(BasisLabel::g(0).index(p.n_fock), 0)].norm_sqr();
    assert!(overlap >= 0.999);
}

#[test]
fn unmodulated_system_only_loses_energy() {
    let p =
        ModelParams { g: 0.05, xi: 0.0, nu: 0.0, gamma_a: 0.05, gamma_c: 0.05, n_fock: 5, ..ModelParams::default() };
    let sys = OpenSystem::new(&p, &FluxOptions::default()).unwrap();
    let d = p.dim();
    let mut rho0 = ComplexMatrix::zeros(d, d);
    rho0[(d / 2, d / 2)] = C64::new(1.0, 0.0);
    let mut energy = Vec::new();
    let mut traces = Vec::new();
    sys.propagate(&rho0, &uniform_grid(100.0, 101), &SolverSettings::default(), |_, r| {
        energy.push(sys.energy_of(r));
        traces.push((0..d).map(|k| r[k * d + k].re).sum::<f64>());
    })
    .unwrap();
    assert!(energy.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    assert!(energy.last().unwrap() < &energy[0]);
    assert!(traces.iter().all(|t| (t - 1.0).abs() < 1e-8));
}

#[test]
fn flux_stays_small_without_modulation() {
    let p = ModelParams { xi: 0.0, nu: 0.0, gamma_a: 0.02, gamma_c: 0.02, n_fock: 6, ..weak(0.0) };
    let sys = OpenSystem::new(&p, &FluxOptions::default()).unwrap();
    let times = uniform_grid(200.0, 41);
    let d = p.dim();
    let mut rhos = Vec::new();
    sys.propagate(&sys.initial_ground(), &times, &SolverSettings::default(), |_, r| {
        rhos.push(sys.basis.to_bare(&ComplexMatrix::from_vec(d, d, r.to_vec())))
    })
    .unwrap();
    let fs = photon_flux(&p, &sys.basis, &times, &rhos);
    // only the small dressing of |g,0⟩ relaxes
    assert!(fs.phi_out.iter().all(|&f| (0.0..1e-4).contains(&f)), "{:?}", fs.phi_out);
    assert!(fs.phi_out.last().unwrap() < &(0.1 * fs.phi_out[0]));
}
