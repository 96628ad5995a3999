use std::f64::consts::PI;
use std::sync::Arc;

use aqme_core::dynamics::*;
use aqme_core::hamiltonians::{IsingInstance, Schedule, SingleQubitModel};
use aqme_core::linalg::*;
use aqme_core::scl_generator::SclModel;
use aqme_core::spectral_bath::{LambShift, SpectralModel};
use aqme_core::wcl_generator::{CouplingSet, SnapshotOptions};
use aqme_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BETA: f64 = 1.0 / 2.23;

fn bath(coupling: f64) -> SpectralModel {
    SpectralModel::new(coupling, BETA, 8.0 * PI).unwrap()
}

fn random_qubit_state(seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = CMatrix::from_fn(2, 2, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let p = &m * m.adjoint();
    let t = trace(&p);
    DensityMatrix::new(p / t).unwrap()
}

fn max_entry_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    max_abs(&(a.matrix() - b.matrix()))
}

fn wcl(couplings: CouplingSet, bath: SpectralModel, lamb: LambShift) -> Dynamics {
    Dynamics::Wcl { couplings, bath: Arc::new(bath), lamb, snapshot: SnapshotOptions::default() }
}

fn tight() -> EvolveOptions {
    EvolveOptions { record: uniform_grid(11), ..EvolveOptions::default() }.with_tolerances(1e-11, 1e-13)
}

#[test]
fn pure_dephasing_matches_closed_form() {
    let b = bath(1e-3);
    let omega_z = 1.3;
    let t2 = 1.0 / (2.0 * b.gamma(0.0));
    let t_f = 5.0 * t2;
    let h = pauli_z() * c(-0.5 * omega_z);
    let rho0 = random_qubit_state(1);
    let dynamics = wcl(CouplingSet::single(pauli_z()).unwrap(), b, LambShift::Off);
    let traj = evolve(|_| Ok(h.clone()), &dynamics, &rho0, t_f, &tight()).unwrap();
    for (s, state) in traj.s.iter().zip(&traj.states) {
        let exact = analytic_pure_dephasing(omega_z, &b, &rho0, s * t_f).unwrap();
        assert!(max_entry_diff(state, &exact) < 1e-6, "s = {s}");
    }
}

#[test]
fn static_transverse_field_matches_closed_form() {
    let b = bath(1e-3);
    let omega_x = 1.0;
    let times = static_wcl_times(omega_x, &b);
    assert!((times.t2 - 2.0 * times.t1).abs() < 1e-12 * times.t2);
    let h = pauli_x() * c(-0.5 * omega_x);
    for (seed, lamb) in [(2, LambShift::Off), (3, LambShift::tabulated(&b, 2.0, 201).unwrap())] {
        let rho0 = random_qubit_state(seed);
        let dynamics = wcl(CouplingSet::single(pauli_z()).unwrap(), b, lamb.clone());
        let t_f = 5.0 * times.t2;
        let traj = evolve(|_| Ok(h.clone()), &dynamics, &rho0, t_f, &tight()).unwrap();
        for (s, state) in traj.s.iter().zip(&traj.states) {
            let exact = analytic_static_wcl(omega_x, &b, &lamb, &rho0, s * t_f).unwrap();
            assert!(max_entry_diff(state, &exact) < 1e-6, "seed {seed}, s = {s}");
        }
    }
}

#[test]
fn static_transverse_field_thermalizes() {
    let b = bath(1e-2);
    let times = static_wcl_times(1.0, &b);
    let h = pauli_x() * c(-0.5);
    let rho0 = random_qubit_state(4);
    let dynamics = wcl(CouplingSet::single(pauli_z()).unwrap(), b, LambShift::Off);
    let traj = evolve(|_| Ok(h.clone()), &dynamics, &rho0, 40.0 * times.t1, &EvolveOptions::final_only()).unwrap();
    assert!((traj.final_p_gs() - times.gibbs_ground).abs() < 1e-8);
    assert!((times.gibbs_ground - gibbs_ground_population(1.0, BETA)).abs() < 1e-15);
}

#[test]
fn static_singular_coupling_matches_closed_form() {
    let b = bath(1e-3);
    let t2 = b.t2_computational();
    let h = pauli_x() * c(-0.5);
    let plus = DensityMatrix::new(CMatrix::from_element(2, 2, c(0.5))).unwrap();
    let scl = SclModel::independent_sigma_z(1, &b, &LambShift::Off).unwrap();
    let t_f = 5.0 * t2;
    let traj = evolve(|_| Ok(h.clone()), &Dynamics::Scl(scl), &plus, t_f, &tight()).unwrap();
    for (s, state) in traj.s.iter().zip(&traj.states) {
        let exact = analytic_static_scl(&b, s * t_f);
        assert!(max_entry_diff(state, &exact) < 1e-6, "s = {s}");
    }
}

#[test]
fn single_qubit_fast_paths_match_general_evolution() {
    let b = bath(1e-3);
    let lamb = LambShift::tabulated(&b, 1.5, 301).unwrap();
    let model = SingleQubitModel::new(1.0, 0.7, Schedule::Linear).unwrap();
    let rho0 = random_qubit_state(5);
    let opts = tight();
    let m = model.clone();
    let general = evolve(
        move |s| m.hamiltonian(s),
        &wcl(CouplingSet::single(pauli_z()).unwrap(), b, lamb.clone()),
        &rho0,
        40.0,
        &opts,
    )
    .unwrap();
    let fast = evolve_single_qubit_wcl(&model, &b, &lamb, &rho0, 40.0, &opts).unwrap();
    for (x, y) in general.states.iter().zip(&fast.states) {
        assert!(max_entry_diff(x, y) < 1e-7);
    }

    let scl = SclModel::independent_sigma_z(1, &b, &LambShift::Off).unwrap();
    let m = model.clone();
    let general = evolve(move |s| m.hamiltonian(s), &Dynamics::Scl(scl), &rho0, 40.0, &opts).unwrap();
    let fast = evolve_single_qubit_scl(&model, &b, &rho0, 40.0, &opts).unwrap();
    for (x, y) in general.states.iter().zip(&fast.states) {
        assert!(max_entry_diff(x, y) < 1e-7);
    }
}

#[test]
fn multiqubit_trajectory_stays_physical() {
    let inst = IsingInstance::new(
        2,
        vec![0.3, -0.5],
        vec![(0, 1, 0.8)],
        Schedule::Linear,
        Schedule::Linear,
    )
    .unwrap();
    let b = bath(1e-3);
    let h0 = inst.hamiltonian(0.0).unwrap();
    let rho0 = initial_ground_state(&h0).unwrap();
    // the transverse-field start has a degenerate excited pair
    let dynamics = Dynamics::Wcl {
        couplings: CouplingSet::independent_sigma_z(2),
        bath: Arc::new(b),
        lamb: LambShift::Off,
        snapshot: SnapshotOptions { allow_degenerate: true, ..SnapshotOptions::default() },
    };
    let traj = evolve(|s| inst.hamiltonian(s), &dynamics, &rho0, 20.0, &EvolveOptions::default()).unwrap();
    assert_eq!(traj.s.len(), 101);
    for j in 0..traj.s.len() {
        assert!(traj.trace_drift[j] < 1e-9);
        assert!(traj.hermiticity[j] < 1e-9);
        assert!(traj.min_eig[j] > -1e-9);
    }
    assert!(traj.final_p_gs() > 0.5);
}

#[test]
fn tightening_tolerance_stays_within_error_estimate() {
    let b = bath(1e-4);
    let model = SingleQubitModel::new(1.0, 1.0, Schedule::Linear).unwrap();
    let lamb = lamb_for(&model, &b, 201, true).unwrap();
    let rho0 = DensityMatrix::pure(&model.eigenstates(0.0).unwrap().column(0).into_owned()).unwrap();
    let coarse_opts = EvolveOptions::final_only();
    let fine_opts = EvolveOptions::final_only().with_tolerances(0.5e-8, 0.5e-10);
    for t_f in [10.0, 300.0] {
        let coarse = evolve_single_qubit_wcl(&model, &b, &lamb, &rho0, t_f, &coarse_opts).unwrap();
        let fine = evolve_single_qubit_wcl(&model, &b, &lamb, &rho0, t_f, &fine_opts).unwrap();
        let change = (coarse.final_p_gs() - fine.final_p_gs()).abs();
        assert!(change < coarse.error_estimate(), "t_f = {t_f}: {change:e} vs {:e}", coarse.error_estimate());
    }
}

#[test]
fn step_budget_exhaustion_is_reported() {
    let model = SingleQubitModel::new(1.0, 1.0, Schedule::Linear).unwrap();
    let rho0 = DensityMatrix::pure(&model.eigenstates(0.0).unwrap().column(0).into_owned()).unwrap();
    let mut opts = EvolveOptions::final_only();
    opts.control.max_steps = 5;
    let err = evolve_single_qubit_wcl(&model, &bath(1e-4), &LambShift::Off, &rho0, 1e3, &opts).unwrap_err();
    assert!(matches!(err, Error::Integration { .. }));
}

#[test]
fn invalid_record_points_are_rejected() {
    let model = SingleQubitModel::new(1.0, 1.0, Schedule::Linear).unwrap();
    let rho0 = DensityMatrix::maximally_mixed(2);
    let opts = EvolveOptions { record: vec![0.5, 0.2], ..EvolveOptions::default() };
    assert!(evolve_single_qubit_scl(&model, &bath(1e-4), &rho0, 10.0, &opts).is_err());
    assert!(evolve_single_qubit_scl(&model, &bath(1e-4), &rho0, -1.0, &EvolveOptions::final_only()).is_err());
}

#[test]
fn adiabatic_limit_properties() {
    let model = SingleQubitModel::new(1.0, 1.0, Schedule::Linear).unwrap();
    let b = bath(1e-4);
    let lamb = lamb_for(&model, &b, 201, true).unwrap();
    let zero = C64::new(0.0, 0.0);

    let r = analytic_adiabatic_limit(&model, &b, &lamb, 0.8, zero, 1e4, 1.0).unwrap();
    assert_eq!(r.coherence, zero);

    let closed = bath(0.0);
    let r = analytic_adiabatic_limit(&model, &closed, &LambShift::Off, 0.8, C64::new(0.1, 0.05), 1e4, 0.6).unwrap();
    assert!((r.ground - 0.8).abs() < 1e-14);
    assert!((r.coherence.norm() - C64::new(0.1, 0.05).norm()).abs() < 1e-12);

    let rho0 = DensityMatrix::pure(&model.eigenstates(0.0).unwrap().column(0).into_owned()).unwrap();
    for t_f in [1e4, 1e5] {
        let traj = evolve_single_qubit_wcl(&model, &b, &lamb, &rho0, t_f, &EvolveOptions::final_only()).unwrap();
        let limit = analytic_adiabatic_limit(&model, &b, &lamb, 1.0, zero, t_f, 1.0).unwrap();
        assert!((traj.final_p_gs() - limit.ground).abs() < 1e-3, "t_f = {t_f}");
    }
}

#[test]
fn singular_coupling_long_evolution_is_fully_mixed() {
    let model = SingleQubitModel::new(1.0, 1.0, Schedule::Linear).unwrap();
    let rho0 = DensityMatrix::pure(&model.eigenstates(0.0).unwrap().column(0).into_owned()).unwrap();
    let traj = evolve_single_qubit_scl(&model, &bath(1e-4), &rho0, 1e4, &EvolveOptions::final_only()).unwrap();
    assert!((traj.final_p_gs() - 0.5).abs() < 1e-2);
}

#[test]
fn sweep_finds_interior_optimum_and_csv_is_stable() {
    let model = SingleQubitModel::new(1.0, 1.0, Schedule::Linear).unwrap();
    let b = bath(1e-4);
    let grid: Vec<f64> = (0..=12).map(|j| 10f64.powf(0.5 * j as f64)).collect();
    let sweep = sweep_tf(&model, &b, &grid, &SweepOptions::default()).unwrap();
    assert!(sweep.has_optimum(2e-3));
    let adp = model.adiabatic_parameter(sweep.optimum.t_f).unwrap();
    assert!((3.0..15.0).contains(&adp));
    assert!(sweep.analytic.last().copied().unwrap());
    assert!(!sweep.analytic[0]);
    assert!((sweep.gibbs - gibbs_ground_population(1.0, BETA)).abs() < 1e-15);
    let mut buf = Vec::new();
    sweep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("t_f,p_gs,err,method"));
    assert_eq!(text.lines().count(), grid.len() + 1);
}

#[test]
fn trajectory_csv_header() {
    let model = SingleQubitModel::new(1.0, 1.0, Schedule::Linear).unwrap();
    let rho0 = DensityMatrix::maximally_mixed(2);
    let traj = evolve_single_qubit_scl(&model, &bath(1e-4), &rho0, 10.0, &EvolveOptions::default()).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("s,p_gs,re_offdiag,im_offdiag,trace_drift,min_eig"));
    assert_eq!(text.lines().count(), 102);
}
