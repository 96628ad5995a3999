mod common;

use aqme_core::hamiltonians::{quantum_signature_instance, IsingInstance, Schedule, SingleQubitModel};
use aqme_core::linalg::*;
use aqme_core::multiqubit_analysis::*;
use aqme_core::scl_generator::independent_dephasing_rate;
use aqme_core::spectral_bath::{LambShift, RateFunction};
use aqme_core::wcl_generator::{build_snapshot, single_qubit_coefficients, CouplingSet, Mixing, SnapshotOptions};
use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn single_qubit_pair_rate_reduces_to_sigma() {
    let b = bath(1e-3);
    let model = SingleQubitModel::new(1.0, 0.8, Schedule::Linear).unwrap();
    let t_f = 50.0;
    for s in [0.1, 0.4, 0.7, 0.95] {
        let sys = Eigensystem::new(&model.hamiltonian(s).unwrap(), &CouplingSet::single(pauli_z()).unwrap()).unwrap();
        let rate = pairwise_t2_rate(&sys, &b, 0, 1).unwrap();
        let co = single_qubit_coefficients(&model, s, &b, &LambShift::Off, t_f).unwrap();
        assert!((rate - co.sigma / t_f).abs() < 1e-12 * rate, "s = {s}");
        assert_eq!(rate, pairwise_t2_rate(&sys, &b, 1, 0).unwrap());
    }
}

#[test]
fn diagonal_couplings_give_pure_dephasing() {
    let b = bath(1e-3);
    let inst = random_instance(3, 3);
    let h = inst.hamiltonian(1.0).unwrap();
    let sys = Eigensystem::new(&h, &CouplingSet::independent_sigma_z(3)).unwrap();
    let report = rate_report(&h, &CouplingSet::independent_sigma_z(3), &b, None).unwrap();
    let t2c = b.t2_computational();
    // eigenstates of a diagonal H are computational states up to ordering
    let labels: Vec<usize> = (0..8).map(|k| (0..8).find(|&x| sys.basis[(x, k)].norm() > 0.5).unwrap()).collect();
    for a in 0..8 {
        assert_eq!(report.depopulation[a], 0.0);
        for bb in 0..8 {
            if a != bb {
                let expected = independent_dephasing_rate(labels[a], labels[bb], 3, t2c);
                assert!((report.pair_rates[(a, bb)] - expected).abs() < 1e-12 * expected);
            }
        }
    }
}

#[test]
fn pair_rates_match_trajectory_fit() {
    let b = bath(1e-3);
    for (seed, n) in [(10, 2), (11, 3)] {
        let inst = random_instance(seed, n);
        let h = inst.hamiltonian(0.55).unwrap();
        let cs = CouplingSet::independent_sigma_z(n);
        let report = rate_report(&h, &cs, &b, None).unwrap();
        let t = 2.0 / report.pair_rates.max();
        let fitted = fitted_pair_rates(&h, &cs, b, seed, t);
        let d = 1 << n;
        for x in 0..d {
            for y in 0..d {
                if x != y {
                    let r = report.pair_rates[(x, y)];
                    assert!((fitted[(x, y)] - r).abs() < 1e-4 * r, "n = {n} ({x},{y}): {} vs {r}", fitted[(x, y)]);
                }
            }
        }
    }
}

#[test]
fn correlated_bath_pair_rates_match_trajectory_fit() {
    let b = bath(1e-3);
    let mix = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]);
    let cs = CouplingSet::new(vec![embed(&pauli_z(), 0, 2), embed(&pauli_z(), 1, 2)], Mixing::Matrix(mix)).unwrap();
    let h = random_instance(12, 2).hamiltonian(0.4).unwrap();
    let report = rate_report(&h, &cs, &b, None).unwrap();
    let fitted = fitted_pair_rates(&h, &cs, b, 12, 2.0 / report.pair_rates.max());
    for x in 0..4 {
        for y in 0..4 {
            if x != y {
                let r = report.pair_rates[(x, y)];
                assert!((fitted[(x, y)] - r).abs() < 1e-4 * r);
            }
        }
    }
}

#[test]
fn ground_depopulation_ignores_zero_frequency_rate() {
    let b = bath(1e-3);
    let inst = random_instance(20, 3);
    let h = inst.hamiltonian(0.6).unwrap();
    let sys = Eigensystem::new(&h, &CouplingSet::independent_sigma_z(3)).unwrap();
    let r0 = ground_depopulation_rate(&sys, &b).unwrap();
    assert!(r0 > 0.0);
    for factor in [0.5, 1.5] {
        let perturbed = PerturbedZero { inner: b, factor };
        assert_eq!(ground_depopulation_rate(&sys, &perturbed).unwrap().to_bits(), r0.to_bits());
        assert_ne!(pairwise_t2_rate(&sys, &perturbed, 0, 1).unwrap(), pairwise_t2_rate(&sys, &b, 0, 1).unwrap());
    }
    let generic = generic_depopulation_rate(&sys, &b, 0).unwrap();
    assert!((generic - r0).abs() < 1e-12 * r0);
}

#[test]
fn ground_depopulation_matches_generator_from_ground_state() {
    let b = bath(1e-3);
    let inst = random_instance(21, 2);
    let h = inst.hamiltonian(0.5).unwrap();
    let cs = CouplingSet::independent_sigma_z(2);
    let sys = Eigensystem::new(&h, &cs).unwrap();
    let r0 = ground_depopulation_rate(&sys, &b).unwrap();
    let snap = build_snapshot(&h, &cs, &b, &LambShift::Off, SnapshotOptions::default()).unwrap();
    let mut ground = CMatrix::zeros(4, 4);
    ground[(0, 0)] = c(1.0);
    let rate = -snap.generator_eigen(&ground)[(0, 0)].re;
    assert!((rate - r0).abs() < 1e-12 * r0);
}

#[test]
fn ground_depopulation_vanishes_without_transitions() {
    // frozen at a diagonal H every coupling element between levels is zero
    let inst = random_instance(22, 2);
    let sys = Eigensystem::new(&inst.hamiltonian(1.0).unwrap(), &CouplingSet::independent_sigma_z(2)).unwrap();
    assert_eq!(ground_depopulation_rate(&sys, &bath(1e-3)).unwrap(), 0.0);
}

#[test]
fn rate_matrix_matches_generator_and_relaxes_to_gibbs() {
    let b = bath(1e-3);
    for seed in 30..33 {
        let inst = random_instance(seed, 3);
        let h = inst.hamiltonian(0.5).unwrap();
        let cs = CouplingSet::independent_sigma_z(3);
        let sys = Eigensystem::new(&h, &cs).unwrap();
        let w = population_rate_matrix(&sys, &b);
        let snap = build_snapshot(&h, &cs, &b, &LambShift::Off, SnapshotOptions::default()).unwrap();
        for col in 0..8 {
            let mut unit = CMatrix::zeros(8, 8);
            unit[(col, col)] = c(1.0);
            let out = snap.generator_eigen(&unit);
            for row in 0..8 {
                assert!((out[(row, row)].re - w[(row, col)]).abs() < 1e-14);
            }
            assert!((w[(col, col)] + generic_depopulation_rate(&sys, &b, col).unwrap()).abs() < 1e-14);
        }
        let p = stationary_distribution(&w).unwrap();
        let gibbs = gibbs_populations(&sys.energies, b.inv_temperature());
        for (x, y) in p.iter().zip(&gibbs) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}

#[test]
fn populations_and_coherences_decouple() {
    let b = bath(1e-3);
    let lamb = LambShift::tabulated(&b, 10.0, 401).unwrap();
    for seed in 40..43 {
        let inst = random_instance(seed, 3);
        let h = inst.hamiltonian(0.45).unwrap();
        let snap = build_snapshot(&h, &CouplingSet::independent_sigma_z(3), &b, &lamb, SnapshotOptions::default()).unwrap();
        assert!(block_decoupling_defect(&snap) < 1e-10);
    }
}

#[test]
fn audit_flags_degenerate_spectra() {
    let qs = quantum_signature_instance();
    let energies: Vec<f64> = eigh(&qs.hamiltonian(1.0).unwrap()).0;
    let audit = degeneracy_audit(&energies, 1e-9 * 8.0);
    assert!(!audit.passed());
    assert!(audit.energy_pairs.len() >= 16);

    let model = SingleQubitModel::new(1.0, 1.0, Schedule::Linear).unwrap();
    for s in [0.01, 0.5, 0.99] {
        let e = eigh(&model.hamiltonian(s).unwrap()).0;
        assert!(degeneracy_audit(&e, 1e-9).passed());
    }

    let inst = random_instance(50, 3);
    for j in 1..10 {
        let e = eigh(&inst.hamiltonian(j as f64 / 10.0).unwrap()).0;
        assert!(degeneracy_audit(&e, 1e-9).passed(), "s = {}", j as f64 / 10.0);
    }

    // equally spaced ladder: gaps coincide although levels do not
    let audit = degeneracy_audit(&[0.0, 1.0, 2.0], 1e-9);
    assert!(audit.energy_pairs.is_empty());
    assert_eq!(audit.gap_pairs, vec![((0, 1), (1, 2))]);
}

#[test]
fn degenerate_input_is_refused() {
    let inst = IsingInstance::new(2, vec![0.0, 0.0], vec![], Schedule::Linear, Schedule::Linear).unwrap();
    let h = inst.hamiltonian(0.5).unwrap();
    let cs = CouplingSet::independent_sigma_z(2);
    assert!(matches!(rate_report(&h, &cs, &bath(1e-3), None), Err(aqme_core::Error::Degenerate(_))));
    let sys = Eigensystem::new(&h, &cs).unwrap();
    assert!(pairwise_t2_rate(&sys, &bath(1e-3), 0, 1).is_err());
    assert!(ground_depopulation_rate(&sys, &bath(1e-3)).is_err());
}

#[test]
fn report_csv_layout() {
    let inst = random_instance(60, 2);
    let report = rate_report(&inst.hamiltonian(0.5).unwrap(), &CouplingSet::independent_sigma_z(2), &bath(1e-3), None).unwrap();
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("quantity,a,b,value"));
    assert_eq!(text.lines().count(), 1 + 4 + 12 + 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn pair_rates_are_nonnegative(seed in 0u64..100_000, s in 0.05f64..0.95, n in 2usize..4) {
        let inst = random_instance(seed, n);
        let h = inst.hamiltonian(s).unwrap();
        if let Ok(report) = rate_report(&h, &CouplingSet::independent_sigma_z(n), &bath(1e-3), None) {
            prop_assert!(report.pair_rates.iter().all(|&r| r >= 0.0));
            prop_assert!(report.depopulation.iter().all(|&r| r >= 0.0 && r.is_finite()));
        }
    }
}
