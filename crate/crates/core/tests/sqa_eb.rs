use aqme_core::hamiltonians::{partition_ground_states, quantum_signature_instance, IsingInstance, Schedule};
use aqme_core::sqa_eb::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(seed: u64, n: usize) -> IsingInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut couplings = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            couplings.push((i, j, rng.gen_range(-1.0..1.0)));
        }
    }
    IsingInstance::new(n, fields, couplings, Schedule::Linear, Schedule::Linear).unwrap()
}

fn qsig_config(sweeps: usize, runs: usize) -> QmcConfig {
    QmcConfig { beta: 10.0, n_tau: 64, sweeps, alpha: 0.0, runs, seed: 3 }
}

#[test]
fn trotter_coupling_inversion() {
    // tanh x = e^{-2} gives J⊥ = 1
    let x = (-2f64).exp().atanh();
    let n_tau = 64;
    let j = j_perp(x * n_tau as f64, 1.0, n_tau).unwrap();
    assert!((j - 1.0).abs() < 1e-14);
    assert!(j_perp(1.0, 1e6, 1).unwrap() >= 0.0);
    assert!(j_perp(1.0, 40.0, 4).unwrap() > 0.0);
    assert!(j_perp(1.0, 0.0, 4).is_err());
    assert!(j_perp(1.0, -1.0, 4).is_err());
}

#[test]
fn kernel_is_symmetric() {
    for n_tau in [2, 7, 64] {
        let k = bath_kernel(n_tau);
        assert_eq!(k[0], 0.0);
        for d in 1..n_tau {
            assert!((k[d] - k[n_tau - d]).abs() < 1e-12 * k[d]);
            assert!(k[d] >= 1.0);
        }
    }
}

#[test]
fn incremental_delta_matches_full_action() {
    let inst = random_instance(1, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let lattice = TrotterLattice::random(3, 4, &mut rng);
    let mut sampler = Sampler::new(&inst, lattice).unwrap();
    let k = SliceCouplings { ising: 0.37, j_perp: 0.81, alpha: 0.23 };
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let (i, t) = (rng.gen_range(0..3), rng.gen_range(0..4));
        let before = sampler.action(&inst, &k);
        let delta = sampler.action_delta(i, t, &k);
        sampler.flip(i, t);
        let after = sampler.action(&inst, &k);
        worst = worst.max((after - before - delta).abs());
    }
    assert!(worst < 1e-10, "{worst:e}");
}

#[test]
fn flip_twice_negates_delta() {
    let inst = random_instance(4, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sampler = Sampler::new(&inst, TrotterLattice::random(4, 8, &mut rng)).unwrap();
    let k = SliceCouplings { ising: 0.2, j_perp: 1.1, alpha: 0.05 };
    for _ in 0..200 {
        let (i, t) = (rng.gen_range(0..4), rng.gen_range(0..8));
        let d1 = sampler.action_delta(i, t, &k);
        sampler.flip(i, t);
        let d2 = sampler.action_delta(i, t, &k);
        assert_eq!(d1, -d2);
    }
}

#[test]
fn classical_limit_delta_is_scaled_ising_cost() {
    let inst = random_instance(6, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lattice = TrotterLattice::random(3, 5, &mut rng);
    let sampler = Sampler::new(&inst, lattice.clone()).unwrap();
    let scale = 10.0 / 5.0;
    let k = SliceCouplings { ising: scale, j_perp: 0.0, alpha: 0.0 };
    for i in 0..3 {
        for t in 0..5 {
            let mut slice = lattice.slice(t);
            let e0 = inst.spin_energy(&slice);
            slice[i] = -slice[i];
            let e1 = inst.spin_energy(&slice);
            assert!((sampler.action_delta(i, t, &k) - scale * (e1 - e0)).abs() < 1e-12);
        }
    }
}

#[test]
fn trotter_ring_matches_transfer_matrix() {
    // a longitudinal field keeps the fixed-scan chain ergodic; at zero field
    // every Δ = 0 flip is deterministic and the scan cycles
    let h = 0.7;
    let inst = IsingInstance::new(1, vec![h], vec![], Schedule::Linear, Schedule::Linear).unwrap();
    let n_tau = 8;
    let (j, ising) = (0.6, 0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sampler = Sampler::new(&inst, TrotterLattice::random(1, n_tau, &mut rng)).unwrap();
    let k = SliceCouplings { ising, j_perp: j, alpha: 0.0 };
    for _ in 0..1000 {
        sampler.sweep(&k, &mut rng);
    }
    let sweeps = 200_000;
    let (mut corr, mut mag) = (0.0, 0.0);
    for _ in 0..sweeps {
        sampler.sweep(&k, &mut rng);
        let l = sampler.lattice();
        corr += (0..n_tau).map(|t| (l.spin(0, t) * l.spin(0, (t + 1) % n_tau)) as f64).sum::<f64>() / n_tau as f64;
        mag += (0..n_tau).map(|t| l.spin(0, t) as f64).sum::<f64>() / n_tau as f64;
    }
    corr /= sweeps as f64;
    mag /= sweeps as f64;

    let f = ising * h;
    let t = DMatrix::from_fn(2, 2, |a, b| {
        let (x, y) = (1.0 - 2.0 * a as f64, 1.0 - 2.0 * b as f64);
        (j * x * y + 0.5 * f * (x + y)).exp()
    });
    let sz = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
    let tn = |p: usize| (0..p).fold(DMatrix::identity(2, 2), |acc, _| acc * &t);
    let z = tn(n_tau).trace();
    let exact_corr = (&sz * &t * &sz * tn(n_tau - 1)).trace() / z;
    let exact_mag = (&sz * tn(n_tau)).trace() / z;
    assert!((corr - exact_corr).abs() < 5e-3, "{corr} vs {exact_corr}");
    assert!((mag - exact_mag).abs() < 5e-3, "{mag} vs {exact_mag}");
}

#[test]
fn metropolis_samples_the_boltzmann_distribution() {
    let inst = IsingInstance::new(2, vec![0.3, -0.2], vec![(0, 1, 0.5)], Schedule::Linear, Schedule::Linear).unwrap();
    let k = SliceCouplings { ising: 0.8, j_perp: 0.4, alpha: 0.2 };
    let states = 16;
    let weights: Vec<f64> = (0..states)
        .map(|x: usize| {
            let spins = (0..4).map(|b| if (x >> b) & 1 == 1 { -1 } else { 1 }).collect();
            let s = Sampler::new(&inst, TrotterLattice::from_spins(2, 2, spins).unwrap()).unwrap();
            (-s.action(&inst, &k)).exp()
        })
        .collect();
    let z: f64 = weights.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut sampler = Sampler::new(&inst, TrotterLattice::random(2, 2, &mut rng)).unwrap();
    let sweeps = 1_000_000;
    let mut counts = vec![0usize; states];
    for _ in 0..sweeps {
        sampler.sweep(&k, &mut rng);
        let x = sampler.lattice().spins().iter().enumerate().fold(0, |acc, (b, &m)| acc | (usize::from(m < 0) << b));
        counts[x] += 1;
    }
    for x in 0..states {
        let p = weights[x] / z;
        let sigma = (p * (1.0 - p) / sweeps as f64).sqrt();
        let freq = counts[x] as f64 / sweeps as f64;
        assert!((freq - p).abs() < 3.0 * sigma, "state {x}: {freq} vs {p} (σ = {sigma:e})");
    }
}

#[test]
fn acceptance_rate_is_strictly_between_zero_and_one() {
    let inst = random_instance(10, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut sampler = Sampler::new(&inst, TrotterLattice::random(4, 16, &mut rng)).unwrap();
    let cfg = QmcConfig { beta: 5.0, n_tau: 16, sweeps: 1, alpha: 0.01, runs: 1, seed: 0 };
    let k = SliceCouplings::at(&inst, &cfg, 0.5).unwrap();
    let accepted: usize = (0..100).map(|_| sampler.sweep(&k, &mut rng)).sum();
    assert!(accepted > 0 && accepted < 100 * 64);
}

#[test]
fn quantum_annealing_limit_finds_ground_states() {
    let inst = quantum_signature_instance();
    let (_, gs) = inst.ground_states(1e-9);
    let part = partition_ground_states(&gs);
    let est = pi_pc_experiment(&inst, &part, &qsig_config(100, 200), &[0.0]).unwrap();
    assert!(est[0].gs_rate > 0.9);
    assert!(est[0].ratio < 1.0);
}

#[test]
fn strong_bath_locks_slices() {
    let inst = quantum_signature_instance();
    let (_, gs) = inst.ground_states(1e-9);
    let part = partition_ground_states(&gs);
    let cfg = qsig_config(100, 100);
    let est = pi_pc_experiment(&inst, &part, &cfg, &[0.0, 1e-2]).unwrap();
    assert!(est[1].mean_agreement > 0.99);
    assert!(est[1].mean_agreement > est[0].mean_agreement);
}

#[test]
fn single_sweep_does_not_equilibrate() {
    let inst = quantum_signature_instance();
    let (_, gs) = inst.ground_states(1e-9);
    let part = partition_ground_states(&gs);
    let est = pi_pc_experiment(&inst, &part, &qsig_config(1, 300), &[0.0]).unwrap();
    assert!(est[0].gs_rate < 0.5);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let inst = quantum_signature_instance();
    let (_, gs) = inst.ground_states(1e-9);
    let part = partition_ground_states(&gs);
    let cfg = qsig_config(20, 64);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| pi_pc_experiment(&inst, &part, &cfg, &[0.0, 5e-4]).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    let mut csv_a = Vec::new();
    let mut csv_b = Vec::new();
    write_ratio_csv(&a, &mut csv_a).unwrap();
    write_ratio_csv(&b, &mut csv_b).unwrap();
    assert_eq!(csv_a, csv_b);
    let text = String::from_utf8(csv_a).unwrap();
    assert_eq!(text.lines().next(), Some("alpha,p_i,p_c,ratio,err_2sigma,gs_rate,runs"));
}

#[test]
fn invalid_inputs_are_rejected() {
    let inst = quantum_signature_instance();
    let (_, gs) = inst.ground_states(1e-9);
    let part = partition_ground_states(&gs);
    assert!(pi_pc_experiment(&inst, &part, &qsig_config(10, 10), &[]).is_err());
    assert!(pi_pc_experiment(&inst, &part, &qsig_config(10, 10), &[-1.0]).is_err());
    let bad = QmcConfig { n_tau: 1, ..qsig_config(10, 10) };
    assert!(bad.validate().is_err());
    assert!(TrotterLattice::from_spins(2, 2, vec![1, 0, 1, 1]).is_err());
    assert!(Sampler::new(&inst, TrotterLattice::from_spins(1, 2, vec![1, 1]).unwrap()).is_err());
}

#[test]
fn missing_cluster_hits_are_flagged() {
    // a single sweep from a random lattice essentially never lands in the
    // cluster when the "cluster" is one arbitrary excited configuration
    let inst = quantum_signature_instance();
    let part = aqme_core::hamiltonians::GroundPartition { cluster: vec![0b0101_1010], isolated: vec![0xFF], separation: 4 };
    let est = pi_pc_experiment(&inst, &part, &qsig_config(50, 20), &[0.0]).unwrap();
    assert!(est[0].cluster_empty);
    assert!(est[0].ratio.is_infinite());
}

proptest! {
    #[test]
    fn trotter_coupling_decreases_with_field(a in 1e-3f64..10.0, da in 1e-3f64..1.0) {
        let lo = j_perp(2.0, a, 16).unwrap();
        let hi = j_perp(2.0, a + da, 16).unwrap();
        prop_assert!(lo > 0.0 && hi > 0.0);
        prop_assert!(hi < lo);
    }

    #[test]
    fn slice_labels_roundtrip(spins in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 8)) {
        let lattice = TrotterLattice::from_spins(4, 2, spins.clone()).unwrap();
        for t in 0..2 {
            let label = lattice.slice_label(t);
            for i in 0..4 {
                let bit = (label >> (3 - i)) & 1;
                prop_assert_eq!(bit == 1, spins[i * 2 + t] < 0);
            }
        }
    }
}
