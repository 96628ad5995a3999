#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use aqme_core::dynamics::{evolve, DensityMatrix, Dynamics, EvolveOptions};
use aqme_core::hamiltonians::{IsingInstance, Schedule};
use aqme_core::linalg::*;
use aqme_core::spectral_bath::{LambShift, RateFunction, SpectralModel};
use aqme_core::wcl_generator::{CouplingSet, SnapshotOptions};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bath(coupling: f64) -> SpectralModel {
    SpectralModel::new(coupling, 1.0 / 2.23, 8.0 * PI).unwrap()
}

/// Transverse-field instance with uniform random fields and all-to-all couplings.
pub fn random_instance(seed: u64, n: usize) -> IsingInstance {
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

pub fn random_state(seed: u64, d: usize) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = CMatrix::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let p = &m * m.adjoint();
    let t = trace(&p);
    p / t
}

/// γ(0) scaled by `factor`; every other frequency untouched.
pub struct PerturbedZero {
    pub inner: SpectralModel,
    pub factor: f64,
}

impl RateFunction for PerturbedZero {
    fn gamma(&self, omega: f64) -> f64 {
        if omega == 0.0 {
            self.factor * self.inner.gamma(0.0)
        } else {
            self.inner.gamma(omega)
        }
    }

    fn inv_temperature(&self) -> f64 {
        self.inner.inv_temperature()
    }
}

/// Decay rates of every eigenbasis coherence, fitted from a WCL trajectory
/// under the frozen Hamiltonian `h` up to time `t`.
pub fn fitted_pair_rates(h: &CMatrix, couplings: &CouplingSet, bath: SpectralModel, seed: u64, t: f64) -> DMatrix<f64> {
    let d = h.nrows();
    let (_, basis) = eigh(h);
    let rho0 = random_state(seed, d);
    let dynamics = Dynamics::Wcl {
        couplings: couplings.clone(),
        bath: Arc::new(bath),
        lamb: LambShift::Off,
        snapshot: SnapshotOptions::default(),
    };
    let opts = EvolveOptions::final_only().with_tolerances(1e-11, 1e-14);
    let hh = h.clone();
    let traj = evolve(move |_| Ok(hh.clone()), &dynamics, &DensityMatrix::new(rho0.clone()).unwrap(), t, &opts).unwrap();
    let start = basis.adjoint() * &rho0 * &basis;
    let end = basis.adjoint() * traj.final_state().matrix() * &basis;
    DMatrix::from_fn(d, d, |a, b| {
        if a == b {
            0.0
        } else {
            -(end[(a, b)].norm() / start[(a, b)].norm()).ln() / t
        }
    })
}
