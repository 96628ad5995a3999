//! Simulated quantum annealing on the Trotterized transverse-field Ising
//! model, optionally with an Ohmic bath integrated out into a long-range
//! imaginary-time coupling.

mod experiment;

pub use experiment::{anneal_run, pi_pc_experiment, write_ratio_csv, RatioEstimate, RunOutcome};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::IsingInstance;

/// Largest schedule point used for the Trotter coupling; A(1) = 0 would make it infinite.
pub const S_CLAMP: f64 = 1.0 - 1e-6;

/// J⊥ = -½ ln tanh(βA/N_τ), evaluated as atanh(e^{-2x}) to stay positive for large x.
pub fn j_perp(beta: f64, a: f64, n_tau: usize) -> Result<f64> {
    let x = beta * a / n_tau as f64;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { what: "βA/N_τ", value: x });
    }
    Ok((-2.0 * x).exp().atanh())
}

/// 1/sin²(πk/N_τ) for k = 0..N_τ, with the k = 0 entry zero.
pub fn bath_kernel(n_tau: usize) -> Vec<f64> {
    (0..n_tau)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                let s = (std::f64::consts::PI * k as f64 / n_tau as f64).sin();
                1.0 / (s * s)
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QmcConfig {
    /// Inverse temperature of the sampled Gibbs state.
    pub beta: f64,
    pub n_tau: usize,
    pub sweeps: usize,
    /// System-bath strength.
    #[serde(default)]
    pub alpha: f64,
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
}

impl QmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::Domain { what: "beta", value: self.beta });
        }
        if self.n_tau < 2 {
            return Err(Error::InvalidParameter(format!("n_tau = {} must be at least 2", self.n_tau)));
        }
        if self.sweeps == 0 || self.runs == 0 {
            return Err(Error::InvalidParameter("sweeps and runs must be positive".into()));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::Domain { what: "alpha", value: self.alpha });
        }
        Ok(())
    }
}

/// Classical spins μ_{i,τ}, periodic in τ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrotterLattice {
    n: usize,
    n_tau: usize,
    spins: Vec<i8>,
}

impl TrotterLattice {
    pub fn random<R: Rng>(n: usize, n_tau: usize, rng: &mut R) -> Self {
        let spins = (0..n * n_tau).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        Self { n, n_tau, spins }
    }

    /// Spins laid out qubit-major: entry `i * n_tau + τ`.
    pub fn from_spins(n: usize, n_tau: usize, spins: Vec<i8>) -> Result<Self> {
        if n_tau < 2 {
            return Err(Error::InvalidParameter("n_tau must be at least 2".into()));
        }
        if spins.len() != n * n_tau {
            return Err(Error::DimensionMismatch { expected: n * n_tau, got: spins.len() });
        }
        if spins.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::InvalidParameter("spins must be ±1".into()));
        }
        Ok(Self { n, n_tau, spins })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_tau(&self) -> usize {
        self.n_tau
    }

    pub fn spin(&self, i: usize, tau: usize) -> i8 {
        self.spins[i * self.n_tau + tau]
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn slice(&self, tau: usize) -> Vec<i8> {
        (0..self.n).map(|i| self.spin(i, tau)).collect()
    }

    /// Basis label of slice τ (qubit i in bit n-1-i, spin up = 0).
    pub fn slice_label(&self, tau: usize) -> usize {
        (0..self.n).fold(0, |acc, i| (acc << 1) | usize::from(self.spin(i, tau) < 0))
    }

    /// Mean over qubits of the majority fraction along τ; 1 when every
    /// qubit is frozen across slices.
    pub fn slice_agreement(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            let up = (0..self.n_tau).filter(|&t| self.spin(i, t) > 0).count();
            total += up.max(self.n_tau - up) as f64 / self.n_tau as f64;
        }
        total / self.n as f64
    }
}

/// Couplings of the action at one schedule point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceCouplings {
    /// βB(s)/N_τ.
    pub ising: f64,
    pub j_perp: f64,
    pub alpha: f64,
}

impl SliceCouplings {
    pub fn at(instance: &IsingInstance, config: &QmcConfig, s: f64) -> Result<Self> {
        let b = instance.b(s)?;
        let a = instance.a(s.min(S_CLAMP))?;
        Ok(Self {
            ising: config.beta * b / config.n_tau as f64,
            j_perp: j_perp(config.beta, a, config.n_tau)?,
            alpha: config.alpha,
        })
    }
}

/// Lattice plus the cached bath field Σ_{τ'≠τ} K(τ-τ') μ_{i,τ'}.
#[derive(Clone, Debug)]
pub struct Sampler {
    lattice: TrotterLattice,
    fields: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
    kernel: Vec<f64>,
    /// Dropped while sweeping at α = 0 and rebuilt on demand.
    bath_field: Option<Vec<f64>>,
}

impl Sampler {
    pub fn new(instance: &IsingInstance, lattice: TrotterLattice) -> Result<Self> {
        if lattice.n != instance.n {
            return Err(Error::DimensionMismatch { expected: instance.n, got: lattice.n });
        }
        let mut neighbors = vec![Vec::new(); instance.n];
        for &(i, j, v) in &instance.couplings {
            neighbors[i].push((j, v));
            neighbors[j].push((i, v));
        }
        let kernel = bath_kernel(lattice.n_tau);
        let mut sampler = Self { fields: instance.fields.clone(), neighbors, kernel, bath_field: None, lattice };
        sampler.bath_field = Some(sampler.compute_bath_field());
        Ok(sampler)
    }

    fn bath_field_at(&self, i: usize, tau: usize) -> f64 {
        let nt = self.lattice.n_tau;
        (0..nt).map(|u| self.kernel[(tau + nt - u) % nt] * self.lattice.spin(i, u) as f64).sum()
    }

    fn compute_bath_field(&self) -> Vec<f64> {
        let (n, nt) = (self.lattice.n, self.lattice.n_tau);
        (0..n * nt).map(|idx| self.bath_field_at(idx / nt, idx % nt)).collect()
    }

    pub fn lattice(&self) -> &TrotterLattice {
        &self.lattice
    }

    /// Change of the dimensionless action when μ_{i,τ} flips.
    pub fn action_delta(&self, i: usize, tau: usize, k: &SliceCouplings) -> f64 {
        let nt = self.lattice.n_tau;
        let row = &self.lattice.spins[i * nt..(i + 1) * nt];
        let mu = row[tau] as f64;
        let mut local = self.fields[i];
        for &(j, v) in &self.neighbors[i] {
            local -= v * self.lattice.spins[j * nt + tau] as f64;
        }
        let up = row[if tau + 1 == nt { 0 } else { tau + 1 }];
        let down = row[if tau == 0 { nt - 1 } else { tau - 1 }];
        let mut delta = 2.0 * mu * (k.ising * local + k.j_perp * (up + down) as f64);
        if k.alpha != 0.0 {
            let field = match &self.bath_field {
                Some(f) => f[i * nt + tau],
                None => self.bath_field_at(i, tau),
            };
            delta += 2.0 * k.alpha * mu * field;
        }
        delta
    }

    /// Flip μ_{i,τ} unconditionally.
    pub fn flip(&mut self, i: usize, tau: usize) {
        let nt = self.lattice.n_tau;
        let idx = i * nt + tau;
        let old = self.lattice.spins[idx];
        self.lattice.spins[idx] = -old;
        if let Some(field) = &mut self.bath_field {
            let change = -2.0 * old as f64;
            let row = &mut field[i * nt..(i + 1) * nt];
            // K depends on |u - τ| mod N_τ; walk the kernel from offset -τ
            let (before, after) = row.split_at_mut(tau);
            for (f, k) in after.iter_mut().zip(&self.kernel) {
                *f += change * k;
            }
            for (f, k) in before.iter_mut().zip(&self.kernel[nt - tau..]) {
                *f += change * k;
            }
        }
    }

    /// Full action, for checking incremental updates.
    pub fn action(&self, instance: &IsingInstance, k: &SliceCouplings) -> f64 {
        let (n, nt) = (self.lattice.n, self.lattice.n_tau);
        let mut total = 0.0;
        for t in 0..nt {
            total += k.ising * instance.spin_energy(&self.lattice.slice(t));
        }
        for i in 0..n {
            for t in 0..nt {
                let mu = self.lattice.spin(i, t) as f64;
                total -= k.j_perp * mu * self.lattice.spin(i, (t + 1) % nt) as f64;
                for u in t + 1..nt {
                    total -= k.alpha * mu * self.lattice.spin(i, u) as f64 * self.kernel[u - t];
                }
            }
        }
        total
    }

    /// One Metropolis sweep over every (i, τ) in qubit-major order; returns
    /// the number of accepted flips.
    pub fn sweep<R: Rng>(&mut self, k: &SliceCouplings, rng: &mut R) -> usize {
        if k.alpha == 0.0 {
            self.bath_field = None;
        } else if self.bath_field.is_none() {
            self.bath_field = Some(self.compute_bath_field());
        }
        let mut accepted = 0;
        for i in 0..self.lattice.n {
            for t in 0..self.lattice.n_tau {
                let delta = self.action_delta(i, t, k);
                if delta <= 0.0 || rng.gen::<f64>() < (-delta).exp() {
                    self.flip(i, t);
                    accepted += 1;
                }
            }
        }
        accepted
    }
}
