//! Singular-coupling-limit generator: the bare coupling operators are the
//! Lindblad operators, all at the zero-frequency rate γ(0).

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, I};
use crate::spectral_bath::{LambShift, RateFunction};
use crate::wcl_generator::CouplingSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoherenceMode {
    Independent,
    Collective,
    Custom,
}

#[derive(Clone, Debug)]
pub struct SclModel {
    pub couplings: CouplingSet,
    pub mode: DecoherenceMode,
    /// γ(0).
    pub gamma_zero: f64,
    /// Σ S_αβ(0) A_α A_β.
    pub lamb_shift_0: CMatrix,
    /// Σ m_k γ(0) A_k², the anticommutator term.
    decay: CMatrix,
}

impl SclModel {
    pub fn new(couplings: CouplingSet, mode: DecoherenceMode, bath: &dyn RateFunction, lamb: &LambShift) -> Result<Self> {
        let dim = couplings.dim();
        let gamma_zero = bath.gamma(0.0);
        let s0 = if lamb.is_off() { 0.0 } else { lamb.value(0.0)? };
        let mut lamb_shift_0 = CMatrix::zeros(dim, dim);
        let mut decay = CMatrix::zeros(dim, dim);
        for (w, a) in couplings.channels() {
            let sq = a * a;
            lamb_shift_0 += &sq * c(w * s0);
            decay += sq * c(w * gamma_zero);
        }
        Ok(Self { couplings, mode, gamma_zero, lamb_shift_0, decay })
    }

    /// σ^z on each qubit with its own bath.
    pub fn independent_sigma_z(n: usize, bath: &dyn RateFunction, lamb: &LambShift) -> Result<Self> {
        Self::new(CouplingSet::independent_sigma_z(n), DecoherenceMode::Independent, bath, lamb)
    }

    /// Σ σ^z on one common bath.
    pub fn collective_sigma_z(n: usize, bath: &dyn RateFunction, lamb: &LambShift) -> Result<Self> {
        Self::new(CouplingSet::collective_sigma_z(n), DecoherenceMode::Collective, bath, lamb)
    }

    pub fn dim(&self) -> usize {
        self.couplings.dim()
    }

    /// 1/(2γ(0)).
    pub fn t2_computational(&self) -> f64 {
        1.0 / (2.0 * self.gamma_zero)
    }

    /// Σ m_k γ(0) (A_k ρ A_k - ½{A_k², ρ}).
    pub fn apply_scl_dissipator(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.dim() || rho.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: rho.nrows() });
        }
        let mut out = (&self.decay * rho + rho * &self.decay) * c(-0.5);
        for (w, a) in self.couplings.channels() {
            out += a * rho * a * c(w * self.gamma_zero);
        }
        Ok(out)
    }

    /// -i[H + H_LS, ρ] + D(ρ).
    pub fn apply(&self, h: &CMatrix, rho: &CMatrix) -> Result<CMatrix> {
        let total = h + &self.lamb_shift_0;
        let comm = &total * rho - rho * &total;
        Ok(self.apply_scl_dissipator(rho)? - comm * I)
    }
}

/// Decay rate of ρ_ab under independent σ^z dephasing: Hamming(a, b)/T₂⁽ᶜ⁾.
pub fn independent_dephasing_rate(a: usize, b: usize, n: usize, t2c: f64) -> f64 {
    let mask = if n >= usize::BITS as usize { usize::MAX } else { (1usize << n) - 1 };
    ((a ^ b) & mask).count_ones() as f64 / t2c
}

/// Decay rate of ρ_ab under collective σ^z dephasing: (h_a - h_b)²/T₂⁽ᶜ⁾.
pub fn collective_dephasing_rate(a: usize, b: usize, t2c: f64) -> f64 {
    let d = a.count_ones() as f64 - b.count_ones() as f64;
    d * d / t2c
}
