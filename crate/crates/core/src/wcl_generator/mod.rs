//! Weak-coupling-limit adiabatic generator built from the instantaneous eigenbasis.

mod coupling;

pub use coupling::{CouplingSet, Mixing};

use crate::error::{Error, Result};
use crate::hamiltonians::{SingleQubitModel, DEGENERACY_TOL};
use crate::linalg::{c, eigh, CMatrix, C64, I};
use crate::spectral_bath::{LambShift, RateFunction};

/// Sparse operator Σ v |a⟩⟨b| in the energy eigenbasis.
pub type SparseOp = Vec<(usize, usize, C64)>;

/// Lindblad operators sharing one Bohr frequency ω = ε_b - ε_a.
#[derive(Clone, Debug)]
pub struct BohrGroup {
    pub omega: f64,
    pub rate: f64,
    pub lamb_shift: f64,
    /// One sparse operator per coupling channel.
    pub operators: Vec<SparseOp>,
}

#[derive(Clone, Copy, Debug)]
pub struct SnapshotOptions {
    /// Bohr frequencies closer than this times ‖H‖ share a group.
    pub bin_tol: f64,
    /// Accept degenerate levels instead of failing. Only meaningful for
    /// static problems, where eigenvector continuity is irrelevant.
    pub allow_degenerate: bool,
}

impl Default for SnapshotOptions {
    fn default() -> Self {
        Self { bin_tol: DEGENERACY_TOL, allow_degenerate: false }
    }
}

/// The generator at one instant: eigenbasis, grouped Lindblad operators,
/// Lamb-shift Hamiltonian and the anticommutator matrix Σ γ L†L.
#[derive(Clone, Debug)]
pub struct GeneratorSnapshot {
    pub energies: Vec<f64>,
    /// Eigenvectors as columns.
    pub basis: CMatrix,
    pub groups: Vec<BohrGroup>,
    /// Channel weights from the bath correlation matrix.
    pub weights: Vec<f64>,
    /// H_LS in the eigenbasis.
    pub lamb_shift: CMatrix,
    /// Σ_ω γ(ω) Σ_k m_k L_k†L_k in the eigenbasis.
    pub decay: CMatrix,
    /// Groups with ω ≠ 0 holding more than one level pair.
    pub merged_bins: usize,
}

/// Build the snapshot for Hamiltonian `h`.
pub fn build_snapshot(
    h: &CMatrix,
    couplings: &CouplingSet,
    bath: &dyn RateFunction,
    lamb: &LambShift,
    opts: SnapshotOptions,
) -> Result<GeneratorSnapshot> {
    let dim = h.nrows();
    if couplings.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: couplings.dim() });
    }
    let (energies, basis) = eigh(h);
    let norm = energies.iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
    let tol = opts.bin_tol * norm;
    if !opts.allow_degenerate {
        if let Some(k) = energies.windows(2).position(|w| w[1] - w[0] < DEGENERACY_TOL * norm.max(f64::MIN_POSITIVE)) {
            return Err(Error::Degenerate(format!(
                "levels {k} and {} differ by {:e}",
                k + 1,
                energies[k + 1] - energies[k]
            )));
        }
    }
    let channels: Vec<CMatrix> = couplings
        .channels()
        .iter()
        .map(|(_, a)| basis.adjoint() * a * &basis)
        .collect();
    let weights: Vec<f64> = couplings.channels().iter().map(|(w, _)| *w).collect();
    let op_scale = channels.iter().fold(0.0f64, |acc, a| a.iter().fold(acc, |m, z| m.max(z.norm())));
    let drop = 1e-14 * op_scale;

    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            pairs.push((energies[b] - energies[a], a, b));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut groups = Vec::new();
    let mut merged_bins = 0;
    let mut start = 0;
    while start < pairs.len() {
        let anchor = pairs[start].0;
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 - anchor <= tol {
            end += 1;
        }
        let bin = &pairs[start..end];
        let omega = bin.iter().map(|p| p.0).sum::<f64>() / bin.len() as f64;
        let is_zero = omega.abs() <= tol;
        let operators: Vec<SparseOp> = channels
            .iter()
            .map(|a| {
                bin.iter()
                    .filter_map(|&(_, i, j)| {
                        let v = a[(i, j)];
                        (v.norm() > drop).then_some((i, j, v))
                    })
                    .collect()
            })
            .collect();
        if operators.iter().any(|op| !op.is_empty()) {
            let omega = if is_zero { 0.0 } else { omega };
            if !is_zero && bin.len() > 1 {
                merged_bins += 1;
            }
            let lamb_shift = if lamb.is_off() { 0.0 } else { lamb.value(omega)? };
            groups.push(BohrGroup { omega, rate: bath.gamma(omega), lamb_shift, operators });
        }
        start = end;
    }
    if merged_bins > 0 {
        log::warn!("{merged_bins} Bohr-frequency bins merge distinct level pairs");
    }

    let mut lamb_shift = CMatrix::zeros(dim, dim);
    let mut decay = CMatrix::zeros(dim, dim);
    for g in &groups {
        for (w, op) in weights.iter().zip(&g.operators) {
            // (L†L)_{bd} = Σ_a conj(L_ab) L_ad
            for &(a1, b1, v1) in op {
                for &(a2, b2, v2) in op {
                    if a1 == a2 {
                        let term = v1.conj() * v2;
                        decay[(b1, b2)] += term * (w * g.rate);
                        lamb_shift[(b1, b2)] += term * (w * g.lamb_shift);
                    }
                }
            }
        }
    }
    Ok(GeneratorSnapshot { energies, basis, groups, weights, lamb_shift, decay, merged_bins })
}

impl GeneratorSnapshot {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn to_eigenbasis(&self, rho: &CMatrix) -> CMatrix {
        self.basis.adjoint() * rho * &self.basis
    }

    pub fn to_lab(&self, rho: &CMatrix) -> CMatrix {
        &self.basis * rho * self.basis.adjoint()
    }

    /// Dense L for group `g`, channel `k`, in the eigenbasis.
    pub fn lindblad_operator(&self, g: usize, k: usize) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for &(a, b, v) in &self.groups[g].operators[k] {
            m[(a, b)] += v;
        }
        m
    }

    /// Dissipator acting on an eigenbasis matrix.
    pub fn dissipator_eigen(&self, rho: &CMatrix) -> CMatrix {
        let mut out = (&self.decay * rho + rho * &self.decay) * c(-0.5);
        for g in &self.groups {
            if g.rate == 0.0 {
                continue;
            }
            for (w, op) in self.weights.iter().zip(&g.operators) {
                let scale = w * g.rate;
                // L ρ L† = Σ v conj(v') ρ_{b b'} |a⟩⟨a'|
                for &(a1, b1, v1) in op {
                    for &(a2, b2, v2) in op {
                        out[(a1, a2)] += v1 * v2.conj() * rho[(b1, b2)] * scale;
                    }
                }
            }
        }
        out
    }

    /// Full generator -i[H + H_LS, ρ] + D(ρ) on an eigenbasis matrix.
    pub fn generator_eigen(&self, rho: &CMatrix) -> CMatrix {
        let mut out = self.dissipator_eigen(rho);
        let comm = &self.lamb_shift * rho - rho * &self.lamb_shift;
        out -= comm * I;
        let d = self.dim();
        for a in 0..d {
            for b in 0..d {
                out[(a, b)] -= I * (self.energies[a] - self.energies[b]) * rho[(a, b)];
            }
        }
        out
    }

    /// Dissipator on a lab-frame density matrix.
    pub fn apply_dissipator(&self, rho: &CMatrix) -> CMatrix {
        self.to_lab(&self.dissipator_eigen(&self.to_eigenbasis(rho)))
    }

    /// Generator on a lab-frame density matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.to_lab(&self.generator_eigen(&self.to_eigenbasis(rho)))
    }

    /// Lamb-shift Hamiltonian in the lab frame.
    pub fn lamb_shift_lab(&self) -> CMatrix {
        self.to_lab(&self.lamb_shift)
    }
}

/// Coefficients of the single-qubit adiabatic equations, scaled by t_f.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleQubitCoefficients {
    /// Relaxation rate into the ground state, t_f ζ² γ(Δ).
    pub f_plus: f64,
    /// Excitation rate, t_f ζ² γ(-Δ).
    pub f_minus: f64,
    /// Lamb-shifted precession frequency.
    pub omega: f64,
    /// Off-diagonal decay rate.
    pub sigma: f64,
}

/// F± = t_f ζ²γ(±Δ), Ω = t_f[Δ + (S(Δ) - S(-Δ))ζ²],
/// Σ = t_f[2γ(0)(θΓ/λ)² + ½(γ(Δ) + γ(-Δ))ζ²], for a σ^z coupling.
pub fn single_qubit_coefficients(
    model: &SingleQubitModel,
    s: f64,
    bath: &dyn RateFunction,
    lamb: &LambShift,
    t_f: f64,
) -> Result<SingleQubitCoefficients> {
    let th = model.theta(s)?;
    let lam = model.lambda_at_theta(th);
    let delta = model.omega_x * lam;
    let zeta = (1.0 - th) / lam;
    let diag = th * model.ratio() / lam;
    let z2 = zeta * zeta;
    let (gp, gm) = (bath.gamma(delta), bath.gamma(-delta));
    let shift = if lamb.is_off() { 0.0 } else { lamb.value(delta)? - lamb.value(-delta)? };
    Ok(SingleQubitCoefficients {
        f_plus: t_f * z2 * gp,
        f_minus: t_f * z2 * gm,
        omega: t_f * (delta + shift * z2),
        sigma: t_f * (2.0 * bath.gamma(0.0) * diag * diag + 0.5 * (gp + gm) * z2),
    })
}
