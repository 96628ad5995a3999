use std::io::Write;
use std::sync::Arc;

use super::density::DensityMatrix;
use super::integrator::{Dopri5, IntegrationStats, StepControl};
use crate::error::{Error, Result};
use crate::hamiltonians::SingleQubitModel;
use crate::linalg::{c, eigh, fix_phase, pack, unpack, CMatrix, C64, I};
use crate::scl_generator::SclModel;
use crate::spectral_bath::{LambShift, RateFunction};
use crate::wcl_generator::{build_snapshot, single_qubit_coefficients, CouplingSet, SnapshotOptions};

/// Abort thresholds along a trajectory.
pub const MAX_TRACE_DRIFT: f64 = 1e-6;
pub const MIN_EIGENVALUE_FLOOR: f64 = -1e-4;

/// Which generator drives the evolution.
#[derive(Clone)]
pub enum Dynamics {
    Closed,
    Wcl {
        couplings: CouplingSet,
        bath: Arc<dyn RateFunction>,
        lamb: LambShift,
        snapshot: SnapshotOptions,
    },
    Scl(SclModel),
}

impl std::fmt::Debug for Dynamics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dynamics::Closed => write!(f, "Closed"),
            Dynamics::Wcl { .. } => write!(f, "Wcl"),
            Dynamics::Scl(_) => write!(f, "Scl"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub control: StepControl,
    /// Schedule points at which the state is recorded; sorted, within [0, 1].
    pub record: Vec<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { control: StepControl::default(), record: uniform_grid(101) }
    }
}

impl EvolveOptions {
    /// Record only the final state.
    pub fn final_only() -> Self {
        Self { record: vec![1.0], ..Self::default() }
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.control.rtol = rtol;
        self.control.atol = atol;
        self
    }
}

/// `points` equally spaced values covering [0, 1].
pub fn uniform_grid(points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![1.0];
    }
    (0..points).map(|j| j as f64 / (points - 1) as f64).collect()
}

/// Recorded states along s = t/t_f with diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t_f: f64,
    pub s: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Population of the instantaneous ground state.
    pub p_gs: Vec<f64>,
    /// ⟨ε₁(s)|ρ|ε₀(s)⟩ in the instantaneous eigenbasis.
    pub coherence: Vec<C64>,
    pub trace_drift: Vec<f64>,
    pub min_eig: Vec<f64>,
    pub hermiticity: Vec<f64>,
    pub stats: IntegrationStats,
}

impl Trajectory {
    fn new(t_f: f64) -> Self {
        Self {
            t_f,
            s: Vec::new(),
            states: Vec::new(),
            p_gs: Vec::new(),
            coherence: Vec::new(),
            trace_drift: Vec::new(),
            min_eig: Vec::new(),
            hermiticity: Vec::new(),
            stats: IntegrationStats::default(),
        }
    }

    fn record(&mut self, s: f64, rho: CMatrix, basis: &CMatrix) -> Result<()> {
        let state = DensityMatrix::from_unchecked(rho);
        let drift = state.trace_drift();
        let floor = state.min_eigenvalue();
        if drift > MAX_TRACE_DRIFT {
            return Err(Error::Integration { s, reason: format!("trace drift {drift:e} exceeds {MAX_TRACE_DRIFT:e}") });
        }
        if floor < MIN_EIGENVALUE_FLOOR {
            return Err(Error::Integration { s, reason: format!("positivity floor {floor:e} below {MIN_EIGENVALUE_FLOOR:e}") });
        }
        let p = state.population(basis, 0);
        let coh = if basis.ncols() > 1 {
            (basis.column(1).adjoint() * state.matrix() * basis.column(0))[(0, 0)]
        } else {
            C64::new(0.0, 0.0)
        };
        self.s.push(s);
        self.p_gs.push(p);
        self.coherence.push(coh);
        self.trace_drift.push(drift);
        self.min_eig.push(floor);
        self.hermiticity.push(state.hermiticity_defect());
        self.states.push(state);
        Ok(())
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectories record at least one point")
    }

    pub fn final_p_gs(&self) -> f64 {
        *self.p_gs.last().expect("trajectories record at least one point")
    }

    /// Accumulated local error estimate of the integrator.
    pub fn error_estimate(&self) -> f64 {
        self.stats.error_estimate
    }

    /// CSV with columns `s,p_gs,re_offdiag,im_offdiag,trace_drift,min_eig`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "s,p_gs,re_offdiag,im_offdiag,trace_drift,min_eig")?;
        for j in 0..self.s.len() {
            writeln!(
                out,
                "{:.10},{:.12e},{:.12e},{:.12e},{:.3e},{:.3e}",
                self.s[j], self.p_gs[j], self.coherence[j].re, self.coherence[j].im, self.trace_drift[j], self.min_eig[j]
            )?;
        }
        Ok(())
    }
}

fn gauge_fixed_basis(h: &CMatrix) -> CMatrix {
    let (_, mut v) = eigh(h);
    for col in 0..v.ncols() {
        fix_phase(&mut v, col);
    }
    v
}

fn check_record(record: &[f64]) -> Result<()> {
    if record.is_empty() {
        return Err(Error::InvalidParameter("no record points".into()));
    }
    if record.iter().any(|&s| !(0.0..=1.0).contains(&s)) || record.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("record points must be increasing within [0, 1]".into()));
    }
    Ok(())
}

/// Integrate dρ/ds = t_f(-i[H(s) + H_LS, ρ] + D_s[ρ]) from s = 0 to 1.
pub fn evolve<H>(hamiltonian: H, dynamics: &Dynamics, rho0: &DensityMatrix, t_f: f64, opts: &EvolveOptions) -> Result<Trajectory>
where
    H: Fn(f64) -> Result<CMatrix>,
{
    if !(t_f > 0.0) || !t_f.is_finite() {
        return Err(Error::Domain { what: "t_f", value: t_f });
    }
    check_record(&opts.record)?;
    let d = rho0.dim();
    let h0 = hamiltonian(0.0)?;
    if h0.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, got: h0.nrows() });
    }
    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let rho = unpack(y, d);
        let h = hamiltonian(s)?;
        let drho = match dynamics {
            Dynamics::Closed => (&h * &rho - &rho * &h) * (-I),
            Dynamics::Wcl { couplings, bath, lamb, snapshot } => {
                build_snapshot(&h, couplings, bath.as_ref(), lamb, *snapshot)?.apply(&rho)
            }
            Dynamics::Scl(model) => model.apply(&h, &rho)?,
        };
        pack(&(drho * c(t_f)), dy);
        Ok(())
    };
    let mut solver = Dopri5::new(rhs, 2 * d * d, opts.control);
    let mut y = vec![0.0; 2 * d * d];
    pack(rho0.matrix(), &mut y);
    let mut s = 0.0;
    let mut traj = Trajectory::new(t_f);
    for &target in &opts.record {
        solver.integrate(&mut s, &mut y, target)?;
        let basis = gauge_fixed_basis(&hamiltonian(target)?);
        traj.record(target, unpack(&y, d), &basis)?;
    }
    traj.stats = solver.stats;
    Ok(traj)
}

/// Single-qubit state in the instantaneous eigenbasis: ground population
/// `p` and coherence `q = ⟨e|ρ|g⟩`.
fn to_eigen_components(model: &SingleQubitModel, rho: &DensityMatrix) -> Result<(f64, C64)> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: rho.dim() });
    }
    let v = model.eigenstates(0.0)?;
    let r = v.adjoint() * rho.matrix() * &v;
    Ok((r[(0, 0)].re, r[(1, 0)]))
}

fn from_eigen_components(v: &CMatrix, p: f64, q: C64) -> CMatrix {
    let r = CMatrix::from_row_slice(2, 2, &[c(p), q.conj(), q, c(1.0 - p)]);
    v * r * v.adjoint()
}

/// Single-qubit WCL evolution with a σ^z coupling, integrating the ground
/// population and the eigenbasis coherence directly.
pub fn evolve_single_qubit_wcl(
    model: &SingleQubitModel,
    bath: &dyn RateFunction,
    lamb: &LambShift,
    rho0: &DensityMatrix,
    t_f: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !(t_f > 0.0) || !t_f.is_finite() {
        return Err(Error::Domain { what: "t_f", value: t_f });
    }
    check_record(&opts.record)?;
    let (p0, q0) = to_eigen_components(model, rho0)?;
    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let co = single_qubit_coefficients(model, s, bath, lamb, t_f)?;
        // basis rotation: d|g⟩/ds = (φ'/2)|e⟩
        let rot = 0.5 * model.mixing_angle_rate(s)?;
        let (p, qr, qi) = (y[0], y[1], y[2]);
        dy[0] = 2.0 * rot * qr + co.f_plus * (1.0 - p) - co.f_minus * p;
        dy[1] = rot * (1.0 - 2.0 * p) + co.omega * qi - co.sigma * qr;
        dy[2] = -co.omega * qr - co.sigma * qi;
        Ok(())
    };
    let mut solver = Dopri5::new(rhs, 3, opts.control);
    let mut y = [p0, q0.re, q0.im];
    let mut s = 0.0;
    let mut traj = Trajectory::new(t_f);
    for &target in &opts.record {
        solver.integrate(&mut s, &mut y, target)?;
        let v = model.eigenstates(target)?;
        let rho = from_eigen_components(&v, y[0], C64::new(y[1], y[2]));
        traj.record(target, rho, &v)?;
    }
    traj.stats = solver.stats;
    Ok(traj)
}

/// Single-qubit SCL evolution with a σ^z coupling in the computational basis:
/// dρ₀₁/ds = -(t_f/T₂)ρ₀₁ + i(t_fω_x/2)[(1-θ)(ρ₁₁-ρ₀₀) + 2θΓρ₀₁],
/// dρ₀₀/ds = -i(t_fω_x/2)(1-θ)(ρ₀₁-ρ₁₀).
pub fn evolve_single_qubit_scl(
    model: &SingleQubitModel,
    bath: &dyn RateFunction,
    rho0: &DensityMatrix,
    t_f: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !(t_f > 0.0) || !t_f.is_finite() {
        return Err(Error::Domain { what: "t_f", value: t_f });
    }
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: rho0.dim() });
    }
    check_record(&opts.record)?;
    let inv_t2 = 2.0 * bath.gamma(0.0);
    let half = 0.5 * t_f * model.omega_x;
    let g = model.ratio();
    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let th = model.theta(s)?;
        let (p, r01) = (y[0], C64::new(y[1], y[2]));
        let d01 = -r01 * (t_f * inv_t2) + I * half * (c((1.0 - th) * (1.0 - 2.0 * p)) + r01 * (2.0 * th * g));
        // ρ₀₁ - ρ₁₀ = 2i Im ρ₀₁
        dy[0] = -(I * half * (1.0 - th) * C64::new(0.0, 2.0 * r01.im)).re;
        dy[1] = d01.re;
        dy[2] = d01.im;
        Ok(())
    };
    let m = rho0.matrix();
    let mut y = [m[(0, 0)].re, m[(0, 1)].re, m[(0, 1)].im];
    let mut solver = Dopri5::new(rhs, 3, opts.control);
    let mut s = 0.0;
    let mut traj = Trajectory::new(t_f);
    for &target in &opts.record {
        solver.integrate(&mut s, &mut y, target)?;
        let r01 = C64::new(y[1], y[2]);
        let rho = CMatrix::from_row_slice(2, 2, &[c(y[0]), r01, r01.conj(), c(1.0 - y[0])]);
        traj.record(target, rho, &model.eigenstates(target)?)?;
    }
    traj.stats = solver.stats;
    Ok(traj)
}

/// Ground state of H(0), the default initial condition.
pub fn initial_ground_state(h0: &CMatrix) -> Result<DensityMatrix> {
    let v = gauge_fixed_basis(h0);
    DensityMatrix::pure(&v.column(0).into_owned())
}
