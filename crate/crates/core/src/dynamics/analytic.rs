//! Closed-form single-qubit solutions used as oracles for the integrators.

use super::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::hamiltonians::SingleQubitModel;
use crate::linalg::{c, CMatrix, C64, I};
use crate::spectral_bath::quadrature::{integrate, QuadratureOptions};
use crate::spectral_bath::{LambShift, RateFunction};
use crate::wcl_generator::single_qubit_coefficients;

/// H = -½ω_zσ^z with a σ^z bath: populations frozen,
/// ρ₀₁(t) = ρ₀₁(0) e^{-t/T₂ + iω_z t} with T₂ = 1/(2γ(0)).
pub fn analytic_pure_dephasing(omega_z: f64, bath: &dyn RateFunction, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    check_qubit(rho0)?;
    let m = rho0.matrix();
    let decay = (-2.0 * bath.gamma(0.0) * t).exp();
    let r01 = m[(0, 1)] * (I * omega_z * t).exp() * decay;
    Ok(DensityMatrix::from_unchecked(CMatrix::from_row_slice(
        2,
        2,
        &[m[(0, 0)], r01, r01.conj(), m[(1, 1)]],
    )))
}

/// Relaxation and dephasing times of the static σ^x Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticWclTimes {
    pub t1: f64,
    pub t2: f64,
    /// Ground (|+⟩) and excited (|−⟩) Gibbs populations.
    pub gibbs_ground: f64,
    pub gibbs_excited: f64,
}

pub fn static_wcl_times(omega_x: f64, bath: &dyn RateFunction) -> StaticWclTimes {
    let beta = bath.inv_temperature();
    let t1 = 1.0 / (bath.gamma(omega_x) * (1.0 + (-beta * omega_x).exp()));
    let z = (0.5 * beta * omega_x).exp() + (-0.5 * beta * omega_x).exp();
    StaticWclTimes {
        t1,
        t2: 2.0 * t1,
        gibbs_ground: (0.5 * beta * omega_x).exp() / z,
        gibbs_excited: (-0.5 * beta * omega_x).exp() / z,
    }
}

/// H = -½ω_xσ^x with a σ^z bath, in the |±⟩ basis:
/// ρ₋₋(t) = p₋ + (ρ₋₋(0) - p₋)e^{-t/T₁}, ρ₋₊(t) = ρ₋₊(0)e^{-i(ω_x + S(ω_x) - S(-ω_x))t - t/T₂}.
/// Returned in the computational basis.
pub fn analytic_static_wcl(
    omega_x: f64,
    bath: &dyn RateFunction,
    lamb: &LambShift,
    rho0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    check_qubit(rho0)?;
    let times = static_wcl_times(omega_x, bath);
    let shift = if lamb.is_off() { 0.0 } else { lamb.value(omega_x)? - lamb.value(-omega_x)? };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // columns |+⟩, |−⟩
    let v = CMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)]);
    let r = v.adjoint() * rho0.matrix() * &v;
    let excited = times.gibbs_excited + (r[(1, 1)].re - times.gibbs_excited) * (-t / times.t1).exp();
    let coh = r[(1, 0)] * (-(I * (omega_x + shift) * t) - t / times.t2).exp();
    let out = CMatrix::from_row_slice(2, 2, &[c(1.0 - excited), coh.conj(), coh, c(excited)]);
    Ok(DensityMatrix::from_unchecked(&v * out * v.adjoint()))
}

/// H = -½ω_xσ^x with a σ^z bath in the singular-coupling limit, starting
/// from |+⟩: ρ₀₀ = ½, ρ₀₁(t) = ½e^{-t/T₂}.
pub fn analytic_static_scl(bath: &dyn RateFunction, t: f64) -> DensityMatrix {
    let r01 = 0.5 * (-2.0 * bath.gamma(0.0) * t).exp();
    DensityMatrix::from_unchecked(CMatrix::from_row_slice(2, 2, &[c(0.5), c(r01), c(r01), c(0.5)]))
}

/// Adiabatic-limit solution, dropping the basis-rotation terms:
/// p(s) = p₀e^{-I(0,s)} + ∫₀^s F₊(s')e^{-I(s',s)}ds' with I(a,b) = ∫_a^b (F₊+F₋),
/// q(s) = q₀ exp(-∫₀^s (iΩ + Σ)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdiabaticLimit {
    /// Instantaneous ground-state population.
    pub ground: f64,
    /// ⟨e|ρ|g⟩.
    pub coherence: C64,
}

pub fn analytic_adiabatic_limit(
    model: &SingleQubitModel,
    bath: &dyn RateFunction,
    lamb: &LambShift,
    ground0: f64,
    coherence0: C64,
    t_f: f64,
    s: f64,
) -> Result<AdiabaticLimit> {
    if !(t_f > 0.0) {
        return Err(Error::Domain { what: "t_f", value: t_f });
    }
    let s = crate::hamiltonians::check_s(s)?;
    if model.adiabatic_parameter(t_f)? < 1.0 {
        log::warn!("adiabatic-limit solution used outside its regime (t_f = {t_f})");
    }
    let q = QuadratureOptions { rel_tol: 1e-10, abs_tol: 1e-14, max_intervals: 4000 };
    let coeff = |x: f64| single_qubit_coefficients(model, x, bath, lamb, t_f);
    // errors inside closures are smuggled out through NaN and reported below
    let total_rate = |x: f64| coeff(x).map(|co| co.f_plus + co.f_minus).unwrap_or(f64::NAN);
    let decay = |a: f64, b: f64| -> f64 {
        integrate(total_rate, a, b, q).map(|r| r.value).unwrap_or(f64::NAN)
    };
    let gain = integrate(
        |x: f64| {
            let fp = coeff(x).map(|co| co.f_plus).unwrap_or(f64::NAN);
            if fp == 0.0 {
                0.0
            } else {
                fp * (-decay(x, s)).exp()
            }
        },
        0.0,
        s,
        q,
    )?;
    let ground = ground0 * (-decay(0.0, s)).exp() + gain.value;
    let phase = integrate(|x: f64| coeff(x).map(|co| co.omega).unwrap_or(f64::NAN), 0.0, s, q)?;
    let damp = integrate(|x: f64| coeff(x).map(|co| co.sigma).unwrap_or(f64::NAN), 0.0, s, q)?;
    if !ground.is_finite() || !phase.value.is_finite() || !damp.value.is_finite() {
        // surface the underlying failure
        coeff(s)?;
        return Err(Error::Quadrature { lo: 0.0, hi: s, residual: f64::NAN });
    }
    let coherence = coherence0 * (-(I * phase.value) - damp.value).exp();
    Ok(AdiabaticLimit { ground, coherence })
}

fn check_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: rho.dim() });
    }
    Ok(())
}
