//! Ohmic bath: KMS-consistent rates, principal-value Lamb shifts, bath timescales.
//!
//! Units throughout the crate: ħ = k_B = 1, energies and frequencies in GHz,
//! times in ns, inverse temperature in GHz⁻¹.

pub mod quadrature;

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use quadrature::{integrate, integrate_pieces, QuadratureOptions};

/// A bath rate function γ(ω) at inverse temperature β.
pub trait RateFunction: Send + Sync {
    fn gamma(&self, omega: f64) -> f64;
    fn inv_temperature(&self) -> f64;
}

/// Ohmic spectral density with exponential cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    /// Dimensionless system-bath strength η g².
    pub coupling: f64,
    /// β in GHz⁻¹.
    pub inv_temperature: f64,
    /// ω_c in GHz.
    pub cutoff: f64,
}

impl SpectralModel {
    pub fn new(coupling: f64, inv_temperature: f64, cutoff: f64) -> Result<Self> {
        if !(coupling >= 0.0) || !coupling.is_finite() {
            return Err(Error::Domain { what: "coupling", value: coupling });
        }
        if !(inv_temperature > 0.0) || !inv_temperature.is_finite() {
            return Err(Error::Domain { what: "inv_temperature", value: inv_temperature });
        }
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(Error::Domain { what: "cutoff", value: cutoff });
        }
        Ok(Self { coupling, inv_temperature, cutoff })
    }

    /// Same bath with a different coupling strength.
    pub fn with_coupling(&self, coupling: f64) -> Self {
        Self { coupling, ..*self }
    }

    /// γ(ω) = 2π η g² ω e^{-|ω|/ω_c} / (1 - e^{-βω}), with γ(0) = 2π η g² / β.
    pub fn gamma(&self, omega: f64) -> f64 {
        let beta = self.inv_temperature;
        let prefactor = 2.0 * PI * self.coupling * (-omega.abs() / self.cutoff).exp();
        prefactor * bose_factor(omega, beta)
    }

    pub fn gamma_zero(&self) -> f64 {
        2.0 * PI * self.coupling / self.inv_temperature
    }

    /// Single-qubit dephasing time in the computational basis, 1/(2γ(0)).
    pub fn t2_computational(&self) -> f64 {
        1.0 / (2.0 * self.gamma_zero())
    }

    /// S(ω) at the default tolerance.
    pub fn lamb_shift(&self, omega: f64) -> Result<f64> {
        Ok(self.lamb_shift_detailed(omega, LambShiftOptions::default())?.value)
    }

    /// S(ω) = PV ∫ γ(ω')/(ω - ω') dω' with an error estimate.
    ///
    /// The pole is removed by symmetric subtraction on a window centred at ω,
    /// the remainder is integrated on `[-L, L]` with `L = window_factor·ω_c`,
    /// split at the kink of γ at zero.
    pub fn lamb_shift_detailed(&self, omega: f64, opts: LambShiftOptions) -> Result<LambShiftValue> {
        if self.coupling == 0.0 {
            return Ok(LambShiftValue { value: 0.0, error: 0.0 });
        }
        let span = opts.window_factor * self.cutoff;
        let q = QuadratureOptions {
            rel_tol: opts.rel_tol,
            abs_tol: 1e-300,
            max_intervals: opts.max_intervals,
        };
        let outer = |w: f64| self.gamma(w) / (omega - w);
        if omega.abs() >= span {
            let r = integrate_pieces(outer, &[-span, 0.0, span], q)?;
            return Ok(LambShiftValue { value: r.value, error: r.error });
        }
        let half_width = if omega == 0.0 {
            0.5 * self.cutoff.min(1.0 / self.inv_temperature)
        } else {
            omega.abs().min(span - omega.abs())
        };
        let near = integrate(
            |u: f64| (self.gamma(omega - u) - self.gamma(omega + u)) / u,
            0.0,
            half_width,
            q,
        )?;
        let lo = omega - half_width;
        let hi = omega + half_width;
        let mut left: Vec<f64> = vec![-span, 0.0, lo];
        left.retain(|&x| x <= lo);
        left.sort_by(f64::total_cmp);
        let mut right: Vec<f64> = vec![hi, 0.0, span];
        right.retain(|&x| x >= hi);
        right.sort_by(f64::total_cmp);
        let l = integrate_pieces(outer, &left, q)?;
        let r = integrate_pieces(outer, &right, q)?;
        Ok(LambShiftValue {
            value: near.value + l.value + r.value,
            error: near.error + l.error + r.error,
        })
    }

    /// τ_B = β/(2π), flagged when the cutoff is not the largest energy scale.
    pub fn bath_correlation_time(&self) -> BathTime {
        BathTime {
            tau: self.inv_temperature / (2.0 * PI),
            cutoff_dominates: self.cutoff * self.inv_temperature >= CUTOFF_DOMINANCE,
        }
    }

    /// Tabulate S(ω) on `points` equally spaced frequencies in `[lo, hi]`.
    pub fn lamb_shift_table(&self, lo: f64, hi: f64, points: usize, opts: LambShiftOptions) -> Result<LambShiftTable> {
        if !(hi > lo) || points < 2 {
            return Err(Error::InvalidParameter(format!(
                "Lamb shift table needs hi > lo and at least 2 points (got [{lo}, {hi}], {points})"
            )));
        }
        let step = (hi - lo) / (points - 1) as f64;
        let grid: Vec<f64> = (0..points).map(|k| lo + step * k as f64).collect();
        let values = grid
            .iter()
            .map(|&w| self.lamb_shift_detailed(w, opts).map(|v| v.value))
            .collect::<Result<Vec<_>>>()?;
        Ok(LambShiftTable {
            model: *self,
            grid,
            values,
            quadrature_tol: opts.rel_tol,
        })
    }
}

impl RateFunction for SpectralModel {
    fn gamma(&self, omega: f64) -> f64 {
        SpectralModel::gamma(self, omega)
    }
    fn inv_temperature(&self) -> f64 {
        self.inv_temperature
    }
}

/// ω/(1 - e^{-βω}), evaluated without overflow or cancellation.
fn bose_factor(omega: f64, beta: f64) -> f64 {
    if omega == 0.0 {
        return 1.0 / beta;
    }
    let x = beta * omega;
    if omega > 0.0 {
        omega / -(-x).exp_m1()
    } else {
        // ω e^{βω}/(e^{βω} - 1), both factors negative
        omega * x.exp() / x.exp_m1()
    }
}

/// ω_c·β above which τ_B = β/2π is considered applicable.
pub const CUTOFF_DOMINANCE: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathTime {
    pub tau: f64,
    /// False when ω_c β is too small for the closed form.
    pub cutoff_dominates: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct LambShiftOptions {
    pub rel_tol: f64,
    pub window_factor: f64,
    pub max_intervals: usize,
}

impl Default for LambShiftOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            window_factor: 20.0,
            max_intervals: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambShiftValue {
    pub value: f64,
    pub error: f64,
}

/// Precomputed S(ω) samples with linear interpolation.
#[derive(Clone, Debug)]
pub struct LambShiftTable {
    model: SpectralModel,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub quadrature_tol: f64,
}

impl LambShiftTable {
    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    /// Interpolated S(ω), or `None` outside the tabulated range.
    pub fn interpolate(&self, omega: f64) -> Option<f64> {
        let lo = *self.grid.first()?;
        let hi = *self.grid.last()?;
        if omega < lo || omega > hi {
            return None;
        }
        let step = (hi - lo) / (self.grid.len() - 1) as f64;
        let k = (((omega - lo) / step).floor() as usize).min(self.grid.len() - 2);
        let t = (omega - self.grid[k]) / step;
        Some(self.values[k] * (1.0 - t) + self.values[k + 1] * t)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "omega,S,tol")?;
        for (w, s) in self.grid.iter().zip(&self.values) {
            writeln!(out, "{w:.12e},{s:.12e},{:e}", self.quadrature_tol)?;
        }
        Ok(())
    }
}

/// How the Lamb-shift Hamiltonian is evaluated inside generators.
#[derive(Clone, Debug)]
pub enum LambShift {
    Off,
    /// Quadrature at every requested frequency.
    Exact(SpectralModel),
    /// Table lookup, falling back to quadrature outside the grid.
    Table(Arc<LambShiftTable>),
}

impl LambShift {
    pub fn value(&self, omega: f64) -> Result<f64> {
        match self {
            LambShift::Off => Ok(0.0),
            LambShift::Exact(m) => m.lamb_shift(omega),
            LambShift::Table(t) => match t.interpolate(omega) {
                Some(v) => Ok(v),
                None => t.model.lamb_shift(omega),
            },
        }
    }

    pub fn is_off(&self) -> bool {
        matches!(self, LambShift::Off)
    }

    /// A table covering `[-max_freq, max_freq]`, or `Off` for a decoupled bath.
    pub fn tabulated(model: &SpectralModel, max_freq: f64, points: usize) -> Result<Self> {
        if model.coupling == 0.0 {
            return Ok(LambShift::Off);
        }
        let table = model.lamb_shift_table(-max_freq, max_freq, points, LambShiftOptions::default())?;
        Ok(LambShift::Table(Arc::new(table)))
    }
}

/// Ratios behind the weak-coupling, Markov and adiabatic validity conditions.
/// Each condition is reported as passing when its ratio is below one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    /// g² τ_B / Δ_min, with g² τ_B estimated as γ(0)/2.
    pub weak_coupling_ratio: f64,
    /// g τ_B.
    pub markov_ratio: f64,
    /// h / (t_f Δ_min²).
    pub adiabatic_ratio: f64,
    /// h τ_B² / t_f.
    pub bath_slowness_ratio: f64,
    pub cutoff_dominates: bool,
}

impl ValidityReport {
    pub fn weak_coupling_ok(&self) -> bool {
        self.weak_coupling_ratio < 1.0
    }
    pub fn markov_ok(&self) -> bool {
        self.markov_ratio < 1.0
    }
    pub fn adiabatic_ok(&self) -> bool {
        self.adiabatic_ratio < 1.0 && self.bath_slowness_ratio < 1.0
    }
    /// Conditions that do not depend on the evolution time.
    pub fn bath_conditions_ok(&self) -> bool {
        self.weak_coupling_ok() && self.markov_ok()
    }
    pub fn all_ok(&self) -> bool {
        self.bath_conditions_ok() && self.adiabatic_ok()
    }
}

/// Evaluate the validity inequalities for total time `t_f`, minimum gap
/// `delta_min` and maximal Hamiltonian rate-of-change `h`.
pub fn validity_report(model: &SpectralModel, t_f: f64, delta_min: f64, h: f64) -> ValidityReport {
    let bath = model.bath_correlation_time();
    let tau = bath.tau;
    // γ(0) ≈ 2 g² τ_B for exponentially decaying correlations
    let g2 = model.gamma_zero() / (2.0 * tau);
    ValidityReport {
        weak_coupling_ratio: g2 * tau / delta_min,
        markov_ratio: g2.sqrt() * tau,
        adiabatic_ratio: h / (t_f * (delta_min * delta_min).min(1.0 / (tau * tau))),
        bath_slowness_ratio: h * tau * tau / t_f,
        cutoff_dominates: bath.cutoff_dominates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_bath() -> SpectralModel {
        SpectralModel::new(1e-4, 1.0 / 2.23, 8.0 * PI).unwrap()
    }

    #[test]
    fn gamma_zero_limit() {
        let m = fig_bath();
        let expected = 2.0 * PI * 1e-4 * 2.23;
        assert!((m.gamma(0.0) - expected).abs() < 1e-18);
        assert!((m.gamma_zero() - expected).abs() < 1e-18);
        for eps in [1e-10, 1e-8] {
            assert!((m.gamma(eps) - expected).abs() / expected < 1e-9 * 10.0);
            assert!((m.gamma(-eps) - expected).abs() / expected < 1e-9 * 10.0);
        }
    }

    #[test]
    fn kms_ratio() {
        let m = fig_bath();
        for w in [0.1, 0.7, 3.0, 40.0] {
            let ratio = m.gamma(-w) / m.gamma(w);
            assert!((ratio - (-m.inv_temperature * w).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SpectralModel::new(-1.0, 1.0, 1.0).is_err());
        assert!(SpectralModel::new(1.0, 0.0, 1.0).is_err());
        assert!(SpectralModel::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn zero_coupling_has_no_shift() {
        let m = fig_bath().with_coupling(0.0);
        for w in [-3.0, 0.0, 0.5, 10.0] {
            assert_eq!(m.lamb_shift(w).unwrap(), 0.0);
        }
    }

    #[test]
    fn shift_is_linear_in_coupling() {
        let m = fig_bath();
        let a = m.lamb_shift(0.8).unwrap();
        let b = m.with_coupling(3e-4).lamb_shift(0.8).unwrap();
        assert!((b / a - 3.0).abs() < 1e-7);
    }

    #[test]
    fn halving_tolerance_stays_within_error_bound() {
        let m = fig_bath();
        for w in [-2.0, 0.0, 1.0 / 2f64.sqrt(), 5.0] {
            let coarse = m.lamb_shift_detailed(w, LambShiftOptions::default()).unwrap();
            let fine = m
                .lamb_shift_detailed(w, LambShiftOptions { rel_tol: 5e-9, ..Default::default() })
                .unwrap();
            assert!((coarse.value - fine.value).abs() <= coarse.error, "ω = {w}");
            assert!(coarse.value.is_finite());
        }
    }

    #[test]
    fn correlation_time() {
        let m = fig_bath();
        let t = m.bath_correlation_time();
        assert!((t.tau - 1.0 / (2.0 * PI * 2.23)).abs() < 1e-15);
        assert!(t.cutoff_dominates);
        let doubled = SpectralModel::new(1e-4, 2.0 / 2.23, 8.0 * PI).unwrap();
        assert!((doubled.bath_correlation_time().tau - 2.0 * t.tau).abs() < 1e-15);
        let warm = SpectralModel::new(1e-4, 1.0, 0.1).unwrap();
        let wt = warm.bath_correlation_time();
        assert!((wt.tau - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(!wt.cutoff_dominates);
    }

    #[test]
    fn validity_for_reference_parameters() {
        let m = fig_bath();
        let lambda_min = 1.0 / 2f64.sqrt();
        let t_f = 10.0 * 2f64.sqrt();
        let h = 1.0 / (2.0 * lambda_min);
        let report = validity_report(&m, t_f, lambda_min, h);
        let expected = (m.inv_temperature / (2.0 * PI)).powi(2) / (2.0 * t_f * lambda_min);
        assert!((report.bath_slowness_ratio - expected).abs() < 1e-15);
        assert!(report.all_ok());
        let slow = validity_report(&m, 1e12, lambda_min, h);
        assert!(slow.adiabatic_ratio < 1e-10 && slow.bath_slowness_ratio < 1e-10);
        let decoupled = validity_report(&m.with_coupling(0.0), t_f, lambda_min, h);
        assert_eq!(decoupled.weak_coupling_ratio, 0.0);
        assert!(decoupled.weak_coupling_ok());
    }

    #[test]
    fn table_interpolates_and_exports() {
        let m = fig_bath();
        let table = m.lamb_shift_table(-2.0, 2.0, 401, LambShiftOptions::default()).unwrap();
        let direct = m.lamb_shift(0.7071).unwrap();
        let interp = table.interpolate(0.7071).unwrap();
        assert!((direct - interp).abs() < 1e-6 * direct.abs().max(1e-6));
        assert!(table.interpolate(2.5).is_none());
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("omega,S,tol\n"));
        assert_eq!(text.lines().count(), 402);
    }
}
