use serde::{Deserialize, Serialize};

use super::schedule::Schedule;
use crate::error::{Error, Result};
use crate::linalg::{c, pauli_x, pauli_z, CMatrix};

/// H(s) = -½ω_x(1-θ)σ^x - ½θω_zσ^z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitModel {
    pub omega_x: f64,
    pub omega_z: f64,
    pub schedule: Schedule,
}

impl SingleQubitModel {
    pub fn new(omega_x: f64, omega_z: f64, schedule: Schedule) -> Result<Self> {
        if !(omega_x > 0.0) || !omega_x.is_finite() {
            return Err(Error::Domain { what: "omega_x", value: omega_x });
        }
        if !(omega_z > 0.0) || !omega_z.is_finite() {
            return Err(Error::Domain { what: "omega_z", value: omega_z });
        }
        Ok(Self { omega_x, omega_z, schedule })
    }

    /// Γ = ω_z/ω_x.
    pub fn ratio(&self) -> f64 {
        self.omega_z / self.omega_x
    }

    pub fn theta(&self, s: f64) -> Result<f64> {
        self.schedule.theta(s)
    }

    pub fn lambda_at_theta(&self, theta: f64) -> f64 {
        let g = self.ratio();
        ((1.0 - theta).powi(2) + (theta * g).powi(2)).sqrt()
    }

    /// Dimensionless gap λ(s) = Δ(s)/ω_x.
    pub fn lambda(&self, s: f64) -> Result<f64> {
        Ok(self.lambda_at_theta(self.theta(s)?))
    }

    pub fn gap(&self, s: f64) -> Result<f64> {
        Ok(self.omega_x * self.lambda(s)?)
    }

    pub fn lambda_min(&self) -> f64 {
        let g = self.ratio();
        g / (1.0 + g * g).sqrt()
    }

    pub fn delta_min(&self) -> f64 {
        self.omega_x * self.lambda_min()
    }

    /// θ at the minimum gap, 1/(1+Γ²).
    pub fn theta_min(&self) -> f64 {
        let g = self.ratio();
        1.0 / (1.0 + g * g)
    }

    pub fn s_min(&self) -> Result<f64> {
        self.schedule.inverse(self.theta_min())
    }

    /// ζ(s) = (1-θ)/λ, the σ^z matrix element between the eigenstates.
    pub fn zeta(&self, s: f64) -> Result<f64> {
        let th = self.theta(s)?;
        Ok((1.0 - th) / self.lambda_at_theta(th))
    }

    /// Ground and excited energies ∓½Δ(s).
    pub fn energies(&self, s: f64) -> Result<(f64, f64)> {
        let d = self.gap(s)?;
        Ok((-0.5 * d, 0.5 * d))
    }

    pub fn hamiltonian(&self, s: f64) -> Result<CMatrix> {
        let th = self.theta(s)?;
        Ok(pauli_x() * c(-0.5 * self.omega_x * (1.0 - th)) + pauli_z() * c(-0.5 * th * self.omega_z))
    }

    /// Bloch polar angle φ of the ground state, tan φ = (1-θ)ω_x/(θω_z).
    pub fn mixing_angle(&self, s: f64) -> Result<f64> {
        let th = self.theta(s)?;
        Ok(((1.0 - th) * self.omega_x).atan2(th * self.omega_z))
    }

    /// Closed-form eigenvectors as columns (ground, excited), real.
    pub fn eigenstates(&self, s: f64) -> Result<CMatrix> {
        let half = 0.5 * self.mixing_angle(s)?;
        let (cs, sn) = (half.cos(), half.sin());
        Ok(CMatrix::from_row_slice(2, 2, &[c(cs), c(-sn), c(sn), c(cs)]))
    }

    /// dφ/ds = -θ'Γ/λ².
    pub fn mixing_angle_rate(&self, s: f64) -> Result<f64> {
        let th = self.theta(s)?;
        let l = self.lambda_at_theta(th);
        Ok(-self.schedule.derivative(s)? * self.ratio() / (l * l))
    }

    /// 2 t_f ω_x λ_min³/Γ; values ≫ 1 indicate adiabatic evolution.
    pub fn adiabatic_parameter(&self, t_f: f64) -> Result<f64> {
        if !(t_f > 0.0) {
            return Err(Error::Domain { what: "t_f", value: t_f });
        }
        Ok(2.0 * t_f * self.omega_x * self.lambda_min().powi(3) / self.ratio())
    }

    /// |⟨g|∂_sH|e⟩| = θ'ω_z/(2λ).
    pub fn transition_element(&self, s: f64) -> Result<f64> {
        let th = self.theta(s)?;
        Ok(self.schedule.derivative(s)? * self.omega_z / (2.0 * self.lambda_at_theta(th)))
    }

    /// Largest transition element over s, the `h` of the adiabatic validity bound.
    pub fn max_transition_element(&self) -> Result<f64> {
        if let Schedule::Linear | Schedule::Beta { k: 0 } = self.schedule {
            return Ok(self.omega_z / (2.0 * self.lambda_min()));
        }
        let n = 4000;
        let mut best = 0.0f64;
        let mut best_s = 0.0;
        for j in 0..=n {
            let s = j as f64 / n as f64;
            let v = self.transition_element(s)?;
            if v > best {
                best = v;
                best_s = s;
            }
        }
        // golden-section polish around the grid maximum
        let step = 1.0 / n as f64;
        let (mut a, mut b) = ((best_s - step).max(0.0), (best_s + step).min(1.0));
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let x1 = b - r * (b - a);
            let x2 = a + r * (b - a);
            if self.transition_element(x1)? > self.transition_element(x2)? {
                b = x2;
            } else {
                a = x1;
            }
        }
        Ok(best.max(self.transition_element(0.5 * (a + b))?))
    }
}
