use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{c, eigh, hermiticity_defect, trace, CMatrix, C64};

/// Hermitian, unit-trace complex matrix. Positivity is checked on
/// construction and monitored along trajectories, never enforced.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(CMatrix);

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-6;

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidState("matrix must be square and non-empty".into()));
        }
        let defect = hermiticity_defect(&m);
        if defect > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = trace(&m);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let floor = eigh(&m).0[0];
        if floor < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {floor:e}")));
        }
        Ok(Self(m))
    }

    /// Wrap without validation; used for integrator output, which is
    /// diagnosed separately.
    pub(crate) fn from_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    /// |ψ⟩⟨ψ|, normalizing ψ.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("pure state needs a non-zero vector".into()));
        }
        let v = psi / c(norm);
        Ok(Self(&v * v.adjoint()))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim) / c(dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace_drift(&self) -> f64 {
        (trace(&self.0) - c(1.0)).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.0).0[0]
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.0)
    }

    /// ⟨v|ρ|v⟩ for column `col` of `basis`.
    pub fn population(&self, basis: &CMatrix, col: usize) -> f64 {
        let v = basis.column(col);
        (v.adjoint() * &self.0 * v)[(0, 0)].re
    }
}
