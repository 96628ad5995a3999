use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{c, embed, hermiticity_defect, max_abs, pauli_x, pauli_z, CMatrix};

/// Correlations between bath channels, γ_αβ(ω) = M_αβ γ(ω).
#[derive(Clone, Debug, PartialEq)]
pub enum Mixing {
    /// Independent identical baths, M = 1.
    Independent,
    /// Real symmetric positive-semidefinite M.
    Matrix(DMatrix<f64>),
}

/// System operators A_α coupled to the bath, with their correlation structure.
#[derive(Clone, Debug)]
pub struct CouplingSet {
    operators: Vec<CMatrix>,
    mixing: Mixing,
    /// Eigen-channels of M: (weight m_k, Σ_β u_kβ A_β).
    channels: Vec<(f64, CMatrix)>,
}

impl CouplingSet {
    pub fn new(operators: Vec<CMatrix>, mixing: Mixing) -> Result<Self> {
        let dim = operators
            .first()
            .map(|a| a.nrows())
            .ok_or_else(|| Error::InvalidParameter("at least one coupling operator is required".into()))?;
        for a in &operators {
            if a.nrows() != dim || a.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: a.nrows() });
            }
            if hermiticity_defect(a) > 1e-12 * max_abs(a).max(1.0) {
                return Err(Error::InvalidParameter("coupling operators must be Hermitian".into()));
            }
        }
        let channels = match &mixing {
            Mixing::Independent => operators.iter().map(|a| (1.0, a.clone())).collect(),
            Mixing::Matrix(m) => {
                let k = operators.len();
                if m.nrows() != k || m.ncols() != k {
                    return Err(Error::DimensionMismatch { expected: k, got: m.nrows() });
                }
                if (m - m.transpose()).abs().max() > 1e-12 {
                    return Err(Error::InvalidParameter("bath correlation matrix must be symmetric".into()));
                }
                let eig = m.clone().symmetric_eigen();
                let scale = eig.eigenvalues.abs().max().max(1.0);
                if eig.eigenvalues.min() < -1e-12 * scale {
                    return Err(Error::InvalidParameter("bath correlation matrix must be positive semidefinite".into()));
                }
                let mut channels = Vec::new();
                for (idx, &w) in eig.eigenvalues.iter().enumerate() {
                    if w <= 1e-14 * scale {
                        continue;
                    }
                    let mut op = CMatrix::zeros(dim, dim);
                    for (beta, a) in operators.iter().enumerate() {
                        op += a * c(eig.eigenvectors[(beta, idx)]);
                    }
                    channels.push((w, op));
                }
                channels
            }
        };
        Ok(Self { operators, mixing, channels })
    }

    /// A single operator on one bath.
    pub fn single(op: CMatrix) -> Result<Self> {
        Self::new(vec![op], Mixing::Independent)
    }

    /// σ^z on every qubit, each with its own bath.
    pub fn independent_sigma_z(n: usize) -> Self {
        let ops = (0..n).map(|q| embed(&pauli_z(), q, n)).collect();
        Self::new(ops, Mixing::Independent).expect("Pauli operators are valid")
    }

    /// σ^x on every qubit, each with its own bath.
    pub fn independent_sigma_x(n: usize) -> Self {
        let ops = (0..n).map(|q| embed(&pauli_x(), q, n)).collect();
        Self::new(ops, Mixing::Independent).expect("Pauli operators are valid")
    }

    /// Σ_i σ^z_i coupled to one common bath.
    pub fn collective_sigma_z(n: usize) -> Self {
        let mut total = CMatrix::zeros(1 << n, 1 << n);
        for q in 0..n {
            total += embed(&pauli_z(), q, n);
        }
        Self::new(vec![total], Mixing::Independent).expect("Pauli operators are valid")
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn mixing(&self) -> &Mixing {
        &self.mixing
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    /// M_αβ.
    pub fn mixing_entry(&self, alpha: usize, beta: usize) -> f64 {
        match &self.mixing {
            Mixing::Independent => f64::from(u8::from(alpha == beta)),
            Mixing::Matrix(m) => m[(alpha, beta)],
        }
    }

    /// Diagonalized channels used by the generators.
    pub fn channels(&self) -> &[(f64, CMatrix)] {
        &self.channels
    }
}
