//! Small dense complex linear-algebra helpers.
//!
//! Basis convention: for `n` qubits the computational basis label `a` stores
//! qubit `i` in bit `n - 1 - i`, and bit value 0 is the `σ^z = +1` state.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), -I, I, c(0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Single-qubit operator `op` acting on qubit `site` of an `n`-qubit register.
pub fn embed(op: &CMatrix, site: usize, n: usize) -> CMatrix {
    assert!(site < n, "site {site} out of range for {n} qubits");
    let mut out = CMatrix::identity(1, 1);
    for q in 0..n {
        if q == site {
            out = out.kronecker(op);
        } else {
            out = out.kronecker(&identity(2));
        }
    }
    out
}

/// `σ^z` eigenvalue (+1 or -1) of qubit `site` in basis state `label`.
pub fn z_value(label: usize, site: usize, n: usize) -> f64 {
    if (label >> (n - 1 - site)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    let (vals, _) = eigh(m);
    vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Hermitian eigendecomposition with eigenvalues in ascending order and the
/// matching orthonormal eigenvectors as columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let dim = m.nrows();
    if dim == 2 {
        return eigh_2x2(m);
    }
    // symmetrize away round-off before handing to the solver
    let sym = (m + m.adjoint()) * c(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMatrix::zeros(dim, dim);
    for (col, &k) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    (vals, vecs)
}

/// Closed-form eigensystem of a 2×2 Hermitian matrix.
fn eigh_2x2(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + b.norm_sqr()).sqrt();
    let vals = vec![mean - r, mean + r];
    let mut vecs = CMatrix::zeros(2, 2);
    if b.norm() <= 1e-300 {
        // already diagonal
        if a <= d {
            vecs[(0, 0)] = c(1.0);
            vecs[(1, 1)] = c(1.0);
        } else {
            vecs[(1, 0)] = c(1.0);
            vecs[(0, 1)] = c(1.0);
        }
        return (vals, vecs);
    }
    // (m - λ) v = 0 with v = (b, λ - a) or (λ - d, b*), pick the better conditioned one
    for (col, &lam) in vals.iter().enumerate() {
        let v1 = [b, c(lam - a)];
        let v2 = [c(lam - d), b.conj()];
        let n1 = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
        let n2 = (v2[0].norm_sqr() + v2[1].norm_sqr()).sqrt();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        vecs[(0, col)] = v[0] / n;
        vecs[(1, col)] = v[1] / n;
    }
    (vals, vecs)
}

/// Fix the global phase of a column so its largest-magnitude entry is real positive.
pub fn fix_phase(v: &mut CMatrix, col: usize) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for i in 0..v.nrows() {
        let n = v[(i, col)].norm();
        // prefer the first index on (near-)ties so the choice is deterministic
        if n > best_norm + 1e-12 {
            best = i;
            best_norm = n;
        }
    }
    if best_norm > 0.0 {
        let phase = v[(best, col)].conj() / best_norm;
        for i in 0..v.nrows() {
            v[(i, col)] *= phase;
        }
    }
}

/// Pack a complex matrix into a real vector: real parts then imaginary parts, row-major.
pub fn pack(m: &CMatrix, out: &mut [f64]) {
    let d = m.nrows();
    let n = d * d;
    for i in 0..d {
        for j in 0..d {
            let z = m[(i, j)];
            out[i * d + j] = z.re;
            out[n + i * d + j] = z.im;
        }
    }
}

pub fn unpack(v: &[f64], d: usize) -> CMatrix {
    let n = d * d;
    CMatrix::from_fn(d, d, |i, j| C64::new(v[i * d + j], v[n + i * d + j]))
}
