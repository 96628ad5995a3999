use serde::{Deserialize, Serialize};

use super::schedule::Schedule;
use crate::error::{Error, Result};
use crate::linalg::{c, z_value, CMatrix};

/// Transverse-field Ising model
/// H(s) = -A(s) Σ σ^x_i + B(s) (-Σ h_i σ^z_i + Σ_{i<j} J_ij σ^z_i σ^z_j)
/// with A = 1 - θ_a(s) and B = θ_b(s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingInstance {
    pub n: usize,
    pub fields: Vec<f64>,
    /// Upper-triangular couplings `(i, j, J)` with `i < j`.
    pub couplings: Vec<(usize, usize, f64)>,
    pub schedule_a: Schedule,
    pub schedule_b: Schedule,
}

/// On-disk layout of an instance file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    #[serde(default)]
    fields: Vec<(usize, f64)>,
    #[serde(default)]
    couplings: Vec<(usize, usize, f64)>,
    #[serde(default = "linear")]
    schedule_a: Schedule,
    #[serde(default = "linear")]
    schedule_b: Schedule,
}

fn linear() -> Schedule {
    Schedule::Linear
}

impl IsingInstance {
    /// Validates indices and folds couplings into upper-triangular form,
    /// summing duplicates.
    pub fn new(
        n: usize,
        fields: Vec<f64>,
        couplings: Vec<(usize, usize, f64)>,
        schedule_a: Schedule,
        schedule_b: Schedule,
    ) -> Result<Self> {
        if n == 0 || n > 30 {
            return Err(Error::InvalidParameter(format!("qubit count {n} outside 1..=30")));
        }
        if fields.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: fields.len() });
        }
        let mut folded: Vec<(usize, usize, f64)> = Vec::with_capacity(couplings.len());
        for (i, j, v) in couplings {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidParameter(format!("coupling ({i}, {j}) invalid for {n} qubits")));
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            match folded.iter_mut().find(|(x, y, _)| *x == a && *y == b) {
                Some(entry) => entry.2 += v,
                None => folded.push((a, b, v)),
            }
        }
        folded.sort_by(|p, q| (p.0, p.1).cmp(&(q.0, q.1)));
        Ok(Self { n, fields, couplings: folded, schedule_a, schedule_b })
    }

    /// Parse the TOML instance format: `n`, `fields = [[i, h], ...]`,
    /// `couplings = [[i, j, J], ...]`, optional `schedule_a`/`schedule_b`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: InstanceFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut fields = vec![0.0; raw.n];
        for (i, h) in raw.fields {
            if i >= raw.n {
                return Err(Error::InvalidParameter(format!("field index {i} out of range")));
            }
            fields[i] += h;
        }
        Self::new(raw.n, fields, raw.couplings, raw.schedule_a, raw.schedule_b)
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn a(&self, s: f64) -> Result<f64> {
        Ok(1.0 - self.schedule_a.theta(s)?)
    }

    pub fn b(&self, s: f64) -> Result<f64> {
        self.schedule_b.theta(s)
    }

    /// Classical energy of a ±1 configuration (index = qubit).
    pub fn spin_energy(&self, spins: &[i8]) -> f64 {
        let mut e = 0.0;
        for (h, &z) in self.fields.iter().zip(spins) {
            e -= h * z as f64;
        }
        for &(i, j, v) in &self.couplings {
            e += v * (spins[i] * spins[j]) as f64;
        }
        e
    }

    /// Classical energy of a computational basis label.
    pub fn energy(&self, label: usize) -> f64 {
        let n = self.n;
        let mut e = 0.0;
        for (i, h) in self.fields.iter().enumerate() {
            e -= h * z_value(label, i, n);
        }
        for &(i, j, v) in &self.couplings {
            e += v * z_value(label, i, n) * z_value(label, j, n);
        }
        e
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.energy(a)).collect()
    }

    /// Dense H(s).
    pub fn hamiltonian(&self, s: f64) -> Result<CMatrix> {
        let a = self.a(s)?;
        let b = self.b(s)?;
        let dim = self.dim();
        let mut h = CMatrix::zeros(dim, dim);
        for label in 0..dim {
            h[(label, label)] = c(b * self.energy(label));
            for q in 0..self.n {
                let flipped = label ^ (1 << (self.n - 1 - q));
                h[(flipped, label)] -= c(a);
            }
        }
        Ok(h)
    }

    /// Exhaustive search for the classical ground energy and all labels
    /// within `tol` of it.
    pub fn ground_states(&self, tol: f64) -> (f64, Vec<usize>) {
        let diag = self.diagonal();
        let e0 = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let labels = (0..diag.len()).filter(|&a| diag[a] - e0 <= tol).collect();
        (e0, labels)
    }
}

/// Ground manifold split into the largest single-flip-connected component
/// and everything else.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundPartition {
    pub cluster: Vec<usize>,
    pub isolated: Vec<usize>,
    /// Smallest Hamming distance from an isolated state to the cluster.
    pub separation: u32,
}

pub fn partition_ground_states(labels: &[usize]) -> GroundPartition {
    let m = labels.len();
    let mut component = vec![usize::MAX; m];
    let mut sizes = Vec::new();
    for start in 0..m {
        if component[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut stack = vec![start];
        component[start] = id;
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for v in 0..m {
                if component[v] == usize::MAX && (labels[u] ^ labels[v]).count_ones() == 1 {
                    component[v] = id;
                    stack.push(v);
                }
            }
        }
        sizes.push(size);
    }
    let largest = (0..sizes.len()).max_by_key(|&k| (sizes[k], usize::MAX - k)).unwrap_or(0);
    let cluster: Vec<usize> = (0..m).filter(|&k| component[k] == largest).map(|k| labels[k]).collect();
    let isolated: Vec<usize> = (0..m).filter(|&k| component[k] != largest).map(|k| labels[k]).collect();
    let separation = isolated
        .iter()
        .flat_map(|&x| cluster.iter().map(move |&y| (x ^ y).count_ones()))
        .min()
        .unwrap_or(0);
    GroundPartition { cluster, isolated, separation }
}

/// The 8-spin instance with a 17-fold degenerate classical ground state:
/// a ferromagnetic ring of core spins 0..4 with h = +1, each bonded to an
/// outer spin 4..8 with h = -1.
pub fn quantum_signature_instance() -> IsingInstance {
    let mut fields = vec![1.0; 4];
    fields.extend([-1.0; 4]);
    let mut couplings = Vec::new();
    for i in 0..4 {
        couplings.push((i, (i + 1) % 4, -1.0));
        couplings.push((i, i + 4, -1.0));
    }
    IsingInstance::new(8, fields, couplings, Schedule::Linear, Schedule::Linear)
        .expect("fixed instance is valid")
}
