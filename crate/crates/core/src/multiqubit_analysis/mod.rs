//! Closed-form multi-qubit weak-coupling rates in the instantaneous
//! eigenbasis, valid when both the spectrum and its gaps are non-degenerate.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::DEGENERACY_TOL;
use crate::linalg::{eigh, hermitian_norm, CMatrix};
use crate::spectral_bath::RateFunction;
use crate::wcl_generator::{CouplingSet, GeneratorSnapshot};

/// Eigenvalues (ascending) with the coupling operators expressed in the eigenbasis.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub energies: Vec<f64>,
    pub basis: CMatrix,
    /// A_α in the eigenbasis.
    pub operators: Vec<CMatrix>,
    mixing: DMatrix<f64>,
    scale: f64,
}

impl Eigensystem {
    pub fn new(h: &CMatrix, couplings: &CouplingSet) -> Result<Self> {
        if h.nrows() != couplings.dim() {
            return Err(Error::DimensionMismatch { expected: couplings.dim(), got: h.nrows() });
        }
        let (energies, basis) = eigh(h);
        let operators = couplings.operators().iter().map(|a| basis.adjoint() * a * &basis).collect();
        let k = couplings.operators().len();
        let mixing = DMatrix::from_fn(k, k, |a, b| couplings.mixing_entry(a, b));
        let scale = hermitian_norm(h).max(f64::MIN_POSITIVE);
        Ok(Self { energies, basis, operators, mixing, scale })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Default audit tolerance, relative to ‖H‖.
    pub fn default_tolerance(&self) -> f64 {
        DEGENERACY_TOL * self.scale
    }

    fn independent(&self) -> bool {
        self.mixing == DMatrix::identity(self.mixing.nrows(), self.mixing.ncols())
    }

    /// Σ_αβ M_αβ A_α,ij A_β,kl, real for Hermitian A and symmetric M.
    fn mixed(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.operators.len();
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                let m = self.mixing[(a, b)];
                if m != 0.0 {
                    acc += m * (self.operators[a][(i, j)] * self.operators[b][(k, l)]).re;
                }
            }
        }
        acc
    }
}

/// Near-coincident energies and gaps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DegeneracyAudit {
    pub tolerance: f64,
    /// Level pairs (a, b) with |ε_a - ε_b| < tol.
    pub energy_pairs: Vec<(usize, usize)>,
    /// Distinct transitions (a→a′, b→b′) whose gaps agree within tol.
    pub gap_pairs: Vec<((usize, usize), (usize, usize))>,
}

impl DegeneracyAudit {
    pub fn passed(&self) -> bool {
        self.energy_pairs.is_empty() && self.gap_pairs.is_empty()
    }

    fn describe(&self) -> String {
        format!(
            "{} degenerate level pairs (first {:?}), {} degenerate gap pairs (first {:?}) at tolerance {:e}",
            self.energy_pairs.len(),
            self.energy_pairs.first(),
            self.gap_pairs.len(),
            self.gap_pairs.first(),
            self.tolerance
        )
    }
}

pub fn degeneracy_audit(energies: &[f64], tol: f64) -> DegeneracyAudit {
    let d = energies.len();
    let mut audit = DegeneracyAudit { tolerance: tol, ..Default::default() };
    let mut gaps = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            let g = energies[b] - energies[a];
            if g.abs() < tol {
                audit.energy_pairs.push((a, b));
            }
            gaps.push(((a, b), g));
        }
    }
    for i in 0..gaps.len() {
        for j in i + 1..gaps.len() {
            // a near-zero gap is already an energy degeneracy
            if gaps[i].1.abs() < tol || gaps[j].1.abs() < tol {
                continue;
            }
            if (gaps[i].1 - gaps[j].1).abs() < tol {
                audit.gap_pairs.push((gaps[i].0, gaps[j].0));
            }
        }
    }
    audit
}

fn require_audit(sys: &Eigensystem, tol: f64) -> Result<()> {
    let audit = degeneracy_audit(&sys.energies, tol);
    if audit.passed() {
        Ok(())
    } else {
        Err(Error::Degenerate(audit.describe()))
    }
}

fn check_level(sys: &Eigensystem, a: usize) -> Result<()> {
    if a >= sys.dim() {
        return Err(Error::InvalidParameter(format!("level {a} out of range for dimension {}", sys.dim())));
    }
    Ok(())
}

/// 1/T₂⁽ᵉ⁾(a, b): dephasing rate between eigenstates a ≠ b.
pub fn pairwise_t2_rate(sys: &Eigensystem, bath: &dyn RateFunction, a: usize, b: usize) -> Result<f64> {
    check_level(sys, a)?;
    check_level(sys, b)?;
    if a == b {
        return Err(Error::InvalidParameter("pairwise rate needs a ≠ b".into()));
    }
    require_audit(sys, sys.default_tolerance())?;
    Ok(pair_rate_unchecked(sys, bath, a, b))
}

fn pair_rate_unchecked(sys: &Eigensystem, bath: &dyn RateFunction, a: usize, b: usize) -> f64 {
    let e = &sys.energies;
    // Σ_αβ M_αβ (A_α,aa - A_α,bb)(A_β,aa - A_β,bb)
    let diag = sys.mixed(a, a, a, a) - sys.mixed(a, a, b, b) - sys.mixed(b, b, a, a) + sys.mixed(b, b, b, b);
    let mut rate = 0.5 * bath.gamma(0.0) * diag;
    for c in 0..sys.dim() {
        if c != a {
            rate += 0.5 * bath.gamma(e[a] - e[c]) * sys.mixed(a, c, c, a);
        }
        if c != b {
            rate += 0.5 * bath.gamma(e[b] - e[c]) * sys.mixed(b, c, c, b);
        }
    }
    rate
}

/// r₀ for identical independent baths; γ(0) never enters.
pub fn ground_depopulation_rate(sys: &Eigensystem, bath: &dyn RateFunction) -> Result<f64> {
    if !sys.independent() {
        return Err(Error::InvalidParameter("ground-state depopulation rate assumes independent baths".into()));
    }
    require_audit(sys, sys.default_tolerance())?;
    let beta = bath.inv_temperature();
    let e = &sys.energies;
    let mut r0 = 0.0;
    for a in 1..sys.dim() {
        let gap = e[a] - e[0];
        let weight: f64 = sys.operators.iter().map(|op| op[(0, a)].norm_sqr()).sum();
        r0 += bath.gamma(gap) * (-beta * gap).exp() * weight;
    }
    Ok(r0)
}

/// r_a = Σ_αβ M_αβ Σ_{c≠a} γ(ε_a - ε_c) A_α,ac A_β,ca.
pub fn generic_depopulation_rate(sys: &Eigensystem, bath: &dyn RateFunction, a: usize) -> Result<f64> {
    check_level(sys, a)?;
    require_audit(sys, sys.default_tolerance())?;
    Ok(depop_unchecked(sys, bath, a))
}

fn depop_unchecked(sys: &Eigensystem, bath: &dyn RateFunction, a: usize) -> f64 {
    let e = &sys.energies;
    (0..sys.dim()).filter(|&c| c != a).map(|c| bath.gamma(e[a] - e[c]) * sys.mixed(a, c, c, a)).sum()
}

/// W with dp/dt = W p for the eigenbasis populations: W_ac is the c → a rate
/// and each column sums to zero.
pub fn population_rate_matrix(sys: &Eigensystem, bath: &dyn RateFunction) -> DMatrix<f64> {
    let d = sys.dim();
    let e = &sys.energies;
    let mut w = DMatrix::zeros(d, d);
    for c in 0..d {
        for a in 0..d {
            if a != c {
                let rate = bath.gamma(e[c] - e[a]) * sys.mixed(c, a, a, c);
                w[(a, c)] += rate;
                w[(c, c)] -= rate;
            }
        }
    }
    w
}

/// Normalized null vector of a rate matrix.
pub fn stationary_distribution(w: &DMatrix<f64>) -> Result<Vec<f64>> {
    let d = w.nrows();
    let mut m = w.clone();
    let mut rhs = DVector::zeros(d);
    // replace one balance equation by normalization
    for j in 0..d {
        m[(0, j)] = 1.0;
    }
    rhs[0] = 1.0;
    let p = m.lu().solve(&rhs).ok_or_else(|| Error::Degenerate("rate matrix has no unique stationary state".into()))?;
    Ok(p.iter().copied().collect())
}

pub fn gibbs_populations(energies: &[f64], inv_temperature: f64) -> Vec<f64> {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|e| (-inv_temperature * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Largest generator entry coupling eigenbasis populations with coherences,
/// in either direction.
pub fn block_decoupling_defect(snapshot: &GeneratorSnapshot) -> f64 {
    let d = snapshot.dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let mut unit = CMatrix::zeros(d, d);
            unit[(i, j)] = crate::linalg::c(1.0);
            let out = snapshot.generator_eigen(&unit);
            for a in 0..d {
                for b in 0..d {
                    if (i == j) != (a == b) {
                        worst = worst.max(out[(a, b)].norm());
                    }
                }
            }
        }
    }
    worst
}

/// All pairwise dephasing rates and depopulation rates of one snapshot.
#[derive(Clone, Debug)]
pub struct RateReport {
    pub energies: Vec<f64>,
    /// 1/T₂⁽ᵉ⁾(a, b), zero on the diagonal.
    pub pair_rates: DMatrix<f64>,
    pub depopulation: Vec<f64>,
    pub audit: DegeneracyAudit,
}

impl RateReport {
    /// CSV with columns `quantity,a,b,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "quantity,a,b,value")?;
        for (a, e) in self.energies.iter().enumerate() {
            writeln!(out, "energy,{a},{a},{e:.12e}")?;
        }
        let d = self.energies.len();
        for a in 0..d {
            for b in 0..d {
                if a != b {
                    writeln!(out, "inv_t2,{a},{b},{:.12e}", self.pair_rates[(a, b)])?;
                }
            }
        }
        for (a, r) in self.depopulation.iter().enumerate() {
            writeln!(out, "depopulation,{a},{a},{r:.12e}")?;
        }
        Ok(())
    }
}

/// Rates for H with the given couplings; refuses degenerate spectra.
pub fn rate_report(h: &CMatrix, couplings: &CouplingSet, bath: &dyn RateFunction, tol: Option<f64>) -> Result<RateReport> {
    let sys = Eigensystem::new(h, couplings)?;
    let tol = tol.unwrap_or_else(|| sys.default_tolerance());
    let audit = degeneracy_audit(&sys.energies, tol);
    if !audit.passed() {
        return Err(Error::Degenerate(audit.describe()));
    }
    let d = sys.dim();
    let cells: Vec<(usize, usize, f64)> = (0..d * d)
        .into_par_iter()
        .filter(|k| k / d != k % d)
        .map(|k| (k / d, k % d, pair_rate_unchecked(&sys, bath, k / d, k % d)))
        .collect();
    let mut pair_rates = DMatrix::zeros(d, d);
    for (a, b, r) in cells {
        pair_rates[(a, b)] = r;
    }
    let depopulation = (0..d).map(|a| depop_unchecked(&sys, bath, a)).collect();
    Ok(RateReport { energies: sys.energies.clone(), pair_rates, depopulation, audit })
}
