use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{QmcConfig, Sampler, SliceCouplings, TrotterLattice};
use crate::error::{Error, Result};
use crate::hamiltonians::{GroundPartition, IsingInstance};

const BOOTSTRAP_RESAMPLES: usize = 100;

/// Result of a single anneal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOutcome {
    /// Basis label read from a uniformly random Trotter slice.
    pub label: usize,
    /// Majority fraction along τ averaged over qubits, at readout.
    pub agreement: f64,
    pub accepted: u64,
}

/// Anneal from a random lattice through s_k = (k+1)/sweeps, one sweep per
/// point, then read out one slice.
pub fn anneal_run<R: Rng>(instance: &IsingInstance, config: &QmcConfig, rng: &mut R) -> Result<RunOutcome> {
    config.validate()?;
    let lattice = TrotterLattice::random(instance.n, config.n_tau, rng);
    let mut sampler = Sampler::new(instance, lattice)?;
    let mut accepted = 0u64;
    for k in 0..config.sweeps {
        let s = (k + 1) as f64 / config.sweeps as f64;
        let couplings = SliceCouplings::at(instance, config, s)?;
        accepted += sampler.sweep(&couplings, rng) as u64;
    }
    let tau = rng.gen_range(0..config.n_tau);
    let lattice = sampler.lattice();
    Ok(RunOutcome { label: lattice.slice_label(tau), agreement: lattice.slice_agreement(), accepted })
}

/// Isolated-to-cluster population ratio at one α.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioEstimate {
    pub alpha: f64,
    /// Mean frequency per isolated ground state.
    pub p_i: f64,
    /// Mean frequency per cluster ground state.
    pub p_c: f64,
    /// P_I/P_C; infinite when no run hit the cluster.
    pub ratio: f64,
    /// Twice the bootstrap standard deviation of the ratio.
    pub err_2sigma: f64,
    /// Fraction of runs ending in any ground state.
    pub gs_rate: f64,
    pub runs: usize,
    pub cluster_empty: bool,
    pub mean_agreement: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Isolated,
    Cluster,
    Other,
}

fn ratio_of(isolated: usize, cluster: usize, partition: &GroundPartition) -> f64 {
    if cluster == 0 {
        return f64::INFINITY;
    }
    let p_i = isolated as f64 / partition.isolated.len() as f64;
    let p_c = cluster as f64 / partition.cluster.len() as f64;
    p_i / p_c
}

fn bootstrap_2sigma(classes: &[Class], partition: &GroundPartition, rng: &mut ChaCha8Rng) -> f64 {
    let n = classes.len();
    let mut ratios = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let (mut iso, mut clu) = (0, 0);
        for _ in 0..n {
            match classes[rng.gen_range(0..n)] {
                Class::Isolated => iso += 1,
                Class::Cluster => clu += 1,
                Class::Other => {}
            }
        }
        let r = ratio_of(iso, clu, partition);
        if r.is_finite() {
            ratios.push(r);
        }
    }
    if ratios.len() < 2 {
        return f64::INFINITY;
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (ratios.len() - 1) as f64;
    2.0 * var.sqrt()
}

/// Per-α run batches. Run `r` at grid index `j` draws from the ChaCha8
/// stream `(j << 32) | r` of `config.seed`, so results do not depend on
/// the worker count.
pub fn pi_pc_experiment(
    instance: &IsingInstance,
    partition: &GroundPartition,
    config: &QmcConfig,
    alphas: &[f64],
) -> Result<Vec<RatioEstimate>> {
    config.validate()?;
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("empty α grid".into()));
    }
    if partition.cluster.is_empty() || partition.isolated.is_empty() {
        return Err(Error::InvalidParameter("ground partition needs both cluster and isolated states".into()));
    }
    let mut out = Vec::with_capacity(alphas.len());
    for (j, &alpha) in alphas.iter().enumerate() {
        let cfg = QmcConfig { alpha, ..config.clone() };
        cfg.validate()?;
        let outcomes: Vec<RunOutcome> = (0..cfg.runs)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(((j as u64) << 32) | r as u64);
                anneal_run(instance, &cfg, &mut rng)
            })
            .collect::<Result<_>>()?;
        let classes: Vec<Class> = outcomes
            .iter()
            .map(|o| {
                if partition.isolated.contains(&o.label) {
                    Class::Isolated
                } else if partition.cluster.contains(&o.label) {
                    Class::Cluster
                } else {
                    Class::Other
                }
            })
            .collect();
        let iso = classes.iter().filter(|&&c| c == Class::Isolated).count();
        let clu = classes.iter().filter(|&&c| c == Class::Cluster).count();
        let runs = cfg.runs as f64;
        let mut boot_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        boot_rng.set_stream(u64::MAX - j as u64);
        out.push(RatioEstimate {
            alpha,
            p_i: iso as f64 / runs / partition.isolated.len() as f64,
            p_c: clu as f64 / runs / partition.cluster.len() as f64,
            ratio: ratio_of(iso, clu, partition),
            err_2sigma: bootstrap_2sigma(&classes, partition, &mut boot_rng),
            gs_rate: (iso + clu) as f64 / runs,
            runs: cfg.runs,
            cluster_empty: clu == 0,
            mean_agreement: outcomes.iter().map(|o| o.agreement).sum::<f64>() / runs,
        });
    }
    Ok(out)
}

/// CSV with columns `alpha,p_i,p_c,ratio,err_2sigma,gs_rate,runs`.
pub fn write_ratio_csv<W: Write>(estimates: &[RatioEstimate], mut out: W) -> std::io::Result<()> {
    writeln!(out, "alpha,p_i,p_c,ratio,err_2sigma,gs_rate,runs")?;
    for e in estimates {
        writeln!(
            out,
            "{:.6e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{}",
            e.alpha, e.p_i, e.p_c, e.ratio, e.err_2sigma, e.gs_rate, e.runs
        )?;
    }
    Ok(())
}
