use std::io::Write;

use rayon::prelude::*;

use super::analytic::analytic_adiabatic_limit;
use super::density::DensityMatrix;
use super::evolve::{evolve_single_qubit_wcl, EvolveOptions};
use super::integrator::StepControl;
use crate::error::{Error, Result};
use crate::hamiltonians::SingleQubitModel;
use crate::linalg::C64;
use crate::spectral_bath::{LambShift, SpectralModel};

#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub control: StepControl,
    /// Golden-section iterations around the grid maximum (0 disables).
    pub refine_iterations: usize,
    /// How far above the Gibbs value the maximum must rise to count as an optimum.
    pub plateau_margin: f64,
    /// Points of the Lamb-shift table built per bath.
    pub lamb_points: usize,
    pub lamb_enabled: bool,
    /// Adiabatic parameter above which the adiabatic-limit closed form
    /// replaces direct integration (`None` always integrates).
    pub analytic_above: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            control: StepControl::default(),
            refine_iterations: 30,
            plateau_margin: 2e-3,
            lamb_points: 401,
            lamb_enabled: true,
            analytic_above: Some(1e5),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Optimum {
    pub t_f: f64,
    pub p_gs: f64,
    /// False when the maximum sits on the edge of the scanned grid.
    pub interior: bool,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub t_f: Vec<f64>,
    pub p_final: Vec<f64>,
    /// Accumulated integrator error estimate per run (zero for closed-form points).
    pub error_estimate: Vec<f64>,
    /// Whether the adiabatic-limit closed form produced the point.
    pub analytic: Vec<bool>,
    pub optimum: Optimum,
    /// e^{βΔ(1)/2}/Z for the final Hamiltonian.
    pub gibbs: f64,
}

impl SweepResult {
    /// Final population at the largest t_f.
    pub fn plateau(&self) -> f64 {
        *self.p_final.last().expect("non-empty sweep")
    }

    /// An optimum exists when the maximum is interior and clears the Gibbs value.
    pub fn has_optimum(&self, margin: f64) -> bool {
        self.optimum.interior && self.optimum.p_gs > self.gibbs + margin
    }

    /// CSV with columns `t_f,p_gs,err,method`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t_f,p_gs,err,method")?;
        for j in 0..self.t_f.len() {
            let method = if self.analytic[j] { "adiabatic_limit" } else { "integrated" };
            writeln!(out, "{:.10e},{:.12e},{:.3e},{method}", self.t_f[j], self.p_final[j], self.error_estimate[j])?;
        }
        Ok(())
    }
}

/// e^{βΔ/2}/(e^{βΔ/2} + e^{-βΔ/2}).
pub fn gibbs_ground_population(gap: f64, inv_temperature: f64) -> f64 {
    1.0 / (1.0 + (-inv_temperature * gap).exp())
}

/// Lamb-shift table covering every gap the model visits.
pub fn lamb_for(model: &SingleQubitModel, bath: &SpectralModel, points: usize, enabled: bool) -> Result<LambShift> {
    if !enabled {
        return Ok(LambShift::Off);
    }
    let max_gap = model.omega_x.max(model.omega_z) * 1.01;
    LambShift::tabulated(bath, max_gap, points)
}

fn final_population(
    model: &SingleQubitModel,
    bath: &SpectralModel,
    lamb: &LambShift,
    t_f: f64,
    opts: &SweepOptions,
) -> Result<(f64, f64, bool)> {
    if let Some(limit) = opts.analytic_above {
        if model.adiabatic_parameter(t_f)? > limit {
            let r = analytic_adiabatic_limit(model, bath, lamb, 1.0, C64::new(0.0, 0.0), t_f, 1.0)?;
            return Ok((r.ground, 0.0, true));
        }
    }
    let ctl = opts.control;
    let rho0 = DensityMatrix::pure(&model.eigenstates(0.0)?.column(0).into_owned())?;
    let opts = EvolveOptions { control: ctl, ..EvolveOptions::final_only() };
    let traj = evolve_single_qubit_wcl(model, bath, lamb, &rho0, t_f, &opts)?;
    Ok((traj.final_p_gs(), traj.error_estimate(), false))
}

/// Final ground-state population across `grid`, with the maximum refined by
/// golden-section search in log t_f.
pub fn sweep_tf(model: &SingleQubitModel, bath: &SpectralModel, grid: &[f64], opts: &SweepOptions) -> Result<SweepResult> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] <= 0.0 {
        return Err(Error::InvalidParameter("t_f grid must be positive and strictly increasing".into()));
    }
    let lamb = lamb_for(model, bath, opts.lamb_points, opts.lamb_enabled)?;
    let runs: Vec<(f64, f64, bool)> = grid
        .par_iter()
        .map(|&t| final_population(model, bath, &lamb, t, opts))
        .collect::<Result<_>>()?;
    let p_final: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let error_estimate: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let analytic: Vec<bool> = runs.iter().map(|r| r.2).collect();
    let best = (0..p_final.len()).fold(0, |b, j| if p_final[j] > p_final[b] { j } else { b });
    let interior = best > 0 && best + 1 < grid.len();
    let mut optimum = Optimum { t_f: grid[best], p_gs: p_final[best], interior };
    if interior && opts.refine_iterations > 0 {
        let f = |log_t: f64| final_population(model, bath, &lamb, log_t.exp(), opts).map(|r| r.0);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (grid[best - 1].ln(), grid[best + 1].ln());
        let mut x1 = b - r * (b - a);
        let mut x2 = a + r * (b - a);
        let mut f1 = f(x1)?;
        let mut f2 = f(x2)?;
        for _ in 0..opts.refine_iterations {
            if f1 > f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = f(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = f(x2)?;
            }
        }
        let (x, fx) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
        if fx > optimum.p_gs {
            optimum = Optimum { t_f: x.exp(), p_gs: fx, interior: true };
        }
    }
    Ok(SweepResult {
        t_f: grid.to_vec(),
        p_final,
        error_estimate,
        analytic,
        optimum,
        gibbs: gibbs_ground_population(model.gap(1.0)?, bath.inv_temperature),
    })
}

#[derive(Clone, Debug)]
pub struct CouplingOptimum {
    pub coupling: f64,
    /// `None` when the best achievable population is the Gibbs plateau.
    pub t_opt: Option<f64>,
    pub p_max: f64,
    pub gibbs: f64,
    /// 2 t_opt ω_x λ_min³/Γ.
    pub adiabatic_parameter: Option<f64>,
}

/// Optimal t_f as a function of the coupling strength.
pub fn optimal_tf_vs_coupling(
    model: &SingleQubitModel,
    bath: &SpectralModel,
    couplings: &[f64],
    grid: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<CouplingOptimum>> {
    couplings
        .iter()
        .map(|&g| {
            let b = SpectralModel::new(g, bath.inv_temperature, bath.cutoff)?;
            let sweep = sweep_tf(model, &b, grid, opts)?;
            let exists = sweep.has_optimum(opts.plateau_margin);
            let t_opt = exists.then_some(sweep.optimum.t_f);
            Ok(CouplingOptimum {
                coupling: g,
                t_opt,
                p_max: sweep.optimum.p_gs,
                gibbs: sweep.gibbs,
                adiabatic_parameter: t_opt.map(|t| model.adiabatic_parameter(t)).transpose()?,
            })
        })
        .collect()
}
