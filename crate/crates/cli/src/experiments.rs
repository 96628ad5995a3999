//! Dispatch from a parsed config to the simulation modules.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use aqme_core::dynamics::{
    analytic_pure_dephasing, analytic_static_scl, analytic_static_wcl, evolve, evolve_single_qubit_scl,
    evolve_single_qubit_wcl, lamb_for, optimal_tf_vs_coupling, static_wcl_times, sweep_tf, uniform_grid,
    DensityMatrix, Dynamics, EvolveOptions, SweepOptions,
};
use aqme_core::hamiltonians::{partition_ground_states, IsingInstance, Schedule, SingleQubitModel};
use aqme_core::linalg::{c, max_abs, pauli_x, pauli_z, CMatrix, C64};
use aqme_core::multiqubit_analysis::rate_report;
use aqme_core::scl_generator::SclModel;
use aqme_core::spectral_bath::{validity_report, LambShift, SpectralModel};
use aqme_core::sqa_eb::{pi_pc_experiment, write_ratio_csv};
use aqme_core::wcl_generator::{CouplingSet, SnapshotOptions};
use rayon::prelude::*;

use crate::config::*;
use crate::error::CliError;

/// CSV body plus `#` notes describing derived quantities.
#[derive(Debug, Default)]
pub struct Output {
    pub notes: Vec<String>,
    pub body: String,
}

/// Validity findings; `hard` ones stop a run unless forced.
#[derive(Debug, Default)]
pub struct Validity {
    pub hard: Vec<String>,
    pub soft: Vec<String>,
}

fn check_bath(label: &str, bath: &SpectralModel, t_f: f64, model: &SingleQubitModel, v: &mut Validity) -> Result<(), CliError> {
    if bath.coupling == 0.0 {
        return Ok(());
    }
    let r = validity_report(bath, t_f, model.delta_min(), model.max_transition_element()?);
    if !r.weak_coupling_ok() {
        v.hard.push(format!("{label}: weak-coupling ratio {:.3e} ≥ 1", r.weak_coupling_ratio));
    }
    if !r.markov_ok() {
        v.hard.push(format!("{label}: Markov ratio {:.3e} ≥ 1", r.markov_ratio));
    }
    if !r.adiabatic_ok() {
        v.soft.push(format!(
            "{label}: adiabatic ratios {:.3e}, {:.3e} (t_f = {t_f:e})",
            r.adiabatic_ratio, r.bath_slowness_ratio
        ));
    }
    if !r.cutoff_dominates {
        v.soft.push(format!("{label}: cutoff does not dominate the temperature"));
    }
    Ok(())
}

pub fn validity(cfg: &ExperimentConfig) -> Result<Validity, CliError> {
    let mut v = Validity::default();
    match &cfg.experiment {
        Experiment::WclTrajectory(c) => check_bath("bath", &c.bath.model()?, c.t_f, &c.model.model()?, &mut v)?,
        Experiment::TfSweep(c) => {
            let grid = c.t_f.values("experiment.t_f")?;
            check_bath("bath", &c.bath.model()?, grid[grid.len() - 1], &c.model.model()?, &mut v)?;
        }
        Experiment::CouplingSweep(c) => {
            let model = c.model.model()?;
            let beta = c.environment.beta("experiment.environment")?;
            let t_max = c.t_f.values("experiment.t_f")?.last().copied().unwrap_or(1.0);
            for &x in &c.scaled_couplings {
                let bath = c.environment.bath(x * c.environment.cutoff * beta, "experiment.environment")?;
                check_bath(&format!("scaled coupling {x:e}"), &bath, t_max, &model, &mut v)?;
            }
        }
        Experiment::BetaScheduleSweep(c) => {
            let bath = c.bath.model()?;
            for &k in &c.orders {
                let model = SingleQubitModel::new(c.omega_x, c.omega_z, Schedule::Beta { k })?;
                for &t in &c.t_f {
                    check_bath(&format!("k = {k}"), &bath, t, &model, &mut v)?;
                }
            }
        }
        _ => {}
    }
    Ok(v)
}

pub fn run(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<Output, CliError> {
    match &cfg.experiment {
        Experiment::SpectralDensity(c) => spectral_density(c),
        Experiment::StaticAnalytic(c) => static_analytic(c),
        Experiment::WclTrajectory(c) => wcl_trajectory(c),
        Experiment::SclTrajectory(c) => scl_trajectory(c),
        Experiment::TfSweep(c) => tf_sweep(c),
        Experiment::CouplingSweep(c) => coupling_sweep(c),
        Experiment::BetaScheduleSweep(c) => beta_schedule_sweep(c),
        Experiment::GapProfile(c) => gap_profile(c),
        Experiment::RateReport(c) => rates(c, base),
        Experiment::GroundStates(c) => ground_states(c, base),
        Experiment::SqaEb(c) => sqa_eb(cfg, c, base),
    }
}

fn csv<F>(f: F) -> Result<String, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))
}

fn spectral_density(c: &SpectralDensity) -> Result<Output, CliError> {
    let bath = c.bath.model()?;
    let grid = c.omega.values("experiment.omega")?;
    let rows: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&w| Ok((w, bath.gamma(w), bath.lamb_shift(w)?)))
        .collect::<aqme_core::Result<_>>()?;
    let mut body = String::from("omega,gamma,lamb_shift\n");
    for (w, g, s) in rows {
        writeln!(body, "{w:.10e},{g:.12e},{s:.12e}").unwrap();
    }
    let time = bath.bath_correlation_time();
    Ok(Output {
        notes: vec![
            format!("gamma_zero = {:.12e}", bath.gamma_zero()),
            format!("t2_computational = {:.12e}", bath.t2_computational()),
            format!("bath_correlation_time = {:.12e}", time.tau),
            format!("cutoff_dominates = {}", time.cutoff_dominates),
        ],
        body,
    })
}

fn static_analytic(c: &StaticAnalytic) -> Result<Output, CliError> {
    let bath = c.bath.model()?;
    let lamb = if c.lamb_shift { LambShift::tabulated(&bath, 2.0 * c.omega, 201)? } else { LambShift::Off };
    let [p, re, im] = c.initial;
    let rho0 = match c.case {
        StaticCase::Singular => DensityMatrix::new(CMatrix::from_element(2, 2, c64(0.5)))?,
        _ => {
            let q = C64::new(re, im);
            DensityMatrix::new(CMatrix::from_row_slice(2, 2, &[c64(p), q, q.conj(), c64(1.0 - p)]))
                .map_err(|e| CliError::schema("experiment.initial", e))?
        }
    };
    let (h, decay, dynamics) = match c.case {
        StaticCase::PureDephasing => (
            pauli_z() * c64(-0.5 * c.omega),
            1.0 / (2.0 * bath.gamma(0.0)),
            wcl(&bath, lamb.clone()),
        ),
        StaticCase::Transverse => {
            (pauli_x() * c64(-0.5 * c.omega), static_wcl_times(c.omega, &bath).t2, wcl(&bath, lamb.clone()))
        }
        StaticCase::Singular => (
            pauli_x() * c64(-0.5 * c.omega),
            bath.t2_computational(),
            Dynamics::Scl(SclModel::independent_sigma_z(1, &bath, &LambShift::Off)?),
        ),
    };
    let t_f = c.decay_times * decay;
    let opts = EvolveOptions { record: uniform_grid(c.points), ..EvolveOptions::default() }.with_tolerances(1e-11, 1e-13);
    let traj = evolve(|_| Ok(h.clone()), &dynamics, &rho0, t_f, &opts)?;
    let mut body = String::from("t,rho00,re_rho01,im_rho01,exact_rho00,exact_re_rho01,exact_im_rho01,max_abs_error\n");
    let mut worst = 0.0f64;
    for (s, state) in traj.s.iter().zip(&traj.states) {
        let t = s * t_f;
        let exact = match c.case {
            StaticCase::PureDephasing => analytic_pure_dephasing(c.omega, &bath, &rho0, t)?,
            StaticCase::Transverse => analytic_static_wcl(c.omega, &bath, &lamb, &rho0, t)?,
            StaticCase::Singular => analytic_static_scl(&bath, t),
        };
        let (m, e) = (state.matrix(), exact.matrix());
        let err = max_abs(&(m - e));
        worst = worst.max(err);
        writeln!(
            body,
            "{t:.10e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{err:.3e}",
            m[(0, 0)].re,
            m[(0, 1)].re,
            m[(0, 1)].im,
            e[(0, 0)].re,
            e[(0, 1)].re,
            e[(0, 1)].im
        )
        .unwrap();
    }
    Ok(Output {
        notes: vec![format!("decay_time = {decay:.12e}"), format!("max_abs_error = {worst:.3e}")],
        body,
    })
}

fn c64(x: f64) -> C64 {
    c(x)
}

fn wcl(bath: &SpectralModel, lamb: LambShift) -> Dynamics {
    Dynamics::Wcl {
        couplings: CouplingSet::single(pauli_z()).expect("σ^z is Hermitian"),
        bath: Arc::new(*bath),
        lamb,
        snapshot: SnapshotOptions::default(),
    }
}

fn ground_at_zero(model: &SingleQubitModel) -> Result<DensityMatrix, CliError> {
    Ok(DensityMatrix::pure(&model.eigenstates(0.0)?.column(0).into_owned())?)
}

fn trajectory_notes(model: &SingleQubitModel, t_f: f64, p_final: f64) -> Result<Vec<String>, CliError> {
    Ok(vec![
        format!("adiabatic_parameter = {:.12e}", model.adiabatic_parameter(t_f)?),
        format!("final_p_gs = {p_final:.12e}"),
    ])
}

fn wcl_trajectory(c: &WclTrajectory) -> Result<Output, CliError> {
    let model = c.model.model()?;
    let bath = c.bath.model()?;
    let lamb = lamb_for(&model, &bath, 401, c.lamb_shift)?;
    let opts = EvolveOptions { record: uniform_grid(c.points), ..EvolveOptions::default() };
    let traj = evolve_single_qubit_wcl(&model, &bath, &lamb, &ground_at_zero(&model)?, c.t_f, &opts)?;
    let mut notes = trajectory_notes(&model, c.t_f, traj.final_p_gs())?;
    notes.push(format!(
        "gibbs_ground = {:.12e}",
        aqme_core::dynamics::gibbs_ground_population(model.gap(1.0)?, bath.inv_temperature)
    ));
    Ok(Output { notes, body: csv(|b| traj.write_csv(b))? })
}

fn scl_trajectory(c: &SclTrajectory) -> Result<Output, CliError> {
    let model = c.model.model()?;
    let bath = c.bath.model()?;
    let opts = EvolveOptions { record: uniform_grid(c.points), ..EvolveOptions::default() };
    let traj = evolve_single_qubit_scl(&model, &bath, &ground_at_zero(&model)?, c.t_f, &opts)?;
    let mut notes = trajectory_notes(&model, c.t_f, traj.final_p_gs())?;
    notes.push(format!("t2_computational = {:.12e}", bath.t2_computational()));
    Ok(Output { notes, body: csv(|b| traj.write_csv(b))? })
}

fn sweep_options(lamb: bool, analytic_above: f64) -> SweepOptions {
    SweepOptions {
        lamb_enabled: lamb,
        analytic_above: (analytic_above > 0.0).then_some(analytic_above),
        ..SweepOptions::default()
    }
}

fn tf_sweep(c: &TfSweep) -> Result<Output, CliError> {
    let model = c.model.model()?;
    let bath = c.bath.model()?;
    let grid = c.t_f.values("experiment.t_f")?;
    let opts = sweep_options(c.lamb_shift, c.analytic_above);
    let res = sweep_tf(&model, &bath, &grid, &opts)?;
    let mut body = String::from("t_f,adiabatic_parameter,p_gs,err,method\n");
    for j in 0..grid.len() {
        let method = if res.analytic[j] { "adiabatic_limit" } else { "integrated" };
        writeln!(
            body,
            "{:.10e},{:.10e},{:.12e},{:.3e},{method}",
            grid[j],
            model.adiabatic_parameter(grid[j])?,
            res.p_final[j],
            res.error_estimate[j]
        )
        .unwrap();
    }
    let o = res.optimum;
    Ok(Output {
        notes: vec![
            format!("gibbs_ground = {:.12e}", res.gibbs),
            format!(
                "optimum t_f = {:.10e}, adiabatic_parameter = {:.6e}, p_gs = {:.12e}, interior = {}",
                o.t_f,
                model.adiabatic_parameter(o.t_f)?,
                o.p_gs,
                o.interior
            ),
            format!("optimum_exists = {}", res.has_optimum(opts.plateau_margin)),
        ],
        body,
    })
}

fn coupling_sweep(c: &CouplingSweep) -> Result<Output, CliError> {
    let model = c.model.model()?;
    let beta = c.environment.beta("experiment.environment")?;
    let base = c.environment.bath(0.0, "experiment.environment")?;
    let couplings: Vec<f64> = c.scaled_couplings.iter().map(|x| x * c.environment.cutoff * beta).collect();
    let grid = c.t_f.values("experiment.t_f")?;
    let opts = SweepOptions { plateau_margin: c.plateau_margin, ..sweep_options(c.lamb_shift, c.analytic_above) };
    let results = optimal_tf_vs_coupling(&model, &base, &couplings, &grid, &opts)?;
    let mut body = String::from("scaled_coupling,coupling,t_opt,adiabatic_parameter,p_max,gibbs\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.10e}")).unwrap_or_default();
    for (x, r) in c.scaled_couplings.iter().zip(&results) {
        writeln!(
            body,
            "{x:.6e},{:.10e},{},{},{:.12e},{:.12e}",
            r.coupling,
            opt(r.t_opt),
            opt(r.adiabatic_parameter),
            r.p_max,
            r.gibbs
        )
        .unwrap();
    }
    Ok(Output { notes: vec![format!("plateau_margin = {:e}", c.plateau_margin)], body })
}

fn beta_schedule_sweep(c: &BetaScheduleSweep) -> Result<Output, CliError> {
    let bath = c.bath.model()?;
    let cells: Vec<(u32, f64)> = c.orders.iter().flat_map(|&k| c.t_f.iter().map(move |&t| (k, t))).collect();
    let rows: Vec<(u32, f64, f64, f64, f64)> = cells
        .par_iter()
        .map(|&(k, t_f)| {
            let model = SingleQubitModel::new(c.omega_x, c.omega_z, Schedule::Beta { k })?;
            let lamb = lamb_for(&model, &bath, 401, c.lamb_shift)?;
            let rho0 = DensityMatrix::pure(&model.eigenstates(0.0)?.column(0).into_owned())?;
            let opts = EvolveOptions::final_only().with_tolerances(c.rtol, c.atol);
            let traj = evolve_single_qubit_wcl(&model, &bath, &lamb, &rho0, t_f, &opts)?;
            Ok((k, t_f, traj.final_p_gs(), traj.error_estimate(), model.delta_min()))
        })
        .collect::<aqme_core::Result<_>>()?;
    let mut body = String::from("k,t_f,p_gs,log10_error,delta_min,err\n");
    for (k, t_f, p, err, dmin) in rows {
        writeln!(body, "{k},{t_f:.10e},{p:.15e},{:.6},{dmin:.15e},{err:.3e}", (1.0 - p).log10()).unwrap();
    }
    Ok(Output { notes: Vec::new(), body })
}

fn gap_profile(c: &GapProfile) -> Result<Output, CliError> {
    let grid = uniform_grid(c.points);
    let mut body = String::from("k,s,theta,gap\n");
    let mut notes = Vec::new();
    for &k in &c.orders {
        let model = SingleQubitModel::new(c.omega_x, c.omega_z, Schedule::Beta { k })?;
        for &s in &grid {
            writeln!(body, "{k},{s:.10},{:.15e},{:.15e}", model.theta(s)?, model.gap(s)?).unwrap();
        }
        notes.push(format!("k = {k}: delta_min = {:.15e} at s = {:.12}", model.delta_min(), model.s_min()?));
    }
    Ok(Output { notes, body })
}

fn rates(c: &RateReport, base: Option<&Path>) -> Result<Output, CliError> {
    let inst = load_instance(&c.instance, base)?;
    let bath = c.bath.model()?;
    let cs = match c.couplings {
        CouplingKind::Independent => CouplingSet::independent_sigma_z(inst.n),
        CouplingKind::Collective => CouplingSet::collective_sigma_z(inst.n),
    };
    let report = rate_report(&inst.hamiltonian(c.s)?, &cs, &bath, c.tolerance)?;
    Ok(Output {
        notes: vec![format!("degeneracy_tolerance = {:e}", report.audit.tolerance)],
        body: csv(|b| report.write_csv(b))?,
    })
}

fn bits(label: usize, n: usize) -> String {
    (0..n).map(|i| if (label >> (n - 1 - i)) & 1 == 1 { '1' } else { '0' }).collect()
}

fn ground_states(c: &GroundStates, base: Option<&Path>) -> Result<Output, CliError> {
    let inst = load_instance(&c.instance, base)?;
    let (e0, labels) = inst.ground_states(c.tolerance);
    let part = partition_ground_states(&labels);
    let mut body = String::from("label,bits,energy,class\n");
    for &l in &labels {
        let class = if part.isolated.contains(&l) { "isolated" } else { "cluster" };
        writeln!(body, "{l},{},{:.12e},{class}", bits(l, inst.n), inst.energy(l)).unwrap();
    }
    Ok(Output {
        notes: vec![
            format!("ground_energy = {e0:.12e}"),
            format!("degeneracy = {}", labels.len()),
            format!("cluster = {}, isolated = {}, separation = {}", part.cluster.len(), part.isolated.len(), part.separation),
            format!("first_excited_gap = {:.12e}", first_excited_gap(&inst, e0, c.tolerance)),
        ],
        body,
    })
}

fn first_excited_gap(inst: &IsingInstance, e0: f64, tol: f64) -> f64 {
    inst.diagonal().into_iter().filter(|e| e - e0 > tol).fold(f64::INFINITY, |m, e| m.min(e - e0))
}

fn sqa_eb(cfg: &ExperimentConfig, c: &SqaEb, base: Option<&Path>) -> Result<Output, CliError> {
    let inst = load_instance(&c.instance, base)?;
    let (_, labels) = inst.ground_states(1e-9);
    let part = partition_ground_states(&labels);
    let estimates = pi_pc_experiment(&inst, &part, &cfg.qmc_config(c), &c.alphas)?;
    let mut notes = vec![format!(
        "ground states: {} cluster, {} isolated {:?}",
        part.cluster.len(),
        part.isolated.len(),
        part.isolated.iter().map(|&l| bits(l, inst.n)).collect::<Vec<_>>()
    )];
    for e in &estimates {
        if e.cluster_empty {
            notes.push(format!("alpha = {:e}: no cluster hits, ratio reported as inf", e.alpha));
        }
        notes.push(format!("alpha = {:e}: mean slice agreement {:.6}", e.alpha, e.mean_agreement));
    }
    Ok(Output { notes, body: csv(|b| write_ratio_csv(&estimates, b))? })
}
