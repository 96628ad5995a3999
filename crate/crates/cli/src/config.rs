//! Experiment configuration files.

use std::path::{Path, PathBuf};

use aqme_core::hamiltonians::{quantum_signature_instance, IsingInstance, Schedule, SingleQubitModel};
use aqme_core::spectral_bath::SpectralModel;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub description: Option<String>,
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; `AQME_WORKERS` takes precedence.
    #[serde(default)]
    pub workers: Option<usize>,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    SpectralDensity(SpectralDensity),
    StaticAnalytic(StaticAnalytic),
    WclTrajectory(WclTrajectory),
    SclTrajectory(SclTrajectory),
    TfSweep(TfSweep),
    CouplingSweep(CouplingSweep),
    BetaScheduleSweep(BetaScheduleSweep),
    GapProfile(GapProfile),
    RateReport(RateReport),
    GroundStates(GroundStates),
    SqaEb(SqaEb),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::SpectralDensity(_) => "spectral-density",
            Experiment::StaticAnalytic(_) => "static-analytic",
            Experiment::WclTrajectory(_) => "wcl-trajectory",
            Experiment::SclTrajectory(_) => "scl-trajectory",
            Experiment::TfSweep(_) => "tf-sweep",
            Experiment::CouplingSweep(_) => "coupling-sweep",
            Experiment::BetaScheduleSweep(_) => "beta-schedule-sweep",
            Experiment::GapProfile(_) => "gap-profile",
            Experiment::RateReport(_) => "rate-report",
            Experiment::GroundStates(_) => "ground-states",
            Experiment::SqaEb(_) => "sqa-eb",
        }
    }
}

fn linear() -> Schedule {
    Schedule::Linear
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    pub omega_x: f64,
    pub omega_z: f64,
    #[serde(default = "linear")]
    pub schedule: Schedule,
}

impl QubitConfig {
    pub fn model(&self) -> Result<SingleQubitModel, CliError> {
        SingleQubitModel::new(self.omega_x, self.omega_z, self.schedule).map_err(|e| CliError::schema("model", e))
    }
}

/// Bath temperature and cutoff; `temperature` is 1/β.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub inv_temperature: Option<f64>,
    pub cutoff: f64,
}

impl Environment {
    pub fn beta(&self, field: &str) -> Result<f64, CliError> {
        match (self.temperature, self.inv_temperature) {
            (Some(t), None) if t > 0.0 && t.is_finite() => Ok(1.0 / t),
            (None, Some(b)) if b > 0.0 && b.is_finite() => Ok(b),
            (Some(_), Some(_)) => Err(CliError::schema(field, "give either temperature or inv_temperature, not both")),
            (None, None) => Err(CliError::schema(field, "temperature or inv_temperature is required")),
            _ => Err(CliError::schema(field, "temperature must be positive and finite")),
        }
    }

    pub fn bath(&self, coupling: f64, field: &str) -> Result<SpectralModel, CliError> {
        SpectralModel::new(coupling, self.beta(field)?, self.cutoff).map_err(|e| CliError::schema(field, e))
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    /// η g².
    pub coupling: f64,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub inv_temperature: Option<f64>,
    pub cutoff: f64,
}

impl BathConfig {
    pub fn model(&self) -> Result<SpectralModel, CliError> {
        let env = Environment { temperature: self.temperature, inv_temperature: self.inv_temperature, cutoff: self.cutoff };
        env.bath(self.coupling, "experiment.bath")
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Grid {
    pub fn values(&self, field: &str) -> Result<Vec<f64>, CliError> {
        if self.points < 2 || !(self.max > self.min) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(CliError::schema(field, "grid needs min < max and at least 2 points"));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0) {
            return Err(CliError::schema(field, "log grid needs min > 0"));
        }
        let n = self.points - 1;
        Ok((0..=n)
            .map(|j| {
                let f = j as f64 / n as f64;
                match self.spacing {
                    Spacing::Log => (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp(),
                    Spacing::Linear => self.min + f * (self.max - self.min),
                }
            })
            .collect())
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralDensity {
    pub bath: BathConfig,
    pub omega: Grid,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum StaticCase {
    /// H = -½ω σ^z with a σ^z bath.
    PureDephasing,
    /// H = -½ω σ^x with a σ^z bath.
    Transverse,
    /// H = -½ω σ^x in the singular-coupling limit, starting in |+⟩.
    Singular,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StaticAnalytic {
    pub bath: BathConfig,
    pub case: StaticCase,
    pub omega: f64,
    /// Evolution length in units of the slowest decay time.
    #[serde(default = "five")]
    pub decay_times: f64,
    #[serde(default = "hundred_one")]
    pub points: usize,
    #[serde(default)]
    pub lamb_shift: bool,
    /// (ρ₀₀, Re ρ₀₁, Im ρ₀₁) of the initial state; ignored by the singular case.
    #[serde(default = "default_initial")]
    pub initial: [f64; 3],
}

fn five() -> f64 {
    5.0
}

fn hundred_one() -> usize {
    101
}

fn two_hundred_one() -> usize {
    201
}

fn default_initial() -> [f64; 3] {
    [0.8, 0.3, -0.2]
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WclTrajectory {
    pub model: QubitConfig,
    pub bath: BathConfig,
    pub t_f: f64,
    #[serde(default = "two_hundred_one")]
    pub points: usize,
    #[serde(default = "yes")]
    pub lamb_shift: bool,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SclTrajectory {
    pub model: QubitConfig,
    pub bath: BathConfig,
    pub t_f: f64,
    #[serde(default = "two_hundred_one")]
    pub points: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TfSweep {
    pub model: QubitConfig,
    pub bath: BathConfig,
    pub t_f: Grid,
    #[serde(default = "yes")]
    pub lamb_shift: bool,
    /// Adiabatic parameter above which the closed-form limit is used; 0 disables.
    #[serde(default = "analytic_default")]
    pub analytic_above: f64,
}

fn analytic_default() -> f64 {
    1e5
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSweep {
    pub model: QubitConfig,
    pub environment: Environment,
    /// Coupling grid in units of ω_c β, i.e. η g² / (ω_c β).
    pub scaled_couplings: Vec<f64>,
    pub t_f: Grid,
    #[serde(default = "yes")]
    pub lamb_shift: bool,
    #[serde(default = "analytic_default")]
    pub analytic_above: f64,
    /// Margin above the Gibbs value required for an optimum to exist.
    #[serde(default = "plateau_margin")]
    pub plateau_margin: f64,
}

fn plateau_margin() -> f64 {
    2e-3
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BetaScheduleSweep {
    pub omega_x: f64,
    pub omega_z: f64,
    pub bath: BathConfig,
    pub orders: Vec<u32>,
    pub t_f: Vec<f64>,
    #[serde(default = "yes")]
    pub lamb_shift: bool,
    #[serde(default = "tight_rtol")]
    pub rtol: f64,
    #[serde(default = "tight_atol")]
    pub atol: f64,
}

fn tight_rtol() -> f64 {
    1e-12
}

fn tight_atol() -> f64 {
    1e-14
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GapProfile {
    pub omega_x: f64,
    pub omega_z: f64,
    pub orders: Vec<u32>,
    #[serde(default = "two_hundred_one")]
    pub points: usize,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    #[default]
    Independent,
    Collective,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RateReport {
    pub instance: InstanceRef,
    pub s: f64,
    pub bath: BathConfig,
    #[serde(default)]
    pub couplings: CouplingKind,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStates {
    pub instance: InstanceRef,
    #[serde(default = "ground_tol")]
    pub tolerance: f64,
}

fn ground_tol() -> f64 {
    1e-9
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SqaEb {
    pub instance: InstanceRef,
    pub beta: f64,
    pub n_tau: usize,
    pub sweeps: usize,
    pub runs: usize,
    pub alphas: Vec<f64>,
}

pub const QUANTUM_SIGNATURE: &str = "quantum-signature";

/// `quantum-signature`, a path to an instance file, or an inline instance table.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum InstanceRef {
    Name(String),
    Inline(toml::Table),
}

/// Resolve an instance; relative paths are taken from the config's directory.
pub fn load_instance(instance: &InstanceRef, base: Option<&Path>) -> Result<IsingInstance, CliError> {
    let text = match instance {
        InstanceRef::Name(name) if name == QUANTUM_SIGNATURE => return Ok(quantum_signature_instance()),
        InstanceRef::Name(name) => {
            let path = match base {
                Some(dir) if Path::new(name).is_relative() => dir.join(name),
                _ => PathBuf::from(name),
            };
            std::fs::read_to_string(&path)
                .map_err(|e| CliError::schema("experiment.instance", format!("cannot read {}: {e}", path.display())))?
        }
        InstanceRef::Inline(table) => {
            toml::to_string(table).map_err(|e| CliError::schema("experiment.instance", e))?
        }
    };
    IsingInstance::from_toml_str(&text).map_err(|e| CliError::schema("experiment.instance", e))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::schema(field, format!("must be positive, got {v}")))
    }
}

fn nonempty<T>(field: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        Err(CliError::schema(field, "must not be empty"))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    /// Kind-specific checks beyond the schema itself.
    pub fn check(&self, base: Option<&Path>) -> Result<(), CliError> {
        if self.workers == Some(0) {
            return Err(CliError::schema("workers", "must be at least 1"));
        }
        match &self.experiment {
            Experiment::SpectralDensity(c) => {
                c.bath.model()?;
                c.omega.values("experiment.omega")?;
            }
            Experiment::StaticAnalytic(c) => {
                c.bath.model()?;
                positive("experiment.omega", c.omega)?;
                positive("experiment.decay_times", c.decay_times)?;
                if c.points < 2 {
                    return Err(CliError::schema("experiment.points", "need at least 2 points"));
                }
                if c.bath.coupling <= 0.0 {
                    return Err(CliError::schema("experiment.bath.coupling", "static decay needs a positive coupling"));
                }
            }
            Experiment::WclTrajectory(c) => {
                c.model.model()?;
                c.bath.model()?;
                positive("experiment.t_f", c.t_f)?;
                if c.points < 2 {
                    return Err(CliError::schema("experiment.points", "need at least 2 points"));
                }
            }
            Experiment::SclTrajectory(c) => {
                c.model.model()?;
                c.bath.model()?;
                positive("experiment.t_f", c.t_f)?;
                if c.points < 2 {
                    return Err(CliError::schema("experiment.points", "need at least 2 points"));
                }
            }
            Experiment::TfSweep(c) => {
                c.model.model()?;
                c.bath.model()?;
                c.t_f.values("experiment.t_f")?;
            }
            Experiment::CouplingSweep(c) => {
                c.model.model()?;
                c.environment.beta("experiment.environment")?;
                nonempty("experiment.scaled_couplings", &c.scaled_couplings)?;
                for &x in &c.scaled_couplings {
                    positive("experiment.scaled_couplings", x)?;
                }
                c.t_f.values("experiment.t_f")?;
            }
            Experiment::BetaScheduleSweep(c) => {
                SingleQubitModel::new(c.omega_x, c.omega_z, Schedule::Linear)
                    .map_err(|e| CliError::schema("experiment", e))?;
                c.bath.model()?;
                nonempty("experiment.orders", &c.orders)?;
                nonempty("experiment.t_f", &c.t_f)?;
                for &t in &c.t_f {
                    positive("experiment.t_f", t)?;
                }
                positive("experiment.rtol", c.rtol)?;
                positive("experiment.atol", c.atol)?;
            }
            Experiment::GapProfile(c) => {
                SingleQubitModel::new(c.omega_x, c.omega_z, Schedule::Linear)
                    .map_err(|e| CliError::schema("experiment", e))?;
                nonempty("experiment.orders", &c.orders)?;
                if c.points < 2 {
                    return Err(CliError::schema("experiment.points", "need at least 2 points"));
                }
            }
            Experiment::RateReport(c) => {
                load_instance(&c.instance, base)?;
                c.bath.model()?;
                if !(0.0..=1.0).contains(&c.s) {
                    return Err(CliError::schema("experiment.s", "must lie in [0, 1]"));
                }
                if let Some(t) = c.tolerance {
                    positive("experiment.tolerance", t)?;
                }
            }
            Experiment::GroundStates(c) => {
                load_instance(&c.instance, base)?;
                positive("experiment.tolerance", c.tolerance)?;
            }
            Experiment::SqaEb(c) => {
                load_instance(&c.instance, base)?;
                nonempty("experiment.alphas", &c.alphas)?;
                for &a in &c.alphas {
                    if !(a >= 0.0) || !a.is_finite() {
                        return Err(CliError::schema("experiment.alphas", format!("α = {a} must be non-negative")));
                    }
                }
                self.qmc_config(c).validate().map_err(|e| CliError::schema("experiment", e))?;
            }
        }
        Ok(())
    }

    pub fn qmc_config(&self, c: &SqaEb) -> aqme_core::sqa_eb::QmcConfig {
        aqme_core::sqa_eb::QmcConfig {
            beta: c.beta,
            n_tau: c.n_tau,
            sweeps: c.sweeps,
            alpha: 0.0,
            runs: c.runs,
            seed: self.seed,
        }
    }
}
