//! Experiment configuration in boundary units (dBm, dB, per km², metres).

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::analytic::{AccessModel, SmallIForm};
use crate::model::{db_to_linear, dbm_to_watts, per_km2_to_per_m2, presets, NetworkParams, Policy};
use crate::optimizer::{default_grid_db, AnalysisOptions, OutageReading, ThinningVariant};
use crate::simulator::{Conditioning, Protocol, SensingMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    Linear,
    Printed,
}

impl From<VariantArg> for ThinningVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Linear => ThinningVariant::Linear,
            VariantArg::Printed => ThinningVariant::AsPrinted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SensingArg {
    Faded,
    Mean,
}

impl From<SensingArg> for SensingMode {
    fn from(v: SensingArg) -> Self {
        match v {
            SensingArg::Faded => SensingMode::Faded,
            SensingArg::Mean => SensingMode::Mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutageArg {
    Corrected,
    Printed,
}

impl From<OutageArg> for OutageReading {
    fn from(v: OutageArg) -> Self {
        match v {
            OutageArg::Corrected => OutageReading::Corrected,
            OutageArg::Printed => OutageReading::Printed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelArg {
    Exact,
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallIArg {
    Printed,
    Consistent,
}

/// What `simulate` estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// ASE, access and success per protocol over θ, β and error σ.
    Ase,
    /// Conditional access probability at a fixed empty-ball radius.
    Access,
    /// Primary outage per protocol over θ.
    Outage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditioningArg {
    EmptyBall,
    PppConditional,
}

/// One experiment. Every field has a default, so a config file only lists
/// what differs from the dense-primary reference scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub experiment: ExperimentKind,

    pub lambda1_km2: f64,
    pub lambda2_km2: f64,
    pub p1_dbm: f64,
    pub p2_dbm: f64,
    pub alpha: f64,
    pub d_m: f64,
    pub tau: f64,
    pub gamma_db: f64,

    pub theta_db: Vec<f64>,
    pub beta_db: Vec<f64>,
    /// Empty-ball radius for `analyze` and the access experiment.
    pub r_i_m: f64,
    /// Interference levels for the `analyze` curve over I; empty picks a
    /// range around the level that matches `r_i_m`.
    pub i_dbm: Vec<f64>,
    /// Threshold of the `analyze` curve over I.
    pub analyze_theta_db: f64,
    /// Design grids searched by `optimize`.
    pub design_theta_db: Vec<f64>,
    pub design_beta_db: Vec<f64>,
    /// If non-empty, `optimize` also sweeps the secondary density.
    pub lambda2_sweep_km2: Vec<f64>,

    pub protocols: Vec<String>,
    pub sigma_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub window_m: f64,
    pub conditioning: ConditioningArg,

    pub variant: VariantArg,
    pub sensing: SensingArg,
    pub outage: OutageArg,
    pub access_model: ModelArg,
    pub small_i_form: SmallIArg,
    pub both_variants: bool,
    pub include_boundary: bool,
    pub refine: bool,
    pub signal_dbm: f64,
    pub out: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: "custom".into(),
            experiment: ExperimentKind::Ase,
            lambda1_km2: 500.0,
            lambda2_km2: 200.0,
            p1_dbm: 43.0,
            p2_dbm: 23.0,
            alpha: 4.0,
            d_m: 2.0,
            tau: presets::DEFAULT_TAU,
            gamma_db: presets::DEFAULT_GAMMA_DB,
            theta_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            beta_db: vec![10.0],
            r_i_m: 10.0,
            i_dbm: Vec::new(),
            analyze_theta_db: 0.0,
            design_theta_db: default_grid_db(),
            design_beta_db: default_grid_db(),
            lambda2_sweep_km2: Vec::new(),
            protocols: Protocol::ALL.iter().map(|p| p.name().to_string()).collect(),
            sigma_db: vec![0.0],
            trials: 20_000,
            seed: 1,
            window_m: 500.0,
            conditioning: ConditioningArg::EmptyBall,
            variant: VariantArg::Linear,
            sensing: SensingArg::Faded,
            outage: OutageArg::Corrected,
            access_model: ModelArg::Exact,
            small_i_form: SmallIArg::Printed,
            both_variants: false,
            include_boundary: false,
            refine: true,
            signal_dbm: crate::model::DEFAULT_SIGNAL_DBM,
            out: "out".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Canonical text the provenance hash is taken over.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Hash of the canonical text, ignoring the output directory so that a
    /// rerun elsewhere carries the same provenance.
    pub fn sha256(&self) -> String {
        let c = ExperimentConfig { out: String::new(), ..self.clone() };
        hex::encode(Sha256::digest(c.canonical().as_bytes()))
    }

    /// Network parameters in SI units.
    pub fn params(&self) -> Result<NetworkParams, CliError> {
        let p = NetworkParams {
            lambda1: per_km2_to_per_m2(self.lambda1_km2),
            lambda2: per_km2_to_per_m2(self.lambda2_km2),
            p1: dbm_to_watts(self.p1_dbm),
            p2: dbm_to_watts(self.p2_dbm),
            alpha: self.alpha,
            d: self.d_m,
            tau: self.tau,
            gamma: db_to_linear(self.gamma_db),
        };
        p.validate().map_err(|e| CliError::Config(format!("{}: {e}", config_field(e.field()))))
    }

    pub fn analysis(&self, variant: VariantArg) -> AnalysisOptions {
        AnalysisOptions {
            access: self.model(),
            thinning: variant.into(),
            outage: self.outage.into(),
            ..Default::default()
        }
    }

    pub fn model(&self) -> AccessModel {
        match self.access_model {
            ModelArg::Exact => AccessModel::Exact,
            ModelArg::LowerBound => AccessModel::LowerBound,
        }
    }

    pub fn small_i(&self) -> SmallIForm {
        match self.small_i_form {
            SmallIArg::Printed => SmallIForm::AsPrinted,
            SmallIArg::Consistent => SmallIForm::DimensionallyConsistent,
        }
    }

    pub fn conditioning(&self) -> Conditioning {
        match self.conditioning {
            ConditioningArg::EmptyBall => Conditioning::EmptyBall,
            ConditioningArg::PppConditional => Conditioning::PppConditional,
        }
    }

    pub fn protocols(&self) -> Result<Vec<Protocol>, CliError> {
        self.protocols
            .iter()
            .map(|name| {
                Protocol::ALL
                    .into_iter()
                    .find(|p| p.name() == name)
                    .ok_or_else(|| CliError::Config(format!("protocols: unknown protocol {name:?}")))
            })
            .collect()
    }

    /// Checks every field that is not covered by [`Self::params`].
    pub fn validate(&self) -> Result<NetworkParams, CliError> {
        let p = self.params()?;
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if self.theta_db.is_empty() {
            return bad("theta_db", "must not be empty".into());
        }
        if self.beta_db.is_empty() {
            return bad("beta_db", "must not be empty".into());
        }
        for &t in &self.theta_db {
            Policy::new(db_to_linear(t), 1.0).map_err(|e| CliError::Config(format!("theta_db: {e}")))?;
        }
        for &b in &self.beta_db {
            Policy::new(0.0, db_to_linear(b)).map_err(|e| CliError::Config(format!("beta_db: {e}")))?;
        }
        if self.design_theta_db.is_empty() || self.design_beta_db.is_empty() {
            return bad("design_theta_db", "design grids must not be empty".into());
        }
        if self.design_theta_db.iter().chain(&self.design_beta_db).any(|x| !x.is_finite()) {
            return bad("design_theta_db", "design grids must be finite".into());
        }
        if !(self.r_i_m > 0.0) || !self.r_i_m.is_finite() {
            return bad("r_i_m", format!("must be positive, got {}", self.r_i_m));
        }
        if self.trials == 0 {
            return bad("trials", "must be at least 1".into());
        }
        if self.sigma_db.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) || self.sigma_db.is_empty() {
            return bad("sigma_db", "must be a non-empty list of non-negative values".into());
        }
        if self.lambda2_sweep_km2.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return bad("lambda2_sweep_km2", "densities must be non-negative".into());
        }
        if self.protocols.is_empty() {
            return bad("protocols", "must not be empty".into());
        }
        self.protocols()?;
        if !self.signal_dbm.is_finite() {
            return bad("signal_dbm", "must be finite".into());
        }
        if !(self.window_m > 0.0) || !self.window_m.is_finite() {
            return bad("window_m", format!("must be positive, got {}", self.window_m));
        }
        Ok(p)
    }
}

/// Config key for a [`NetworkParams`] field.
fn config_field(field: &str) -> &str {
    match field {
        "lambda1" => "lambda1_km2",
        "lambda2" => "lambda2_km2",
        "p1" => "p1_dbm",
        "p2" => "p2_dbm",
        "d" => "d_m",
        "gamma" => "gamma_db",
        other => other,
    }
}
