//! Run specification: everything needed to reproduce a Monte-Carlo run.

use std::fmt;
use std::path::Path;

use clap::ValueEnum;
use ofdm_im::dither::{Smoothing, SolverOptions};
use ofdm_im::constellation::make_qam;
use ofdm_im::SystemConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Original,
    SingleLevel,
    Multilevel,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Original, Scheme::SingleLevel, Scheme::Multilevel];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Original => "original",
            Scheme::SingleLevel => "single-level",
            Scheme::Multilevel => "multilevel",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DenominatorMode {
    /// Mean power per sample over all blocks of the run.
    Ensemble,
    /// Power of each block on its own.
    PerBlock,
}

/// Whose mean power the ensemble denominator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PowerReference {
    /// Each scheme is normalized by its own mean power.
    Scheme,
    /// Every scheme is normalized by the undithered signal's mean power.
    Original,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorPolicy {
    MaxCapturedPower,
    NearestByHamming,
}

impl From<DetectorPolicy> for ofdm_im::channel::IllegalPatternPolicy {
    fn from(p: DetectorPolicy) -> Self {
        match p {
            DetectorPolicy::MaxCapturedPower => Self::MaxCapturedPower,
            DetectorPolicy::NearestByHamming => Self::NearestByHamming,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub patience: usize,
    pub smoothing_initial: f64,
    pub smoothing_floor: f64,
    pub smoothing_decay: f64,
    pub restarts: usize,
    pub armijo: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self::from(SolverOptions::default())
    }
}

impl From<SolverOptions> for SolverSettings {
    fn from(o: SolverOptions) -> Self {
        Self {
            max_iterations: o.max_iterations,
            tolerance: o.tolerance,
            patience: o.patience,
            smoothing_initial: o.smoothing.initial,
            smoothing_floor: o.smoothing.floor,
            smoothing_decay: o.smoothing.decay,
            restarts: o.restarts,
            armijo: o.armijo,
        }
    }
}

impl SolverSettings {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            patience: self.patience,
            smoothing: Smoothing {
                initial: self.smoothing_initial,
                floor: self.smoothing_floor,
                decay: self.smoothing_decay,
            },
            restarts: self.restarts,
            armijo: self.armijo,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    #[serde(rename = "N")]
    pub subcarriers: usize,
    #[serde(rename = "n")]
    pub subblock_len: usize,
    #[serde(rename = "k")]
    pub active: usize,
    #[serde(rename = "M")]
    pub order: usize,
    pub schemes: Vec<Scheme>,
    /// Single-level dither radius.
    #[serde(rename = "R")]
    pub radius: f64,
    /// Multilevel radius of the lowest amplitude level.
    #[serde(rename = "R1")]
    pub r1: f64,
    /// Accept `R1 >= A1` for the multilevel scheme.
    pub allow_margin_violation: bool,
    pub trials: usize,
    pub seed: u64,
    pub snr_grid: Vec<f64>,
    pub ccdf_grid: Vec<f64>,
    pub denominator: DenominatorMode,
    pub power_reference: PowerReference,
    /// Oversampling factor `J` for peak measurement.
    pub oversample: usize,
    pub detector: DetectorPolicy,
    pub solver: SolverSettings,
    /// Blocks used to measure the energy per bit before a BER sweep.
    pub calibration_blocks: usize,
    /// BER stopping rule: bits simulated per SNR point at most.
    pub max_bits: u64,
    /// BER stopping rule: bit errors that end an SNR point early.
    pub target_errors: u64,
}

pub fn default_snr_grid() -> Vec<f64> {
    (0..=21).map(|i| 0.5 * f64::from(i)).collect()
}

pub fn default_ccdf_grid() -> Vec<f64> {
    (0..=36).map(|i| 4.0 + 0.25 * f64::from(i)).collect()
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            subcarriers: 128,
            subblock_len: 4,
            active: 2,
            order: 16,
            schemes: Scheme::ALL.to_vec(),
            radius: 0.5,
            r1: 0.0,
            allow_margin_violation: false,
            trials: 10_000,
            seed: 1,
            snr_grid: default_snr_grid(),
            ccdf_grid: default_ccdf_grid(),
            denominator: DenominatorMode::Ensemble,
            power_reference: PowerReference::Scheme,
            oversample: 1,
            detector: DetectorPolicy::MaxCapturedPower,
            solver: SolverSettings::default(),
            calibration_blocks: 2000,
            max_bits: 1_000_000,
            target_errors: 200,
        }
    }
}

fn spec_err(msg: impl Into<String>) -> SimError {
    SimError::Spec(msg.into())
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(spec_err(format!("{name} must not be empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(spec_err(format!("{name} must contain finite values")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(spec_err(format!("{name} must be strictly ascending")));
    }
    Ok(())
}

impl RunSpec {
    /// Reads a TOML file; keys absent from the file keep their defaults.
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        toml::from_str(&text).map_err(|e| SimError::Config { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn system_config(&self) -> Result<SystemConfig> {
        Ok(SystemConfig::new(self.subcarriers, self.subblock_len, self.active, self.order)?)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = self.system_config()?;
        let cons = make_qam(cfg.order())?;
        if self.trials == 0 {
            return Err(spec_err("trials must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(spec_err("at least one scheme is required"));
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return Err(spec_err(format!("scheme {s} listed twice")));
            }
        }
        check_grid("snr_grid", &self.snr_grid)?;
        check_grid("ccdf_grid", &self.ccdf_grid)?;
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(spec_err("R must be a finite nonnegative number"));
        }
        if !(self.r1 >= 0.0 && self.r1.is_finite()) {
            return Err(spec_err("R1 must be a finite nonnegative number"));
        }
        if self.schemes.contains(&Scheme::Multilevel) && !self.allow_margin_violation && self.r1 >= cons.levels()[0] {
            return Err(spec_err(format!(
                "R1 = {} is not below the smallest amplitude {}; set allow_margin_violation to override",
                self.r1,
                cons.levels()[0]
            )));
        }
        if self.oversample == 0 {
            return Err(spec_err("oversample must be at least 1"));
        }
        if self.calibration_blocks == 0 {
            return Err(spec_err("calibration_blocks must be at least 1"));
        }
        if self.max_bits == 0 || self.target_errors == 0 {
            return Err(spec_err("max_bits and target_errors must be positive"));
        }
        self.solver.options().validate()?;
        if self.solver.restarts == 0 {
            return Err(spec_err("solver.restarts must be at least 1"));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
