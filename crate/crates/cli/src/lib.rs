//! Scenario-driven front end: configuration, per-mode runners, deterministic
//! CSV/JSON output and the verification suite.

pub mod config;
pub mod output;
pub mod scenarios;
pub mod verify;

use std::path::{Path, PathBuf};

use oscspin_core::Error as CoreError;

use config::{Mode, ScenarioConfig};
use output::{Provenance, ResultTable};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical quality gate: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. }
            | CoreError::InvalidFactor { .. }
            | CoreError::DimensionMismatch { .. }
            | CoreError::TooLarge { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub tables: Vec<ResultTable>,
    pub written: Vec<PathBuf>,
    pub report: Vec<String>,
}

/// Runs `mode` on a loaded configuration and writes its tables to `out`.
pub fn run(mode: Mode, mut cfg: ScenarioConfig, out: &Path, timestamp: bool) -> Result<RunOutput, CliError> {
    cfg.resolve(mode);
    cfg.validate(mode)?;
    let provenance = Provenance {
        mode,
        resolved_config: cfg.to_toml(mode),
        timestamp,
    };
    let mut report = Vec::new();
    let tables = match mode {
        Mode::Coefficients => scenarios::run_coefficients(&cfg)?,
        Mode::SweepTemperature => scenarios::run_sweep_temperature(&cfg)?,
        Mode::EvolveBm => scenarios::run_evolve_bm(&cfg)?,
        Mode::EvolveJoint => scenarios::run_evolve_joint(&cfg)?,
        Mode::EvolveAdiabatic => scenarios::run_evolve_adiabatic(&cfg)?,
        Mode::Fig2 => vec![scenarios::run_fig2(&cfg)?],
        Mode::Fig3 => scenarios::run_fig3(&cfg)?.0,
        Mode::Verify => {
            let r = verify::run_verify(&cfg);
            report = r.checks.iter().map(|c| c.line()).collect();
            if !r.passed() {
                let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                for line in &report {
                    println!("{line}");
                }
                return Err(CliError::VerifyFailed(failed.join(", ")));
            }
            Vec::new()
        }
    };
    let written = provenance.write_all(out, &tables, cfg.output.format)?;
    Ok(RunOutput {
        tables,
        written,
        report,
    })
}
