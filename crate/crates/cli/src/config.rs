//! Scenario configuration: a TOML file with one table per concern, `--set`
//! overrides, validation and resolution of defaults that depend on the mode.

use std::fmt;
use std::path::Path;

use clap::ValueEnum;
use oscspin_core::spin_bath::{D0Policy, SpinParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Mode {
    Coefficients,
    SweepTemperature,
    EvolveBm,
    EvolveJoint,
    EvolveAdiabatic,
    Fig2,
    Fig3,
    Verify,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Coefficients => "coefficients",
            Mode::SweepTemperature => "sweep_temperature",
            Mode::EvolveBm => "evolve_bm",
            Mode::EvolveJoint => "evolve_joint",
            Mode::EvolveAdiabatic => "evolve_adiabatic",
            Mode::Fig2 => "fig2",
            Mode::Fig3 => "fig3",
            Mode::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub oscillator: OscillatorSection,
    pub bath: BathSection,
    pub coefficients: CoefficientSection,
    pub sweep: SweepSection,
    pub tls: TlsSection,
    pub evolution: EvolutionSection,
    pub fig3: Fig3Section,
    pub verify: VerifySection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillatorSection {
    pub mass: f64,
    pub omega0: f64,
}

impl Default for OscillatorSection {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega0: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathKind {
    Ohmic,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathSection {
    pub kind: BathKind,
    /// Ohmic parameters `M`, `γ₀`, `Λ`.
    pub mass: f64,
    pub gamma0: f64,
    pub cutoff_freq: f64,
    /// Discrete spins, used when `kind = "discrete"`.
    pub spins: Vec<SpinParams>,
}

impl Default for BathSection {
    fn default() -> Self {
        Self {
            kind: BathKind::Ohmic,
            mass: 1.0,
            gamma0: 1.0,
            cutoff_freq: 10.0,
            spins: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Closed `γ`, `D₁` with principal-value shift and `f₁` (ohmic only).
    ClosedForm,
    /// Regulated τ integrals with extrapolation.
    Quadrature,
    FrequencyDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoefficientSection {
    pub temperature: f64,
    pub route: Route,
    pub d0: D0Policy,
    /// Static correlation for a continuum density.
    pub c0: f64,
    pub epsilon0: Option<f64>,
    pub tolerance: f64,
    /// Lorentzian width given to each line of a discrete bath.
    pub line_width: f64,
}

impl Default for CoefficientSection {
    fn default() -> Self {
        Self {
            temperature: 0.1,
            route: Route::ClosedForm,
            d0: D0Policy::default(),
            c0: 0.0,
            epsilon0: None,
            tolerance: 1e-3,
            line_width: 0.1,
        }
    }
}

/// Temperature grid in units of `Ω₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            t_min: 0.02,
            t_max: 3.0,
            points: 60,
        }
    }
}

impl SweepSection {
    /// Linear grid of absolute temperatures.
    pub fn temperatures(&self, omega0: f64) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.t_min * omega0];
        }
        let step = (self.t_max - self.t_min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| (self.t_min + step * k as f64) * omega0)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TlsSection {
    pub delta: f64,
    pub g: f64,
    pub gamma_tls: f64,
    /// Exactly one of `nbar` and `temperature` is given.
    pub nbar: Option<f64>,
    pub temperature: Option<f64>,
    pub hamiltonian_factor: f64,
}

impl Default for TlsSection {
    fn default() -> Self {
        Self {
            delta: 1.0,
            g: 1.0,
            gamma_tls: 10.0,
            nbar: Some(0.0),
            temperature: None,
            hamiltonian_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    Vacuum,
    Fock { n: usize },
    Coherent { re: f64, im: f64 },
    Thermal { nbar: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSection {
    pub t_end: f64,
    /// Step; filled in per mode when absent.
    pub dt: Option<f64>,
    /// Output interval in time units.
    pub sample_interval: f64,
    /// Fock cutoff; filled in per mode when absent.
    pub cutoff: Option<usize>,
    pub local_tol: f64,
    pub initial: InitialState,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            t_end: 5.0,
            dt: None,
            sample_interval: 0.05,
            cutoff: None,
            local_tol: 1e-6,
            initial: InitialState::Vacuum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3Section {
    pub gammas: Vec<f64>,
    pub nbars: Vec<f64>,
    pub t_end: f64,
    pub cutoff: usize,
    /// Step per `γ_tls`; filled in when absent.
    pub dt: Option<f64>,
    pub sample_interval: f64,
    /// Window for the heating-rate fits.
    pub fit_start: f64,
}

impl Default for Fig3Section {
    fn default() -> Self {
        Self {
            gammas: vec![10.0, 100.0],
            nbars: vec![0.0, 0.5, 1.0],
            t_end: 5.0,
            cutoff: 80,
            dt: None,
            sample_interval: 0.05,
            fit_start: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Multiplies every verification threshold.
    pub tolerance_scale: f64,
    /// Flips the sign of the joint dissipators; the dissipativity check must fail.
    pub mis_signed_dissipator: bool,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            tolerance_scale: 1.0,
            mis_signed_dissipator: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { format: Format::Csv }
    }
}

/// Default step for joint runs: `min(0.01/Ω₀, 0.05/γ)`.
pub fn default_joint_dt(omega0: f64, gamma_tls: f64) -> f64 {
    (0.01 / omega0).min(0.05 / gamma_tls)
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses the right-hand side of `--set` as a TOML value, falling back to a
/// bare string.
fn parse_override_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Applies `section.key=value` to a TOML tree, creating tables as needed.
pub fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_error(format!("override `{assignment}` is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(config_error(format!("bad key path `{path}`")));
    }
    let mut table = root;
    for key in &keys[..keys.len() - 1] {
        let entry = table
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| config_error(format!("`{key}` in `{path}` is not a table")))?;
    }
    table.insert(keys[keys.len() - 1].to_string(), parse_override_value(raw.trim()));
    Ok(())
}

impl ScenarioConfig {
    /// Reads the optional file, applies overrides and deserializes strictly.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut root = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| config_error(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        Self::from_table(root)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let root = text
            .parse::<toml::Table>()
            .map_err(|e| config_error(e.to_string()))?;
        Self::from_table(root)
    }

    fn from_table(root: toml::Table) -> Result<Self, CliError> {
        toml::Value::Table(root)
            .try_into::<ScenarioConfig>()
            .map_err(|e| config_error(e.to_string()))
    }

    /// Fills mode-dependent defaults so the written config is complete.
    pub fn resolve(&mut self, mode: Mode) {
        let ev = &mut self.evolution;
        if ev.cutoff.is_none() {
            ev.cutoff = Some(30);
        }
        if ev.dt.is_none() {
            ev.dt = Some(match mode {
                Mode::EvolveJoint => default_joint_dt(self.oscillator.omega0, self.tls.gamma_tls),
                _ => 0.01 / self.oscillator.omega0,
            });
        }
    }

    pub fn validate(&self, mode: Mode) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_error(format!("`{name}` must be positive, got {v}")))
            }
        };
        positive("oscillator.mass", self.oscillator.mass)?;
        positive("oscillator.omega0", self.oscillator.omega0)?;
        match self.bath.kind {
            BathKind::Ohmic => {
                positive("bath.mass", self.bath.mass)?;
                positive("bath.gamma0", self.bath.gamma0)?;
                positive("bath.cutoff_freq", self.bath.cutoff_freq)?;
            }
            BathKind::Discrete => {
                if self.bath.spins.is_empty() {
                    return Err(config_error("a discrete bath needs at least one entry in `bath.spins`"));
                }
            }
        }
        let c = &self.coefficients;
        if !(c.temperature >= 0.0 && c.temperature.is_finite()) {
            return Err(config_error(format!(
                "`coefficients.temperature` must be non-negative, got {}",
                c.temperature
            )));
        }
        positive("coefficients.tolerance", c.tolerance)?;
        positive("coefficients.line_width", c.line_width)?;
        if let Some(e) = c.epsilon0 {
            positive("coefficients.epsilon0", e)?;
        }
        let s = &self.sweep;
        if s.points == 0 {
            return Err(config_error("`sweep.points` must be at least 1"));
        }
        if !(s.t_min > 0.0) || (s.points > 1 && !(s.t_max > s.t_min)) || !s.t_max.is_finite() {
            return Err(config_error(format!(
                "temperature grid must be positive and increasing, got [{}, {}]",
                s.t_min, s.t_max
            )));
        }
        let t = &self.tls;
        positive("tls.delta", t.delta)?;
        positive("tls.gamma_tls", t.gamma_tls)?;
        if !t.g.is_finite() {
            return Err(config_error("`tls.g` must be finite"));
        }
        match (t.nbar, t.temperature) {
            (Some(n), None) if n >= 0.0 && n.is_finite() => {}
            (None, Some(temp)) if temp >= 0.0 && temp.is_finite() => {}
            _ => {
                return Err(config_error(
                    "give exactly one non-negative value of `tls.nbar` and `tls.temperature`",
                ))
            }
        }
        if t.hamiltonian_factor != 1.0 && t.hamiltonian_factor != 0.5 {
            return Err(config_error(format!(
                "`tls.hamiltonian_factor` must be 1 or 0.5, got {}",
                t.hamiltonian_factor
            )));
        }
        let e = &self.evolution;
        positive("evolution.t_end", e.t_end)?;
        positive("evolution.sample_interval", e.sample_interval)?;
        positive("evolution.local_tol", e.local_tol)?;
        if let Some(dt) = e.dt {
            positive("evolution.dt", dt)?;
        }
        if let Some(n) = e.cutoff {
            if n < 2 {
                return Err(config_error("`evolution.cutoff` must be at least 2"));
            }
        }
        let f = &self.fig3;
        if f.gammas.is_empty() || f.nbars.is_empty() {
            return Err(config_error("`fig3.gammas` and `fig3.nbars` must be nonempty"));
        }
        if !f.gammas.windows(2).all(|w| w[1] > w[0]) || !f.nbars.windows(2).all(|w| w[1] > w[0]) {
            return Err(config_error("`fig3.gammas` and `fig3.nbars` must be increasing"));
        }
        for &g in &f.gammas {
            positive("fig3.gammas", g)?;
        }
        if f.nbars.iter().any(|n| !(*n >= 0.0 && n.is_finite())) {
            return Err(config_error("`fig3.nbars` must be non-negative"));
        }
        positive("fig3.t_end", f.t_end)?;
        positive("fig3.sample_interval", f.sample_interval)?;
        if let Some(dt) = f.dt {
            positive("fig3.dt", dt)?;
        }
        if f.cutoff < 2 {
            return Err(config_error("`fig3.cutoff` must be at least 2"));
        }
        if !(f.fit_start >= 0.0 && f.fit_start < f.t_end) {
            return Err(config_error("`fig3.fit_start` must lie in [0, t_end)"));
        }
        if !(self.verify.tolerance_scale > 0.0) {
            return Err(config_error("`verify.tolerance_scale` must be positive"));
        }
        if mode == Mode::Fig2 && self.bath.kind != BathKind::Ohmic {
            return Err(config_error("fig2 needs an ohmic bath"));
        }
        Ok(())
    }

    /// Resolved configuration as TOML, with `mode` on top.
    pub fn to_toml(&self, mode: Mode) -> String {
        #[derive(Serialize)]
        struct Tagged<'a> {
            mode: Mode,
            #[serde(flatten)]
            config: &'a ScenarioConfig,
        }
        toml::to_string(&Tagged { mode, config: self }).expect("configuration serializes")
    }
}
