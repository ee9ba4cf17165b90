//! Run configuration: defaults, optional TOML file, then command-line overrides.

use std::path::{Path, PathBuf};

use catwell::mapping::DeviceLimits;
use catwell::operators::DoubleWellParams;
use catwell::spectra::{GridSpec, HalfLine};
use catwell::workflow::{Engine, RateConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Source of the inverse rate reported against published values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RateMethod {
    /// Exponential fit of the product population.
    Fit,
    /// Slowest Lindbladian decay only; skips propagation.
    Spectral,
}

/// Inclusive range `lo:hi:n` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        catwell::chem::linspace(self.lo, self.hi, self.n)
    }
}

impl std::str::FromStr for Range {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:n, got `{s}`"));
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| format!("bad lower bound in `{s}`"))?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| format!("bad upper bound in `{s}`"))?;
        let n: usize = parts[2].trim().parse().map_err(|_| format!("bad point count in `{s}`"))?;
        if n == 0 || (n > 1 && !(hi > lo)) {
            return Err(format!("range `{s}` must have n >= 1 and hi > lo"));
        }
        Ok(Range { lo, hi, n })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub eps1: Range,
    pub eps2: Range,
    pub dim: usize,
    pub m: usize,
    pub delta: f64,
    pub kerr: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            eps1: Range { lo: 0.0, hi: 4.0, n: 101 },
            eps2: Range { lo: 0.0, hi: 10.0, n: 101 },
            dim: 40,
            m: 20,
            delta: 0.0,
            kerr: 1.0,
        }
    }
}

/// Every knob the subcommands read. Field docs double as the config reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Registry system name; ignored when `params` is given.
    pub system: Option<String>,
    /// Raw potential instead of a registry entry.
    pub params: Option<DoubleWellParams>,
    /// Mapping scales (bohr); dynamics runs once per value.
    pub c: Vec<f64>,
    /// Optional `lo:hi:n` scan for `spectra`.
    pub c_scan: Option<Range>,
    pub dim: usize,
    pub m: usize,
    /// Levels compared by `spectra`; the registry count when unset.
    pub levels: Option<usize>,
    pub kappa: f64,
    pub n_th: f64,
    pub tau: f64,
    pub stride: usize,
    pub horizon_factor: f64,
    pub max_steps: usize,
    pub n_steps: Option<usize>,
    pub tail: f64,
    pub threshold: f64,
    pub burn_in: usize,
    pub projector_cut: f64,
    pub reactant_side: Option<HalfLine>,
    pub filter_cut: Option<f64>,
    pub grid: GridSpec,
    pub engines: Vec<Engine>,
    /// Placeholder device ceilings; not measured hardware values.
    pub limits: DeviceLimits,
    pub sweep: SweepSettings,
    /// Dissipation pairs for `table2` as `[kappa, n_th]`.
    pub table2_pairs: Vec<[f64; 2]>,
    /// Which T_X `table2` compares with the published values.
    pub table2_method: RateMethod,
    pub out: PathBuf,
}

impl Default for Settings {
    fn default() -> Self {
        let r = RateConfig::default();
        Self {
            system: None,
            params: None,
            c: vec![r.c],
            c_scan: None,
            dim: r.dim,
            m: r.m,
            levels: None,
            kappa: r.kappa,
            n_th: r.n_th,
            tau: r.tau,
            stride: r.stride,
            horizon_factor: r.horizon_factor,
            max_steps: r.max_steps,
            n_steps: r.n_steps,
            tail: r.tail,
            threshold: r.threshold,
            burn_in: r.burn_in,
            projector_cut: r.projector_cut,
            reactant_side: None,
            filter_cut: None,
            grid: r.grid,
            engines: vec![Engine::DoubleWell, Engine::KerrCat],
            limits: DeviceLimits::default(),
            sweep: SweepSettings::default(),
            table2_pairs: vec![[0.1, 0.1], [0.1, 0.05], [0.025, 0.1], [0.025, 0.05]],
            table2_method: RateMethod::Fit,
            out: PathBuf::from("out"),
        }
    }
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
        }
    }

    pub fn rate_config(&self, c: f64) -> RateConfig {
        RateConfig {
            c,
            dim: self.dim,
            m: self.m,
            kappa: self.kappa,
            n_th: self.n_th,
            tau: self.tau,
            stride: self.stride,
            horizon_factor: self.horizon_factor,
            max_steps: self.max_steps,
            n_steps: self.n_steps,
            grid: self.grid,
            tail: self.tail,
            threshold: self.threshold,
            burn_in: self.burn_in,
            projector_cut: self.projector_cut,
            reactant_side: self.reactant_side,
            filter_cut: self.filter_cut,
        }
    }

    /// Name used in output files and the potential to simulate.
    pub fn resolve_system(&self) -> Result<(String, DoubleWellParams), CliError> {
        if let Some(p) = self.params {
            p.validate().map_err(CliError::from)?;
            return Ok((self.system.clone().unwrap_or_else(|| "custom".into()), p));
        }
        let name = self
            .system
            .as_deref()
            .ok_or_else(|| CliError::Config(format!("no system given (known: {})", catwell::chem::registry().names().join(", "))))?;
        let sys = catwell::chem::registry().get(name).map_err(CliError::from)?;
        Ok((sys.name.clone(), sys.params()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.c.is_empty() {
            return Err(CliError::Config("at least one c value is required".into()));
        }
        for &c in &self.c {
            self.rate_config(c).validate().map_err(CliError::from)?;
        }
        if self.engines.is_empty() {
            return Err(CliError::Config("at least one engine is required".into()));
        }
        self.limits.validate().map_err(CliError::from)?;
        if self.sweep.m == 0 || self.sweep.m > self.sweep.dim {
            return Err(CliError::Config(format!("sweep.m = {} must be in 1..=sweep.dim ({})", self.sweep.m, self.sweep.dim)));
        }
        if !(self.sweep.kerr > 0.0) {
            return Err(CliError::Config("sweep.kerr must be positive".into()));
        }
        Ok(())
    }
}
