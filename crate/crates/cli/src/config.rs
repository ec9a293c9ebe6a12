//! Flat JSON run configuration: loading, validation, and the resolved
//! snapshot embedded in every report.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use mdiqkd::channel::TallyMode;
use mdiqkd::pipeline::PipelineOptions;
use mdiqkd::{Budget64, Channel64, Profile64};

/// Failures surfaced to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed, or invalid configuration (exit 2).
    Config(String),
    /// The estimation pipeline failed on valid inputs (exit 3).
    Internal(String),
    /// Output could not be written (exit 1).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Internal(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Internal(m) => write!(f, "estimation error: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

/// Map a pipeline failure on already-validated inputs to exit code 3.
pub fn internal(e: mdiqkd::Error) -> CliError {
    CliError::Internal(e.to_string())
}

fn default_rep_rate_hz() -> f64 {
    5e7
}

fn default_split_ratio() -> f64 {
    0.5
}

/// Tally mode as written in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigMode {
    Expected,
    Binomial,
}

/// One experiment as described by a flat JSON document. Field names carry
/// units; unknown fields are rejected so typos cannot silently revert a
/// value to its default.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha_db_per_km: f64,
    pub eta_d: f64,
    pub y0: f64,
    pub ed_z: f64,
    pub ed_x: f64,
    pub f_ec: f64,
    pub epsilon: f64,
    pub distance_km: f64,
    #[serde(default = "default_rep_rate_hz")]
    pub rep_rate_hz: f64,
    pub n_total: u64,
    #[serde(default = "default_split_ratio")]
    pub split_ratio: f64,
    pub mu: f64,
    pub nu: f64,
    pub omega: f64,
    pub p_mu: f64,
    pub p_nu: f64,
    pub p_omega: f64,
    /// Optional tally mode; the --mode flag overrides it.
    #[serde(default)]
    pub mode: Option<ConfigMode>,
    /// Optional sampling seed; the --rng-seed flag overrides it.
    #[serde(default)]
    pub rng_seed: Option<u64>,
}

/// Read and parse a configuration file, reporting the JSON path of the
/// offending field on failure.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        CliError::Config(format!(
            "{}: field `{}`: {}",
            path.display(),
            e.path(),
            e.inner()
        ))
    })
}

/// Settings actually used by a run, echoed verbatim into reports so every
/// report is reproducible from itself.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub alpha_db_per_km: f64,
    pub eta_d: f64,
    pub y0: f64,
    pub ed_z: f64,
    pub ed_x: f64,
    pub f_ec: f64,
    pub epsilon: f64,
    pub distance_km: f64,
    pub rep_rate_hz: f64,
    pub n_total: u64,
    pub split_ratio: f64,
    pub mu: f64,
    pub nu: f64,
    pub omega: f64,
    pub p_mu: f64,
    pub p_nu: f64,
    pub p_omega: f64,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    pub grid: [usize; 2],
}

/// A validated, override-applied run: typed inputs plus their serialized
/// echo.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ResolvedConfig,
    pub profile: Profile64,
    pub channel: Channel64,
    pub options: PipelineOptions,
}

/// Command-line overrides applied on top of a [`RunConfig`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub mode: Option<ConfigMode>,
    pub rng_seed: Option<u64>,
    pub grid: Option<(usize, usize)>,
    pub distance_km: Option<f64>,
    pub collect_surface: bool,
}

/// Apply overrides and validate everything the pipeline will consume, so
/// that any later failure is internal rather than a configuration problem.
pub fn resolve(cfg: &RunConfig, ov: &Overrides) -> Result<Resolved, CliError> {
    let invalid = |e: mdiqkd::Error| CliError::Config(e.to_string());
    let profile = Profile64::new(cfg.mu, cfg.nu, cfg.omega, cfg.p_mu, cfg.p_nu, cfg.p_omega)
        .map_err(invalid)?;
    let channel = Channel64 {
        alpha_db_per_km: cfg.alpha_db_per_km,
        eta_d: cfg.eta_d,
        y0: cfg.y0,
        ed_z: cfg.ed_z,
        ed_x: cfg.ed_x,
        f_ec: cfg.f_ec,
        epsilon: cfg.epsilon,
        distance_km: ov.distance_km.unwrap_or(cfg.distance_km),
        rep_rate_hz: cfg.rep_rate_hz,
        n_total: cfg.n_total,
        split_ratio: cfg.split_ratio,
    }
    .validated()
    .map_err(invalid)?;
    Budget64::new(cfg.epsilon).map_err(invalid)?;

    let mode = ov.mode.or(cfg.mode).unwrap_or(ConfigMode::Expected);
    let seed = ov.rng_seed.or(cfg.rng_seed).unwrap_or(0);
    let tally_mode = match mode {
        ConfigMode::Expected => TallyMode::Expected,
        ConfigMode::Binomial => TallyMode::Binomial { seed },
    };
    let grid = ov.grid.unwrap_or(PipelineOptions::default().grid);

    let config = ResolvedConfig {
        alpha_db_per_km: channel.alpha_db_per_km,
        eta_d: channel.eta_d,
        y0: channel.y0,
        ed_z: channel.ed_z,
        ed_x: channel.ed_x,
        f_ec: channel.f_ec,
        epsilon: channel.epsilon,
        distance_km: channel.distance_km,
        rep_rate_hz: channel.rep_rate_hz,
        n_total: channel.n_total,
        split_ratio: channel.split_ratio,
        mu: profile.mu(),
        nu: profile.nu(),
        omega: profile.omega(),
        p_mu: profile.p_mu(),
        p_nu: profile.p_nu(),
        p_omega: profile.p_omega(),
        mode: match mode {
            ConfigMode::Expected => "expected",
            ConfigMode::Binomial => "binomial",
        },
        rng_seed: match mode {
            ConfigMode::Expected => None,
            ConfigMode::Binomial => Some(seed),
        },
        grid: [grid.0, grid.1],
    };
    let options = PipelineOptions {
        mode: tally_mode,
        grid,
        collect_surface: ov.collect_surface,
    };
    Ok(Resolved {
        config,
        profile,
        channel,
        options,
    })
}
