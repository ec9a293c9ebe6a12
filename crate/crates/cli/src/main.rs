//! Command-line surface for finite-key MDI-QKD rate certification.
//!
//! Subcommands: `evaluate` runs one configuration end to end, `sweep`
//! tabulates rates over a distance range as CSV, and `optimize` searches
//! source settings for the best certified rate. Exit codes: 0 on success
//! (a certified rate of zero is still success), 2 on configuration errors,
//! 3 when estimation fails on valid inputs.

// Guards are written negated (`!(x > 0.0)`) so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use mdiqkd::optimize::{optimize_profile, OptimizeOptions};
use mdiqkd::pipeline::run;
use mdiqkd::{KeyRate64, Profile64, Report64};

use config::{load_config, resolve, CliError, ConfigMode, Overrides, Resolved};
use output::{fmt_num, to_json, write_file};

#[derive(Parser)]
#[command(
    name = "mdiqkd",
    version,
    about = "Finite-key MDI-QKD rate certification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one configuration and report certified rates.
    Evaluate(EvaluateArgs),
    /// Tabulate certified rates over a distance range as CSV.
    Sweep(SweepArgs),
    /// Search intensities and probabilities for the best certified rate.
    Optimize(OptimizeArgs),
}

/// Tally generation mode.
#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Deterministic rounded expected counts.
    Expected,
    /// Seeded binomial sampling of counts.
    Binomial,
}

impl From<ModeArg> for ConfigMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Expected => ConfigMode::Expected,
            ModeArg::Binomial => ConfigMode::Binomial,
        }
    }
}

/// Estimator selection for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Joint-constraint estimation minimized over the scan rectangle.
    DoubleScan,
    /// Independent worst-casing of every observable.
    Baseline,
}

/// Parse a grid spec such as `16x16` with both axes at least 2.
fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or("expected NxM, e.g. 16x16")?;
    let n: usize = a
        .trim()
        .parse()
        .map_err(|_| format!("bad grid axis `{a}`"))?;
    let m: usize = b
        .trim()
        .parse()
        .map_err(|_| format!("bad grid axis `{b}`"))?;
    if n < 2 || m < 2 {
        return Err("grid axes must be at least 2".to_string());
    }
    Ok((n, m))
}

#[derive(Args)]
struct CommonArgs {
    /// Path to a flat JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the tally generation mode.
    #[arg(long, value_enum, value_name = "MODE")]
    mode: Option<ModeArg>,
    /// Override the sampling seed (binomial mode).
    #[arg(long, value_name = "U64")]
    rng_seed: Option<u64>,
    /// Scan grid resolution.
    #[arg(long, value_parser = parse_grid, value_name = "NxM")]
    grid: Option<(usize, usize)>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            mode: self.mode.map(ConfigMode::from),
            rng_seed: self.rng_seed,
            grid: self.grid,
            distance_km: None,
            collect_surface: false,
        }
    }

    fn resolve(&self, ov: &Overrides) -> Result<Resolved, CliError> {
        resolve(&load_config(&self.config)?, ov)
    }
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Write the full JSON report here.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print the full JSON report to stdout after the summary.
    #[arg(long)]
    explain: bool,
    /// Write modeled per-pair observables as CSV here.
    #[arg(long, value_name = "PATH")]
    dump_observables: Option<PathBuf>,
    /// Write the scanned rate surface as CSV here.
    #[arg(long, value_name = "PATH")]
    dump_surface: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// First fiber length in km.
    #[arg(long, value_name = "KM")]
    d_start: f64,
    /// Last fiber length in km (inclusive).
    #[arg(long, value_name = "KM")]
    d_end: f64,
    /// Distance increment in km.
    #[arg(long, value_name = "KM")]
    d_step: f64,
    /// Estimators to tabulate, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', value_name = "LIST")]
    methods: Option<Vec<MethodArg>>,
    /// Write CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Path to a flat JSON configuration file; its profile seeds the search.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Optimize at this fiber length instead of the configured one.
    #[arg(long, value_name = "KM")]
    distance: Option<f64>,
    /// Number of descent starts (the seed plus perturbed restarts).
    #[arg(long, value_name = "N")]
    restarts: Option<u32>,
    /// Global budget of candidate evaluations.
    #[arg(long, value_name = "N")]
    max_evals: Option<usize>,
    /// Scan grid resolution used to score candidates.
    #[arg(long, value_parser = parse_grid, value_name = "NxM")]
    grid: Option<(usize, usize)>,
    /// Write every scored candidate as JSON lines here.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print the full JSON report to stdout after the summary.
    #[arg(long)]
    explain: bool,
}

/// Full evaluation output: the resolved inputs plus everything the
/// pipeline produced.
#[derive(Serialize)]
struct EvaluateReport<'a> {
    config: &'a config::ResolvedConfig,
    #[serde(flatten)]
    pipeline: &'a Report64,
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let mut ov = args.common.overrides();
    ov.collect_surface = args.dump_surface.is_some();
    let resolved = args.common.resolve(&ov)?;
    let report =
        run(&resolved.profile, &resolved.channel, &resolved.options).map_err(config::internal)?;

    print!(
        "{}",
        output::evaluate_summary(
            &report,
            &resolved.channel,
            resolved.config.mode,
            resolved.config.grid
        )
    );
    if let Some(path) = &args.dump_observables {
        write_file(
            path,
            &output::observables_csv(&resolved.profile, &resolved.channel)?,
        )?;
    }
    if let Some(path) = &args.dump_surface {
        let csv = output::surface_csv(&report.double_scan)
            .ok_or_else(|| CliError::Io("scan produced no surface".to_string()))?;
        write_file(path, &csv)?;
    }
    let json = to_json(&EvaluateReport {
        config: &resolved.config,
        pipeline: &report,
    })?;
    if let Some(path) = &args.out {
        write_file(path, &json)?;
    }
    if args.explain {
        print!("{json}");
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    if !(args.d_start > 0.0) || args.d_end < args.d_start || !(args.d_step > 0.0) {
        return Err(CliError::Config(
            "sweep needs 0 < d-start <= d-end and d-step > 0".to_string(),
        ));
    }
    let methods = args
        .methods
        .clone()
        .unwrap_or_else(|| vec![MethodArg::DoubleScan, MethodArg::Baseline]);
    if methods.is_empty() {
        return Err(CliError::Config(
            "sweep needs at least one method".to_string(),
        ));
    }
    let resolved = args.common.resolve(&args.common.overrides())?;

    // Inclusive endpoint, tolerating a sliver of floating-point drift so an
    // exact multiple of the step is never dropped.
    let count = ((args.d_end - args.d_start) / args.d_step + 1e-9).floor() as usize + 1;
    let distances: Vec<f64> = (0..count)
        .map(|i| args.d_start + args.d_step * i as f64)
        .filter(|&d| d > 0.0)
        .collect();

    let reports: Vec<Report64> = distances
        .par_iter()
        .map(|&d| {
            run(
                &resolved.profile,
                &resolved.channel.at_distance(d),
                &resolved.options,
            )
        })
        .collect::<Result<_, _>>()
        .map_err(config::internal)?;

    let mut csv = String::from(output::SWEEP_HEADER);
    csv.push('\n');
    for (d, report) in distances.iter().zip(&reports) {
        for method in &methods {
            let result: &KeyRate64 = match method {
                MethodArg::DoubleScan => &report.double_scan,
                MethodArg::Baseline => &report.baseline,
            };
            csv.push_str(&output::sweep_row(*d, result));
            csv.push('\n');
        }
    }
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

/// Optimization output: resolved inputs, the seed, and the best profile
/// with its certified rate. The evaluation trace goes to --trace, not here.
#[derive(Serialize)]
struct OptimizeReport<'a> {
    config: &'a config::ResolvedConfig,
    seed: &'a Profile64,
    profile: &'a Profile64,
    result: &'a KeyRate64,
    evals: usize,
    zero_rate: bool,
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<(), CliError> {
    let ov = Overrides {
        distance_km: args.distance,
        ..Overrides::default()
    };
    let cfg = load_config(&args.config)?;
    let resolved = resolve(&cfg, &ov)?;
    let defaults = OptimizeOptions::<f64>::default();
    let options = OptimizeOptions {
        restarts: args.restarts.unwrap_or(defaults.restarts),
        max_evals: args.max_evals.unwrap_or(defaults.max_evals),
        grid: args.grid.unwrap_or(defaults.grid),
        ..defaults
    };
    let outcome = optimize_profile(&resolved.profile, &resolved.channel, &options)
        .map_err(config::internal)?;

    let coords = outcome.profile.coords();
    println!(
        "optimized at {} km in {} evaluations{}",
        fmt_num(resolved.channel.distance_km),
        outcome.evals,
        if outcome.zero_rate {
            " (no candidate certified a positive rate)"
        } else {
            ""
        }
    );
    println!(
        "best profile: mu={} nu={} omega={} p_mu={} p_nu={} p_omega={}",
        fmt_num(coords[0]),
        fmt_num(coords[1]),
        fmt_num(coords[2]),
        fmt_num(coords[3]),
        fmt_num(coords[4]),
        fmt_num(coords[5])
    );
    println!(
        "certified: {} /pulse = {} bps [{}]",
        fmt_num(outcome.result.r_per_pulse),
        fmt_num(outcome.result.r_bps),
        outcome.result.status.label()
    );

    if let Some(path) = &args.trace {
        let mut lines = String::new();
        for entry in &outcome.trace {
            lines.push_str(
                &serde_json::to_string(entry)
                    .map_err(|e| CliError::Io(format!("cannot serialize trace: {e}")))?,
            );
            lines.push('\n');
        }
        write_file(path, &lines)?;
    }
    let json = to_json(&OptimizeReport {
        config: &resolved.config,
        seed: &resolved.profile,
        profile: &outcome.profile,
        result: &outcome.result,
        evals: outcome.evals,
        zero_rate: outcome.zero_rate,
    })?;
    if let Some(path) = &args.out {
        write_file(path, &json)?;
    }
    if args.explain {
        print!("{json}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Optimize(args) => cmd_optimize(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
