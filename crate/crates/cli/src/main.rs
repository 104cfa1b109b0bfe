//! `tls-response`: spectra of a monochromatically driven two-level system.
//!
//! Subcommands: `spectrum` (frequency-lattice continued fraction), `oracle`
//! (time-domain propagation + damped transform), `compare` (both routes plus
//! peak matching; exit status reflects the match), `figure5` (the four named
//! presets through `compare`), `bcs` (mean-field gap equation).

// parameter guards are written `!(x > 0.0)` so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use driven_tls::bcs::{gap_residual, solve_gap, BcsModel};
use driven_tls::cfrac::assemble_response;
use driven_tls::kernel::{BandKernel, DriveSpec, Regularization};
use driven_tls::oracle::{propagate, suggested_dt};
use driven_tls::spectrum::{compare_peaks, damped_transform, find_peaks, PeakReport};
use driven_tls::ResponseSpectrum;
use serde::Serialize;

use config::{BcsConfig, OutputFormat, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "tls-response", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Named parameter set (figure5-a .. figure5-d)
    #[arg(long)]
    preset: Option<String>,
    /// Optional key=value config file (same keys as the flags)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Energy splitting over the gap, epsilon/delta
    #[arg(long)]
    epsilon: Option<f64>,
    /// Drive amplitude over the gap, A/delta
    #[arg(long)]
    amplitude: Option<f64>,
    /// Drive frequency over the gap, w/delta
    #[arg(long)]
    omega_drive: Option<f64>,
    /// Broadening over the gap, gamma/delta
    #[arg(long)]
    gamma: Option<f64>,
    /// Frequency grid as min:max:n (units of the gap)
    #[arg(long)]
    grid: Option<String>,
    /// Continued-fraction depth (iteration levels)
    #[arg(long)]
    depth: Option<usize>,
    /// Number of off-diagonal chain terms summed into K
    #[arg(long)]
    n_gamma: Option<usize>,
    /// Integrator step as a fraction of the fastest period
    #[arg(long)]
    dt_factor: Option<f64>,
    /// Trace window in units of 1/delta
    #[arg(long)]
    window: Option<f64>,
    /// Peak-matching tolerance in units of delta
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output path (compare and figure5 derive sibling files from it)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct BcsArgs {
    /// Optional key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pairing interaction constant g
    #[arg(long)]
    coupling: Option<f64>,
    /// Density of states at the Fermi level, N(0)
    #[arg(long)]
    dos: Option<f64>,
    /// Single-particle energy epsilon_k
    #[arg(long)]
    epsilon_k: Option<f64>,
    /// Frequency cutoff Lambda
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Continued-fraction response spectrum
    Spectrum(CommonArgs),
    /// Time-domain propagation and damped transform
    Oracle(CommonArgs),
    /// Both routes, peak reports and the match table
    Compare(CommonArgs),
    /// Run compare over the four named presets
    Figure5(CommonArgs),
    /// Solve the mean-field gap equation
    Bcs(BcsArgs),
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            let record = ErrorRecord {
                error: ErrorBody { kind: "run_failed", message: format!("{err:#}") },
            };
            eprintln!("{}", serde_json::to_string(&record).unwrap());
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Spectrum(args) => {
            let config = resolve(&args, "spectrum")?;
            let spec = cf_spectrum(&config)?;
            let path = out_path(&config, "spectrum")?;
            output::write_spectrum(&spec, &config, &path)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle(args) => {
            let config = resolve(&args, "oracle")?;
            let spec = oracle_spectrum(&config)?;
            let path = out_path(&config, "oracle")?;
            output::write_spectrum(&spec, &config, &path)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare(args) => {
            let config = resolve(&args, "compare")?;
            let ok = run_compare(&config)?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Figure5(args) => {
            let mut all_ok = true;
            let out_dir = args.out.clone().unwrap_or_else(|| PathBuf::from("figure5_out"));
            std::fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            for name in ["figure5-a", "figure5-b", "figure5-c", "figure5-d"] {
                let mut preset_args = args.clone();
                preset_args.preset = Some(name.to_string());
                preset_args.out = Some(out_dir.join(name));
                let config = resolve(&preset_args, "figure5")?;
                let ok = run_compare(&config)?;
                println!("{name}: {}", if ok { "match" } else { "MISMATCH" });
                all_ok &= ok;
            }
            Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Bcs(args) => {
            let mut layers = Overrides::default();
            if let Some(path) = &args.config {
                layers = layers.layered_under(config::parse_config_file(path)?);
            }
            let flags = Overrides {
                coupling: args.coupling,
                dos: args.dos,
                epsilon_k: args.epsilon_k,
                cutoff: args.cutoff,
                out: args.out.clone(),
                format: args.format.as_deref().map(str::parse).transpose()?,
                ..Overrides::default()
            };
            let config = BcsConfig::resolve(layers.layered_under(flags))?;
            run_bcs(&config)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn resolve(args: &CommonArgs, command: &str) -> Result<RunConfig> {
    let mut layers = Overrides::default();
    if let Some(name) = &args.preset {
        layers = layers.layered_under(config::preset(name)?);
    }
    if let Some(path) = &args.config {
        layers = layers.layered_under(config::parse_config_file(path)?);
    }
    let flags = Overrides {
        epsilon: args.epsilon,
        amplitude: args.amplitude,
        omega_drive: args.omega_drive,
        gamma: args.gamma,
        grid: args.grid.as_deref().map(str::parse).transpose()?,
        depth: args.depth,
        n_gamma: args.n_gamma,
        dt_factor: args.dt_factor,
        window: args.window,
        tolerance: args.tolerance,
        out: args.out.clone(),
        format: args.format.as_deref().map(str::parse).transpose()?,
        ..Overrides::default()
    };
    RunConfig::resolve(command, layers.layered_under(flags))
}

fn band_kernel(config: &RunConfig) -> Result<BandKernel> {
    let drive =
        DriveSpec::monochromatic(config.epsilon, config.amplitude, config.omega_drive, 1.0)?;
    let reg = Regularization::new(config.gamma)?;
    Ok(BandKernel::new(drive, reg))
}

fn cf_spectrum(config: &RunConfig) -> Result<ResponseSpectrum> {
    let kernel = band_kernel(config)?;
    let grid = config.grid.points();
    Ok(assemble_response(&kernel, &grid, config.depth, config.n_gamma)?)
}

fn oracle_spectrum(config: &RunConfig) -> Result<ResponseSpectrum> {
    let drive =
        DriveSpec::monochromatic(config.epsilon, config.amplitude, config.omega_drive, 1.0)?;
    let dt = suggested_dt(&drive, config.dt_factor);
    // thin the stored trace for the transform; 0.02/delta spacing resolves
    // the default window with margin. Round the step count up to a stride
    // multiple so decimation still covers the full window.
    let stride = (0.02 / dt).floor().max(1.0) as usize;
    let n_steps = (config.window / dt).ceil() as usize;
    let n_steps = n_steps.div_ceil(stride) * stride;
    let trace = propagate(&drive, dt, n_steps)?;
    let grid = config.grid.points();
    Ok(damped_transform(&trace.decimated(stride), config.gamma, &grid)?)
}

/// Peak lists for matching: the reported list keeps peaks above 5% of the
/// curve maximum; the partner-candidate floor is looser (0.1%) so genuine
/// low satellites stay available as partners.
fn peak_report(spec: &ResponseSpectrum, window: (f64, f64), floor_frac: f64) -> Result<PeakReport> {
    let max = spec.magnitudes().iter().cloned().fold(0.0f64, f64::max);
    Ok(find_peaks(spec, floor_frac * max, window)?)
}

fn run_compare(config: &RunConfig) -> Result<bool> {
    let stem = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("compare-{}", config.command)));
    let cf = cf_spectrum(config)?;
    let oracle = oracle_spectrum(config)?;
    let window = (config.grid.omega_min, config.grid.omega_max);
    let cf_peaks = peak_report(&cf, window, 0.05)?;
    let oracle_peaks = peak_report(&oracle, window, 0.001)?;
    let table = compare_peaks(&cf_peaks, &oracle_peaks, config.tolerance);
    // the positional claim is directional: every reported continued-fraction
    // peak must have a time-domain partner (low oracle satellites below the
    // reporting floor are allowed to go unclaimed)
    let success = table.unmatched_a.is_empty();

    let suffix = match config.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let cf_path = stem.with_extension(format!("cf.{suffix}"));
    let oracle_path = stem.with_extension(format!("oracle.{suffix}"));
    let match_path = stem.with_extension("match.json");
    output::write_spectrum(&cf, config, &cf_path)?;
    output::write_spectrum(&oracle, config, &oracle_path)?;
    output::write_pretty_json(
        &output::match_document(config, &cf_peaks, &oracle_peaks, &table, success),
        &match_path,
    )?;
    println!(
        "wrote {}, {}, {} ({} matched pairs, success = {})",
        cf_path.display(),
        oracle_path.display(),
        match_path.display(),
        table.pairs.len(),
        success
    );
    Ok(success)
}

#[derive(Serialize)]
struct BcsRecord<'a> {
    config: &'a BcsConfig,
    delta0: f64,
    residual: f64,
    version: &'static str,
}

fn run_bcs(config: &BcsConfig) -> Result<()> {
    let model = BcsModel::new(config.coupling, config.dos, config.epsilon_k, config.cutoff)?;
    let delta0 = solve_gap(&model)?;
    let residual = gap_residual(&model, delta0)?;
    let record = BcsRecord { config, delta0, residual, version: output::ARTIFACT_VERSION };
    match (&config.out, config.format) {
        (Some(path), OutputFormat::Json) => {
            output::write_pretty_json(&record, path)?;
            println!("wrote {}", path.display());
        }
        (Some(path), OutputFormat::Csv) => {
            let mut text = String::from("g,n0,epsilon_k,cutoff,delta0,residual\n");
            text.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                config.coupling, config.dos, config.epsilon_k, config.cutoff, delta0, residual
            ));
            std::fs::write(path, text)?;
            println!("wrote {}", path.display());
        }
        (None, _) => {
            println!("{}", serde_json::to_string_pretty(&record)?);
        }
    }
    Ok(())
}

fn out_path(config: &RunConfig, command: &str) -> Result<PathBuf> {
    config
        .out
        .clone()
        .map(Ok)
        .unwrap_or_else(|| Err(anyhow!("--out is required for {command} output")))
}
