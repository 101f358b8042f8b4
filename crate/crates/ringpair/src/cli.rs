//! The `ringpair` command-line tool.
//!
//! Exit status: 0 on success, 2 for usage or validation errors (including a
//! missing input file), 3 when the model or a fit fails, 4 for other I/O
//! errors. Every command writes `<out>.manifest.json` next to its output.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ringpair_core::estimation::fit_lorentzian_dip;
use ringpair_core::montecarlo::{count_coincidences, default_accidental_offset, simulate_timetags, CoincidenceSettings};
use ringpair_core::resonator::CouplingBranch;

use crate::config::{config_warnings, read_config_bytes, ConfigDocument};
use crate::csv_io::{read_tags_csv, read_xy_csv, write_table_csv, write_tags_csv};
use crate::error::{Error, Result};
use crate::output::write_json;
use crate::results::{sha256_hex, CoincidenceReport, RunManifest, TransmissionReport};
use crate::sweep::{linspace, par_car_curve};

/// Columns of the `predict` table.
pub const PREDICT_COLUMNS: [&str; 8] = ["power_mw", "g_pairs_per_s", "p_sfwm_w", "r_s", "r_i", "cc", "ac", "car"];

#[derive(Debug, Parser)]
#[command(name = "ringpair", version, about = "Microring photon-pair source: model, simulate, analyse")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a Lorentzian dip to a transmission spectrum and report Q and loss.
    FitTransmission(FitTransmissionArgs),
    /// Tabulate the analytic rates and CAR over a pump-power sweep.
    Predict(PredictArgs),
    /// Simulate detector time tags at one pump power.
    Simulate(SimulateArgs),
    /// Count coincidences and accidentals in a time-tag file.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Branch {
    Under,
    Over,
    Critical,
}

impl From<Branch> for CouplingBranch {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Under => CouplingBranch::Under,
            Branch::Over => CouplingBranch::Over,
            Branch::Critical => CouplingBranch::Critical,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitTransmissionArgs {
    /// CSV with header and columns frequency (Hz), transmission.
    #[arg(long)]
    pub input: PathBuf,
    /// Output JSON report.
    #[arg(long)]
    pub out: PathBuf,
    /// Coupling regime used to convert loaded to intrinsic Q.
    #[arg(long, value_enum, default_value_t = Branch::Critical)]
    pub branch: Branch,
    /// Group index; enables the propagation-loss estimate.
    #[arg(long)]
    pub group_index: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Device configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub power_mw_min: f64,
    #[arg(long)]
    pub power_mw_max: f64,
    /// Number of evenly spaced powers, including both ends.
    #[arg(long)]
    pub steps: usize,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Device configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Pump power in the bus waveguide, mW.
    #[arg(long)]
    pub power_mw: f64,
    /// Acquisition time, s.
    #[arg(long)]
    pub duration_s: f64,
    /// Seed of the random stream. Required: there is no implicit seed.
    #[arg(long)]
    pub seed: u64,
    /// Output time-tag CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Time-tag CSV (`channel,time_ps`).
    #[arg(long)]
    pub input: PathBuf,
    /// Full coincidence window, ps.
    #[arg(long, default_value_t = 1152)]
    pub window_ps: u64,
    /// Idler shift for accidentals, ps [default: 64 windows].
    #[arg(long)]
    pub offset_ps: Option<u64>,
    /// Histogram bin width, ps [default: window/16].
    #[arg(long)]
    pub bin_ps: Option<u64>,
    /// Histogram half-range, ps [default: one window].
    #[arg(long)]
    pub range_ps: Option<u64>,
    /// Acquisition time, s [default: span of the tags].
    #[arg(long)]
    pub duration_s: Option<f64>,
    /// Output JSON.
    #[arg(long)]
    pub out: PathBuf,
}

/// What a successful command produced.
#[derive(Debug, Clone)]
pub struct CommandOutcome {
    pub outputs: Vec<PathBuf>,
    pub manifest: RunManifest,
    pub warnings: Vec<String>,
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn finish(mut manifest: RunManifest, out: &Path, warnings: Vec<String>) -> Result<CommandOutcome> {
    let mpath = manifest_path(out);
    manifest.outputs = vec![out.display().to_string(), mpath.display().to_string()];
    write_json(&mpath, &manifest)?;
    Ok(CommandOutcome {
        outputs: vec![out.to_path_buf(), mpath],
        manifest,
        warnings,
    })
}

fn load_config(path: &Path, manifest: &mut RunManifest) -> Result<(ringpair_core::DeviceConfig, Vec<String>)> {
    let bytes = read_config_bytes(path)?;
    manifest.input_sha256 = Some(sha256_hex(&bytes));
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Config {
        path: path.into(),
        field: ".".into(),
        reason: e.to_string(),
    })?;
    let device = ConfigDocument::from_json(text)
        .and_then(|d| d.to_device())
        .map_err(|e| Error::Config {
            path: path.into(),
            field: e.field,
            reason: e.reason,
        })?;
    let warnings = config_warnings(&device);
    Ok((device, warnings))
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Argument { name, reason: format!("must be finite and > 0, got {value}") })
    }
}

pub fn fit_transmission(args: &FitTransmissionArgs, arguments: Vec<String>) -> Result<CommandOutcome> {
    let mut manifest = RunManifest::new("fit-transmission", arguments);
    if let Some(n_g) = args.group_index {
        positive("group-index", n_g)?;
    }
    let bytes = std::fs::read(&args.input).map_err(|e| Error::io(&args.input, e))?;
    manifest.input_sha256 = Some(sha256_hex(&bytes));
    let spectrum = read_xy_csv(&args.input)?;
    let fit = fit_lorentzian_dip(&spectrum)?;
    let report = TransmissionReport::new(&fit, args.branch.into(), args.group_index, spectrum.len());
    write_json(&args.out, &report)?;
    let outcome = finish(manifest, &args.out, Vec::new())?;
    if !report.converged {
        return Err(Error::NotConverged { iterations: report.iterations });
    }
    Ok(outcome)
}

pub fn predict(args: &PredictArgs, arguments: Vec<String>) -> Result<CommandOutcome> {
    let mut manifest = RunManifest::new("predict", arguments);
    let (device, warnings) = load_config(&args.config, &mut manifest)?;
    let hi = positive("power-mw-max", args.power_mw_max)?;
    let lo = positive("power-mw-min", args.power_mw_min)?;
    if lo > hi {
        return Err(Error::Argument { name: "power-mw-min", reason: "must not exceed --power-mw-max".into() });
    }
    if args.steps == 0 {
        return Err(Error::Argument { name: "steps", reason: "must be >= 1".into() });
    }
    let powers_mw = linspace(lo, hi, args.steps);
    let powers_w: Vec<f64> = powers_mw.iter().map(|p| p * 1e-3).collect();
    let points = par_car_curve(&device, &powers_w)?;
    let rows: Vec<Vec<f64>> = points
        .iter()
        .zip(&powers_mw)
        .map(|(pt, &p_mw)| {
            vec![
                p_mw,
                pt.pairs.generated_rate,
                pt.pairs.generated_power,
                pt.singles.signal,
                pt.singles.idler,
                pt.coincidences.cc,
                pt.coincidences.ac,
                pt.car.value(),
            ]
        })
        .collect();
    write_table_csv(&args.out, &PREDICT_COLUMNS, &rows)?;
    finish(manifest, &args.out, warnings)
}

pub fn simulate(args: &SimulateArgs, arguments: Vec<String>) -> Result<CommandOutcome> {
    let mut manifest = RunManifest::new("simulate", arguments);
    manifest.seed = Some(args.seed);
    let (device, warnings) = load_config(&args.config, &mut manifest)?;
    let power = positive("power-mw", args.power_mw)?;
    let duration = positive("duration-s", args.duration_s)?;
    let streams = simulate_timetags(&device, power * 1e-3, duration, args.seed)?;
    write_tags_csv(&args.out, &streams)?;
    finish(manifest, &args.out, warnings)
}

pub fn analyze(args: &AnalyzeArgs, arguments: Vec<String>) -> Result<CommandOutcome> {
    let mut manifest = RunManifest::new("analyze", arguments);
    let bytes = std::fs::read(&args.input).map_err(|e| Error::io(&args.input, e))?;
    manifest.input_sha256 = Some(sha256_hex(&bytes));
    drop(bytes);
    let window = args.window_ps;
    let mut settings = CoincidenceSettings::new(
        window,
        args.offset_ps.unwrap_or_else(|| default_accidental_offset(window)),
        args.bin_ps.unwrap_or_else(|| window.div_ceil(16).max(1)),
    )?;
    if let Some(range) = args.range_ps {
        settings = settings.with_range(range)?;
    }
    if let Some(d) = args.duration_s {
        settings = settings.with_duration((positive("duration-s", d)? * 1e12).round() as u64);
    }
    let streams = read_tags_csv(&args.input)?;
    let result = count_coincidences(&streams.signal, &streams.idler, &settings)?;
    write_json(&args.out, &CoincidenceReport::from(&result))?;
    finish(manifest, &args.out, Vec::new())
}

/// Runs one parsed command.
pub fn execute(cli: &Cli, arguments: Vec<String>) -> Result<CommandOutcome> {
    match &cli.command {
        Command::FitTransmission(a) => fit_transmission(a, arguments),
        Command::Predict(a) => predict(a, arguments),
        Command::Simulate(a) => simulate(a, arguments),
        Command::Analyze(a) => analyze(a, arguments),
    }
}

/// Parses `argv`, runs the command, reports on stderr and returns the exit
/// status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let arguments = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, arguments) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for p in &outcome.outputs {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as i32
        }
    }
}
