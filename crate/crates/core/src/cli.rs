//! Command-line front end: `simulate`, `estimate` and `experiment`.
//!
//! Every subcommand reads a JSON config. Experiment configs follow
//! [`ExperimentConfig`]; a config of the form `{"region_scan": {...}}` makes
//! `experiment` run the feasible-region scan instead.
//!
//! Exit codes: 0 success, 2 config or usage error, 3 no feasible start,
//! 4 I/O error, 1 anything else.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{sandwich, AsymptoticReport};
use crate::data::{read_csv_file, write_csv_file};
use crate::error::{Error, Result};
use crate::estimator::{compute_stats, estimate, EstimationResult};
use crate::montecarlo::{run_experiment, scan_feasible_region, ExperimentConfig, RegionScanConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_FEASIBLE_START: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "semimix", version, about = "Semiparametric two-component mixture estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Overrides {
    /// Master seed; replaces the config value.
    #[arg(long)]
    pub seed: Option<u64>,
    /// chi2, kl, mkl or hellinger.
    #[arg(long)]
    pub divergence: Option<String>,
    #[arg(long)]
    pub starts: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one sample from the configured mixture and write it as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Estimate the configured model from a headerless CSV file.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Add plug-in sandwich standard errors.
        #[arg(long)]
        asymptotics: bool,
    },
    /// Repeated simulation and estimation, or a region scan.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        asymptotics: bool,
    },
}

/// Written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub wall_ms: f64,
}

/// The JSON written by `estimate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOutput {
    pub result: EstimationResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymptotics: Option<AsymptoticReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfigFile {
    Region { region_scan: RegionScanConfig },
    Experiment(ExperimentConfig),
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::Dimension(_) | Error::Parameter(_) | Error::Unsupported(_) => {
            EXIT_USAGE
        }
        Error::ConjugateUnavailable(_) | Error::EmptyInput(_) => EXIT_USAGE,
        Error::NoFeasibleStart { .. } => EXIT_NO_FEASIBLE_START,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_FAILURE,
    }
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn load_experiment(path: &Path, ov: &Overrides) -> Result<ExperimentConfig> {
    match load_config(path)? {
        ConfigFile::Experiment(cfg) => apply(cfg, ov),
        ConfigFile::Region { .. } => Err(Error::Config("a region-scan config only works with `experiment`".into())),
    }
}

pub fn apply(mut cfg: ExperimentConfig, ov: &Overrides) -> Result<ExperimentConfig> {
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(d) = &ov.divergence {
        cfg.divergence = d.clone();
    }
    if let Some(k) = ov.starts {
        cfg.starts = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_manifest(path: &Path, m: &RunManifest) -> Result<()> {
    write_text(path, &to_json(m)?)
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    Ok(())
}

fn manifest(sub: &str, seed: u64, config: serde_json::Value, inputs: Vec<&Path>, outputs: Vec<&Path>, t: Instant) -> RunManifest {
    RunManifest {
        subcommand: sub.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
        config,
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        wall_ms: t.elapsed().as_secs_f64() * 1e3,
    }
}

fn config_value<T: Serialize>(cfg: &T) -> serde_json::Value {
    serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null)
}

pub fn cmd_simulate(config: &Path, out: &Path, ov: &Overrides) -> Result<()> {
    let t = Instant::now();
    let cfg = load_experiment(config, ov)?;
    let sample = cfg.simulate(0)?;
    ensure_parent(out)?;
    write_csv_file(&sample, out)?;
    let m = manifest("simulate", cfg.seed, config_value(&cfg), vec![config], vec![out], t);
    write_manifest(&sidecar(out), &m)
}

/// Estimation as `cmd_estimate` performs it, without the file handling.
pub fn estimate_output(sample: &crate::data::Sample, cfg: &ExperimentConfig, asymptotics: bool) -> Result<EstimateOutput> {
    let model = cfg.scenario.model(cfg.constraints)?;
    if sample.dim() != model.constraints.dim() {
        return Err(Error::Dimension(format!(
            "data has {} columns, the model expects {}",
            sample.dim(),
            model.constraints.dim()
        )));
    }
    let result = estimate(sample, &model, &cfg.estimate_options(0)?)?;
    let asymptotics = if asymptotics {
        let stats = compute_stats(sample, &model.constraints)?;
        Some(sandwich(&result.phi_hat, &stats, &model)?)
    } else {
        None
    };
    Ok(EstimateOutput { result, asymptotics })
}

pub fn cmd_estimate(data: &Path, config: &Path, out: &Path, ov: &Overrides, asymptotics: bool) -> Result<EstimateOutput> {
    let t = Instant::now();
    let cfg = load_experiment(config, ov)?;
    let sample = read_csv_file(data)?;
    let res = estimate_output(&sample, &cfg, asymptotics || cfg.asymptotics)?;
    ensure_parent(out)?;
    write_text(out, &to_json(&res)?)?;
    let m = manifest("estimate", cfg.seed, config_value(&cfg), vec![config, data], vec![out], t);
    write_manifest(&sidecar(out), &m)?;
    Ok(res)
}

pub fn cmd_experiment(config: &Path, out: &Path, ov: &Overrides, threads: Option<usize>, asymptotics: bool) -> Result<()> {
    let t = Instant::now();
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    match load_config(config)? {
        ConfigFile::Region { region_scan } => {
            let report = scan_feasible_region(&region_scan)?;
            let csv_path = out.join("region.csv");
            report.write_csv(&csv_path)?;
            let m = manifest(
                "experiment",
                ov.seed.unwrap_or(0),
                config_value(&ConfigFile::Region { region_scan }),
                vec![config],
                vec![&csv_path],
                t,
            );
            write_manifest(&out.join("manifest.json"), &m)
        }
        ConfigFile::Experiment(cfg) => {
            let mut cfg = apply(cfg, ov)?;
            cfg.asymptotics |= asymptotics;
            let report = run_experiment(&cfg, threads)?;
            let (summary, runs, json) = (out.join("summary.csv"), out.join("runs.csv"), out.join("report.json"));
            report.write_summary_csv(&summary)?;
            report.write_runs_csv(&runs)?;
            write_text(&json, &to_json(&report)?)?;
            let m = manifest("experiment", cfg.seed, config_value(&cfg), vec![config], vec![&summary, &runs, &json], t);
            write_manifest(&out.join("manifest.json"), &m)
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Simulate { config, out, overrides } => cmd_simulate(config, out, overrides),
        Command::Estimate {
            data,
            config,
            out,
            overrides,
            asymptotics,
        } => cmd_estimate(data, config, out, overrides, *asymptotics).map(|r| {
            if !r.result.converged {
                eprintln!("warning: the optimizer did not converge");
            }
        }),
        Command::Experiment {
            config,
            out,
            overrides,
            threads,
            asymptotics,
        } => cmd_experiment(config, out, overrides, *threads, *asymptotics),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
