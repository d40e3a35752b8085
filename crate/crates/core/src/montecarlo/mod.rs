//! Repeated estimation on simulated mixtures.

pub mod region;
pub mod scenarios;

use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use region::{scan_feasible_region, RegionCell, RegionScanConfig, RegionScanReport};
pub use scenarios::{registry, ConstraintChoice, Scenario};

use crate::asymptotics::sandwich;
use crate::data::{rng_stream, streams, Sample};
use crate::divergence::DivergenceSpec;
use crate::error::{Error, Result};
use crate::estimator::{compute_stats, estimate, EstimateOptions, PhiPoint};
use crate::families::ParametricFamily;

/// Draw n points from λ P₁(·|θ₁) + (1−λ) P₀(·|θ₀) on stream `(seed, DATA)`.
pub fn sample_mixture(
    lambda: f64,
    fam1: &ParametricFamily,
    theta1: &[f64],
    fam0: &ParametricFamily,
    theta0: &[f64],
    n: usize,
    seed: u64,
) -> Result<Sample> {
    if n == 0 {
        return Err(Error::EmptyInput("sample size must be at least 1"));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!("mixing proportion {lambda} outside [0, 1]")));
    }
    if fam1.dim() != fam0.dim() {
        return Err(Error::Dimension("components have different dimensions".into()));
    }
    let nat1 = fam1.natural(theta1)?;
    let nat0 = fam0.natural(theta0)?;
    let mut rng = rng_stream(seed, streams::DATA);
    let mut data = Vec::with_capacity(n * fam1.dim());
    for _ in 0..n {
        let u: f64 = rng.random();
        if u < lambda {
            fam1.kind.draw_natural(&nat1, &mut rng, &mut data);
        } else {
            fam0.kind.draw_natural(&nat0, &mut rng, &mut data);
        }
    }
    Sample::new(fam1.dim(), data)
}

fn default_divergence() -> String {
    "chi2".into()
}
fn default_starts() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub scenario: Scenario,
    #[serde(default)]
    pub constraints: Option<ConstraintChoice>,
    pub n: usize,
    pub runs: usize,
    #[serde(default = "default_divergence")]
    pub divergence: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_starts")]
    pub starts: usize,
    /// Also compute plug-in standard errors for each run.
    #[serde(default)]
    pub asymptotics: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.n < 10 {
            return Err(Error::Config(format!("n = {} is below the minimum of 10", self.n)));
        }
        if self.starts == 0 {
            return Err(Error::Config("starts must be at least 1".into()));
        }
        DivergenceSpec::from_name(&self.divergence)?;
        self.scenario.components()?;
        let model = self.scenario.model(self.constraints)?;
        let truth = self.scenario.truth(self.constraints)?;
        model.check(&truth).map_err(|e| Error::Config(format!("truth outside the model: {e}")))?;
        Ok(())
    }

    /// Data set for run r, seeded with `seed + r`.
    pub fn simulate(&self, run: usize) -> Result<Sample> {
        let (p1, p0) = self.scenario.components()?;
        sample_mixture(
            self.scenario.lambda(),
            &p1,
            &[],
            &p0,
            &[],
            self.n,
            self.seed.wrapping_add(run as u64),
        )
    }

    pub fn estimate_options(&self, run: usize) -> Result<EstimateOptions> {
        Ok(EstimateOptions {
            divergence: DivergenceSpec::from_name(&self.divergence)?,
            starts: self.starts,
            seed: self.seed.wrapping_add(run as u64),
            ..EstimateOptions::default()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub estimate: Vec<f64>,
    pub objective: f64,
    pub n_starts_feasible: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    pub std_errors: Option<Vec<f64>>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub parameter: String,
    pub truth: f64,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub param_names: Vec<String>,
    pub summary: Vec<ParamSummary>,
    pub runs: Vec<RunRecord>,
    /// Runs that errored or did not converge; excluded from the summary.
    pub failures: usize,
    pub converged_runs: usize,
    /// Set when fewer than two runs entered the summary, in which case sd is 0.
    pub degenerate_sd: bool,
    pub wall_ms: f64,
}

impl ExperimentReport {
    /// Copy with every timing zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.wall_ms = 0.0;
        r.runs.iter_mut().for_each(|x| x.wall_ms = 0.0);
        r
    }

    pub fn mean_of(&self, parameter: &str) -> Option<f64> {
        self.summary.iter().find(|s| s.parameter == parameter).map(|s| s.mean)
    }

    pub fn sd_of(&self, parameter: &str) -> Option<f64> {
        self.summary.iter().find(|s| s.parameter == parameter).map(|s| s.sd)
    }

    /// One row per run and parameter.
    pub fn write_runs_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record([
            "run",
            "seed",
            "parameter",
            "estimate",
            "objective",
            "converged",
            "n_starts_feasible",
            "wall_ms",
        ])
        .map_err(csv_err)?;
        for r in &self.runs {
            for (name, v) in self.param_names.iter().zip(&r.estimate) {
                w.write_record([
                    r.run.to_string(),
                    r.seed.to_string(),
                    name.clone(),
                    v.to_string(),
                    r.objective.to_string(),
                    r.converged.to_string(),
                    r.n_starts_feasible.to_string(),
                    format!("{:.3}", r.wall_ms),
                ])
                .map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// parameter, mean, sd rows in table order.
    pub fn write_summary_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["parameter", "truth", "mean", "sd"]).map_err(csv_err)?;
        for s in &self.summary {
            w.write_record([
                s.parameter.clone(),
                s.truth.to_string(),
                s.mean.to_string(),
                s.sd.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn one_run(cfg: &ExperimentConfig, run: usize) -> RunRecord {
    let started = Instant::now();
    let seed = cfg.seed.wrapping_add(run as u64);
    let outcome = (|| {
        let model = cfg.scenario.model(cfg.constraints)?;
        let sample = cfg.simulate(run)?;
        let opts = cfg.estimate_options(run)?;
        let res = estimate(&sample, &model, &opts)?;
        let se = if cfg.asymptotics {
            let stats = compute_stats(&sample, &model.constraints)?;
            sandwich(&res.phi_hat, &stats, &model).ok().map(|r| r.std_errors)
        } else {
            None
        };
        Ok::<_, Error>((res, se))
    })();
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok((res, se)) => RunRecord {
            run,
            seed,
            estimate: res.phi_hat.to_vec(),
            objective: res.objective,
            n_starts_feasible: res.n_starts_feasible,
            converged: res.converged,
            warnings: res.warnings,
            error: None,
            std_errors: se,
            wall_ms,
        },
        Err(e) => RunRecord {
            run,
            seed,
            estimate: Vec::new(),
            objective: f64::NAN,
            n_starts_feasible: 0,
            converged: false,
            warnings: Vec::new(),
            error: Some(e.to_string()),
            std_errors: None,
            wall_ms,
        },
    }
}

/// Run `cfg.runs` independent simulations and estimations. With `threads`
/// set, a dedicated pool of that size is used; otherwise rayon's global pool.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = Instant::now();
    let work = || -> Vec<RunRecord> { (0..cfg.runs).into_par_iter().map(|r| one_run(cfg, r)).collect() };
    let runs = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    let model = cfg.scenario.model(cfg.constraints)?;
    let truth = cfg.scenario.truth(cfg.constraints)?.to_vec();
    let names = model.param_names();
    let ok: Vec<&RunRecord> = runs.iter().filter(|r| r.error.is_none() && r.converged).collect();
    if ok.is_empty() {
        let first = runs
            .iter()
            .find_map(|r| r.error.clone())
            .unwrap_or_else(|| "no run converged".into());
        return Err(Error::Experiment(format!("all {} runs failed; first: {first}", runs.len())));
    }
    let summary = names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let (mean, sd) = mean_sd(ok.iter().map(|r| r.estimate[k]));
            ParamSummary {
                parameter: name.clone(),
                truth: truth[k],
                mean,
                sd,
            }
        })
        .collect();
    Ok(ExperimentReport {
        param_names: names,
        summary,
        failures: runs.len() - ok.len(),
        converged_runs: ok.len(),
        degenerate_sd: ok.len() < 2,
        runs,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Mean and sample standard deviation (n − 1 denominator; 0 for one value).
pub fn mean_sd<I: Iterator<Item = f64>>(values: I) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// φ* as a flat vector for a config.
pub fn truth_vector(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    cfg.scenario.truth(cfg.constraints).map(|p: PhiPoint| p.to_vec())
}
