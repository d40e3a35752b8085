//! Plug-in sandwich standard errors next to the Monte-Carlo spread.

use semimix::asymptotics::{block_identity_residual, sandwich};
use semimix::estimator::{compute_stats, estimate, EstimateOptions};
use semimix::montecarlo::{registry, run_experiment, sample_mixture, ConstraintChoice, ExperimentConfig};

fn main() -> semimix::Result<()> {
    let sc = registry("table1_lambda07").expect("built-in scenario");
    let choice = ConstraintChoice::WeibullMoments4;
    let model = sc.model(Some(choice))?;
    let (p1, p0) = sc.components()?;
    let n = 10_000;

    let sample = sample_mixture(sc.lambda(), &p1, &[], &p0, &[], n, 5)?;
    let fit = estimate(&sample, &model, &EstimateOptions::default())?;
    let stats = compute_stats(&sample, &model.constraints)?;
    let rep = sandwich(&fit.phi_hat, &stats, &model)?;
    println!("one sample, n = {n}:");
    for (name, se) in rep.param_names.iter().zip(&rep.std_errors) {
        println!("  se({name}) = {se:.4}");
    }
    println!("  block identity residual {:.1e}", block_identity_residual(&rep));

    let cfg = ExperimentConfig {
        scenario: sc,
        constraints: Some(choice),
        n,
        runs: 40,
        divergence: "chi2".into(),
        seed: 100,
        starts: 10,
        asymptotics: false,
    };
    let mc = run_experiment(&cfg, None)?;
    println!("Monte-Carlo sd over {} runs:", mc.runs.len());
    for s in &mc.summary {
        println!("  sd({}) = {:.4}", s.parameter, s.sd);
    }
    Ok(())
}
