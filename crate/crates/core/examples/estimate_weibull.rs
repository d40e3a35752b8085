//! Simulate the Weibull mixture and estimate it with the chi-square criterion.

use semimix::estimator::{estimate, EstimateOptions};
use semimix::montecarlo::{registry, sample_mixture, ConstraintChoice};

fn main() -> semimix::Result<()> {
    let sc = registry("table1_lambda07").expect("built-in scenario");
    let choice = Some(ConstraintChoice::WeibullMoments4);
    let model = sc.model(choice)?;
    let (p1, p0) = sc.components()?;
    let sample = sample_mixture(sc.lambda(), &p1, &[], &p0, &[], 10_000, 42)?;

    let res = estimate(&sample, &model, &EstimateOptions { seed: 42, ..Default::default() })?;
    let truth = sc.truth(choice)?.to_vec();
    println!("{:>8} {:>9} {:>9}", "param", "truth", "estimate");
    for ((name, t), e) in res.param_names.iter().zip(&truth).zip(res.phi_hat.to_vec()) {
        println!("{name:>8} {t:>9.4} {e:>9.4}");
    }
    println!("objective {:.3e}, {} feasible starts, converged {}", res.objective, res.n_starts_feasible, res.converged);
    for w in &res.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
