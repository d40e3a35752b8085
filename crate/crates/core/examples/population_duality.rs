//! With exact population moments the criterion vanishes at the truth and the
//! estimator recovers it.

use semimix::estimator::{estimate_from_stats, profiled_objective, EstimateOptions, PhiPoint, SampleStats};
use semimix::montecarlo::{registry, ConstraintChoice};
use semimix::DivergenceSpec;

fn main() -> semimix::Result<()> {
    let sc = registry("table1_lambda07").expect("built-in scenario");
    let choice = Some(ConstraintChoice::WeibullMoments4);
    let model = sc.model(choice)?;
    let (p1, p0) = sc.components()?;
    let lam = sc.lambda();
    let stats = SampleStats::population(&[(lam, p1), (1.0 - lam, p0)], &model.constraints, 10_000)?;
    let truth = sc.truth(choice)?;

    let chi2 = DivergenceSpec::chi2();
    println!("objective at truth: {:.3e}", profiled_objective(&truth, &stats, &model, &chi2));
    let off = PhiPoint::new(0.6, vec![2.2], vec![1.1]);
    println!("objective at {:?}: {:.3e}", off.to_vec(), profiled_objective(&off, &stats, &model, &chi2));

    let res = estimate_from_stats(&stats, &model, &EstimateOptions::default())?;
    println!("estimate {:?}", res.phi_hat.to_vec());
    println!("truth    {:?}", truth.to_vec());
    Ok(())
}
