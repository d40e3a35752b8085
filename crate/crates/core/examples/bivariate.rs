//! Bivariate Gaussian mixture with the M2 constraint set.

use semimix::estimator::{estimate, EstimateOptions};
use semimix::montecarlo::{registry, sample_mixture, ConstraintChoice};

fn main() -> semimix::Result<()> {
    let sc = registry("table3_mix1").expect("built-in scenario");
    let choice = Some(ConstraintChoice::BivariateM2);
    let model = sc.model(choice)?;
    let (p1, p0) = sc.components()?;
    let sample = sample_mixture(sc.lambda(), &p1, &[], &p0, &[], 1000, 8)?;
    // Ten starts occasionally miss the main basin here.
    let opts = EstimateOptions { starts: 20, ..Default::default() };
    let res = estimate(&sample, &model, &opts)?;
    println!("truth    {:?}", sc.truth(choice)?.to_vec());
    println!("estimate {:?}", res.phi_hat.to_vec());
    println!("objective {:.3e}, Omega_n condition {:.2e}", res.objective, res.omega_condition);
    for t in res.diagnostics.iter().take(5) {
        println!("  start {:?} -> objective {:.3e}", t.start, t.objective);
    }
    Ok(())
}
