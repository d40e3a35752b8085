//! A small simulation study on the two-sided Weibull / Gaussian mixtures,
//! comparing the M13 and M24 constraint sets on identical data.

use semimix::montecarlo::{registry, run_experiment, ConstraintChoice, ExperimentConfig};

fn main() -> semimix::Result<()> {
    let out = std::env::temp_dir().join("semimix_monte_carlo");
    std::fs::create_dir_all(&out).map_err(|e| semimix::Error::Io(e.to_string()))?;
    for choice in [ConstraintChoice::M24, ConstraintChoice::M13] {
        let cfg = ExperimentConfig {
            scenario: registry("table2_mix6").expect("built-in scenario"),
            constraints: Some(choice),
            n: 100_000,
            runs: 10,
            divergence: "chi2".into(),
            seed: 2024,
            starts: 10,
            asymptotics: false,
        };
        let rep = run_experiment(&cfg, None)?;
        println!("{choice:?}: {} converged, {} failed, {:.0} ms", rep.converged_runs, rep.failures, rep.wall_ms);
        for s in &rep.summary {
            println!("  {:>7}: truth {:>7.4}  mean {:>7.4}  sd {:.4}", s.parameter, s.truth, s.mean, s.sd);
        }
        let path = out.join(format!("{choice:?}_summary.csv"));
        rep.write_summary_csv(&path)?;
        println!("  wrote {}", path.display());
    }
    Ok(())
}
