//! Compare the strict-concavity region with the region where the plug-in
//! measure is a probability, for a Weibull / lognormal mixture.

use semimix::montecarlo::{scan_feasible_region, RegionScanConfig};

fn main() -> semimix::Result<()> {
    let cfg = RegionScanConfig::default().with_grid(40, 20);
    let rep = scan_feasible_region(&cfg)?;
    println!(
        "{} cells: {} in phi+, {} in phi++, {} only in phi+, {} violations",
        rep.cells.len(),
        rep.phi_plus,
        rep.phi_plus_plus,
        rep.strict_cells,
        rep.violations
    );
    // Rows are scale values, columns lambda; '#' phi++, '+' phi+ only.
    for j in (0..cfg.theta_points).rev() {
        let row: String = (0..cfg.lambda_points)
            .map(|i| {
                let c = rep.cells[i * cfg.theta_points + j];
                match (c.in_phi_plus, c.in_phi_plus_plus) {
                    (_, true) => '#',
                    (true, false) => '+',
                    _ => '.',
                }
            })
            .collect();
        println!("{:5.2} {row}", rep.cells[j].theta);
    }
    Ok(())
}
