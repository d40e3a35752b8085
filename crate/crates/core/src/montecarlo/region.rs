//! Scan of the feasible region over (λ, θ) for a univariate model.
//!
//! Φ⁺ is where the population Ω is positive definite. Φ⁺⁺ is where the
//! signed density f_T − λ p₁(·|θ) is nonnegative on a support grid; dividing
//! by 1 − λ does not change the sign, so it is left out.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::csv_err;
use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::estimator::{omega_n, Model, PhiPoint, SampleStats};
use crate::families::{FamilyKind, ParametricFamily};

fn default_grid() -> usize {
    100
}
fn default_support_points() -> usize {
    2000
}

/// Defaults describe a Weibull(2, scale) / lognormal(0, 0.5) mixture with
/// λ* = 0.7, scale* = 0.5 and the first three raw moments as constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionScanConfig {
    pub lambda_true: f64,
    /// P₁ family; its single free parameter is the θ axis.
    pub family1: ParametricFamily,
    pub theta_true: f64,
    /// Fully specified unknown component.
    pub component0: ParametricFamily,
    /// Highest raw moment used as a constraint.
    pub degree: u32,
    pub lambda_range: (f64, f64),
    pub theta_range: (f64, f64),
    #[serde(default = "default_grid")]
    pub lambda_points: usize,
    #[serde(default = "default_grid")]
    pub theta_points: usize,
    pub support: (f64, f64),
    #[serde(default = "default_support_points")]
    pub support_points: usize,
}

impl Default for RegionScanConfig {
    fn default() -> Self {
        Self {
            lambda_true: 0.7,
            family1: ParametricFamily::weibull_scale(2.0, (0.05, 5.0)),
            theta_true: 0.5,
            component0: ParametricFamily {
                kind: FamilyKind::Lognormal,
                base: vec![0.0, 0.5],
                free: Vec::new(),
            },
            degree: 3,
            lambda_range: (0.01, 0.99),
            theta_range: (0.2, 1.5),
            lambda_points: 100,
            theta_points: 100,
            support: (1e-3, 8.0),
            support_points: 2000,
        }
    }
}

impl RegionScanConfig {
    pub fn with_grid(mut self, lambda_points: usize, theta_points: usize) -> Self {
        self.lambda_points = lambda_points;
        self.theta_points = theta_points;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_true > 0.0 && self.lambda_true < 1.0) {
            return Err(Error::Config("lambda_true must lie in (0, 1)".into()));
        }
        if self.family1.theta_dim() != 1 || self.family1.dim() != 1 {
            return Err(Error::Config("family1 must be univariate with one free parameter".into()));
        }
        if self.component0.theta_dim() != 0 || self.component0.dim() != 1 {
            return Err(Error::Config("component0 must be a fully specified univariate family".into()));
        }
        if self.degree == 0 {
            return Err(Error::Config("degree must be at least 1".into()));
        }
        if self.lambda_points < 2 || self.theta_points < 2 || self.support_points < 2 {
            return Err(Error::Config("every grid needs at least two points".into()));
        }
        let ordered = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !ordered(self.lambda_range) || !ordered(self.theta_range) || !ordered(self.support) {
            return Err(Error::Config("ranges must be finite with lower < upper".into()));
        }
        if self.lambda_range.0 < 0.0 || self.lambda_range.1 >= 1.0 {
            return Err(Error::Config("lambda_range must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub lambda: f64,
    pub theta: f64,
    pub in_phi_plus: bool,
    pub in_phi_plus_plus: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionScanReport {
    pub cells: Vec<RegionCell>,
    pub phi_plus: usize,
    pub phi_plus_plus: usize,
    /// Cells in Φ⁺⁺ but not in Φ⁺; zero when the inclusion holds.
    pub violations: usize,
    pub strict_cells: usize,
}

impl RegionScanReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["lambda", "theta", "phi_plus", "phi_plus_plus"]).map_err(csv_err)?;
        for c in &self.cells {
            w.write_record([
                c.lambda.to_string(),
                c.theta.to_string(),
                (c.in_phi_plus as u8).to_string(),
                (c.in_phi_plus_plus as u8).to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// Is λ p₁(x|θ) ≤ f_T(x) at every support point?
pub fn signed_density_nonnegative(
    lambda: f64,
    family1: &ParametricFamily,
    theta: f64,
    truth_density: &[f64],
    support: &[f64],
) -> Result<bool> {
    let nat = family1.natural_unchecked(&[theta])?;
    for (x, ft) in support.iter().zip(truth_density) {
        let p1 = family1.kind.density_natural(&nat, &[*x]);
        if ft - lambda * p1 < 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn scan_feasible_region(cfg: &RegionScanConfig) -> Result<RegionScanReport> {
    cfg.validate()?;
    let truth1 = ParametricFamily {
        free: Vec::new(),
        base: cfg.family1.natural_unchecked(&[cfg.theta_true])?,
        kind: cfg.family1.kind,
    };
    let components = vec![
        (cfg.lambda_true, truth1.clone()),
        (1.0 - cfg.lambda_true, cfg.component0.clone()),
    ];
    let targets = vec![0.0; cfg.degree as usize];
    let cs = ConstraintSet::raw_moments(&targets)?;
    let stats = SampleStats::population(&components, &cs, 1)?;
    // The θ axis may run past the family's own box; only the truth is checked.
    let mut family1 = cfg.family1.clone();
    family1.free[0].lower = cfg.theta_range.0.min(family1.free[0].lower);
    family1.free[0].upper = cfg.theta_range.1.max(family1.free[0].upper);
    let model = Model::new(family1.clone(), cs)?;

    let support: Vec<f64> = linspace(cfg.support.0, cfg.support.1, cfg.support_points).collect();
    let ft: Vec<f64> = support
        .iter()
        .map(|x| {
            components
                .iter()
                .map(|(w, f)| w * f.kind.density_natural(&f.base, &[*x]))
                .sum()
        })
        .collect();

    let mut cells = Vec::with_capacity(cfg.lambda_points * cfg.theta_points);
    for lambda in linspace(cfg.lambda_range.0, cfg.lambda_range.1, cfg.lambda_points) {
        for theta in linspace(cfg.theta_range.0, cfg.theta_range.1, cfg.theta_points) {
            let phi = PhiPoint::new(lambda, vec![theta], Vec::new());
            let in_phi_plus = omega_n(&phi, &stats, &model)
                .map(|om| om.is_spd_sylvester())
                .unwrap_or(false);
            let in_phi_plus_plus = signed_density_nonnegative(lambda, &family1, theta, &ft, &support)?;
            cells.push(RegionCell {
                lambda,
                theta,
                in_phi_plus,
                in_phi_plus_plus,
            });
        }
    }
    let count = |f: &dyn Fn(&RegionCell) -> bool| cells.iter().filter(|c| f(c)).count();
    Ok(RegionScanReport {
        phi_plus: count(&|c| c.in_phi_plus),
        phi_plus_plus: count(&|c| c.in_phi_plus_plus),
        violations: count(&|c| c.in_phi_plus_plus && !c.in_phi_plus),
        strict_cells: count(&|c| c.in_phi_plus && !c.in_phi_plus_plus),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusion_and_truth() {
        let cfg = RegionScanConfig::default().with_grid(20, 20);
        let r = scan_feasible_region(&cfg).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.strict_cells > 0);
        let fam = &cfg.family1;
        let support: Vec<f64> = linspace(cfg.support.0, cfg.support.1, cfg.support_points).collect();
        let nat1 = fam.natural_unchecked(&[cfg.theta_true]).unwrap();
        let ft: Vec<f64> = support
            .iter()
            .map(|x| {
                cfg.lambda_true * fam.kind.density_natural(&nat1, &[*x])
                    + (1.0 - cfg.lambda_true) * cfg.component0.kind.density_natural(&cfg.component0.base, &[*x])
            })
            .collect();
        assert!(signed_density_nonnegative(cfg.lambda_true, fam, cfg.theta_true, &ft, &support).unwrap());
    }

    #[test]
    fn small_lambda_is_all_positive() {
        let cfg = RegionScanConfig {
            lambda_range: (0.0, 0.02),
            ..RegionScanConfig::default().with_grid(3, 10)
        };
        let r = scan_feasible_region(&cfg).unwrap();
        // λ = 0 always qualifies; the next rows only if p₁ stays below f_T/λ.
        assert!(r.cells.iter().filter(|c| c.lambda == 0.0).all(|c| c.in_phi_plus_plus));
    }
}
