//! The simulation scenarios: truth parameters and the fitted models.
//!
//! Table 2 prints Mixtures 1, 2, 6, 7 and 8 only; the registry follows the
//! printed row headers and has no entries for 3 to 5.

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::estimator::{Model, PhiPoint};
use crate::families::{FamilyKind, ParametricFamily};

/// Search boxes used by the built-in scenarios.
pub mod boxes {
    pub const WEIBULL_SHAPE1: (f64, f64) = (0.5, 10.0);
    pub const WEIBULL_SHAPE0: (f64, f64) = (0.3, 10.0);
    pub const GAUSS_MEAN: (f64, f64) = (-10.0, 10.0);
    pub const TSW_SHAPE: (f64, f64) = (0.5, 10.0);
    pub const BIV_MEAN: (f64, f64) = (-5.0, 5.0);
    pub const BIV_THETA: (f64, f64) = (-10.0, 10.0);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintChoice {
    /// First three Weibull moments.
    WeibullMoments3,
    /// First four Weibull moments.
    WeibullMoments4,
    /// Two-sided Weibull moments 1 to 3.
    M13,
    /// Two-sided Weibull moments 2 to 4.
    M24,
    BivariateM1,
    BivariateM2,
}

fn default_mean0() -> f64 {
    3.0
}
fn default_s2() -> f64 {
    0.5
}
fn default_biv_offset() -> f64 {
    -1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum Scenario {
    /// Weibull(ν₁, σ₁) parametric part, Weibull(ν₀, σ₀) unknown part.
    WeibullTable1 {
        lambda: f64,
        shape1: f64,
        scale1: f64,
        shape0: f64,
        scale0: f64,
    },
    /// N(μ, σ₁²) parametric part, two-sided Weibull(ν, σ₀) unknown part.
    TswGaussTable2 {
        lambda: f64,
        mu1: f64,
        sigma1: f64,
        shape0: f64,
        scale0: f64,
    },
    /// Bivariate Gaussian with mean (μ, μ + offset) and identity covariance;
    /// the unknown part has mean (m, m) and covariance [[s2, ρ], [ρ, s2]].
    BivariateTable3 {
        lambda: f64,
        mu1: f64,
        #[serde(default = "default_biv_offset")]
        offset1: f64,
        #[serde(default = "default_mean0")]
        mean0: f64,
        #[serde(default = "default_s2")]
        sigma2_0: f64,
        rho0: f64,
    },
    /// Any pair of components with a user-supplied model.
    Custom {
        lambda: f64,
        component1: ParametricFamily,
        component0: ParametricFamily,
        model: Model,
        truth: PhiPoint,
    },
}

impl Scenario {
    pub fn tag(&self) -> &'static str {
        match self {
            Scenario::WeibullTable1 { .. } => "weibull_table1",
            Scenario::TswGaussTable2 { .. } => "tsw_gauss_table2",
            Scenario::BivariateTable3 { .. } => "bivariate_table3",
            Scenario::Custom { .. } => "custom",
        }
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            Scenario::WeibullTable1 { lambda, .. }
            | Scenario::TswGaussTable2 { lambda, .. }
            | Scenario::BivariateTable3 { lambda, .. }
            | Scenario::Custom { lambda, .. } => lambda,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Scenario::BivariateTable3 { .. } => 2,
            Scenario::Custom { component1, .. } => component1.dim(),
            _ => 1,
        }
    }

    /// The two true components, fully specified: (P₁(·|θ*), P₀*).
    pub fn components(&self) -> Result<(ParametricFamily, ParametricFamily)> {
        let lam = self.lambda();
        if !(lam > 0.0 && lam < 1.0) {
            return Err(Error::Config(format!("lambda* = {lam} must lie in (0, 1)")));
        }
        Ok(match self {
            Scenario::WeibullTable1 {
                shape1,
                scale1,
                shape0,
                scale0,
                ..
            } => (
                ParametricFamily::fixed(FamilyKind::Weibull, vec![*shape1, *scale1])?,
                ParametricFamily::fixed(FamilyKind::Weibull, vec![*shape0, *scale0])?,
            ),
            Scenario::TswGaussTable2 {
                mu1,
                sigma1,
                shape0,
                scale0,
                ..
            } => (
                ParametricFamily::fixed(FamilyKind::Gaussian, vec![*mu1, *sigma1])?,
                ParametricFamily::fixed(FamilyKind::TwoSidedWeibull, vec![*shape0, *scale0])?,
            ),
            Scenario::BivariateTable3 {
                mu1,
                offset1,
                mean0,
                sigma2_0,
                rho0,
                ..
            } => (
                ParametricFamily::fixed(FamilyKind::BivariateGaussian, vec![*mu1, mu1 + offset1, 1.0, 0.0])?,
                ParametricFamily::fixed(
                    FamilyKind::BivariateGaussian,
                    vec![*mean0, *mean0, *sigma2_0, *rho0],
                )?,
            ),
            Scenario::Custom {
                component1,
                component0,
                ..
            } => {
                if component1.theta_dim() != 0 || component0.theta_dim() != 0 {
                    return Err(Error::Config("custom components must be fully specified".into()));
                }
                (component1.clone(), component0.clone())
            }
        })
    }

    /// The fitted model for a constraint choice.
    pub fn model(&self, choice: Option<ConstraintChoice>) -> Result<Model> {
        use ConstraintChoice as C;
        let m = match (self, choice) {
            (Scenario::Custom { model, .. }, _) => return Ok(model.clone()),
            (_, None) => return Err(Error::Config("a constraint set must be chosen".into())),
            (Scenario::WeibullTable1 { scale1, scale0, .. }, Some(c @ (C::WeibullMoments3 | C::WeibullMoments4))) => {
                let k = if c == C::WeibullMoments3 { 3 } else { 4 };
                Model::new(
                    ParametricFamily::weibull_shape(*scale1, boxes::WEIBULL_SHAPE1),
                    ConstraintSet::weibull_moments(k, *scale0, boxes::WEIBULL_SHAPE0),
                )?
            }
            (Scenario::TswGaussTable2 { sigma1, scale0, .. }, Some(c @ (C::M13 | C::M24))) => {
                let cs = if c == C::M13 {
                    ConstraintSet::tsw_m13(*scale0, boxes::TSW_SHAPE)
                } else {
                    ConstraintSet::tsw_m24(*scale0, boxes::TSW_SHAPE)
                };
                Model::new(ParametricFamily::gaussian_mean(*sigma1, boxes::GAUSS_MEAN), cs)?
            }
            (Scenario::BivariateTable3 { mu1, offset1, .. }, Some(C::BivariateM1)) => Model::new(
                ParametricFamily::fixed(FamilyKind::BivariateGaussian, vec![*mu1, mu1 + offset1, 1.0, 0.0])?,
                ConstraintSet::bivariate_m1(boxes::BIV_THETA),
            )?,
            (Scenario::BivariateTable3 { offset1, rho0, .. }, Some(C::BivariateM2)) => Model::new(
                ParametricFamily::bivariate_tied_mean(*offset1, 1.0, 0.0, boxes::BIV_MEAN),
                ConstraintSet::bivariate_m2(*rho0, boxes::BIV_THETA),
            )?,
            (s, Some(c)) => {
                return Err(Error::Config(format!(
                    "constraint set {c:?} does not apply to scenario {}",
                    s.tag()
                )))
            }
        };
        Ok(m)
    }

    /// φ* for a constraint choice.
    pub fn truth(&self, choice: Option<ConstraintChoice>) -> Result<PhiPoint> {
        use ConstraintChoice as C;
        Ok(match (self, choice) {
            (Scenario::Custom { truth, .. }, _) => truth.clone(),
            (Scenario::WeibullTable1 { lambda, shape1, shape0, .. }, _) => {
                PhiPoint::new(*lambda, vec![*shape1], vec![*shape0])
            }
            (Scenario::TswGaussTable2 { lambda, mu1, shape0, .. }, _) => {
                PhiPoint::new(*lambda, vec![*mu1], vec![*shape0])
            }
            (Scenario::BivariateTable3 { lambda, mean0, .. }, Some(C::BivariateM1)) => {
                PhiPoint::new(*lambda, vec![], vec![*mean0])
            }
            (Scenario::BivariateTable3 { lambda, mu1, mean0, .. }, _) => {
                PhiPoint::new(*lambda, vec![*mu1], vec![*mean0])
            }
        })
    }
}

/// Named scenarios from the simulation study.
pub fn registry(name: &str) -> Option<Scenario> {
    let t1 = |lambda| Scenario::WeibullTable1 {
        lambda,
        shape1: 2.0,
        scale1: 0.5,
        shape0: 1.0,
        scale0: 1.0,
    };
    let t2 = |lambda, shape0, scale0| Scenario::TswGaussTable2 {
        lambda,
        mu1: 0.0,
        sigma1: 0.5,
        shape0,
        scale0,
    };
    let t3 = |rho0| Scenario::BivariateTable3 {
        lambda: 0.7,
        mu1: 0.0,
        offset1: -1.0,
        mean0: 3.0,
        sigma2_0: 0.5,
        rho0,
    };
    Some(match name {
        "table1_lambda07" => t1(0.7),
        "table1_lambda03" => t1(0.3),
        "table2_mix1" => t2(0.7, 3.0, 1.5),
        "table2_mix2" => t2(0.3, 3.0, 1.5),
        "table2_mix6" | "table2_mix7" => t2(0.05, 1.5, 2.0),
        "table2_mix8" => t2(0.01, 1.5, 2.0),
        "table3_mix1" => t3(0.0),
        "table3_mix2" => t3(0.25),
        _ => return None,
    })
}

/// Sample sizes printed with each registry entry.
pub fn registry_n(name: &str) -> Option<usize> {
    Some(match name {
        "table1_lambda07" | "table1_lambda03" => 10_000,
        "table2_mix1" | "table2_mix2" => 100,
        "table2_mix6" => 100_000,
        "table2_mix7" | "table2_mix8" => 10_000_000,
        "table3_mix1" | "table3_mix2" => 1000,
        _ => return None,
    })
}

pub const REGISTRY_NAMES: [&str; 9] = [
    "table1_lambda07",
    "table1_lambda03",
    "table2_mix1",
    "table2_mix2",
    "table2_mix6",
    "table2_mix7",
    "table2_mix8",
    "table3_mix1",
    "table3_mix2",
];
