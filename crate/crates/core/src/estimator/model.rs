use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::families::ParametricFamily;

/// Smallest allowed distance of λ from 0 and 1.
pub const LAMBDA_EPS: f64 = 1e-4;

/// A semiparametric mixture model: the parametric family and the moment
/// constraints on the unknown component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub family: ParametricFamily,
    pub constraints: ConstraintSet,
}

/// φ = (λ, θ, α).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiPoint {
    pub lambda: f64,
    pub theta: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl PhiPoint {
    pub fn new(lambda: f64, theta: Vec<f64>, alpha: Vec<f64>) -> Self {
        Self { lambda, theta, alpha }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.theta.len() + self.alpha.len());
        v.push(self.lambda);
        v.extend_from_slice(&self.theta);
        v.extend_from_slice(&self.alpha);
        v
    }

    pub fn from_slice(v: &[f64], theta_dim: usize) -> Self {
        Self {
            lambda: v[0],
            theta: v[1..1 + theta_dim].to_vec(),
            alpha: v[1 + theta_dim..].to_vec(),
        }
    }
}

impl Model {
    pub fn new(family: ParametricFamily, constraints: ConstraintSet) -> Result<Self> {
        if family.dim() != constraints.dim() {
            return Err(Error::Dimension(format!(
                "family is {}-variate but constraints are {}-variate",
                family.dim(),
                constraints.dim()
            )));
        }
        Ok(Self { family, constraints })
    }

    pub fn theta_dim(&self) -> usize {
        self.family.theta_dim()
    }

    pub fn alpha_dim(&self) -> usize {
        self.constraints.alpha_dim()
    }

    /// 1 + d + s.
    pub fn param_dim(&self) -> usize {
        1 + self.theta_dim() + self.alpha_dim()
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut v = vec!["lambda".to_string()];
        v.extend(self.family.theta_names());
        v.extend(self.constraints.alpha_names());
        v
    }

    /// Box for the flattened φ vector.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(LAMBDA_EPS, 1.0 - LAMBDA_EPS)];
        b.extend(self.family.theta_bounds());
        b.extend(self.constraints.alpha_bounds());
        b
    }

    pub fn in_bounds(&self, phi: &PhiPoint) -> bool {
        phi.theta.len() == self.theta_dim()
            && phi.alpha.len() == self.alpha_dim()
            && self
                .bounds()
                .iter()
                .zip(phi.to_vec())
                .all(|(&(lo, hi), v)| v >= lo && v <= hi)
    }

    pub fn check(&self, phi: &PhiPoint) -> Result<()> {
        if phi.theta.len() != self.theta_dim() || phi.alpha.len() != self.alpha_dim() {
            return Err(Error::Dimension(format!(
                "phi has {} theta and {} alpha entries, model expects {} and {}",
                phi.theta.len(),
                phi.alpha.len(),
                self.theta_dim(),
                self.alpha_dim()
            )));
        }
        if !self.in_bounds(phi) {
            return Err(Error::Parameter(format!("phi {:?} outside the parameter box", phi.to_vec())));
        }
        Ok(())
    }

    /// Analytic E_{P₁(·|θ)}[g] and E_{P₁(·|θ)}[g gᵗ] (row-major).
    pub fn family_moments(&self, theta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let cs = &self.constraints;
        let k = cs.len();
        let nat = self.family.natural_unchecked(theta)?;
        let kind = self.family.kind;
        let mut m1 = vec![0.0; k];
        let mut gram = vec![0.0; k * k];
        if kind.dim() == 1 {
            let degree = 2 * cs.max_degree() as usize;
            let raw: Vec<f64> = (0..=degree)
                .map(|i| kind.moment_natural(&nat, &[i as u32]))
                .collect::<Result<_>>()?;
            for i in 0..k {
                let ei = cs.exponents(i)[0] as usize;
                m1[i] = raw[ei];
                for j in i..k {
                    let v = raw[ei + cs.exponents(j)[0] as usize];
                    gram[i * k + j] = v;
                    gram[j * k + i] = v;
                }
            }
        } else {
            let mut e = vec![0u32; kind.dim()];
            for i in 0..k {
                m1[i] = kind.moment_natural(&nat, cs.exponents(i))?;
                for j in i..k {
                    for (t, slot) in e.iter_mut().enumerate() {
                        *slot = cs.exponents(i)[t] + cs.exponents(j)[t];
                    }
                    let v = kind.moment_natural(&nat, &e)?;
                    gram[i * k + j] = v;
                    gram[j * k + i] = v;
                }
            }
        }
        if m1.iter().chain(&gram).any(|v| !v.is_finite()) {
            return Err(Error::Unsupported(format!(
                "moments of the parametric component are not finite at theta = {theta:?}"
            )));
        }
        Ok((m1, gram))
    }
}
