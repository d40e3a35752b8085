//! Linear moment constraints ∫ g dQ = m(α) describing the unknown component.
//!
//! `g` is always a vector of monomials with the mass constraint g₀ ≡ 1 in
//! front, which is what allows the χ² estimator to run on sufficient
//! statistics. The targets m(α) are sums of terms from a small expression
//! vocabulary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{digamma, gamma};

/// Default floor for shape or scale parameters.
pub const POSITIVE_FLOOR: f64 = 1e-3;
/// Default half-width of the box for location parameters.
pub const LOCATION_LIMIT: f64 = 1e6;

/// One additive term of a target moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "term", rename_all = "snake_case")]
pub enum MomentTerm {
    Const {
        value: f64,
    },
    /// `coef · α[index]^exponent`
    Power {
        coef: f64,
        index: usize,
        exponent: i32,
    },
    /// `coef · Γ(offset + numer / α[index])`
    Gamma {
        coef: f64,
        offset: f64,
        numer: f64,
        index: usize,
    },
}

impl MomentTerm {
    fn value(&self, alpha: &[f64]) -> f64 {
        match *self {
            MomentTerm::Const { value } => value,
            MomentTerm::Power { coef, index, exponent } => coef * alpha[index].powi(exponent),
            MomentTerm::Gamma {
                coef,
                offset,
                numer,
                index,
            } => coef * gamma(offset + numer / alpha[index]),
        }
    }

    fn add_grad(&self, alpha: &[f64], row: &mut [f64]) {
        match *self {
            MomentTerm::Const { .. } => {}
            MomentTerm::Power { coef, index, exponent } => {
                if exponent != 0 {
                    row[index] += coef * exponent as f64 * alpha[index].powi(exponent - 1);
                }
            }
            MomentTerm::Gamma {
                coef,
                offset,
                numer,
                index,
            } => {
                let a = alpha[index];
                let z = offset + numer / a;
                row[index] += coef * gamma(z) * digamma(z) * (-numer / (a * a));
            }
        }
    }

    fn max_index(&self) -> Option<usize> {
        match *self {
            MomentTerm::Const { .. } => None,
            MomentTerm::Power { index, .. } | MomentTerm::Gamma { index, .. } => Some(index),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaParam {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl AlphaParam {
    pub fn positive(name: &str) -> Self {
        Self::bounded(name, POSITIVE_FLOOR, LOCATION_LIMIT)
    }

    pub fn location(name: &str) -> Self {
        Self::bounded(name, -LOCATION_LIMIT, LOCATION_LIMIT)
    }

    pub fn bounded(name: &str, lower: f64, upper: f64) -> Self {
        Self {
            name: name.to_string(),
            lower,
            upper,
        }
    }
}

/// Substantive constraint: monomial exponents and the target expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub exponents: Vec<u32>,
    pub target: Vec<MomentTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstraintSet", into = "RawConstraintSet")]
pub struct ConstraintSet {
    dim: usize,
    /// Row 0 is the mass constraint.
    rows: Vec<Constraint>,
    alpha: Vec<AlphaParam>,
}

#[derive(Serialize, Deserialize)]
struct RawConstraintSet {
    dim: usize,
    constraints: Vec<Constraint>,
    alpha: Vec<AlphaParam>,
}

impl TryFrom<RawConstraintSet> for ConstraintSet {
    type Error = Error;
    fn try_from(raw: RawConstraintSet) -> Result<Self> {
        ConstraintSet::new(raw.dim, raw.constraints, raw.alpha)
    }
}

impl From<ConstraintSet> for RawConstraintSet {
    fn from(cs: ConstraintSet) -> Self {
        RawConstraintSet {
            dim: cs.dim,
            constraints: cs.rows[1..].to_vec(),
            alpha: cs.alpha,
        }
    }
}

impl ConstraintSet {
    /// Build a set from its substantive constraints; the mass row is added.
    pub fn new(dim: usize, constraints: Vec<Constraint>, alpha: Vec<AlphaParam>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("observation dimension must be positive".into()));
        }
        if constraints.is_empty() {
            return Err(Error::Config("at least one moment constraint is required".into()));
        }
        for (j, c) in constraints.iter().enumerate() {
            if c.exponents.len() != dim {
                return Err(Error::Dimension(format!(
                    "constraint {} has {} exponents for {dim}-dimensional data",
                    j + 1,
                    c.exponents.len()
                )));
            }
            if c.exponents.iter().all(|&e| e == 0) {
                return Err(Error::Config(format!(
                    "constraint {} duplicates the mass constraint",
                    j + 1
                )));
            }
            if let Some(i) = c.target.iter().filter_map(MomentTerm::max_index).max() {
                if i >= alpha.len() {
                    return Err(Error::Config(format!(
                        "constraint {} refers to alpha[{i}] but only {} given",
                        j + 1,
                        alpha.len()
                    )));
                }
            }
        }
        for a in &alpha {
            if !(a.lower < a.upper) {
                return Err(Error::Config(format!("empty box for {}", a.name)));
            }
        }
        let mut rows = Vec::with_capacity(constraints.len() + 1);
        rows.push(Constraint {
            exponents: vec![0; dim],
            target: vec![MomentTerm::Const { value: 1.0 }],
        });
        rows.extend(constraints);
        Ok(Self { dim, rows, alpha })
    }

    /// E[X^i] = σ^i Γ(1 + i/ν) for i = 1..=k with σ known and α = (ν).
    pub fn weibull_moments(k: u32, scale: f64, shape_bounds: (f64, f64)) -> Self {
        let constraints = (1..=k)
            .map(|i| Constraint {
                exponents: vec![i],
                target: vec![gamma_term(scale.powi(i as i32), i as f64)],
            })
            .collect();
        Self::new(
            1,
            constraints,
            vec![AlphaParam::bounded("shape0", shape_bounds.0, shape_bounds.1)],
        )
        .expect("valid built-in")
    }

    /// Two-sided Weibull targets for the first three moments.
    pub fn tsw_m13(scale: f64, shape_bounds: (f64, f64)) -> Self {
        Self::tsw_orders(&[1, 2, 3], scale, shape_bounds)
    }

    /// Two-sided Weibull targets for moments two to four.
    pub fn tsw_m24(scale: f64, shape_bounds: (f64, f64)) -> Self {
        Self::tsw_orders(&[2, 3, 4], scale, shape_bounds)
    }

    fn tsw_orders(orders: &[u32], scale: f64, shape_bounds: (f64, f64)) -> Self {
        let constraints = orders
            .iter()
            .map(|&i| Constraint {
                exponents: vec![i],
                target: if i % 2 == 1 {
                    vec![MomentTerm::Const { value: 0.0 }]
                } else {
                    vec![gamma_term(scale.powi(i as i32), i as f64)]
                },
            })
            .collect();
        Self::new(
            1,
            constraints,
            vec![AlphaParam::bounded("shape0", shape_bounds.0, shape_bounds.1)],
        )
        .expect("valid built-in")
    }

    /// Bivariate: E[X] = E[Y] = θ.
    pub fn bivariate_m1(theta_bounds: (f64, f64)) -> Self {
        Self::new(
            2,
            vec![
                Constraint {
                    exponents: vec![1, 0],
                    target: vec![power_term(1.0, 1)],
                },
                Constraint {
                    exponents: vec![0, 1],
                    target: vec![power_term(1.0, 1)],
                },
            ],
            vec![AlphaParam::bounded("theta", theta_bounds.0, theta_bounds.1)],
        )
        .expect("valid built-in")
    }

    /// Bivariate: E[X] = E[Y] = θ and E[XY] = θ² + ρ with ρ known.
    pub fn bivariate_m2(rho: f64, theta_bounds: (f64, f64)) -> Self {
        let mut cs = Self::bivariate_m1(theta_bounds);
        cs.rows.push(Constraint {
            exponents: vec![1, 1],
            target: vec![power_term(1.0, 2), MomentTerm::Const { value: rho }],
        });
        cs
    }

    /// Raw moments of orders 1..=k with arbitrary targets, no α.
    pub fn raw_moments(targets: &[f64]) -> Result<Self> {
        let constraints = targets
            .iter()
            .enumerate()
            .map(|(i, &v)| Constraint {
                exponents: vec![i as u32 + 1],
                target: vec![MomentTerm::Const { value: v }],
            })
            .collect();
        Self::new(1, constraints, Vec::new())
    }

    /// Observation dimension r.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of substantive constraints ℓ.
    pub fn ell(&self) -> usize {
        self.rows.len() - 1
    }

    /// ℓ + 1, the length of g, m and ξ.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn alpha_dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha_names(&self) -> Vec<String> {
        self.alpha.iter().map(|a| a.name.clone()).collect()
    }

    pub fn alpha_bounds(&self) -> Vec<(f64, f64)> {
        self.alpha.iter().map(|a| (a.lower, a.upper)).collect()
    }

    /// Replace the box of α coordinate `k`.
    pub fn with_alpha_bounds(mut self, k: usize, lower: f64, upper: f64) -> Self {
        self.alpha[k].lower = lower;
        self.alpha[k].upper = upper;
        self
    }

    /// Monomial exponents of component j (all zero for j = 0).
    pub fn exponents(&self, j: usize) -> &[u32] {
        &self.rows[j].exponents
    }

    /// Highest total monomial degree across g.
    pub fn max_degree(&self) -> u32 {
        self.rows
            .iter()
            .map(|c| c.exponents.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Write g(x) into `out` (length ℓ+1).
    pub fn eval_g_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.rows) {
            let mut v = 1.0;
            for (xi, &e) in x.iter().zip(&c.exponents) {
                if e > 0 {
                    v *= xi.powi(e as i32);
                }
            }
            *o = v;
        }
    }

    pub fn eval_g(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_g_into(x, &mut out);
        out
    }

    fn check_alpha(&self, alpha: &[f64]) -> Result<()> {
        if alpha.len() != self.alpha.len() {
            return Err(Error::Dimension(format!(
                "alpha has {} entries, constraint set expects {}",
                alpha.len(),
                self.alpha.len()
            )));
        }
        for (p, &a) in self.alpha.iter().zip(alpha) {
            if !(a >= p.lower && a <= p.upper) {
                return Err(Error::Parameter(format!(
                    "{} = {a} outside [{}, {}]",
                    p.name, p.lower, p.upper
                )));
            }
        }
        Ok(())
    }

    /// Target moments m(α) with α checked against its box.
    pub fn eval_m(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        self.check_alpha(alpha)?;
        Ok(self.eval_m_unchecked(alpha))
    }

    /// Target moments without the box check; α must still have length s.
    pub fn eval_m_unchecked(&self, alpha: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|c| c.target.iter().map(|t| t.value(alpha)).sum())
            .collect()
    }

    /// Jacobian ∇m(α) as (ℓ+1) rows of length s.
    pub fn eval_grad_m(&self, alpha: &[f64]) -> Result<Vec<Vec<f64>>> {
        if alpha.len() != self.alpha.len() {
            return Err(Error::Dimension("alpha length".into()));
        }
        Ok(self
            .rows
            .iter()
            .map(|c| {
                let mut row = vec![0.0; alpha.len()];
                for t in &c.target {
                    t.add_grad(alpha, &mut row);
                }
                row
            })
            .collect())
    }

    /// A warning when ℓ < d + s + 1, the counting condition for uniqueness.
    pub fn count_warning(&self, theta_dim: usize) -> Option<String> {
        let needed = theta_dim + self.alpha_dim() + 1;
        (self.ell() < needed).then(|| {
            format!(
                "{} constraints for {needed} unknowns (lambda, theta, alpha); identifiability is not guaranteed",
                self.ell()
            )
        })
    }
}

fn gamma_term(coef: f64, numer: f64) -> MomentTerm {
    MomentTerm::Gamma {
        coef,
        offset: 1.0,
        numer,
        index: 0,
    }
}

fn power_term(coef: f64, exponent: i32) -> MomentTerm {
    MomentTerm::Power {
        coef,
        index: 0,
        exponent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{FamilyKind, ParametricFamily};

    #[test]
    fn eval_g_examples() {
        let cs = ConstraintSet::weibull_moments(3, 1.0, (0.1, 10.0));
        assert_eq!(cs.eval_g(&[2.0]), vec![1.0, 2.0, 4.0, 8.0]);
        let b = ConstraintSet::bivariate_m2(0.0, (-10.0, 10.0));
        assert_eq!(b.eval_g(&[1.0, 2.0]), vec![1.0, 1.0, 2.0, 2.0]);
        assert_eq!(b.eval_g(&[-7.3, 0.1])[0], 1.0);
    }

    #[test]
    fn eval_m_examples() {
        let cs = ConstraintSet::tsw_m24(1.5, (0.1, 10.0));
        let m = cs.eval_m(&[3.0]).unwrap();
        let want = [1.0, 2.25 * gamma(5.0 / 3.0), 0.0, 1.5f64.powi(4) * gamma(7.0 / 3.0)];
        for (a, b) in m.iter().zip(want) {
            assert!((a - b).abs() < 1e-14 * b.abs().max(1.0));
        }
        let b = ConstraintSet::bivariate_m2(0.25, (-10.0, 10.0));
        assert_eq!(b.eval_m(&[3.0]).unwrap(), vec![1.0, 3.0, 3.0, 9.25]);
        assert!(matches!(cs.eval_m(&[20.0]), Err(Error::Parameter(_))));
    }

    #[test]
    fn grad_m_examples() {
        let b = ConstraintSet::bivariate_m2(0.25, (-10.0, 10.0));
        let g = b.eval_grad_m(&[3.0]).unwrap();
        assert_eq!(g[0], vec![0.0]);
        assert_eq!(g[3], vec![6.0]);
    }

    #[test]
    fn grad_m_matches_finite_differences() {
        for cs in [
            ConstraintSet::weibull_moments(4, 1.0, (0.1, 10.0)),
            ConstraintSet::tsw_m24(2.0, (0.1, 10.0)),
            ConstraintSet::tsw_m13(1.5, (0.1, 10.0)),
        ] {
            for &a in &[0.8, 1.5, 3.0] {
                let g = cs.eval_grad_m(&[a]).unwrap();
                let h = 1e-6 * a;
                let up = cs.eval_m(&[a + h]).unwrap();
                let dn = cs.eval_m(&[a - h]).unwrap();
                for j in 0..cs.len() {
                    let fd = (up[j] - dn[j]) / (2.0 * h);
                    assert!((fd - g[j][0]).abs() <= 1e-6 * fd.abs().max(1e-3), "{j} {fd} {}", g[j][0]);
                }
            }
        }
    }

    #[test]
    fn truth_targets_match_component_moments() {
        let cs = ConstraintSet::weibull_moments(4, 1.0, (0.1, 10.0));
        let p0 = ParametricFamily::fixed(FamilyKind::Weibull, vec![1.0, 1.0]).unwrap();
        let m = cs.eval_m(&[1.0]).unwrap();
        for j in 1..cs.len() {
            let want = p0.raw_moment(&[], j as u32).unwrap();
            assert!((m[j] - want).abs() <= 1e-10 * want);
        }
        let cs = ConstraintSet::tsw_m24(1.5, (0.1, 10.0));
        let p0 = ParametricFamily::fixed(FamilyKind::TwoSidedWeibull, vec![3.0, 1.5]).unwrap();
        let m = cs.eval_m(&[3.0]).unwrap();
        for j in 1..cs.len() {
            let want = p0.moment(&[], cs.exponents(j)).unwrap();
            assert!((m[j] - want).abs() <= 1e-10 * want.abs().max(1.0));
        }
        let cs = ConstraintSet::bivariate_m2(0.25, (-10.0, 10.0));
        let p0 = ParametricFamily::fixed(FamilyKind::BivariateGaussian, vec![3.0, 3.0, 0.5, 0.25])
            .unwrap();
        let m = cs.eval_m(&[3.0]).unwrap();
        for j in 1..cs.len() {
            let want = p0.moment(&[], cs.exponents(j)).unwrap();
            assert!((m[j] - want).abs() <= 1e-10 * want);
        }
    }

    #[test]
    fn counts_and_warning() {
        let cs = ConstraintSet::tsw_m13(1.5, (0.1, 10.0));
        assert_eq!(cs.len(), 4);
        assert_eq!(cs.ell(), 3);
        assert!(cs.count_warning(1).is_none());
        let t1 = ConstraintSet::weibull_moments(3, 1.0, (0.1, 10.0));
        assert!(t1.count_warning(1).is_none());
        assert!(ConstraintSet::bivariate_m1((-1.0, 1.0)).count_warning(1).is_some());
    }

    #[test]
    fn serde_round_trip() {
        let cs = ConstraintSet::bivariate_m2(0.25, (-10.0, 10.0));
        let s = serde_json::to_string(&cs).unwrap();
        let back: ConstraintSet = serde_json::from_str(&s).unwrap();
        assert_eq!(cs, back);
        assert!(serde_json::from_str::<ConstraintSet>(
            r#"{"dim":1,"constraints":[{"exponents":[1,1],"target":[]}],"alpha":[]}"#
        )
        .is_err());
    }
}
