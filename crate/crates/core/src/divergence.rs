//! Cressie-Read power divergences and their convex conjugates.
//!
//! The generator is normalized so that φ(1) = 0, φ'(1) = 0 and φ''(1) = 1,
//! which in turn gives ψ(0) = 0, ψ'(0) = 1 and ψ''(0) = 1 for the conjugate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GAMMA_TOL: f64 = 1e-12;

/// A member of the Cressie-Read family, indexed by γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSpec {
    pub gamma: f64,
}

/// ψ together with its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conjugate {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl DivergenceSpec {
    pub const fn new(gamma: f64) -> Self {
        Self { gamma }
    }

    /// Pearson's χ² (γ = 2).
    pub const fn chi2() -> Self {
        Self::new(2.0)
    }

    /// Kullback-Leibler (γ = 1).
    pub const fn kl() -> Self {
        Self::new(1.0)
    }

    /// Modified Kullback-Leibler, i.e. the likelihood divergence (γ = 0).
    pub const fn modified_kl() -> Self {
        Self::new(0.0)
    }

    /// Hellinger (γ = ½).
    pub const fn hellinger() -> Self {
        Self::new(0.5)
    }

    /// Neyman's χ² (γ = −2).
    pub const fn neyman() -> Self {
        Self::new(-2.0)
    }

    /// Parse one of `chi2`, `kl`, `mkl`, `hellinger`, `neyman`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "chi2" | "pearson" => Ok(Self::chi2()),
            "kl" => Ok(Self::kl()),
            "mkl" | "likelihood" => Ok(Self::modified_kl()),
            "hellinger" => Ok(Self::hellinger()),
            "neyman" => Ok(Self::neyman()),
            other => Err(Error::Config(format!("unknown divergence '{other}'"))),
        }
    }

    pub fn name(&self) -> String {
        match self.gamma {
            g if is(g, 2.0) => "chi2".into(),
            g if is(g, 1.0) => "kl".into(),
            g if is(g, 0.0) => "mkl".into(),
            g if is(g, 0.5) => "hellinger".into(),
            g if is(g, -2.0) => "neyman".into(),
            g => format!("cressie-read({g})"),
        }
    }

    pub fn is_chi2(&self) -> bool {
        is(self.gamma, 2.0)
    }

    fn has_conjugate(&self) -> bool {
        [2.0, 1.0, 0.0, 0.5, -2.0].iter().any(|&g| is(self.gamma, g))
    }

    /// φ_γ(x). For γ = 2 the generator is the polynomial (x−1)²/2 on all of R;
    /// otherwise x must be nonnegative (strictly positive where the limit at
    /// zero is infinite, which is reported as `+∞`).
    pub fn phi(&self, x: f64) -> Result<f64> {
        let g = self.gamma;
        if is(g, 2.0) {
            return Ok(0.5 * (x - 1.0) * (x - 1.0));
        }
        if x < 0.0 || x.is_nan() {
            return Err(Error::Domain { what: "phi", value: x });
        }
        if is(g, 0.0) {
            if x == 0.0 {
                return Ok(f64::INFINITY);
            }
            return Ok(-x.ln() + x - 1.0);
        }
        if is(g, 1.0) {
            if x == 0.0 {
                return Ok(1.0);
            }
            return Ok(x * x.ln() - x + 1.0);
        }
        if x == 0.0 && g < 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok((x.powf(g) - g * x + g - 1.0) / (g * (g - 1.0)))
    }

    /// φ'_γ(x), used to locate the Fenchel maximizer.
    pub fn phi_prime(&self, x: f64) -> Result<f64> {
        let g = self.gamma;
        if is(g, 2.0) {
            return Ok(x - 1.0);
        }
        if x <= 0.0 || x.is_nan() {
            return Err(Error::Domain { what: "phi'", value: x });
        }
        if is(g, 0.0) {
            return Ok(1.0 - 1.0 / x);
        }
        if is(g, 1.0) {
            return Ok(x.ln());
        }
        Ok((x.powf(g - 1.0) - 1.0) / (g - 1.0))
    }

    /// Right end of dom ψ: ψ is finite for t strictly below this value.
    pub fn psi_upper(&self) -> f64 {
        let g = self.gamma;
        if g > 1.0 || is(g, 1.0) {
            f64::INFINITY
        } else {
            // 1 + (γ−1)t > 0  ⇔  t < 1/(1−γ)
            1.0 / (1.0 - g)
        }
    }

    /// ψ(t) with ψ'(t) and ψ''(t).
    ///
    /// Closed forms: ψ(t) = ((1+(γ−1)t)^{γ/(γ−1)} − 1)/γ for γ ∉ {0, 1},
    /// ψ₁(t) = eᵗ − 1 and ψ₀(t) = −log(1 − t). At the right end of a bounded
    /// domain the value is `+∞`; beyond it a domain error is returned.
    pub fn psi(&self, t: f64) -> Result<Conjugate> {
        if !self.has_conjugate() {
            return Err(Error::ConjugateUnavailable(self.gamma));
        }
        if t.is_nan() {
            return Err(Error::Domain { what: "psi", value: t });
        }
        let g = self.gamma;
        if is(g, 2.0) {
            return Ok(Conjugate {
                value: 0.5 * t * t + t,
                d1: t + 1.0,
                d2: 1.0,
            });
        }
        if is(g, 1.0) {
            let e = t.exp();
            return Ok(Conjugate {
                value: t.exp_m1(),
                d1: e,
                d2: e,
            });
        }
        let upper = self.psi_upper();
        if t > upper {
            return Err(Error::Domain { what: "psi", value: t });
        }
        if t == upper {
            return Ok(Conjugate {
                value: f64::INFINITY,
                d1: f64::INFINITY,
                d2: f64::INFINITY,
            });
        }
        if is(g, 0.0) {
            let s = 1.0 - t;
            return Ok(Conjugate {
                value: -(-t).ln_1p(),
                d1: 1.0 / s,
                d2: 1.0 / (s * s),
            });
        }
        let base = 1.0 + (g - 1.0) * t;
        let d1 = base.powf(1.0 / (g - 1.0));
        Ok(Conjugate {
            value: (base.powf(g / (g - 1.0)) - 1.0) / g,
            d1,
            d2: d1 / base,
        })
    }

    /// ψ(t) alone, returning `+∞` outside the domain.
    pub fn psi_value_or_inf(&self, t: f64) -> f64 {
        self.psi(t).map(|c| c.value).unwrap_or(f64::INFINITY)
    }
}

fn is(a: f64, b: f64) -> bool {
    (a - b).abs() < GAMMA_TOL
}
