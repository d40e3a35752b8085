//! Parametric component families.
//!
//! Every family has a vector of *natural* parameters (for instance shape and
//! scale of a Weibull). The free parameter vector θ seen by the estimator is
//! mapped affinely onto the natural parameters, which lets a scenario fix
//! some of them, tie others together, or leave the family fully known
//! (θ of dimension zero).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{rng_stream, streams, Sample};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_hermite_normal, integrate_half_line, QuadOptions};
use crate::special::{gamma, normal_cdf};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const HERMITE_NODES: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Natural parameters `[mu, sigma]`.
    Gaussian,
    /// Natural parameters `[shape, scale]`.
    Weibull,
    /// Symmetric two-sided Weibull, natural parameters `[shape, scale]`.
    TwoSidedWeibull,
    /// Natural parameters `[mu, sigma]` of log X.
    Lognormal,
    /// Natural parameters `[mean_x, mean_y, sigma2, rho]` with covariance
    /// `[[sigma2, rho], [rho, sigma2]]`.
    BivariateGaussian,
}

impl FamilyKind {
    pub fn dim(self) -> usize {
        match self {
            FamilyKind::BivariateGaussian => 2,
            _ => 1,
        }
    }

    pub fn natural_len(self) -> usize {
        match self {
            FamilyKind::BivariateGaussian => 4,
            _ => 2,
        }
    }

    pub fn natural_names(self) -> &'static [&'static str] {
        match self {
            FamilyKind::Gaussian | FamilyKind::Lognormal => &["mu", "sigma"],
            FamilyKind::Weibull | FamilyKind::TwoSidedWeibull => &["shape", "scale"],
            FamilyKind::BivariateGaussian => &["mean_x", "mean_y", "sigma2", "rho"],
        }
    }

    fn validate(self, nat: &[f64]) -> Result<()> {
        if nat.len() != self.natural_len() || nat.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("{self:?}: bad natural parameters {nat:?}")));
        }
        let ok = match self {
            FamilyKind::Gaussian | FamilyKind::Lognormal => nat[1] > 0.0,
            FamilyKind::Weibull | FamilyKind::TwoSidedWeibull => nat[0] > 0.0 && nat[1] > 0.0,
            FamilyKind::BivariateGaussian => nat[2] > 0.0 && nat[3].abs() < nat[2],
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("{self:?}: invalid parameters {nat:?}")))
        }
    }

    /// Density at `x` for validated natural parameters.
    pub fn density_natural(self, nat: &[f64], x: &[f64]) -> f64 {
        match self {
            FamilyKind::Gaussian => {
                let z = (x[0] - nat[0]) / nat[1];
                INV_SQRT_2PI / nat[1] * (-0.5 * z * z).exp()
            }
            FamilyKind::Weibull => {
                if x[0] < 0.0 {
                    return 0.0;
                }
                weibull_half_density(nat[0], nat[1], x[0])
            }
            FamilyKind::TwoSidedWeibull => 0.5 * weibull_half_density(nat[0], nat[1], x[0].abs()),
            FamilyKind::Lognormal => {
                if x[0] <= 0.0 {
                    return 0.0;
                }
                let z = (x[0].ln() - nat[0]) / nat[1];
                INV_SQRT_2PI / (nat[1] * x[0]) * (-0.5 * z * z).exp()
            }
            FamilyKind::BivariateGaussian => {
                let (s2, rho) = (nat[2], nat[3]);
                let det = s2 * s2 - rho * rho;
                let (u, v) = (x[0] - nat[0], x[1] - nat[1]);
                let q = (s2 * u * u - 2.0 * rho * u * v + s2 * v * v) / det;
                (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
            }
        }
    }

    /// ∇ log p with respect to the natural parameters.
    fn score_natural(self, nat: &[f64], x: &[f64], out: &mut [f64]) {
        match self {
            FamilyKind::Gaussian => {
                let (mu, s) = (nat[0], nat[1]);
                let d = x[0] - mu;
                out[0] = d / (s * s);
                out[1] = -1.0 / s + d * d / (s * s * s);
            }
            FamilyKind::Weibull | FamilyKind::TwoSidedWeibull => {
                let (k, s) = (nat[0], nat[1]);
                let r = x[0].abs() / s;
                let lr = r.ln();
                let rk = r.powf(k);
                out[0] = 1.0 / k + lr - rk * lr;
                out[1] = (k / s) * (rk - 1.0);
            }
            FamilyKind::Lognormal => {
                let (mu, s) = (nat[0], nat[1]);
                let d = x[0].ln() - mu;
                out[0] = d / (s * s);
                out[1] = -1.0 / s + d * d / (s * s * s);
            }
            FamilyKind::BivariateGaussian => {
                let (s2, rho) = (nat[2], nat[3]);
                let det = s2 * s2 - rho * rho;
                let (u, v) = (x[0] - nat[0], x[1] - nat[1]);
                // Σ⁻¹ = [[s2, −ρ], [−ρ, s2]] / det
                let a = (s2 * u - rho * v) / det;
                let b = (-rho * u + s2 * v) / det;
                out[0] = a;
                out[1] = b;
                // ∂ log p / ∂θ = −½ tr(Σ⁻¹ dΣ) + ½ wᵗ dΣ w,  w = Σ⁻¹(x − m)
                out[2] = -s2 / det + 0.5 * (a * a + b * b);
                out[3] = rho / det + a * b;
            }
        }
    }

    /// Raw (mixed) moment E[∏ xᵢ^{eᵢ}].
    pub fn moment_natural(self, nat: &[f64], exps: &[u32]) -> Result<f64> {
        if exps.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "{self:?} moment needs {} exponents, got {}",
                self.dim(),
                exps.len()
            )));
        }
        Ok(match self {
            FamilyKind::Gaussian => gaussian_raw_moment(nat[0], nat[1], exps[0]),
            FamilyKind::Weibull => {
                let i = exps[0] as f64;
                nat[1].powf(i) * gamma(1.0 + i / nat[0])
            }
            FamilyKind::TwoSidedWeibull => {
                if exps[0] % 2 == 1 {
                    0.0
                } else {
                    let i = exps[0] as f64;
                    nat[1].powf(i) * gamma(1.0 + i / nat[0])
                }
            }
            FamilyKind::Lognormal => {
                let i = exps[0] as f64;
                (i * nat[0] + 0.5 * i * i * nat[1] * nat[1]).exp()
            }
            FamilyKind::BivariateGaussian => {
                bivariate_raw_moment(nat[0], nat[1], nat[2], nat[3], exps[0], exps[1])
            }
        })
    }

    /// Distribution function (univariate families only).
    pub fn cdf_natural(self, nat: &[f64], x: f64) -> Result<f64> {
        Ok(match self {
            FamilyKind::Gaussian => normal_cdf((x - nat[0]) / nat[1]),
            FamilyKind::Weibull => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / nat[1]).powf(nat[0])).exp_m1()
                }
            }
            FamilyKind::TwoSidedWeibull => {
                let tail = 0.5 * (-(x.abs() / nat[1]).powf(nat[0])).exp();
                if x >= 0.0 {
                    1.0 - tail
                } else {
                    tail
                }
            }
            FamilyKind::Lognormal => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf((x.ln() - nat[0]) / nat[1])
                }
            }
            FamilyKind::BivariateGaussian => {
                return Err(Error::Unsupported("cdf of a bivariate family".into()))
            }
        })
    }

    /// Append one draw to `out`.
    pub fn draw_natural<R: Rng + ?Sized>(self, nat: &[f64], rng: &mut R, out: &mut Vec<f64>) {
        match self {
            FamilyKind::Gaussian => {
                let z: f64 = rng.sample(StandardNormal);
                out.push(nat[0] + nat[1] * z);
            }
            FamilyKind::Weibull => {
                let u: f64 = open_unit(rng);
                out.push(nat[1] * (-u.ln()).powf(1.0 / nat[0]));
            }
            FamilyKind::TwoSidedWeibull => {
                // Inverse of F(x) = 1 − ½exp(−(x/σ)^ν) for x ≥ 0 and ½exp(−(−x/σ)^ν) below.
                let p: f64 = open_unit(rng);
                let (k, s) = (nat[0], nat[1]);
                let x = if p >= 0.5 {
                    s * (-(2.0 * (1.0 - p)).ln()).powf(1.0 / k)
                } else {
                    -s * (-(2.0 * p).ln()).powf(1.0 / k)
                };
                out.push(x);
            }
            FamilyKind::Lognormal => {
                let z: f64 = rng.sample(StandardNormal);
                out.push((nat[0] + nat[1] * z).exp());
            }
            FamilyKind::BivariateGaussian => {
                let (l11, l21, l22) = bivariate_cholesky(nat[2], nat[3]);
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                out.push(nat[0] + l11 * z1);
                out.push(nat[1] + l21 * z1 + l22 * z2);
            }
        }
    }

    /// E[f(X)] for a vector-valued `f` with `dim_out` components.
    pub fn expect_natural<F>(
        self,
        nat: &[f64],
        dim_out: usize,
        mut f: F,
        opts: &QuadOptions,
    ) -> Result<Vec<f64>>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let mut tmp = vec![0.0; dim_out];
        match self {
            FamilyKind::Gaussian | FamilyKind::Lognormal => {
                let (mu, s) = (nat[0], nat[1]);
                let log = self == FamilyKind::Lognormal;
                let map = |z: f64| if log { (mu + s * z).exp() } else { mu + s * z };
                integrate_half_line(
                    |z, out| {
                        let w = INV_SQRT_2PI * (-0.5 * z * z).exp();
                        f(&[map(z)], out);
                        tmp.iter_mut().for_each(|v| *v = 0.0);
                        f(&[map(-z)], &mut tmp);
                        for (o, t) in out.iter_mut().zip(&tmp) {
                            *o = w * (*o + t);
                        }
                    },
                    dim_out,
                    opts,
                )
            }
            FamilyKind::Weibull | FamilyKind::TwoSidedWeibull => {
                let (k, s) = (nat[0], nat[1]);
                let two_sided = self == FamilyKind::TwoSidedWeibull;
                // X = σ U^{1/ν} with U ~ Exp(1).
                integrate_half_line(
                    |u, out| {
                        let w = (-u).exp();
                        let x = s * u.powf(1.0 / k);
                        f(&[x], out);
                        if two_sided {
                            tmp.iter_mut().for_each(|v| *v = 0.0);
                            f(&[-x], &mut tmp);
                            for (o, t) in out.iter_mut().zip(&tmp) {
                                *o = 0.5 * w * (*o + t);
                            }
                        } else {
                            out.iter_mut().for_each(|o| *o *= w);
                        }
                    },
                    dim_out,
                    opts,
                )
            }
            FamilyKind::BivariateGaussian => {
                let (z, w) = gauss_hermite_normal(HERMITE_NODES);
                let (l11, l21, l22) = bivariate_cholesky(nat[2], nat[3]);
                let mut acc = vec![0.0; dim_out];
                for (z1, w1) in z.iter().zip(&w) {
                    for (z2, w2) in z.iter().zip(&w) {
                        let p = [nat[0] + l11 * z1, nat[1] + l21 * z1 + l22 * z2];
                        tmp.iter_mut().for_each(|v| *v = 0.0);
                        f(&p, &mut tmp);
                        let ww = w1 * w2;
                        for (a, t) in acc.iter_mut().zip(&tmp) {
                            *a += ww * t;
                        }
                    }
                }
                if acc.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Integration("non-finite Gauss-Hermite sum".into()));
                }
                Ok(acc)
            }
        }
    }
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn weibull_half_density(k: f64, s: f64, x: f64) -> f64 {
    let r = x / s;
    (k / s) * r.powf(k - 1.0) * (-r.powf(k)).exp()
}

fn bivariate_cholesky(s2: f64, rho: f64) -> (f64, f64, f64) {
    let l11 = s2.sqrt();
    let l21 = rho / l11;
    let l22 = (s2 - l21 * l21).sqrt();
    (l11, l21, l22)
}

/// E[X^k] for N(μ, σ²) by E[X^k] = μE[X^{k−1}] + (k−1)σ²E[X^{k−2}].
fn gaussian_raw_moment(mu: f64, sigma: f64, k: u32) -> f64 {
    let s2 = sigma * sigma;
    let (mut prev, mut cur) = (1.0, mu);
    if k == 0 {
        return 1.0;
    }
    for j in 2..=k {
        let next = mu * cur + (j as f64 - 1.0) * s2 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn bivariate_raw_moment(mx: f64, my: f64, s2: f64, rho: f64, a: u32, b: u32) -> f64 {
    // Central moments c(i, j) = E[U^i V^j] from Stein's identity:
    // c(i, j) = (i−1)σ² c(i−2, j) + j ρ c(i−1, j−1).
    let (au, bu) = (a as usize, b as usize);
    let mut c = vec![vec![0.0; bu + 1]; au + 1];
    for i in 0..=au {
        for j in 0..=bu {
            c[i][j] = if i == 0 && j == 0 {
                1.0
            } else if i == 0 {
                if j >= 2 {
                    (j as f64 - 1.0) * s2 * c[0][j - 2]
                } else {
                    0.0
                }
            } else {
                let mut v = 0.0;
                if i >= 2 {
                    v += (i as f64 - 1.0) * s2 * c[i - 2][j];
                }
                if j >= 1 {
                    v += j as f64 * rho * c[i - 1][j - 1];
                }
                v
            };
        }
    }
    let mut total = 0.0;
    for i in 0..=au {
        for j in 0..=bu {
            total += binomial(a, i as u32)
                * binomial(b, j as u32)
                * mx.powi((a as usize - i) as i32)
                * my.powi((b as usize - j) as i32)
                * c[i][j];
        }
    }
    total
}

/// One coordinate of θ and the natural parameters it moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeParam {
    pub name: String,
    /// `(natural index, coefficient)` pairs: natural += coefficient · θₖ.
    pub targets: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
}

impl FreeParam {
    pub fn new(name: &str, natural_index: usize, lower: f64, upper: f64) -> Self {
        Self {
            name: name.to_string(),
            targets: vec![(natural_index, 1.0)],
            lower,
            upper,
        }
    }
}

/// The parametric component P₁(·|θ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricFamily {
    pub kind: FamilyKind,
    /// Natural parameters before adding the free-parameter contributions.
    pub base: Vec<f64>,
    #[serde(default)]
    pub free: Vec<FreeParam>,
}

impl ParametricFamily {
    /// A fully specified distribution with no free parameters.
    pub fn fixed(kind: FamilyKind, natural: Vec<f64>) -> Result<Self> {
        kind.validate(&natural)?;
        Ok(Self {
            kind,
            base: natural,
            free: Vec::new(),
        })
    }

    /// N(μ, σ²) with σ known.
    pub fn gaussian_mean(sigma: f64, mu_bounds: (f64, f64)) -> Self {
        Self {
            kind: FamilyKind::Gaussian,
            base: vec![0.0, sigma],
            free: vec![FreeParam::new("mu", 0, mu_bounds.0, mu_bounds.1)],
        }
    }

    /// Weibull with known scale and free shape.
    pub fn weibull_shape(scale: f64, shape_bounds: (f64, f64)) -> Self {
        Self {
            kind: FamilyKind::Weibull,
            base: vec![0.0, scale],
            free: vec![FreeParam::new("shape", 0, shape_bounds.0, shape_bounds.1)],
        }
    }

    /// Weibull with known shape and free scale.
    pub fn weibull_scale(shape: f64, scale_bounds: (f64, f64)) -> Self {
        Self {
            kind: FamilyKind::Weibull,
            base: vec![shape, 0.0],
            free: vec![FreeParam::new("scale", 1, scale_bounds.0, scale_bounds.1)],
        }
    }

    /// Bivariate Gaussian with mean `(μ, μ + offset)` and known covariance.
    pub fn bivariate_tied_mean(offset: f64, sigma2: f64, rho: f64, mu_bounds: (f64, f64)) -> Self {
        Self {
            kind: FamilyKind::BivariateGaussian,
            base: vec![0.0, offset, sigma2, rho],
            free: vec![FreeParam {
                name: "mu".into(),
                targets: vec![(0, 1.0), (1, 1.0)],
                lower: mu_bounds.0,
                upper: mu_bounds.1,
            }],
        }
    }

    /// Dimension r of an observation.
    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// Dimension d of θ.
    pub fn theta_dim(&self) -> usize {
        self.free.len()
    }

    pub fn theta_names(&self) -> Vec<String> {
        self.free.iter().map(|p| p.name.clone()).collect()
    }

    pub fn theta_bounds(&self) -> Vec<(f64, f64)> {
        self.free.iter().map(|p| (p.lower, p.upper)).collect()
    }

    /// Natural parameters at θ without checking the θ box.
    pub fn natural_unchecked(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.free.len() {
            return Err(Error::Dimension(format!(
                "theta has {} entries, family expects {}",
                theta.len(),
                self.free.len()
            )));
        }
        let mut nat = self.base.clone();
        for (p, &t) in self.free.iter().zip(theta) {
            for &(idx, coef) in &p.targets {
                nat[idx] += coef * t;
            }
        }
        self.kind.validate(&nat)?;
        Ok(nat)
    }

    /// Natural parameters at θ; θ must lie inside its box.
    pub fn natural(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let nat = self.natural_unchecked(theta)?;
        for (p, &t) in self.free.iter().zip(theta) {
            if !(t >= p.lower && t <= p.upper) {
                return Err(Error::Parameter(format!(
                    "{} = {t} outside [{}, {}]",
                    p.name, p.lower, p.upper
                )));
            }
        }
        Ok(nat)
    }

    pub fn density(&self, theta: &[f64], x: &[f64]) -> Result<f64> {
        let nat = self.natural(theta)?;
        Ok(self.kind.density_natural(&nat, x))
    }

    /// ∇_θ log p₁(x|θ).
    pub fn score_theta(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let nat = self.natural_unchecked(theta)?;
        Ok(self.score_from_natural(&nat, x))
    }

    fn score_from_natural(&self, nat: &[f64], x: &[f64]) -> Vec<f64> {
        let mut sn = vec![0.0; self.kind.natural_len()];
        self.kind.score_natural(nat, x, &mut sn);
        self.free
            .iter()
            .map(|p| p.targets.iter().map(|&(i, c)| c * sn[i]).sum())
            .collect()
    }

    /// ∇_θ p₁(x|θ), componentwise.
    pub fn density_grad_theta(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let nat = self.natural_unchecked(theta)?;
        let p = self.kind.density_natural(&nat, x);
        if p == 0.0 {
            return Ok(vec![0.0; self.free.len()]);
        }
        Ok(self
            .score_from_natural(&nat, x)
            .into_iter()
            .map(|s| p * s)
            .collect())
    }

    /// Univariate raw moment E[X^i].
    pub fn raw_moment(&self, theta: &[f64], i: u32) -> Result<f64> {
        if self.dim() != 1 {
            return Err(Error::Unsupported(
                "raw_moment needs a univariate family; use moment".into(),
            ));
        }
        self.moment(theta, &[i])
    }

    /// Mixed raw moment E[∏ Xⱼ^{eⱼ}].
    pub fn moment(&self, theta: &[f64], exps: &[u32]) -> Result<f64> {
        let nat = self.natural_unchecked(theta)?;
        self.kind.moment_natural(&nat, exps)
    }

    pub fn cdf(&self, theta: &[f64], x: f64) -> Result<f64> {
        let nat = self.natural_unchecked(theta)?;
        self.kind.cdf_natural(&nat, x)
    }

    /// E_{P₁(·|θ)}[f(X)] by quadrature on the family's support.
    pub fn expect<F>(&self, theta: &[f64], dim_out: usize, f: F, opts: &QuadOptions) -> Result<Vec<f64>>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let nat = self.natural_unchecked(theta)?;
        self.kind.expect_natural(&nat, dim_out, f, opts)
    }

    /// ∫ f(x) ∇_θ p₁(x|θ) dx as a `dim_out × d` row-major matrix, via the
    /// score identity ∇p = p ∇log p.
    pub fn expect_times_score<F>(
        &self,
        theta: &[f64],
        dim_out: usize,
        mut f: F,
        opts: &QuadOptions,
    ) -> Result<Vec<f64>>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let d = self.theta_dim();
        let nat = self.natural_unchecked(theta)?;
        let mut fx = vec![0.0; dim_out];
        self.kind.expect_natural(
            &nat,
            dim_out * d,
            |x, out| {
                fx.iter_mut().for_each(|v| *v = 0.0);
                f(x, &mut fx);
                let s = self.score_from_natural(&nat, x);
                for i in 0..dim_out {
                    for k in 0..d {
                        out[i * d + k] = fx[i] * s[k];
                    }
                }
            },
            opts,
        )
    }

    /// `n` i.i.d. draws from P₁(·|θ) using stream `(seed, DATA)`.
    pub fn sample(&self, theta: &[f64], n: usize, seed: u64) -> Result<Sample> {
        if n == 0 {
            return Err(Error::EmptyInput("sample size must be at least 1"));
        }
        let nat = self.natural(theta)?;
        let mut rng = rng_stream(seed, streams::DATA);
        let mut data = Vec::with_capacity(n * self.dim());
        for _ in 0..n {
            self.kind.draw_natural(&nat, &mut rng, &mut data);
        }
        Sample::new(self.dim(), data)
    }
}
