//! Minimum-divergence estimation of (λ, θ, α).
//!
//! The outer problem minimizes φ ↦ sup_ξ Hₙ(φ, ξ) by multi-start Nelder-Mead;
//! points where Ωₙ(φ) is not positive definite are given a fixed penalty.

mod inner;
mod model;
pub mod nelder_mead;
mod stats;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use inner::{
    dual_eval, h_n, omega_n, plug_in, xi_inner_chi2, xi_inner_generic, xi_inner_generic_capped, DualEval, InnerSolution,
    PlugIn,
};
pub use model::{Model, PhiPoint, LAMBDA_EPS};
pub use nelder_mead::{nelder_mead_minimize, NelderMeadOptions, NelderMeadResult};
pub use stats::{compute_stats, compute_stats_retained, SampleStats, StatsSource};

use crate::asymptotics::AsymptoticReport;
use crate::data::{rng_stream, streams, Sample};
use crate::divergence::DivergenceSpec;
use crate::error::{Error, Result};
use crate::quadrature::QuadOptions;
use crate::smallmat::SymMatrix;

/// Objective assigned to points outside the feasible set.
pub const DEFAULT_PENALTY: f64 = 100.0;

const CONDITION_WARN: f64 = 1e10;
const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub divergence: DivergenceSpec,
    pub starts: usize,
    pub max_start_draws: usize,
    pub penalty: f64,
    pub seed: u64,
    pub nelder_mead: NelderMeadOptions,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            divergence: DivergenceSpec::chi2(),
            starts: 10,
            max_start_draws: 1000,
            penalty: DEFAULT_PENALTY,
            seed: 0,
            nelder_mead: NelderMeadOptions::default(),
        }
    }
}

/// The profiled objective φ ↦ Hₙ(φ, ξₙ(φ)) with the feasibility gate.
pub struct Profile<'a> {
    pub stats: &'a SampleStats,
    pub model: &'a Model,
    pub divergence: DivergenceSpec,
    pub penalty: f64,
    pub quad: QuadOptions,
}

impl<'a> Profile<'a> {
    pub fn new(stats: &'a SampleStats, model: &'a Model, divergence: DivergenceSpec) -> Self {
        Self {
            stats,
            model,
            divergence,
            penalty: DEFAULT_PENALTY,
            quad: QuadOptions::default(),
        }
    }

    /// Inner solution at φ, or the reason φ is infeasible.
    pub fn solve(&self, phi: &PhiPoint) -> Result<InnerSolution> {
        self.model.check(phi)?;
        let p = plug_in(phi, self.stats, self.model)?;
        if self.divergence.is_chi2() {
            return inner::chi2_from_plug_in(&p);
        }
        // Hessian at ξ = 0 is −ψ″(0)Ωₙ = −Ωₙ for every normalized divergence.
        if !p.omega.is_spd_sylvester() {
            return Err(Error::Infeasible("Omega_n is not positive definite".into()));
        }
        // Beyond this the point loses to an infeasible one whatever the
        // exact supremum; unbounded directions would otherwise run Newton to
        // its iteration limit.
        let cap = 1e3 * self.penalty.abs().max(1.0);
        let sol = inner::xi_inner_generic_capped(phi, self.stats, self.model, &self.divergence, &self.quad, cap)?;
        if !sol.converged {
            return Err(Error::Infeasible("inner Newton iteration did not converge".into()));
        }
        Ok(sol)
    }

    /// Inner objective on Φₙ⁺, the penalty elsewhere.
    pub fn value(&self, phi: &PhiPoint) -> f64 {
        match self.solve(phi) {
            Ok(s) if s.objective.is_finite() => s.objective,
            _ => self.penalty,
        }
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.value(&PhiPoint::from_slice(x, self.model.theta_dim()))
    }

    pub fn is_feasible(&self, phi: &PhiPoint) -> bool {
        self.solve(phi).is_ok()
    }
}

/// Convenience wrapper: profiled objective with the default penalty.
pub fn profiled_objective(phi: &PhiPoint, stats: &SampleStats, model: &Model, div: &DivergenceSpec) -> f64 {
    Profile::new(stats, model, *div).value(phi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartTrace {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub objective: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub param_names: Vec<String>,
    pub phi_hat: PhiPoint,
    pub xi_hat: Vec<f64>,
    pub objective: f64,
    pub n_starts_feasible: usize,
    /// Candidate starts drawn, including rejected ones.
    pub start_draws: usize,
    pub converged: bool,
    /// 1-norm condition estimate of Ωₙ(φ̂).
    pub omega_condition: f64,
    pub warnings: Vec<String>,
    pub diagnostics: Vec<StartTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariance: Option<AsymptoticReport>,
}

/// Estimate φ from a sample. Non-χ² divergences keep the sample for the
/// inner problem; χ² only needs the sufficient statistics.
pub fn estimate(sample: &Sample, model: &Model, opts: &EstimateOptions) -> Result<EstimationResult> {
    let stats = if opts.divergence.is_chi2() {
        compute_stats(sample, &model.constraints)?
    } else {
        compute_stats_retained(sample, &model.constraints)?
    };
    estimate_from_stats(&stats, model, opts)
}

pub fn estimate_from_stats(stats: &SampleStats, model: &Model, opts: &EstimateOptions) -> Result<EstimationResult> {
    if opts.starts == 0 {
        return Err(Error::Config("at least one start is required".into()));
    }
    let profile = Profile {
        stats,
        model,
        divergence: opts.divergence,
        penalty: opts.penalty,
        quad: QuadOptions::default(),
    };
    let bounds = model.bounds();
    if bounds.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
        return Err(Error::Config("parameter box must be finite and non-empty".into()));
    }
    let mut rng = rng_stream(opts.seed, streams::STARTS);
    let mut starts = Vec::with_capacity(opts.starts);
    let mut draws = 0;
    while starts.len() < opts.starts && draws < opts.max_start_draws {
        draws += 1;
        let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
        if profile.is_feasible(&PhiPoint::from_slice(&x, model.theta_dim())) {
            starts.push(x);
        }
    }
    if starts.is_empty() {
        return Err(Error::NoFeasibleStart { rejected: draws });
    }
    let traces: Vec<StartTrace> = starts
        .par_iter()
        .map(|x0| {
            let r = nelder_mead_minimize(|x| profile.value_at(x), x0, &bounds, &opts.nelder_mead);
            StartTrace {
                start: x0.clone(),
                end: r.x,
                objective: r.f,
                evaluations: r.evaluations,
                converged: r.converged,
            }
        })
        .collect();
    let mut best = 0;
    for (i, t) in traces.iter().enumerate() {
        if t.objective < traces[best].objective - TIE_TOL {
            best = i;
        }
    }
    let winner = &traces[best];
    let phi_hat = PhiPoint::from_slice(&winner.end, model.theta_dim());
    let sol = profile.solve(&phi_hat);
    let (xi_hat, objective) = match &sol {
        Ok(s) => (s.xi.clone(), s.objective),
        Err(_) => (vec![0.0; model.constraints.len()], opts.penalty),
    };
    let omega_condition = omega_n(&phi_hat, stats, model)
        .map(|o| o.condition_estimate())
        .unwrap_or(f64::INFINITY);
    let mut warnings = Vec::new();
    if let Some(w) = model.constraints.count_warning(model.theta_dim()) {
        warnings.push(w);
    }
    if sol.is_err() {
        warnings.push("best point found is outside the feasible set".into());
    }
    if omega_condition > CONDITION_WARN {
        warnings.push(format!(
            "possible non-identifiability: condition number of Omega_n is {omega_condition:.3e}"
        ));
    }
    if separated_optima(&traces) {
        warnings.push(
            "possible non-identifiability: separated starts reach near-equal objectives".into(),
        );
    }
    Ok(EstimationResult {
        param_names: model.param_names(),
        phi_hat,
        xi_hat,
        objective,
        n_starts_feasible: starts.len(),
        start_draws: draws,
        converged: winner.converged && sol.is_ok(),
        omega_condition,
        warnings,
        diagnostics: traces,
        covariance: None,
    })
}

/// Converged starts more than 0.1 apart (max-norm) with objectives within 1e-6.
fn separated_optima(traces: &[StartTrace]) -> bool {
    let ok: Vec<&StartTrace> = traces.iter().filter(|t| t.converged).collect();
    for (i, a) in ok.iter().enumerate() {
        for b in &ok[i + 1..] {
            if (a.objective - b.objective).abs() >= 1e-6 {
                continue;
            }
            let dist = a
                .end
                .iter()
                .zip(&b.end)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            if dist > 0.1 {
                return true;
            }
        }
    }
    false
}

/// Residual of (1/(1−λ)) m* − (λ/(1−λ)) m₁(θ) − m(α) for mixture moments m*.
pub fn moment_system_residual(phi: &PhiPoint, m_star: &[f64], model: &Model) -> Result<Vec<f64>> {
    let k = model.constraints.len();
    if m_star.len() != k {
        return Err(Error::Dimension(format!("m* has {} entries, expected {k}", m_star.len())));
    }
    let (m1, _) = model.family_moments(&phi.theta)?;
    let m = model.constraints.eval_m_unchecked(&phi.alpha);
    let a = 1.0 / (1.0 - phi.lambda);
    let c = phi.lambda / (1.0 - phi.lambda);
    Ok((0..k).map(|i| a * m_star[i] - c * m1[i] - m[i]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilityCheck {
    pub residual: Vec<f64>,
    /// Jacobian of the residual in φ, (ℓ+1) rows of length 1+d+s.
    pub jacobian: Vec<Vec<f64>>,
    /// True when the Jacobian has full column rank, so the solution is
    /// locally unique.
    pub locally_identifiable: bool,
}

/// Local identifiability of the moment system at φ: residual and the rank
/// of its Jacobian (central differences, relative step 1e-6).
pub fn identifiability(phi: &PhiPoint, m_star: &[f64], model: &Model) -> Result<IdentifiabilityCheck> {
    let residual = moment_system_residual(phi, m_star, model)?;
    let x = phi.to_vec();
    let p = x.len();
    let k = residual.len();
    let d = model.theta_dim();
    let mut jac = vec![vec![0.0; p]; k];
    for c in 0..p {
        let h = 1e-6 * x[c].abs().max(1e-2);
        let mut up = x.clone();
        let mut dn = x.clone();
        up[c] += h;
        dn[c] -= h;
        let ru = moment_system_residual(&PhiPoint::from_slice(&up, d), m_star, model)?;
        let rd = moment_system_residual(&PhiPoint::from_slice(&dn, d), m_star, model)?;
        for i in 0..k {
            jac[i][c] = (ru[i] - rd[i]) / (2.0 * h);
        }
    }
    // Gram matrix of unit-normalized columns; full rank iff positive definite.
    let norms: Vec<f64> = (0..p)
        .map(|c| (0..k).map(|i| jac[i][c] * jac[i][c]).sum::<f64>().sqrt())
        .collect();
    let full = norms.iter().all(|&n| n > 1e-10) && {
        let gram = SymMatrix::from_fn(p, |a, b| {
            (0..k).map(|i| jac[i][a] * jac[i][b]).sum::<f64>() / (norms[a] * norms[b])
        });
        min_pivot(&gram) > 1e-8
    };
    Ok(IdentifiabilityCheck {
        residual,
        jacobian: jac,
        locally_identifiable: full,
    })
}

fn min_pivot(a: &SymMatrix) -> f64 {
    let n = a.dim();
    let mut m = a.as_slice().to_vec();
    let mut worst = f64::INFINITY;
    for k in 0..n {
        let p = m[k * n + k];
        worst = worst.min(p);
        if p <= 0.0 {
            return p;
        }
        for i in k + 1..n {
            let f = m[i * n + k] / p;
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
        }
    }
    worst
}
