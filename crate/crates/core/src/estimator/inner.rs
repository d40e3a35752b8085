//! The inner maximization over the dual vector ξ.

use serde::{Deserialize, Serialize};

use super::model::{Model, PhiPoint};
use super::stats::{SampleStats, StatsSource};
use crate::divergence::DivergenceSpec;
use crate::error::{Error, Result};
use crate::quadrature::QuadOptions;
use crate::smallmat::SymMatrix;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_GRAD_TOL: f64 = 1e-9;
const MAX_HALVINGS: usize = 60;
/// Accepted steps shorter than this with the gradient still large mean the
/// quadratic model is useless here.
const STALL_STEP: f64 = 1e-6;

/// Quantities of the plug-in signed measure needed by the χ² path.
#[derive(Debug, Clone)]
pub struct PlugIn {
    /// Ωₙ(φ).
    pub omega: SymMatrix,
    /// b = ḡ/(1−λ) − λ/(1−λ) · E_{P₁}[g].
    pub b: Vec<f64>,
    /// r = m(α) − b.
    pub r: Vec<f64>,
    /// E_{P₁(·|θ)}[g].
    pub m1: Vec<f64>,
    pub m: Vec<f64>,
}

pub fn plug_in(phi: &PhiPoint, stats: &SampleStats, model: &Model) -> Result<PlugIn> {
    let k = model.constraints.len();
    if stats.len() != k {
        return Err(Error::Dimension(format!(
            "stats have {} components, constraints {k}",
            stats.len()
        )));
    }
    let (m1, gram) = model.family_moments(&phi.theta)?;
    let lam = phi.lambda;
    let a = 1.0 / (1.0 - lam);
    let c = lam / (1.0 - lam);
    let omega = SymMatrix::from_fn(k, |i, j| a * stats.gg_bar[i * k + j] - c * gram[i * k + j]);
    let b: Vec<f64> = (0..k).map(|i| a * stats.gbar[i] - c * m1[i]).collect();
    let m = model.constraints.eval_m_unchecked(&phi.alpha);
    let mut r: Vec<f64> = m.iter().zip(&b).map(|(m, b)| m - b).collect();
    // Both measures have unit mass; the difference is pure roundoff.
    r[0] = 0.0;
    Ok(PlugIn { omega, b, r, m1, m })
}

/// Ωₙ(φ) = ḡḡ/(1−λ) − λ/(1−λ) E_{P₁}[g gᵗ].
pub fn omega_n(phi: &PhiPoint, stats: &SampleStats, model: &Model) -> Result<SymMatrix> {
    plug_in(phi, stats, model).map(|p| p.omega)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerSolution {
    pub xi: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted iterate, starting at ξ = 0.
    pub trace: Vec<f64>,
}

/// Closed-form χ² solution ξ = Ωₙ⁻¹ r, objective ½ rᵗ Ωₙ⁻¹ r.
pub fn xi_inner_chi2(phi: &PhiPoint, stats: &SampleStats, model: &Model) -> Result<InnerSolution> {
    let p = plug_in(phi, stats, model)?;
    chi2_from_plug_in(&p)
}

pub(crate) fn chi2_from_plug_in(p: &PlugIn) -> Result<InnerSolution> {
    if !p.omega.is_spd_sylvester() {
        return Err(Error::Infeasible("Omega_n is not positive definite".into()));
    }
    let inv = p
        .omega
        .invert()
        .map_err(|e| Error::Infeasible(format!("Omega_n inversion failed: {e}")))?;
    let xi = inv.mul_vec(&p.r);
    let objective = 0.5 * p.r.iter().zip(&xi).map(|(a, b)| a * b).sum::<f64>();
    Ok(InnerSolution {
        xi,
        objective,
        iterations: 1,
        converged: true,
        trace: vec![0.0, objective],
    })
}

/// Value, gradient and Hessian of ξ ↦ Hₙ(φ, ξ).
#[derive(Debug, Clone)]
pub struct DualEval {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major (ℓ+1)².
    pub hess: Vec<f64>,
}

/// Hₙ(φ, ξ) = ξᵗm(α) − 1/(1−λ) E_n[ψ(ξᵗg)] + λ/(1−λ) E_{P₁}[ψ(ξᵗg)].
///
/// χ² uses the sufficient statistics; other divergences average over the
/// retained sample and integrate against P₁. Returns −∞ when ξᵗg leaves the
/// domain of ψ.
pub fn h_n(
    phi: &PhiPoint,
    xi: &[f64],
    stats: &SampleStats,
    model: &Model,
    div: &DivergenceSpec,
    quad: &QuadOptions,
) -> Result<f64> {
    if div.is_chi2() {
        let p = plug_in(phi, stats, model)?;
        let xm: f64 = xi.iter().zip(&p.m).map(|(a, b)| a * b).sum();
        let xb: f64 = xi.iter().zip(&p.b).map(|(a, b)| a * b).sum();
        return Ok(xm - xb - 0.5 * p.omega.quad_form(xi));
    }
    match dual_eval(phi, xi, stats, model, div, quad, false) {
        Ok(e) => Ok(e.value),
        Err(Error::Domain { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// E[ψ(ξᵗg)], E[ψ′ g], E[ψ″ g gᵗ] packed as 1 + k + k² numbers.
fn psi_terms(div: &DivergenceSpec, xi: &[f64], g: &[f64], out: &mut [f64], with_derivs: bool, bad: &mut bool) {
    let k = g.len();
    let t: f64 = xi.iter().zip(g).map(|(a, b)| a * b).sum();
    let c = match div.psi(t) {
        Ok(c) if c.value.is_finite() => c,
        _ => {
            // Non-finite output makes the quadrature stop at once.
            *bad = true;
            out[0] = f64::INFINITY;
            return;
        }
    };
    out[0] = c.value;
    if with_derivs {
        for i in 0..k {
            out[1 + i] = c.d1 * g[i];
            for j in i..k {
                let v = c.d2 * g[i] * g[j];
                out[1 + k + i * k + j] = v;
                out[1 + k + j * k + i] = v;
            }
        }
    }
}

fn domain_violation() -> Error {
    Error::Domain {
        what: "psi argument",
        value: f64::NAN,
    }
}

/// Generic evaluation of Hₙ and its ξ-derivatives.
pub fn dual_eval(
    phi: &PhiPoint,
    xi: &[f64],
    stats: &SampleStats,
    model: &Model,
    div: &DivergenceSpec,
    quad: &QuadOptions,
    with_derivs: bool,
) -> Result<DualEval> {
    let cs = &model.constraints;
    let k = cs.len();
    if xi.len() != k {
        return Err(Error::Dimension("xi length".into()));
    }
    let dim_out = if with_derivs { 1 + k + k * k } else { 1 };
    let mut bad = false;
    let emp = match (&stats.source, div.is_chi2()) {
        (StatsSource::MomentsOnly, true) => {
            // ψ quadratic: the averages reduce to ḡ and the Gram matrix.
            let mut out = vec![0.0; dim_out];
            let gg = |i: usize, j: usize| stats.gg_bar[i * k + j];
            let t1: f64 = xi.iter().zip(&stats.gbar).map(|(a, b)| a * b).sum();
            let mut t2 = 0.0;
            for i in 0..k {
                for j in 0..k {
                    t2 += xi[i] * xi[j] * gg(i, j);
                }
            }
            out[0] = 0.5 * t2 + t1;
            if with_derivs {
                for i in 0..k {
                    let s: f64 = (0..k).map(|j| gg(i, j) * xi[j]).sum();
                    out[1 + i] = s + stats.gbar[i];
                    for j in 0..k {
                        out[1 + k + i * k + j] = gg(i, j);
                    }
                }
            }
            out
        }
        _ => {
            let emp = stats.average(
                cs,
                dim_out,
                |g, out| psi_terms(div, xi, g, out, with_derivs, &mut bad),
                quad,
            );
            if bad {
                return Err(domain_violation());
            }
            emp?
        }
    };
    let mut g = vec![0.0; k];
    let par = model.family.expect(
        &phi.theta,
        dim_out,
        |x, out| {
            cs.eval_g_into(x, &mut g);
            psi_terms(div, xi, &g, out, with_derivs, &mut bad);
        },
        quad,
    );
    if bad {
        return Err(domain_violation());
    }
    let par = par?;
    let lam = phi.lambda;
    let a = 1.0 / (1.0 - lam);
    let c = lam / (1.0 - lam);
    let m = cs.eval_m_unchecked(&phi.alpha);
    let xm: f64 = xi.iter().zip(&m).map(|(a, b)| a * b).sum();
    let value = xm - a * emp[0] + c * par[0];
    let (grad, hess) = if with_derivs {
        let grad = (0..k).map(|i| m[i] - a * emp[1 + i] + c * par[1 + i]).collect();
        let hess = (0..k * k)
            .map(|t| -a * emp[1 + k + t] + c * par[1 + k + t])
            .collect();
        (grad, hess)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(DualEval { value, grad, hess })
}

/// Damped Newton ascent on ξ ↦ Hₙ(φ, ξ) from ξ = 0.
///
/// Each step requires −∇²Hₙ to pass the Sylvester test and is halved until
/// the objective does not decrease, so the trace is nondecreasing.
pub fn xi_inner_generic(
    phi: &PhiPoint,
    stats: &SampleStats,
    model: &Model,
    div: &DivergenceSpec,
    quad: &QuadOptions,
) -> Result<InnerSolution> {
    xi_inner_generic_capped(phi, stats, model, div, quad, f64::INFINITY)
}

/// As [`xi_inner_generic`], but gives up (unconverged) once the dual value
/// exceeds `cap`. The supremum is then at least `cap`.
pub fn xi_inner_generic_capped(
    phi: &PhiPoint,
    stats: &SampleStats,
    model: &Model,
    div: &DivergenceSpec,
    quad: &QuadOptions,
    cap: f64,
) -> Result<InnerSolution> {
    let k = model.constraints.len();
    let mut xi = vec![0.0; k];
    let mut cur = dual_eval(phi, &xi, stats, model, div, quad, true)?;
    let mut trace = vec![cur.value];
    for it in 0..NEWTON_MAX_ITER {
        let gmax = cur.grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax <= NEWTON_GRAD_TOL {
            return Ok(done(xi, cur.value, it, true, trace));
        }
        let neg = SymMatrix::new(k, cur.hess.iter().map(|v| -v).collect())?;
        if !neg.is_spd_sylvester() {
            return Err(Error::Infeasible("dual Hessian is not negative definite".into()));
        }
        let delta = neg
            .solve(&cur.grad)
            .map_err(|e| Error::Infeasible(format!("Newton system: {e}")))?;
        let decrement: f64 = delta.iter().zip(&cur.grad).map(|(a, b)| a * b).sum();
        // Predicted gain at machine precision: nothing left to resolve.
        if 0.5 * decrement <= 1e-15 * (1.0 + cur.value.abs()) {
            return Ok(done(xi, cur.value, it, true, trace));
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand: Vec<f64> = xi.iter().zip(&delta).map(|(x, d)| x + step * d).collect();
            match dual_eval(phi, &cand, stats, model, div, quad, true) {
                Ok(e) if e.value >= cur.value => {
                    accepted = Some((cand, e));
                    break;
                }
                Ok(_) | Err(Error::Domain { .. }) => step *= 0.5,
                Err(e) => return Err(e),
            }
        }
        match accepted {
            Some((cand, e)) => {
                xi = cand;
                cur = e;
                trace.push(cur.value);
                if cur.value > cap {
                    return Ok(done(xi, cur.value, it + 1, false, trace));
                }
                if step < STALL_STEP {
                    let gmax = cur.grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    let conv = gmax <= NEWTON_GRAD_TOL || 0.5 * decrement <= 1e-10 * (1.0 + cur.value.abs());
                    return Ok(done(xi, cur.value, it + 1, conv, trace));
                }
            }
            None => {
                let conv = 0.5 * decrement <= 1e-10 * (1.0 + cur.value.abs());
                return Ok(done(xi, cur.value, it + 1, conv, trace));
            }
        }
    }
    let gmax = cur.grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(done(xi, cur.value, NEWTON_MAX_ITER, gmax <= NEWTON_GRAD_TOL, trace))
}

fn done(xi: Vec<f64>, objective: f64, iterations: usize, converged: bool, trace: Vec<f64>) -> InnerSolution {
    InnerSolution {
        xi,
        objective,
        iterations,
        converged,
        trace,
    }
}
