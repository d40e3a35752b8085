//! Plug-in sandwich covariance of (φ̂, ξ̂) evaluated at the estimate.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimator::{omega_n, Model, PhiPoint, SampleStats};
use crate::quadrature::QuadOptions;
use crate::smallmat::{matmul, transpose, SymMatrix};

pub const PLUG_IN_NOTE: &str = "plug-in estimate at phi_hat with empirical Var(g)";
pub const XI_BLOCK_STATUS: &str = "unvalidated";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub param_names: Vec<String>,
    pub n: usize,
    /// (ℓ+1) × (1+d+s), columns ordered λ, θ, α.
    pub j_phi_xi: Vec<Vec<f64>>,
    pub j_xi_xi: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    pub h_mat: Vec<Vec<f64>>,
    pub w_mat: Vec<Vec<f64>>,
    /// Covariance of (φ̂, ξ̂), order (λ, θ, α, ξ₀..ξ_ℓ).
    pub sandwich: Vec<Vec<f64>>,
    /// √(S_kk / n) for the φ coordinates.
    pub std_errors: Vec<f64>,
    /// √(S_kk / n) for the ξ coordinates.
    pub xi_std_errors: Vec<f64>,
    pub xi_block_status: String,
    pub note: String,
}

fn rows(a: &[f64], c: usize) -> Vec<Vec<f64>> {
    a.chunks(c).map(|r| r.to_vec()).collect()
}

/// J_{ξξ}: the plug-in E_{P̂₀}[g gᵗ], which is Ωₙ(φ̂).
pub fn j_xi_xi(phi: &PhiPoint, stats: &SampleStats, model: &Model) -> Result<SymMatrix> {
    omega_n(phi, stats, model)
}

/// J_{φξ}, row-major (ℓ+1) × (1+d+s).
pub fn j_phi_xi(phi: &PhiPoint, stats: &SampleStats, model: &Model, quad: &QuadOptions) -> Result<Vec<f64>> {
    let cs = &model.constraints;
    let k = cs.len();
    let d = model.theta_dim();
    let s = model.alpha_dim();
    let p = 1 + d + s;
    let lam = phi.lambda;
    let (m1, _) = model.family_moments(&phi.theta)?;
    let mut j = vec![0.0; k * p];
    let om = 1.0 - lam;
    for i in 0..k {
        j[i * p] = (m1[i] - stats.gbar[i]) / (om * om);
    }
    if d > 0 {
        let c = lam / om;
        let gs = model
            .family
            .expect_times_score(&phi.theta, k, |x, out| cs.eval_g_into(x, out), quad)?;
        for i in 0..k {
            for t in 0..d {
                j[i * p + 1 + t] = c * gs[i * d + t];
            }
        }
    }
    let gm = cs.eval_grad_m(&phi.alpha)?;
    for i in 0..k {
        for t in 0..s {
            j[i * p + 1 + d + t] = gm[i][t];
        }
    }
    Ok(j)
}

/// Σ = (Jᵗ K⁻¹ J)⁻¹, H = Σ Jᵗ K⁻¹, W = K⁻¹ − K⁻¹ J Σ Jᵗ K⁻¹ with K = J_{ξξ},
/// and S = (1/(1−λ)²) (H; W) Var(g) (Hᵗ Wᵗ).
pub fn sandwich(phi: &PhiPoint, stats: &SampleStats, model: &Model) -> Result<AsymptoticReport> {
    let quad = QuadOptions::default();
    let k = model.constraints.len();
    let p = model.param_dim();
    let kmat = j_xi_xi(phi, stats, model)?;
    let kinv = kmat.invert()?;
    let ki = kinv.as_slice();
    let j = j_phi_xi(phi, stats, model, &quad)?;
    let jt = transpose(&j, k, p);
    let jt_ki = matmul(&jt, ki, p, k, k);
    let info = matmul(&jt_ki, &j, p, k, p);
    let info = SymMatrix::from_fn(p, |a, b| 0.5 * (info[a * p + b] + info[b * p + a]));
    let sigma = info.invert()?;
    let sig = sigma.as_slice();
    let h = matmul(sig, &jt_ki, p, p, k);
    let ki_j = transpose(&jt_ki, p, k);
    let ki_j_sig = matmul(&ki_j, sig, k, p, p);
    let corr = matmul(&ki_j_sig, &jt_ki, k, p, k);
    let w: Vec<f64> = ki.iter().zip(&corr).map(|(a, b)| a - b).collect();
    // Stack (H; W) into (p + k) × k.
    let mut hw = h.clone();
    hw.extend_from_slice(&w);
    let q = p + k;
    let var = stats.covariance_g();
    let scale = 1.0 / ((1.0 - phi.lambda) * (1.0 - phi.lambda));
    let hw_v = matmul(&hw, &var, q, k, k);
    let mut s = matmul(&hw_v, &transpose(&hw, q, k), q, k, q);
    s.iter_mut().for_each(|v| *v *= scale);
    for a in 0..q {
        for b in a + 1..q {
            let m = 0.5 * (s[a * q + b] + s[b * q + a]);
            s[a * q + b] = m;
            s[b * q + a] = m;
        }
    }
    let n = stats.n as f64;
    let se = |i: usize| (s[i * q + i].max(0.0) / n).sqrt();
    Ok(AsymptoticReport {
        param_names: model.param_names(),
        n: stats.n,
        j_phi_xi: rows(&j, p),
        j_xi_xi: kmat.to_rows(),
        sigma: sigma.to_rows(),
        h_mat: rows(&h, k),
        w_mat: rows(&w, k),
        sandwich: rows(&s, q),
        std_errors: (0..p).map(se).collect(),
        xi_std_errors: (p..q).map(se).collect(),
        xi_block_status: XI_BLOCK_STATUS.to_string(),
        note: PLUG_IN_NOTE.to_string(),
    })
}

/// J_H = [[0, Jᵗ], [J, K]] and its claimed inverse [[−Σ, H], [Hᵗ, W]];
/// returns the max-norm of J_H · J_H⁻¹ − I.
pub fn block_identity_residual(report: &AsymptoticReport) -> f64 {
    let p = report.sigma.len();
    let k = report.j_xi_xi.len();
    let q = p + k;
    let mut jh = vec![0.0; q * q];
    let mut inv = vec![0.0; q * q];
    for i in 0..k {
        for t in 0..p {
            let v = report.j_phi_xi[i][t];
            jh[t * q + p + i] = v;
            jh[(p + i) * q + t] = v;
            inv[t * q + p + i] = report.h_mat[t][i];
            inv[(p + i) * q + t] = report.h_mat[t][i];
        }
        for l in 0..k {
            jh[(p + i) * q + p + l] = report.j_xi_xi[i][l];
            inv[(p + i) * q + p + l] = report.w_mat[i][l];
        }
    }
    for a in 0..p {
        for b in 0..p {
            inv[a * q + b] = -report.sigma[a][b];
        }
    }
    let prod = matmul(&jh, &inv, q, q, q);
    let mut worst = 0.0f64;
    for a in 0..q {
        for b in 0..q {
            let e = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((prod[a * q + b] - e).abs());
        }
    }
    worst
}
