//! Numerical integration used where closed-form moments are not available:
//! the non-χ² dual terms and the θ-derivative columns of the asymptotic
//! matrices.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Result<Segment>
where
    F: FnMut(f64, &mut [f64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let mut eval = |x: f64, wk: f64, wg: f64, kron: &mut [f64], gauss: &mut [f64]| -> Result<()> {
        buf.iter_mut().for_each(|v| *v = 0.0);
        f(x, buf);
        for k in 0..dim {
            if !buf[k].is_finite() {
                return Err(Error::Integration(format!("non-finite integrand at {x}")));
            }
            kron[k] += wk * buf[k];
            gauss[k] += wg * buf[k];
        }
        Ok(())
    };
    eval(c, WGK[7], WG[3], &mut kron, &mut gauss)?;
    for j in 0..7 {
        let dx = h * XGK[j];
        // Odd Kronrod indices carry the embedded Gauss nodes.
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        eval(c - dx, WGK[j], wg, &mut kron, &mut gauss)?;
        eval(c + dx, WGK[j], wg, &mut kron, &mut gauss)?;
    }
    let mut err = 0.0f64;
    for k in 0..dim {
        kron[k] *= h;
        gauss[k] *= h;
        err = err.max((kron[k] - gauss[k]).abs());
    }
    Ok(Segment {
        a,
        b,
        value: kron,
        err,
    })
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of a vector-valued
/// integrand over the finite interval `[a, b]`. The integrand writes `dim`
/// values into the provided slice.
pub fn integrate_vec<F>(mut f: F, a: f64, b: f64, dim: usize, opts: &QuadOptions) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut buf = vec![0.0; dim];
    let first = gk15(&mut f, a, b, dim, &mut buf)?;
    let mut total = first.value.clone();
    let mut total_err = first.err;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = opts.abs_tol.max(opts.rel_tol * scale);
        if total_err <= tol {
            return Ok(total);
        }
        if heap.len() >= opts.max_intervals {
            // Accept roundoff-limited results that are still close to target.
            if total_err <= 1e4 * tol {
                return Ok(total);
            }
            return Err(Error::Integration(format!(
                "error estimate {total_err:e} above tolerance {tol:e} after {} intervals",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            heap.push(Segment { err: 0.0, ..worst });
            total_err = heap.iter().map(|s| s.err).sum();
            if total_err <= tol {
                return Ok(total);
            }
            continue;
        }
        let left = gk15(&mut f, worst.a, mid, dim, &mut buf)?;
        let right = gk15(&mut f, mid, worst.b, dim, &mut buf)?;
        for k in 0..dim {
            total[k] += left.value[k] + right.value[k] - worst.value[k];
        }
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // Re-sum to avoid drift in the running error total.
            total_err = heap.iter().map(|s| s.err).sum();
        }
    }
}

/// ∫₀^∞ f(u) du through the substitution u = t/(1−t).
pub fn integrate_half_line<F>(mut f: F, dim: usize, opts: &QuadOptions) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    integrate_vec(
        |t, out| {
            let one_minus = 1.0 - t;
            let u = t / one_minus;
            let jac = 1.0 / (one_minus * one_minus);
            f(u, out);
            out.iter_mut().for_each(|v| *v *= jac);
            // Tail contributions that underflowed to 0·∞.
            out.iter_mut().for_each(|v| {
                if v.is_nan() {
                    *v = 0.0
                }
            });
        },
        0.0,
        1.0,
        dim,
        opts,
    )
}

/// Scalar convenience over a finite interval.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_vec(|x, out| out[0] = f(x), a, b, 1, opts).map(|v| v[0])
}

/// Gauss-Hermite nodes and weights for the standard normal weight
/// exp(−z²/2)/√(2π): Σ wᵢ f(zᵢ) ≈ E[f(Z)].
pub fn gauss_hermite_normal(n: usize) -> (Vec<f64>, Vec<f64>) {
    // Physicists' rule by Newton iteration on the orthonormal recurrence.
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let nodes = x.iter().map(|v| v * std::f64::consts::SQRT_2).collect();
    let weights = w.iter().map(|v| v / sqrt_pi).collect();
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, &QuadOptions::default()).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2
        let v = integrate(|x| x.powf(-0.5), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn half_line_exponential_moments() {
        let v = integrate_half_line(
            |u, out| {
                let e = (-u).exp();
                out[0] = e;
                out[1] = u * u * e;
            },
            2,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert!((v[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hermite_normal_moments() {
        let (z, w) = gauss_hermite_normal(40);
        let m = |k: i32| z.iter().zip(&w).map(|(z, w)| w * z.powi(k)).sum::<f64>();
        assert!((m(0) - 1.0).abs() < 1e-13);
        assert!(m(1).abs() < 1e-13);
        assert!((m(2) - 1.0).abs() < 1e-12);
        assert!((m(4) - 3.0).abs() < 1e-11);
        assert!((m(6) - 15.0).abs() < 1e-10);
    }
}
