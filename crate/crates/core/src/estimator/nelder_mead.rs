//! Box-constrained Nelder-Mead simplex search.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop once every vertex is within this max-norm distance of the best.
    pub diameter_tol: f64,
    /// Initial edge length as a fraction of each coordinate's box width.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            diameter_tol: 1e-8,
            initial_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub converged: bool,
    pub evaluations: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn clamp(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimize `f` inside `bounds` starting at `x0`. NaN values count as +∞.
///
/// A run on which every evaluation returned the value at `x0` (a plateau)
/// is reported as not converged even though the simplex collapses.
pub fn nelder_mead_minimize<F>(mut f: F, x0: &[f64], bounds: &[(f64, f64)], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut start = x0.to_vec();
    clamp(&mut start, bounds);
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        sanitize(f(x))
    };
    let f0 = eval(&start, &mut evals);
    if n == 0 {
        return NelderMeadResult {
            x: start,
            f: f0,
            converged: true,
            evaluations: evals,
        };
    }
    let mut moved = false;
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(start.clone(), f0)];
    for i in 0..n {
        let (lo, hi) = bounds[i];
        let width = hi - lo;
        let h = if width.is_finite() {
            opts.initial_step * width
        } else {
            opts.initial_step * start[i].abs().max(1.0)
        };
        let mut v = start.clone();
        v[i] = if start[i] + h <= hi { start[i] + h } else { start[i] - h };
        clamp(&mut v, bounds);
        let fv = eval(&v, &mut evals);
        moved |= fv != f0;
        simplex.push((v, fv));
    }
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].0.clone();
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| v.iter().zip(&best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter <= opts.diameter_tol {
            converged = moved;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }
        let worst = simplex[n].clone();
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clamp(&mut p, bounds);
            p
        };
        let xr = along(REFLECT);
        let fr = eval(&xr, &mut evals);
        moved |= fr != f0;
        let (f_best, f_second) = (simplex[0].1, simplex[n - 1].1);
        if fr < f_best {
            let xe = along(EXPAND);
            let fe = eval(&xe, &mut evals);
            moved |= fe != f0;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (xr, fr);
            continue;
        }
        let outside = fr < worst.1;
        let xc = along(if outside { REFLECT * CONTRACT } else { -CONTRACT });
        let fc = eval(&xc, &mut evals);
        moved |= fc != f0;
        if (outside && fc <= fr) || (!outside && fc < worst.1) {
            simplex[n] = (xc, fc);
            continue;
        }
        for item in simplex.iter_mut().skip(1) {
            let mut p: Vec<f64> = best
                .iter()
                .zip(&item.0)
                .map(|(b, x)| b + SHRINK * (x - b))
                .collect();
            clamp(&mut p, bounds);
            let fp = eval(&p, &mut evals);
            moved |= fp != f0;
            *item = (p, fp);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        f,
        converged,
        evaluations: evals,
    }
}
