//! Small dense matrices: Sylvester positive-definiteness test, direct and
//! block inverses, and a pivoted-elimination fallback.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for pivots and leading minors.
pub const PIVOT_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    a: Vec<f64>,
}

impl SymMatrix {
    /// Checks symmetry up to 1e-12 relative and then symmetrizes.
    pub fn new(n: usize, mut a: Vec<f64>) -> Result<Self> {
        if n == 0 || a.len() != n * n {
            return Err(Error::Dimension(format!("{} entries for a {n}x{n} matrix", a.len())));
        }
        for i in 0..n {
            for j in i + 1..n {
                let (x, y) = (a[i * n + j], a[j * n + i]);
                if (x - y).abs() > SYMMETRY_TOL * x.abs().max(y.abs()).max(1.0) {
                    return Err(Error::Dimension(format!("not symmetric at ({i}, {j})")));
                }
                let m = 0.5 * (x + y);
                a[i * n + j] = m;
                a[j * n + i] = m;
            }
        }
        Ok(Self { n, a })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        Self { n, a }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diag(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.a.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.a
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Leading-minor pivots from elimination without row exchanges; the k-th
    /// pivot is det(A_k)/det(A_{k-1}). Stops at the first non-positive one.
    fn sylvester_pivots(&self) -> (bool, usize, f64) {
        let n = self.n;
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return (false, 0, 0.0);
        }
        let tol = PIVOT_TOL * scale;
        let mut m = self.a.clone();
        for k in 0..n {
            let p = m[k * n + k];
            if !(p > tol) {
                return (false, k, p);
            }
            for i in k + 1..n {
                let f = m[i * n + k] / p;
                for j in k..n {
                    m[i * n + j] -= f * m[k * n + j];
                }
            }
        }
        (true, n, 0.0)
    }

    /// True iff every leading principal minor is positive (relative to the
    /// largest entry).
    pub fn is_spd_sylvester(&self) -> bool {
        self.sylvester_pivots().0
    }

    /// Inverse: adjugate for n ≤ 3, 2×2-partitioned Schur complement for
    /// n = 4 and n = 5, pivoted elimination otherwise or on failure.
    pub fn invert(&self) -> Result<SymMatrix> {
        let direct = match self.n {
            1..=3 => small_inverse(self.n, &self.a),
            4 => block_inverse(&self.a, 4, 2),
            5 => block_inverse(&self.a, 5, 3),
            _ => None,
        };
        let inv = match direct {
            Some(v) => v,
            None => return self.invert_elimination(),
        };
        Ok(Self::from_fn(self.n, |i, j| 0.5 * (inv[i * self.n + j] + inv[j * self.n + i])))
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn invert_elimination(&self) -> Result<SymMatrix> {
        let inv = gauss_jordan(self.n, &self.a)?;
        let n = self.n;
        Ok(Self::from_fn(n, |i, j| 0.5 * (inv[i * n + j] + inv[j * n + i])))
    }

    /// Solve A x = b by pivoted elimination.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        solve_general(self.n, &self.a, b)
    }

    /// Cheap 1-norm condition number estimate ‖A‖₁‖A⁻¹‖₁.
    pub fn condition_estimate(&self) -> f64 {
        match self.invert() {
            Ok(inv) => one_norm(self.n, &self.a) * one_norm(self.n, &inv.a),
            Err(_) => f64::INFINITY,
        }
    }
}

fn one_norm(n: usize, a: &[f64]) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Adjugate inverse for n ≤ 3; `None` when the determinant is negligible.
fn small_inverse(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    let scale = max_abs(a);
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    match n {
        1 => (a[0].abs() > PIVOT_TOL * scale).then(|| vec![1.0 / a[0]]),
        2 => {
            let det = a[0] * a[3] - a[1] * a[2];
            if !(det.abs() > PIVOT_TOL * scale * scale) {
                return None;
            }
            Some(vec![a[3] / det, -a[1] / det, -a[2] / det, a[0] / det])
        }
        3 => {
            let c00 = a[4] * a[8] - a[5] * a[7];
            let c01 = a[5] * a[6] - a[3] * a[8];
            let c02 = a[3] * a[7] - a[4] * a[6];
            let det = a[0] * c00 + a[1] * c01 + a[2] * c02;
            if !(det.abs() > PIVOT_TOL * scale * scale * scale) {
                return None;
            }
            let c10 = a[2] * a[7] - a[1] * a[8];
            let c11 = a[0] * a[8] - a[2] * a[6];
            let c12 = a[1] * a[6] - a[0] * a[7];
            let c20 = a[1] * a[5] - a[2] * a[4];
            let c21 = a[2] * a[3] - a[0] * a[5];
            let c22 = a[0] * a[4] - a[1] * a[3];
            let inv = [c00, c10, c20, c01, c11, c21, c02, c12, c22];
            Some(inv.iter().map(|c| c / det).collect())
        }
        _ => None,
    }
}

/// Block inverse of [[P, Q], [R, T]] with P of size k:
/// S = T − R P⁻¹ Q, then [[P⁻¹ + P⁻¹Q S⁻¹ R P⁻¹, −P⁻¹Q S⁻¹], [−S⁻¹ R P⁻¹, S⁻¹]].
fn block_inverse(a: &[f64], n: usize, k: usize) -> Option<Vec<f64>> {
    let m = n - k;
    let p: Vec<f64> = (0..k * k).map(|t| a[(t / k) * n + t % k]).collect();
    let q: Vec<f64> = (0..k * m).map(|t| a[(t / m) * n + k + t % m]).collect();
    let r: Vec<f64> = (0..m * k).map(|t| a[(k + t / k) * n + t % k]).collect();
    let t: Vec<f64> = (0..m * m).map(|s| a[(k + s / m) * n + k + s % m]).collect();
    let pinv = small_inverse(k, &p)?;
    let pinv_q = matmul(&pinv, &q, k, k, m);
    let r_pinv = matmul(&r, &pinv, m, k, k);
    let r_pinv_q = matmul(&r, &pinv_q, m, k, m);
    let s: Vec<f64> = t.iter().zip(&r_pinv_q).map(|(x, y)| x - y).collect();
    // Reject a Schur complement that is negligible relative to the full matrix.
    if max_abs(&s) <= PIVOT_TOL * max_abs(a) {
        return None;
    }
    let sinv = small_inverse(m, &s)?;
    let upper_right = matmul(&pinv_q, &sinv, k, m, m);
    let lower_left = matmul(&sinv, &r_pinv, m, m, k);
    let corr = matmul(&upper_right, &r_pinv, k, m, k);
    let mut out = vec![0.0; n * n];
    for i in 0..k {
        for j in 0..k {
            out[i * n + j] = pinv[i * k + j] + corr[i * k + j];
        }
        for j in 0..m {
            out[i * n + k + j] = -upper_right[i * m + j];
        }
    }
    for i in 0..m {
        for j in 0..k {
            out[(k + i) * n + j] = -lower_left[i * k + j];
        }
        for j in 0..m {
            out[(k + i) * n + k + j] = sinv[i * m + j];
        }
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Row-major product of an (r×c) and a (c×k) matrix.
pub fn matmul(a: &[f64], b: &[f64], r: usize, c: usize, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * k];
    for i in 0..r {
        for l in 0..c {
            let x = a[i * c + l];
            if x == 0.0 {
                continue;
            }
            for j in 0..k {
                out[i * k + j] += x * b[l * k + j];
            }
        }
    }
    out
}

/// Transpose of an (r×c) row-major matrix.
pub fn transpose(a: &[f64], r: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            out[j * r + i] = a[i * c + j];
        }
    }
    out
}

/// Inverse of a general square matrix by Gauss-Jordan with partial pivoting.
pub fn gauss_jordan(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    let scale = max_abs(a);
    if !scale.is_finite() {
        return Err(Error::Singular {
            index: 0,
            pivot: f64::NAN,
        });
    }
    let tol = PIVOT_TOL * scale;
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for k in 0..n {
        let (piv_row, piv) = (k..n)
            .map(|i| (i, m[i * n + k]))
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .expect("non-empty range");
        if !(piv.abs() > tol) {
            return Err(Error::Singular { index: k, pivot: piv });
        }
        if piv_row != k {
            for j in 0..n {
                m.swap(k * n + j, piv_row * n + j);
                inv.swap(k * n + j, piv_row * n + j);
            }
        }
        let p = m[k * n + k];
        for j in 0..n {
            m[k * n + j] /= p;
            inv[k * n + j] /= p;
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = m[i * n + k];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                m[i * n + j] -= f * m[k * n + j];
                inv[i * n + j] -= f * inv[k * n + j];
            }
        }
    }
    Ok(inv)
}

/// Solve a general square system with partial pivoting.
pub fn solve_general(n: usize, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != n || a.len() != n * n {
        return Err(Error::Dimension("solve: shape mismatch".into()));
    }
    let scale = max_abs(a);
    let tol = PIVOT_TOL * scale;
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let (piv_row, piv) = (k..n)
            .map(|i| (i, m[i * n + k]))
            .max_by(|u, v| u.1.abs().total_cmp(&v.1.abs()))
            .expect("non-empty range");
        if !(piv.abs() > tol) {
            return Err(Error::Singular { index: k, pivot: piv });
        }
        if piv_row != k {
            for j in 0..n {
                m.swap(k * n + j, piv_row * n + j);
            }
            x.swap(k, piv_row);
        }
        for i in k + 1..n {
            let f = m[i * n + k] / m[k * n + k];
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k * n + j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k * n + k];
    }
    Ok(x)
}
