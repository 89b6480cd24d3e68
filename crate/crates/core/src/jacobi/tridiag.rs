//! Symmetric tridiagonal eigenproblems by Sturm bisection and inverse
//! iteration.

use serde::{Deserialize, Serialize};

use super::JacobiOperator;
use crate::error::{Error, Result};

/// An eigenvalue of a truncation together with its Gauss weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: f64,
    pub weight: f64,
}

/// Eigenvalues and first-component weights of the `n × n` truncation.
pub fn truncated_spectrum(j: &JacobiOperator, n: usize) -> Result<Vec<SpectralPoint>> {
    if n == 0 {
        return Err(Error::Argument("truncation size must be at least 1".into()));
    }
    let (a, diag) = j.coefficients(n);
    tridiagonal_eigen(&diag, &a[..n - 1])
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `d` and off-diagonal `e`; weights are squared first components.
pub(crate) fn tridiagonal_eigen(d: &[f64], e: &[f64]) -> Result<Vec<SpectralPoint>> {
    let n = d.len();
    if n == 1 {
        return Ok(vec![SpectralPoint {
            lambda: d[0],
            weight: 1.0,
        }]);
    }
    let (lo, hi) = gershgorin(d, e);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = kth_eigenvalue(d, e, k, lo, hi);
        let v = inverse_iteration(d, e, lambda)?;
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        out.push(SpectralPoint {
            lambda,
            weight: v[0] * v[0] / norm2,
        });
    }
    Ok(out)
}

fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let pad = 1e-12 * (hi - lo).max(1.0);
    (lo - pad, hi + pad)
}

/// Number of eigenvalues strictly below `x`.
pub(crate) fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        if q == 0.0 {
            q = tiny;
        }
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn kth_eigenvalue(d: &[f64], e: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * mid.abs().max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

// Solve (T - λ) x = y with partial pivoting, iterate until the direction
// settles.
fn inverse_iteration(d: &[f64], e: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let scale = d
        .iter()
        .chain(e)
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1.0);
    let floor = f64::EPSILON * scale;
    let lu = TridiagLu::factor(d, e, lambda, floor);
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64)
        .collect();
    for it in 1..=12 {
        let mut y = lu.solve(&x);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Numerical {
                iterations: it,
                message: format!("inverse iteration broke down at λ = {lambda}"),
            });
        }
        y.iter_mut().for_each(|v| *v /= norm);
        let res = residual(d, e, lambda, &y);
        x = y;
        if res < 1e-10 * scale && it >= 2 {
            return Ok(x);
        }
    }
    Err(Error::Numerical {
        iterations: 12,
        message: format!("inverse iteration did not converge at λ = {lambda}"),
    })
}

fn residual(d: &[f64], e: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let n = d.len();
    let mut r = 0.0f64;
    for i in 0..n {
        let mut t = (d[i] - lambda) * v[i];
        if i > 0 {
            t += e[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            t += e[i] * v[i + 1];
        }
        r = r.max(t.abs());
    }
    r
}

// LU of a tridiagonal matrix with row interchanges (second superdiagonal
// fill-in), in the style of LAPACK's gttrf.
struct TridiagLu {
    l: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn factor(d: &[f64], e: &[f64], lambda: f64, floor: f64) -> TridiagLu {
        let n = d.len();
        let mut u0: Vec<f64> = d.iter().map(|x| x - lambda).collect();
        let mut u1: Vec<f64> = e.to_vec();
        let mut u2 = vec![0.0; n.saturating_sub(2)];
        let mut lower: Vec<f64> = e.to_vec();
        let mut l = vec![0.0; n - 1];
        let mut swap = vec![false; n - 1];
        for i in 0..n - 1 {
            if u0[i].abs() >= lower[i].abs() {
                if u0[i].abs() < floor {
                    u0[i] = floor;
                }
                l[i] = lower[i] / u0[i];
                u0[i + 1] -= l[i] * u1[i];
            } else {
                swap[i] = true;
                let f = u0[i] / lower[i];
                u0[i] = lower[i];
                l[i] = f;
                let tmp = u1[i];
                u1[i] = u0[i + 1];
                u0[i + 1] = tmp - f * u0[i + 1];
                if i + 2 < n {
                    u2[i] = u1[i + 1];
                    u1[i + 1] *= -f;
                }
            }
            lower[i] = 0.0;
        }
        if u0[n - 1].abs() < floor {
            u0[n - 1] = floor;
        }
        TridiagLu {
            l,
            u0,
            u1,
            u2,
            swap,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.u0.len();
        let mut b = rhs.to_vec();
        for i in 0..n - 1 {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.l[i] * b[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_truncation_is_chebyshev() {
        let sp = truncated_spectrum(&JacobiOperator::free(), 3).unwrap();
        let r2 = 2f64.sqrt();
        for (p, want) in sp.iter().zip([-r2, 0.0, r2]) {
            assert!((p.lambda - want).abs() < 1e-14);
        }
        let total: f64 = sp.iter().map(|p| p.weight).sum();
        assert!((total - 1.0).abs() < 1e-14);
        // weights of U-polynomials: (2/(N+1)) sin²(kπ/(N+1))
        assert!((sp[1].weight - 0.5).abs() < 1e-14);
    }

    #[test]
    fn scalar_case() {
        let j = JacobiOperator::free()
            .with_head(&[crate::jacobi::HeadOverride {
                n: 1,
                a: 1.0,
                b: 0.7,
            }])
            .unwrap();
        let sp = truncated_spectrum(&j, 1).unwrap();
        assert_eq!(
            sp,
            vec![SpectralPoint {
                lambda: 0.7,
                weight: 1.0
            }]
        );
    }

    #[test]
    fn matches_dense_solver() {
        let d = [0.3, -1.0, 0.5, 2.0, 0.0, 0.1];
        let e = [1.0, 0.4, 2.0, 0.7, 1.3];
        let sp = tridiagonal_eigen(&d, &e).unwrap();
        let mut m = nalgebra::DMatrix::<f64>::zeros(6, 6);
        for i in 0..6 {
            m[(i, i)] = d[i];
            if i < 5 {
                m[(i, i + 1)] = e[i];
                m[(i + 1, i)] = e[i];
            }
        }
        let eig = m.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..6)
            .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (p, (l, w)) in sp.iter().zip(pairs) {
            assert!((p.lambda - l).abs() < 1e-12);
            assert!((p.weight - w).abs() < 1e-12);
        }
    }
}
