//! Eigenvalue detection, orthonormal polynomials and the coefficient-side
//! condition functionals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tridiag::{sturm_count, tridiagonal_eigen};
use super::{JacobiOperator, MFunction};
use crate::error::{Error, Result};
use crate::gapset::GapSet;

/// Matching tolerance between the two detection methods.
pub const EIGENVALUE_MATCH_TOL: f64 = 1e-8;

/// `p_n(x)` from `x p_k = a_{k+1} p_{k+1} + b_{k+1} p_k + a_k p_{k-1}`.
pub fn orthonormal_eval(j: &JacobiOperator, n: usize, x: Complex64) -> Complex64 {
    let (mut prev, mut cur) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    for k in 0..n {
        let a_prev = if k == 0 { 0.0 } else { j.a(k) };
        let next = ((x - j.b(k + 1)) * cur - a_prev * prev) / j.a(k + 1);
        prev = cur;
        cur = next;
    }
    cur
}

/// `p_0 .. p_n` as `(mantissa, log scale)` pairs, `p_k = mantissa · e^{scale}`,
/// rescaled every step so that nothing overflows.
pub fn orthonormal_log_sequence(
    j: &JacobiOperator,
    n: usize,
    x: Complex64,
) -> Vec<(Complex64, f64)> {
    let mut out = Vec::with_capacity(n + 1);
    let (mut prev, mut cur) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let mut scale = 0.0;
    out.push((cur, scale));
    for k in 0..n {
        let a_prev = if k == 0 { 0.0 } else { j.a(k) };
        let mut next = ((x - j.b(k + 1)) * cur - a_prev * prev) / j.a(k + 1);
        let s = next.norm().max(cur.norm());
        if s > 0.0 && s.is_finite() {
            next /= s;
            prev = cur / s;
            scale += s.ln();
        } else {
            prev = cur;
        }
        cur = next;
        out.push((cur, scale));
    }
    out
}

/// Eigenvalues off the set found by the truncation filter and by the real
/// poles of the closed-form m-function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueDetection {
    pub by_truncation: Vec<f64>,
    /// `(E_j, w_j)` with `w_j` the residue weight of the spectral measure.
    pub by_poles: Vec<(f64, f64)>,
    pub sizes: (usize, usize),
}

impl EigenvalueDetection {
    pub fn detect(j: &JacobiOperator, set: &GapSet) -> Result<EigenvalueDetection> {
        let p = j.tail().period();
        let by_poles = pole_masses(j, set)?;
        let mut base = (4 * j.head_len() + 120).div_ceil(p) * p;
        // eigenvalues close to an edge have slowly decaying eigenvectors;
        // grow the truncation until the filter sees every pole
        loop {
            let sizes = (base, 2 * base + 1);
            let by_truncation = filtered(j, set, sizes)?;
            let settled = by_truncation.len() >= by_poles.len();
            if settled || base >= MAX_TRUNCATION {
                return Ok(EigenvalueDetection {
                    by_truncation,
                    by_poles,
                    sizes,
                });
            }
            base *= 2;
        }
    }
}

/// Largest first truncation size tried by [`EigenvalueDetection::detect`].
pub const MAX_TRUNCATION: usize = 8192;

fn filtered(j: &JacobiOperator, set: &GapSet, sizes: (usize, usize)) -> Result<Vec<f64>> {
    let first = truncation_outside(j, set, sizes.0)?;
    let second = truncation_outside(j, set, sizes.1)?;
    // one-to-one: a near-degenerate pair from the two ends of one
    // truncation must not both claim the same eigenvalue of the other
    let mut used = vec![false; second.len()];
    let mut out = Vec::new();
    for e in first {
        let hit = (0..second.len())
            .filter(|&k| !used[k] && (e - second[k]).abs() < EIGENVALUE_MATCH_TOL)
            .min_by(|&i, &k| (e - second[i]).abs().total_cmp(&(e - second[k]).abs()));
        if let Some(k) = hit {
            used[k] = true;
            out.push(e);
        }
    }
    Ok(out)
}

/// Isolated eigenvalues of `J` off the set, cross-checked between the
/// truncation filter and the m-function poles.
pub fn eigenvalues_outside(j: &JacobiOperator, set: &GapSet) -> Result<Vec<f64>> {
    let det = EigenvalueDetection::detect(j, set)?;
    let poles: Vec<f64> = det.by_poles.iter().map(|p| p.0).collect();
    let agree = poles.len() == det.by_truncation.len()
        && poles
            .iter()
            .zip(&det.by_truncation)
            .all(|(a, b)| (a - b).abs() < 1e2 * EIGENVALUE_MATCH_TOL);
    if !agree {
        return Err(Error::Diagnostic {
            message: "truncation filter and m-function poles disagree".into(),
            first: det.by_truncation,
            second: poles,
        });
    }
    Ok(poles)
}

fn truncation_outside(j: &JacobiOperator, set: &GapSet, n: usize) -> Result<Vec<f64>> {
    let (a, d) = j.coefficients(n);
    let e = &a[..n - 1];
    let mut out = Vec::new();
    let (lo, hi) = outer_bounds(j);
    let mut windows = vec![(lo.min(set.left() - 1.0), set.left())];
    windows.extend(set.gaps());
    windows.push((set.right(), hi.max(set.right() + 1.0)));
    for (l, r) in windows {
        let (cl, cr) = (sturm_count(&d, e, l), sturm_count(&d, e, r));
        for k in cl..cr {
            let lam = bisect_kth(&d, e, k, l, r);
            if set.dist_to_set(lam) > 1e-10 {
                out.push(lam);
            }
        }
    }
    if out.len() > n / 2 {
        // clearly not a finite-rank situation; fall back to a full solve
        let all = tridiagonal_eigen(&d, e)?;
        out = all
            .iter()
            .map(|p| p.lambda)
            .filter(|&x| set.dist_to_set(x) > 1e-10)
            .collect();
    }
    Ok(out)
}

fn bisect_kth(d: &[f64], e: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
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
    }
    0.5 * (lo + hi)
}

// Gershgorin bounds over the head and two periods of the tail.
fn outer_bounds(j: &JacobiOperator) -> (f64, f64) {
    let n = j.head_len() + 2 * j.tail().period() + 2;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 1..=n {
        let r = j.a(k) + if k > 1 { j.a(k - 1) } else { 0.0 };
        lo = lo.min(j.b(k) - r);
        hi = hi.max(j.b(k) + r);
    }
    (lo - 1e-9, hi + 1e-9)
}

/// Real poles of `m` off the set with their masses.
pub(crate) fn pole_masses(j: &JacobiOperator, set: &GapSet) -> Result<Vec<(f64, f64)>> {
    let m = j.m_function();
    let (lo, hi) = outer_bounds(j);
    let mut windows = vec![(lo.min(set.left() - 1.0), set.left())];
    windows.extend(set.gaps());
    windows.push((set.right(), hi.max(set.right() + 1.0)));
    let recip = |x: f64| -> Option<f64> {
        match m.value(Complex64::new(x, 0.0)) {
            Ok(v) => Some(1.0 / v.re),
            Err(Error::Pole(_)) => Some(0.0),
            Err(_) => None,
        }
    };
    let mut poles = Vec::new();
    for (l, r) in windows {
        let samples = 600;
        let pts: Vec<f64> = (1..samples)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / samples as f64;
                0.5 * (l + r) - 0.5 * (r - l) * t.cos()
            })
            .collect();
        let vals: Vec<Option<f64>> = pts.iter().map(|&x| recip(x)).collect();
        for i in 0..pts.len() - 1 {
            let (Some(f0), Some(f1)) = (vals[i], vals[i + 1]) else {
                continue;
            };
            if f0 > 0.0 && f1 <= 0.0 && f0.is_finite() && f1.is_finite() {
                if let Some(e) = bisect_recip(&recip, pts[i], pts[i + 1]) {
                    poles.push(e);
                }
            }
        }
    }
    poles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut out = Vec::with_capacity(poles.len());
    for (i, &e) in poles.iter().enumerate() {
        let mut r = 0.5 * set.dist_to_set(e);
        for (k, &f) in poles.iter().enumerate() {
            if k != i {
                r = r.min(0.5 * (e - f).abs());
            }
        }
        out.push((e, residue_weight(&m, e, r)?));
    }
    Ok(out)
}

fn bisect_recip<F: Fn(f64) -> Option<f64>>(f: &F, mut lo: f64, mut hi: f64) -> Option<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match f(mid) {
            Some(v) if v > 0.0 => lo = mid,
            Some(_) => hi = mid,
            None => return None,
        }
    }
    Some(0.5 * (lo + hi))
}

// w = -(1/2πi) ∮ m dx on a small circle, by the trapezoid rule.
fn residue_weight(m: &MFunction, e: f64, r: f64) -> Result<f64> {
    let k = 64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..k {
        let phi = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / k as f64;
        let dz = Complex64::from_polar(r, phi);
        acc += m.value(e + dz)? * dz;
    }
    Ok(-(acc / k as f64).re)
}

/// Partial sums of the coefficient-side conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub horizon: usize,
    /// `Σ b_n² + (a_n - 1)²`
    pub free_square_sum: f64,
    /// `Σ |a_n - a_n^∞| + |b_n - b_n^∞|`
    pub l1_distance: f64,
    /// `Σ log(n+1)^{1+ε} (|a_n - a_n^∞| + |b_n - b_n^∞|)`
    pub log_weighted: f64,
    pub epsilon: f64,
    /// `d_m(J, sample)` for `m = 1..horizon`
    pub torus_distances: Vec<f64>,
    /// `Σ d_m²`
    pub torus_square_sum: f64,
}

/// `d_m(J, J') = Σ_{j ≥ 0} e^{-j} (|a_{m+j} - a'_{m+j}| + |b_{m+j} - b'_{m+j}|)`.
pub fn d_m(j: &JacobiOperator, other: &JacobiOperator, m: usize) -> f64 {
    (0..45)
        .map(|k| {
            let n = m + k;
            (-(k as f64)).exp() * ((j.a(n) - other.a(n)).abs() + (j.b(n) - other.b(n)).abs())
        })
        .sum()
}

pub fn condition_report(
    j: &JacobiOperator,
    reference: &JacobiOperator,
    horizon: usize,
    epsilon: f64,
    torus_sample: &[JacobiOperator],
) -> Result<ConditionReport> {
    if horizon == 0 {
        return Err(Error::Argument("horizon must be at least 1".into()));
    }
    if torus_sample.is_empty() {
        return Err(Error::Argument("torus sample is empty".into()));
    }
    let mut rep = ConditionReport {
        horizon,
        free_square_sum: 0.0,
        l1_distance: 0.0,
        log_weighted: 0.0,
        epsilon,
        torus_distances: Vec::with_capacity(horizon),
        torus_square_sum: 0.0,
    };
    for n in 1..=horizon {
        let (a, b) = (j.a(n), j.b(n));
        rep.free_square_sum += b * b + (a - 1.0) * (a - 1.0);
        let diff = (a - reference.a(n)).abs() + (b - reference.b(n)).abs();
        rep.l1_distance += diff;
        rep.log_weighted += ((n + 1) as f64).ln().powf(1.0 + epsilon) * diff;
        let d = torus_sample
            .iter()
            .map(|t| d_m(j, t, n))
            .fold(f64::INFINITY, f64::min);
        rep.torus_distances.push(d);
        rep.torus_square_sum += d * d;
    }
    Ok(rep)
}
