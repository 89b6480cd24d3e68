//! Periodic Jacobi matrices with a prescribed band set: points of the
//! isospectral torus, their discriminant and m-function, and continuation
//! along the torus.

mod fit;

pub use fit::{fit_periodic, torus_walk, PeriodicFit, WalkOptions};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gapset::{GapSet, MIN_RELATIVE_GAP};
use crate::jacobi::{JacobiOperator, MFunction};
use crate::poly::Poly;

/// One period `(a_1..a_p, b_1..b_p)` of a periodic Jacobi matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TorusPoint {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<TorusPoint> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::Argument(
                "period parameters need equal, nonzero lengths".into(),
            ));
        }
        if let Some(i) = a.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Validation {
                index: i,
                message: "a_n must be positive".into(),
            });
        }
        if let Some(i) = b.iter().position(|x| !x.is_finite()) {
            return Err(Error::Validation {
                index: a.len() + i,
                message: "b_n must be finite".into(),
            });
        }
        Ok(TorusPoint { a, b })
    }

    pub fn free() -> TorusPoint {
        TorusPoint {
            a: vec![1.0],
            b: vec![0.0],
        }
    }

    pub fn period(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `(a_1..a_p, b_1..b_p)` as one vector.
    pub fn params(&self) -> Vec<f64> {
        self.a.iter().chain(&self.b).copied().collect()
    }

    pub(crate) fn from_params(v: &[f64]) -> Result<TorusPoint> {
        let p = v.len() / 2;
        TorusPoint::new(v[..p].to_vec(), v[p..].to_vec())
    }

    pub fn product_a(&self) -> f64 {
        self.a.iter().product()
    }

    pub fn discriminant(&self) -> Poly {
        discriminant(&self.a, &self.b)
    }

    /// The `2p` eigenvalues of the periodic and antiperiodic problems,
    /// sorted; consecutive pairs are the bands.
    pub fn band_edges(&self) -> Vec<f64> {
        let mut ev = boundary_eigen(&self.a, &self.b, 1.0).0;
        ev.extend(boundary_eigen(&self.a, &self.b, -1.0).0);
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Band set `{|Δ| ≤ 2}`, with closed gaps merged.
    pub fn gapset(&self) -> Result<GapSet> {
        let e = self.band_edges();
        let diam = e[e.len() - 1] - e[0];
        let mut ends = vec![e[0]];
        for k in 0..self.period() - 1 {
            let (lo, hi) = (e[2 * k + 1], e[2 * k + 2]);
            if hi - lo > MIN_RELATIVE_GAP * diam {
                ends.push(lo);
                ends.push(hi);
            }
        }
        ends.push(e[e.len() - 1]);
        GapSet::new(&ends)
    }

    /// Eigenvalues of the leading `(p-1) × (p-1)` block (Dirichlet data).
    pub fn dirichlet(&self) -> Vec<f64> {
        dirichlet_eigen(&self.a, &self.b).0
    }

    pub fn operator(&self) -> JacobiOperator {
        JacobiOperator::periodic(&self.a, &self.b).expect("validated on construction")
    }

    pub fn m_function(&self) -> MFunction {
        MFunction::periodic(self.a.clone(), self.b.clone())
    }

    /// The point stripped `k` times: parameters rotated by `k` sites.
    pub fn shifted(&self, k: usize) -> TorusPoint {
        let p = self.period();
        let s = k % p;
        let rot = |v: &[f64]| v[s..].iter().chain(&v[..s]).copied().collect::<Vec<_>>();
        TorusPoint {
            a: rot(&self.a),
            b: rot(&self.b),
        }
    }

    /// The left half-line `n ≤ -1` of the two-sided periodic operator,
    /// read outward from the origin. Shares the Dirichlet data; a datum
    /// inside a gap is an eigenvalue of exactly one of the two halves.
    pub fn reflected(&self) -> TorusPoint {
        let p = self.period() as isize;
        let at = |v: &[f64], k: isize| v[k.rem_euclid(p) as usize];
        TorusPoint {
            a: (0..p).map(|i| at(&self.a, p - 3 - i)).collect(),
            b: (0..p).map(|i| at(&self.b, p - 2 - i)).collect(),
        }
    }
}

/// Trace of the one-period transfer matrix, a degree-`p` polynomial with
/// leading coefficient `1/∏ a_n`.
pub fn discriminant(a: &[f64], b: &[f64]) -> Poly {
    let p = a.len();
    let one = Poly::constant(1.0);
    let zero = Poly::constant(0.0);
    // columns map (p_{n-1}, p_{n-2}) to (p_n, p_{n-1})
    let mut t = [one.clone(), zero.clone(), zero, one];
    for n in 0..p {
        let a_prev = if n == 0 { a[p - 1] } else { a[n - 1] };
        let s00 = Poly::new(vec![-b[n] / a[n], 1.0 / a[n]]);
        let s01 = Poly::constant(-a_prev / a[n]);
        t = [
            s00.mul(&t[0]).add(&s01.mul(&t[2])),
            s00.mul(&t[1]).add(&s01.mul(&t[3])),
            t[0].clone(),
            t[1].clone(),
        ];
    }
    t[0].add(&t[3])
}

/// Closed-form periodic m-function.
pub fn m_periodic(t: &TorusPoint, x: Complex64) -> Result<Complex64> {
    t.m_function().value(x)
}

// Symmetric p × p matrix with corner sign `s` (+1 periodic, -1 antiperiodic).
fn boundary_matrix(a: &[f64], b: &[f64], s: f64) -> DMatrix<f64> {
    let p = a.len();
    let mut m = DMatrix::<f64>::zeros(p, p);
    for n in 0..p {
        m[(n, n)] += b[n];
        let k = (n + 1) % p;
        let sign = if n == p - 1 { s } else { 1.0 };
        m[(n, k)] += sign * a[n];
        m[(k, n)] += sign * a[n];
    }
    m
}

/// Sorted eigenvalues with their gradients in `(a, b)` by first-order
/// perturbation theory.
pub(crate) fn boundary_eigen(a: &[f64], b: &[f64], s: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = a.len();
    let eig = boundary_matrix(a, b, s).symmetric_eigen();
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vals = Vec::with_capacity(p);
    let mut grads = Vec::with_capacity(p);
    for &i in &idx {
        let v = eig.eigenvectors.column(i);
        let mut g = vec![0.0; 2 * p];
        for n in 0..p {
            let k = (n + 1) % p;
            let sign = if n == p - 1 { s } else { 1.0 };
            g[n] = 2.0 * sign * v[n] * v[k];
            g[p + n] = v[n] * v[n];
        }
        vals.push(eig.eigenvalues[i]);
        grads.push(g);
    }
    (vals, grads)
}

pub(crate) fn dirichlet_eigen(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = a.len();
    if p < 2 {
        return (Vec::new(), Vec::new());
    }
    let q = p - 1;
    let mut m = DMatrix::<f64>::zeros(q, q);
    for n in 0..q {
        m[(n, n)] = b[n];
        if n + 1 < q {
            m[(n, n + 1)] = a[n];
            m[(n + 1, n)] = a[n];
        }
    }
    let eig = m.symmetric_eigen();
    let mut idx: Vec<usize> = (0..q).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vals = Vec::with_capacity(q);
    let mut grads = Vec::with_capacity(q);
    for &i in &idx {
        let v = eig.eigenvectors.column(i);
        let mut g = vec![0.0; 2 * p];
        for n in 0..q {
            if n + 1 < q {
                g[n] = 2.0 * v[n] * v[n + 1];
            }
            g[p + n] = v[n] * v[n];
        }
        vals.push(eig.eigenvalues[i]);
        grads.push(g);
    }
    (vals, grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_keeps_bands_and_dirichlet_data() {
        let t = TorusPoint::new(vec![1.2, 0.7, 0.9], vec![0.3, -0.4, 0.1]).unwrap();
        let r = t.reflected();
        assert_eq!(r.reflected(), t);
        for (x, y) in t.band_edges().iter().zip(r.band_edges()) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in t.dirichlet().iter().zip(r.dirichlet()) {
            assert!((x - y).abs() < 1e-12);
        }
        let t2 = TorusPoint::new(vec![1.5, 0.5], vec![0.2, -0.2]).unwrap();
        assert_eq!(t2.reflected().a(), &[0.5, 1.5]);
        assert_eq!(t2.reflected().b(), &[0.2, -0.2]);
    }

    #[test]
    fn discriminant_examples() {
        let d = discriminant(&[1.0], &[0.0]);
        assert_eq!(d.coeffs, vec![0.0, 1.0]);
        let t = TorusPoint::new(vec![1.5, 0.5], vec![0.0, 0.0]).unwrap();
        let d = t.discriminant();
        for x in [0.0, 0.7, 2.0, -3.1] {
            assert!((d.eval(x) - (x * x - 2.5) / 0.75).abs() < 1e-13);
        }
        let e = t.band_edges();
        for (u, v) in e.iter().zip([-2.0, -1.0, 1.0, 2.0]) {
            assert!((u - v).abs() < 1e-13);
        }
        assert_eq!(t.gapset().unwrap().gap_count(), 1);
        assert!((t.dirichlet()[0]).abs() < 1e-15);
        assert_eq!(t.shifted(1).a(), &[0.5, 1.5]);
    }

    #[test]
    fn edges_are_where_discriminant_is_two() {
        let t = TorusPoint::new(vec![0.8, 1.1, 1.4], vec![0.3, -0.2, 0.5]).unwrap();
        let d = t.discriminant();
        assert!((d.leading() - 1.0 / t.product_a()).abs() < 1e-13);
        for e in t.band_edges() {
            assert!((d.eval(e).abs() - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let a = [0.8, 1.1, 1.4];
        let b = [0.3, -0.2, 0.5];
        for s in [1.0, -1.0] {
            let (v0, g) = boundary_eigen(&a, &b, s);
            for q in 0..6 {
                let mut pa = a.to_vec();
                let mut pb = b.to_vec();
                if q < 3 {
                    pa[q] += 1e-7;
                } else {
                    pb[q - 3] += 1e-7;
                }
                let (v1, _) = boundary_eigen(&pa, &pb, s);
                for k in 0..3 {
                    assert!(((v1[k] - v0[k]) / 1e-7 - g[k][q]).abs() < 1e-5);
                }
            }
        }
    }
}
