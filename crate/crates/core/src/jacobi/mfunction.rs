use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SpectralMeasure;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripDirection {
    /// `m ↦ m_1`, removing `(a_1, b_1)`.
    Forward,
    /// `m_1 ↦ m`, prepending `(a_1, b_1)`.
    Reverse,
}

#[derive(Debug)]
enum Repr {
    Measure(SpectralMeasure),
    Periodic {
        a: Vec<f64>,
        b: Vec<f64>,
    },
    Strip {
        inner: MFunction,
        a: f64,
        b: f64,
        dir: StripDirection,
    },
}

/// The Borel transform `m(x) = ∫ dμ(t) / (t - x)` of a spectral measure.
#[derive(Debug, Clone)]
pub struct MFunction {
    repr: Arc<Repr>,
}

impl MFunction {
    pub fn from_measure(mu: SpectralMeasure) -> MFunction {
        MFunction {
            repr: Arc::new(Repr::Measure(mu)),
        }
    }

    /// m-function of the periodic operator with one period `(a, b)`.
    pub fn periodic(a: Vec<f64>, b: Vec<f64>) -> MFunction {
        assert_eq!(a.len(), b.len());
        MFunction {
            repr: Arc::new(Repr::Periodic { a, b }),
        }
    }

    pub fn free() -> MFunction {
        MFunction::periodic(vec![1.0], vec![0.0])
    }

    /// Coefficient stripping `1/m_0 = b_1 - x - a_1² m_1` in either direction.
    pub fn strip(&self, a1: f64, b1: f64, dir: StripDirection) -> MFunction {
        MFunction {
            repr: Arc::new(Repr::Strip {
                inner: self.clone(),
                a: a1,
                b: b1,
                dir,
            }),
        }
    }

    /// True when values come from exact algebra rather than quadrature.
    pub fn is_algebraic(&self) -> bool {
        match &*self.repr {
            Repr::Measure(_) => false,
            Repr::Periodic { .. } => true,
            Repr::Strip { inner, .. } => inner.is_algebraic(),
        }
    }

    pub fn value(&self, x: Complex64) -> Result<Complex64> {
        self.eval(x, false)
    }

    /// Boundary value `m(x + i0)` for real `x`.
    pub fn value_above(&self, x: f64) -> Result<Complex64> {
        if let Repr::Measure(mu) = &*self.repr {
            return richardson_above(mu, x);
        }
        self.eval(Complex64::new(x, 0.0), true)
    }

    /// a.c. density `Im m(x + i0) / π`.
    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(self.value_above(x)?.im.max(0.0) / std::f64::consts::PI)
    }

    fn eval(&self, x: Complex64, above: bool) -> Result<Complex64> {
        match &*self.repr {
            Repr::Measure(mu) => mu.m_value(x),
            Repr::Periodic { a, b } => periodic_fixed_point(a, b, x, above),
            Repr::Strip { inner, a, b, dir } => {
                let mi = inner.eval(x, above)?;
                match dir {
                    StripDirection::Forward => {
                        if mi == Complex64::new(0.0, 0.0) {
                            return Err(Error::Pole(format!("m vanishes at {x}")));
                        }
                        Ok((*b - x - 1.0 / mi) / (a * a))
                    }
                    StripDirection::Reverse => {
                        let den = *b - x - a * a * mi;
                        if den.norm() < 1e-300 {
                            return Err(Error::Pole(format!("m has a pole at {x}")));
                        }
                        Ok(1.0 / den)
                    }
                }
            }
        }
    }
}

/// Möbius matrix `(A, B, C, D)` of one period of reverse stripping.
pub(crate) fn period_matrix(a: &[f64], b: &[f64], x: Complex64) -> [Complex64; 4] {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [one, zero, zero, one];
    for k in 0..a.len() {
        let s = [zero, one, Complex64::new(-a[k] * a[k], 0.0), b[k] - x];
        m = [
            m[0] * s[0] + m[1] * s[2],
            m[0] * s[1] + m[1] * s[3],
            m[2] * s[0] + m[3] * s[2],
            m[2] * s[1] + m[3] * s[3],
        ];
    }
    m
}

fn periodic_fixed_point(a: &[f64], b: &[f64], x: Complex64, above: bool) -> Result<Complex64> {
    let [ma, mb, mc, md] = period_matrix(a, b, x);
    let det: f64 = a.iter().map(|v| v * v).product();
    // C m² + (D - A) m - B = 0
    let beta = md - ma;
    let gamma = -mb;
    let disc = beta * beta - 4.0 * mc * gamma;
    let scale = beta.norm_sqr() + (4.0 * mc * gamma).norm() + det;
    if disc.norm() < 1e-14 * scale {
        return Err(Error::Boundary(format!(
            "{x} is a band edge of the periodic operator"
        )));
    }
    let mut sq = disc.sqrt();
    if (beta.conj() * sq).re < 0.0 {
        sq = -sq;
    }
    let q = -0.5 * (beta + sq);
    let roots = [q / mc, gamma / q];
    let pick = if x.im != 0.0 {
        roots
            .into_iter()
            .find(|r| r.im * x.im > 0.0)
            .unwrap_or_else(|| {
                if (roots[0].im * x.im) > (roots[1].im * x.im) {
                    roots[0]
                } else {
                    roots[1]
                }
            })
    } else if disc.re < 0.0 && disc.im.abs() <= 1e-12 * scale {
        if !above {
            return Err(Error::Domain {
                index: 0,
                message: format!("{} lies in a band", x.re),
            });
        }
        let r = if roots[0].im > roots[1].im {
            roots[0]
        } else {
            roots[1]
        };
        Complex64::new(r.re, r.im.abs())
    } else {
        // the attracting fixed point
        let mult = |r: Complex64| (mc * r + md).norm_sqr();
        let r = if mult(roots[0]) >= mult(roots[1]) {
            roots[0]
        } else {
            roots[1]
        };
        Complex64::new(r.re, 0.0)
    };
    if !pick.is_finite() || pick.norm() > 1e14 {
        return Err(Error::Pole(format!("periodic m has a pole at {x}")));
    }
    Ok(pick)
}

fn richardson_above(mu: &SpectralMeasure, x: f64) -> Result<Complex64> {
    let eps = [1e-2, 1e-3, 1e-4];
    let v: Vec<Complex64> = eps
        .iter()
        .map(|&e| mu.m_value(Complex64::new(x, e)))
        .collect::<Result<_>>()?;
    // quadratic through the three samples, evaluated at ε = 0
    let (e0, e1, e2) = (eps[0], eps[1], eps[2]);
    let l0 = e1 * e2 / ((e0 - e1) * (e0 - e2));
    let l1 = e0 * e2 / ((e1 - e0) * (e1 - e2));
    let l2 = e0 * e1 / ((e2 - e0) * (e2 - e1));
    Ok(v[0] * l0 + v[1] * l1 + v[2] * l2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::JacobiOperator;

    #[test]
    fn free_and_perturbed_values() {
        let m = MFunction::free();
        let v = m.value(Complex64::new(2.5, 0.0)).unwrap();
        assert!((v.re + 0.5).abs() < 1e-15);
        let j = JacobiOperator::free().with_a(1, 2.0).unwrap();
        let v = j.m_function().value(Complex64::new(2.5, 0.0)).unwrap();
        assert!((v.re + 2.0).abs() < 1e-14);
        assert!(matches!(
            m.value(Complex64::new(0.5, 0.0)),
            Err(Error::Domain { .. })
        ));
        let b = m.value_above(0.0).unwrap();
        assert!((b - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn forward_undoes_reverse() {
        let m = MFunction::periodic(vec![1.5, 0.5], vec![0.0, 0.0]);
        let round =
            m.strip(1.3, -0.4, StripDirection::Reverse)
                .strip(1.3, -0.4, StripDirection::Forward);
        for x in [
            Complex64::new(0.3, 0.7),
            Complex64::new(-2.2, 0.1),
            Complex64::new(3.0, -1.0),
            Complex64::new(0.0, 4.0),
            Complex64::new(1.5, 1e-3),
        ] {
            let (u, v) = (m.value(x).unwrap(), round.value(x).unwrap());
            assert!((u - v).norm() < 1e-12 * u.norm().max(1.0));
        }
    }

    #[test]
    fn herglotz_and_asymptotics() {
        let j = JacobiOperator::periodic(&[1.5, 0.5], &[0.2, -0.1])
            .unwrap()
            .with_a(2, 0.8)
            .unwrap();
        let m = j.m_function();
        for k in 0..50 {
            let t = k as f64 * 0.37;
            let x = Complex64::new(3.0 * t.sin(), 0.01 + t.cos().abs());
            assert!(m.value(x).unwrap().im > 0.0);
        }
        let big = Complex64::new(1e6, 1e5);
        assert!((m.value(big).unwrap() * big + 1.0).norm() < 1e-5);
    }
}
