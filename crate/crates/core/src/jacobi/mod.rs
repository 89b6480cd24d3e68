//! Jacobi operators over free or periodic backgrounds with finitely many
//! modified coefficients.

mod diagnostics;
mod measure;
mod mfunction;
mod tridiag;

pub use diagnostics::{
    condition_report, eigenvalues_outside, orthonormal_eval, orthonormal_log_sequence,
    ConditionReport, EigenvalueDetection,
};
pub use measure::SpectralMeasure;
pub use mfunction::{MFunction, StripDirection};
pub use tridiag::{truncated_spectrum, SpectralPoint};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Background coefficients beyond the finitely many overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    /// `a ≡ 1`, `b ≡ 0`.
    Free,
    /// One period `(a_1..a_p, b_1..b_p)`.
    Periodic { a: Vec<f64>, b: Vec<f64> },
}

impl Tail {
    pub fn period(&self) -> usize {
        match self {
            Tail::Free => 1,
            Tail::Periodic { a, .. } => a.len(),
        }
    }

    fn a(&self, n: usize) -> f64 {
        match self {
            Tail::Free => 1.0,
            Tail::Periodic { a, .. } => a[(n - 1) % a.len()],
        }
    }

    fn b(&self, n: usize) -> f64 {
        match self {
            Tail::Free => 0.0,
            Tail::Periodic { b, .. } => b[(n - 1) % b.len()],
        }
    }

    fn shifted(&self, k: usize) -> Tail {
        match self {
            Tail::Free => Tail::Free,
            Tail::Periodic { a, b } => {
                let p = a.len();
                let s = k % p;
                let rot = |v: &[f64]| v[s..].iter().chain(&v[..s]).copied().collect::<Vec<_>>();
                Tail::Periodic {
                    a: rot(a),
                    b: rot(b),
                }
            }
        }
    }
}

/// One modified coefficient pair at site `n` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadOverride {
    pub n: usize,
    pub a: f64,
    pub b: f64,
}

/// A Jacobi matrix with `a_n > 0`, given by a background tail and a finite
/// list of overrides near the top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiOperator {
    tail: Tail,
    head: Vec<HeadOverride>,
}

impl JacobiOperator {
    pub fn free() -> JacobiOperator {
        JacobiOperator {
            tail: Tail::Free,
            head: Vec::new(),
        }
    }

    pub fn periodic(a: &[f64], b: &[f64]) -> Result<JacobiOperator> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::Argument(
                "periodic parameters need equal, nonzero lengths".into(),
            ));
        }
        if let Some(i) = a.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Validation {
                index: i,
                message: "a_n must be positive".into(),
            });
        }
        Ok(JacobiOperator {
            tail: Tail::Periodic {
                a: a.to_vec(),
                b: b.to_vec(),
            },
            head: Vec::new(),
        })
    }

    pub fn from_tail(tail: Tail) -> Result<JacobiOperator> {
        match tail {
            Tail::Free => Ok(JacobiOperator::free()),
            Tail::Periodic { a, b } => JacobiOperator::periodic(&a, &b),
        }
    }

    /// Replace `(a_n, b_n)` at the listed sites.
    pub fn with_head(mut self, overrides: &[HeadOverride]) -> Result<JacobiOperator> {
        for (i, o) in overrides.iter().enumerate() {
            if o.n == 0 {
                return Err(Error::Validation {
                    index: i,
                    message: "sites are numbered from 1".into(),
                });
            }
            if !(o.a > 0.0) || !o.a.is_finite() || !o.b.is_finite() {
                return Err(Error::Validation {
                    index: i,
                    message: format!("override at n = {} needs a > 0 and finite b", o.n),
                });
            }
            self.head.retain(|h| h.n != o.n);
            self.head.push(*o);
        }
        self.head.sort_by_key(|h| h.n);
        Ok(self)
    }

    /// Shorthand for overriding only `a_n` (keeping the tail's `b_n`).
    pub fn with_a(self, n: usize, a: f64) -> Result<JacobiOperator> {
        let b = self.b(n.max(1));
        self.with_head(&[HeadOverride { n, a, b }])
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn head(&self) -> &[HeadOverride] {
        &self.head
    }

    /// Largest overridden site (0 when none).
    pub fn head_len(&self) -> usize {
        self.head.last().map_or(0, |h| h.n)
    }

    pub fn a(&self, n: usize) -> f64 {
        assert!(n >= 1, "sites are numbered from 1");
        self.head
            .iter()
            .find(|h| h.n == n)
            .map_or_else(|| self.tail.a(n), |h| h.a)
    }

    pub fn b(&self, n: usize) -> f64 {
        assert!(n >= 1, "sites are numbered from 1");
        self.head
            .iter()
            .find(|h| h.n == n)
            .map_or_else(|| self.tail.b(n), |h| h.b)
    }

    /// `(a_1..a_n, b_1..b_n)`.
    pub fn coefficients(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        (
            (1..=n).map(|k| self.a(k)).collect(),
            (1..=n).map(|k| self.b(k)).collect(),
        )
    }

    /// The operator with its first `k` rows and columns removed.
    pub fn stripped(&self, k: usize) -> JacobiOperator {
        let head = self
            .head
            .iter()
            .filter(|h| h.n > k)
            .map(|h| HeadOverride { n: h.n - k, ..*h })
            .collect();
        JacobiOperator {
            tail: self.tail.shifted(k),
            head,
        }
    }

    /// The background operator (overrides dropped).
    pub fn background(&self) -> JacobiOperator {
        JacobiOperator {
            tail: self.tail.clone(),
            head: Vec::new(),
        }
    }

    /// Closed-form m-function: reverse stripping through the head down to
    /// the periodic fixed point of the tail.
    pub fn m_function(&self) -> MFunction {
        let k = self.head_len();
        let tail = match self.tail.shifted(k) {
            Tail::Free => MFunction::periodic(vec![1.0], vec![0.0]),
            Tail::Periodic { a, b } => MFunction::periodic(a, b),
        };
        (1..=k).rev().fold(tail, |m, n| {
            m.strip(self.a(n), self.b(n), StripDirection::Reverse)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accessors_and_stripping() {
        let j = JacobiOperator::periodic(&[1.5, 0.5], &[0.0, 0.0])
            .unwrap()
            .with_a(1, 2.0)
            .unwrap();
        assert_eq!(j.a(1), 2.0);
        assert_eq!(j.a(2), 0.5);
        assert_eq!(j.a(3), 1.5);
        let s = j.stripped(1);
        assert_eq!(s.a(1), 0.5);
        assert_eq!(s.a(2), 1.5);
        assert!(s.head().is_empty());
        assert_eq!(j.stripped(3).a(1), 0.5);
        assert!(JacobiOperator::free().with_a(2, -1.0).is_err());
    }
}
