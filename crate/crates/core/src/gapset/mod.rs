//! Finite gap sets `e = [α_1, β_1] ∪ … ∪ [α_{ℓ+1}, β_{ℓ+1}]` and their
//! logarithmic potential theory.
//!
//! Everything numerical is done in normalized coordinates `u = (x - c) / h`
//! where `[c - h, c + h]` is the convex hull of the set, so the hull is
//! always `[-1, 1]`. Green's function is invariant under this affine change
//! and the capacity scales by `h`.

mod equilibrium;
mod functionals;

pub use equilibrium::Equilibrium;
pub use functionals::{
    eigenvalue_functionals, log_integral, szego_integral, szego_integral_with, Density,
    EigenvalueFunctionals, LogDensity, SzegoValue, SzegoWeight,
};
pub(crate) use functionals::{EdgeLaw, EDGE_CUTOFF};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaps narrower than this fraction of the diameter are rejected.
pub const MIN_RELATIVE_GAP: f64 = 1e-8;

/// A finite union of disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GapSet {
    endpoints: Vec<f64>,
}

impl TryFrom<Vec<f64>> for GapSet {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        GapSet::new(&v)
    }
}

impl From<GapSet> for Vec<f64> {
    fn from(g: GapSet) -> Vec<f64> {
        g.endpoints
    }
}

impl GapSet {
    /// Build a gap set from `α_1 < β_1 < … < β_{ℓ+1}`.
    pub fn new(endpoints: &[f64]) -> Result<Self> {
        if endpoints.len() < 2 || endpoints.len() % 2 == 1 {
            return Err(Error::Validation {
                index: endpoints.len(),
                message: format!(
                    "expected an even number (>= 2) of endpoints, got {}",
                    endpoints.len()
                ),
            });
        }
        for (i, &e) in endpoints.iter().enumerate() {
            if !e.is_finite() {
                return Err(Error::Validation {
                    index: i,
                    message: "endpoint is not finite".into(),
                });
            }
        }
        for i in 1..endpoints.len() {
            if endpoints[i] <= endpoints[i - 1] {
                return Err(Error::Validation {
                    index: i,
                    message: format!(
                        "endpoints must be strictly increasing ({} follows {})",
                        endpoints[i],
                        endpoints[i - 1]
                    ),
                });
            }
        }
        let diameter = endpoints[endpoints.len() - 1] - endpoints[0];
        for k in (1..endpoints.len() - 1).step_by(2) {
            if endpoints[k + 1] - endpoints[k] < MIN_RELATIVE_GAP * diameter {
                return Err(Error::Degenerate(format!(
                    "gap ({}, {}) is narrower than {MIN_RELATIVE_GAP:e} of the diameter",
                    endpoints[k],
                    endpoints[k + 1]
                )));
            }
        }
        Ok(GapSet {
            endpoints: endpoints.to_vec(),
        })
    }

    /// The single band `[a, b]`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        GapSet::new(&[a, b])
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    /// Number of gaps `ℓ`.
    pub fn gap_count(&self) -> usize {
        self.endpoints.len() / 2 - 1
    }

    pub fn band_count(&self) -> usize {
        self.endpoints.len() / 2
    }

    pub fn bands(&self) -> Vec<(f64, f64)> {
        self.endpoints.chunks(2).map(|c| (c[0], c[1])).collect()
    }

    pub fn gaps(&self) -> Vec<(f64, f64)> {
        (0..self.gap_count())
            .map(|k| (self.endpoints[2 * k + 1], self.endpoints[2 * k + 2]))
            .collect()
    }

    pub fn left(&self) -> f64 {
        self.endpoints[0]
    }

    pub fn right(&self) -> f64 {
        self.endpoints[self.endpoints.len() - 1]
    }

    pub fn diameter(&self) -> f64 {
        self.right() - self.left()
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.left() + self.right())
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.diameter()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.band_of(x).is_some()
    }

    /// Index of the band containing `x`.
    pub fn band_of(&self, x: f64) -> Option<usize> {
        self.bands().iter().position(|&(a, b)| a <= x && x <= b)
    }

    /// Index of the gap containing `x` (open gap).
    pub fn gap_of(&self, x: f64) -> Option<usize> {
        self.gaps().iter().position(|&(a, b)| a < x && x < b)
    }

    /// `dist(x, e)`.
    pub fn dist_to_set(&self, x: f64) -> f64 {
        self.bands()
            .iter()
            .map(|&(a, b)| {
                if x < a {
                    a - x
                } else if x > b {
                    x - b
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `dist(x, R \ e)`.
    pub fn dist_to_complement(&self, x: f64) -> f64 {
        match self.band_of(x) {
            Some(j) => {
                let (a, b) = self.bands()[j];
                (x - a).min(b - x)
            }
            None => 0.0,
        }
    }

    pub fn scaled(&self, s: f64) -> Result<GapSet> {
        if s <= 0.0 {
            return Err(Error::Argument("scale factor must be positive".into()));
        }
        GapSet::new(&self.endpoints.iter().map(|e| e * s).collect::<Vec<_>>())
    }

    pub fn translated(&self, t: f64) -> Result<GapSet> {
        GapSet::new(&self.endpoints.iter().map(|e| e + t).collect::<Vec<_>>())
    }

    /// Remove gap `k` by merging its two neighbouring bands.
    pub fn merge_gap(&self, k: usize) -> Result<GapSet> {
        if k >= self.gap_count() {
            return Err(Error::Argument(format!("no gap {k}")));
        }
        let mut e = self.endpoints.clone();
        e.drain(2 * k + 1..2 * k + 3);
        GapSet::new(&e)
    }

    /// Endpoints in normalized coordinates (hull `[-1, 1]`).
    pub(crate) fn normalized_endpoints(&self) -> Vec<f64> {
        let (c, h) = (self.center(), self.half_width());
        let mut u: Vec<f64> = self.endpoints.iter().map(|e| (e - c) / h).collect();
        let n = u.len();
        u[0] = -1.0;
        u[n - 1] = 1.0;
        u
    }

    pub(crate) fn to_normalized(&self, x: f64) -> f64 {
        (x - self.center()) / self.half_width()
    }

    pub(crate) fn from_normalized(&self, u: f64) -> f64 {
        self.center() + self.half_width() * u
    }

    /// Principal branch of `√R(z)`, `R(z) = ∏ (z - e_k)`: cut exactly on the
    /// set, positive to the right of it, `~ z^{ℓ+1}` at infinity.
    pub fn sqrt_r(&self, z: Complex64) -> Complex64 {
        self.endpoints
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &e| acc * (z - e).sqrt())
    }
}

/// Principal `√R` for an explicit endpoint list.
pub(crate) fn sqrt_r_of(endpoints: &[f64], z: Complex64) -> Complex64 {
    endpoints
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &e| acc * (z - e).sqrt())
}
