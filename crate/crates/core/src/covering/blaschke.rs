use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::group::{OrthocircleGroup, DEFAULT_WORD_CAP};
use super::mobius::MobiusMap;
use crate::error::{Error, Result};

/// Blaschke factor with zero at `w`, normalized positive at the origin;
/// `b(z, 0) = z`.
pub fn blaschke_factor(z: Complex64, w: Complex64) -> Complex64 {
    let r = w.norm();
    if r == 0.0 {
        return z;
    }
    -(w.conj() / r) * (z - w) / (1.0 - w.conj() * z)
}

/// Truncated value of `B(z, w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeValue {
    pub value: Complex64,
    /// Estimated bound on `|log B_∞(z) - log B_L(z)|`.
    pub tail_bound: f64,
    /// Set when `tail_bound` exceeds the requested tolerance: the estimated
    /// word length that would meet it.
    pub needed_length: Option<usize>,
}

/// `z ↦ ∏_{|γ|≤L} b(z, γ(w))`.
#[derive(Debug, Clone)]
pub struct BlaschkeEvaluator {
    group: OrthocircleGroup,
    base: Complex64,
    length: usize,
    zeros: Vec<Complex64>,
    outer: Vec<Complex64>,
    level_sums: Vec<f64>,
    ratio: f64,
}

impl BlaschkeEvaluator {
    pub fn new(
        group: &OrthocircleGroup,
        base: Complex64,
        length: usize,
    ) -> Result<BlaschkeEvaluator> {
        if base.norm() >= 1.0 {
            return Err(Error::Domain {
                index: 0,
                message: "base point must lie in the unit disk".into(),
            });
        }
        let levels = group.words_by_length(length, DEFAULT_WORD_CAP)?;
        let mut zeros = Vec::new();
        let mut level_sums = Vec::new();
        for level in &levels {
            let mut s = 0.0;
            for w in level {
                let v = w.map.apply(base);
                s += w.map.boundary_distance(base);
                zeros.push(v);
            }
            level_sums.push(s);
        }
        let outer = levels[length].iter().map(|w| w.map.apply(base)).collect();
        let ratio = decay_ratio(&level_sums);
        Ok(BlaschkeEvaluator {
            group: group.clone(),
            base,
            length,
            zeros,
            outer,
            level_sums,
            ratio,
        })
    }

    /// Smallest `L` whose estimated remainder is below `tol` (capped).
    pub fn with_tolerance(
        group: &OrthocircleGroup,
        base: Complex64,
        tol: f64,
        max_len: usize,
    ) -> Result<BlaschkeEvaluator> {
        let mut len = 1.min(max_len);
        loop {
            let ev = BlaschkeEvaluator::new(group, base, len)?;
            if ev.remainder() < tol || len >= max_len || group.rank() == 0 {
                return Ok(ev);
            }
            let want = ev
                .length_for(tol)
                .unwrap_or(len + 1)
                .clamp(len + 1, max_len);
            if group.word_count(want) > DEFAULT_WORD_CAP {
                return Ok(ev);
            }
            len = want;
        }
    }

    pub fn group(&self) -> &OrthocircleGroup {
        &self.group
    }

    pub fn base(&self) -> Complex64 {
        self.base
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Enumerated orbit `γ(w)`, `|γ| ≤ L`.
    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    /// `Σ_{|γ|=k} (1 - |γ(w)|²)` for `k = 0..=L`.
    pub fn level_sums(&self) -> &[f64] {
        &self.level_sums
    }

    /// Fitted ratio between successive level sums.
    pub fn decay_ratio(&self) -> f64 {
        self.ratio
    }

    /// Extrapolated `Σ_{|γ|>L} (1 - |γ(w)|²)`.
    pub fn remainder(&self) -> f64 {
        if self.group.rank() == 0 {
            return 0.0;
        }
        let q = self.ratio;
        if q >= 1.0 {
            return f64::INFINITY;
        }
        self.level_sums[self.length] * q / (1.0 - q)
    }

    fn length_for(&self, tol: f64) -> Option<usize> {
        let q = self.ratio;
        let r = self.remainder();
        if !(q > 0.0 && q < 1.0) || !r.is_finite() {
            return None;
        }
        if r <= tol {
            return Some(self.length);
        }
        Some(self.length + ((tol / r).ln() / q.ln()).ceil() as usize)
    }

    fn tail_bound(&self, z: Complex64) -> f64 {
        let r = self.remainder();
        if r == 0.0 {
            return 0.0;
        }
        let delta = self
            .outer
            .iter()
            .map(|v| (1.0 - v.conj() * z).norm())
            .fold(f64::INFINITY, f64::min)
            .max(1e-300);
        2.0 * r / (delta * delta)
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        self.zeros.iter().fold(Complex64::new(1.0, 0.0), |acc, &v| {
            acc * blaschke_factor(z, v)
        })
    }

    pub fn evaluate(&self, z: Complex64, tol: f64) -> BlaschkeValue {
        let value = self.value(z);
        let tail_bound = self.tail_bound(z);
        let needed_length = if tail_bound > tol {
            let n = self
                .length_for(tol * (tail_bound / self.remainder()).recip().min(1.0))
                .unwrap_or(usize::MAX);
            log::warn!(
                "Blaschke tail {tail_bound:.2e} above {tol:.2e} at L = {}; about {n} needed",
                self.length
            );
            Some(n)
        } else {
            None
        };
        BlaschkeValue {
            value,
            tail_bound,
            needed_length,
        }
    }

    /// `B'(z) / B(z)`.
    pub fn log_derivative(&self, z: Complex64) -> Complex64 {
        self.zeros
            .iter()
            .map(|&v| {
                if v.norm() == 0.0 {
                    1.0 / z
                } else {
                    1.0 / (z - v) + v.conj() / (1.0 - v.conj() * z)
                }
            })
            .sum()
    }

    /// `log |B(z)|` without forming the product.
    pub fn log_modulus(&self, z: Complex64) -> f64 {
        // product of squared moduli, renormalized before it can underflow
        let mut log = 0.0;
        let mut prod = 1.0;
        for &v in &self.zeros {
            prod *= (z - v).norm_sqr() / (1.0 - v.conj() * z).norm_sqr();
            if prod < 1e-200 {
                log += prod.ln();
                prod = 1.0;
            }
        }
        0.5 * (log + prod.ln())
    }

    /// `B'(0)` for the orbit of `0`: the product of the nonzero `|γ(0)|`.
    pub fn derivative_at_zero(&self) -> f64 {
        self.zeros
            .iter()
            .filter(|v| v.norm() > 0.0)
            .map(|v| v.norm())
            .product::<f64>()
            * if self.base.norm() == 0.0 {
                1.0
            } else {
                f64::NAN
            }
    }

    /// `B(γ(z), w) / B(z, w)` for a given group element.
    pub fn character_ratio(&self, g: &MobiusMap, z: Complex64) -> Complex64 {
        self.value(g.apply(z)) / self.value(z)
    }
}

fn decay_ratio(level_sums: &[f64]) -> f64 {
    let n = level_sums.len();
    if n < 3 {
        // one level only: use the single available ratio if any
        return if n == 2 && level_sums[0] > 0.0 {
            (level_sums[1] / level_sums[0]).min(0.99)
        } else {
            0.5
        };
    }
    let from = n.saturating_sub(4).max(1);
    let ratios: Vec<f64> = (from..n)
        .map(|k| level_sums[k] / level_sums[k - 1])
        .collect();
    ratios.iter().cloned().fold(0.0, f64::max)
}

/// Unit-modulus values on the generators `γ_1^+, …, γ_ℓ^+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Character {
    pub values: Vec<Complex64>,
}

impl Character {
    pub fn trivial(rank: usize) -> Character {
        Character {
            values: vec![Complex64::new(1.0, 0.0); rank],
        }
    }

    /// Value on a word by the homomorphism property.
    pub fn eval(&self, letters: &[u8]) -> Complex64 {
        letters.iter().fold(Complex64::new(1.0, 0.0), |acc, &s| {
            let v = self.values[(s / 2) as usize];
            acc * if s % 2 == 0 { v } else { v.conj() }
        })
    }

    /// Phases `arg χ(γ_j^+) / 2π` in `[0, 1)`.
    pub fn phases(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| (v.arg() / std::f64::consts::TAU).rem_euclid(1.0))
            .collect()
    }

    pub fn product(&self, other: &Character) -> Character {
        Character {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// Largest `|χ_1(γ_j) - χ_2(γ_j)|` over the generators.
    pub fn distance(&self, other: &Character) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Probe points inside the fundamental domain, away from the orbit zeros.
pub fn probes(group: &OrthocircleGroup, count: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    while out.len() < count && k < 50 * count {
        let t = 0.7 + 2.3999632297 * k as f64;
        let r = 0.08 + 0.25 * ((k as f64 * 0.618034).fract());
        let z = Complex64::from_polar(r, t);
        if group.in_fundamental_domain(z) {
            out.push(z);
        }
        k += 1;
    }
    out
}

/// `C_w(γ_j^+) = B(γ_j^+(z), w) / B(z, w)`, averaged over probes.
pub fn blaschke_character(
    group: &OrthocircleGroup,
    w: Complex64,
    length: usize,
) -> Result<Character> {
    let ev = BlaschkeEvaluator::new(group, w, length)?;
    character_of(&ev)
}

pub(crate) fn character_of(ev: &BlaschkeEvaluator) -> Result<Character> {
    let group = ev.group();
    let zs = probes(group, 8);
    let mut values = Vec::with_capacity(group.rank());
    for j in 0..group.rank() {
        let g = group.generator(2 * j as u8);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut used = 0;
        for &z in &zs {
            if ev.value(z).norm() < 1e-8 || ev.value(g.apply(z)).norm() < 1e-8 {
                continue;
            }
            let r = ev.character_ratio(&g, z);
            acc += r / r.norm();
            used += 1;
        }
        if used == 0 {
            return Err(Error::Numerical {
                iterations: zs.len(),
                message: "every probe landed on an orbit zero".into(),
            });
        }
        values.push(acc / acc.norm());
    }
    Ok(Character { values })
}
