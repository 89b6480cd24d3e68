use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mobius::MobiusMap;
use crate::error::{Error, Result};

/// Default cap on the number of enumerated words.
pub const DEFAULT_WORD_CAP: usize = 2_000_000;

/// Orthocircle pair `C_j^±` given by the boundary angles of `C_j^+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orthocircle {
    pub theta1: f64,
    pub theta2: f64,
}

impl Orthocircle {
    pub fn center(&self) -> Complex64 {
        let (phi, delta) = self.mid_half();
        Complex64::from_polar(1.0 / delta.cos(), phi)
    }

    pub fn radius(&self) -> f64 {
        self.mid_half().1.tan()
    }

    fn mid_half(&self) -> (f64, f64) {
        (
            0.5 * (self.theta1 + self.theta2),
            0.5 * (self.theta2 - self.theta1),
        )
    }
}

/// Schottky-type group generated by reflections in `ℓ` orthocircles of the
/// upper half-disk followed by conjugation.
///
/// Circle `j` belongs to gap `j` (gaps numbered left to right), so the
/// circles run clockwise: circle 0 sits nearest to `-1`. Generator index
/// `2j` is `γ_j^+` and `2j + 1` is `γ_j^- = (γ_j^+)^{-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthocircleGroup {
    circles: Vec<Orthocircle>,
}

/// A reduced word together with its Möbius map. Letters are applied right
/// to left, so `letters.last()` acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub letters: Vec<u8>,
    pub map: MobiusMap,
}

impl Word {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn label(&self) -> String {
        if self.letters.is_empty() {
            return "e".into();
        }
        self.letters
            .iter()
            .map(|&s| format!("{}{}", if s % 2 == 0 { '+' } else { '-' }, s / 2 + 1))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[inline]
pub(crate) fn inverse_letter(s: u8) -> u8 {
    s ^ 1
}

impl OrthocircleGroup {
    /// Angle pairs in gap order; each pair must satisfy
    /// `0 < θ_1 < θ_2 < π` and circle `j + 1` must lie clockwise of circle `j`.
    pub fn new(angles: &[(f64, f64)]) -> Result<OrthocircleGroup> {
        let mut circles = Vec::with_capacity(angles.len());
        for (i, &(t1, t2)) in angles.iter().enumerate() {
            if !(t1.is_finite() && t2.is_finite() && 0.0 < t1 && t1 < t2 && t2 < PI) {
                return Err(Error::Validation {
                    index: i,
                    message: format!("angle pair ({t1}, {t2}) is not ordered inside (0, π)"),
                });
            }
            if i > 0 && t2 >= angles[i - 1].0 {
                return Err(Error::Geometry(format!(
                    "orthodisks {} and {} overlap",
                    i - 1,
                    i
                )));
            }
            circles.push(Orthocircle {
                theta1: t1,
                theta2: t2,
            });
        }
        Ok(OrthocircleGroup { circles })
    }

    pub fn circles(&self) -> &[Orthocircle] {
        &self.circles
    }

    pub fn angles(&self) -> Vec<(f64, f64)> {
        self.circles.iter().map(|c| (c.theta1, c.theta2)).collect()
    }

    pub fn rank(&self) -> usize {
        self.circles.len()
    }

    pub fn generator_count(&self) -> usize {
        2 * self.circles.len()
    }

    pub fn generator(&self, s: u8) -> MobiusMap {
        let c = &self.circles[(s / 2) as usize];
        let (center, r) = (c.center(), c.radius());
        let i = Complex64::i();
        let plus = MobiusMap {
            a: i * center / r,
            b: -i / r,
        };
        if s.is_multiple_of(2) {
            plus
        } else {
            plus.inverse()
        }
    }

    /// The orthodisk containing `γ_s[𝔽]`: `(center, radius, arc)` with the
    /// arc given counterclockwise.
    pub fn disk(&self, s: u8) -> (Complex64, f64, (f64, f64)) {
        let c = &self.circles[(s / 2) as usize];
        if s.is_multiple_of(2) {
            (c.center(), c.radius(), (c.theta1, c.theta2))
        } else {
            (c.center().conj(), c.radius(), (-c.theta2, -c.theta1))
        }
    }

    /// Whether `z` lies outside every closed orthodisk (the closure of the
    /// fundamental domain, intersected with the disk).
    pub fn in_fundamental_domain(&self, z: Complex64) -> bool {
        (0..self.generator_count() as u8).all(|s| {
            let (c, r, _) = self.disk(s);
            (z - c).norm() >= r * (1.0 - 1e-12)
        })
    }

    pub fn word_count(&self, max_len: usize) -> usize {
        let g = self.generator_count();
        if g == 0 {
            return 1;
        }
        let mut total = 1usize;
        let mut level = g;
        for _ in 0..max_len {
            total = total.saturating_add(level);
            level = level.saturating_mul(g - 1);
        }
        total
    }

    /// Reduced words of exact length `k` for `k = 0..=max_len`.
    pub fn words_by_length(&self, max_len: usize, cap: usize) -> Result<Vec<Vec<Word>>> {
        let requested = self.word_count(max_len);
        if requested > cap {
            return Err(Error::MemoryGuard { requested, cap });
        }
        let g = self.generator_count() as u8;
        let gens: Vec<MobiusMap> = (0..g).map(|s| self.generator(s)).collect();
        let mut levels = vec![vec![Word {
            letters: Vec::new(),
            map: MobiusMap::identity(),
        }]];
        for _ in 0..max_len {
            if g == 0 {
                levels.push(Vec::new());
                continue;
            }
            let prev = levels.last().unwrap();
            let mut next = Vec::with_capacity(prev.len() * (g as usize).saturating_sub(1).max(1));
            for w in prev {
                for s in 0..g {
                    if w.letters.last().is_some_and(|&t| t == inverse_letter(s)) {
                        continue;
                    }
                    let mut letters = w.letters.clone();
                    letters.push(s);
                    next.push(Word {
                        letters,
                        map: w.map.compose(&gens[s as usize]),
                    });
                }
            }
            levels.push(next);
        }
        Ok(levels)
    }

    /// All reduced words of length at most `max_len`, shortest first.
    pub fn enumerate_words(&self, max_len: usize) -> Result<Vec<Word>> {
        self.enumerate_words_capped(max_len, DEFAULT_WORD_CAP)
    }

    pub fn enumerate_words_capped(&self, max_len: usize, cap: usize) -> Result<Vec<Word>> {
        Ok(self
            .words_by_length(max_len, cap)?
            .into_iter()
            .flatten()
            .collect())
    }

    /// Evaluate a word given by its letters.
    pub fn word_map(&self, letters: &[u8]) -> MobiusMap {
        letters
            .iter()
            .fold(MobiusMap::identity(), |m, &s| m.compose(&self.generator(s)))
    }

    /// `Σ_{|γ|≤k} |γ'(z)|^t` and `Σ_{|γ|≤k} (1 - |γ(z)|)^t` for `k = 0..=L`.
    pub fn burnside_sum(&self, z: Complex64, t: f64, max_len: usize) -> Result<BurnsideSums> {
        let levels = self.words_by_length(max_len, DEFAULT_WORD_CAP)?;
        let mut derivative = Vec::with_capacity(levels.len());
        let mut distance = Vec::with_capacity(levels.len());
        let (mut sd, mut sr) = (0.0, 0.0);
        for level in &levels {
            for w in level {
                sd += w.map.derivative(z).norm().powf(t);
                sr += (1.0 - w.map.apply(z).norm()).powf(t);
            }
            derivative.push(sd);
            distance.push(sr);
        }
        Ok(BurnsideSums {
            derivative,
            distance,
        })
    }

    /// Arcs of `ℛ_m`: the boundary traces of the level-`m` image disks.
    pub fn rm_arcs(&self, m: usize) -> Result<Vec<(f64, f64)>> {
        if m == 0 {
            return Err(Error::Argument("m must be at least 1".into()));
        }
        let levels = self.words_by_length(m - 1, DEFAULT_WORD_CAP)?;
        let mut arcs = Vec::new();
        for w in &levels[m - 1] {
            for s in 0..self.generator_count() as u8 {
                if w.letters.last().is_some_and(|&t| t == inverse_letter(s)) {
                    continue;
                }
                let (_, _, (t1, t2)) = self.disk(s);
                let a = w.map.apply(Complex64::from_polar(1.0, t1));
                let b = w.map.apply(Complex64::from_polar(1.0, t2));
                // the chord gives tiny arcs without cancellation
                let len = 2.0 * (0.5 * (b - a).norm()).min(1.0).asin();
                let p = a.arg();
                arcs.push((p, p + len));
            }
        }
        arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for i in 0..arcs.len() {
            let next = if i + 1 < arcs.len() {
                arcs[i + 1].0
            } else {
                arcs.first().map_or(f64::INFINITY, |a| a.0 + 2.0 * PI)
            };
            if arcs.len() > 1 && arcs[i].1 > next + 1e-11 {
                return Err(Error::Geometry(format!(
                    "image arcs overlap near angle {:.6}",
                    arcs[i].1
                )));
            }
        }
        Ok(arcs)
    }

    /// `|ℛ_m|`, normalized so that the full circle has measure `2π`.
    pub fn rm_measure(&self, m: usize) -> Result<f64> {
        Ok(self.rm_arcs(m)?.iter().map(|(a, b)| b - a).sum())
    }

    /// Circles of the fundamental-domain picture up to level `m`, as CSV.
    pub fn geometry_csv(&self, m: usize) -> Result<String> {
        let mut out = String::from("level,word,center_re,center_im,radius\n");
        out.push_str("0,unit,0,0,1\n");
        if m == 0 {
            return Ok(out);
        }
        let levels = self.words_by_length(m - 1, DEFAULT_WORD_CAP)?;
        for (k, level) in levels.iter().enumerate() {
            for w in level {
                for s in 0..self.generator_count() as u8 {
                    if w.letters.last().is_some_and(|&t| t == inverse_letter(s)) {
                        continue;
                    }
                    let (c, r, _) = self.disk(s);
                    let (ic, ir) = w.map.image_circle(c, r);
                    let mut letters = w.letters.clone();
                    letters.push(s);
                    let label = Word {
                        letters,
                        map: MobiusMap::identity(),
                    }
                    .label();
                    out.push_str(&format!(
                        "{},{},{:.15e},{:.15e},{:.15e}\n",
                        k + 1,
                        label,
                        ic.re,
                        ic.im,
                        ir
                    ));
                }
            }
        }
        Ok(out)
    }
}

/// Partial Burnside sums, indexed by maximal word length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurnsideSums {
    pub derivative: Vec<f64>,
    pub distance: Vec<f64>,
}

impl BurnsideSums {
    /// Least-squares decay rate `q` of the increments over lengths `from..=to`.
    pub fn decay_rate(&self, from: usize, to: usize) -> Option<f64> {
        fit_log_slope(&self.derivative, from, to).map(f64::exp)
    }
}

/// Slope of `log(s_k - s_{k-1})` against `k`.
pub(crate) fn fit_log_slope(partial: &[f64], from: usize, to: usize) -> Option<f64> {
    let from = from.max(1);
    if to >= partial.len() || to <= from {
        return None;
    }
    let pts: Vec<(f64, f64)> = (from..=to)
        .map(|k| (k as f64, (partial[k] - partial[k - 1]).ln()))
        .collect();
    linear_fit(&pts).map(|(slope, _, _)| slope)
}

/// `(slope, intercept, r²)` of a least-squares line.
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 || pts.iter().any(|p| !p.1.is_finite()) {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Some((slope, my - slope * mx, r2))
}
