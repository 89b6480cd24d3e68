//! Condition functionals: Szegő-type integrals and eigenvalue sums.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Equilibrium, GapSet};
use crate::error::{Error, Result};
use crate::quad::{GaussLegendre, MAX_NODES};

/// An a.c. weight on the band interiors.
pub trait Density: Send + Sync {
    fn value(&self, x: f64) -> f64;

    fn ln_value(&self, x: f64) -> f64 {
        self.value(x).ln()
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> Density for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// A weight given through its logarithm, so that very small weights do
/// not underflow.
pub struct LogDensity<F>(pub F);

impl<F: Fn(f64) -> f64 + Send + Sync> Density for LogDensity<F> {
    fn value(&self, x: f64) -> f64 {
        (self.0)(x).exp()
    }
    fn ln_value(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// Value of a possibly divergent logarithmic integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SzegoValue {
    Finite(f64),
    NegInfinity,
}

impl SzegoValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, SzegoValue::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            SzegoValue::Finite(v) => Some(v),
            SzegoValue::NegInfinity => None,
        }
    }
}

/// Which endpoint weight multiplies `log w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SzegoWeight {
    /// `dist(x, R \ e)^s`.
    DistanceToComplement,
    /// `|R(x)|^s` with `R(x) = ∏ (x - e_k)`; for `[-2, 2]` and `s = -1/2`
    /// this is the classical `(4 - x²)^{-1/2}`.
    EndpointPolynomial,
}

/// `∫_e dist(x, R \ e)^s log w(x) dx` with `s ∈ {-1/2, +1/2}`.
pub fn szego_integral(
    set: &GapSet,
    eq: &Equilibrium,
    w: &dyn Density,
    exponent: f64,
) -> Result<SzegoValue> {
    szego_integral_with(set, eq, w, exponent, SzegoWeight::DistanceToComplement)
}

/// Same as [`szego_integral`] with an explicit choice of endpoint weight.
pub fn szego_integral_with(
    set: &GapSet,
    eq: &Equilibrium,
    w: &dyn Density,
    exponent: f64,
    weight: SzegoWeight,
) -> Result<SzegoValue> {
    if (exponent.abs() - 0.5).abs() > 1e-15 {
        return Err(Error::Argument(format!(
            "exponent must be ±1/2, got {exponent}"
        )));
    }
    if edge_divergence(set, w, exponent)? {
        return Ok(SzegoValue::NegInfinity);
    }
    let start = eq.order().clamp(16, 256);
    let mut history: Vec<f64> = Vec::new();
    let mut n = start;
    let mut shrinking = 0;
    loop {
        let v = match weight {
            SzegoWeight::DistanceToComplement => distance_rule(set, w, exponent, n)?,
            SzegoWeight::EndpointPolynomial => polynomial_rule(set, w, exponent, n)?,
        };
        if v == f64::NEG_INFINITY {
            return Ok(SzegoValue::NegInfinity);
        }
        if let Some(&prev) = history.last() {
            if v < 0.0 && v < 2.0 * prev && prev < 0.0 {
                shrinking += 1;
                if shrinking >= 3 {
                    return Ok(SzegoValue::NegInfinity);
                }
            } else {
                shrinking = 0;
            }
            let change = (v - prev).abs() / v.abs().max(1.0);
            if change < 1e-10 && shrinking == 0 {
                return Ok(SzegoValue::Finite(v));
            }
        }
        history.push(v);
        n *= 2;
        if n > MAX_NODES {
            let last = history[history.len() - 1];
            let prev = history[history.len() - 2];
            return Err(Error::Accuracy {
                context: "Szegő integral did not settle".into(),
                residual: (last - prev).abs(),
            });
        }
    }
}

/// `∫_e log f dρ_e` for a positive `f` on the bands.
pub fn log_integral(eq: &Equilibrium, f: &dyn Density) -> Result<SzegoValue> {
    if edge_divergence(eq.set(), f, -0.5)? {
        return Ok(SzegoValue::NegInfinity);
    }
    let at_order = |n: usize| -> Result<f64> {
        let (nodes, ends) = eq.graded_band_rule(n, EDGE_CUTOFF);
        let mut total = 0.0;
        for (i, (x, w)) in nodes.into_iter().enumerate() {
            total += w * log_w(f, x, i)?;
        }
        for e in ends {
            total += e.weight * edge_law(f, e.edge, e.dir, e.d0)?.integral(e.theta0, 0);
        }
        Ok(total)
    };
    let mut n = eq.order().clamp(32, 256);
    let mut prev = at_order(n)?;
    loop {
        n *= 2;
        let next = at_order(n)?;
        if next == f64::NEG_INFINITY {
            return Ok(SzegoValue::NegInfinity);
        }
        if (next - prev).abs() < 1e-12 * next.abs().max(1.0) {
            return Ok(SzegoValue::Finite(next));
        }
        if n >= MAX_NODES {
            return Err(Error::Accuracy {
                context: "logarithmic integral did not settle".into(),
                residual: (next - prev).abs(),
            });
        }
        prev = next;
    }
}

fn log_w(w: &dyn Density, x: f64, node: usize) -> Result<f64> {
    let v = w.ln_value(x);
    if v.is_nan() {
        return Err(Error::Domain {
            index: node,
            message: format!("weight is negative or undefined at x = {x}"),
        });
    }
    Ok(v)
}

/// Distance from a band edge below which nodes are replaced by the tail
/// model; below it `x - edge` carries too few significant digits.
pub(crate) const EDGE_CUTOFF: f64 = 1e-8;

// Model of `log w(edge + dir·d)` for `d ≤ d0`, fitted at `d0, 4d0, 16d0`:
// `A + B log d` when the successive differences agree, otherwise
// `A + C d^{-β}` (β < 0 for tails that flatten out at the edge).
pub(crate) enum EdgeLaw {
    Log {
        at_d0: f64,
        b: f64,
    },
    Power {
        a: f64,
        c_d0: f64,
        beta: f64,
        log: (f64, f64),
    },
}

fn edge_law(w: &dyn Density, edge: f64, dir: f64, d0: f64) -> Result<EdgeLaw> {
    let l0 = log_w(w, edge + dir * d0, 0)?;
    let l1 = log_w(w, edge + dir * 4.0 * d0, 0)?;
    let l2 = log_w(w, edge + dir * 16.0 * d0, 0)?;
    Ok(EdgeLaw::from_samples(l0, l1, l2))
}

impl EdgeLaw {
    /// Fit from values at `d0`, `4d0` and `16d0`.
    pub(crate) fn from_samples(l0: f64, l1: f64, l2: f64) -> EdgeLaw {
        let (d1, d2) = (l0 - l1, l1 - l2);
        let q = d1 / d2;
        let b = (l1 - l0) / 4f64.ln();
        if !(q.is_finite() && (q - 1.0).abs() > 1e-2 && q > 0.0) {
            return EdgeLaw::Log { at_d0: l0, b };
        }
        let beta = q.ln() / 4f64.ln();
        let c_d0 = d1 / (1.0 - 4f64.powf(-beta));
        EdgeLaw::Power {
            a: l0 - c_d0,
            c_d0,
            beta,
            log: (l0, b),
        }
    }

    /// `∫_0^{t0} t^k L(κ t²) dt` with `κ t0² = d0`. Divergence is decided
    /// elsewhere; a power fit too steep to integrate means the samples
    /// were not yet asymptotic, and the log model is used instead.
    pub(crate) fn integral(&self, t0: f64, k: i32) -> f64 {
        let k1 = (k + 1) as f64;
        let scale = t0.powi(k + 1);
        let log_law = |at_d0: f64, b: f64| scale / k1 * (at_d0 - 2.0 * b / k1);
        match *self {
            EdgeLaw::Log { at_d0, b } => log_law(at_d0, b),
            EdgeLaw::Power { a, c_d0, beta, log } => {
                if k1 - 2.0 * beta <= 0.1 {
                    log_law(log.0, log.1)
                } else {
                    scale * (a / k1 + c_d0 / (k1 - 2.0 * beta))
                }
            }
        }
    }
}

// `∫_e dist^s log w` is infinite when `log w` blows up like `d^{-(1+s)}` or
// faster at some edge; judged from the log–log slope of `|log w|` over
// `d ∈ [10⁻¹⁰, 10⁻⁶]` relative to the band length.
fn edge_divergence(set: &GapSet, w: &dyn Density, s_exp: f64) -> Result<bool> {
    for (a, b) in set.bands() {
        let len = b - a;
        for (edge, dir) in [(a, 1.0), (b, -1.0)] {
            let l6 = log_w(w, edge + dir * 1e-6 * len, 0)?.abs();
            let l10 = log_w(w, edge + dir * 1e-10 * len, 0)?.abs();
            if l10 == f64::INFINITY {
                return Ok(true);
            }
            if l6 > 0.0 && l10 > 0.0 {
                let slope = (l10 / l6).log10() / 4.0;
                if slope > 0.9 * (1.0 + s_exp) {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

// Each half band: x = edge ± s², which turns dist^{-1/2} dx into 2 ds.
fn distance_rule(set: &GapSet, w: &dyn Density, s_exp: f64, n: usize) -> Result<f64> {
    let rule = GaussLegendre::get(n);
    let mut total = 0.0;
    let mut node = 0;
    for (a, b) in set.bands() {
        let half = 0.5 * (b - a);
        let smax = half.sqrt();
        let d0 = EDGE_CUTOFF * half;
        let s0 = d0.sqrt();
        for (edge, dir) in [(a, 1.0), (b, -1.0)] {
            for (s, wt) in rule.graded(s0, smax, 3) {
                let x = edge + dir * s * s;
                let lw = log_w(w, x, node)?;
                node += 1;
                let factor = if s_exp < 0.0 { 2.0 } else { 2.0 * s * s };
                total += wt * factor * lw;
            }
            let law = edge_law(w, edge, dir, d0)?;
            total += 2.0 * law.integral(s0, if s_exp < 0.0 { 0 } else { 2 });
        }
    }
    Ok(total)
}

fn polynomial_rule(set: &GapSet, w: &dyn Density, s_exp: f64, n: usize) -> Result<f64> {
    let rule = GaussLegendre::get(n);
    let ends = set.endpoints();
    let mut total = 0.0;
    let mut node = 0;
    for (j, (a, b)) in set.bands().into_iter().enumerate() {
        let (m, hw) = (0.5 * (a + b), 0.5 * (b - a));
        let rest_at = |x: f64| -> f64 {
            ends.iter()
                .enumerate()
                .filter(|&(i, _)| i != 2 * j && i != 2 * j + 1)
                .map(|(_, e)| x - e)
                .product::<f64>()
                .abs()
        };
        // dx = hw sinθ dθ and |(x-a)(b-x)| = hw² sin²θ
        let factor = |th: f64, x: f64| -> f64 {
            if s_exp < 0.0 {
                1.0 / rest_at(x).sqrt()
            } else {
                let s = th.sin();
                hw * hw * s * s * rest_at(x).sqrt()
            }
        };
        // x = m + hw cosθ is within d0 of an edge for θ < θ0 or θ > π - θ0
        let d0 = EDGE_CUTOFF * hw;
        let th0 = (1.0 - d0 / hw).acos();
        for (th, wt) in rule.graded(th0, PI - th0, 3) {
            let x = m + hw * th.cos();
            let lw = log_w(w, x, node)?;
            node += 1;
            total += wt * factor(th, x) * lw;
        }
        // near an edge d ≈ hw θ²/2; the factor is constant (s = -1/2) or
        // proportional to θ² (s = +1/2) there
        for (edge, dir) in [(b, -1.0), (a, 1.0)] {
            let law = edge_law(w, edge, dir, d0)?;
            let f0 = factor(th0, edge + dir * d0);
            total += if s_exp < 0.0 {
                f0 * law.integral(th0, 0)
            } else {
                f0 / (th0 * th0) * law.integral(th0, 2)
            };
        }
    }
    Ok(total)
}

/// Eigenvalue sums entering the Szegő and Killip–Simon type conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueFunctionals {
    /// `Σ dist(E_j, e)^{1/2}`
    pub half_sum: f64,
    /// `Σ dist(E_j, e)^{3/2}`
    pub three_half_sum: f64,
    /// `∏ exp(-G_e(E_j))`
    pub green_product: f64,
}

pub fn eigenvalue_functionals(
    set: &GapSet,
    eq: &Equilibrium,
    eigenvalues: &[f64],
) -> Result<EigenvalueFunctionals> {
    let mut out = EigenvalueFunctionals {
        half_sum: 0.0,
        three_half_sum: 0.0,
        green_product: 1.0,
    };
    let mut log_prod = 0.0;
    for (i, &e) in eigenvalues.iter().enumerate() {
        let d = set.dist_to_set(e);
        if d <= 0.0 {
            return Err(Error::Domain {
                index: i,
                message: format!("eigenvalue {e} lies in the essential spectrum"),
            });
        }
        out.half_sum += d.sqrt();
        out.three_half_sum += d.powf(1.5);
        log_prod -= eq.green(e);
    }
    out.green_product = log_prod.exp();
    Ok(out)
}
