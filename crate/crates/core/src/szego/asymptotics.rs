use num_complex::Complex64;
use serde::Serialize;

use super::jost::jost_u0;
use super::spectral::operator_measure;
use crate::error::{Error, Result};
use crate::gapset::{Equilibrium, GapSet};
use crate::jacobi::{orthonormal_log_sequence, JacobiOperator};

/// `a_1…a_n / a_1^∞…a_n^∞` against `u(0; J_∞) / u(0; J)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticRatio {
    /// Entry `n - 1` holds the ratio of the first `n` products.
    pub ratio_sequence: Vec<f64>,
    pub predicted: f64,
    pub u0: f64,
    pub u0_limit: f64,
}

impl AsymptoticRatio {
    /// Largest deviation from the prediction once the head has passed.
    pub fn settled_error(&self, head_len: usize) -> f64 {
        self.ratio_sequence
            .iter()
            .skip(head_len.saturating_sub(1))
            .map(|r| (r - self.predicted).abs())
            .fold(0.0, f64::max)
    }
}

pub fn asymptotic_ratio(
    op: &JacobiOperator,
    limit: &JacobiOperator,
    set: &GapSet,
    eq: &Equilibrium,
    horizon: usize,
) -> Result<AsymptoticRatio> {
    if horizon == 0 {
        return Err(Error::Argument("horizon must be positive".into()));
    }
    let u0 = jost_u0(set, eq, &operator_measure(op, set)?)?;
    let u0_limit = jost_u0(set, eq, &operator_measure(limit, set)?)?;
    let mut log_r = 0.0;
    let ratio_sequence = (1..=horizon)
        .map(|n| {
            log_r += op.a(n).ln() - limit.a(n).ln();
            log_r.exp()
        })
        .collect();
    Ok(AsymptoticRatio {
        ratio_sequence,
        predicted: u0_limit / u0,
        u0,
        u0_limit,
    })
}

/// `p_n(x; J) / p_n(x; J_∞)` for `n ≤ horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PnRatio {
    pub ratios: Vec<Complex64>,
    /// `max_{n ≥ horizon/2} |r_n - r_horizon|`.
    pub cauchy_tail: f64,
}

pub fn pn_ratio(
    op: &JacobiOperator,
    limit: &JacobiOperator,
    x: Complex64,
    horizon: usize,
) -> Result<PnRatio> {
    if horizon < 2 {
        return Err(Error::Argument("horizon must be at least 2".into()));
    }
    let p = orthonormal_log_sequence(op, horizon, x);
    let q = orthonormal_log_sequence(limit, horizon, x);
    let mut ratios = Vec::with_capacity(horizon + 1);
    for (n, ((pm, ps), (qm, qs))) in p.into_iter().zip(q).enumerate() {
        if qm.norm() == 0.0 {
            return Err(Error::Pole(format!("p_{n}(x; J_∞) vanishes at {x}")));
        }
        ratios.push(pm / qm * (ps - qs).exp());
    }
    let last = ratios[horizon];
    let cauchy_tail = ratios[horizon / 2..]
        .iter()
        .map(|r| (r - last).norm())
        .fold(0.0, f64::max);
    Ok(PnRatio {
        ratios,
        cauchy_tail,
    })
}
