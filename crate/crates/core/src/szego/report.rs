use serde::Serialize;

use super::spectral::operator_measure;
use crate::error::Result;
use crate::gapset::{
    eigenvalue_functionals, szego_integral, Density, Equilibrium, GapSet, SzegoValue,
};
use crate::jacobi::{JacobiOperator, Tail};
use crate::torus::TorusPoint;

/// Default number of coefficients used for the product condition.
pub const PRODUCT_HORIZON: usize = 200;

/// The four Szegő conditions for one operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SzegoReport {
    /// Essential spectrum equals the set.
    pub ess_spec_ok: bool,
    /// `Σ dist(E_j, e)^{1/2}`.
    pub half_sum: f64,
    /// `∫ dist(x, R \ e)^{-1/2} log w dx`.
    pub szego_integral: SzegoValue,
    /// `max a_1…a_n / C^n` over the second half of the horizon; `None`
    /// when no coefficients are supplied.
    pub product_ratio_limsup: Option<f64>,
    /// `min a_1…a_n / C^n` over the same range.
    pub product_ratio_liminf: Option<f64>,
    pub is_szego: bool,
}

/// Does the background tail have essential spectrum `set`?
pub fn tail_matches(tail: &Tail, set: &GapSet) -> Result<bool> {
    let edges: Vec<f64> = match tail {
        Tail::Free => vec![-2.0, 2.0],
        Tail::Periodic { a, b } => {
            let t = TorusPoint::new(a.clone(), b.clone())?;
            match t.gapset() {
                Ok(g) => g.endpoints().to_vec(),
                // a closed gap: compare against the raw band edges
                Err(_) => t.band_edges(),
            }
        }
    };
    let tol = 1e-8 * set.diameter();
    Ok(edges.len() == set.endpoints().len()
        && edges
            .iter()
            .zip(set.endpoints())
            .all(|(a, b)| (a - b).abs() < tol))
}

pub fn szego_class_report(
    op: &JacobiOperator,
    set: &GapSet,
    eq: &Equilibrium,
) -> Result<SzegoReport> {
    let ess_spec_ok = tail_matches(op.tail(), set)?;
    let measure = operator_measure(op, set)?;
    let eigen: Vec<f64> = measure.points().iter().map(|p| p.0).collect();
    let a: Vec<f64> = (1..=PRODUCT_HORIZON).map(|n| op.a(n)).collect();
    let w = |x: f64| measure.density(x);
    let mut r = szego_report_from_parts(set, eq, &w, &eigen, Some(&a))?;
    r.ess_spec_ok = ess_spec_ok;
    r.is_szego &= ess_spec_ok;
    Ok(r)
}

/// The report from a weight, eigenvalues and (optionally) coefficients,
/// for measures that do not come with a Jacobi operator.
pub fn szego_report_from_parts(
    set: &GapSet,
    eq: &Equilibrium,
    w: &dyn Density,
    eigenvalues: &[f64],
    a: Option<&[f64]>,
) -> Result<SzegoReport> {
    let f = eigenvalue_functionals(set, eq, eigenvalues)?;
    let integral = szego_integral(set, eq, w, -0.5)?;
    let (sup, inf) = match a {
        Some(a) if !a.is_empty() => {
            let lc = eq.log_capacity();
            let mut log_ratio = 0.0;
            let mut seq = Vec::with_capacity(a.len());
            for &an in a {
                log_ratio += an.ln() - lc;
                seq.push(log_ratio.exp());
            }
            let tail = &seq[seq.len() / 2..];
            (
                Some(tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
                Some(tail.iter().cloned().fold(f64::INFINITY, f64::min)),
            )
        }
        _ => (None, None),
    };
    let product_ok = match (sup, inf) {
        (Some(s), Some(i)) => s.is_finite() && i > 0.0,
        _ => true,
    };
    let is_szego = f.half_sum.is_finite() && integral.is_finite() && product_ok;
    Ok(SzegoReport {
        ess_spec_ok: true,
        half_sum: f.half_sum,
        szego_integral: integral,
        product_ratio_limsup: sup,
        product_ratio_liminf: inf,
        is_szego,
    })
}
