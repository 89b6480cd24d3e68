use crate::error::{Error, Result};
use crate::gapset::GapSet;
use crate::jacobi::{EigenvalueDetection, JacobiOperator, MFunction, SpectralMeasure};

/// Spectral measure of `J`: the a.c. density read off `Im m(x + i0)` and
/// the point masses at the poles of `m` off the set. The poles are checked
/// against the truncation filter.
pub fn operator_measure(op: &JacobiOperator, set: &GapSet) -> Result<SpectralMeasure> {
    let det = EigenvalueDetection::detect(op, set)?;
    let poles: Vec<f64> = det.by_poles.iter().map(|p| p.0).collect();
    let agree = poles.len() == det.by_truncation.len()
        && poles
            .iter()
            .zip(&det.by_truncation)
            .all(|(a, b)| (a - b).abs() < 1e-6);
    if !agree {
        return Err(Error::Diagnostic {
            message: "truncation filter and m-function poles disagree".into(),
            first: det.by_truncation,
            second: poles,
        });
    }
    let m = op.m_function();
    let s = set.clone();
    SpectralMeasure::new(set, move |x| edge_safe_density(&m, &s, x), det.by_poles)
}

// Closed-form m-functions refuse to evaluate within rounding of a band
// edge; there the density is continued by the power law fitted at two
// nearby points.
fn edge_safe_density(m: &MFunction, set: &GapSet, x: f64) -> f64 {
    if let Ok(v) = m.density(x) {
        return v;
    }
    let Some(j) = set.band_of(x) else {
        return 0.0;
    };
    let (a, b) = set.bands()[j];
    let (edge, dir) = if x - a < b - x { (a, 1.0) } else { (b, -1.0) };
    let d0 = 1e-9 * (b - a);
    let (Ok(w1), Ok(w2)) = (m.density(edge + dir * d0), m.density(edge + dir * 2.0 * d0)) else {
        return 0.0;
    };
    if w1 <= 0.0 || w2 <= 0.0 {
        return 0.0;
    }
    let alpha = (w2 / w1).log2();
    let d = (x - edge).abs();
    w1 * (d / d0).powf(alpha)
}
