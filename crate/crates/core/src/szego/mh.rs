use num_complex::Complex64;
use serde::Serialize;

use super::jost::{JostContext, JostData};
use crate::covering::BlaschkeEvaluator;
use crate::error::{Error, Result};
use crate::jacobi::{EigenvalueDetection, JacobiOperator, MFunction};

/// Radii used to test that `B_R` has settled.
const REFINE_RADII: [f64; 2] = [1.0 - 1e-5, 1.0 - 1e-6];

/// `M(z) = -m(x(z))` on the disk, with the real zeros and poles of `m`
/// off the set and their preimages in the fundamental domain.
#[derive(Debug, Clone)]
pub struct DiskMFunction {
    ctx: JostContext,
    operator: JacobiOperator,
    m: MFunction,
    zeros: Vec<(f64, Complex64)>,
    poles: Vec<(f64, Complex64)>,
    zero_factors: Vec<BlaschkeEvaluator>,
    pole_factors: Vec<BlaschkeEvaluator>,
}

impl DiskMFunction {
    pub fn new(ctx: &JostContext, op: &JacobiOperator) -> Result<DiskMFunction> {
        let m = op.m_function();
        if !m.is_algebraic() {
            return Err(Error::Unsupported(
                "zeros and poles are only located for closed-form m-functions".into(),
            ));
        }
        let map = ctx.map();
        let set = map.set();
        let poles_x: Vec<f64> = EigenvalueDetection::detect(op, set)?
            .by_poles
            .iter()
            .map(|p| p.0)
            .collect();
        let zeros_x = real_zeros(&m, set.endpoints(), &poles_x)?;
        let length = map.blaschke().length();
        let lift = |xs: &[f64]| -> Result<(Vec<(f64, Complex64)>, Vec<BlaschkeEvaluator>)> {
            let mut pts = Vec::new();
            let mut evs = Vec::new();
            for &x in xs {
                let p = map.inverse(Complex64::new(x, 0.0))?;
                pts.push((x, p));
                evs.push(BlaschkeEvaluator::new(map.group(), p, length)?);
            }
            Ok((pts, evs))
        };
        let (zeros, zero_factors) = lift(&zeros_x)?;
        let (poles, pole_factors) = lift(&poles_x)?;
        Ok(DiskMFunction {
            ctx: ctx.clone(),
            operator: op.clone(),
            m,
            zeros,
            poles,
            zero_factors,
            pole_factors,
        })
    }

    pub fn operator(&self) -> &JacobiOperator {
        &self.operator
    }

    /// Real zeros of `m` off the set and their preimages.
    pub fn zeros(&self) -> &[(f64, Complex64)] {
        &self.zeros
    }

    pub fn poles(&self) -> &[(f64, Complex64)] {
        &self.poles
    }

    pub fn value(&self, z: Complex64) -> Result<Complex64> {
        let x = self.ctx.map().forward(z)?;
        Ok(-self.m.value(x)?)
    }

    /// `|M|` on the circle, read through `x(e^{iθ})` on the set.
    pub fn boundary_modulus(&self, x: f64) -> Result<f64> {
        Ok(self.m.value_above(x)?.norm())
    }

    /// `B_R`: Blaschke products over the zeros over those over the poles,
    /// keeping only points with `|z_j| < R`.
    pub fn b_radius(&self, z: Complex64, radius: f64) -> Complex64 {
        let part = |pts: &[(f64, Complex64)], evs: &[BlaschkeEvaluator]| -> Complex64 {
            pts.iter()
                .zip(evs)
                .filter(|((_, p), _)| p.norm() < radius)
                .map(|(_, e)| e.value(z))
                .product()
        };
        part(&self.zeros, &self.zero_factors) / part(&self.poles, &self.pole_factors)
    }

    /// `lim M(z)/B(z)` at the origin, sampled at `|z| = 10⁻⁵`.
    pub fn origin_ratio(&self) -> Result<Complex64> {
        let z = Complex64::new(1e-5, 0.0);
        Ok(self.value(z)? / self.ctx.b(z))
    }

    /// `∫ |log|M(r e^{iθ})||^p dθ/2π` by the periodic trapezoid rule.
    pub fn log_modulus_norm(&self, r: f64, p: f64, samples: usize) -> Result<f64> {
        let mut total = 0.0;
        for k in 0..samples {
            let th = std::f64::consts::TAU * (k as f64 + 0.5) / samples as f64;
            let v = self.value(Complex64::from_polar(r, th))?;
            total += v.norm().ln().abs().powf(p);
        }
        Ok(total / samples as f64)
    }
}

// Between consecutive poles m is increasing on the real line, so each
// piece of each gap holds at most one zero; the same holds outside the
// hull, where m also tends to zero from the correct side.
fn real_zeros(m: &MFunction, ends: &[f64], poles: &[f64]) -> Result<Vec<f64>> {
    let diam = ends[ends.len() - 1] - ends[0];
    let mut intervals = vec![(ends[0] - 1e3 * diam.max(1.0), ends[0])];
    for k in (1..ends.len() - 1).step_by(2) {
        intervals.push((ends[k], ends[k + 1]));
    }
    intervals.push((
        ends[ends.len() - 1],
        ends[ends.len() - 1] + 1e3 * diam.max(1.0),
    ));
    let eps = 1e-9 * diam;
    let f = |x: f64| m.value(Complex64::new(x, 0.0)).map(|v| v.re);
    let mut out = Vec::new();
    for (lo, hi) in intervals {
        let mut cuts = vec![lo];
        cuts.extend(poles.iter().copied().filter(|&p| p > lo && p < hi));
        cuts.push(hi);
        for w in cuts.windows(2) {
            let (mut a, mut b) = (w[0] + eps, w[1] - eps);
            if b <= a {
                continue;
            }
            let (fa, fb) = match (f(a), f(b)) {
                (Ok(u), Ok(v)) if u.is_finite() && v.is_finite() => (u, v),
                _ => continue,
            };
            if fa >= 0.0 || fb <= 0.0 {
                continue;
            }
            for _ in 0..200 {
                let c = 0.5 * (a + b);
                if c == a || c == b {
                    break;
                }
                if f(c)? < 0.0 {
                    a = c;
                } else {
                    b = c;
                }
            }
            out.push(0.5 * (a + b));
        }
    }
    Ok(out)
}

/// Both sides of `a_1 M(z) = B(z) B_∞(z) exp(∫ K log|a_1 M| dθ/2π)` and
/// the stripping identities `a_{n+1} M_n = B u(J^{(n+1)}) / u(J^{(n)})`.
#[derive(Debug, Clone, Serialize)]
pub struct MhCheck {
    pub z: Complex64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub b_inf: Complex64,
    pub residual: f64,
    /// `|B_R - B_R'|` between the two largest refinement radii.
    pub b_inf_change: f64,
    /// Every detected zero and pole lies inside the radius.
    pub complete: bool,
    /// Residuals of the stripping identity for `n = 0, 1`.
    pub strip_residuals: Vec<f64>,
}

pub fn mh_representation_check(
    dm: &DiskMFunction,
    jd: &JostData,
    radius: f64,
    z: Complex64,
) -> Result<MhCheck> {
    let ctx = &dm.ctx;
    let op = &dm.operator;
    let a1 = op.a(1);
    let m_z = dm.value(z)?;
    if !m_z.is_finite() || m_z.norm() > 1e12 {
        return Err(Error::Pole(format!("M has a pole at the probe {z}")));
    }
    let lhs = m_z * a1;
    let complete = dm
        .zeros
        .iter()
        .chain(&dm.poles)
        .all(|(_, p)| p.norm() < radius);
    if !complete {
        log::warn!("radius {radius} leaves out some zeros or poles of M");
    }
    let b_inf = dm.b_radius(z, radius);
    let b_inf_change = (dm.b_radius(z, REFINE_RADII[1]) - dm.b_radius(z, REFINE_RADII[0])).norm();
    let g = ctx
        .rule()
        .sample(&|x| Ok((a1 * dm.boundary_modulus(x)?).ln()))?;
    let kernel = |zeta: Complex64| (zeta + z) / (zeta - z);
    let outer = ctx.rule().integrate_kernel_samples(&kernel, &g).exp();
    let rhs = ctx.b(z) * b_inf * outer;
    let x = ctx.map().forward(z)?;
    let mut strip_residuals = Vec::with_capacity(2);
    let mut prev = jd.clone();
    for n in 0..2 {
        if n > 0 {
            prev = ctx.jost_data(&op.stripped(n))?;
        }
        let next = ctx.jost_data(&op.stripped(n + 1))?;
        let left = -op.a(n + 1) * op.stripped(n).m_function().value(x)?;
        let right = ctx.b(z) * next.value(z) / prev.value(z);
        strip_residuals.push((left - right).norm());
    }
    Ok(MhCheck {
        z,
        lhs,
        rhs,
        b_inf,
        residual: (lhs - rhs).norm(),
        b_inf_change,
        complete,
        strip_residuals,
    })
}
