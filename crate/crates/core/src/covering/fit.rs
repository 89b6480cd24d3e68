use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::blaschke::BlaschkeEvaluator;
use super::group::OrthocircleGroup;
use super::map::{golden_min, map_length_cap, CircleArc, CoveringMap, MAP_TAIL_TOL};
use crate::error::{Error, Result};
use crate::gapset::{Equilibrium, GapSet};

/// Stopping tolerance on the largest slit mismatch.
pub const FIT_TOL: f64 = 1e-12;
/// A fit ending above this is reported as a failure.
pub const FIT_ACCEPT: f64 = 1e-9;

/// Result of [`fit_circles`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleFit {
    pub group: OrthocircleGroup,
    /// Largest slit mismatch of `−log B` at the end.
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// Starting angles: each circle centred at `π` times the harmonic measure to
/// the right of its gap, with the Joukowski opening of the gap, shrunk where
/// neighbours would collide.
pub fn initial_angles(set: &GapSet, eq: &Equilibrium) -> Vec<(f64, f64)> {
    let ell = set.gap_count();
    let centers: Vec<f64> = (0..ell).map(|k| PI * eq.mass_right_of_gap(k)).collect();
    (0..ell)
        .map(|k| {
            let (lo, hi) = set.gaps()[k];
            let u = |x: f64| set.to_normalized(x).clamp(-1.0, 1.0);
            let mut delta = 0.5 * (u(lo).acos() - u(hi).acos());
            let mut room = centers[k].min(PI - centers[k]);
            if k > 0 {
                room = room.min(centers[k - 1] - centers[k]);
            }
            if k + 1 < ell {
                room = room.min(centers[k] - centers[k + 1]);
            }
            delta = delta.min(0.45 * room);
            (centers[k] - delta, centers[k] + delta)
        })
        .collect()
}

/// Slit mismatch of `−log B` along each `C_k^+`: the phase against
/// `π ρ_e([x, β_{ℓ+1}])` on the gap and the deepest point against `G(c_k)`.
pub fn slit_residuals(
    group: &OrthocircleGroup,
    eq: &Equilibrium,
    length: Option<usize>,
) -> Result<Vec<f64>> {
    let zero = Complex64::new(0.0, 0.0);
    match length {
        Some(l) => {
            let ev = BlaschkeEvaluator::new(group, zero, l)?;
            residuals_of(group, eq, &ev, &ev)
        }
        None => {
            let cap = map_length_cap(group);
            let ev = BlaschkeEvaluator::with_tolerance(group, zero, MAP_TAIL_TOL, cap)?;
            // |B| is flat at its minimum on the arc, so a rough product
            // places the deepest point well enough
            let rough = BlaschkeEvaluator::with_tolerance(group, zero, JACOBIAN_TAIL_TOL, cap)?;
            residuals_of(group, eq, &rough, &ev)
        }
    }
}

/// Tail tolerance of the products behind the finite-difference Jacobian.
const JACOBIAN_TAIL_TOL: f64 = 1e-9;

fn residuals_of(
    group: &OrthocircleGroup,
    eq: &Equilibrium,
    locate: &BlaschkeEvaluator,
    ev: &BlaschkeEvaluator,
) -> Result<Vec<f64>> {
    let heights = eq.gap_heights();
    let mut out = Vec::with_capacity(2 * group.rank());
    for (k, c) in group.circles().iter().enumerate() {
        let arc = CircleArc::new(c);
        let t = golden_min(&|t| locate.log_modulus(arc.point(t)), 0.0, 1.0);
        let p = arc.point(t);
        let b = ev.value(p);
        let mut phase = b.arg();
        if phase < -0.5 * PI {
            phase += 2.0 * PI;
        }
        out.push(phase - PI * eq.mass_right_of_gap(k));
        out.push(-b.norm().ln() - heights[k]);
    }
    Ok(out)
}

fn inf_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn pack(angles: &[(f64, f64)]) -> Vec<f64> {
    angles.iter().flat_map(|&(a, b)| [a, b]).collect()
}

fn unpack(v: &[f64]) -> Vec<(f64, f64)> {
    v.chunks(2).map(|c| (c[0], c[1])).collect()
}

/// Damped Gauss–Newton on the boundary angles.
pub fn fit_circles(
    set: &GapSet,
    eq: &Equilibrium,
    init: Option<&[(f64, f64)]>,
) -> Result<CircleFit> {
    let ell = set.gap_count();
    if ell == 0 {
        return Ok(CircleFit {
            group: OrthocircleGroup::new(&[])?,
            residual: 0.0,
            iterations: 0,
            history: Vec::new(),
        });
    }
    let start = match init {
        Some(a) => a.to_vec(),
        None => initial_angles(set, eq),
    };
    if start.len() != ell {
        return Err(Error::Argument(format!(
            "expected {ell} angle pairs, got {}",
            start.len()
        )));
    }
    let mut group = OrthocircleGroup::new(&start)?;
    let eval = |v: &[f64]| -> Option<Vec<f64>> {
        let g = OrthocircleGroup::new(&unpack(v)).ok()?;
        slit_residuals(&g, eq, None).ok()
    };
    let eval_rough = |v: &[f64]| -> Option<Vec<f64>> {
        let g = OrthocircleGroup::new(&unpack(v)).ok()?;
        let zero = Complex64::new(0.0, 0.0);
        let ev = BlaschkeEvaluator::with_tolerance(&g, zero, JACOBIAN_TAIL_TOL, map_length_cap(&g))
            .ok()?;
        residuals_of(&g, eq, &ev, &ev).ok()
    };
    let mut theta = pack(&start);
    let mut r =
        eval(&theta).ok_or_else(|| Error::Geometry("initial circles are invalid".into()))?;
    let mut history = vec![inf_norm(&r)];
    let n = theta.len();
    let mut iterations = 0;
    let mut stalls = 0;
    while iterations < 60 && inf_norm(&r) > FIT_TOL {
        iterations += 1;
        let h = 1e-7;
        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[i] += h;
            tm[i] -= h;
            let (rp, rm) = match (eval_rough(&tp), eval_rough(&tm)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Geometry("circles touch during the fit".into())),
            };
            for k in 0..n {
                jac[(k, i)] = (rp[k] - rm[k]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_vec(r.iter().map(|v| -v).collect());
        let step = jac
            .clone()
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::Numerical {
                iterations,
                message: e.to_string(),
            })?;
        let mut damp = 1.0;
        let mut accepted = false;
        while damp > 1e-4 {
            let trial: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(t, s)| t + damp * s)
                .collect();
            if let Some(rt) = eval(&trial) {
                if inf_norm(&rt) < inf_norm(&r) {
                    theta = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            damp *= 0.5;
        }
        history.push(inf_norm(&r));
        if !accepted {
            stalls += 1;
            if stalls >= 2 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    group = OrthocircleGroup::new(&unpack(&theta)).unwrap_or(group);
    let residual = inf_norm(&r);
    if residual > FIT_ACCEPT {
        return Err(Error::FitFailure { history });
    }
    Ok(CircleFit {
        group,
        residual,
        iterations,
        history,
    })
}

/// `Σ_j |x(γ_j^+(ζ_j)) − x(ζ_j)|²` over the given probe points, cycling
/// through the `2ℓ` generators.
pub fn automorphy_residual(map: &CoveringMap, probes: &[Complex64]) -> Result<f64> {
    let group = map.group();
    let ng = group.generator_count();
    if ng == 0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (i, &z) in probes.iter().enumerate() {
        let g = group.generator((i % ng) as u8);
        let d = map.forward(g.apply(z))? - map.forward(z)?;
        total += d.norm_sqr();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_two_band_fit() {
        let set = GapSet::new(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
        let eq = Equilibrium::new(&set, 64).unwrap();
        let fit = fit_circles(&set, &eq, None).unwrap();
        let (a, b) = fit.group.angles()[0];
        assert!((a + b - PI).abs() < 1e-6, "{a} {b}");
        let map = CoveringMap::new(&set, &eq, &fit.group).unwrap();
        let probes = super::super::blaschke::probes(&fit.group, 6);
        let res = automorphy_residual(&map, &probes).unwrap();
        assert!(res < 1e-8, "{res}");
        for &x in &[
            Complex64::new(0.3, -0.2),
            Complex64::new(-1.7, 0.4),
            Complex64::new(0.5, 0.0),
            Complex64::new(2.6, 0.0),
        ] {
            let z = map.inverse(x).unwrap();
            let back = map.forward(z).unwrap();
            assert!((back - x).norm() < 1e-8, "{x} -> {z} -> {back}");
        }
    }
}
