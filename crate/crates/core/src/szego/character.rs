use num_complex::Complex64;
use serde::Serialize;

use super::jost::{JostContext, JostData};
use crate::covering::{blaschke_character, probes, Character};
use crate::error::{Error, Result};
use crate::jacobi::JacobiOperator;
use crate::torus::{fit_periodic, TorusPoint};

/// Walk samples closer than this in phase are indistinguishable.
pub const RESOLUTION_TOL: f64 = 1e-6;
/// Phase distance at which a torus match is accepted.
pub const MATCH_TOL: f64 = 1e-4;

/// Largest `|arg(χ_1(γ_j) / χ_2(γ_j))|` over the generators.
pub fn phase_distance(a: &Character, b: &Character) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(u, v)| (u / v).arg().abs())
        .fold(0.0, f64::max)
}

/// `C_J(γ_j^+) = u(γ_j^+ z) / u(z)` at the given probes, normalized and
/// averaged.
pub fn character_with_probes(jd: &JostData, zs: &[Complex64]) -> Result<Character> {
    let group = jd.context().group();
    let mut values = Vec::with_capacity(group.rank());
    for j in 0..group.rank() {
        let g = group.generator(2 * j as u8);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut used = 0;
        for &z in zs {
            let (u, ug) = (jd.value(z), jd.value(g.apply(z)));
            if u.norm() < 1e-8 || ug.norm() < 1e-8 {
                continue;
            }
            let r = ug / u;
            acc += r / r.norm();
            used += 1;
        }
        if used == 0 {
            return Err(Error::Numerical {
                iterations: zs.len(),
                message: "every probe landed near a zero of u".into(),
            });
        }
        values.push(acc / acc.norm());
    }
    Ok(Character { values })
}

/// Character of `J` from its Jost function.
pub fn character_of_j(jd: &JostData) -> Result<Character> {
    character_with_probes(jd, &probes(jd.context().group(), 4))
}

/// Phase distance between `C_J` and `C_{J^{(n)}} · C_0^n`.
pub fn stripping_check(ctx: &JostContext, op: &JacobiOperator, n: usize) -> Result<f64> {
    let cj = character_of_j(&ctx.jost_data(op)?)?;
    let cn = character_of_j(&ctx.jost_data(&op.stripped(n))?)?;
    let c0 = blaschke_character(
        ctx.group(),
        Complex64::new(0.0, 0.0),
        ctx.map().blaschke().length(),
    )?;
    let mut rebuilt = cn;
    for _ in 0..n {
        rebuilt = rebuilt.product(&c0);
    }
    Ok(phase_distance(&cj, &rebuilt))
}

/// Characters of the walk samples.
pub fn walk_characters(ctx: &JostContext, walk: &[TorusPoint]) -> Result<Vec<Character>> {
    walk.iter()
        .map(|t| character_of_j(&ctx.jost_data(&t.operator())?))
        .collect()
}

/// Outcome of matching a character against the torus.
#[derive(Debug, Clone, Serialize)]
pub struct TorusMatch {
    pub point: TorusPoint,
    /// Index of the nearest walk sample.
    pub index: usize,
    pub distance: f64,
    /// Smallest phase distance between two walk samples.
    pub separation: f64,
    pub refined: bool,
}

/// The torus point whose character is `c`: the nearest walk sample, then
/// a golden-section search along the segment to its better neighbour,
/// projected back onto the torus.
pub fn match_torus_character(
    c: &Character,
    walk: &[TorusPoint],
    ctx: &JostContext,
) -> Result<TorusMatch> {
    if walk.is_empty() {
        return Err(Error::Argument("empty walk".into()));
    }
    let chars = walk_characters(ctx, walk)?;
    let mut separation = f64::INFINITY;
    for i in 0..chars.len() {
        for j in i + 1..chars.len() {
            let d = phase_distance(&chars[i], &chars[j]);
            if d < RESOLUTION_TOL {
                return Err(Error::Resolution(format!(
                    "walk samples {i} and {j} have the same character"
                )));
            }
            separation = separation.min(d);
        }
    }
    let dist: Vec<f64> = chars.iter().map(|x| phase_distance(c, x)).collect();
    let index = (0..dist.len())
        .min_by(|&i, &j| dist[i].total_cmp(&dist[j]))
        .unwrap();
    let mut out = TorusMatch {
        point: walk[index].clone(),
        index,
        distance: dist[index],
        separation,
        refined: false,
    };
    if out.distance < MATCH_TOL || walk.len() < 3 {
        return Ok(out);
    }
    // neighbours in parameter space
    let base = walk[index].params();
    let gap = |t: &TorusPoint| {
        t.params()
            .iter()
            .zip(&base)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    };
    let mut others: Vec<usize> = (0..walk.len()).filter(|&i| i != index).collect();
    others.sort_by(|&i, &j| gap(&walk[i]).total_cmp(&gap(&walk[j])));
    let nb = others[..2.min(others.len())]
        .iter()
        .copied()
        .min_by(|&i, &j| dist[i].total_cmp(&dist[j]))
        .unwrap();
    let target = walk[nb].params();
    let p = walk[index].period();
    let set = ctx.set();
    let eq = ctx.equilibrium();
    let at = |t: f64| -> Option<(TorusPoint, f64)> {
        let v: Vec<f64> = base
            .iter()
            .zip(&target)
            .map(|(a, b)| a + t * (b - a))
            .collect();
        let init = TorusPoint::new(v[..p].to_vec(), v[p..].to_vec()).ok()?;
        let fit = fit_periodic(set, eq, p, Some(&init), 0).ok()?;
        if !fit.converged {
            return None;
        }
        let ch = character_of_j(&ctx.jost_data(&fit.point.operator()).ok()?).ok()?;
        let d = phase_distance(c, &ch);
        Some((fit.point, d))
    };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let t1 = hi - phi * (hi - lo);
        let t2 = lo + phi * (hi - lo);
        let (Some(a), Some(b)) = (at(t1), at(t2)) else {
            break;
        };
        let best = if a.1 < b.1 { a.clone() } else { b.clone() };
        if best.1 < out.distance {
            out.point = best.0;
            out.distance = best.1;
            out.refined = true;
        }
        if out.distance < MATCH_TOL {
            break;
        }
        if a.1 < b.1 {
            hi = t2;
        } else {
            lo = t1;
        }
    }
    Ok(out)
}
