//! Endpoint matching for periodic parameters and continuation along the
//! isospectral torus.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{boundary_eigen, dirichlet_eigen, TorusPoint};
use crate::error::{Error, Result};
use crate::gapset::{Equilibrium, GapSet};

/// Tolerance for band masses to be multiples of `1/p`.
pub const RATIONAL_TOL: f64 = 1e-6;
/// Endpoint residual a fit or a walk point must reach.
pub const FIT_TOL: f64 = 1e-10;

/// Outcome of [`fit_periodic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicFit {
    pub point: TorusPoint,
    /// `max |λ_k - e_k|` over the sorted boundary eigenvalues.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
    pub history: Vec<f64>,
}

/// Sorted eigenvalues of both boundary problems and their gradients.
fn edges_with_grad(x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = x.len() / 2;
    let (a, b) = x.split_at(p);
    let (mut v, mut g) = boundary_eigen(a, b, 1.0);
    let (v2, g2) = boundary_eigen(a, b, -1.0);
    v.extend(v2);
    g.extend(g2);
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    (
        idx.iter().map(|&i| v[i]).collect(),
        idx.iter().map(|&i| g[i].clone()).collect(),
    )
}

/// Targets for the sorted eigenvalues: the points where `p ρ([x, β])` is
/// an integer, doubled inside bands (closed gaps).
fn endpoint_targets(set: &GapSet, eq: &Equilibrium, p: usize) -> Result<Vec<f64>> {
    let masses = eq.band_masses();
    let mut boundary_mass = Vec::new();
    let mut acc = 0.0;
    for j in (1..masses.len()).rev() {
        acc += masses[j];
        boundary_mass.push((acc, j - 1));
    }
    for (j, m) in masses.iter().enumerate() {
        let k = (m * p as f64).round();
        if k < 1.0 || (m * p as f64 - k).abs() > RATIONAL_TOL * p as f64 {
            return Err(Error::Unsupported(format!(
                "band {j} has harmonic measure {m:.9}, not a multiple of 1/{p}"
            )));
        }
    }
    let gaps = set.gaps();
    let mut t = vec![set.left(), set.right()];
    for k in 1..p {
        let target = k as f64 / p as f64;
        if let Some(&(_, g)) = boundary_mass
            .iter()
            .find(|(m, _)| (m - target).abs() < RATIONAL_TOL)
        {
            t.push(gaps[g].0);
            t.push(gaps[g].1);
        } else {
            let x = eq.inverse_cumulative(target);
            t.push(x);
            t.push(x);
        }
    }
    t.sort_by(f64::total_cmp);
    Ok(t)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn min_norm_step(jac: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let svd = jac.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(rhs, 1e-9 * smax).expect("both factors requested")
}

struct GnResult {
    x: Vec<f64>,
    residual: f64,
    iterations: usize,
    history: Vec<f64>,
}

fn gauss_newton(targets: &[f64], x0: Vec<f64>, max_iter: usize) -> GnResult {
    let n = x0.len();
    let p = n / 2;
    let resid = |x: &[f64]| -> Vec<f64> {
        let (v, _) = edges_with_grad(x);
        v.iter().zip(targets).map(|(a, b)| a - b).collect()
    };
    let mut x = x0;
    let mut f = resid(&x);
    let mut history = vec![max_abs(&f)];
    let mut it = 0;
    while it < max_iter && max_abs(&f) > 1e-13 {
        it += 1;
        let (_, g) = edges_with_grad(&x);
        let jac = DMatrix::from_fn(targets.len(), n, |i, j| g[i][j]);
        let step = min_norm_step(&jac, &DVector::from_vec(f.clone()));
        let norm0: f64 = f.iter().map(|v| v * v).sum();
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(xi, si)| xi - lambda * si)
                .collect();
            if trial[..p].iter().all(|&a| a > 0.0) {
                let ft = resid(&trial);
                if ft.iter().map(|v| v * v).sum::<f64>() < norm0 {
                    x = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        history.push(max_abs(&f));
        if !accepted {
            break;
        }
    }
    GnResult {
        residual: max_abs(&f),
        x,
        iterations: it,
        history,
    }
}

fn is_degenerate_start(x: &[f64], targets: &[f64]) -> bool {
    let (v, _) = edges_with_grad(x);
    let diam = targets[targets.len() - 1] - targets[0];
    (1..v.len()).any(|k| v[k] - v[k - 1] < 1e-6 * diam && targets[k] - targets[k - 1] > 1e-6 * diam)
}

/// Periodic parameters whose band edges are the set's endpoints.
///
/// Starts from `init` (or `a ≡ C(e)`, `b ≡` hull centre), then a tilted copy
/// of it, then seeded random starts, keeping the best.
pub fn fit_periodic(
    set: &GapSet,
    eq: &Equilibrium,
    p: usize,
    init: Option<&TorusPoint>,
    seed: u64,
) -> Result<PeriodicFit> {
    if p < set.gap_count() + 1 {
        return Err(Error::Argument(format!(
            "period {p} is too small for {} bands",
            set.band_count()
        )));
    }
    let targets = endpoint_targets(set, eq, p)?;
    let x0 = match init {
        Some(t) => {
            if t.period() != p {
                return Err(Error::Argument("initial point has the wrong period".into()));
            }
            t.params()
        }
        None => {
            let mut v = vec![eq.capacity(); p];
            v.extend(std::iter::repeat_n(set.center(), p));
            v
        }
    };
    let mut tilted = x0.clone();
    for n in 0..p {
        tilted[n] *= (0.25 * (std::f64::consts::TAU * n as f64 / p as f64 + 0.7).sin()).exp();
    }
    // a start with a spurious double eigenvalue sits where the eigenvalue
    // map is not differentiable; begin from the tilted copy instead
    let starts_smooth = !is_degenerate_start(&x0, &targets);
    let mut starts = if starts_smooth {
        vec![x0.clone(), tilted]
    } else {
        vec![tilted, x0.clone()]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..24 {
        let mut v = Vec::with_capacity(2 * p);
        for _ in 0..p {
            v.push(eq.capacity() * rng.gen_range(-0.5f64..0.5).exp());
        }
        for _ in 0..p {
            v.push(set.center() + set.half_width() * rng.gen_range(-0.3..0.3));
        }
        starts.push(v);
    }
    let mut best: Option<(GnResult, usize)> = None;
    let mut total_iter = 0;
    for (k, s) in starts.into_iter().enumerate() {
        let r = gauss_newton(&targets, s, 200);
        total_iter += r.iterations;
        let done = r.residual < FIT_TOL;
        if best.as_ref().is_none_or(|(b, _)| r.residual < b.residual) {
            best = Some((r, k));
        }
        if done {
            break;
        }
    }
    let (r, restarts) = best.expect("at least one start");
    Ok(PeriodicFit {
        point: TorusPoint::from_params(&r.x)?,
        residual: r.residual,
        converged: r.residual < FIT_TOL,
        iterations: total_iter,
        restarts,
        history: r.history,
    })
}

/// Knobs for [`torus_walk`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkOptions {
    pub initial_step: f64,
    pub max_step: f64,
    pub max_points: usize,
}

impl Default for WalkOptions {
    fn default() -> Self {
        WalkOptions {
            initial_step: 0.02,
            max_step: 0.1,
            max_points: 20_000,
        }
    }
}

// Constraints of cycle `j`: band edges fixed, and every Dirichlet value
// except the j-th fixed.
struct Cycle {
    targets: Vec<f64>,
    dirichlet: Vec<(usize, f64)>,
}

impl Cycle {
    fn eval(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let p = x.len() / 2;
        let (v, mut g) = edges_with_grad(x);
        let mut f: Vec<f64> = v.iter().zip(&self.targets).map(|(a, b)| a - b).collect();
        if !self.dirichlet.is_empty() {
            let (dv, dg) = dirichlet_eigen(&x[..p], &x[p..]);
            for &(i, mu) in &self.dirichlet {
                f.push(dv[i] - mu);
                g.push(dg[i].clone());
            }
        }
        (f, g)
    }

    fn jacobian(&self, g: &[Vec<f64>], n: usize, extra: Option<&[f64]>) -> DMatrix<f64> {
        let rows = g.len() + extra.is_some() as usize;
        DMatrix::from_fn(rows, n, |i, j| {
            if i < g.len() {
                g[i][j]
            } else {
                extra.unwrap()[j]
            }
        })
    }

    fn tangent(&self, x: &[f64], prev: Option<&[f64]>) -> Vec<f64> {
        let (_, g) = self.eval(x);
        let jac = self.jacobian(&g, x.len(), None);
        let svd = jac.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let k = (0..svd.singular_values.len())
            .min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))
            .unwrap();
        let mut t: Vec<f64> = vt.row(k).iter().copied().collect();
        if let Some(pv) = prev {
            if dot(&t, pv) < 0.0 {
                t.iter_mut().for_each(|v| *v = -*v);
            }
        }
        t
    }

    // Newton on the constraints plus the hyperplane `t · (x - anchor) = 0`.
    fn correct(&self, mut x: Vec<f64>, t: &[f64], anchor: &[f64]) -> Option<(Vec<f64>, usize)> {
        let p = x.len() / 2;
        for it in 1..=10 {
            let (mut f, g) = self.eval(&x);
            let plane: f64 = t
                .iter()
                .zip(x.iter().zip(anchor))
                .map(|(ti, (xi, ai))| ti * (xi - ai))
                .sum();
            f.push(plane);
            let jac = self.jacobian(&g, x.len(), Some(t));
            let step = min_norm_step(&jac, &DVector::from_vec(f.clone()));
            for (xi, si) in x.iter_mut().zip(step.iter()) {
                *xi -= si;
            }
            if x[..p].iter().any(|&a| !(a > 0.0)) {
                return None;
            }
            let snorm = step.norm();
            if snorm < 1e-13 {
                let (f, _) = self.eval(&x);
                return (max_abs(&f) < 1e-12).then_some((x, it));
            }
            if snorm > 0.5 || !snorm.is_finite() {
                return None;
            }
        }
        let (f, _) = self.eval(&x);
        (max_abs(&f) < 1e-12).then_some((x, 10))
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// `steps` points equally spaced in arclength around each of the `ℓ`
/// torus cycles through `t0` (cycle `j` moves the `j`-th Dirichlet value and
/// freezes the others). Returns just `t0` when there are no gaps.
pub fn torus_walk(t0: &TorusPoint, steps: usize, opts: WalkOptions) -> Result<Vec<TorusPoint>> {
    let p = t0.period();
    if p == 1 {
        return Ok(vec![t0.clone()]);
    }
    if steps == 0 {
        return Err(Error::Argument("steps must be positive".into()));
    }
    let targets = t0.band_edges();
    let diam = targets[2 * p - 1] - targets[0];
    for k in 0..p - 1 {
        if targets[2 * k + 2] - targets[2 * k + 1] < 1e-8 * diam {
            return Err(Error::Geometry(format!(
                "gap {k} is closed; the torus has lower dimension"
            )));
        }
    }
    let dir = t0.dirichlet();
    let x0 = t0.params();
    let mut out = Vec::with_capacity((p - 1) * steps);
    for j in 0..p - 1 {
        let cycle = Cycle {
            targets: targets.clone(),
            dirichlet: (0..p - 1)
                .filter(|&i| i != j)
                .map(|i| (i, dir[i]))
                .collect(),
        };
        let path = trace_loop(&cycle, &x0, opts)?;
        out.extend(resample(&cycle, &path, steps)?);
    }
    Ok(out)
}

fn trace_loop(cycle: &Cycle, x0: &[f64], opts: WalkOptions) -> Result<Vec<Vec<f64>>> {
    let mut path = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    let mut t = cycle.tangent(&x, None);
    let mut h = opts.initial_step;
    let mut travelled = 0.0;
    while path.len() < opts.max_points {
        // close the loop once the start is within reach along the tangent
        if travelled > 4.0 * h {
            let to_start: Vec<f64> = x0.iter().zip(&x).map(|(a, b)| a - b).collect();
            let along = dot(&to_start, &t);
            let d = dist(x0, &x);
            if along > 0.0 && along <= 1.5 * h && (d * d - along * along).max(0.0).sqrt() < 0.5 * h
            {
                path.push(x0.to_vec());
                return Ok(path);
            }
        }
        let pred: Vec<f64> = x.iter().zip(&t).map(|(xi, ti)| xi + h * ti).collect();
        match cycle.correct(pred.clone(), &t, &pred) {
            Some((xn, its)) => {
                travelled += dist(&xn, &x);
                let tn = cycle.tangent(&xn, Some(&t));
                // reject steps where the direction swings too far
                if dot(&tn, &t) < 0.9 && h > 1e-6 {
                    h *= 0.5;
                    continue;
                }
                x = xn;
                t = tn;
                path.push(x.clone());
                if its <= 3 {
                    h = (h * 1.3).min(opts.max_step);
                }
            }
            None => {
                h *= 0.5;
                if h < 1e-9 {
                    return Err(Error::Numerical {
                        iterations: path.len(),
                        message: "torus continuation step collapsed".into(),
                    });
                }
            }
        }
    }
    Err(Error::Numerical {
        iterations: path.len(),
        message: "torus cycle did not close".into(),
    })
}

fn resample(cycle: &Cycle, path: &[Vec<f64>], steps: usize) -> Result<Vec<TorusPoint>> {
    let mut s = vec![0.0];
    for w in path.windows(2) {
        s.push(s[s.len() - 1] + dist(&w[0], &w[1]));
    }
    let total = s[s.len() - 1];
    let mut out = Vec::with_capacity(steps);
    let mut seg = 0;
    for k in 0..steps {
        let target = total * k as f64 / steps as f64;
        while seg + 1 < s.len() - 1 && s[seg + 1] < target {
            seg += 1;
        }
        let (u, v) = (&path[seg], &path[seg + 1]);
        let len = s[seg + 1] - s[seg];
        let w = if len > 0.0 {
            (target - s[seg]) / len
        } else {
            0.0
        };
        let guess: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + w * (b - a)).collect();
        let x = if k == 0 {
            path[0].clone()
        } else {
            let t: Vec<f64> = u.iter().zip(v).map(|(a, b)| (b - a) / len).collect();
            cycle
                .correct(guess.clone(), &t, &guess)
                .map(|r| r.0)
                .ok_or_else(|| Error::Numerical {
                    iterations: k,
                    message: "resampled torus point failed to correct".into(),
                })?
        };
        let (f, _) = cycle.eval(&x);
        if max_abs(&f) >= FIT_TOL {
            return Err(Error::Accuracy {
                context: "torus walk point".into(),
                residual: max_abs(&f),
            });
        }
        out.push(TorusPoint::from_params(&x)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_band() -> (GapSet, Equilibrium) {
        let s = GapSet::new(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
        let e = Equilibrium::new(&s, 32).unwrap();
        (s, e)
    }

    #[test]
    fn free_fit() {
        let s = GapSet::interval(-2.0, 2.0).unwrap();
        let e = Equilibrium::new(&s, 32).unwrap();
        let f = fit_periodic(&s, &e, 1, None, 1).unwrap();
        assert!(f.converged);
        assert!((f.point.a()[0] - 1.0).abs() < 1e-12 && f.point.b()[0].abs() < 1e-12);
    }

    #[test]
    fn two_band_fit_from_symmetric_start() {
        let (s, e) = two_band();
        let init = TorusPoint::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let f = fit_periodic(&s, &e, 2, Some(&init), 7).unwrap();
        assert!(f.converged, "{f:?}");
        let mut a = f.point.a().to_vec();
        a.sort_by(f64::total_cmp);
        assert!(
            (a[0] - 0.5).abs() < 1e-9 && (a[1] - 1.5).abs() < 1e-9,
            "{f:?}"
        );
        assert!((f.point.product_a() - e.capacity().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn rejects_irrational_sets() {
        let s = GapSet::new(&[-2.0, -1.0, 0.5, 2.0]).unwrap();
        let e = Equilibrium::new(&s, 32).unwrap();
        assert!(matches!(
            fit_periodic(&s, &e, 2, None, 0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn walk_keeps_capacity() {
        let (_, e) = two_band();
        let t0 = TorusPoint::new(vec![1.5, 0.5], vec![0.0, 0.0]).unwrap();
        let walk = torus_walk(&t0, 16, WalkOptions::default()).unwrap();
        assert_eq!(walk.len(), 16);
        let c2 = e.capacity().powi(2);
        for (i, t) in walk.iter().enumerate() {
            assert!((t.product_a() - c2).abs() < 1e-8);
            for u in &walk[..i] {
                assert!(dist(&u.params(), &t.params()) > 1e-3);
            }
        }
        assert_eq!(walk[0], t0);
        assert!(
            torus_walk(&TorusPoint::free(), 16, WalkOptions::default())
                .unwrap()
                .len()
                == 1
        );
    }
}
