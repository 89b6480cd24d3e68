use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{sqrt_r_of, GapSet};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quad::{self, GaussLegendre};

/// Relative coefficient change at which order doubling stops.
const ORDER_TOL: f64 = 1e-12;

/// Equilibrium measure, capacity and complex Green's function of a gap set.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    set: GapSet,
    ends: Vec<f64>,
    /// Monic gap polynomial in normalized coordinates.
    p_norm: Poly,
    /// Monic gap polynomial in the original coordinate.
    p_x: Poly,
    log_capacity: f64,
    band_masses: Vec<f64>,
    critical_points: Vec<f64>,
    order: usize,
}

/// A band end left out of a graded band rule.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BandEnd {
    pub edge: f64,
    /// `+1` at a left edge, `-1` at a right edge.
    pub dir: f64,
    /// Angle at which the nodes stop.
    pub theta0: f64,
    /// Distance from the edge at `theta0`.
    pub d0: f64,
    /// `dρ/dθ` at `theta0`.
    pub weight: f64,
}

impl Equilibrium {
    /// Solve the gap-polynomial system and derive everything else from it.
    pub fn new(set: &GapSet, quad_order: usize) -> Result<Equilibrium> {
        if quad_order < 16 {
            return Err(Error::Argument(format!(
                "quad_order must be >= 16, got {quad_order}"
            )));
        }
        let ends = set.normalized_endpoints();
        let ell = set.gap_count();

        let mut order = quad_order;
        let mut coeffs = solve_gap_poly(&ends, ell, order)?;
        loop {
            let next = 2 * order;
            if next > quad::MAX_NODES {
                return Err(Error::Accuracy {
                    context: "gap polynomial quadrature".into(),
                    residual: f64::NAN,
                });
            }
            let refined = solve_gap_poly(&ends, ell, next)?;
            let change = coeffs
                .iter()
                .zip(&refined)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            coeffs = refined;
            order = next;
            if change < ORDER_TOL {
                break;
            }
        }

        let mut c = coeffs;
        c.push(1.0);
        let p_norm = Poly::new(c);
        let h = set.half_width();
        let p_x = p_norm
            .compose_affine(set.center(), h)
            .scale(h.powi(ell as i32));

        let mut eq = Equilibrium {
            set: set.clone(),
            ends,
            p_norm,
            p_x,
            log_capacity: 0.0,
            band_masses: Vec::new(),
            critical_points: Vec::new(),
            order,
        };
        eq.band_masses = (0..=ell).map(|j| eq.band_mass(j)).collect();
        eq.critical_points = (0..ell)
            .map(|k| eq.find_critical(k))
            .collect::<Result<_>>()?;
        eq.log_capacity = eq.compute_log_capacity_norm() + h.ln();
        Ok(eq)
    }

    pub fn set(&self) -> &GapSet {
        &self.set
    }

    /// Quadrature order reached by the adaptive doubling.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Monic gap polynomial `P` (degree `ℓ`) in the original coordinate.
    pub fn gap_polynomial(&self) -> &Poly {
        &self.p_x
    }

    pub fn capacity(&self) -> f64 {
        self.log_capacity.exp()
    }

    pub fn log_capacity(&self) -> f64 {
        self.log_capacity
    }

    /// Equilibrium masses of the bands, left to right.
    pub fn band_masses(&self) -> &[f64] {
        &self.band_masses
    }

    /// Equilibrium mass lying to the right of gap `k`.
    pub fn mass_right_of_gap(&self, k: usize) -> f64 {
        self.band_masses[k + 1..].iter().sum()
    }

    /// The zero of `P` inside each gap (where `G` is maximal on the gap).
    pub fn critical_points(&self) -> &[f64] {
        &self.critical_points
    }

    /// `max G` over each gap.
    pub fn gap_heights(&self) -> Vec<f64> {
        self.critical_points
            .iter()
            .map(|&c| self.green(c))
            .collect()
    }

    /// `ρ_e(x)` on band interiors, zero elsewhere.
    pub fn density(&self, x: f64) -> f64 {
        if !self.set.contains(x) {
            return 0.0;
        }
        let u = self.set.to_normalized(x);
        let r = self.ends.iter().map(|e| u - e).product::<f64>().abs();
        self.p_norm.eval(u).abs() / (PI * self.set.half_width() * r.sqrt())
    }

    /// `G_e(x)` for real `x` (zero on the set).
    pub fn green(&self, x: f64) -> f64 {
        self.green_norm(self.set.to_normalized(x))
    }

    /// Principal branch of `𝒢 = G + iG̃`, integrated from the right end of
    /// the set through the upper (or lower) half-plane. Real arguments off
    /// the set take the value approached from above.
    pub fn complex_green(&self, z: Complex64) -> Complex64 {
        let h = self.set.half_width();
        let u = (z - self.set.center()) / h;
        self.complex_green_norm(u)
    }

    /// `d𝒢/dx = P(x) / √R(x)` on the principal branch.
    pub fn green_derivative(&self, z: Complex64) -> Complex64 {
        let h = self.set.half_width();
        let u = (z - self.set.center()) / h;
        self.p_norm.eval_complex(u) / (sqrt_r_of(&self.ends, u) * h)
    }

    /// `ρ_e([x, β_{ℓ+1}])`.
    pub fn cumulative_from_right(&self, x: f64) -> f64 {
        let u = self.set.to_normalized(x);
        let nb = self.set.band_count();
        if u >= 1.0 {
            return 0.0;
        }
        if u <= -1.0 {
            return 1.0;
        }
        for j in (0..nb).rev() {
            let (a, b) = (self.ends[2 * j], self.ends[2 * j + 1]);
            let right: f64 = self.band_masses[j + 1..].iter().sum();
            if u >= b {
                return right;
            }
            if u >= a {
                let (m, hw) = (0.5 * (a + b), 0.5 * (b - a));
                let theta = ((u - m) / hw).clamp(-1.0, 1.0).acos();
                return right + self.band_partial(j, theta);
            }
        }
        1.0
    }

    /// The point `x ∈ e` with `ρ_e([x, β_{ℓ+1}]) = mass`.
    pub fn inverse_cumulative(&self, mass: f64) -> f64 {
        let mass = mass.clamp(0.0, 1.0);
        let nb = self.set.band_count();
        let mut right = 0.0;
        for j in (0..nb).rev() {
            let bm = self.band_masses[j];
            if mass <= right + bm || j == 0 {
                let target = (mass - right).clamp(0.0, bm);
                let theta = self.invert_band_partial(j, target);
                let (a, b) = (self.ends[2 * j], self.ends[2 * j + 1]);
                let u = 0.5 * (a + b) + 0.5 * (b - a) * theta.cos();
                return self.set.from_normalized(u);
            }
            right += bm;
        }
        self.set.left()
    }

    /// `∫ f dρ_e` by the cosine substitution on every band.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.integrate_with_order(self.order, &mut f)
    }

    pub(crate) fn integrate_with_order<F: FnMut(f64) -> f64>(
        &self,
        order: usize,
        f: &mut F,
    ) -> f64 {
        let rule = GaussLegendre::get(order);
        let mut total = 0.0;
        for j in 0..self.set.band_count() {
            let (a, b) = (self.ends[2 * j], self.ends[2 * j + 1]);
            let (m, hw) = (0.5 * (a + b), 0.5 * (b - a));
            total += rule.integrate(0.0, PI, |th| {
                let u = m + hw * th.cos();
                f(self.set.from_normalized(u)) * self.band_weight(j, u)
            });
        }
        total
    }

    /// Band nodes `(x, dρ weight)` with a graded rule in the angle, suited
    /// to integrands with logarithmic endpoint behaviour. Nodes stop where
    /// the distance to an edge falls to `rel_cut` of the band length; the
    /// ends left out are described by the returned [`BandEnd`]s.
    pub(crate) fn graded_band_rule(
        &self,
        order: usize,
        rel_cut: f64,
    ) -> (Vec<(f64, f64)>, Vec<BandEnd>) {
        let rule = GaussLegendre::get(order);
        let th0 = (1.0 - 2.0 * rel_cut).acos();
        let mut nodes = Vec::with_capacity(order * self.set.band_count());
        let mut ends = Vec::with_capacity(2 * self.set.band_count());
        for (j, (a, b)) in self.set.bands().into_iter().enumerate() {
            let (ua, ub) = (self.ends[2 * j], self.ends[2 * j + 1]);
            let (m, hw) = (0.5 * (ua + ub), 0.5 * (ub - ua));
            for (th, w) in rule.graded(th0, PI - th0, 3) {
                let u = m + hw * th.cos();
                nodes.push((self.set.from_normalized(u), w * self.band_weight(j, u)));
            }
            let d0 = rel_cut * (b - a);
            for (edge, dir, th) in [(b, -1.0, th0), (a, 1.0, PI - th0)] {
                ends.push(BandEnd {
                    edge,
                    dir,
                    theta0: th0,
                    d0,
                    weight: self.band_weight(j, m + hw * th.cos()),
                });
            }
        }
        (nodes, ends)
    }

    // dρ/dθ on band j at normalized position u.
    fn band_weight(&self, j: usize, u: f64) -> f64 {
        let rest = rest_product(&self.ends, &[2 * j, 2 * j + 1], u).abs();
        self.p_norm.eval(u).abs() / (PI * rest.sqrt())
    }

    fn band_mass(&self, j: usize) -> f64 {
        self.band_partial(j, PI)
    }

    // ρ-mass of band j between its right end (θ = 0) and angle θ.
    fn band_partial(&self, j: usize, theta: f64) -> f64 {
        let (a, b) = (self.ends[2 * j], self.ends[2 * j + 1]);
        let (m, hw) = (0.5 * (a + b), 0.5 * (b - a));
        let rule = GaussLegendre::get(self.order.min(256));
        rule.integrate(0.0, theta, |th| self.band_weight(j, m + hw * th.cos()))
    }

    fn invert_band_partial(&self, j: usize, target: f64) -> f64 {
        let (a, b) = (self.ends[2 * j], self.ends[2 * j + 1]);
        let (m, hw) = (0.5 * (a + b), 0.5 * (b - a));
        let total = self.band_masses[j];
        let (mut lo, mut hi) = (0.0, PI);
        let mut th = PI * target / total;
        for _ in 0..100 {
            let f = self.band_partial(j, th) - target;
            if f.abs() < 1e-15 {
                break;
            }
            if f > 0.0 {
                hi = th;
            } else {
                lo = th;
            }
            let d = self.band_weight(j, m + hw * th.cos());
            let mut next = th - f / d;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - th).abs() < 1e-15 {
                th = next;
                break;
            }
            th = next;
        }
        th
    }

    fn find_critical(&self, k: usize) -> Result<f64> {
        let (lo0, hi0) = (self.ends[2 * k + 1], self.ends[2 * k + 2]);
        let (mut lo, mut hi) = (lo0, hi0);
        let (flo, fhi) = (self.p_norm.eval(lo), self.p_norm.eval(hi));
        if flo * fhi > 0.0 {
            return Err(Error::Degenerate(format!(
                "gap polynomial has no zero in gap {k}"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.p_norm.eval(mid) * flo > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        Ok(self.set.from_normalized(0.5 * (lo + hi)))
    }

    fn green_norm(&self, u: f64) -> f64 {
        if u > 1.0 {
            return self.ray_green(u - 1.0, 1.0);
        }
        if u < -1.0 {
            return self.ray_green(-1.0 - u, -1.0);
        }
        for k in 0..self.set.gap_count() {
            let (lo, hi) = (self.ends[2 * k + 1], self.ends[2 * k + 2]);
            if u > lo && u < hi {
                let (m, hw) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                let th = ((u - m) / hw).clamp(-1.0, 1.0).acos();
                let rule = GaussLegendre::get(self.order.min(256));
                let f = |t: f64| {
                    let v = m + hw * t.cos();
                    self.p_norm.eval(v)
                        / rest_product(&self.ends, &[2 * k + 1, 2 * k + 2], v)
                            .abs()
                            .sqrt()
                };
                let val = if th > 0.5 * PI {
                    rule.integrate(th, PI, f)
                } else {
                    rule.integrate(0.0, th, f)
                };
                return val.abs();
            }
        }
        0.0
    }

    // G at distance d outside the outer endpoint `side` (±1).
    fn ray_green(&self, d: f64, side: f64) -> f64 {
        if d <= 2.0 {
            return self.ray_near(d, side);
        }
        let base = self.ray_near(2.0, side);
        let rule = GaussLegendre::get(self.order.min(256));
        let tail = rule.integrate(2.0 / d, 1.0, |v| {
            self.phi(side * (1.0 + 2.0 / v)) * 2.0 / (v * v)
        });
        base + tail + ((d + 2.0) / 4.0).ln()
    }

    fn ray_near(&self, d: f64, side: f64) -> f64 {
        let skip = if side > 0.0 { self.ends.len() - 1 } else { 0 };
        let rule = GaussLegendre::get(self.order.min(256));
        rule.integrate(0.0, d.sqrt(), |s| {
            let t = side * (1.0 + s * s);
            2.0 * self.p_norm.eval(t).abs() / rest_product(&self.ends, &[skip], t).abs().sqrt()
        })
    }

    // |P|/√|R| - 1/(|t| + 1) on the outer rays.
    fn phi(&self, t: f64) -> f64 {
        let r = self.ends.iter().map(|e| t - e).product::<f64>().abs();
        self.p_norm.eval(t).abs() / r.sqrt() - 1.0 / (t.abs() + 1.0)
    }

    fn compute_log_capacity_norm(&self) -> f64 {
        let rule = GaussLegendre::get(self.order.min(256));
        let tail = rule.integrate(0.0, 1.0, |v| {
            if v == 0.0 {
                0.0
            } else {
                self.phi(1.0 + 2.0 / v) * 2.0 / (v * v)
            }
        });
        4f64.ln() - self.ray_near(2.0, 1.0) - tail
    }

    fn complex_green_norm(&self, u: Complex64) -> Complex64 {
        if u.im == 0.0 {
            let re = self.green_norm(u.re);
            return Complex64::new(re, self.imag_on_axis(u.re));
        }
        let ends = &self.ends;
        let base = self.ray_near(2.0, 1.0);
        if u.norm() <= 4.0 {
            // up, across, then down to u, staying clear of the cut
            let f = |t: Complex64| self.p_norm.eval_complex(t) / sqrt_r_of(ends, t);
            let y0 = u.im.signum() * u.im.abs().max(1.0);
            let path = [
                Complex64::new(3.0, 0.0),
                Complex64::new(3.0, y0),
                Complex64::new(u.re, y0),
                u,
            ];
            let mut val = Complex64::new(base, 0.0);
            for w in path.windows(2) {
                if w[0] != w[1] {
                    val += quad::segment_adaptive(&f, w[0], w[1], 1e-14);
                }
            }
            return val;
        }
        let vz = 2.0 / (u - 1.0);
        let f = |v: Complex64| {
            let t = 1.0 + 2.0 / v;
            let phi = self.p_norm.eval_complex(t) / sqrt_r_of(ends, t) - 1.0 / (t + 1.0);
            phi * (-2.0 / (v * v))
        };
        let val = quad::segment_adaptive(&f, Complex64::new(1.0, 0.0), vz, 1e-14);
        Complex64::new(base, 0.0) + ((u + 1.0) / 4.0).ln() + val
    }

    // Im 𝒢 approached from the upper half-plane at a real normalized point.
    fn imag_on_axis(&self, u: f64) -> f64 {
        PI * self.cumulative_from_right(self.set.from_normalized(u))
    }
}

// ∏ (t - e_i) over the endpoints not listed in `skip`.
fn rest_product(ends: &[f64], skip: &[usize], t: f64) -> f64 {
    ends.iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, e)| t - e)
        .product()
}

fn solve_gap_poly(ends: &[f64], ell: usize, order: usize) -> Result<Vec<f64>> {
    if ell == 0 {
        return Ok(Vec::new());
    }
    let rule = GaussLegendre::get(order);
    let mut a = DMatrix::<f64>::zeros(ell, ell);
    let mut rhs = DVector::<f64>::zeros(ell);
    for k in 0..ell {
        let (lo, hi) = (ends[2 * k + 1], ends[2 * k + 2]);
        let (m, hw) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let mut moments = vec![0.0; ell + 1];
        for (th, w) in rule.mapped(0.0, PI) {
            let t = m + hw * th.cos();
            let base = w / rest_product(ends, &[2 * k + 1, 2 * k + 2], t).abs().sqrt();
            let mut tp = 1.0;
            for mom in moments.iter_mut() {
                *mom += base * tp;
                tp *= t;
            }
        }
        for i in 0..ell {
            a[(k, i)] = moments[i];
        }
        rhs[k] = -moments[ell];
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-14 * smax) {
        return Err(Error::Degenerate(format!(
            "gap-polynomial system is singular (condition {:.3e})",
            smax / smin
        )));
    }
    let sol = svd
        .solve(&rhs, 1e-300)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    Ok(sol.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_band() -> Equilibrium {
        Equilibrium::new(&GapSet::new(&[-2.0, -1.0, 1.0, 2.0]).unwrap(), 32).unwrap()
    }

    // G for the preimage of [-2, 2] under Δ(x) = (4x² - 10) / 3.
    fn two_band_green(z: Complex64) -> f64 {
        let d = (z * z * 4.0 - 10.0) / 3.0 * 0.5;
        let w = d + (d * d - 1.0).sqrt();
        0.5 * w.norm().max(1.0 / w.norm()).ln()
    }

    #[test]
    fn interval_oracles() {
        let eq = Equilibrium::new(&GapSet::interval(-2.0, 2.0).unwrap(), 16).unwrap();
        assert!((eq.capacity() - 1.0).abs() < 1e-12);
        assert!((eq.density(0.0) - 1.0 / (2.0 * PI)).abs() < 1e-14);
        assert!((eq.green(2.5) - 2f64.ln()).abs() < 1e-12);
        assert!((eq.green(-2.5) - 2f64.ln()).abs() < 1e-12);
        assert!((eq.green(40.0) - (20.0 + 399f64.sqrt()).ln()).abs() < 1e-12);
        assert_eq!(eq.green(1.0), 0.0);
    }

    #[test]
    fn symmetric_two_band_oracles() {
        let eq = two_band();
        let p = eq.gap_polynomial();
        assert!((p.eval(0.0)).abs() < 1e-13 && (p.eval(1.0) - 1.0).abs() < 1e-13);
        for m in eq.band_masses() {
            assert!((m - 0.5).abs() < 1e-13);
        }
        assert!((eq.capacity() - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!(eq.critical_points()[0].abs() < 1e-14);
        assert!((eq.gap_heights()[0] - 0.5 * 3f64.ln()).abs() < 1e-12);
        for x in [-7.0, -2.3, -0.9, -0.2, 0.6, 2.0001, 3.5, 11.0] {
            let g = two_band_green(Complex64::new(x, 0.0));
            assert!((eq.green(x) - g).abs() < 1e-11, "x = {x}");
        }
    }

    #[test]
    fn complex_green_matches_closed_form_and_real_axis() {
        let eq = two_band();
        for z in [
            Complex64::new(0.3, 0.2),
            Complex64::new(-1.5, 1e-3),
            Complex64::new(1.2, -0.7),
            Complex64::new(-6.0, 3.0),
            Complex64::new(0.0, 9.0),
        ] {
            let g = eq.complex_green(z);
            assert!((g.re - two_band_green(z)).abs() < 1e-11, "z = {z}");
        }
        for x in [-3.0, -0.5, 0.4, 2.6, 5.0] {
            let above = eq.complex_green(Complex64::new(x, 1e-10));
            let on = eq.complex_green(Complex64::new(x, 0.0));
            assert!((above - on).norm() < 1e-7, "x = {x}: {above} vs {on}");
        }
        // conjugate symmetry away from the axis
        let z = Complex64::new(0.7, 0.4);
        assert!((eq.complex_green(z.conj()) - eq.complex_green(z).conj()).norm() < 1e-12);
    }

    #[test]
    fn green_is_the_log_potential() {
        let set = GapSet::new(&[-1.3, -0.4, 0.1, 0.8, 1.5, 3.0]).unwrap();
        let eq = Equilibrium::new(&set, 32).unwrap();
        assert!((eq.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
        for x in [-2.0, -0.2, 1.2, 4.0] {
            let pot = eq.integrate(|t| (x - t).abs().ln());
            assert!(
                (pot - eq.log_capacity() - eq.green(x)).abs() < 1e-9,
                "x = {x}"
            );
        }
        let z = Complex64::new(0.5, 0.6);
        let pot = eq.integrate(|t| (z - t).norm().ln());
        assert!((pot - eq.log_capacity() - eq.complex_green(z).re).abs() < 1e-9);
    }

    #[test]
    fn derivative_and_cumulative() {
        let set = GapSet::new(&[-1.3, -0.4, 0.1, 0.8, 1.5, 3.0]).unwrap();
        let eq = Equilibrium::new(&set, 32).unwrap();
        let z = Complex64::new(0.2, 0.3);
        let h = 1e-5;
        let fd = (eq.complex_green(z + h) - eq.complex_green(z - h)) / (2.0 * h);
        assert!((fd - eq.green_derivative(z)).norm() < 1e-8);
        for m in [0.0, 0.1, 0.37, 0.5, 0.81, 1.0] {
            let x = eq.inverse_cumulative(m);
            assert!((eq.cumulative_from_right(x) - m).abs() < 1e-12, "m = {m}");
        }
        let total: f64 = eq.band_masses().iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
        // Im 𝒢 tracks the mass to the right along the upper edge
        let g = eq.complex_green(Complex64::new(1.2, 1e-12));
        assert!((g.im - PI * eq.mass_right_of_gap(1)).abs() < 1e-6);
        let g = eq.complex_green(Complex64::new(0.5, 1e-12));
        assert!((g.im - PI * eq.cumulative_from_right(0.5)).abs() < 1e-6);
    }
}
