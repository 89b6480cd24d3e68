use std::f64::consts::PI;

use num_complex::Complex64;

use super::blaschke::BlaschkeEvaluator;
use super::group::{Orthocircle, OrthocircleGroup};
use crate::error::{Error, Result};
use crate::gapset::{Equilibrium, GapSet};
use crate::quad::segment_adaptive;

/// Remainder tolerance used to pick the word length for the map.
pub const MAP_TAIL_TOL: f64 = 1e-13;
/// Upper limit on the word length for the map.
pub const MAP_MAX_LENGTH: usize = 40;
/// Upper limit on the number of orbit points in the map's product.
pub const MAP_WORD_BUDGET: usize = 5000;

const NEWTON_TOL: f64 = 1e-13;
const MIN_STEP: f64 = 1e-10;

/// The covering map `x: 𝔻 → (ℂ \ e) ∪ {∞}` with `x(0) = ∞`, built from
/// `−log B(z) = 𝒢(x(z))`.
#[derive(Debug, Clone)]
pub struct CoveringMap {
    set: GapSet,
    eq: Equilibrium,
    group: OrthocircleGroup,
    blaschke: BlaschkeEvaluator,
    lambda: f64,
}

/// One point of a continuation path.
#[derive(Debug, Clone, Copy)]
struct Node {
    z: Complex64,
    b: Complex64,
    w: Complex64,
    x: Complex64,
}

impl CoveringMap {
    pub fn new(set: &GapSet, eq: &Equilibrium, group: &OrthocircleGroup) -> Result<CoveringMap> {
        let blaschke = BlaschkeEvaluator::with_tolerance(
            group,
            Complex64::new(0.0, 0.0),
            MAP_TAIL_TOL,
            map_length_cap(group),
        )?;
        CoveringMap::with_blaschke(set, eq, blaschke)
    }

    pub fn with_length(
        set: &GapSet,
        eq: &Equilibrium,
        group: &OrthocircleGroup,
        length: usize,
    ) -> Result<CoveringMap> {
        let blaschke = BlaschkeEvaluator::new(group, Complex64::new(0.0, 0.0), length)?;
        CoveringMap::with_blaschke(set, eq, blaschke)
    }

    fn with_blaschke(
        set: &GapSet,
        eq: &Equilibrium,
        blaschke: BlaschkeEvaluator,
    ) -> Result<CoveringMap> {
        let group = blaschke.group().clone();
        if group.rank() != set.gap_count() {
            return Err(Error::Argument(format!(
                "group has {} circles but the set has {} gaps",
                group.rank(),
                set.gap_count()
            )));
        }
        let lambda = eq.capacity() / blaschke.derivative_at_zero();
        Ok(CoveringMap {
            set: set.clone(),
            eq: eq.clone(),
            group,
            blaschke,
            lambda,
        })
    }

    pub fn set(&self) -> &GapSet {
        &self.set
    }

    pub fn equilibrium(&self) -> &Equilibrium {
        &self.eq
    }

    pub fn group(&self) -> &OrthocircleGroup {
        &self.group
    }

    pub fn blaschke(&self) -> &BlaschkeEvaluator {
        &self.blaschke
    }

    /// `lim_{z→0} z x(z)`.
    pub fn residue_at_zero(&self) -> f64 {
        self.lambda
    }

    /// `x(z)` for `z ∈ 𝔻` off the orbit of `0`.
    pub fn forward(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() < 1.0) {
            return Err(Error::Domain {
                index: 0,
                message: format!("{z} is not inside the unit disk"),
            });
        }
        if z.norm() == 0.0 {
            return Err(Error::Pole("x has its pole at z = 0".into()));
        }
        if z.im == 0.0 {
            return self.forward_real(z.re).map(|x| Complex64::new(x, 0.0));
        }
        let dir = z / z.norm();
        let r0 = 0.02f64.min(0.5 * z.norm());
        let start = self.start_node(dir * r0)?;
        let mut last_err = None;
        for bend in [0.0, 0.04, -0.04, 0.15, -0.15] {
            let path: Vec<Complex64> = if bend == 0.0 {
                vec![start.z, z]
            } else {
                let mid = Complex64::from_polar(0.5 * (r0 + z.norm()), z.arg() + bend);
                vec![start.z, mid, z]
            };
            match self.continue_along(start, &path) {
                Ok(node) => return Ok(node.x),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.unwrap())
    }

    /// `x'(z) = (−B'/B)(z) / 𝒢'(x(z))`.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let x = self.forward(z)?;
        Ok(-self.blaschke.log_derivative(z) / self.eq.green_derivative(x))
    }

    fn start_node(&self, z0: Complex64) -> Result<Node> {
        let b = self.blaschke.value(z0);
        let w = -b.ln();
        let mut x = self.lambda / z0;
        for it in 0..60 {
            let f = self.eq.complex_green(x) - w;
            let dx = f / self.eq.green_derivative(x);
            x -= dx;
            if dx.norm() <= NEWTON_TOL * x.norm().max(1.0) {
                return Ok(Node { z: z0, b, w, x });
            }
            if !x.re.is_finite() || it == 59 {
                break;
            }
        }
        Err(Error::Numerical {
            iterations: 60,
            message: format!("could not start the continuation at z = {z0}"),
        })
    }

    fn continue_along(&self, start: Node, path: &[Complex64]) -> Result<Node> {
        let mut node = start;
        for seg in path.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let len = (b - a).norm();
            let mut t = 0.0;
            let mut h = 0.02f64.min(1.0);
            while t < 1.0 {
                let step = h.min(1.0 - t);
                let zt = a + (b - a) * (t + step);
                match self.advance(&node, zt) {
                    Some(next) => {
                        log::trace!("continuation z = {:.6}, x = {:.6}", next.z, next.x);
                        node = next;
                        t += step;
                        h = (1.5 * step).min(0.05);
                    }
                    None => {
                        h = 0.5 * step;
                        if h * len < MIN_STEP {
                            return Err(Error::Numerical {
                                iterations: 0,
                                message: format!("continuation stalled near z = {}", node.z),
                            });
                        }
                    }
                }
            }
        }
        Ok(node)
    }

    fn advance(&self, node: &Node, z: Complex64) -> Option<Node> {
        let b = self.blaschke.value(z);
        if b.norm() == 0.0 {
            return None;
        }
        let dlog = (b / node.b).ln();
        if dlog.im.abs() > PI / 4.0 || dlog.re.abs() > 0.5 {
            return None;
        }
        let w = node.w - dlog;
        // stay inside a disk around the previous point that misses the set
        // and the critical points of 𝒢, so the segments below never wind
        // around a band or infinity; near a critical point two preimages of
        // w are close, so the step is also limited through x'(z)
        let crit = self
            .eq
            .critical_points()
            .iter()
            .map(|&c| (node.x - c).norm())
            .fold(f64::INFINITY, f64::min);
        let reach = 0.5 * self.dist_to_set(node.x).min(crit);
        let dxdz = -self.blaschke.log_derivative(node.z) / self.eq.green_derivative(node.x);
        let tangent = dxdz * (z - node.z);
        if tangent.norm() > 0.5 * reach {
            return None;
        }
        let mut x = node.x + tangent;
        let mut g = self.green_step(node.x, x, node.w)?;
        for _ in 0..40 {
            let f = g - w;
            if f.norm() <= NEWTON_TOL * w.norm().max(1.0) {
                return Some(Node { z, b, w, x });
            }
            let xn = x - f / self.eq.green_derivative(x);
            if (xn - node.x).norm() > reach
                || (xn - node.x - tangent).norm() > 0.5 * tangent.norm() + 1e-12
            {
                return None;
            }
            g = self.green_step(x, xn, g)?;
            x = xn;
        }
        None
    }

    /// Continue `𝒢` from `p` (where it equals `g`) to `q` along the
    /// segment, refusing segments that cross the set.
    fn green_step(&self, p: Complex64, q: Complex64, g: Complex64) -> Option<Complex64> {
        if self.crosses_set(p, q) {
            return None;
        }
        let f = |t: Complex64| self.eq.green_derivative(t);
        let scale = (q - p).norm() * self.eq.green_derivative(p).norm().max(1e-300);
        Some(g + segment_adaptive(&f, p, q, 1e-15 * scale.max(1e-300) + 1e-16))
    }

    fn dist_to_set(&self, x: Complex64) -> f64 {
        self.set
            .bands()
            .iter()
            .map(|&(a, b)| {
                let r = x.re.clamp(a, b);
                (x - r).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn crosses_set(&self, p: Complex64, q: Complex64) -> bool {
        if p.im * q.im > 0.0 {
            return false;
        }
        if p.im == q.im {
            // both real: must stay off the set
            return self.set.contains(p.re) || self.set.contains(q.re) || {
                let (lo, hi) = (p.re.min(q.re), p.re.max(q.re));
                self.set.bands().iter().any(|&(a, b)| a <= hi && b >= lo)
            };
        }
        let s = p.im / (p.im - q.im);
        let xr = p.re + s * (q.re - p.re);
        self.set.contains(xr)
    }

    fn forward_real(&self, t: f64) -> Result<f64> {
        // |B| is real and of fixed sign on each half of the diameter
        let target = -self.blaschke.log_modulus(Complex64::new(t, 0.0));
        let (edge, dir) = if t > 0.0 {
            (self.set.right(), 1.0)
        } else {
            (self.set.left(), -1.0)
        };
        let g = |x: f64| self.eq.green(x) - target;
        let mut lo = 0.0;
        let mut hi = self.set.diameter().max(1.0);
        while g(edge + dir * hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(edge + dir * mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.max(1.0) {
                break;
            }
        }
        // Newton polish: G'(x) = P/√R on the ray
        let mut d = 0.5 * (lo + hi);
        for _ in 0..3 {
            let x = edge + dir * d;
            let gp = self.eq.green_derivative(Complex64::new(x, 0.0)).re;
            let step = g(x) / (dir * gp);
            if !step.is_finite() || (d - step) <= 0.0 {
                break;
            }
            d -= step;
        }
        Ok(edge + dir * d)
    }

    /// The preimage of `x` in the closure of the fundamental domain.
    pub fn inverse(&self, x: Complex64) -> Result<Complex64> {
        if x.im == 0.0 {
            return self.inverse_real(x.re);
        }
        if x.im > 0.0 {
            return self.inverse(x.conj()).map(|z| z.conj());
        }
        let w = self.eq.complex_green(x);
        let shift = (5.0 - w.re).max(0.0);
        let ws = w + shift;
        let mut z = (-ws).exp() / self.blaschke.derivative_at_zero();
        let mut f = -self.blaschke.value(z).ln() - ws;
        for _ in 0..60 {
            let dz = f / (-self.blaschke.log_derivative(z));
            z -= dz;
            f = -self.blaschke.value(z).ln() - ws;
            if f.norm() < NEWTON_TOL * ws.norm().max(1.0) {
                break;
            }
        }
        // march Re w down to its target, tracking the branch of log B
        let mut b = self.blaschke.value(z);
        let mut cur = ws;
        let mut h = shift.min(0.25);
        while (cur - w).norm() > 0.0 {
            let step = h.min(cur.re - w.re);
            let target = if step >= cur.re - w.re { w } else { cur - step };
            let mut zc = z + (target - cur) / (-self.blaschke.log_derivative(z));
            let mut ok = false;
            let mut bc = b;
            let mut fc = Complex64::new(0.0, 0.0);
            for _ in 0..40 {
                if !(zc.norm() < 1.0) {
                    break;
                }
                let bn = self.blaschke.value(zc);
                let dl = (bn / bc).ln();
                if dl.im.abs() > PI / 4.0 {
                    break;
                }
                fc -= dl;
                bc = bn;
                // fc tracks −log B(zc) − (−log B(z))
                let res = cur + fc - target;
                if res.norm() < NEWTON_TOL * target.norm().max(1.0) {
                    ok = true;
                    break;
                }
                let dz = res / (-self.blaschke.log_derivative(zc));
                zc -= dz;
                if dz.norm() > 0.5 {
                    break;
                }
            }
            if ok {
                z = zc;
                b = bc;
                cur = target;
                h = (1.5 * step).min(1.0);
            } else {
                h *= 0.5;
                if h < 1e-12 {
                    return Err(Error::Numerical {
                        iterations: 0,
                        message: format!("inverse continuation stalled for x = {x}"),
                    });
                }
            }
        }
        Ok(z)
    }

    // Near the critical point of the Green function |B| is flat along the
    // arc and the bisection above only fixes t to about √ε; x itself is
    // monotone along the arc, so a bracket on Re x(z) sharpens it.
    fn polish_on_arc(&self, arc: &CircleArc, x: f64, t: f64) -> f64 {
        let g = |s: f64| self.forward(arc.point(s)).map(|v| v.re - x);
        let mut h = 1e-7;
        while h < 0.5 {
            let (a, b) = ((t - h).max(1e-12), (t + h).min(1.0 - 1e-12));
            match (g(a), g(b)) {
                (Ok(ga), Ok(gb)) if ga * gb <= 0.0 => {
                    if ga == 0.0 {
                        return a;
                    }
                    return bisect(&|s| g(s).unwrap_or(f64::NAN), a, b, gb > 0.0);
                }
                (Ok(_), Ok(_)) => h *= 4.0,
                _ => return t,
            }
        }
        t
    }

    fn inverse_real(&self, x: f64) -> Result<Complex64> {
        if self.set.contains(x) {
            return Err(Error::Domain {
                index: 0,
                message: format!("{x} lies on the set"),
            });
        }
        let target = self.eq.green(x);
        if x > self.set.right() || x < self.set.left() {
            let sign = if x > self.set.right() { 1.0 } else { -1.0 };
            let f = |t: f64| self.blaschke.log_modulus(Complex64::new(sign * t, 0.0)) + target;
            let t = bisect(&f, 1e-300_f64.max(0.0), 1.0 - 1e-16, true);
            return Ok(Complex64::new(sign * t, 0.0));
        }
        let k = self.set.gap_of(x).expect("off the set and inside the hull");
        let arc = CircleArc::new(&self.group.circles()[k]);
        let lm = |t: f64| self.blaschke.log_modulus(arc.point(t));
        let tmin = golden_min(&lm, 0.0, 1.0);
        let c = self.eq.critical_points()[k];
        let f = |t: f64| lm(t) + target;
        let t = if x >= c {
            bisect(&f, 0.0, tmin, false)
        } else {
            bisect(&f, tmin, 1.0, true)
        };
        Ok(arc.point(self.polish_on_arc(&arc, x, t)))
    }
}

/// Longest word length whose orbit fits in [`MAP_WORD_BUDGET`].
pub fn map_length_cap(group: &OrthocircleGroup) -> usize {
    let mut len = 1;
    while len < MAP_MAX_LENGTH && group.word_count(len + 1) <= MAP_WORD_BUDGET {
        len += 1;
    }
    len
}

/// The arc of an orthocircle `C_j^+` inside the disk, `t ∈ [0, 1]` running
/// from `e^{iθ_1}` to `e^{iθ_2}`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CircleArc {
    center: Complex64,
    radius: f64,
    psi0: f64,
    span: f64,
}

impl CircleArc {
    pub(crate) fn new(c: &Orthocircle) -> CircleArc {
        let center = c.center();
        let radius = c.radius();
        let psi0 = (Complex64::from_polar(1.0, c.theta1) - center).arg();
        let psi1 = (Complex64::from_polar(1.0, c.theta2) - center).arg();
        // the arc through the disk turns clockwise around the center
        let mut span = psi1 - psi0;
        let inward = (-center).arg();
        let mid = |s: f64| Complex64::from_polar(1.0, psi0 + 0.5 * s);
        if (mid(span) - Complex64::from_polar(1.0, inward)).norm() > 1.0 {
            span = if span > 0.0 {
                span - 2.0 * PI
            } else {
                span + 2.0 * PI
            };
        }
        CircleArc {
            center,
            radius,
            psi0,
            span,
        }
    }

    pub(crate) fn point(&self, t: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, self.psi0 + t * self.span)
    }
}

/// Root of `f` on `[a, b]`; `increasing` tells the sign pattern.
fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, increasing: bool) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let v = f(m);
        if (v < 0.0) == increasing {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 4.0 * f64::EPSILON * m.abs().max(1e-300) {
            break;
        }
    }
    0.5 * (a + b)
}

pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-11 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joukowski_for_one_band() {
        let set = GapSet::new(&[-2.0, 2.0]).unwrap();
        let eq = Equilibrium::new(&set, 64).unwrap();
        let g = OrthocircleGroup::new(&[]).unwrap();
        let map = CoveringMap::new(&set, &eq, &g).unwrap();
        let x = map.forward(Complex64::new(0.5, 0.0)).unwrap();
        assert!((x.re - 2.5).abs() < 1e-12, "{x}");
        let z = Complex64::new(0.3, 0.4);
        let x = map.forward(z).unwrap();
        assert!((x - (z + 1.0 / z)).norm() < 1e-10, "{x}");
        let z2 = Complex64::new(-0.6, -0.5);
        assert!((map.forward(z2).unwrap() - (z2 + 1.0 / z2)).norm() < 1e-10);
        let back = map.inverse(Complex64::new(2.5, 0.0)).unwrap();
        assert!((back - 0.5).norm() < 1e-12);
        let xi = Complex64::new(0.7, -1.3);
        let zi = map.inverse(xi).unwrap();
        assert!((zi + 1.0 / zi - xi).norm() < 1e-10);
        assert!(
            (map.blaschke().value(Complex64::new(0.5, 0.0)).re - (-eq.green(2.5)).exp()).abs()
                < 1e-12
        );
    }
}
