use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::group::{Word, DEFAULT_WORD_CAP};
use super::map::CoveringMap;
use crate::error::{Error, Result};
use crate::gapset::{EdgeLaw, EDGE_CUTOFF};
use crate::quad::{GaussLegendre, MAX_NODES};

/// An arc of `∂𝔽 ∩ ∂𝔻`, counterclockwise from `phi0` to `phi1`, which the
/// covering map sends onto band `band`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeArc {
    pub band: usize,
    pub phi0: f64,
    pub phi1: f64,
}

/// Free arcs of the fundamental domain, upper half first.
pub fn free_arcs(map: &CoveringMap) -> Vec<FreeArc> {
    let circles = map.group().circles();
    let ell = circles.len();
    let mut upper = Vec::with_capacity(ell + 1);
    for j in 0..=ell {
        let hi = if j == 0 { PI } else { circles[j - 1].theta1 };
        let lo = if j == ell { 0.0 } else { circles[j].theta2 };
        upper.push(FreeArc {
            band: j,
            phi0: lo,
            phi1: hi,
        });
    }
    let lower: Vec<FreeArc> = upper
        .iter()
        .map(|a| FreeArc {
            band: a.band,
            phi0: -a.phi1,
            phi1: -a.phi0,
        })
        .collect();
    upper.into_iter().chain(lower).collect()
}

/// `x(e^{iφ})` on a free arc: the point of the set whose harmonic measure
/// to the right equals `arg B(e^{iφ}) / π`.
pub fn boundary_value(map: &CoveringMap, phi: f64) -> Result<f64> {
    let zeta = Complex64::from_polar(1.0, phi.abs());
    if !map.group().in_fundamental_domain(zeta) {
        return Err(Error::Domain {
            index: 0,
            message: format!("e^(i{phi}) is not on a free arc of the fundamental domain"),
        });
    }
    let b = map.blaschke().value(zeta);
    let mut phase = b.arg();
    if phase < -0.5 * PI {
        phase += TAU;
    }
    Ok(map.equilibrium().inverse_cumulative(phase / PI))
}

/// One quadrature node on a free arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryNode {
    pub zeta: Complex64,
    pub x: f64,
    pub band: usize,
    /// `dφ / 2π` weight of the node.
    pub weight: f64,
    /// `Σ_{|γ|≤L} |γ'(ζ)|`: the share of `∂𝔻` that the images of the
    /// node's neighbourhood cover.
    pub image_weight: f64,
}

/// The end of a free arc left out of the node set: within `delta` of the
/// arc end the boundary value lies within `d0` of a band edge, too close for
/// `x - edge` to keep its digits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcEnd {
    /// Midpoint of the left-out piece.
    pub zeta: Complex64,
    pub edge: f64,
    /// `+1` when the boundary values approach the edge from the right.
    pub dir: f64,
    pub delta: f64,
    pub d0: f64,
    pub image_weight: f64,
}

/// A function of `x` sampled for a [`BoundaryRule`]: values at the nodes
/// and the integrals `∫ g dφ/2π` over the arc ends.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySamples {
    pub nodes: Vec<f64>,
    pub ends: Vec<f64>,
}

/// Quadrature for `∫_{∂𝔻} F(e^{iθ}) dθ/2π` built from the free arcs and
/// their images under words of length `≤ L`.
#[derive(Debug, Clone)]
pub struct BoundaryRule {
    nodes: Vec<BoundaryNode>,
    ends: Vec<ArcEnd>,
    words: Vec<Word>,
    length: usize,
    excluded: f64,
}

impl BoundaryRule {
    pub fn new(map: &CoveringMap, length: usize, nodes_per_arc: usize) -> Result<BoundaryRule> {
        let words = map
            .group()
            .enumerate_words_capped(length, DEFAULT_WORD_CAP)?;
        let rule = GaussLegendre::get(nodes_per_arc);
        let image_weight =
            |zeta: Complex64| -> f64 { words.iter().map(|g| g.map.derivative(zeta).norm()).sum() };
        let bands = map.set().bands();
        let mut nodes = Vec::new();
        let mut ends = Vec::new();
        for arc in free_arcs(map) {
            let (a, b) = bands[arc.band];
            let d_target = EDGE_CUTOFF * (b - a);
            let mut cut = [0.0; 2];
            for (k, (phi_end, inward)) in
                [(arc.phi0, 1.0), (arc.phi1, -1.0)].into_iter().enumerate()
            {
                // x - edge grows quadratically away from the arc end
                let probe = 1e-3 * (arc.phi1 - arc.phi0);
                let x1 = boundary_value(map, phi_end + inward * probe)?;
                let (edge, dir) = if x1 - a < b - x1 { (a, 1.0) } else { (b, -1.0) };
                let kappa = (x1 - edge).abs() / (probe * probe);
                let delta = (d_target / kappa).sqrt();
                let x0 = boundary_value(map, phi_end + inward * delta)?;
                // kernels are read at the middle of the left-out piece
                let zeta = Complex64::from_polar(1.0, phi_end + 0.5 * inward * delta);
                ends.push(ArcEnd {
                    zeta,
                    edge,
                    dir,
                    delta,
                    d0: (x0 - edge).abs(),
                    image_weight: image_weight(zeta),
                });
                cut[k] = delta;
            }
            // graded so that log singularities of integrands at the band
            // edges (the arc ends) are resolved
            for (phi, w) in rule.graded(arc.phi0 + cut[0], arc.phi1 - cut[1], 3) {
                let zeta = Complex64::from_polar(1.0, phi);
                let x = boundary_value(map, phi)?;
                nodes.push(BoundaryNode {
                    zeta,
                    x,
                    band: arc.band,
                    weight: w / TAU,
                    image_weight: image_weight(zeta),
                });
            }
        }
        let excluded = if map.group().rank() == 0 {
            0.0
        } else {
            map.group().rm_measure(length + 1)? / TAU
        };
        Ok(BoundaryRule {
            nodes,
            ends,
            words,
            length,
            excluded,
        })
    }

    pub fn nodes(&self) -> &[BoundaryNode] {
        &self.nodes
    }

    pub fn ends(&self) -> &[ArcEnd] {
        &self.ends
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// `|ℛ_{L+1}| / 2π`: the part of the circle left out.
    pub fn excluded_mass(&self) -> f64 {
        self.excluded
    }

    /// Sample `g` at the nodes, and integrate the model of `g` near each
    /// band edge over the arc ends. `g` is read at `d0`, `4d0`, `16d0` from
    /// the edge there.
    pub fn sample(&self, g: &dyn Fn(f64) -> Result<f64>) -> Result<BoundarySamples> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| g(n.x))
            .collect::<Result<Vec<_>>>()?;
        let mut ends = Vec::with_capacity(self.ends.len());
        for e in &self.ends {
            let at = |k: f64| g(e.edge + e.dir * k * e.d0);
            let law = EdgeLaw::from_samples(at(1.0)?, at(4.0)?, at(16.0)?);
            ends.push(law.integral(e.delta, 0) / TAU);
        }
        Ok(BoundarySamples { nodes, ends })
    }

    /// `∫ f(x(e^{iθ})) dθ/2π` over the covered part of the circle.
    pub fn integrate(&self, f: &dyn Fn(f64) -> f64) -> f64 {
        let s = self.sample(&|x| Ok(f(x))).expect("infallible");
        let inner: f64 = self
            .nodes
            .iter()
            .zip(&s.nodes)
            .map(|(n, v)| n.weight * n.image_weight * v)
            .sum();
        let ends: f64 = self
            .ends
            .iter()
            .zip(&s.ends)
            .map(|(e, v)| e.image_weight * v)
            .sum();
        inner + ends
    }

    /// `∫ K(e^{iθ}) g(x(e^{iθ})) dθ/2π`, unfolding every image arc.
    pub fn integrate_kernel(
        &self,
        kernel: &dyn Fn(Complex64) -> Complex64,
        g: &dyn Fn(f64) -> f64,
    ) -> Complex64 {
        let s = self.sample(&|x| Ok(g(x))).expect("infallible");
        self.integrate_kernel_samples(kernel, &s)
    }

    /// Same as [`BoundaryRule::integrate_kernel`] with `g` already sampled.
    pub fn integrate_kernel_samples(
        &self,
        kernel: &dyn Fn(Complex64) -> Complex64,
        s: &BoundarySamples,
    ) -> Complex64 {
        assert_eq!(s.nodes.len(), self.nodes.len());
        let unfold = |zeta: Complex64| -> Complex64 {
            self.words
                .iter()
                .map(|w| kernel(w.map.apply(zeta)) * w.map.derivative(zeta).norm())
                .sum()
        };
        let mut total = Complex64::new(0.0, 0.0);
        for (n, &gx) in self.nodes.iter().zip(&s.nodes) {
            if gx != 0.0 {
                total += unfold(n.zeta) * (n.weight * gx);
            }
        }
        for (e, &ge) in self.ends.iter().zip(&s.ends) {
            if ge != 0.0 {
                total += unfold(e.zeta) * ge;
            }
        }
        total
    }
}

/// Both sides of `∫_{∂𝔻} f(x(e^{iθ})) dθ/2π = ∫ f dρ_e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushforwardCheck {
    pub boundary: f64,
    pub equilibrium: f64,
    /// Boundary mass left out of the quadrature (`|ℛ_{L+1}| / 2π`).
    pub excluded_mass: f64,
    /// Change of the boundary side when the arc rule is halved.
    pub quadrature_change: f64,
}

impl PushforwardCheck {
    pub fn difference(&self) -> f64 {
        (self.boundary - self.equilibrium).abs()
    }
}

pub fn pushforward_check(
    map: &CoveringMap,
    f: &dyn Fn(f64) -> f64,
    length: usize,
) -> Result<PushforwardCheck> {
    let mut n = 32;
    let mut prev = BoundaryRule::new(map, length, n)?.integrate(f);
    loop {
        n *= 2;
        let rule = BoundaryRule::new(map, length, n)?;
        let v = rule.integrate(f);
        let change = (v - prev).abs();
        if change < 1e-12 * v.abs().max(1.0) || n >= 512 {
            if n >= 512 && change > 1e-8 {
                log::warn!("boundary quadrature still moving by {change:.2e} at {n} nodes per arc");
            }
            return Ok(PushforwardCheck {
                boundary: v,
                equilibrium: map.equilibrium().integrate(f),
                excluded_mass: rule.excluded_mass(),
                quadrature_change: change,
            });
        }
        if n > MAX_NODES {
            unreachable!();
        }
        prev = v;
    }
}

/// Smallest finite-difference slope of `arg B(e^{iφ})` in `φ` over the
/// free arcs (positive for a valid covering).
pub fn min_boundary_phase_slope(map: &CoveringMap, samples_per_arc: usize) -> f64 {
    let h = 1e-6;
    let mut worst = f64::INFINITY;
    for arc in free_arcs(map) {
        for k in 1..samples_per_arc {
            let phi = arc.phi0 + (arc.phi1 - arc.phi0) * k as f64 / samples_per_arc as f64;
            let bp = map.blaschke().value(Complex64::from_polar(1.0, phi + h));
            let bm = map.blaschke().value(Complex64::from_polar(1.0, phi - h));
            let slope = (bp / bm).arg() / (2.0 * h);
            worst = worst.min(slope);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{fit_circles, OrthocircleGroup};
    use crate::gapset::{Equilibrium, GapSet};

    #[test]
    fn one_band_pushforward() {
        let set = GapSet::new(&[-2.0, 2.0]).unwrap();
        let eq = Equilibrium::new(&set, 64).unwrap();
        let map = CoveringMap::new(&set, &eq, &OrthocircleGroup::new(&[]).unwrap()).unwrap();
        assert!((boundary_value(&map, 1.0).unwrap() - 2.0 * 1f64.cos()).abs() < 1e-12);
        let c = pushforward_check(&map, &|x| x * x, 0).unwrap();
        assert!(
            (c.boundary - 2.0).abs() < 1e-12 && (c.equilibrium - 2.0).abs() < 1e-10,
            "{c:?}"
        );
    }

    #[test]
    fn two_band_pushforward_and_harmonic_measure() {
        let set = GapSet::new(&[-2.0, -0.5, 0.3, 1.5]).unwrap();
        let eq = Equilibrium::new(&set, 64).unwrap();
        let fit = fit_circles(&set, &eq, None).unwrap();
        let map = CoveringMap::new(&set, &eq, &fit.group).unwrap();
        let one = pushforward_check(&map, &|_| 1.0, 10).unwrap();
        assert!(
            (one.boundary - 1.0).abs() < 1e-8 + one.excluded_mass,
            "{one:?}"
        );
        let cubic = pushforward_check(&map, &|x| x * x * x - x, 10).unwrap();
        assert!(cubic.difference() < 1e-7, "{cubic:?}");
        let rule = BoundaryRule::new(&map, 10, 64).unwrap();
        for (j, &m) in eq.band_masses().iter().enumerate() {
            let (a, b) = set.bands()[j];
            let v = rule.integrate(&|x| {
                if x >= a - 1e-12 && x <= b + 1e-12 {
                    1.0
                } else {
                    0.0
                }
            });
            assert!((v - m).abs() < 1e-4, "band {j}: {v} vs {m}");
        }
        assert!(min_boundary_phase_slope(&map, 20) > 0.0);
    }
}
