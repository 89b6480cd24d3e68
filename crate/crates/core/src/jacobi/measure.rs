use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gapset::GapSet;
use crate::quad::GaussLegendre;

type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `dμ = w(x) dx` on the bands plus finitely many point masses off them.
#[derive(Clone)]
pub struct SpectralMeasure {
    set: Option<GapSet>,
    density: DensityFn,
    points: Vec<(f64, f64)>,
}

impl fmt::Debug for SpectralMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralMeasure")
            .field("set", &self.set)
            .field("points", &self.points)
            .finish_non_exhaustive()
    }
}

impl SpectralMeasure {
    pub fn new<F>(set: &GapSet, density: F, points: Vec<(f64, f64)>) -> Result<SpectralMeasure>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        SpectralMeasure::build(Some(set), Arc::new(density), points)
    }

    /// A purely discrete measure.
    pub fn discrete(points: Vec<(f64, f64)>) -> Result<SpectralMeasure> {
        SpectralMeasure::build(None, Arc::new(|_| 0.0), points)
    }

    fn build(
        set: Option<&GapSet>,
        density: DensityFn,
        points: Vec<(f64, f64)>,
    ) -> Result<SpectralMeasure> {
        for (i, &(e, w)) in points.iter().enumerate() {
            if set.is_some_and(|s| s.contains(e)) {
                return Err(Error::Domain {
                    index: i,
                    message: format!("point mass at {e} lies in the essential spectrum"),
                });
            }
            if !(w > 0.0) {
                return Err(Error::Validation {
                    index: i,
                    message: "point masses must be positive".into(),
                });
            }
        }
        Ok(SpectralMeasure {
            set: set.cloned(),
            density,
            points,
        })
    }

    pub fn point_mass(at: f64) -> Result<SpectralMeasure> {
        SpectralMeasure::discrete(vec![(at, 1.0)])
    }

    pub fn set(&self) -> Option<&GapSet> {
        self.set.as_ref()
    }

    fn in_support(&self, x: f64) -> bool {
        self.set.as_ref().is_some_and(|s| s.contains(x))
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn density(&self, x: f64) -> f64 {
        if self.in_support(x) {
            (self.density)(x)
        } else {
            0.0
        }
    }

    /// Band nodes `(x, w(x) dx)` with `n` nodes per band.
    pub fn band_nodes(&self, n: usize) -> Vec<(f64, f64)> {
        let Some(set) = &self.set else {
            return Vec::new();
        };
        let rule = GaussLegendre::get(n);
        let mut out = Vec::with_capacity(n * set.band_count());
        for (a, b) in set.bands() {
            let (m, hw) = (0.5 * (a + b), 0.5 * (b - a));
            for (th, wt) in rule.mapped(0.0, PI) {
                let x = m + hw * th.cos();
                out.push((x, wt * hw * th.sin() * (self.density)(x)));
            }
        }
        out
    }

    /// `∫ f dμ`, doubling the band order until the value settles.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F) -> Result<Complex64> {
        let discrete: Complex64 = self.points.iter().map(|&(e, w)| f(e) * w).sum();
        let at =
            |n: usize| -> Complex64 { self.band_nodes(n).into_iter().map(|(x, w)| f(x) * w).sum() };
        let mut n = 64;
        let mut prev = at(n);
        loop {
            n *= 2;
            let next = at(n);
            let change = (next - prev).norm();
            if change <= 1e-13 * next.norm().max(1.0) {
                return Ok(next + discrete);
            }
            if n >= 8192 {
                return Err(Error::Accuracy {
                    context: "spectral measure quadrature".into(),
                    residual: change,
                });
            }
            prev = next;
        }
    }

    pub fn total_mass(&self) -> Result<f64> {
        Ok(self.integrate(|_| Complex64::new(1.0, 0.0))?.re)
    }

    /// `m(x) = ∫ dμ(t) / (t - x)`.
    pub fn m_value(&self, x: Complex64) -> Result<Complex64> {
        if x.im == 0.0 && self.in_support(x.re) {
            return Err(Error::Domain {
                index: 0,
                message: format!("{} lies in the essential spectrum", x.re),
            });
        }
        if let Some(i) = self
            .points
            .iter()
            .position(|&(e, _)| Complex64::new(e, 0.0) == x)
        {
            return Err(Error::Pole(format!("m has a pole at point mass {i}")));
        }
        self.integrate(|t| 1.0 / (t - x))
    }

    /// Recurrence coefficients `(a_1..a_n, b_1..b_n)` by the Stieltjes
    /// procedure on a discretization of the measure.
    pub fn jacobi_parameters(
        &self,
        n: usize,
        nodes_per_band: usize,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut pts = self.band_nodes(nodes_per_band);
        pts.extend_from_slice(&self.points);
        if n >= pts.len() {
            return Err(Error::Argument(
                "discretization too coarse for the requested depth".into(),
            ));
        }
        let mut prev = vec![0.0; pts.len()];
        let mut cur = vec![1.0; pts.len()];
        let norm0: f64 = pts.iter().map(|p| p.1).sum();
        cur.iter_mut().for_each(|v| *v /= norm0.sqrt());
        let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
        let mut a_prev = 0.0;
        for _ in 0..n {
            let bk: f64 = pts.iter().zip(&cur).map(|(p, c)| p.0 * c * c * p.1).sum();
            let mut next: Vec<f64> = pts
                .iter()
                .zip(cur.iter().zip(&prev))
                .map(|(p, (c, q))| (p.0 - bk) * c - a_prev * q)
                .collect();
            let ak = next
                .iter()
                .zip(&pts)
                .map(|(v, p)| v * v * p.1)
                .sum::<f64>()
                .sqrt();
            if !(ak > 0.0) {
                return Err(Error::Numerical {
                    iterations: b.len(),
                    message: "Stieltjes procedure lost orthogonality".into(),
                });
            }
            next.iter_mut().for_each(|v| *v /= ak);
            b.push(bk);
            a.push(ak);
            prev = cur;
            cur = next;
            a_prev = ak;
        }
        Ok((a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_m() {
        let set = GapSet::interval(-2.0, 2.0).unwrap();
        assert!(SpectralMeasure::new(&set, |_| 0.0, vec![(1.0, 1.0)]).is_err());
        let mu = SpectralMeasure::point_mass(0.0).unwrap();
        let m = mu.m_value(Complex64::new(2.0, 0.0)).unwrap();
        assert!((m.re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn free_measure() {
        let set = GapSet::interval(-2.0, 2.0).unwrap();
        let mu = SpectralMeasure::new(
            &set,
            |x: f64| (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI),
            vec![],
        )
        .unwrap();
        assert!((mu.total_mass().unwrap() - 1.0).abs() < 1e-13);
        let m = mu.m_value(Complex64::new(2.5, 0.0)).unwrap();
        assert!((m - Complex64::new(-0.5, 0.0)).norm() < 1e-12);
        let (a, b) = mu.jacobi_parameters(6, 128).unwrap();
        for k in 0..6 {
            assert!((a[k] - 1.0).abs() < 1e-12 && b[k].abs() < 1e-12);
        }
    }
}
