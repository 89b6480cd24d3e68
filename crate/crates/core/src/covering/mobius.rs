use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Disk automorphism `z ↦ (a z + b) / (b̄ z + ā)` with `|a|² - |b|² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    pub a: Complex64,
    pub b: Complex64,
}

impl MobiusMap {
    pub fn identity() -> MobiusMap {
        MobiusMap {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Normalizes so that `|a|² - |b|² = 1`; panics unless the determinant
    /// is positive (which is what keeps the disk invariant).
    pub fn new(a: Complex64, b: Complex64) -> MobiusMap {
        let det = a.norm_sqr() - b.norm_sqr();
        assert!(det > 0.0, "not a disk automorphism");
        let s = det.sqrt();
        MobiusMap { a: a / s, b: b / s }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let d = self.b.conj() * z + self.a.conj();
        1.0 / (d * d)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        let a = self.a * other.a + self.b * other.b.conj();
        let b = self.a * other.b + self.b * other.a.conj();
        // the determinant is multiplicative; recomputing it from long words
        // cancels catastrophically
        MobiusMap { a, b }
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// `γ(0)`.
    pub fn at_origin(&self) -> Complex64 {
        self.b / self.a.conj()
    }

    /// `1 - |γ(z)|²`, computed without cancellation.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        (1.0 - z.norm_sqr()) / (self.b.conj() * z + self.a.conj()).norm_sqr()
    }

    /// Image of the circle with the given center and radius (not through
    /// the pole of the map).
    pub fn image_circle(&self, center: Complex64, radius: f64) -> (Complex64, f64) {
        let pts: Vec<Complex64> = (0..3)
            .map(|k| {
                self.apply(
                    center
                        + Complex64::from_polar(
                            radius,
                            2.0 * std::f64::consts::PI * k as f64 / 3.0,
                        ),
                )
            })
            .collect();
        circumcircle(pts[0], pts[1], pts[2])
    }
}

pub(crate) fn circumcircle(p: Complex64, q: Complex64, r: Complex64) -> (Complex64, f64) {
    let (b, c) = (q - p, r - p);
    let d = 2.0 * (b.re * c.im - b.im * c.re);
    let ux = (c.im * b.norm_sqr() - b.im * c.norm_sqr()) / d;
    let uy = (b.re * c.norm_sqr() - c.re * b.norm_sqr()) / d;
    let u = Complex64::new(ux, uy);
    (p + u, u.norm())
}
