//! Gauss–Legendre rules and the few quadrature drivers the rest of the
//! crate builds on.

use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest rule the adaptive drivers will request.
pub const MAX_NODES: usize = 1 << 14;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Cached rule of order `n`.
    pub fn get(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().unwrap().get(&n) {
            return rule.clone();
        }
        let rule = Arc::new(GaussLegendre::compute(n));
        cache.lock().unwrap().insert(n, rule.clone());
        rule
    }

    fn compute(n: usize) -> GaussLegendre {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate a real function over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, w * half))
    }

    /// Nodes and weights on `[a, b]` after a sigmoidal grading that clusters
    /// nodes at both ends; integrands with logarithmic or weak power
    /// singularities at the ends converge rapidly under it.
    pub fn graded(&self, a: f64, b: f64, degree: i32) -> Vec<(f64, f64)> {
        let k = degree as f64;
        self.mapped(0.0, 1.0)
            .map(|(s, w)| {
                let p = s.powf(k);
                let q = (1.0 - s).powf(k);
                let g = p / (p + q);
                let dg = k * s.powf(k - 1.0) * (1.0 - s).powf(k - 1.0) / ((p + q) * (p + q));
                (a + (b - a) * g, w * (b - a) * dg)
            })
            .collect()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

/// Outcome of an order-doubling quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Converged {
    pub value: f64,
    pub order: usize,
    pub relative_change: f64,
}

/// Double the order, starting at `start`, until the relative change drops
/// below `tol`.
pub fn doubling<F: FnMut(usize) -> f64>(
    start: usize,
    tol: f64,
    mut at_order: F,
) -> Result<Converged> {
    let mut n = start.max(4);
    let mut prev = at_order(n);
    loop {
        let next_n = 2 * n;
        if next_n > MAX_NODES {
            let scale = prev.abs().max(1e-300);
            return Err(Error::Accuracy {
                context: format!("no convergence up to {n} nodes"),
                residual: (prev - at_order(n)).abs() / scale,
            });
        }
        let next = at_order(next_n);
        let change = (next - prev).abs() / next.abs().max(1.0);
        if change < tol {
            return Ok(Converged {
                value: next,
                order: next_n,
                relative_change: change,
            });
        }
        prev = next;
        n = next_n;
    }
}

/// Adaptive bisection along the straight segment `a -> b` in the complex
/// plane, with a 16-point rule compared against its two halves.
pub fn segment_adaptive<F: Fn(Complex64) -> Complex64>(
    f: &F,
    a: Complex64,
    b: Complex64,
    tol: f64,
) -> Complex64 {
    let rule = GaussLegendre::get(16);
    let whole = segment_fixed(&rule, f, a, b);
    segment_recurse(&rule, f, a, b, whole, tol, 0)
}

fn segment_fixed<F: Fn(Complex64) -> Complex64>(
    rule: &GaussLegendre,
    f: &F,
    a: Complex64,
    b: Complex64,
) -> Complex64 {
    let half = (b - a) * 0.5;
    let mid = (a + b) * 0.5;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += f(mid + half * t) * w;
    }
    acc * half
}

fn segment_recurse<F: Fn(Complex64) -> Complex64>(
    rule: &GaussLegendre,
    f: &F,
    a: Complex64,
    b: Complex64,
    whole: Complex64,
    tol: f64,
    depth: usize,
) -> Complex64 {
    let mid = (a + b) * 0.5;
    let left = segment_fixed(rule, f, a, mid);
    let right = segment_fixed(rule, f, mid, b);
    let both = left + right;
    let err = (both - whole).norm();
    let floor = 32.0 * f64::EPSILON * (left.norm() + right.norm());
    if err <= tol || err <= floor || depth >= 40 {
        return both;
    }
    segment_recurse(rule, f, a, mid, left, 0.5 * tol, depth + 1)
        + segment_recurse(rule, f, mid, b, right, 0.5 * tol, depth + 1)
}

/// Adaptive bisection on a real interval.
pub fn real_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let g = |z: Complex64| Complex64::new(f(z.re), 0.0);
    segment_adaptive(&g, Complex64::new(a, 0.0), Complex64::new(b, 0.0), tol).re
}
