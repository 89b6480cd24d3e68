use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::spectral::operator_measure;
use crate::covering::{
    fit_circles, BlaschkeEvaluator, BoundaryRule, BoundarySamples, CoveringMap, OrthocircleGroup,
    MAP_WORD_BUDGET,
};
use crate::error::{Error, Result};
use crate::gapset::{log_integral, Equilibrium, GapSet, SzegoValue};
use crate::jacobi::{JacobiOperator, SpectralMeasure};

/// Share of the circle the boundary rule may leave out.
pub const BOUNDARY_TAIL_TOL: f64 = 1e-12;
/// Default Gauss–Legendre order on each free arc.
pub const NODES_PER_ARC: usize = 192;

/// `∏ exp(-G(E_j)) · exp(-½ ∫ log(w/ρ_e) dρ_e)`.
pub fn jost_u0(set: &GapSet, eq: &Equilibrium, measure: &SpectralMeasure) -> Result<f64> {
    if eq.set() != set {
        return Err(Error::Argument(
            "equilibrium data belong to another set".into(),
        ));
    }
    let ratio = |x: f64| measure.density(x) / eq.density(x);
    let integral = match log_integral(eq, &ratio)? {
        SzegoValue::Finite(v) => v,
        SzegoValue::NegInfinity => {
            return Err(Error::Domain {
                index: 0,
                message: "the Szegő integral diverges; u(0) is zero".into(),
            })
        }
    };
    let green: f64 = measure.points().iter().map(|&(e, _)| eq.green(e)).sum();
    Ok((-green - 0.5 * integral).exp())
}

/// Covering map and boundary rule shared by the Jost functions of every
/// operator over one set.
#[derive(Debug, Clone)]
pub struct JostContext {
    map: Arc<CoveringMap>,
    rule: Arc<BoundaryRule>,
}

impl JostContext {
    pub fn new(map: CoveringMap, nodes_per_arc: usize) -> Result<JostContext> {
        let length = rule_length(map.group())?;
        let rule = BoundaryRule::new(&map, length, nodes_per_arc)?;
        Ok(JostContext {
            map: Arc::new(map),
            rule: Arc::new(rule),
        })
    }

    /// Fit the circles for `set` and build the map and boundary rule.
    pub fn fitted(set: &GapSet, eq: &Equilibrium) -> Result<JostContext> {
        let fit = fit_circles(set, eq, None)?;
        JostContext::new(CoveringMap::new(set, eq, &fit.group)?, NODES_PER_ARC)
    }

    pub fn map(&self) -> &CoveringMap {
        &self.map
    }

    pub fn rule(&self) -> &BoundaryRule {
        &self.rule
    }

    pub fn set(&self) -> &GapSet {
        self.map.set()
    }

    pub fn equilibrium(&self) -> &Equilibrium {
        self.map.equilibrium()
    }

    pub fn group(&self) -> &OrthocircleGroup {
        self.map.group()
    }

    /// `B(z)`, the orbit product of `0`.
    pub fn b(&self, z: Complex64) -> Complex64 {
        self.map.blaschke().value(z)
    }

    pub fn jost_data(&self, op: &JacobiOperator) -> Result<JostData> {
        JostData::new(self, op)
    }
}

fn rule_length(group: &OrthocircleGroup) -> Result<usize> {
    if group.rank() == 0 {
        return Ok(0);
    }
    let mut len = 1;
    while group.word_count(len + 1) <= MAP_WORD_BUDGET {
        if group.rm_measure(len + 1)? / std::f64::consts::TAU < BOUNDARY_TAIL_TOL {
            break;
        }
        len += 1;
    }
    Ok(len)
}

/// Everything needed to evaluate `u(z; J)`.
#[derive(Debug, Clone)]
pub struct JostData {
    ctx: JostContext,
    operator: JacobiOperator,
    eigenvalues: Vec<f64>,
    preimages: Vec<Complex64>,
    factors: Vec<BlaschkeEvaluator>,
    log_ratio: BoundarySamples,
    u0: f64,
}

impl JostData {
    pub fn new(ctx: &JostContext, op: &JacobiOperator) -> Result<JostData> {
        let map = ctx.map();
        let measure = operator_measure(op, map.set())?;
        let u0 = jost_u0(map.set(), map.equilibrium(), &measure)?;
        let eq = map.equilibrium();
        let log_ratio = ctx.rule().sample(&|x| {
            let l = (eq.density(x) / measure.density(x)).ln();
            if l.is_finite() {
                Ok(l)
            } else {
                Err(Error::Domain {
                    index: 0,
                    message: format!("log(ρ/w) is not finite at x = {x}"),
                })
            }
        })?;
        let eigenvalues: Vec<f64> = measure.points().iter().map(|p| p.0).collect();
        let mut preimages = Vec::new();
        let mut factors = Vec::new();
        let length = map.blaschke().length();
        for &e in &eigenvalues {
            let p = map.inverse(Complex64::new(e, 0.0))?;
            if p.norm() > 1.0 - 1e-12 {
                // an eigenvalue at a band edge contributes a factor of 1
                log::warn!("eigenvalue {e} sits on the boundary of the disk");
                continue;
            }
            preimages.push(p);
            factors.push(BlaschkeEvaluator::new(map.group(), p, length)?);
        }
        Ok(JostData {
            ctx: ctx.clone(),
            operator: op.clone(),
            eigenvalues,
            preimages,
            factors,
            log_ratio,
            u0,
        })
    }

    pub fn context(&self) -> &JostContext {
        &self.ctx
    }

    pub fn operator(&self) -> &JacobiOperator {
        &self.operator
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Preimages `p_j` of the eigenvalues in the fundamental domain.
    pub fn preimages(&self) -> &[Complex64] {
        &self.preimages
    }

    /// `u(0; J)` from the direct formula on the set.
    pub fn u0(&self) -> f64 {
        self.u0
    }

    /// `u(z; J)`.
    pub fn value(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        let excluded = self.ctx.rule().excluded_mass();
        let bound = 0.5 * excluded * (1.0 + r) / (1.0 - r)
            * self
                .log_ratio
                .nodes
                .iter()
                .fold(0.0f64, |a, b| a.max(b.abs()));
        if bound > 1e-8 {
            log::warn!("Jost function near the circle: excluded mass {excluded:.2e} bounds the error by {bound:.2e}");
        }
        let blaschke: Complex64 = self.factors.iter().map(|f| f.value(z)).product();
        let kernel = |zeta: Complex64| (zeta + z) / (zeta - z);
        let s = self
            .ctx
            .rule()
            .integrate_kernel_samples(&kernel, &self.log_ratio);
        blaschke * (0.5 * s).exp()
    }

    /// `|u(0)` from the boundary integral minus the direct value`|`.
    pub fn consistency(&self) -> f64 {
        (self.value(Complex64::new(0.0, 0.0)) - self.u0).norm()
    }
}

/// `u(z; J)`.
pub fn jost_function(jd: &JostData, z: Complex64) -> Complex64 {
    jd.value(z)
}

/// `u_n(z) = a_n^{-1} B(z)^n u(z; J^{(n)})`, `a_0 = 1`.
pub fn jost_solution(
    ctx: &JostContext,
    op: &JacobiOperator,
    n: usize,
    z: Complex64,
) -> Result<Complex64> {
    let jd = ctx.jost_data(&op.stripped(n))?;
    let an = if n == 0 { 1.0 } else { op.a(n) };
    Ok(ctx.b(z).powi(n as i32) * jd.value(z) / an)
}

/// Jost solution `u_0 … u_N` at one point with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct JostSolution {
    pub z: Complex64,
    pub x: Complex64,
    pub b: Complex64,
    pub values: Vec<Complex64>,
    /// `a_n M_n(z)` from the m-functions of the stripped operators.
    pub m_products: Vec<Complex64>,
}

impl JostSolution {
    pub fn compute(
        ctx: &JostContext,
        op: &JacobiOperator,
        n_max: usize,
        z: Complex64,
    ) -> Result<JostSolution> {
        let x = ctx.map().forward(z)?;
        let b = ctx.b(z);
        let mut cache: Vec<(JacobiOperator, JostData)> = Vec::new();
        let mut values = Vec::with_capacity(n_max + 1);
        let mut m_products = Vec::with_capacity(n_max + 1);
        let mut bn = Complex64::new(1.0, 0.0);
        for n in 0..=n_max {
            let s = op.stripped(n);
            let u = match cache.iter().find(|(o, _)| *o == s) {
                Some((_, jd)) => jd.value(z),
                None => {
                    let jd = ctx.jost_data(&s)?;
                    let u = jd.value(z);
                    cache.push((s.clone(), jd));
                    u
                }
            };
            let an = if n == 0 { 1.0 } else { op.a(n) };
            values.push(bn * u / an);
            m_products.push(-an * s.m_function().value(x)?);
            bn *= b;
        }
        Ok(JostSolution {
            z,
            x,
            b,
            values,
            m_products,
        })
    }

    /// `|a_{n-1}u_{n-1} + b_n u_n + a_n u_{n+1} - x u_n|` for `n = 1 … N-1`.
    pub fn residuals(&self, op: &JacobiOperator) -> Vec<f64> {
        let u = &self.values;
        (1..u.len() - 1)
            .map(|n| {
                let a_prev = if n == 1 { 1.0 } else { op.a(n - 1) };
                (u[n - 1] * a_prev + u[n] * op.b(n) + u[n + 1] * op.a(n) - self.x * u[n]).norm()
            })
            .collect()
    }

    /// `|a_n M_n - u_{n+1}/u_n|` for `n = 0 … N-1`.
    pub fn ratio_residuals(&self) -> Vec<f64> {
        (0..self.values.len() - 1)
            .map(|n| (self.m_products[n] - self.values[n + 1] / self.values[n]).norm())
            .collect()
    }

    /// `(log|u_to| - log|u_from|) / (to - from)` against `log|B(z)|`.
    pub fn decay_slope(&self, from: usize, to: usize) -> (f64, f64) {
        let s = (self.values[to].norm().ln() - self.values[from].norm().ln()) / (to - from) as f64;
        (s, self.b.norm().ln())
    }

    /// A second solution started from `v_0 = 1`, `v_1 = 0`.
    pub fn second_solution(&self, op: &JacobiOperator) -> Vec<Complex64> {
        let n = self.values.len();
        let mut v = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        for k in 1..n - 1 {
            let a_prev = if k == 1 { 1.0 } else { op.a(k - 1) };
            let next = ((self.x - op.b(k)) * v[k] - a_prev * v[k - 1]) / op.a(k);
            v.push(next);
        }
        v
    }

    /// `a_n (u_n v_{n+1} - u_{n+1} v_n)`, `n = 0 … N-1`, with `a_0 = 1`.
    pub fn wronskians(&self, op: &JacobiOperator, v: &[Complex64]) -> Vec<Complex64> {
        let u = &self.values;
        (0..u.len() - 1)
            .map(|n| {
                let an = if n == 0 { 1.0 } else { op.a(n) };
                (u[n] * v[n + 1] - u[n + 1] * v[n]) * an
            })
            .collect()
    }
}
