//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use fingap::covering::{fit_circles, linear_fit, pushforward_check, CoveringMap, DEFAULT_WORD_CAP};
use fingap::jacobi::{EigenvalueDetection, HeadOverride, JacobiOperator, MFunction};
use fingap::szego::*;
use fingap::torus::{fit_periodic, torus_walk, TorusPoint, WalkOptions};
use fingap::{Equilibrium, GapSet, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn two_band() -> Result<(GapSet, Equilibrium)> {
    let set = GapSet::new(&[-2.0, -1.0, 1.0, 2.0])?;
    let eq = Equilibrium::new(&set, 64)?;
    Ok((set, eq))
}

fn free_set() -> Result<(GapSet, Equilibrium)> {
    let set = GapSet::interval(-2.0, 2.0)?;
    let eq = Equilibrium::new(&set, 64)?;
    Ok((set, eq))
}

fn period_two() -> JacobiOperator {
    JacobiOperator::periodic(&[1.5, 0.5], &[0.0, 0.0]).expect("positive a")
}

fn a1_two() -> JacobiOperator {
    JacobiOperator::free().with_a(1, 2.0).expect("positive a")
}

fn max(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn interval_closed_forms() -> Result<Verdict> {
    let (set, eq) = free_set()?;
    let ctx = JostContext::fitted(&set, &eq)?;
    let mut err: f64 = 0.0;
    err = err.max((eq.capacity() - 1.0).abs());
    err = err.max((eq.density(0.0) - 1.0 / (2.0 * PI)).abs());
    err = err.max((eq.green(2.5) - 2f64.ln()).abs());
    for z in [c(0.3, 0.2), c(-0.5, 0.1), c(0.1, -0.6), c(0.7, 0.0)] {
        err = err.max((ctx.map().forward(z)? - (z + 1.0 / z)).norm());
        err = err.max((ctx.b(z) - z).norm());
    }
    err = err.max((MFunction::free().value(c(2.5, 0.0))? - c(-0.5, 0.0)).norm());
    let jd = ctx.jost_data(&JacobiOperator::free())?;
    err = err.max((jd.u0() - 2f64.sqrt()).abs());
    let boundary = (jd.value(c(0.0, 0.0)) - 2f64.sqrt()).norm();
    verdict(
        err < 1e-10 && boundary < 1e-6,
        format!("closed forms {err:.1e} (< 1e-10), boundary u(0) {boundary:.1e} (< 1e-6)"),
    )
}

fn green_identity() -> Result<Verdict> {
    let (set, eq) = two_band()?;
    let group = fit_circles(&set, &eq, None)?.group;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let zs: Vec<Complex64> = (0..20)
        .map(|_| Complex64::from_polar(0.9 * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>()))
        .collect();
    // x(z) from the converged map; only the product is truncated, since a
    // map built from B_L satisfies the identity by construction
    let reference = CoveringMap::new(&set, &eq, &group)?;
    let green: Vec<f64> = zs
        .iter()
        .map(|&z| Ok((-eq.complex_green(reference.forward(z)?).re).exp()))
        .collect::<Result<_>>()?;
    let mut errs = Vec::new();
    for l in 1..=10 {
        let b = CoveringMap::with_length(&set, &eq, &group, l)?;
        errs.push(max(zs
            .iter()
            .zip(&green)
            .map(|(&z, g)| (b.blaschke().value(z).norm() - g).abs())));
    }
    let mut automorphy: f64 = 0.0;
    for &z in &zs {
        let x = reference.forward(z)?;
        for s in 0..group.generator_count() as u8 {
            automorphy =
                automorphy.max((reference.forward(group.generator(s).apply(z))? - x).norm());
        }
    }
    // geometric decay reaches the quadrature floor of the reference Green
    // function within a few levels; below it only "no increase" is asked
    const FLOOR: f64 = 1e-12;
    let monotone = errs
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0] < FLOOR && w[1] < FLOOR));
    let at_ten = errs[9];
    let list: Vec<String> = errs.iter().map(|e| format!("{e:.1e}")).collect();
    verdict(
        at_ten < 1e-4 && monotone && automorphy < 1e-6,
        format!(
            "L=1..10 errors [{}], monotone above {FLOOR:.0e}: {monotone}; automorphy of x {automorphy:.1e}",
            list.join(", ")
        ),
    )
}

fn cover_decay() -> Result<Verdict> {
    let (set, eq) = two_band()?;
    let group = fit_circles(&set, &eq, None)?.group;
    let pts: Vec<(f64, f64)> = (1..=8)
        .map(|m| Ok((m as f64, group.rm_measure(m)?.ln())))
        .collect::<Result<_>>()?;
    let (slope, _, r2) = linear_fit(&pts).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    verdict(
        slope < 0.0 && r2 > 0.99,
        format!("slope {slope:.4}, r² {r2:.6}"),
    )
}

fn pushforward() -> Result<Verdict> {
    let (set, eq) = two_band()?;
    let group = fit_circles(&set, &eq, None)?.group;
    let map = CoveringMap::new(&set, &eq, &group)?;
    let fs: [fn(f64) -> f64; 4] = [|_| 1.0, |x| x, |x| x * x, |x| x * x * x];
    let mut worst: f64 = 0.0;
    for f in fs {
        worst = worst.max(pushforward_check(&map, &f, map.blaschke().length())?.difference());
    }
    verdict(worst < 1e-4, format!("max difference {worst:.1e} (< 1e-4)"))
}

fn word_counts() -> Result<Verdict> {
    let mut ok = true;
    let mut level3 = 0;
    for ends in [
        vec![-2.0, -1.0, 1.0, 2.0],
        vec![-3.0, -2.0, -0.5, 0.5, 2.0, 3.0],
    ] {
        let set = GapSet::new(&ends)?;
        let eq = Equilibrium::new(&set, 64)?;
        let group = fit_circles(&set, &eq, None)?.group;
        let two_l = 2 * group.rank();
        let levels = group.words_by_length(5, DEFAULT_WORD_CAP)?;
        for (k, words) in levels.iter().enumerate().skip(1) {
            ok &= words.len() == two_l * (two_l - 1).pow(k as u32 - 1);
        }
        if group.rank() == 2 {
            level3 = levels[3].len();
        }
    }
    verdict(
        ok && level3 == 36,
        format!("lengths 1..5 for ℓ = 1, 2; ℓ=2 length 3 has {level3}"),
    )
}

fn sum_rule() -> Result<Verdict> {
    let (fs, feq) = free_set()?;
    let free = asymptotic_ratio(&a1_two(), &JacobiOperator::free(), &fs, &feq, 40)?;
    let (set, eq) = two_band()?;
    let head = period_two().with_a(1, 1.0)?;
    let periodic = asymptotic_ratio(&head, &period_two(), &set, &eq, 40)?;
    let e1 = free.settled_error(1).max((free.predicted - 2.0).abs());
    let e2 = periodic.settled_error(1);
    verdict(
        e1 < 1e-6 && e2 < 1e-6,
        format!(
            "free a₁=2 ratio {:.10} (err {e1:.1e}), period-2 tail ratio {:.10} (err {e2:.1e})",
            free.predicted, periodic.predicted
        ),
    )
}

fn jost_solutions() -> Result<Verdict> {
    let (fs, feq) = free_set()?;
    let (set, eq) = two_band()?;
    let free_ctx = JostContext::fitted(&fs, &feq)?;
    let ctx = JostContext::fitted(&set, &eq)?;
    let z = c(0.4, 0.0);
    let (mut res, mut cross, mut slope_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (cx, op) in [(&free_ctx, a1_two()), (&ctx, period_two())] {
        let s = JostSolution::compute(cx, &op, 21, z)?;
        res = res.max(max(s.residuals(&op)));
        cross = cross.max(max(s.ratio_residuals()));
        let (slope, target) = s.decay_slope(2, 20);
        slope_err = slope_err.max((slope / target - 1.0).abs());
    }
    verdict(
        res < 1e-8 && cross < 1e-6 && slope_err < 1e-2,
        format!("residual {res:.1e}, cross {cross:.1e}, slope rel. error {slope_err:.1e}"),
    )
}

fn mh_representation() -> Result<Verdict> {
    let (set, eq) = free_set()?;
    let ctx = JostContext::fitted(&set, &eq)?;
    let zs = [
        c(0.2, 0.1),
        c(-0.3, 0.4),
        c(0.5, -0.2),
        c(-0.1, -0.6),
        c(0.05, 0.7),
    ];
    let (mut res, mut change): (f64, f64) = (0.0, 0.0);
    for op in [JacobiOperator::free(), a1_two()] {
        let dm = DiskMFunction::new(&ctx, &op)?;
        let jd = ctx.jost_data(&op)?;
        for &z in &zs {
            let chk = mh_representation_check(&dm, &jd, 1.0 - 1e-6, z)?;
            res = res.max(chk.residual / chk.lhs.norm());
            change = change.max(chk.b_inf_change);
        }
    }
    verdict(
        res < 1e-6 && change < 1e-6,
        format!("relative lhs/rhs {res:.1e}, B_∞ refinement change {change:.1e}"),
    )
}

fn torus_suite() -> Result<Verdict> {
    let (set, eq) = two_band()?;
    let fit = fit_periodic(&set, &eq, 2, None, 0)?;
    let pt = &fit.point;
    let fit_err = max([
        (pt.a()[0] - 1.5).abs(),
        (pt.a()[1] - 0.5).abs(),
        pt.b()[0].abs(),
        pt.b()[1].abs(),
    ]);
    let target = eq.capacity().powi(2);
    let walk = torus_walk(pt, 16, WalkOptions::default())?;
    let prod = max(walk.iter().map(|t| (t.product_a() - target).abs()));

    // Half-line eigenvalues off the set must be Dirichlet data, and each
    // datum inside a gap belongs to exactly one of the two half-lines of
    // the two-sided operator, which then has none.
    let on_edge = |x: f64| set.endpoints().iter().any(|e| (x - e).abs() < 1e-6);
    let near = |v: &[f64], x: f64| v.iter().any(|e| (e - x).abs() < 1e-8);
    let mut stray = 0;
    let mut unpaired = 0;
    let mut right_side = 0;
    let fitted_clear = EigenvalueDetection::detect(&pt.operator(), &set)?
        .by_truncation
        .is_empty();
    for t in &walk {
        let dir = t.dirichlet();
        let right = EigenvalueDetection::detect(&t.operator(), &set)?.by_truncation;
        let left = EigenvalueDetection::detect(&t.reflected().operator(), &set)?.by_truncation;
        stray += right
            .iter()
            .chain(&left)
            .filter(|&&e| !near(&dir, e))
            .count();
        for &d in dir.iter().filter(|&&d| !on_edge(d)) {
            let (r, l) = (near(&right, d), near(&left, d));
            unpaired += usize::from(r == l);
            right_side += usize::from(r);
        }
    }
    verdict(
        fit.residual < 1e-10 && fit_err < 1e-10 && prod < 1e-8 && stray == 0 && unpaired == 0 && fitted_clear,
        format!(
            "fit residual {:.1e}, |a - (3/2, 1/2)| {fit_err:.1e}, ∏a - C² {prod:.1e} over {} points; \
             no eigenvalue at the fitted point: {fitted_clear}; stray eigenvalues {stray}; \
             two-sided spectrum clear ({right_side} data on the right half-line, {unpaired} unpaired)",
            fit.residual,
            walk.len()
        ),
    )
}

fn character_suite() -> Result<Verdict> {
    let (set, eq) = two_band()?;
    let ctx = JostContext::fitted(&set, &eq)?;
    let t0 = TorusPoint::new(vec![1.5, 0.5], vec![0.0, 0.0])?;
    let head = t0.operator().with_head(&[HeadOverride {
        n: 1,
        a: 1.0,
        b: 0.3,
    }])?;
    let mut strip: f64 = 0.0;
    for op in [t0.operator(), head] {
        for n in 1..=2 {
            strip = strip.max(stripping_check(&ctx, &op, n)?);
        }
    }
    let walk = torus_walk(&t0, 16, WalkOptions::default())?;
    let chars = walk_characters(&ctx, &walk)?;
    let mut self_match: f64 = 0.0;
    let mut self_index = true;
    for (i, ch) in chars.iter().enumerate().step_by(3) {
        let m = match_torus_character(ch, &walk, &ctx)?;
        self_match = self_match.max(m.distance);
        self_index &= m.index == i;
    }
    let mut separation = f64::INFINITY;
    for i in 0..chars.len() {
        for j in i + 1..chars.len() {
            separation = separation.min(phase_distance(&chars[i], &chars[j]));
        }
    }
    let mut tail_match: f64 = 0.0;
    for (k, h) in [
        (
            5,
            HeadOverride {
                n: 1,
                a: 0.8,
                b: -0.2,
            },
        ),
        (
            11,
            HeadOverride {
                n: 2,
                a: 1.3,
                b: 0.4,
            },
        ),
    ] {
        let op = walk[k].operator().with_head(&[h])?;
        let ch = character_of_j(&ctx.jost_data(&op)?)?;
        let m = match_torus_character(&ch, &walk, &ctx)?;
        let gap = max(m
            .point
            .params()
            .iter()
            .zip(walk[k].params())
            .map(|(a, b)| (a - b).abs()));
        tail_match = tail_match.max(m.distance).max(gap);
    }
    verdict(
        strip < 1e-6 && self_match < 1e-10 && self_index && separation > 1e-3 && tail_match < 1e-4,
        format!(
            "stripping {strip:.1e}, self-match {self_match:.1e} (indices {self_index}), \
             min separation {separation:.2e}, head-perturbed match {tail_match:.1e}"
        ),
    )
}

type Criterion = (&'static str, fn() -> Result<Verdict>, Option<f64>);

fn main() {
    let criteria: [Criterion; 10] = [
        ("interval closed forms", interval_closed_forms, Some(5.0)),
        ("|B| = exp(-G) under truncation", green_identity, Some(60.0)),
        ("decay of the limit-set covers", cover_decay, Some(30.0)),
        (
            "pushforward of the boundary measure",
            pushforward,
            Some(60.0),
        ),
        ("word counts", word_counts, Some(1.0)),
        ("step-by-step sum rule", sum_rule, Some(60.0)),
        ("Jost solutions", jost_solutions, None),
        ("m-function product representation", mh_representation, None),
        ("isospectral torus", torus_suite, None),
        ("characters", character_suite, None),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        let in_time = budget.is_none_or(|b| secs < b);
        let (pass, detail) = match out {
            Ok(v) => (v.pass && in_time, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        let limit = budget.map(|b| format!(" (limit {b}s)")).unwrap_or_default();
        println!(
            "criterion {:>2} {} {name}: {detail} [{secs:.2}s{limit}]",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
