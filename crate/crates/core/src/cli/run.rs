use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{Outcome, Report, Status, Table};
use crate::covering::{
    boundary_value, fit_circles, free_arcs, linear_fit, pushforward_check, CoveringMap,
    OrthocircleGroup, DEFAULT_WORD_CAP,
};
use crate::error::{Error, Result};
use crate::gapset::{Equilibrium, GapSet};
use crate::jacobi::Tail;
use crate::szego::{
    asymptotic_ratio, character_of_j, match_torus_character, phase_distance, pn_ratio,
    stripping_check, szego_class_report, tail_matches, walk_characters, JostContext, JostSolution,
};
use crate::torus::{torus_walk, TorusPoint, WalkOptions};

/// Sites of the Jost solution checked by the asymptotics experiment.
pub const JOST_STEPS: usize = 20;

/// Runs one experiment. Errors raised mid-way are recorded in the report,
/// which keeps everything computed before them.
pub fn run(cfg: &ExperimentConfig) -> Outcome {
    let start = Instant::now();
    let mut report = Report::new(cfg);
    let mut tables = Vec::new();
    let res = match cfg.kind {
        ExperimentKind::Equilibrium => equilibrium(cfg, &mut report, &mut tables),
        ExperimentKind::CoveringFit => covering_fit(cfg, &mut report, &mut tables),
        ExperimentKind::SzegoReport => szego_report(cfg, &mut report, &mut tables),
        ExperimentKind::SumRule => sum_rule(cfg, &mut report, &mut tables),
        ExperimentKind::Asymptotics => asymptotics(cfg, &mut report, &mut tables),
        ExperimentKind::CharacterMatch => character_match(cfg, &mut report, &mut tables),
        ExperimentKind::BeardonDecay => beardon_decay(cfg, &mut report, &mut tables),
    };
    report.status = match res {
        Err(e) => {
            log::error!("{}: {e}", cfg.kind.name());
            report.error = Some(e.to_string());
            Status::NumericalFailure
        }
        Ok(()) if report.passed() => Status::Pass,
        Ok(()) => Status::CheckFailed,
    };
    report.tables = tables.iter().map(|t| t.name.clone()).collect();
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Outcome { report, tables }
}

fn setup(cfg: &ExperimentConfig) -> Result<(GapSet, Equilibrium)> {
    let set = cfg.gapset()?;
    let eq = Equilibrium::new(&set, cfg.knobs.quad_order)?;
    Ok((set, eq))
}

fn covering(cfg: &ExperimentConfig, set: &GapSet, eq: &Equilibrium) -> Result<CoveringMap> {
    let fit = fit_circles(set, eq, None)?;
    match cfg.knobs.word_length {
        Some(l) => CoveringMap::with_length(set, eq, &fit.group, l),
        None => CoveringMap::new(set, eq, &fit.group),
    }
}

fn context(cfg: &ExperimentConfig, set: &GapSet, eq: &Equilibrium) -> Result<JostContext> {
    JostContext::new(covering(cfg, set, eq)?, cfg.knobs.nodes_per_arc)
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn equilibrium(cfg: &ExperimentConfig, r: &mut Report, tables: &mut Vec<Table>) -> Result<()> {
    let (set, eq) = setup(cfg)?;
    r.put("capacity", eq.capacity());
    r.put("log_capacity", eq.log_capacity());
    r.put("band_masses", eq.band_masses());
    r.put("critical_points", eq.critical_points());
    r.put("gap_heights", eq.gap_heights());
    let total: f64 = eq.band_masses().iter().sum();
    r.below("band_mass_total", (total - 1.0).abs(), cfg.tolerances.mass);
    if set.band_count() == 1 {
        r.below(
            "interval_capacity",
            (eq.capacity() - 0.25 * set.diameter()).abs(),
            cfg.tolerances.capacity,
        );
    }
    // cell-centred grid, so no sample lands on an endpoint
    let n = cfg.knobs.samples;
    let lo = set.left() - 0.25 * set.diameter();
    let h = 1.5 * set.diameter() / n as f64;
    let mut t = Table::new("density", &["x", "density", "green"]);
    for k in 0..n {
        let x = lo + (k as f64 + 0.5) * h;
        t.push(&[x, eq.density(x), eq.green(x)]);
    }
    tables.push(t);
    Ok(())
}

fn covering_fit(cfg: &ExperimentConfig, r: &mut Report, tables: &mut Vec<Table>) -> Result<()> {
    let (set, eq) = setup(cfg)?;
    let fit = fit_circles(&set, &eq, None)?;
    r.put("circle_angles", fit.group.angles());
    r.put("fit_residual", fit.residual);
    r.put("fit_iterations", fit.iterations);
    let map = match cfg.knobs.word_length {
        Some(l) => CoveringMap::with_length(&set, &eq, &fit.group, l)?,
        None => CoveringMap::new(&set, &eq, &fit.group)?,
    };
    let length = map.blaschke().length();
    r.put("word_length", length);
    r.put("residue_at_zero", map.residue_at_zero());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst: f64 = 0.0;
    let mut probes = Table::new(
        "green_identity",
        &["z_re", "z_im", "abs_b", "exp_minus_green"],
    );
    for _ in 0..cfg.knobs.probes {
        let z = Complex64::from_polar(0.9 * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>());
        let x = map.forward(z)?;
        let b = map.blaschke().value(z).norm();
        let g = (-eq.complex_green(x).re).exp();
        worst = worst.max((b - g).abs());
        probes.push(&[z.re, z.im, b, g]);
    }
    r.below("green_identity", worst, cfg.tolerances.green_identity);
    tables.push(probes);

    let powers: [(&str, fn(f64) -> f64); 4] = [
        ("pushforward_1", |_| 1.0),
        ("pushforward_x", |x| x),
        ("pushforward_x2", |x| x * x),
        ("pushforward_x3", |x| x * x * x),
    ];
    for (name, f) in powers {
        let c = pushforward_check(&map, &f, length)?;
        r.put(name, c);
        r.below(name, c.difference(), cfg.tolerances.pushforward);
    }

    let mut bt = Table::new("boundary", &["theta", "x", "band"]);
    let per_arc = (cfg.knobs.samples / (2 * set.band_count())).max(2);
    for arc in free_arcs(&map) {
        for k in 0..per_arc {
            let phi = arc.phi0 + (arc.phi1 - arc.phi0) * (k as f64 + 0.5) / per_arc as f64;
            bt.push(&[phi, boundary_value(&map, phi)?, arc.band as f64]);
        }
    }
    tables.push(bt);
    tables.push(geometry_table(map.group(), 3)?);
    Ok(())
}

fn geometry_table(g: &OrthocircleGroup, levels: usize) -> Result<Table> {
    let text = g.geometry_csv(levels)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let mut t = Table::new("circles", &header);
    for l in lines {
        t.push_cells(l.split(',').map(str::to_string).collect());
    }
    Ok(t)
}

fn szego_report(cfg: &ExperimentConfig, r: &mut Report, tables: &mut Vec<Table>) -> Result<()> {
    let (set, eq) = setup(cfg)?;
    let op = cfg.operator()?;
    let rep = szego_class_report(&op, &set, &eq)?;
    r.put("report", &rep);
    r.above(
        "ess_spec_matches",
        f64::from(u8::from(rep.ess_spec_ok)),
        0.5,
    );
    let lc = eq.log_capacity();
    let mut t = Table::new("products", &["n", "a_n", "product_over_capacity_power"]);
    let mut log_ratio = 0.0;
    for n in 1..=cfg.knobs.horizon {
        log_ratio += op.a(n).ln() - lc;
        t.push(&[n as f64, op.a(n), log_ratio.exp()]);
    }
    tables.push(t);
    Ok(())
}

fn sum_rule(cfg: &ExperimentConfig, r: &mut Report, tables: &mut Vec<Table>) -> Result<()> {
    let (set, eq) = setup(cfg)?;
    let op = cfg.operator()?;
    let limit = op.background();
    let ar = asymptotic_ratio(&op, &limit, &set, &eq, cfg.knobs.horizon)?;
    r.put("u0", ar.u0);
    r.put("u0_limit", ar.u0_limit);
    r.put("predicted_ratio", ar.predicted);
    r.put("final_ratio", ar.ratio_sequence.last());
    r.below(
        "ratio_vs_prediction",
        ar.settled_error(op.head_len()),
        cfg.tolerances.ratio,
    );
    let mut t = Table::new("ratio", &["n", "coefficient_product_ratio", "jost_ratio"]);
    for (k, v) in ar.ratio_sequence.iter().enumerate() {
        t.push(&[(k + 1) as f64, *v, ar.predicted]);
    }
    tables.push(t);
    // the same value of u(0) from the boundary representation
    let ctx = context(cfg, &set, &eq)?;
    let jd = ctx.jost_data(&op)?;
    r.put("u0_boundary", jd.value(Complex64::new(0.0, 0.0)).re);
    r.below("u0_representations", jd.consistency(), cfg.tolerances.ratio);
    Ok(())
}

fn asymptotics(cfg: &ExperimentConfig, r: &mut Report, tables: &mut Vec<Table>) -> Result<()> {
    let (set, eq) = setup(cfg)?;
    let op = cfg.operator()?;
    let limit = op.background();
    let k = &cfg.knobs;
    let pr = pn_ratio(&op, &limit, complex(k.probe_x), k.horizon)?;
    r.put("pn_ratio_final", pr.ratios.last());
    r.below(
        "pn_ratio_cauchy_tail",
        pr.cauchy_tail,
        cfg.tolerances.cauchy_tail,
    );
    let mut t = Table::new("pn_ratio", &["n", "re", "im", "abs"]);
    for (n, v) in pr.ratios.iter().enumerate() {
        t.push(&[n as f64, v.re, v.im, v.norm()]);
    }
    tables.push(t);

    let ctx = context(cfg, &set, &eq)?;
    let z = complex(k.probe_z);
    let s = JostSolution::compute(&ctx, &op, JOST_STEPS + 1, z)?;
    let res = s.residuals(&op);
    let ratio_res = s.ratio_residuals();
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    r.put("x", s.x);
    r.below("jost_recurrence", max(&res), cfg.tolerances.recurrence);
    r.below("jost_m_ratio", max(&ratio_res), cfg.tolerances.stripping);
    let p = op.tail().period();
    let (slope, target) = s.decay_slope(p, p * (JOST_STEPS / p));
    r.put("decay_slope", slope);
    r.put("log_abs_b", target);
    r.below(
        "decay_slope_relative",
        (slope / target - 1.0).abs(),
        cfg.tolerances.decay_slope,
    );
    let v = s.second_solution(&op);
    let w = s.wronskians(&op, &v);
    let spread = w.iter().map(|x| (x - w[0]).norm()).fold(0.0, f64::max);
    r.put("wronskian", w[0]);
    r.below("wronskian_spread", spread, cfg.tolerances.recurrence);
    let mut jt = Table::new(
        "jost",
        &["n", "re_u", "im_u", "abs_u", "recurrence_residual"],
    );
    for (n, u) in s.values.iter().enumerate() {
        let rr = if n >= 1 {
            res.get(n - 1).copied()
        } else {
            None
        };
        jt.push(&[n as f64, u.re, u.im, u.norm(), rr.unwrap_or(f64::NAN)]);
    }
    tables.push(jt);
    Ok(())
}

fn character_match(cfg: &ExperimentConfig, r: &mut Report, tables: &mut Vec<Table>) -> Result<()> {
    let (set, eq) = setup(cfg)?;
    let op = cfg.operator()?;
    let Tail::Periodic { a, b } = op.tail().clone() else {
        return Err(Error::Config(
            "character_match needs a periodic tail".into(),
        ));
    };
    let tail = TorusPoint::new(a, b)?;
    r.above(
        "tail_on_set",
        f64::from(u8::from(tail_matches(op.tail(), &set)?)),
        0.5,
    );
    let ctx = context(cfg, &set, &eq)?;
    for n in 1..=2 {
        let d = stripping_check(&ctx, &op, n)?;
        r.below(
            &format!("stripping_{n}"),
            d,
            cfg.tolerances.character_identity,
        );
    }
    let walk = torus_walk(&tail, cfg.knobs.walk_steps, WalkOptions::default())?;
    let chars = walk_characters(&ctx, &walk)?;
    let c = character_of_j(&ctx.jost_data(&op)?)?;
    let m = match_torus_character(&c, &walk, &ctx)?;
    r.put("matched_point", &m.point);
    r.put("matched_index", m.index);
    r.put("walk_separation", m.separation);
    r.put("refined", m.refined);
    r.below("match_distance", m.distance, cfg.tolerances.character_match);
    let c_tail = character_of_j(&ctx.jost_data(&tail.operator())?)?;
    r.below(
        "character_vs_tail",
        phase_distance(&c, &c_tail),
        cfg.tolerances.character_match,
    );
    let p = tail.period();
    let mut header: Vec<String> = vec!["index".into()];
    header.extend((1..=p).map(|i| format!("a{i}")));
    header.extend((1..=p).map(|i| format!("b{i}")));
    header.extend((1..=set.gap_count()).map(|j| format!("phase{j}")));
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new("walk", &hdr);
    for (i, (pt, ch)) in walk.iter().zip(&chars).enumerate() {
        let mut row = vec![i as f64];
        row.extend(pt.params());
        row.extend(ch.values.iter().map(|v| v.arg()));
        t.push(&row);
    }
    tables.push(t);
    Ok(())
}

fn beardon_decay(cfg: &ExperimentConfig, r: &mut Report, tables: &mut Vec<Table>) -> Result<()> {
    let (set, eq) = setup(cfg)?;
    if set.gap_count() == 0 {
        return Err(Error::Unsupported(
            "the group of a single interval is trivial".into(),
        ));
    }
    let group = fit_circles(&set, &eq, None)?.group;
    let mmax = cfg.knobs.max_level;
    let levels = group.words_by_length(mmax, DEFAULT_WORD_CAP)?;
    let burnside = group.burnside_sum(Complex64::new(0.0, 0.0), 1.0, mmax)?;
    let two_l = 2 * group.rank();
    let mut count_err: usize = 0;
    let mut pts = Vec::new();
    let mut t = Table::new(
        "decay",
        &[
            "m",
            "rm_measure",
            "log_rm_measure",
            "words_of_length_m",
            "burnside_partial",
        ],
    );
    for m in 1..=mmax {
        let rm = group.rm_measure(m)?;
        let expected = two_l * (two_l - 1).pow(m as u32 - 1);
        count_err += levels[m].len().abs_diff(expected);
        pts.push((m as f64, rm.ln()));
        t.push(&[
            m as f64,
            rm,
            rm.ln(),
            levels[m].len() as f64,
            burnside.derivative[m],
        ]);
    }
    tables.push(t);
    r.below("word_count_mismatch", count_err as f64, 0.5);
    let (slope, intercept, r2) = linear_fit(&pts).ok_or_else(|| Error::Numerical {
        iterations: 0,
        message: "decay fit needs finite measures".into(),
    })?;
    r.put("slope", slope);
    r.put("intercept", intercept);
    r.put("burnside_decay_rate", burnside.decay_rate(1, mmax));
    r.below("slope", slope, 0.0);
    r.above("r_squared", r2, cfg.tolerances.min_r_squared);
    Ok(())
}
