use std::f64::consts::PI;

use fingap::gapset::{
    eigenvalue_functionals, log_integral, szego_integral, szego_integral_with, LogDensity,
    SzegoValue, SzegoWeight,
};
use fingap::{Equilibrium, Error, GapSet};
use proptest::prelude::*;

fn free() -> (GapSet, Equilibrium) {
    let set = GapSet::interval(-2.0, 2.0).unwrap();
    let eq = Equilibrium::new(&set, 64).unwrap();
    (set, eq)
}

fn finite(v: SzegoValue) -> f64 {
    v.finite().expect("integral diverged")
}

#[test]
fn construction_and_distances() {
    let s = GapSet::new(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
    assert_eq!(s.gap_count(), 1);
    assert_eq!(s.gaps(), vec![(-1.0, 1.0)]);
    assert_eq!(s.dist_to_set(0.0), 1.0);
    assert_eq!(s.dist_to_complement(0.0), 0.0);
    assert_eq!(GapSet::interval(-2.0, 2.0).unwrap().gap_count(), 0);
    match GapSet::new(&[0.0, 1.0, 0.5, 2.0]) {
        Err(Error::Validation { index, .. }) => assert_eq!(index, 2),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        GapSet::new(&[0.0, 1.0, 2.0]),
        Err(Error::Validation { .. })
    ));
}

#[test]
fn interval_closed_forms() {
    let (_, eq) = free();
    assert!((eq.capacity() - 1.0).abs() < 1e-12);
    assert!((eq.density(0.0) - 1.0 / (2.0 * PI)).abs() < 1e-12);
    for x in [2.5f64, 3.0, 10.0, -4.0] {
        let exact = ((x.abs() + (x * x - 4.0).sqrt()) / 2.0).ln();
        assert!((eq.green(x) - exact).abs() < 1e-12, "{x}");
    }
}

#[test]
fn symmetric_two_band_closed_forms() {
    let set = GapSet::new(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
    let eq = Equilibrium::new(&set, 64).unwrap();
    assert!((eq.capacity() - 3f64.sqrt() / 2.0).abs() < 1e-12);
    assert!(eq.critical_points()[0].abs() < 1e-12);
    for m in eq.band_masses() {
        assert!((m - 0.5).abs() < 1e-12);
    }
    // [-b, -a] ∪ [a, b] has capacity √(b² − a²) / 2
    let set = GapSet::new(&[-3.0, -0.5, 0.5, 3.0]).unwrap();
    let eq = Equilibrium::new(&set, 64).unwrap();
    assert!((eq.capacity() - (9.0f64 - 0.25).sqrt() / 2.0).abs() < 1e-12);
}

#[test]
fn szego_integrals_against_quadrature_oracles() {
    let (set, eq) = free();
    let w = |x: f64| (4.0 - x * x).sqrt() / (2.0 * PI);
    assert!((finite(szego_integral(&set, &eq, &w, -0.5).unwrap()) + 10.7382899221165).abs() < 1e-9);
    assert!((finite(szego_integral(&set, &eq, &w, 0.5).unwrap()) + 4.97235826152562).abs() < 1e-9);
    let poly = szego_integral_with(&set, &eq, &w, -0.5, SzegoWeight::EndpointPolynomial).unwrap();
    assert!((finite(poly) + PI * (2.0 * PI).ln()).abs() < 1e-9);
    let one = |_: f64| 1.0;
    assert_eq!(finite(szego_integral(&set, &eq, &one, -0.5).unwrap()), 0.0);
    let dist = |x: f64| (x + 2.0).min(2.0 - x);
    let mild = LogDensity(move |x: f64| -dist(x).powf(-0.25));
    // -2 ∫_0^2 d^{-3/4} dd = -8 · 2^{1/4}
    let exact = -8.0 * 2f64.powf(0.25);
    assert!((finite(szego_integral(&set, &eq, &mild, -0.5).unwrap()) - exact).abs() < 1e-8);
    let harsh = LogDensity(move |x: f64| -1.0 / dist(x));
    assert_eq!(
        szego_integral(&set, &eq, &harsh, -0.5).unwrap(),
        SzegoValue::NegInfinity
    );
    assert!(szego_integral(&set, &eq, &one, 0.25).is_err());
}

#[test]
fn log_integrals_against_closed_forms() {
    let (_, eq) = free();
    // ∫ log(√(4 − x²)/2) dρ = −log 2
    let w = |x: f64| (4.0 - x * x).sqrt() / 2.0;
    assert!((finite(log_integral(&eq, &w).unwrap()) + 2f64.ln()).abs() < 1e-10);
    // x = 2cosθ: −(1/π) 2^{-1/2} ∫_0^π sin^{-1/2}θ dθ
    let w = LogDensity(|x: f64| -(4.0 - x * x).powf(-0.25));
    assert!((finite(log_integral(&eq, &w).unwrap()) + 1.180340599016096).abs() < 1e-8);
    let w = LogDensity(|x: f64| -1.0 / (4.0 - x * x));
    assert_eq!(log_integral(&eq, &w).unwrap(), SzegoValue::NegInfinity);
}

#[test]
fn eigenvalue_sums() {
    let (set, eq) = free();
    let f = eigenvalue_functionals(&set, &eq, &[3.0]).unwrap();
    assert!((f.half_sum - 1.0).abs() < 1e-15 && (f.three_half_sum - 1.0).abs() < 1e-15);
    let f = eigenvalue_functionals(&set, &eq, &[]).unwrap();
    assert_eq!(
        (f.half_sum, f.three_half_sum, f.green_product),
        (0.0, 0.0, 1.0)
    );
    let e = 4.0 / 3f64.sqrt();
    let f = eigenvalue_functionals(&set, &eq, &[-e, e]).unwrap();
    assert!((f.green_product - 1.0 / 3.0).abs() < 1e-12);
    assert!(matches!(
        eigenvalue_functionals(&set, &eq, &[3.0, 1.0]),
        Err(Error::Domain { index: 1, .. })
    ));
}

/// Sorted endpoints of 2 or 3 bands with bands and gaps at least 0.1 wide.
fn gapsets() -> impl Strategy<Value = Vec<f64>> {
    (1usize..=2)
        .prop_flat_map(|gaps| prop::collection::vec(0.1f64..1.5, 2 * gaps + 1))
        .prop_flat_map(|lengths| {
            let mut e = vec![0.0];
            for l in lengths {
                let last = *e.last().unwrap();
                e.push(last + l);
            }
            (Just(e), -3.0f64..3.0)
        })
        .prop_map(|(e, shift)| e.into_iter().map(|x| x + shift).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn equilibrium_measure_properties(ends in gapsets()) {
        let set = GapSet::new(&ends).unwrap();
        let eq = Equilibrium::new(&set, 64).unwrap();
        let masses = eq.band_masses();
        prop_assert!((masses.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(masses.iter().all(|&m| m > 0.0));
        prop_assert!((eq.integrate(|_| 1.0) - 1.0).abs() < 1e-10);
        prop_assert!(eq.capacity() < set.diameter() / 4.0 + 1e-12);
        for (k, (lo, hi)) in set.gaps().into_iter().enumerate() {
            let c = eq.critical_points()[k];
            prop_assert!(lo < c && c < hi);
            prop_assert!(eq.green(0.5 * (lo + hi)) > 0.0);
            prop_assert!(eq.green(lo + 1e-10) < 1e-3 && eq.green(hi - 1e-10) < 1e-3);
        }
        for (lo, hi) in set.bands() {
            prop_assert!(eq.green(0.5 * (lo + hi)).abs() < 1e-12);
            prop_assert!(eq.density(0.5 * (lo + hi)) > 0.0);
        }
        let far = set.center() + 1e4 * set.diameter();
        let asym = eq.green(far) - (far - set.center()).ln() + eq.log_capacity();
        prop_assert!(asym.abs() < 1e-3, "{asym}");
    }

    #[test]
    fn affine_covariance(ends in gapsets(), s in 0.2f64..5.0, t in -4.0f64..4.0) {
        let set = GapSet::new(&ends).unwrap();
        let eq = Equilibrium::new(&set, 64).unwrap();
        let moved = set.scaled(s).unwrap().translated(t).unwrap();
        let eq2 = Equilibrium::new(&moved, 64).unwrap();
        prop_assert!((eq2.capacity() / eq.capacity() - s).abs() < 1e-9);
        for (a, b) in eq.band_masses().iter().zip(eq2.band_masses()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let x = set.right() + 0.7;
        prop_assert!((eq.green(x) - eq2.green(s * x + t)).abs() < 1e-9);
    }
}
