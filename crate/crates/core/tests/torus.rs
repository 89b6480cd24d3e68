use fingap::jacobi::eigenvalues_outside;
use fingap::torus::{discriminant, fit_periodic, m_periodic, torus_walk, TorusPoint, WalkOptions};
use fingap::{Equilibrium, GapSet};
use num_complex::Complex64;
use proptest::prelude::*;

fn two_band() -> (GapSet, Equilibrium) {
    let set = GapSet::new(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
    let eq = Equilibrium::new(&set, 64).unwrap();
    (set, eq)
}

fn period_two() -> TorusPoint {
    TorusPoint::new(vec![1.5, 0.5], vec![0.0, 0.0]).unwrap()
}

#[test]
fn discriminants() {
    let free = TorusPoint::free().discriminant();
    assert_eq!(free.degree(), 1);
    assert!((free.eval(0.7) - 0.7).abs() < 1e-15);
    let d = period_two().discriminant();
    for x in [-2.0, -0.3, 0.0, 1.1, 3.0] {
        assert!((d.eval(x) - (x * x - 2.5) / 0.75).abs() < 1e-13, "{x}");
    }
    let edges = period_two().band_edges();
    for (e, want) in edges.iter().zip([-2.0, -1.0, 1.0, 2.0]) {
        assert!((e - want).abs() < 1e-12);
    }
    assert_eq!(discriminant(&[1.5, 0.5], &[0.0, 0.0]), d);
}

#[test]
fn periodic_fits() {
    let set = GapSet::interval(-2.0, 2.0).unwrap();
    let eq = Equilibrium::new(&set, 64).unwrap();
    let fit = fit_periodic(&set, &eq, 1, None, 0).unwrap();
    assert!(fit.converged);
    assert!((fit.point.a()[0] - 1.0).abs() < 1e-10 && fit.point.b()[0].abs() < 1e-10);

    let (set, eq) = two_band();
    let fit = fit_periodic(&set, &eq, 2, None, 3).unwrap();
    assert!(fit.converged && fit.residual < 1e-10);
    let mut a = fit.point.a().to_vec();
    a.sort_by(f64::total_cmp);
    assert!(
        (a[0] - 0.5).abs() < 1e-9 && (a[1] - 1.5).abs() < 1e-9,
        "{a:?}"
    );
    assert!(fit.point.b().iter().all(|b| b.abs() < 1e-9));
    assert!((fit.point.product_a() - 0.75).abs() < 1e-9);
    assert!(fit_periodic(&set, &eq, 3, None, 0).is_err());
}

#[test]
fn periodic_m_functions() {
    let m = m_periodic(&TorusPoint::free(), Complex64::new(2.5, 0.0)).unwrap();
    assert!((m - Complex64::new(-0.5, 0.0)).norm() < 1e-14);
    // two steps of stripping return to the same m-function
    let t = period_two();
    for x in [Complex64::new(3.0, 0.0), Complex64::new(0.2, 0.4)] {
        let m = m_periodic(&t, x).unwrap();
        let m1 = 1.0 / (t.b()[1] - x - t.a()[1] * t.a()[1] * m);
        let res = m - 1.0 / (t.b()[0] - x - t.a()[0] * t.a()[0] * m1);
        assert!(res.norm() < 1e-12, "{x}: {res}");
        assert!((m_periodic(&t.shifted(1), x).unwrap() - m1).norm() < 1e-12);
    }
}

#[test]
fn walks_stay_on_the_torus() {
    let (set, eq) = two_band();
    let target = eq.capacity().powi(2);
    let walk = torus_walk(&period_two(), 16, WalkOptions::default()).unwrap();
    assert_eq!(walk.len(), 16);
    for (i, t) in walk.iter().enumerate() {
        assert!((t.product_a() - target).abs() < 1e-8);
        for (e, want) in t.band_edges().iter().zip(set.endpoints()) {
            assert!((e - want).abs() < 1e-8);
        }
        for s in &walk[..i] {
            let d: f64 = t
                .params()
                .iter()
                .zip(s.params())
                .map(|(x, y)| (x - y).abs())
                .sum();
            assert!(d > 1e-6);
        }
    }
    let s = period_two().shifted(1);
    assert_eq!(s.a(), &[0.5, 1.5]);
    assert_eq!(period_two().shifted(2), period_two());
    let only = torus_walk(&TorusPoint::free(), 16, WalkOptions::default()).unwrap();
    assert_eq!(only, vec![TorusPoint::free()]);
}

#[test]
fn gap_data_sit_on_exactly_one_half_line() {
    let (set, _) = two_band();
    let walk = torus_walk(&period_two(), 8, WalkOptions::default()).unwrap();
    for t in &walk {
        let right = eigenvalues_outside(&t.operator(), &set).unwrap();
        let left = eigenvalues_outside(&t.reflected().operator(), &set).unwrap();
        let mut interior = 0;
        for &d in &t.dirichlet() {
            if set.endpoints().iter().any(|e| (d - e).abs() < 1e-6) {
                continue;
            }
            interior += 1;
            let hits = [&right, &left]
                .iter()
                .filter(|v| v.iter().any(|e| (e - d).abs() < 1e-8))
                .count();
            assert_eq!(hits, 1, "datum {d} of {t:?}");
        }
        assert_eq!(right.len() + left.len(), interior);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shifts_and_reflections_keep_the_isospectral_set(
        a in prop::collection::vec(0.3f64..2.0, 3),
        b in prop::collection::vec(-1.0f64..1.0, 3),
        k in 0usize..3,
    ) {
        let t = TorusPoint::new(a, b).unwrap();
        let edges = t.band_edges();
        for u in [t.shifted(k), t.reflected()] {
            for (x, y) in u.band_edges().iter().zip(&edges) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert!((u.product_a() - t.product_a()).abs() < 1e-12);
        }
        prop_assert_eq!(t.reflected().reflected(), t.clone());
        prop_assert_eq!(t.shifted(3), t);
    }
}
