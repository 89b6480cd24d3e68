use std::f64::consts::PI;

use fingap::covering::{
    automorphy_residual, blaschke_character, fit_circles, probes, pushforward_check, Character,
    CoveringMap, MobiusMap, OrthocircleGroup, DEFAULT_WORD_CAP,
};
use fingap::{Equilibrium, GapSet};
use num_complex::Complex64;
use proptest::prelude::*;

fn setup(endpoints: &[f64]) -> (GapSet, Equilibrium) {
    let set = GapSet::new(endpoints).unwrap();
    let eq = Equilibrium::new(&set, 64).unwrap();
    (set, eq)
}

#[test]
fn word_counts() {
    let (set, eq) = setup(&[-3.0, -2.0, -1.0, 0.5, 1.0, 3.0]);
    let group = fit_circles(&set, &eq, None).unwrap().group;
    assert_eq!(group.rank(), 2);
    let levels = group.words_by_length(3, DEFAULT_WORD_CAP).unwrap();
    assert_eq!(
        levels.iter().map(Vec::len).collect::<Vec<_>>(),
        [1, 4, 12, 36]
    );
    assert_eq!(group.word_count(3), 53);

    let (set, eq) = setup(&[-2.0, -1.0, 1.0, 2.0]);
    let group = fit_circles(&set, &eq, None).unwrap().group;
    let levels = group.words_by_length(4, DEFAULT_WORD_CAP).unwrap();
    assert!(levels[1..].iter().all(|l| l.len() == 2));

    let trivial = OrthocircleGroup::new(&[]).unwrap();
    let levels = trivial.words_by_length(3, DEFAULT_WORD_CAP).unwrap();
    assert_eq!(levels[0].len(), 1);
    assert_eq!(levels[0][0].map, MobiusMap::identity());
    assert!(levels[1..].iter().all(Vec::is_empty));
}

#[test]
fn interval_map_is_joukowski() {
    let (set, eq) = setup(&[-2.0, 2.0]);
    let group = fit_circles(&set, &eq, None).unwrap().group;
    let map = CoveringMap::new(&set, &eq, &group).unwrap();
    let z = Complex64::new(0.5, 0.0);
    assert!((map.forward(z).unwrap() - 2.5).norm() < 1e-12);
    assert!((map.inverse(Complex64::new(2.5, 0.0)).unwrap() - z).norm() < 1e-10);
    let w = Complex64::new(0.1, -0.35);
    assert!((map.forward(w).unwrap() - (w + 1.0 / w)).norm() < 1e-10);
    assert!((map.residue_at_zero() - 1.0).abs() < 1e-12);
    assert!(group.rm_measure(1).unwrap() == 0.0);
    let chi = blaschke_character(&group, Complex64::new(0.3, 0.1), 4).unwrap();
    assert_eq!(chi, Character::trivial(0));
}

#[test]
fn symmetric_two_band_fit() {
    let (set, eq) = setup(&[-2.0, -1.0, 1.0, 2.0]);
    let fit = fit_circles(&set, &eq, None).unwrap();
    assert!(fit.residual < 1e-10);
    let (a, b) = fit.group.angles()[0];
    assert!((a + b - PI).abs() < 1e-6, "{a} {b}");
    let map = CoveringMap::new(&set, &eq, &fit.group).unwrap();
    let zs = probes(&fit.group, 20);
    assert_eq!(zs.len(), 20);
    for &z in &zs {
        let x = map.forward(z).unwrap();
        let back = map.inverse(x).unwrap();
        assert!((map.forward(back).unwrap() - x).norm() < 1e-8, "{z}");
        assert!(fit.group.in_fundamental_domain(back));
    }
    assert!(automorphy_residual(&map, &zs).unwrap() < 1e-6);
    // x is odd under z ↦ -z for this symmetric set
    let z = Complex64::new(0.2, 0.3);
    assert!((map.forward(-z).unwrap() + map.forward(z).unwrap()).norm() < 1e-8);
}

#[test]
fn boundary_pushforward_moments() {
    let (set, eq) = setup(&[-2.0, 2.0]);
    let map = CoveringMap::new(&set, &eq, &fit_circles(&set, &eq, None).unwrap().group).unwrap();
    let one = pushforward_check(&map, &|_| 1.0, 0).unwrap();
    assert!((one.boundary - 1.0).abs() < 1e-12);
    let sq = pushforward_check(&map, &|x| x * x, 0).unwrap();
    assert!((sq.boundary - 2.0).abs() < 1e-10 && sq.difference() < 1e-10);

    let (set, eq) = setup(&[-2.0, -1.0, 1.0, 2.0]);
    let map = CoveringMap::new(&set, &eq, &fit_circles(&set, &eq, None).unwrap().group).unwrap();
    let len = map.blaschke().length();
    let odd = pushforward_check(&map, &|x| x, len).unwrap();
    assert!(odd.boundary.abs() < 1e-8 && odd.difference() < 1e-8);
}

#[test]
fn burnside_sums_converge() {
    let (set, eq) = setup(&[-2.0, -1.0, 1.0, 2.0]);
    let group = fit_circles(&set, &eq, None).unwrap().group;
    let z = Complex64::new(0.0, 0.0);
    let sums = group.burnside_sum(z, 1.0, 8).unwrap();
    assert_eq!(sums.derivative.len(), 9);
    assert_eq!(sums.derivative[0], 1.0);
    let q = sums.decay_rate(2, 8).unwrap();
    assert!(q > 0.0 && q < 1.0, "{q}");
    assert!(sums.distance.windows(2).all(|w| w[1] >= w[0]));
    let m: Vec<f64> = (1..=4).map(|m| group.rm_measure(m).unwrap()).collect();
    assert!(m.windows(2).all(|w| w[1] < w[0]), "{m:?}");
    assert!(group.rm_measure(0).is_err());
}

#[test]
fn characters_multiply() {
    let (set, eq) = setup(&[-2.0, -1.0, 1.0, 2.0]);
    let group = fit_circles(&set, &eq, None).unwrap().group;
    let w = Complex64::new(0.1, 0.2);
    let chi = blaschke_character(&group, w, 6).unwrap();
    assert_eq!(chi.values.len(), 1);
    assert!((chi.values[0].norm() - 1.0).abs() < 1e-8);
    assert!(chi.distance(&chi) < 1e-15);
    let t = Character::trivial(1);
    assert!(chi.product(&t).distance(&chi) < 1e-15);
    assert!((chi.eval(&[0, 1]) - 1.0).norm() < 1e-8);
}

fn mobius() -> impl Strategy<Value = MobiusMap> {
    (0.0f64..2.0 * PI, 0.0f64..0.95, 0.0f64..2.0 * PI).prop_map(|(t, r, s)| {
        let a = Complex64::from_polar(1.0, t);
        let b = Complex64::from_polar(r, s);
        MobiusMap::new(a, b * a)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mobius_maps_preserve_the_disk(f in mobius(), g in mobius(), r in 0.0f64..0.99, t in 0.0f64..2.0 * PI) {
        let z = Complex64::from_polar(r, t);
        prop_assert!(f.apply(z).norm() < 1.0 + 1e-12);
        prop_assert!((f.inverse().apply(f.apply(z)) - z).norm() < 1e-9);
        prop_assert!((f.compose(&g).apply(z) - f.apply(g.apply(z))).norm() < 1e-9);
        let h = 1e-6;
        let fd = (f.apply(z + h) - f.apply(z - h)) / (2.0 * h);
        prop_assert!((fd - f.derivative(z)).norm() < 1e-4 * f.derivative(z).norm().max(1.0));
        let u = Complex64::from_polar(1.0, t);
        prop_assert!((f.apply(u).norm() - 1.0).abs() < 1e-12);
    }
}
