use fingap::jacobi::*;
use fingap::szego::operator_measure;
use fingap::{Equilibrium, GapSet};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn free_set() -> GapSet {
    GapSet::interval(-2.0, 2.0).unwrap()
}

fn a1_two() -> JacobiOperator {
    JacobiOperator::free().with_a(1, 2.0).unwrap()
}

#[test]
fn orthonormal_polynomials() {
    let free = JacobiOperator::free();
    assert!((orthonormal_eval(&free, 2, c(0.0, 0.0)) - c(-1.0, 0.0)).norm() < 1e-15);
    assert!((orthonormal_eval(&free, 3, c(2.0, 0.0)) - c(4.0, 0.0)).norm() < 1e-14);
    assert_eq!(orthonormal_eval(&a1_two(), 0, c(0.3, 0.7)), c(1.0, 0.0));
}

#[test]
fn truncated_spectra() {
    let free = JacobiOperator::free();
    let s = truncated_spectrum(&free, 3).unwrap();
    let r2 = 2f64.sqrt();
    for (p, e) in s.iter().zip([-r2, 0.0, r2]) {
        assert!((p.lambda - e).abs() < 1e-13);
    }
    let op = free
        .clone()
        .with_head(&[HeadOverride {
            n: 1,
            a: 1.0,
            b: 0.7,
        }])
        .unwrap();
    let s = truncated_spectrum(&op, 1).unwrap();
    assert_eq!((s[0].lambda, s[0].weight), (0.7, 1.0));
    assert!(truncated_spectrum(&op, 0).is_err());

    // eigenvalues of large truncations follow the arcsine law
    let eq = Equilibrium::new(&free_set(), 64).unwrap();
    let n = 200;
    let s = truncated_spectrum(&free, n).unwrap();
    let sup = s
        .iter()
        .enumerate()
        .map(|(k, p)| {
            ((1.0 - eq.cumulative_from_right(p.lambda)) - (k as f64 + 0.5) / n as f64).abs()
        })
        .fold(0.0, f64::max);
    assert!(sup < 1e-2, "{sup}");
}

#[test]
fn m_function_values_and_stripping() {
    let pm = MFunction::from_measure(SpectralMeasure::point_mass(0.0).unwrap());
    assert!((pm.value(c(2.0, 0.0)).unwrap() - c(-0.5, 0.0)).norm() < 1e-15);
    let free = MFunction::free();
    assert!((free.value(c(2.5, 0.0)).unwrap() - c(-0.5, 0.0)).norm() < 1e-14);
    assert!((a1_two().m_function().value(c(2.5, 0.0)).unwrap() - c(-2.0, 0.0)).norm() < 1e-13);
    let again = free.strip(1.0, 0.0, StripDirection::Forward);
    assert!((again.value(c(2.5, 0.0)).unwrap() - c(-0.5, 0.0)).norm() < 1e-14);
    let up = free.strip(2.0, 0.0, StripDirection::Reverse);
    assert!((up.value(c(2.5, 0.0)).unwrap() - c(-2.0, 0.0)).norm() < 1e-13);
}

#[test]
fn eigenvalues_off_the_set() {
    let set = free_set();
    assert!(eigenvalues_outside(&JacobiOperator::free(), &set)
        .unwrap()
        .is_empty());
    let e = 4.0 / 3f64.sqrt();
    let ev = eigenvalues_outside(&a1_two(), &set).unwrap();
    assert_eq!(ev.len(), 2);
    assert!((ev[0] + e).abs() < 1e-8 && (ev[1] - e).abs() < 1e-8);

    let two = GapSet::new(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
    let t = JacobiOperator::periodic(&[1.5, 0.5], &[0.0, 0.0]).unwrap();
    assert!(eigenvalues_outside(&t, &two).unwrap().is_empty());
    // the shifted half-line carries the Dirichlet eigenvalue at the gap centre
    let s = JacobiOperator::periodic(&[0.5, 1.5], &[0.0, 0.0]).unwrap();
    let ev = eigenvalues_outside(&s, &two).unwrap();
    assert_eq!(ev.len(), 1);
    assert!(ev[0].abs() < 1e-8);
    let det = EigenvalueDetection::detect(&s, &two).unwrap();
    assert!((det.by_poles[0].1 - 8.0 / 9.0).abs() < 1e-8, "{det:?}");
}

#[test]
fn coefficient_conditions() {
    let free = JacobiOperator::free();
    let rep = condition_report(&free, &free, 30, 0.1, std::slice::from_ref(&free)).unwrap();
    assert_eq!(rep.l1_distance, 0.0);
    assert_eq!(rep.torus_square_sum, 0.0);
    let rep = condition_report(&a1_two(), &free, 30, 0.1, std::slice::from_ref(&free)).unwrap();
    assert!((rep.l1_distance - 1.0).abs() < 1e-15);
    assert!((rep.free_square_sum - 1.0).abs() < 1e-15);
    assert!((rep.torus_distances[0] - 1.0).abs() < 1e-15);
    assert!(condition_report(&free, &free, 30, 0.1, &[]).is_err());
}

#[test]
fn stieltjes_recovers_coefficients() {
    let set = free_set();
    for op in [JacobiOperator::free(), a1_two()] {
        let mu = operator_measure(&op, &set).unwrap();
        let (a, b) = mu.jacobi_parameters(6, 400).unwrap();
        for n in 1..=6 {
            assert!((a[n - 1] - op.a(n)).abs() < 1e-8, "a_{n} = {}", a[n - 1]);
            assert!(b[n - 1].abs() < 1e-8);
        }
    }
}

fn heads() -> impl Strategy<Value = Vec<HeadOverride>> {
    prop::collection::vec((0.3f64..2.5, -1.5f64..1.5), 1..4).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (a, b))| HeadOverride { n: i + 1, a, b })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn truncation_weights_are_a_probability(h in heads(), n in 1usize..60) {
        let op = JacobiOperator::free().with_head(&h).unwrap();
        let s = truncated_spectrum(&op, n).unwrap();
        let total: f64 = s.iter().map(|p| p.weight).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(s.windows(2).all(|w| w[0].lambda < w[1].lambda));
    }

    #[test]
    fn m_is_herglotz_and_strips_back(h in heads(), re in -3.0f64..3.0, im in 0.05f64..2.0) {
        let op = JacobiOperator::free().with_head(&h).unwrap();
        let x = c(re, im);
        let m = op.m_function().value(x).unwrap();
        prop_assert!(m.im > 0.0);
        let (a1, b1) = (1.3, -0.4);
        let round = op
            .m_function()
            .strip(a1, b1, StripDirection::Reverse)
            .strip(a1, b1, StripDirection::Forward);
        prop_assert!((round.value(x).unwrap() - m).norm() < 1e-12 * m.norm().max(1.0));
        // one step of stripping: 1/m_0 = b_1 - x - a_1² m_1
        let m1 = op.stripped(1).m_function().value(x).unwrap();
        let lhs = 1.0 / m;
        prop_assert!((lhs - (op.b(1) - x - op.a(1) * op.a(1) * m1)).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn detection_methods_agree(h in heads()) {
        let set = free_set();
        let op = JacobiOperator::free().with_head(&h).unwrap();
        let ev = eigenvalues_outside(&op, &set).unwrap();
        prop_assert!(ev.iter().all(|&e| !set.contains(e)));
        let s = truncated_spectrum(&op, 400).unwrap();
        let outside = s.iter().filter(|p| p.lambda.abs() > 2.0 + 1e-3).count();
        prop_assert!(outside >= ev.iter().filter(|e| e.abs() > 2.0 + 1e-3).count());
    }
}
