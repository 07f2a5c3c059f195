use proptest::prelude::*;

use fraxterp::lp::{lp_contractivity, lp_norm, regime_criterion, QuadratureRule, Regime};
use fraxterp::rb::successive_differences;
use fraxterp::scenario::{build_example1, build_example1_with};
use fraxterp::{FnKind, Interval, PieceKind, ScalarFunction};

fn poly(coeffs: Vec<f64>, lo: f64, hi: f64) -> ScalarFunction {
    ScalarFunction::polynomial(coeffs, Interval::closed(lo, hi).unwrap()).unwrap()
}

/// Exact integral of a polynomial with non-negative coefficients over [0, 1].
fn exact_integral(coeffs: &[f64]) -> f64 {
    coeffs.iter().enumerate().map(|(k, c)| c / (k + 1) as f64).sum()
}

#[test]
fn gauss_legendre_is_exact_to_degree_nine() {
    for degree in 0..=9 {
        let coeffs: Vec<f64> = (0..=degree).map(|k| 1.0 + k as f64 * 0.5).collect();
        let f = poly(coeffs.clone(), 0.0, 1.0);
        let got = lp_norm(&f, f.domain(), 1.0, &QuadratureRule::gauss(1)).unwrap();
        let want = exact_integral(&coeffs);
        assert!(((got - want) / want).abs() <= 1e-10, "degree {degree}: {got} vs {want}");
    }
}

#[test]
fn midpoint_is_exact_for_linear_functions() {
    let f = poly(vec![0.5, 2.0], 0.0, 1.0);
    let got = lp_norm(&f, f.domain(), 1.0, &QuadratureRule::midpoint(3)).unwrap();
    assert!((got - 1.5).abs() <= 1e-14);
}

#[test]
fn doubling_subdivisions_converges() {
    let unit = Interval::closed(0.0, 1.0).unwrap();
    let functions = [
        ScalarFunction::hat(0.37, 0.4, unit).unwrap(),
        poly(vec![-0.3, 1.1, -0.8], 0.0, 1.0),
        ScalarFunction::new(
            FnKind::Piecewise { breakpoints: vec![0.3], rules: vec![FnKind::Constant(1.0), FnKind::Polynomial(vec![0.0, -2.0])] },
            unit,
        )
        .unwrap(),
    ];
    for f in &functions {
        for p in [0.5, 1.0, 2.0, 3.0] {
            let a = lp_norm(f, &unit, p, &QuadratureRule::gauss(128)).unwrap();
            let b = lp_norm(f, &unit, p, &QuadratureRule::gauss(256)).unwrap();
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-300), "p = {p}: {a} vs {b}");
        }
    }
}

#[test]
fn sup_criterion_bounds_the_measured_rate() {
    for (s1, s2) in [(0.8, -0.6), (0.3, 0.2), (-0.5, 0.45)] {
        let s = build_example1_with(s1, s2).unwrap();
        let r = lp_contractivity(&s.operator, f64::INFINITY, &QuadratureRule::default()).unwrap();
        if r.passes {
            let d = successive_differences(&s.operator, 1 << 12, 10).unwrap();
            let rate = (3..10).map(|k| d[k] / d[k - 1]).fold(0.0, f64::max);
            assert!(rate <= r.criterion + 0.05, "scales ({s1}, {s2}): {rate} vs {}", r.criterion);
        }
    }
    let r = lp_contractivity(&build_example1().operator, 2.0, &QuadratureRule::default()).unwrap();
    assert_eq!(r.regime, Regime::Normed);
    assert!((r.criterion - (2.0f64 * 0.64 + 2.0 * 0.36).sqrt()).abs() <= 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn regimes_are_consistent(
        terms in prop::collection::vec((0.5f64..4.0, 0.0f64..1.0), 1..5),
        p in 0.1f64..8.0,
    ) {
        let terms: Vec<_> = terms.into_iter().map(|(j, s)| (j, s, PieceKind::Bounded)).collect();
        let regime = Regime::of(p).unwrap();
        let c = regime_criterion(regime, p, &terms);
        let sum: f64 = terms.iter().map(|&(j, s, _)| j * s.powf(p)).sum();
        if p < 1.0 {
            prop_assert_eq!(regime, Regime::Sub);
            prop_assert!((c - sum).abs() <= 1e-12 * sum.max(1.0));
        } else {
            prop_assert_eq!(regime, Regime::Normed);
            prop_assert!((c - sum.powf(1.0 / p)).abs() <= 1e-12 * c.max(1.0));
            prop_assert_eq!(c < 1.0, sum < 1.0);
        }
    }

    #[test]
    fn norms_scale_linearly(c in -3.0f64..3.0, p in 1.0f64..6.0) {
        let f = poly(vec![0.2, -1.0, 0.7], 0.0, 2.0);
        let g = ScalarFunction::linear_combination(c, &f, 0.0, &f).unwrap();
        let rule = QuadratureRule::default();
        let nf = lp_norm(&f, f.domain(), p, &rule).unwrap();
        let ng = lp_norm(&g, g.domain(), p, &rule).unwrap();
        prop_assert!((ng - c.abs() * nf).abs() <= 1e-9 * nf.max(1.0));
    }
}
