use proptest::prelude::*;

use fraxterp::algebra::{
    affine_operator, evaluate_tensor, tensor, tensor_residual, theta, OffsetTuple,
};
use fraxterp::scenario::{build_example1, build_halfline_global};
use fraxterp::{ExtendedPoint, Interval, PartitionScheme, ScalarFunction};

use ExtendedPoint::Finite;

fn example1_scheme() -> PartitionScheme {
    build_example1().operator.scheme().clone()
}

fn poly_tuple(scheme: &PartitionScheme, coeffs: &[Vec<f64>]) -> OffsetTuple {
    OffsetTuple::new(
        scheme
            .bounded()
            .iter()
            .zip(coeffs)
            .map(|(p, c)| ScalarFunction::polynomial(c.clone(), p.domain).unwrap())
            .collect(),
        vec![],
    )
}

fn coeffs() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 1..4), 2)
}

#[test]
fn theta_of_the_hat_offsets_is_the_example() {
    let scheme = example1_scheme();
    let scales = OffsetTuple::constants(&scheme, &[0.8, -0.6], &[]).unwrap();
    let e1 = build_example1();
    let offsets = OffsetTuple::new(
        e1.operator.bounded_vmaps().iter().map(|v| v.offset().unwrap().clone()).collect(),
        vec![],
    );
    let f = theta(&scheme, &scales, &offsets, 1e-10).unwrap();
    for (x, want) in [(0.25, 0.65), (0.75, -0.05)] {
        assert!((f.certified(Finite(x), 1e-10).unwrap().value - want).abs() <= 1e-9);
    }
}

#[test]
fn constant_offsets_on_the_half_line() {
    // offsets q1 = 1, q2 = 1 with scales 1/2: the fixed point is 1/(1 - 1/2) = 2
    let h = build_halfline_global();
    let scheme = h.operator.scheme().clone();
    let scales = OffsetTuple::constants(&scheme, &[], &[0.5, 0.5]).unwrap();
    let offsets = OffsetTuple::constants(&scheme, &[], &[1.0, 1.0]).unwrap();
    let f = theta(&scheme, &scales, &offsets, 1e-10).unwrap();
    for x in [0.0, 0.3, 1.0, 7.5, 1e8] {
        assert!((f.certified(Finite(x), 1e-10).unwrap().value - 2.0).abs() <= 1e-9, "{x}");
    }
}

#[test]
fn tensor_of_fixed_points_is_fixed() {
    let t = tensor(build_example1().fixed_point(), build_halfline_global().fixed_point());
    assert!(tensor_residual(&t, 24).unwrap() <= 1e-8);
    let e = evaluate_tensor(&t, Finite(0.25), Finite(2.0), 1e-10).unwrap();
    assert!((e.value - 0.65).abs() <= 1e-9);
    assert!(e.error_bound <= 1e-9);
}

#[test]
fn affine_operator_contraction_is_the_largest_scale() {
    let scheme = example1_scheme();
    let scales = OffsetTuple::constants(&scheme, &[0.3, -0.45], &[]).unwrap();
    let op = affine_operator(&scheme, &scales, &OffsetTuple::zeros(&scheme)).unwrap();
    assert_eq!(op.contraction(), 0.45);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn theta_is_linear(a in coeffs(), b in coeffs(), alpha in -1.5f64..1.5, beta in -1.5f64..1.5, x in 0.0f64..=1.0) {
        let scheme = example1_scheme();
        let scales = OffsetTuple::constants(&scheme, &[0.8, -0.6], &[]).unwrap();
        let (ta, tb) = (poly_tuple(&scheme, &a), poly_tuple(&scheme, &b));
        let tc = OffsetTuple::linear_combination(alpha, &ta, beta, &tb).unwrap();
        let v = |t: &OffsetTuple| theta(&scheme, &scales, t, 1e-10).unwrap().certified(Finite(x), 1e-10).unwrap().value;
        prop_assert!((v(&tc) - alpha * v(&ta) - beta * v(&tb)).abs() <= 5e-9);
    }

    #[test]
    fn distinct_offsets_give_distinct_functions(a in coeffs(), shift in 0.05f64..1.0) {
        // adding a constant c to every offset adds c/(1-s) at the fixed points
        // of the shared maps, so the images differ
        let scheme = example1_scheme();
        let scales = OffsetTuple::constants(&scheme, &[0.8, -0.6], &[]).unwrap();
        let ta = poly_tuple(&scheme, &a);
        let shifted: Vec<Vec<f64>> = a.iter().map(|c| {
            let mut c = c.clone();
            c[0] += shift;
            c
        }).collect();
        let tb = poly_tuple(&scheme, &shifted);
        let fa = theta(&scheme, &scales, &ta, 1e-10).unwrap();
        let fb = theta(&scheme, &scales, &tb, 1e-10).unwrap();
        let d = (fb.certified(Finite(0.0), 1e-10).unwrap().value - fa.certified(Finite(0.0), 1e-10).unwrap().value).abs();
        prop_assert!((d - shift / 0.2).abs() <= 1e-8);
    }

    #[test]
    fn tensor_evaluation_is_the_product(x in 0.0f64..=1.0, xt in 0.0f64..100.0) {
        let left = build_example1().fixed_point();
        let right = build_halfline_global().fixed_point();
        let l = left.certified(Finite(x), 1e-10).unwrap().value;
        let r = right.certified(Finite(xt), 1e-10).unwrap().value;
        let t = tensor(left, right);
        let v = evaluate_tensor(&t, Finite(x), Finite(xt), 1e-10).unwrap().value;
        prop_assert_eq!(v.to_bits(), (l * r).to_bits());
    }
}

#[test]
fn offsets_must_match_the_pieces() {
    let scheme = example1_scheme();
    let scales = OffsetTuple::constants(&scheme, &[0.8, -0.6], &[]).unwrap();
    let wrong = OffsetTuple::new(vec![ScalarFunction::zero(Interval::closed(0.0, 1.0).unwrap())], vec![]);
    assert!(theta(&scheme, &scales, &wrong, 1e-10).is_err());
}
