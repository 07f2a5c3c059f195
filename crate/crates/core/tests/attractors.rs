use proptest::prelude::*;

use fraxterp::algebra::{affine_operator, OffsetTuple};
use fraxterp::local_ifs::{
    apply_floc, attractor_iterate, build_local_ifs, graph_invariance, hausdorff_distance, rasterize_graph, CellSet,
    LocalIFS, LocalMap, RasterSettings, Window,
};
use fraxterp::scenario::build_example1;
use fraxterp::{Ambient, FractalFunction, Homeomorphism1D, Interval, ScalarFunction, VerticalMap};

use std::sync::Arc;

const N: usize = 64;

fn unit_window() -> Window {
    Window::new(0.0, 1.0, -1.5, 1.5).unwrap()
}

fn cells_from(bits: &[bool]) -> CellSet {
    let mut c = CellSet::empty(unit_window(), N, N).unwrap();
    for (k, &b) in bits.iter().enumerate() {
        if b {
            c.insert(k % N, k / N);
        }
    }
    c
}

fn cell_bits(density: f64) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(prop::bool::weighted(density), N * N)
}

/// Two maps on disjoint halves of [0, 1] with y-contraction 1/2.
fn disjoint_toy() -> LocalIFS {
    let maps = [(0.0, 0.5, 0.5, 0.0, 0.25), (0.5, 1.0, 0.5, 0.5, -0.25)]
        .into_iter()
        .map(|(lo, hi, a, b, c)| {
            let d = Interval::closed(lo, hi).unwrap();
            let v = VerticalMap::affine(ScalarFunction::constant(c, d).unwrap(), ScalarFunction::constant(0.5, d).unwrap())
                .unwrap();
            LocalMap::new(d, Homeomorphism1D::affine(a, b, d).unwrap(), v)
        })
        .collect();
    LocalIFS::new(Ambient::Compact { lo: 0.0, hi: 1.0 }, maps)
}

#[test]
fn full_seed_converges_to_the_graph() {
    let s = build_example1();
    let ifs = build_local_ifs(&s.operator);
    let w = unit_window();
    let seed = CellSet::full(w, 256, 256).unwrap();
    let (limit, trace) = attractor_iterate(&ifs, &seed, 40, 0.0).unwrap();
    assert!(trace.len() >= 2);
    let graph = rasterize_graph(&ifs, &s.fixed_point(), w, 256, 256, RasterSettings::default()).unwrap();
    let d = hausdorff_distance(&limit, &graph).unwrap();
    assert!(d.distance <= 2.0 * graph.cell_diagonal(), "{} diagonals", d.distance / graph.cell_diagonal());
}

#[test]
fn zero_offsets_give_a_flat_invariant_graph() {
    let s = build_example1();
    let scheme = s.operator.scheme().clone();
    let scales = OffsetTuple::constants(&scheme, &[0.8, -0.6], &[]).unwrap();
    let op = Arc::new(affine_operator(&scheme, &scales, &OffsetTuple::zeros(&scheme)).unwrap());
    let f = FractalFunction::recursive(op.clone());
    let r = graph_invariance(&build_local_ifs(&op), &f, unit_window(), 256, 256).unwrap();
    assert!(r.in_diagonals() <= 1.0);
}

#[test]
fn disjoint_maps_act_independently() {
    let ifs = disjoint_toy();
    let w = unit_window();
    let left = {
        let mut c = CellSet::empty(w, N, N).unwrap();
        for j in 0..N {
            c.insert(5, j);
        }
        c
    };
    let right = {
        let mut c = CellSet::empty(w, N, N).unwrap();
        for j in 0..N {
            c.insert(50, j);
        }
        c
    };
    let both = left.union(&right).unwrap();
    assert_eq!(apply_floc(&ifs, &both), apply_floc(&ifs, &left).union(&apply_floc(&ifs, &right)).unwrap());
    // the left column lands in the left half only
    assert!(apply_floc(&ifs, &left).iter().all(|(i, _)| i < N / 2));
    // attractor: y = 0.5 on [0, 1/2) side fixed point c/(1-s) = 0.5 and -0.5
    let (limit, _) = attractor_iterate(&ifs, &CellSet::full(w, N, N).unwrap(), 30, 0.0).unwrap();
    for (i, j) in limit.iter() {
        let (x, y) = limit.center(i, j);
        let want = if x < 0.5 { 0.5 } else { -0.5 };
        assert!((y - want).abs() <= 2.0 * limit.cell_size().1, "({x}, {y})");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn floc_is_monotone(t in cell_bits(0.05), keep in cell_bits(0.5)) {
        let ifs = build_local_ifs(&build_example1().operator);
        let tt = cells_from(&t);
        let sub: Vec<bool> = t.iter().zip(&keep).map(|(a, b)| *a && *b).collect();
        let ss = cells_from(&sub);
        prop_assert!(ss.is_subset(&tt).unwrap());
        prop_assert!(apply_floc(&ifs, &ss).is_subset(&apply_floc(&ifs, &tt)).unwrap());
    }

    #[test]
    fn floc_preserves_unions(a in cell_bits(0.03), b in cell_bits(0.03)) {
        let ifs = build_local_ifs(&build_example1().operator);
        let (ca, cb) = (cells_from(&a), cells_from(&b));
        let lhs = apply_floc(&ifs, &ca.union(&cb).unwrap());
        let rhs = apply_floc(&ifs, &ca).union(&apply_floc(&ifs, &cb)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn hausdorff_is_a_symmetric_metric(a in cell_bits(0.02), b in cell_bits(0.02)) {
        let (ca, cb) = (cells_from(&a), cells_from(&b));
        prop_assume!(!ca.is_empty() && !cb.is_empty());
        let ab = hausdorff_distance(&ca, &cb).unwrap();
        let ba = hausdorff_distance(&cb, &ca).unwrap();
        prop_assert_eq!(ab.distance, ba.distance);
        prop_assert_eq!(hausdorff_distance(&ca, &ca).unwrap().distance, 0.0);
    }
}
