//! The offset-to-fixed-point map, fractal Lagrange bases and tensor products.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::partition::{PartitionScheme, PieceId, PieceKind};
use crate::point::ExtendedPoint;
use crate::rb::{build_rb, iterate_from_zero, Evaluation, FractalFunction, RBOperator, VerticalMap};

use ExtendedPoint::Finite;

/// One function per piece: offsets `(p, q)` or scales `(s, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetTuple {
    pub bounded: Vec<ScalarFunction>,
    pub unbounded: Vec<ScalarFunction>,
}

/// Scales share the layout of offsets.
pub type ScaleTuple = OffsetTuple;

impl OffsetTuple {
    pub fn new(bounded: Vec<ScalarFunction>, unbounded: Vec<ScalarFunction>) -> Self {
        OffsetTuple { bounded, unbounded }
    }

    /// The zero tuple on the pieces of `scheme`.
    pub fn zeros(scheme: &PartitionScheme) -> Self {
        OffsetTuple {
            bounded: scheme.bounded().iter().map(|p| ScalarFunction::zero(p.domain)).collect(),
            unbounded: scheme.unbounded().iter().map(|p| ScalarFunction::zero(p.domain)).collect(),
        }
    }

    /// Constant tuple, e.g. for fixed scales.
    pub fn constants(scheme: &PartitionScheme, bounded: &[f64], unbounded: &[f64]) -> Result<Self> {
        if bounded.len() != scheme.bounded().len() || unbounded.len() != scheme.unbounded().len() {
            return Err(Error::Structural("one constant per piece is required".into()));
        }
        Ok(OffsetTuple {
            bounded: scheme
                .bounded()
                .iter()
                .zip(bounded)
                .map(|(p, &c)| ScalarFunction::constant(c, p.domain))
                .collect::<Result<_>>()?,
            unbounded: scheme
                .unbounded()
                .iter()
                .zip(unbounded)
                .map(|(p, &c)| ScalarFunction::constant(c, p.domain))
                .collect::<Result<_>>()?,
        })
    }

    pub fn get(&self, id: PieceId) -> &ScalarFunction {
        match id.kind {
            PieceKind::Bounded => &self.bounded[id.index - 1],
            PieceKind::Unbounded => &self.unbounded[id.index - 1],
        }
    }

    fn check(&self, scheme: &PartitionScheme, what: &str) -> Result<()> {
        if self.bounded.len() != scheme.bounded().len() || self.unbounded.len() != scheme.unbounded().len() {
            return Err(Error::Structural(format!("{what}: one function per piece is required")));
        }
        for id in scheme.piece_ids() {
            if !self.get(id).domain().approx_eq(&scheme.piece(id).domain, 1e-12) {
                return Err(Error::Structural(format!("{what}: domain of {id} does not match its piece")));
            }
        }
        Ok(())
    }

    /// `alpha * a + beta * b`, piecewise; polynomial kinds only.
    pub fn linear_combination(alpha: f64, a: &OffsetTuple, beta: f64, b: &OffsetTuple) -> Result<Self> {
        let combine = |x: &[ScalarFunction], y: &[ScalarFunction]| -> Result<Vec<ScalarFunction>> {
            if x.len() != y.len() {
                return Err(Error::Structural("tuples of different shapes".into()));
            }
            x.iter()
                .zip(y)
                .map(|(p, q)| ScalarFunction::linear_combination(alpha, p, beta, q))
                .collect()
        };
        Ok(OffsetTuple {
            bounded: combine(&a.bounded, &b.bounded)?,
            unbounded: combine(&a.unbounded, &b.unbounded)?,
        })
    }
}

/// The affine operator with the given scales and offsets.
pub fn affine_operator(scheme: &PartitionScheme, scales: &ScaleTuple, offsets: &OffsetTuple) -> Result<RBOperator> {
    scales.check(scheme, "scales")?;
    offsets.check(scheme, "offsets")?;
    let vm = |o: &[ScalarFunction], s: &[ScalarFunction]| -> Result<Vec<VerticalMap>> {
        o.iter()
            .zip(s)
            .map(|(o, s)| VerticalMap::affine(o.clone(), s.clone()))
            .collect()
    };
    build_rb(
        scheme.clone(),
        vm(&offsets.bounded, &scales.bounded)?,
        vm(&offsets.unbounded, &scales.unbounded)?,
    )
}

/// The fixed point `f(p, q)` of the affine operator; linear in the offsets
/// for fixed scales.
pub fn theta(scheme: &PartitionScheme, scales: &ScaleTuple, offsets: &OffsetTuple, tol: f64) -> Result<FractalFunction> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let op = affine_operator(scheme, scales, offsets)?;
    Ok(FractalFunction::recursive(Arc::new(op)).with_tolerance(tol))
}

/// Coefficients (ascending) of the Lagrange polynomial that is 1 at
/// `nodes[k]` and 0 at the other nodes.
pub fn lagrange_polynomial(nodes: &[f64], k: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for (m, &xm) in nodes.iter().enumerate() {
        if m == k {
            continue;
        }
        let d = nodes[k] - xm;
        let mut next = vec![0.0; c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i + 1] += ci / d;
            next[i] -= ci * xm / d;
        }
        c = next;
    }
    c
}

/// Interpolation nodes per piece. The order of a piece's offset polynomial is
/// the number of its nodes (a polynomial of order `d` has degree `d - 1`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeSet {
    pub bounded: Vec<Vec<f64>>,
    pub unbounded: Vec<Vec<f64>>,
}

impl NodeSet {
    pub fn get(&self, id: PieceId) -> &[f64] {
        match id.kind {
            PieceKind::Bounded => &self.bounded[id.index - 1],
            PieceKind::Unbounded => &self.unbounded[id.index - 1],
        }
    }
}

/// Declared orders per piece.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Orders {
    pub bounded: Vec<usize>,
    pub unbounded: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BasisElement {
    pub piece: PieceId,
    pub node: f64,
    pub function: FractalFunction,
}

#[derive(Debug, Clone)]
pub struct BasisSet {
    pub scheme: PartitionScheme,
    pub scales: ScaleTuple,
    pub nodes: NodeSet,
    pub elements: Vec<BasisElement>,
    pub dimension: usize,
}

impl BasisSet {
    /// Coordinates of an offset tuple: its values at the nodes.
    pub fn coefficients(&self, offsets: &OffsetTuple) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| offsets.get(e.piece).eval(Finite(e.node)))
            .collect()
    }

    /// `Σ c_k 𝔏_k(x)` with each element evaluated to `tol`.
    pub fn combine(&self, coefficients: &[f64], x: ExtendedPoint, tol: f64) -> Result<f64> {
        if coefficients.len() != self.dimension {
            return Err(Error::Argument(format!(
                "{} coefficients for a basis of dimension {}",
                coefficients.len(),
                self.dimension
            )));
        }
        let mut sum = 0.0;
        for (c, e) in coefficients.iter().zip(&self.elements) {
            if *c != 0.0 {
                sum += c * e.function.certified(x, tol)?.value;
            }
        }
        Ok(sum)
    }
}

/// Fractal Lagrange interpolants: for every node, the fixed point whose
/// offset is the Lagrange polynomial of that node on its piece and zero on
/// every other piece.
pub fn lagrange_basis(
    scheme: &PartitionScheme,
    scales: &ScaleTuple,
    orders: &Orders,
    nodes: &NodeSet,
    tol: f64,
) -> Result<BasisSet> {
    if orders.bounded.len() != scheme.bounded().len() || orders.unbounded.len() != scheme.unbounded().len() {
        return Err(Error::Structural("one order per piece is required".into()));
    }
    if nodes.bounded.len() != orders.bounded.len() || nodes.unbounded.len() != orders.unbounded.len() {
        return Err(Error::Structural("one node sequence per piece is required".into()));
    }
    let mut jobs = Vec::new();
    for id in scheme.piece_ids() {
        let order = match id.kind {
            PieceKind::Bounded => orders.bounded[id.index - 1],
            PieceKind::Unbounded => orders.unbounded[id.index - 1],
        };
        let xs = nodes.get(id);
        if xs.len() != order {
            return Err(Error::Argument(format!("{id}: order {order} but {} nodes", xs.len())));
        }
        let domain = scheme.piece(id).domain;
        if order > 1 && !domain.is_bounded() {
            return Err(Error::Argument(format!(
                "{id}: order {order} polynomials are unbounded on {domain}; use order <= 1"
            )));
        }
        for (a, &x) in xs.iter().enumerate() {
            if !x.is_finite() || !domain.contains_closure(Finite(x)) {
                return Err(Error::Argument(format!("{id}: node {x} is outside {domain}")));
            }
            if xs[..a].contains(&x) {
                return Err(Error::Argument(format!("{id}: duplicate node {x}")));
            }
        }
        for k in 0..order {
            jobs.push((id, k));
        }
    }
    let elements = jobs
        .par_iter()
        .map(|&(id, k)| {
            let xs = nodes.get(id);
            let mut offsets = OffsetTuple::zeros(scheme);
            let poly = ScalarFunction::polynomial(lagrange_polynomial(xs, k), scheme.piece(id).domain)?;
            match id.kind {
                PieceKind::Bounded => offsets.bounded[id.index - 1] = poly,
                PieceKind::Unbounded => offsets.unbounded[id.index - 1] = poly,
            }
            Ok(BasisElement {
                piece: id,
                node: xs[k],
                function: theta(scheme, scales, &offsets, tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasisSet {
        scheme: scheme.clone(),
        scales: scales.clone(),
        nodes: nodes.clone(),
        dimension: elements.len(),
        elements,
    })
}

/// `(x, x̃) -> left(x) * right(x̃)`.
#[derive(Debug, Clone)]
pub struct TensorFunction {
    pub left: FractalFunction,
    pub right: FractalFunction,
}

pub fn tensor(left: FractalFunction, right: FractalFunction) -> TensorFunction {
    TensorFunction { left, right }
}

/// Product of the two certified factor values; with factor errors at most
/// `tol` the product error is at most `tol (|l| + |r| + tol)`.
pub fn evaluate_tensor(t: &TensorFunction, x: ExtendedPoint, xt: ExtendedPoint, tol: f64) -> Result<Evaluation> {
    let l = t.left.certified(x, tol)?;
    let r = t.right.certified(xt, tol)?;
    Ok(Evaluation {
        value: l.value * r.value,
        error_bound: tol * (l.value.abs() + r.value.abs() + tol),
        depth: l.depth.max(r.depth),
    })
}

/// Distances `d(F_k, F_{k-1})` between successive iterates of the tensor
/// operator started at `0 ⊗ 0`, in the metric
/// `d(f⊗f̃, g⊗g̃) = sup|f - g| + sup|f̃ - g̃|`.
pub fn tensor_iteration_distances(a: &RBOperator, b: &RBOperator, n: usize, k: usize) -> Result<Vec<f64>> {
    let ia = iterate_from_zero(a, n, k)?;
    let ib = iterate_from_zero(b, n, k)?;
    Ok((1..=k)
        .map(|j| ia[j].sup_distance(&ia[j - 1]) + ib[j].sup_distance(&ib[j - 1]))
        .collect())
}

/// `sup |(Φf)(x)(Φ̃f̃)(x̃) - f(x)f̃(x̃)|` over a probe grid: checks that the
/// tensor of the two fixed points is fixed by the tensor operator.
pub fn tensor_residual(t: &TensorFunction, probes: usize) -> Result<f64> {
    let xs = t.left.operator().scheme().domain().grid(probes);
    let ys = t.right.operator().scheme().domain().grid(probes);
    let side = |f: &FractalFunction, pts: &[ExtendedPoint]| -> Result<Vec<(f64, f64)>> {
        pts.par_iter()
            .map(|&x| Ok((f.operator().apply_at(f, x)?, f.certified(x, f.tolerance())?.value)))
            .collect()
    };
    let l = side(&t.left, &xs)?;
    let r = side(&t.right, &ys)?;
    let mut worst = 0.0f64;
    for &(pl, fl) in &l {
        for &(pr, fr) in &r {
            worst = worst.max((pl * pr - fl * fr).abs());
        }
    }
    Ok(worst)
}
