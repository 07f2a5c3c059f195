//! Read-Bajraktarević operators, grid iteration and certified evaluation of
//! their fixed points.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::maps::Homeomorphism1D;
use crate::partition::{validate_partition, Ambient, PartitionScheme, PieceId, PieceKind};
use crate::point::{ExtendedPoint, Interval};

/// Number of probe cells used for sup estimates of scale and offset functions.
pub const SUP_PROBES: usize = 4096;
/// Resolution used by [`build_rb`] when validating the partition.
pub const VALIDATION_RESOLUTION: usize = 256;
pub const DEFAULT_MAX_DEPTH: usize = 256;

pub type VerticalRule = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum VerticalKind {
    /// `(x, y) -> rule(x, y)`, Lipschitz in `y` with constant `lip_y`.
    General { rule: VerticalRule, lip_y: f64 },
    /// `(x, y) -> offset(x) + scale(x) * y`.
    Affine { offset: ScalarFunction, scale: ScalarFunction },
}

/// The vertical part `v_j` / `w_i` of one branch of the operator.
#[derive(Clone)]
pub struct VerticalMap {
    kind: VerticalKind,
    piece_domain: Interval,
    lip: f64,
}

impl fmt::Debug for VerticalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            VerticalKind::General { lip_y, .. } => {
                write!(f, "VerticalMap::General {{ lip_y: {lip_y}, domain: {} }}", self.piece_domain)
            }
            VerticalKind::Affine { offset, scale } => f
                .debug_struct("VerticalMap::Affine")
                .field("offset", offset)
                .field("scale", scale)
                .finish(),
        }
    }
}

impl VerticalMap {
    pub fn affine(offset: ScalarFunction, scale: ScalarFunction) -> Result<Self> {
        if !offset.domain().approx_eq(scale.domain(), 1e-12) {
            return Err(Error::Structural(format!(
                "offset domain {} differs from scale domain {}",
                offset.domain(),
                scale.domain()
            )));
        }
        let lip = scale.sup_abs(SUP_PROBES);
        Ok(VerticalMap {
            piece_domain: *offset.domain(),
            kind: VerticalKind::Affine { offset, scale },
            lip,
        })
    }

    /// A general vertical map; the Lipschitz bound is spot-checked on probe
    /// triples `(x, y1, y2)` with a slack of `1e-12`.
    pub fn general(rule: VerticalRule, lip_y: f64, domain: Interval) -> Result<Self> {
        if !(lip_y.is_finite() && lip_y >= 0.0) {
            return Err(Error::Argument(format!("Lipschitz bound must be finite and non-negative, got {lip_y}")));
        }
        let ys = [-8.0, -2.5, -1.0, -0.1, 0.0, 0.3, 1.0, 3.0, 8.0];
        for x in domain.grid(32) {
            let x = x.to_f64();
            for (i, &y1) in ys.iter().enumerate() {
                for &y2 in &ys[i + 1..] {
                    let d = (rule(x, y1) - rule(x, y2)).abs();
                    if !(d <= lip_y * (y1 - y2).abs() + 1e-12) {
                        return Err(Error::Argument(format!(
                            "rule violates Lipschitz bound {lip_y} at x = {x}, y = {y1}, {y2}"
                        )));
                    }
                }
            }
        }
        Ok(VerticalMap {
            kind: VerticalKind::General { rule, lip_y },
            piece_domain: domain,
            lip: lip_y,
        })
    }

    pub fn kind(&self) -> &VerticalKind {
        &self.kind
    }

    pub fn piece_domain(&self) -> &Interval {
        &self.piece_domain
    }

    /// Effective Lipschitz constant in `y`.
    pub fn lip(&self) -> f64 {
        self.lip
    }

    pub fn offset(&self) -> Option<&ScalarFunction> {
        match &self.kind {
            VerticalKind::Affine { offset, .. } => Some(offset),
            _ => None,
        }
    }

    pub fn scale(&self) -> Option<&ScalarFunction> {
        match &self.kind {
            VerticalKind::Affine { scale, .. } => Some(scale),
            _ => None,
        }
    }

    #[inline]
    pub fn eval(&self, x: ExtendedPoint, y: f64) -> f64 {
        match &self.kind {
            VerticalKind::Affine { offset, scale } => {
                let s = scale.eval(x);
                if s == 0.0 {
                    offset.eval(x)
                } else {
                    offset.eval(x) + s * y
                }
            }
            VerticalKind::General { rule, .. } => rule(x.to_f64(), y),
        }
    }

    /// Local Lipschitz factor at `x`: `|scale(x)|` in affine form.
    #[inline]
    pub fn gain_at(&self, x: ExtendedPoint) -> f64 {
        match &self.kind {
            VerticalKind::Affine { scale, .. } => scale.eval(x).abs(),
            VerticalKind::General { lip_y, .. } => *lip_y,
        }
    }

    /// Probed `sup |v(x, 0)|`.
    pub fn offset_sup(&self, n: usize) -> f64 {
        match &self.kind {
            VerticalKind::Affine { offset, .. } => offset.sup_abs(n),
            VerticalKind::General { rule, .. } => self
                .piece_domain
                .grid(n)
                .into_iter()
                .map(|x| rule(x.to_f64(), 0.0).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Jump discontinuities of the offset or scale in `x`.
    pub fn jumps(&self) -> Vec<f64> {
        match &self.kind {
            VerticalKind::Affine { offset, scale } => {
                let mut j = offset.jumps();
                j.extend(scale.jumps());
                j
            }
            VerticalKind::General { .. } => vec![],
        }
    }
}

/// Records that an operator is conjugate to `source` through `chart`:
/// its fixed point is `source_fixed_point ∘ chart`.
#[derive(Debug, Clone)]
pub struct Conjugacy {
    pub chart: Homeomorphism1D,
    pub source: Arc<RBOperator>,
    /// Source piece for each piece of the conjugated operator, canonical order.
    pub pieces: Vec<PieceId>,
}

#[derive(Debug, Clone)]
pub struct RBOperator {
    scheme: PartitionScheme,
    bounded: Vec<VerticalMap>,
    unbounded: Vec<VerticalMap>,
    contraction: f64,
    offset_sup: f64,
    conjugacy: Option<Conjugacy>,
}

/// Assembles an operator. The partition is validated and every vertical map
/// must be contractive in `y`.
pub fn build_rb(scheme: PartitionScheme, bounded: Vec<VerticalMap>, unbounded: Vec<VerticalMap>) -> Result<RBOperator> {
    if bounded.len() != scheme.bounded().len() || unbounded.len() != scheme.unbounded().len() {
        return Err(Error::Structural(format!(
            "need {} bounded and {} unbounded vertical maps, got {} and {}",
            scheme.bounded().len(),
            scheme.unbounded().len(),
            bounded.len(),
            unbounded.len()
        )));
    }
    let report = validate_partition(&scheme, VALIDATION_RESOLUTION)?;
    if !report.ok() {
        return Err(Error::Structural(format!("partition conditions fail: {report}")));
    }
    let mut contraction = 0.0f64;
    let mut offset_sup = 0.0f64;
    for (kind, family) in [(PieceKind::Bounded, &bounded), (PieceKind::Unbounded, &unbounded)] {
        for (i, v) in family.iter().enumerate() {
            let id = PieceId { kind, index: i + 1 };
            let piece = scheme.piece(id);
            if !v.piece_domain().approx_eq(&piece.domain, 1e-12) {
                return Err(Error::Structural(format!(
                    "{id}: vertical map domain {} differs from the piece {}",
                    v.piece_domain(),
                    piece.domain
                )));
            }
            if !(v.lip() < 1.0) {
                return Err(Error::NotContractive { piece: id, sup: v.lip() });
            }
            contraction = contraction.max(v.lip());
            offset_sup = offset_sup.max(v.offset_sup(SUP_PROBES));
        }
    }
    Ok(RBOperator {
        scheme,
        bounded,
        unbounded,
        contraction,
        offset_sup,
        conjugacy: None,
    })
}

/// Successful certified evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub error_bound: f64,
    pub depth: usize,
}

impl RBOperator {
    pub fn scheme(&self) -> &PartitionScheme {
        &self.scheme
    }

    pub fn bounded_vmaps(&self) -> &[VerticalMap] {
        &self.bounded
    }

    pub fn unbounded_vmaps(&self) -> &[VerticalMap] {
        &self.unbounded
    }

    pub fn vmap(&self, id: PieceId) -> &VerticalMap {
        match id.kind {
            PieceKind::Bounded => &self.bounded[id.index - 1],
            PieceKind::Unbounded => &self.unbounded[id.index - 1],
        }
    }

    /// `max` of the vertical Lipschitz constants.
    pub fn contraction(&self) -> f64 {
        self.contraction
    }

    /// Probed `sup |Φ0|`.
    pub fn offset_sup(&self) -> f64 {
        self.offset_sup
    }

    /// A-priori bound `sup|Φ0| / (1 - ℓ)` on the fixed point.
    pub fn value_bound(&self) -> f64 {
        self.offset_sup / (1.0 - self.contraction)
    }

    pub fn conjugacy(&self) -> Option<&Conjugacy> {
        self.conjugacy.as_ref()
    }

    pub(crate) fn with_conjugacy(mut self, conjugacy: Conjugacy) -> Self {
        self.conjugacy = Some(conjugacy);
        self
    }

    pub fn ambient(&self) -> Ambient {
        self.scheme.ambient()
    }

    /// Active piece at `x` and the pulled-back point `ξ = map⁻¹(x)`.
    pub fn branch(&self, x: ExtendedPoint) -> Result<(PieceId, ExtendedPoint)> {
        let id = self.scheme.locate(x)?;
        Ok((id, self.pull_back(id, x)?))
    }

    /// `map⁻¹(x)` for the given piece, clamped into the piece domain so that
    /// boundary points located within tolerance stay admissible.
    pub fn pull_back(&self, id: PieceId, x: ExtendedPoint) -> Result<ExtendedPoint> {
        let piece = self.scheme.piece(id);
        let img = piece.image();
        let xc = x.max(img.lo).min(img.hi);
        let xi = piece
            .map
            .inverse_raw(xc)
            .ok_or_else(|| Error::Singular(format!("{id}: inverse undefined at {x}")))?;
        Ok(xi.max(piece.domain.lo).min(piece.domain.hi))
    }

    /// `(Φf)(x)` for an arbitrary function `f`.
    pub fn apply_at(&self, f: &dyn RealFunction, x: ExtendedPoint) -> Result<f64> {
        let (id, xi) = self.branch(x)?;
        Ok(self.vmap(id).eval(xi, f.value_at(xi)?))
    }

    /// Certified evaluation of the fixed point at `x` with error at most `tol`.
    pub fn evaluate(&self, x: ExtendedPoint, tol: f64, max_depth: usize) -> Result<Evaluation> {
        match &self.conjugacy {
            Some(c) => {
                let y = c
                    .chart
                    .forward_raw(x)
                    .ok_or_else(|| Error::Singular(format!("chart undefined at {x}")))?;
                c.source.evaluate(y, tol, max_depth)
            }
            None => self.evaluate_direct(x, tol, max_depth),
        }
    }

    /// Orbit expansion `f(x) = v(ξ, f(ξ))` using this operator's own maps,
    /// ignoring any recorded conjugacy.
    pub fn evaluate_direct(&self, x: ExtendedPoint, tol: f64, max_depth: usize) -> Result<Evaluation> {
        check_tol(tol)?;
        let bound = self.value_bound();
        let mut chain: Vec<(PieceId, ExtendedPoint)> = Vec::with_capacity(64);
        let mut gain = 1.0f64;
        let mut x = x;
        while gain * bound > tol {
            if chain.len() == max_depth {
                let partial = self.fold(&chain);
                return Err(Error::DepthExceeded { partial, bound: gain * bound });
            }
            let (id, xi) = self.branch(x)?;
            gain *= self.vmap(id).gain_at(xi);
            chain.push((id, xi));
            x = xi;
        }
        Ok(Evaluation {
            value: self.fold(&chain),
            error_bound: gain * bound,
            depth: chain.len(),
        })
    }

    fn fold(&self, chain: &[(PieceId, ExtendedPoint)]) -> f64 {
        chain.iter().rev().fold(0.0, |y, &(id, xi)| self.vmap(id).eval(xi, y))
    }

    /// Evaluates `f(x)` through the self-referential branch of `piece`
    /// (which must contain `x` in its image closure), i.e. as
    /// `v(ξ, f(ξ))` with `ξ` the pulled-back point.
    pub fn evaluate_through(&self, x: ExtendedPoint, piece: PieceId, tol: f64) -> Result<Evaluation> {
        if let Some(c) = &self.conjugacy {
            let pos = self.scheme.piece_ids().position(|p| p == piece).expect("piece of this scheme");
            let y = c
                .chart
                .forward_raw(x)
                .ok_or_else(|| Error::Singular(format!("chart undefined at {x}")))?;
            return c.source.evaluate_through(y, c.pieces[pos], tol);
        }
        let xi = self.pull_back(piece, x)?;
        let inner = self.evaluate(xi, tol, DEFAULT_MAX_DEPTH)?;
        let v = self.vmap(piece);
        Ok(Evaluation {
            value: v.eval(xi, inner.value),
            error_bound: v.gain_at(xi) * inner.error_bound,
            depth: inner.depth + 1,
        })
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("tolerance must be positive, got {tol}")))
    }
}

/// Anything that can be evaluated at an extended point.
pub trait RealFunction: Sync {
    fn value_at(&self, x: ExtendedPoint) -> Result<f64>;
}

/// The constant zero function.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFunction;

impl RealFunction for ZeroFunction {
    fn value_at(&self, _x: ExtendedPoint) -> Result<f64> {
        Ok(0.0)
    }
}

impl RealFunction for ScalarFunction {
    fn value_at(&self, x: ExtendedPoint) -> Result<f64> {
        let v = self.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Singular(format!("function is not finite at {x}")))
        }
    }
}

/// Samples on a grid uniform in compactified coordinates, interpolated
/// linearly in those coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    ambient: Ambient,
    c0: f64,
    h: f64,
    grid: Vec<ExtendedPoint>,
    values: Vec<f64>,
}

impl GridFunction {
    /// Grid of `n + 1` points over `domain` (given in ambient coordinates).
    pub fn from_values(ambient: Ambient, domain: &Interval, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Argument("a grid function needs at least two points".into()));
        }
        let n = values.len() - 1;
        let c0 = ambient.compactify(domain.lo);
        let c1 = ambient.compactify(domain.hi);
        let h = (c1 - c0) / n as f64;
        let grid = (0..=n)
            .map(|i| match i {
                0 => domain.lo,
                i if i == n => domain.hi,
                i => ambient.decompactify(c0 + h * i as f64),
            })
            .collect();
        Ok(GridFunction { ambient, c0, h, grid, values })
    }

    pub fn zeros(ambient: Ambient, domain: &Interval, n: usize) -> Result<Self> {
        Self::from_values(ambient, domain, vec![0.0; n.max(1) + 1])
    }

    pub fn sample(ambient: Ambient, domain: &Interval, n: usize, f: &dyn RealFunction) -> Result<Self> {
        let z = Self::zeros(ambient, domain, n)?;
        let values = z.grid.par_iter().map(|&x| f.value_at(x)).collect::<Result<Vec<_>>>()?;
        Ok(GridFunction { values, ..z })
    }

    pub fn grid(&self) -> &[ExtendedPoint] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn resolution(&self) -> usize {
        self.values.len() - 1
    }

    #[inline]
    fn locate(&self, x: ExtendedPoint) -> (usize, f64) {
        let n = self.resolution();
        let t = (self.ambient.compactify(x) - self.c0) / self.h;
        let i = (t.floor().max(0.0) as usize).min(n - 1);
        let w = (t - i as f64).clamp(0.0, 1.0);
        (i, w)
    }

    pub fn interp(&self, x: ExtendedPoint) -> f64 {
        let (i, w) = self.locate(x);
        lerp(self.values[i], self.values[i + 1], w)
    }

    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[inline]
fn lerp(a: f64, b: f64, w: f64) -> f64 {
    if w == 0.0 {
        a
    } else {
        a + w * (b - a)
    }
}

impl RealFunction for GridFunction {
    fn value_at(&self, x: ExtendedPoint) -> Result<f64> {
        Ok(self.interp(x))
    }
}

/// Per-grid-point data of `Φ` that does not depend on the iterate.
struct Stencil {
    entries: Vec<StencilEntry>,
}

struct StencilEntry {
    id: PieceId,
    xi: ExtendedPoint,
    i: usize,
    w: f64,
    affine: Option<(f64, f64)>,
}

impl Stencil {
    fn new(op: &RBOperator, f: &GridFunction) -> Result<Self> {
        let entries = f
            .grid
            .par_iter()
            .map(|&x| {
                let (id, xi) = op.branch(x)?;
                let (i, w) = f.locate(xi);
                let affine = match op.vmap(id).kind() {
                    VerticalKind::Affine { offset, scale } => Some((offset.eval(xi), scale.eval(xi))),
                    VerticalKind::General { .. } => None,
                };
                Ok(StencilEntry { id, xi, i, w, affine })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Stencil { entries })
    }

    fn apply(&self, op: &RBOperator, values: &[f64]) -> Vec<f64> {
        self.entries
            .par_iter()
            .with_min_len(1024)
            .map(|e| {
                let y = lerp(values[e.i], values[e.i + 1], e.w);
                match e.affine {
                    Some((o, s)) => o + s * y,
                    None => op.vmap(e.id).eval(e.xi, y),
                }
            })
            .collect()
    }
}

/// One application of `Φ` on a grid function (same grid).
pub fn apply_rb(op: &RBOperator, f: &GridFunction) -> Result<GridFunction> {
    let stencil = Stencil::new(op, f)?;
    Ok(GridFunction {
        values: stencil.apply(op, &f.values),
        ..f.clone()
    })
}

/// Iteration count `k` with `ℓᵏ r₀ / (1 - ℓ) <= tol`.
pub fn predicted_iterations(contraction: f64, r0: f64, tol: f64) -> usize {
    if contraction == 0.0 || r0 == 0.0 {
        return 1;
    }
    let k = ((tol * (1.0 - contraction) / r0).ln() / contraction.ln()).ceil();
    if k.is_finite() && k >= 1.0 {
        k as usize
    } else {
        1
    }
}

/// Iterates `Φ` from zero `k` times on a grid with `n + 1` points and
/// returns all iterates `Φ⁰0, ..., Φᵏ0`.
pub fn iterate_from_zero(op: &RBOperator, n: usize, k: usize) -> Result<Vec<GridFunction>> {
    let domain = op.scheme().domain();
    let mut f = GridFunction::zeros(op.ambient(), &domain, n)?;
    let stencil = Stencil::new(op, &f)?;
    let mut out = Vec::with_capacity(k + 1);
    for _ in 0..k {
        let next = stencil.apply(op, &f.values);
        out.push(f.clone());
        f.values = next;
    }
    out.push(f);
    Ok(out)
}

/// `sup |Φʲ0 - Φʲ⁻¹0|` on the grid for `j = 1..=k`.
pub fn successive_differences(op: &RBOperator, n: usize, k: usize) -> Result<Vec<f64>> {
    let domain = op.scheme().domain();
    let mut f = GridFunction::zeros(op.ambient(), &domain, n)?;
    let stencil = Stencil::new(op, &f)?;
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let next = stencil.apply(op, &f.values);
        out.push(next.iter().zip(&f.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        f.values = next;
    }
    Ok(out)
}

/// Grid approximation of the fixed point: `k` iterations from zero with `k`
/// given by [`predicted_iterations`].
pub fn fixed_point(op: Arc<RBOperator>, tol: f64, grid_resolution: usize) -> Result<FractalFunction> {
    check_tol(tol)?;
    let k = predicted_iterations(op.contraction(), op.offset_sup(), tol);
    let domain = op.scheme().domain();
    let mut f = GridFunction::zeros(op.ambient(), &domain, grid_resolution)?;
    let stencil = Stencil::new(&op, &f)?;
    for _ in 0..k {
        f.values = stencil.apply(&op, &f.values);
    }
    let next = stencil.apply(&op, &f.values);
    let residual = next
        .iter()
        .zip(&f.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(FractalFunction {
        value_bound: op.value_bound(),
        operator: op,
        mode: EvalMode::Grid { grid: f, residual, iterations: k },
        tol,
    })
}

#[derive(Debug, Clone)]
pub enum EvalMode {
    Grid {
        grid: GridFunction,
        residual: f64,
        iterations: usize,
    },
    Recursive {
        max_depth: usize,
    },
}

/// The fixed point of an operator, evaluable either from a stored grid or
/// by certified recursion.
#[derive(Debug, Clone)]
pub struct FractalFunction {
    operator: Arc<RBOperator>,
    value_bound: f64,
    mode: EvalMode,
    tol: f64,
}

impl FractalFunction {
    pub fn recursive(operator: Arc<RBOperator>) -> Self {
        FractalFunction {
            value_bound: operator.value_bound(),
            operator,
            mode: EvalMode::Recursive { max_depth: DEFAULT_MAX_DEPTH },
            tol: 1e-10,
        }
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        if let EvalMode::Recursive { max_depth: d } = &mut self.mode {
            *d = max_depth;
        }
        self
    }

    /// Default tolerance used when the function is evaluated through
    /// [`RealFunction`].
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn operator(&self) -> &Arc<RBOperator> {
        &self.operator
    }

    pub fn value_bound(&self) -> f64 {
        self.value_bound
    }

    pub fn mode(&self) -> &EvalMode {
        &self.mode
    }

    fn max_depth(&self) -> usize {
        match self.mode {
            EvalMode::Recursive { max_depth } => max_depth,
            EvalMode::Grid { .. } => DEFAULT_MAX_DEPTH,
        }
    }

    /// Value at `x`: certified to `tol` in recursive mode, interpolated in
    /// grid mode.
    pub fn evaluate(&self, x: ExtendedPoint, tol: f64) -> Result<f64> {
        match &self.mode {
            EvalMode::Grid { grid, .. } => Ok(grid.interp(x)),
            EvalMode::Recursive { max_depth } => Ok(self.operator.evaluate(x, tol, *max_depth)?.value),
        }
    }

    /// Certified evaluation regardless of mode.
    pub fn certified(&self, x: ExtendedPoint, tol: f64) -> Result<Evaluation> {
        self.operator.evaluate(x, tol, self.max_depth())
    }

    /// `residual / (1 - ℓ)` for grid mode: the distance of the stored grid
    /// from the fixed point at grid nodes, up to interpolation effects.
    pub fn grid_error_bound(&self) -> Option<f64> {
        match &self.mode {
            EvalMode::Grid { residual, .. } => Some(residual / (1.0 - self.operator.contraction())),
            EvalMode::Recursive { .. } => None,
        }
    }

    /// `sup |Φf - f|` over `probes + 1` points, computed in the coordinates
    /// in which the operator is evaluated (the source coordinates for a
    /// conjugated operator).
    pub fn fixed_point_residual(&self, probes: usize) -> Result<f64> {
        let op = &self.operator;
        let pts = op.scheme().domain().grid(probes.max(1));
        match op.conjugacy() {
            Some(c) => {
                let src = FractalFunction::recursive(c.source.clone()).with_tolerance(self.tol);
                let ys = pts
                    .iter()
                    .map(|&x| c.chart.forward_raw(x).ok_or_else(|| Error::Singular(format!("chart undefined at {x}"))))
                    .collect::<Result<Vec<_>>>()?;
                residual_at(&c.source, &src, &ys)
            }
            None => residual_at(op, self, &pts),
        }
    }
}

impl RealFunction for FractalFunction {
    fn value_at(&self, x: ExtendedPoint) -> Result<f64> {
        self.evaluate(x, self.tol)
    }
}

/// `sup |Φf(x) - f(x)|` over `probes + 1` grid points uniform in
/// compactified coordinates.
pub fn residual(op: &RBOperator, f: &dyn RealFunction, probes: usize) -> Result<f64> {
    let pts = op.scheme().domain().grid(probes.max(1));
    residual_at(op, f, &pts)
}

fn residual_at(op: &RBOperator, f: &dyn RealFunction, pts: &[ExtendedPoint]) -> Result<f64> {
    pts.par_iter()
        .map(|&x| Ok((op.apply_at(f, x)? - f.value_at(x)?).abs()))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Sample points, uniform in chart coordinates, with values; used for plotting.
pub fn sample_certified(f: &FractalFunction, n: usize, tol: f64) -> Result<Vec<(ExtendedPoint, f64)>> {
    let domain = f.operator().scheme().domain();
    let g = GridFunction::zeros(f.operator().ambient(), &domain, n)?;
    g.grid()
        .par_iter()
        .map(|&x| Ok((x, f.certified(x, tol)?.value)))
        .collect()
}
