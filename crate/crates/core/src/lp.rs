//! Lp contractivity: Jacobian bounds, quadrature of scale functions and the
//! three p-regime criteria.

use std::fmt;

use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::maps::Homeomorphism1D;
use crate::partition::{PieceId, PieceKind};
use crate::point::{ExtendedPoint, Interval};
use crate::rb::{FractalFunction, RBOperator};

use ExtendedPoint::{Finite, NegInf, PosInf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    Midpoint,
    GaussLegendre5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureRule {
    pub scheme: QuadratureScheme,
    pub subdivisions: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            scheme: QuadratureScheme::GaussLegendre5,
            subdivisions: 256,
        }
    }
}

impl QuadratureRule {
    pub fn gauss(subdivisions: usize) -> Self {
        QuadratureRule { scheme: QuadratureScheme::GaussLegendre5, subdivisions }
    }

    pub fn midpoint(subdivisions: usize) -> Self {
        QuadratureRule { scheme: QuadratureScheme::Midpoint, subdivisions }
    }

    fn panel(&self, g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        match self.scheme {
            QuadratureScheme::Midpoint => 2.0 * h * g(m),
            QuadratureScheme::GaussLegendre5 => {
                const X: [f64; 5] = [
                    0.0,
                    0.538_469_310_105_683_1,
                    -0.538_469_310_105_683_1,
                    0.906_179_845_938_664,
                    -0.906_179_845_938_664,
                ];
                const W: [f64; 5] = [
                    0.568_888_888_888_888_9,
                    0.478_628_670_499_366_5,
                    0.478_628_670_499_366_5,
                    0.236_926_885_056_189_1,
                    0.236_926_885_056_189_1,
                ];
                h * X.iter().zip(W).map(|(x, w)| w * g(m + h * x)).sum::<f64>()
            }
        }
    }

    fn over(&self, g: &dyn Fn(f64) -> f64, edges: &[f64]) -> f64 {
        edges.windows(2).map(|w| self.panel(g, w[0], w[1])).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JacobianBound {
    Finite(f64),
    Unbounded,
}

impl JacobianBound {
    pub fn value(self) -> f64 {
        match self {
            JacobianBound::Finite(v) => v,
            JacobianBound::Unbounded => f64::INFINITY,
        }
    }
}

impl fmt::Display for JacobianBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JacobianBound::Finite(v) => write!(f, "{v}"),
            JacobianBound::Unbounded => write!(f, "UNBOUNDED"),
        }
    }
}

const BLOWUP: f64 = 1e12;

/// Probed `sup |D map⁻¹|` over the image of `piece`, i.e. `sup 1/|map'(x)|`
/// over `x` in `piece`, refined tenfold per step towards both endpoints.
pub fn jacobian_bound(map: &Homeomorphism1D, piece: &Interval) -> JacobianBound {
    let inv = |x: ExtendedPoint| match x {
        Finite(v) => 1.0 / map.derivative(v).abs(),
        _ => f64::NAN,
    };
    let mut best = 0.0f64;
    for x in piece.interior_probes(1024) {
        let v = inv(x);
        if v.is_nan() {
            continue;
        }
        if v.is_infinite() {
            return JacobianBound::Unbounded;
        }
        best = best.max(v);
    }
    let (ca, cb) = piece.chart_bounds();
    let width = cb - ca;
    for (end, dir) in [(ca, 1.0), (cb, -1.0)] {
        let mut seq = Vec::new();
        for k in 1..=13 {
            let c = end + dir * width * 10f64.powi(-k);
            let v = inv(piece.chart_inv(c));
            if v.is_infinite() {
                return JacobianBound::Unbounded;
            }
            if v.is_finite() {
                best = best.max(v);
                seq.push(v);
            }
        }
        if let [.., prev, last] = seq[..] {
            if last > BLOWUP && last > prev {
                return JacobianBound::Unbounded;
            }
        }
    }
    JacobianBound::Finite(best)
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && !p.is_nan() {
        Ok(())
    } else {
        Err(Error::Argument(format!("p must be positive, got {p}")))
    }
}

/// Sign-change points of `g` on `edges`, located by bisection.
fn zero_crossings(g: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let h = (b - a) / n as f64;
    let mut x0 = a;
    let mut g0 = g(a);
    for i in 1..=n {
        let x1 = if i == n { b } else { a + h * i as f64 };
        let g1 = g(x1);
        if g0 * g1 < 0.0 {
            let (mut lo, mut hi, mut glo) = (x0, x1, g0);
            for _ in 0..80 {
                let m = 0.5 * (lo + hi);
                let gm = g(m);
                if gm * glo > 0.0 {
                    lo = m;
                    glo = gm;
                } else {
                    hi = m;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        x0 = x1;
        g0 = g1;
    }
    out
}

fn sorted_edges(mut edges: Vec<f64>) -> Vec<f64> {
    edges.retain(|x| x.is_finite());
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    edges
}

/// Adds panels shrinking geometrically from width `h` toward every edge
/// where `g` vanishes, so that `|g|^p` with `p < 1` is integrated
/// accurately there.
fn graded_at_zeros(g: &dyn Fn(f64) -> f64, edges: Vec<f64>, h: f64) -> Vec<f64> {
    let (Some(&lo), Some(&hi)) = (edges.first(), edges.last()) else { return edges };
    let mut out = edges.clone();
    for &e in &edges {
        if g(e).abs() > 1e-14 {
            continue;
        }
        for side in [-1.0, 1.0] {
            out.extend((0..=30).map(|j| e + side * h * 0.5f64.powi(j)).filter(|&x| x > lo && x < hi));
        }
    }
    sorted_edges(out)
}

/// `∫ |f|^p` over `piece` (Lebesgue measure). May be `+inf` when the tail
/// does not decay fast enough.
pub fn lp_integral(f: &ScalarFunction, piece: &Interval, p: f64, rule: &QuadratureRule) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        return Err(Error::Argument("the integral is not defined for p = inf; use lp_norm".into()));
    }
    let n = rule.subdivisions.max(1);
    let bps = f.breakpoints();
    match (piece.lo, piece.hi) {
        (Finite(a), Finite(b)) => {
            let signed = |x: f64| f.eval(Finite(x));
            let integrand = |x: f64| f.eval(Finite(x)).abs().powf(p);
            let mut edges: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
            edges.extend(bps.iter().copied().filter(|&x| x > a && x < b));
            edges.extend(zero_crossings(&signed, a, b, 4 * n));
            let edges = graded_at_zeros(&signed, sorted_edges(edges), (b - a) / n as f64);
            Ok(rule.over(&integrand, &edges))
        }
        (Finite(a), PosInf) => half_line_integral(&|x| f.eval(Finite(x)), a, 1.0, &bps, p, rule),
        (NegInf, Finite(b)) => half_line_integral(&|x| f.eval(Finite(x)), b, -1.0, &bps, p, rule),
        (NegInf, PosInf) => {
            let left = half_line_integral(&|x| f.eval(Finite(x)), 0.0, -1.0, &bps, p, rule)?;
            let right = half_line_integral(&|x| f.eval(Finite(x)), 0.0, 1.0, &bps, p, rule)?;
            Ok(left + right)
        }
        _ => Err(Error::Argument(format!("cannot integrate over {piece}"))),
    }
}

/// `∫ |f(a + dir s)|^p ds` over `s >= 0` via `s = t / (1 - t)`.
fn half_line_integral(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    dir: f64,
    bps: &[f64],
    p: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    let at = |s: f64| f(a + dir * s);
    let power = |s: f64| at(s).abs().powf(p);
    // tail exponent from two far samples: |f|^p ~ C s^-r
    let (s1, s2) = (2f64.powi(20), 2f64.powi(30));
    let (f1, f2) = (power(s1), power(s2));
    let rate = if f2 == 0.0 {
        f64::INFINITY
    } else {
        (f1 / f2).ln() / (s2 / s1).ln()
    };
    if !(rate > 1.0 + 1e-6) {
        return Ok(f64::INFINITY);
    }
    let n = rule.subdivisions.max(8);
    const LEVELS: i32 = 40;
    let mut edges: Vec<f64> = (0..=n).map(|i| 0.5 * i as f64 / n as f64).collect();
    let per_level = (n / 8).max(4);
    for k in 1..=LEVELS {
        let (l, r) = (1.0 - 0.5f64.powi(k), 1.0 - 0.5f64.powi(k + 1));
        edges.extend((1..=per_level).map(|i| l + (r - l) * i as f64 / per_level as f64));
    }
    let t_end = 1.0 - 0.5f64.powi(LEVELS + 1);
    let to_t = |s: f64| s / (1.0 + s);
    edges.extend(
        bps.iter()
            .map(|&x| (x - a) * dir)
            .filter(|&s| s > 0.0)
            .map(to_t)
            .filter(|&t| t < t_end),
    );
    let signed_t = |t: f64| at(t / (1.0 - t));
    edges.extend(zero_crossings(&signed_t, 0.0, 0.5, 4 * n));
    let integrand = |t: f64| {
        let w = 1.0 - t;
        power(t / w) / (w * w)
    };
    let body = rule.over(&integrand, &sorted_edges(edges));
    let s_end = t_end / (1.0 - t_end);
    let tail = if rate.is_infinite() { 0.0 } else { power(s_end) * s_end / (rate - 1.0) };
    Ok(body + tail)
}

/// `‖f‖_p` over `piece`; for `p = inf` the probed sup.
pub fn lp_norm(f: &ScalarFunction, piece: &Interval, p: f64, rule: &QuadratureRule) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        let r = f.restricted(*piece).unwrap_or_else(|_| f.clone());
        return Ok(r.sup_abs(4096));
    }
    Ok(lp_integral(f, piece, p, rule)?.powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `0 < p < 1`
    Sub,
    /// `1 <= p < inf`
    Normed,
    /// `p = inf`
    Sup,
}

impl Regime {
    pub fn of(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(if p.is_infinite() {
            Regime::Sup
        } else if p < 1.0 {
            Regime::Sub
        } else {
            Regime::Normed
        })
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Sub => "(0,1)",
            Regime::Normed => "[1,inf)",
            Regime::Sup => "{inf}",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PieceLp {
    pub piece: PieceId,
    pub jacobian: JacobianBound,
    pub scale_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpReport {
    pub p: f64,
    pub regime: Regime,
    pub pieces: Vec<PieceLp>,
    pub criterion: f64,
    /// The sup-norm contraction factor `max` over all scales, for comparison.
    pub sup_norm_factor: f64,
    pub passes: bool,
    pub reason: Option<String>,
}

/// The criterion value of `regime` for per-piece terms `(J, ‖s‖_p, kind)`.
/// The sub-unit regime sums `J ‖s‖_p^p`; the normed regime takes the
/// `1/p`-th root of that sum; the sup regime adds the maxima of the two
/// families, an empty family counting as 0.
pub fn regime_criterion(regime: Regime, p: f64, terms: &[(f64, f64, PieceKind)]) -> f64 {
    let sum = || terms.iter().map(|&(j, s, _)| j * s.powf(p)).sum::<f64>();
    match regime {
        Regime::Sub => sum(),
        Regime::Normed => sum().powf(1.0 / p),
        Regime::Sup => {
            let max_of = |k: PieceKind| {
                terms
                    .iter()
                    .filter(|t| t.2 == k)
                    .map(|t| t.1)
                    .fold(0.0, f64::max)
            };
            max_of(PieceKind::Bounded) + max_of(PieceKind::Unbounded)
        }
    }
}

/// Evaluates the Lp contractivity conditions for an affine operator.
pub fn lp_contractivity(op: &RBOperator, p: f64, rule: &QuadratureRule) -> Result<LpReport> {
    let regime = Regime::of(p)?;
    let scheme = op.scheme();
    let mut pieces = Vec::new();
    for id in scheme.piece_ids() {
        let piece = scheme.piece(id);
        let scale = op
            .vmap(id)
            .scale()
            .ok_or_else(|| Error::Argument(format!("{id}: Lp analysis needs the affine form")))?;
        pieces.push(PieceLp {
            piece: id,
            jacobian: jacobian_bound(&piece.map, &piece.domain),
            scale_norm: lp_norm(scale, &piece.domain, p, rule)?,
        });
    }
    let terms: Vec<_> = pieces
        .iter()
        .map(|q| (q.jacobian.value(), q.scale_norm, q.piece.kind))
        .collect();
    let criterion = regime_criterion(regime, p, &terms);
    let unbounded: Vec<String> = pieces
        .iter()
        .filter(|q| q.jacobian == JacobianBound::Unbounded)
        .map(|q| q.piece.to_string())
        .collect();
    let (passes, reason) = if !unbounded.is_empty() {
        (false, Some(format!("Jacobian hypothesis violated: unbounded J on {}", unbounded.join(", "))))
    } else if criterion < 1.0 {
        (true, None)
    } else {
        (false, Some(format!("criterion {criterion} >= 1")))
    };
    Ok(LpReport {
        p,
        regime,
        pieces,
        criterion,
        sup_norm_factor: op.contraction(),
        passes,
        reason,
    })
}

/// Uncertified estimate of `‖f‖_p` over `[lo, x_max]` of the ambient domain by
/// the midpoint rule on `n` cells uniform in chart coordinates.
pub fn truncated_fixed_point_norm(f: &FractalFunction, p: f64, x_max: f64, n: usize) -> Result<f64> {
    check_p(p)?;
    let dom = f.operator().scheme().domain();
    let lo = dom.lo.to_f64().max(-x_max);
    let hi = dom.hi.to_f64().min(x_max);
    let mut acc = 0.0f64;
    let h = (hi - lo) / n as f64;
    for i in 0..n {
        let x = lo + h * (i as f64 + 0.5);
        let v = f.certified(Finite(x), 1e-8)?.value.abs();
        if p.is_infinite() {
            acc = acc.max(v);
        } else {
            acc += h * v.powf(p);
        }
    }
    Ok(if p.is_infinite() { acc } else { acc.powf(1.0 / p) })
}
