//! Monotone homeomorphisms between intervals with inverse and derivative rules.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use crate::error::{Error, Result};
use crate::point::{ExtendedPoint, Interval};
use crate::report::ValidationReport;

use ExtendedPoint::{Finite, NegInf, PosInf};

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    /// `x -> a x + b`, `a != 0`.
    Affine { a: f64, b: f64 },
    /// `x -> (a x + b) / (c x + d)`, `ad - bc != 0`.
    Mobius { a: f64, b: f64, c: f64, d: f64 },
    /// `x -> (2/pi) atan(x)`.
    AtanScaled,
    /// `x -> tan(pi x / 2)`, defined on subsets of `[-1, 1]`.
    TanScaled,
    /// `x -> x + t`.
    Translation { t: f64 },
    /// `x -> outer(inner(x))`.
    Composition {
        outer: Box<Homeomorphism1D>,
        inner: Box<Homeomorphism1D>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// A strictly monotone bijection `domain -> codomain`.
#[derive(Debug, Clone, PartialEq)]
pub struct Homeomorphism1D {
    kind: MapKind,
    domain: Interval,
    codomain: Interval,
    increasing: bool,
}

const SLACK: f64 = 1e-12;

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn signed_marker(s: f64) -> ExtendedPoint {
    if s < 0.0 {
        NegInf
    } else {
        PosInf
    }
}

fn finite_or_none(v: f64) -> Option<ExtendedPoint> {
    v.is_finite().then_some(Finite(v))
}

/// Evaluates a non-composite kind. `dom` tells which side a Mobius pole is
/// approached from when it sits on an endpoint.
fn eval_prim(kind: &MapKind, x: ExtendedPoint, dom: &Interval) -> Option<ExtendedPoint> {
    match *kind {
        MapKind::Affine { a, b } => match x {
            Finite(v) => finite_or_none(a * v + b),
            PosInf => Some(signed_marker(a)),
            NegInf => Some(signed_marker(-a)),
        },
        MapKind::Translation { t } => match x {
            Finite(v) => finite_or_none(v + t),
            m => Some(m),
        },
        MapKind::AtanScaled => match x {
            Finite(v) => Some(Finite(FRAC_2_PI * v.atan())),
            PosInf => Some(Finite(1.0)),
            NegInf => Some(Finite(-1.0)),
        },
        MapKind::TanScaled => match x {
            Finite(1.0) => Some(PosInf),
            Finite(-1.0) => Some(NegInf),
            Finite(v) if v.abs() < 1.0 => finite_or_none((FRAC_PI_2 * v).tan()),
            _ => None,
        },
        MapKind::Mobius { a, b, c, d } => match x {
            Finite(v) => {
                let den = c * v + d;
                let num = a * v + b;
                if den == 0.0 {
                    let side = if x == dom.lo {
                        1.0
                    } else if x == dom.hi {
                        -1.0
                    } else {
                        return None;
                    };
                    Some(signed_marker(sign(num) * sign(c) * side))
                } else {
                    finite_or_none(num / den)
                }
            }
            m => {
                if c != 0.0 {
                    Some(Finite(a / c))
                } else {
                    let s = if m == PosInf { 1.0 } else { -1.0 };
                    Some(signed_marker(s * a / d))
                }
            }
        },
        MapKind::Composition { .. } => unreachable!("composition handled by caller"),
    }
}

fn inverse_prim(kind: &MapKind) -> MapKind {
    match *kind {
        MapKind::Affine { a, b } => MapKind::Affine { a: 1.0 / a, b: -b / a },
        MapKind::Translation { t } => MapKind::Translation { t: -t },
        MapKind::AtanScaled => MapKind::TanScaled,
        MapKind::TanScaled => MapKind::AtanScaled,
        MapKind::Mobius { a, b, c, d } => MapKind::Mobius { a: d, b: -b, c: -c, d: a },
        MapKind::Composition { .. } => unreachable!("composition handled by caller"),
    }
}

fn kind_increasing(kind: &MapKind) -> bool {
    match kind {
        MapKind::Affine { a, .. } => *a > 0.0,
        MapKind::Mobius { a, b, c, d } => a * d - b * c > 0.0,
        MapKind::Composition { outer, inner } => outer.increasing == inner.increasing,
        _ => true,
    }
}

impl Homeomorphism1D {
    /// Builds a map after checking parameter sanity (`a != 0`,
    /// `ad - bc != 0`, finite parameters). Pole placement is *not* checked,
    /// so the result may fail [`verify_homeomorphism`]; the named
    /// constructors add that check.
    pub fn from_parts(kind: MapKind, domain: Interval) -> Result<Self> {
        match &kind {
            MapKind::Affine { a, b } => {
                if !(a.is_finite() && b.is_finite()) || *a == 0.0 {
                    return Err(Error::Structural(format!("affine map needs finite a != 0, got a = {a}")));
                }
            }
            MapKind::Mobius { a, b, c, d } => {
                let det = a * d - b * c;
                if ![a, b, c, d].iter().all(|v| v.is_finite()) || det == 0.0 {
                    return Err(Error::Structural(format!(
                        "Mobius map needs ad - bc != 0, got ({a}, {b}, {c}, {d})"
                    )));
                }
            }
            MapKind::Translation { t } => {
                if !t.is_finite() {
                    return Err(Error::Structural("translation amount must be finite".into()));
                }
            }
            MapKind::AtanScaled => {}
            MapKind::TanScaled => {
                if domain.lo < Finite(-1.0) || domain.hi > Finite(1.0) {
                    return Err(Error::Structural(format!("tan-scaled map needs a domain inside [-1, 1], got {domain}")));
                }
            }
            MapKind::Composition { outer, inner } => {
                if !inner.domain.approx_eq(&domain, SLACK) {
                    return Err(Error::Structural("composition domain must equal the inner domain".into()));
                }
                check_chain(outer, inner)?;
            }
        }
        let increasing = kind_increasing(&kind);
        let mut map = Homeomorphism1D { kind, domain, codomain: domain, increasing };
        let ylo = map
            .forward_raw(domain.lo)
            .ok_or_else(|| Error::Singular(format!("map undefined at domain endpoint {}", domain.lo)))?;
        let yhi = map
            .forward_raw(domain.hi)
            .ok_or_else(|| Error::Singular(format!("map undefined at domain endpoint {}", domain.hi)))?;
        let (lo, hi, clo, chi) = if increasing {
            (ylo, yhi, domain.closed_lo, domain.closed_hi)
        } else {
            (yhi, ylo, domain.closed_hi, domain.closed_lo)
        };
        map.codomain = if lo <= hi {
            Interval::new(lo, hi, clo || lo == hi, chi || lo == hi)?
        } else {
            Interval::new(hi, lo, true, true)?
        };
        Ok(map)
    }

    pub fn affine(a: f64, b: f64, domain: Interval) -> Result<Self> {
        Self::from_parts(MapKind::Affine { a, b }, domain)
    }

    pub fn translation(t: f64, domain: Interval) -> Result<Self> {
        Self::from_parts(MapKind::Translation { t }, domain)
    }

    pub fn atan_scaled(domain: Interval) -> Result<Self> {
        Self::from_parts(MapKind::AtanScaled, domain)
    }

    pub fn tan_scaled(domain: Interval) -> Result<Self> {
        Self::from_parts(MapKind::TanScaled, domain)
    }

    /// Mobius map whose pole is not in the open interior of `domain`. A
    /// pole on an endpoint sends that endpoint to an end marker.
    pub fn mobius(a: f64, b: f64, c: f64, d: f64, domain: Interval) -> Result<Self> {
        if c != 0.0 {
            let pole = Finite(-d / c);
            if pole > domain.lo && pole < domain.hi {
                return Err(Error::Structural(format!("Mobius pole {pole} lies inside the domain {domain}")));
            }
        }
        Self::from_parts(MapKind::Mobius { a, b, c, d }, domain)
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn codomain(&self) -> &Interval {
        &self.codomain
    }

    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    /// Rule evaluation without the domain check. `None` signals a pole or
    /// a point outside the natural domain of the rule.
    pub fn forward_raw(&self, x: ExtendedPoint) -> Option<ExtendedPoint> {
        match &self.kind {
            MapKind::Composition { outer, inner } => outer.forward_raw(inner.forward_raw(x)?),
            k => eval_prim(k, x, &self.domain),
        }
    }

    pub fn inverse_raw(&self, y: ExtendedPoint) -> Option<ExtendedPoint> {
        match &self.kind {
            MapKind::Composition { outer, inner } => inner.inverse_raw(outer.inverse_raw(y)?),
            MapKind::Affine { a, b } => match y {
                Finite(v) => finite_or_none((v - b) / a),
                PosInf => Some(signed_marker(*a)),
                NegInf => Some(signed_marker(-*a)),
            },
            k => eval_prim(&inverse_prim(k), y, &self.codomain),
        }
    }

    pub fn apply(&self, direction: Direction, x: ExtendedPoint) -> Result<ExtendedPoint> {
        let (set, name) = match direction {
            Direction::Forward => (&self.domain, "domain"),
            Direction::Inverse => (&self.codomain, "codomain"),
        };
        if !within(set, x) {
            return Err(Error::Domain(format!("{x} is outside the {name} {set}")));
        }
        let r = match direction {
            Direction::Forward => self.forward_raw(x),
            Direction::Inverse => self.inverse_raw(x),
        };
        r.ok_or_else(|| Error::Singular(format!("evaluation at {x} hit a pole")))
    }

    pub fn forward(&self, x: ExtendedPoint) -> Result<ExtendedPoint> {
        self.apply(Direction::Forward, x)
    }

    pub fn inverse(&self, y: ExtendedPoint) -> Result<ExtendedPoint> {
        self.apply(Direction::Inverse, y)
    }

    /// Derivative at a finite point; NaN where the chain passes through an
    /// end marker.
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.kind {
            MapKind::Affine { a, .. } => *a,
            MapKind::Translation { .. } => 1.0,
            MapKind::AtanScaled => FRAC_2_PI / (1.0 + x * x),
            MapKind::TanScaled => {
                let c = (FRAC_PI_2 * x).cos();
                FRAC_PI_2 / (c * c)
            }
            MapKind::Mobius { a, b, c, d } => {
                let den = c * x + d;
                (a * d - b * c) / (den * den)
            }
            MapKind::Composition { outer, inner } => match inner.forward_raw(Finite(x)) {
                Some(Finite(y)) => outer.derivative(y) * inner.derivative(x),
                _ => f64::NAN,
            },
        }
    }

    /// Derivative of the inverse at a finite codomain point.
    pub fn inverse_derivative(&self, y: f64) -> f64 {
        match self.inverse_raw(Finite(y)) {
            Some(Finite(x)) => 1.0 / self.derivative(x),
            _ => f64::NAN,
        }
    }

    /// The inverse map `codomain -> domain`.
    pub fn inverted(&self) -> Homeomorphism1D {
        let kind = match &self.kind {
            MapKind::Composition { outer, inner } => MapKind::Composition {
                outer: Box::new(inner.inverted()),
                inner: Box::new(outer.inverted()),
            },
            k => inverse_prim(k),
        };
        Homeomorphism1D {
            kind,
            domain: self.codomain,
            codomain: self.domain,
            increasing: self.increasing,
        }
    }

    /// Restricts the map to a sub-interval of its domain.
    pub fn restricted(&self, domain: Interval) -> Result<Self> {
        if !(within(&self.domain, domain.lo) && within(&self.domain, domain.hi)) {
            return Err(Error::Structural(format!("{domain} is not inside {}", self.domain)));
        }
        let kind = match &self.kind {
            MapKind::Composition { outer, inner } => MapKind::Composition {
                outer: outer.clone(),
                inner: Box::new(inner.restricted(domain)?),
            },
            k => k.clone(),
        };
        Self::from_parts(kind, domain)
    }
}

fn check_chain(outer: &Homeomorphism1D, inner: &Homeomorphism1D) -> Result<()> {
    let c = inner.codomain;
    if within(&outer.domain, c.lo) && within(&outer.domain, c.hi) {
        Ok(())
    } else {
        Err(Error::Structural(format!(
            "inner codomain {c} is not inside the outer domain {}",
            outer.domain
        )))
    }
}

/// Closure membership with a relative slack of `1e-12` for finite points.
pub(crate) fn within(set: &Interval, x: ExtendedPoint) -> bool {
    if set.contains_closure(x) {
        return true;
    }
    match x {
        Finite(v) => {
            let near = |e: ExtendedPoint| e.is_finite() && (e.to_f64() - v).abs() <= SLACK * (1.0 + v.abs());
            near(set.lo) || near(set.hi)
        }
        _ => false,
    }
}

/// `outer ∘ inner`, with domain the inner domain.
pub fn compose(outer: &Homeomorphism1D, inner: &Homeomorphism1D) -> Result<Homeomorphism1D> {
    check_chain(outer, inner)?;
    Homeomorphism1D::from_parts(
        MapKind::Composition {
            outer: Box::new(outer.clone()),
            inner: Box::new(inner.clone()),
        },
        inner.domain,
    )
}

/// Numerically certifies that `map` is a monotone bijection onto its
/// recorded codomain, probing `probes` interior points.
pub fn verify_homeomorphism(map: &Homeomorphism1D, probes: usize) -> ValidationReport {
    let mut report = ValidationReport::default();
    let dom = map.domain();
    let xs = dom.interior_probes(probes.max(2));
    let mut prev: Option<ExtendedPoint> = None;
    for &x in &xs {
        let y = match map.forward_raw(x) {
            Some(y @ Finite(_)) => y,
            _ => {
                report.push("not monotone / singular", x, "rule is singular at an interior point");
                prev = None;
                continue;
            }
        };
        if let Some(p) = prev {
            let ordered = if map.is_increasing() { y > p } else { y < p };
            if !ordered {
                report.push("not monotone / singular", x, format!("monotonicity breaks: {p} then {y}"));
            }
        }
        prev = Some(y);
        if !within(map.codomain(), y) {
            report.push("codomain", x, format!("image {y} outside the recorded codomain {}", map.codomain()));
        }
        if let (Finite(xv), Some(Finite(back))) = (x, map.inverse_raw(y)) {
            if (back - xv).abs() > 1e-12 * (1.0 + xv.abs()) {
                report.push("round trip", x, format!("inverse returned {back}"));
            }
        } else if x.is_finite() {
            report.push("round trip", x, "inverse is singular at the image");
        }
    }
    // derivative against centred differences, away from the ends
    let (ca, cb) = dom.chart_bounds();
    let margin = 0.01 * (cb - ca);
    for &x in &xs {
        let Finite(xv) = x else { continue };
        let c = dom.chart(x);
        if c < ca + margin || c > cb - margin {
            continue;
        }
        let h = 1e-6 * xv.abs().max(1.0);
        let (Some(Finite(yp)), Some(Finite(ym))) = (map.forward_raw(Finite(xv + h)), map.forward_raw(Finite(xv - h)))
        else {
            continue;
        };
        let fd = (yp - ym) / (2.0 * h);
        let d = map.derivative(xv);
        if !d.is_finite() || d.abs() > 1e8 {
            continue;
        }
        if (fd - d).abs() > 1e-5 * d.abs().max(1e-300) {
            report.push("derivative", x, format!("analytic {d} vs finite difference {fd}"));
        }
    }
    for (end, name) in [(dom.lo, "lower"), (dom.hi, "upper")] {
        let expect = if (end == dom.lo) == map.is_increasing() {
            map.codomain().lo
        } else {
            map.codomain().hi
        };
        match map.forward_raw(end) {
            Some(y) if same_point(y, expect) => {}
            other => report.push(
                "endpoint correspondence",
                end,
                format!("{name} endpoint maps to {other:?}, expected {expect}"),
            ),
        }
    }
    report
}

fn same_point(a: ExtendedPoint, b: ExtendedPoint) -> bool {
    match (a, b) {
        (Finite(x), Finite(y)) => (x - y).abs() <= 1e-12 * (1.0 + x.abs()),
        _ => a == b,
    }
}
