//! Bounded scalar functions used as offsets and scale factors.

use crate::error::{Error, Result};
use crate::maps::{within, Homeomorphism1D};
use crate::point::{ExtendedPoint, Interval};

use ExtendedPoint::Finite;

#[derive(Debug, Clone, PartialEq)]
pub enum FnKind {
    Constant(f64),
    /// Ascending coefficients `c0 + c1 x + c2 x^2 + ...`.
    Polynomial(Vec<f64>),
    /// `max(height - |x - center|, 0)`.
    Hat { center: f64, height: f64 },
    /// Right-continuous piecewise rule: `rules[i]` applies on
    /// `[breakpoints[i-1], breakpoints[i])`.
    Piecewise { breakpoints: Vec<f64>, rules: Vec<FnKind> },
    /// `numerator / x`, only on domains away from zero.
    RationalTail { numerator: f64 },
    /// `outer(inner(x))`.
    Composed { outer: Box<FnKind>, inner: Homeomorphism1D },
}

impl FnKind {
    pub fn eval(&self, x: ExtendedPoint) -> f64 {
        match self {
            FnKind::Constant(c) => *c,
            FnKind::Polynomial(cs) => match x {
                Finite(v) => cs.iter().rev().fold(0.0, |acc, c| acc * v + c),
                _ if cs.len() <= 1 => cs.first().copied().unwrap_or(0.0),
                _ => f64::NAN,
            },
            FnKind::Hat { center, height } => match x {
                Finite(v) => (height - (v - center).abs()).max(0.0),
                _ => 0.0,
            },
            FnKind::Piecewise { breakpoints, rules } => {
                let i = breakpoints.partition_point(|&b| Finite(b) <= x);
                rules[i].eval(x)
            }
            FnKind::RationalTail { numerator } => match x {
                Finite(v) => numerator / v,
                _ => 0.0,
            },
            FnKind::Composed { outer, inner } => match inner.forward_raw(x) {
                Some(y) => outer.eval(y),
                None => f64::NAN,
            },
        }
    }

    /// Finite points where the rule may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            FnKind::Hat { center, height } => vec![center - height, *center, center + height],
            FnKind::Piecewise { breakpoints, rules } => {
                let mut out = breakpoints.clone();
                for r in rules {
                    out.extend(r.breakpoints());
                }
                out
            }
            FnKind::Composed { outer, inner } => outer
                .breakpoints()
                .into_iter()
                .filter(|&y| within(inner.codomain(), Finite(y)))
                .filter_map(|y| inner.inverse_raw(Finite(y)).and_then(|x| x.finite()))
                .collect(),
            _ => vec![],
        }
    }

    /// Points where the left and right limits differ by more than `tol`.
    pub fn jumps(&self, tol: f64) -> Vec<f64> {
        match self {
            FnKind::Piecewise { breakpoints, rules } => {
                let mut out: Vec<f64> = breakpoints
                    .iter()
                    .enumerate()
                    .filter(|(i, &b)| (rules[*i].eval(Finite(b)) - rules[i + 1].eval(Finite(b))).abs() > tol)
                    .map(|(_, &b)| b)
                    .collect();
                for r in rules {
                    out.extend(r.jumps(tol));
                }
                out
            }
            FnKind::Composed { outer, inner } => outer
                .jumps(tol)
                .into_iter()
                .filter_map(|y| inner.inverse_raw(Finite(y)).and_then(|x| x.finite()))
                .collect(),
            _ => vec![],
        }
    }

    fn check(&self, domain: &Interval) -> Result<()> {
        let bad = |msg: String| Err(Error::Argument(msg));
        match self {
            FnKind::Constant(c) if !c.is_finite() => bad("constant must be finite".into()),
            FnKind::Polynomial(cs) => {
                if cs.iter().any(|c| !c.is_finite()) {
                    return bad("polynomial coefficients must be finite".into());
                }
                let degree = cs.iter().rposition(|&c| c != 0.0).unwrap_or(0);
                if degree >= 1 && !domain.is_bounded() {
                    return bad(format!("a polynomial of degree {degree} is unbounded on {domain}"));
                }
                Ok(())
            }
            FnKind::Hat { center, height } if !(center.is_finite() && height.is_finite()) => {
                bad("hat parameters must be finite".into())
            }
            FnKind::RationalTail { numerator } => {
                if !numerator.is_finite() {
                    return bad("rational tail numerator must be finite".into());
                }
                if domain.contains_closure(Finite(0.0)) {
                    return bad(format!("a/x is unbounded on {domain}"));
                }
                Ok(())
            }
            FnKind::Piecewise { breakpoints, rules } => {
                if rules.len() != breakpoints.len() + 1 {
                    return bad(format!(
                        "{} breakpoints need {} rules, got {}",
                        breakpoints.len(),
                        breakpoints.len() + 1,
                        rules.len()
                    ));
                }
                if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("breakpoints must be finite and strictly increasing".into());
                }
                for (i, r) in rules.iter().enumerate() {
                    let lo = if i == 0 { domain.lo } else { Finite(breakpoints[i - 1]).max(domain.lo) };
                    let hi = if i == breakpoints.len() { domain.hi } else { Finite(breakpoints[i]).min(domain.hi) };
                    if lo < hi {
                        let closed_lo = i > 0 || domain.closed_lo;
                        let closed_hi = i < breakpoints.len() || domain.closed_hi;
                        r.check(&Interval::new(lo, hi, closed_lo, closed_hi)?)?;
                    }
                }
                Ok(())
            }
            FnKind::Composed { outer, inner } => outer.check(inner.codomain()),
            _ => Ok(()),
        }
    }
}

/// A bounded real function on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFunction {
    kind: FnKind,
    domain: Interval,
}

impl ScalarFunction {
    pub fn new(kind: FnKind, domain: Interval) -> Result<Self> {
        if let FnKind::Composed { inner, .. } = &kind {
            if !inner.domain().approx_eq(&domain, 1e-12) {
                return Err(Error::Structural(format!(
                    "composed function domain {domain} differs from the inner map domain {}",
                    inner.domain()
                )));
            }
        }
        kind.check(&domain)?;
        Ok(ScalarFunction { kind, domain })
    }

    pub fn constant(c: f64, domain: Interval) -> Result<Self> {
        Self::new(FnKind::Constant(c), domain)
    }

    pub fn polynomial(coeffs: Vec<f64>, domain: Interval) -> Result<Self> {
        Self::new(FnKind::Polynomial(coeffs), domain)
    }

    pub fn hat(center: f64, height: f64, domain: Interval) -> Result<Self> {
        Self::new(FnKind::Hat { center, height }, domain)
    }

    pub fn zero(domain: Interval) -> Self {
        ScalarFunction { kind: FnKind::Constant(0.0), domain }
    }

    /// `outer ∘ inner`; the inner map's codomain must lie in the outer domain.
    pub fn composed(outer: &ScalarFunction, inner: &Homeomorphism1D) -> Result<Self> {
        let c = inner.codomain();
        if !(within(&outer.domain, c.lo) && within(&outer.domain, c.hi)) {
            return Err(Error::Structural(format!(
                "map image {c} is not inside the function domain {}",
                outer.domain
            )));
        }
        Self::new(
            FnKind::Composed {
                outer: Box::new(outer.kind.clone()),
                inner: inner.clone(),
            },
            *inner.domain(),
        )
    }

    pub fn kind(&self) -> &FnKind {
        &self.kind
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    /// Evaluation without a domain check; end markers give the limit.
    pub fn eval(&self, x: ExtendedPoint) -> f64 {
        self.kind.eval(x)
    }

    pub fn value(&self, x: ExtendedPoint) -> Result<f64> {
        if !within(&self.domain, x) {
            return Err(Error::Domain(format!("{x} is outside {}", self.domain)));
        }
        let v = self.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Singular(format!("function is not finite at {x}")))
        }
    }

    /// Breakpoints inside the domain, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .kind
            .breakpoints()
            .into_iter()
            .filter(|&x| self.domain.contains_closure(Finite(x)))
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    pub fn jumps(&self) -> Vec<f64> {
        self.kind
            .jumps(1e-12)
            .into_iter()
            .filter(|&x| self.domain.contains_closure(Finite(x)))
            .collect()
    }

    /// Probed `sup |f|`: a grid of `n + 1` points uniform in chart
    /// coordinates (end-marker limits included), refined tenfold around
    /// every breakpoint.
    pub fn sup_abs(&self, n: usize) -> f64 {
        let n = n.max(1);
        let mut best = 0.0f64;
        for x in self.domain.grid(n) {
            best = best.max(self.eval(x).abs());
        }
        let (ca, cb) = self.domain.chart_bounds();
        let h = (cb - ca) / n as f64;
        for b in self.breakpoints() {
            let c0 = self.domain.chart(Finite(b));
            for k in -10..=10 {
                let c = c0 + k as f64 * h / 10.0;
                if c >= ca && c <= cb {
                    best = best.max(self.eval(self.domain.chart_inv(c)).abs());
                }
            }
        }
        best
    }

    /// Same rule on a sub-interval.
    pub fn restricted(&self, domain: Interval) -> Result<Self> {
        if !(within(&self.domain, domain.lo) && within(&self.domain, domain.hi)) {
            return Err(Error::Structural(format!("{domain} is not inside {}", self.domain)));
        }
        let kind = match &self.kind {
            FnKind::Composed { outer, inner } => FnKind::Composed {
                outer: outer.clone(),
                inner: inner.restricted(domain)?,
            },
            k => k.clone(),
        };
        Self::new(kind, domain)
    }

    /// Polynomial coefficients if the function is a constant or polynomial.
    pub fn as_polynomial(&self) -> Option<Vec<f64>> {
        match &self.kind {
            FnKind::Constant(c) => Some(vec![*c]),
            FnKind::Polynomial(cs) => Some(cs.clone()),
            _ => None,
        }
    }

    /// `alpha * a + beta * b` for constant or polynomial functions on the same domain.
    pub fn linear_combination(alpha: f64, a: &ScalarFunction, beta: f64, b: &ScalarFunction) -> Result<Self> {
        if a.domain != b.domain {
            return Err(Error::Structural("linear combination of functions on different domains".into()));
        }
        let (Some(pa), Some(pb)) = (a.as_polynomial(), b.as_polynomial()) else {
            return Err(Error::Argument("linear combinations are supported for polynomial kinds only".into()));
        };
        let n = pa.len().max(pb.len());
        let coeffs = (0..n)
            .map(|i| alpha * pa.get(i).copied().unwrap_or(0.0) + beta * pb.get(i).copied().unwrap_or(0.0))
            .collect();
        Self::polynomial(coeffs, a.domain)
    }
}
