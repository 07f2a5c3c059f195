//! Points of (possibly compactified) one-dimensional domains and intervals
//! between them.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A finite real number or one of the two end markers.
///
/// The ordering is total: `NegInf < Finite(_) < PosInf`. Finite payloads are
/// never NaN when built through [`ExtendedPoint::new`].
#[derive(Debug, Clone, Copy)]
pub enum ExtendedPoint {
    NegInf,
    Finite(f64),
    PosInf,
}

use ExtendedPoint::{Finite, NegInf, PosInf};

impl ExtendedPoint {
    /// Converts an `f64`; IEEE infinities become end markers, NaN is rejected.
    pub fn new(x: f64) -> Result<Self> {
        if x.is_nan() {
            Err(Error::Argument("NaN is not a point".into()))
        } else if x == f64::INFINITY {
            Ok(PosInf)
        } else if x == f64::NEG_INFINITY {
            Ok(NegInf)
        } else {
            Ok(Finite(x))
        }
    }

    /// Infallible variant of [`ExtendedPoint::new`] for values known to be non-NaN.
    ///
    /// # Panics
    /// Panics on NaN.
    pub fn of(x: f64) -> Self {
        Self::new(x).expect("NaN passed to ExtendedPoint::of")
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Finite(x) => Some(x),
            _ => None,
        }
    }

    /// The value as an `f64`, with end markers as IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            NegInf => f64::NEG_INFINITY,
            Finite(x) => x,
            PosInf => f64::INFINITY,
        }
    }

    fn rank(self) -> i8 {
        match self {
            NegInf => -1,
            Finite(_) => 0,
            PosInf => 1,
        }
    }
}

impl PartialEq for ExtendedPoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtendedPoint {}

impl PartialOrd for ExtendedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            // -0.0 and 0.0 are the same point
            (Finite(a), Finite(b)) => a.partial_cmp(b).unwrap_or_else(|| a.total_cmp(b)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl From<f64> for ExtendedPoint {
    fn from(x: f64) -> Self {
        ExtendedPoint::of(x)
    }
}

impl fmt::Display for ExtendedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => write!(f, "-inf"),
            Finite(x) => write!(f, "{x}"),
            PosInf => write!(f, "inf"),
        }
    }
}

/// Compactifying chart `x / (1 + |x|)`, sending the end markers to `±1`.
pub fn squash(x: ExtendedPoint) -> f64 {
    match x {
        NegInf => -1.0,
        PosInf => 1.0,
        Finite(x) => x / (1.0 + x.abs()),
    }
}

/// Inverse of [`squash`] on `[-1, 1]`.
pub fn unsquash(c: f64) -> ExtendedPoint {
    if c >= 1.0 {
        PosInf
    } else if c <= -1.0 {
        NegInf
    } else {
        Finite(c / (1.0 - c.abs()))
    }
}

/// An interval with optional closed ends. End markers may only be closed
/// when the surrounding domain is compactified; that is checked by the
/// partition scheme, not here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: ExtendedPoint,
    pub hi: ExtendedPoint,
    pub closed_lo: bool,
    pub closed_hi: bool,
}

impl Interval {
    pub fn new(lo: ExtendedPoint, hi: ExtendedPoint, closed_lo: bool, closed_hi: bool) -> Result<Self> {
        if let (Finite(a), Finite(b)) = (lo, hi) {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Argument("interval endpoints must not be NaN".into()));
            }
        }
        if lo > hi {
            return Err(Error::Argument(format!("interval with lo {lo} > hi {hi}")));
        }
        if lo == hi && !(closed_lo && closed_hi) {
            return Err(Error::Argument(format!("degenerate interval at {lo} must be closed")));
        }
        Ok(Interval { lo, hi, closed_lo, closed_hi })
    }

    /// `[lo, hi]` for finite endpoints.
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(ExtendedPoint::new(lo)?, ExtendedPoint::new(hi)?, true, true)
    }

    /// `[lo, inf)`; pass `compactified = true` for `[lo, inf]`.
    pub fn half_line(lo: f64, compactified: bool) -> Result<Self> {
        Self::new(ExtendedPoint::new(lo)?, PosInf, true, compactified)
    }

    /// `[lo, hi)`.
    pub fn closed_open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(ExtendedPoint::new(lo)?, ExtendedPoint::new(hi)?, true, false)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Membership respecting open/closed ends.
    pub fn contains(&self, x: ExtendedPoint) -> bool {
        let above = if self.closed_lo { x >= self.lo } else { x > self.lo };
        let below = if self.closed_hi { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Membership in the closure (end markers included).
    pub fn contains_closure(&self, x: ExtendedPoint) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Chart coordinate used for probing and tolerances: the identity on
    /// bounded intervals, [`squash`] otherwise.
    pub fn chart(&self, x: ExtendedPoint) -> f64 {
        if self.is_bounded() {
            x.to_f64()
        } else {
            squash(x)
        }
    }

    pub fn chart_inv(&self, c: f64) -> ExtendedPoint {
        if self.is_bounded() {
            Finite(c)
        } else {
            unsquash(c)
        }
    }

    pub fn chart_bounds(&self) -> (f64, f64) {
        (self.chart(self.lo), self.chart(self.hi))
    }

    /// `n` points uniformly spaced in chart coordinates strictly inside the
    /// interval (cell midpoints of an `n`-cell partition).
    pub fn interior_probes(&self, n: usize) -> Vec<ExtendedPoint> {
        let (a, b) = self.chart_bounds();
        (0..n)
            .map(|i| self.chart_inv(a + (b - a) * (i as f64 + 0.5) / n as f64))
            .collect()
    }

    /// `n + 1` points `a + (b-a) i / n` in chart coordinates, endpoints included.
    /// The grid for `2n` contains the grid for `n`.
    pub fn grid(&self, n: usize) -> Vec<ExtendedPoint> {
        let (a, b) = self.chart_bounds();
        (0..=n)
            .map(|i| {
                if i == 0 {
                    self.lo
                } else if i == n {
                    self.hi
                } else {
                    self.chart_inv(a + (b - a) * i as f64 / n as f64)
                }
            })
            .collect()
    }

    /// Endpoint-wise equality up to `tol` in chart coordinates.
    pub fn approx_eq(&self, other: &Interval, tol: f64) -> bool {
        let close = |x: ExtendedPoint, y: ExtendedPoint| {
            x == y || (x.is_finite() && y.is_finite() && (x.to_f64() - y.to_f64()).abs() <= tol * (1.0 + x.to_f64().abs()))
        };
        close(self.lo, other.lo) && close(self.hi, other.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.closed_lo { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.closed_hi { ']' } else { ')' }
        )
    }
}
