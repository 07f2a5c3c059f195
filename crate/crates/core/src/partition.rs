//! Ambient domains and their partitions into bounded and unbounded pieces.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{within, Homeomorphism1D};
use crate::point::{squash, unsquash, ExtendedPoint, Interval};
use crate::report::ValidationReport;

use ExtendedPoint::{Finite, NegInf, PosInf};

/// Tolerance for cover and overlap checks, in compactified coordinates.
pub const PARTITION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Ambient {
    HalfLine,
    RealLine,
    Compact { lo: f64, hi: f64 },
}

impl Ambient {
    /// Compactified coordinate: the identity on compact intervals and
    /// `x / (1 + |x|)` on the half-line and the real line.
    pub fn compactify(&self, x: ExtendedPoint) -> f64 {
        match self {
            Ambient::Compact { .. } => x.to_f64(),
            _ => squash(x),
        }
    }

    pub fn decompactify(&self, c: f64) -> ExtendedPoint {
        match self {
            Ambient::Compact { .. } => Finite(c),
            Ambient::HalfLine => unsquash(c.max(0.0)),
            Ambient::RealLine => unsquash(c),
        }
    }

    pub fn chart_range(&self) -> (f64, f64) {
        match *self {
            Ambient::HalfLine => (0.0, 1.0),
            Ambient::RealLine => (-1.0, 1.0),
            Ambient::Compact { lo, hi } => (lo, hi),
        }
    }

    /// The ambient domain as an interval; end markers are closed only when
    /// `compactified` is set.
    pub fn interval(&self, compactified: bool) -> Interval {
        match *self {
            Ambient::HalfLine => Interval::new(Finite(0.0), PosInf, true, compactified),
            Ambient::RealLine => Interval::new(NegInf, PosInf, compactified, compactified),
            Ambient::Compact { lo, hi } => Interval::closed(lo, hi),
        }
        .expect("ambient interval is well formed")
    }

    pub fn unbounded_components(&self) -> usize {
        match self {
            Ambient::HalfLine => 1,
            Ambient::RealLine => 2,
            Ambient::Compact { .. } => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PieceKind {
    Bounded,
    Unbounded,
}

/// Names a branch of the operator. Indices are 1-based; ordering is
/// bounded before unbounded, then by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PieceId {
    pub kind: PieceKind,
    pub index: usize,
}

impl PieceId {
    pub fn bounded(index: usize) -> Self {
        PieceId { kind: PieceKind::Bounded, index }
    }

    pub fn unbounded(index: usize) -> Self {
        PieceId { kind: PieceKind::Unbounded, index }
    }
}

impl fmt::Display for PieceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            PieceKind::Bounded => "BOUNDED",
            PieceKind::Unbounded => "UNBOUNDED",
        };
        write!(f, "{k}#{}", self.index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub domain: Interval,
    pub map: Homeomorphism1D,
}

impl Piece {
    pub fn new(domain: Interval, map: Homeomorphism1D) -> Self {
        Piece { domain, map }
    }

    pub fn image(&self) -> &Interval {
        self.map.codomain()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ImageEntry {
    id: PieceId,
    image: Interval,
    c_lo: f64,
    c_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionScheme {
    ambient: Ambient,
    core: Option<Interval>,
    bounded: Vec<Piece>,
    unbounded: Vec<Piece>,
    permutation: Vec<usize>,
    compactified: bool,
    images: Vec<ImageEntry>,
}

impl PartitionScheme {
    /// Assembles a scheme. `core` is the set `K` (`None` for the empty set);
    /// `permutation` is 1-based. Only bookkeeping is checked here; the cover
    /// conditions are checked by [`validate_partition`].
    pub fn new(
        ambient: Ambient,
        core: Option<Interval>,
        bounded: Vec<Piece>,
        unbounded: Vec<Piece>,
        permutation: Vec<usize>,
        compactified: bool,
    ) -> Result<Self> {
        let n = unbounded.len();
        let mut seen = vec![false; n];
        if permutation.len() != n {
            return Err(Error::Structural(format!(
                "permutation has length {} but there are {n} unbounded pieces",
                permutation.len()
            )));
        }
        for &p in &permutation {
            if p == 0 || p > n || seen[p - 1] {
                return Err(Error::Structural(format!("{permutation:?} is not a permutation of 1..{n}")));
            }
            seen[p - 1] = true;
        }
        let whole = ambient.interval(true);
        match (&ambient, &core) {
            (_, None) if !bounded.is_empty() => {
                return Err(Error::Structural("bounded pieces need a nonempty K".into()));
            }
            (_, Some(k)) if !k.is_bounded() => {
                return Err(Error::Structural(format!("K = {k} must be bounded")));
            }
            (_, Some(k)) if !(within(&whole, k.lo) && within(&whole, k.hi)) => {
                return Err(Error::Structural(format!("K = {k} is not inside the ambient domain")));
            }
            (Ambient::Compact { lo, hi }, k) => {
                let full = Interval::closed(*lo, *hi)?;
                if !k.map(|k| k.approx_eq(&full, 1e-12)).unwrap_or(false) || n > 0 {
                    return Err(Error::Structural(
                        "a compact ambient has no unbounded components: K must be the whole interval and n = 0".into(),
                    ));
                }
            }
            (Ambient::HalfLine, Some(k)) if k.lo != Finite(0.0) => {
                return Err(Error::Structural(format!(
                    "K = {k} leaves a bounded component of the half-line uncovered"
                )));
            }
            _ => {}
        }
        if core.is_none() && n == 1 && permutation != [1] {
            return Err(Error::Structural("with K empty and a single end the permutation is the identity".into()));
        }
        for p in bounded.iter().chain(&unbounded) {
            let marker_closed = (!p.domain.lo.is_finite() && p.domain.closed_lo) || (!p.domain.hi.is_finite() && p.domain.closed_hi);
            if marker_closed && !compactified {
                return Err(Error::Structural(format!(
                    "piece {} closes an end marker but the scheme is not compactified",
                    p.domain
                )));
            }
        }
        let mut images = Vec::new();
        for (family, kind) in [(&bounded, PieceKind::Bounded), (&unbounded, PieceKind::Unbounded)] {
            for (i, p) in family.iter().enumerate() {
                let image = *p.image();
                images.push(ImageEntry {
                    id: PieceId { kind, index: i + 1 },
                    image,
                    c_lo: ambient.compactify(image.lo),
                    c_hi: ambient.compactify(image.hi),
                });
            }
        }
        Ok(PartitionScheme {
            ambient,
            core,
            bounded,
            unbounded,
            permutation,
            compactified,
            images,
        })
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn core(&self) -> Option<&Interval> {
        self.core.as_ref()
    }

    pub fn bounded(&self) -> &[Piece] {
        &self.bounded
    }

    pub fn unbounded(&self) -> &[Piece] {
        &self.unbounded
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn is_compactified(&self) -> bool {
        self.compactified
    }

    pub fn domain(&self) -> Interval {
        self.ambient.interval(self.compactified)
    }

    pub fn piece(&self, id: PieceId) -> &Piece {
        match id.kind {
            PieceKind::Bounded => &self.bounded[id.index - 1],
            PieceKind::Unbounded => &self.unbounded[id.index - 1],
        }
    }

    /// All piece ids in canonical order.
    pub fn piece_ids(&self) -> impl Iterator<Item = PieceId> + '_ {
        self.images.iter().map(|e| e.id)
    }

    pub fn piece_count(&self) -> usize {
        self.images.len()
    }

    /// Finds the piece whose image contains `x`. Exact membership is tried
    /// first, then closure membership within [`PARTITION_TOL`] in
    /// compactified coordinates; ties go to the smallest piece id.
    pub fn locate(&self, x: ExtendedPoint) -> Result<PieceId> {
        if let Some(e) = self.images.iter().find(|e| e.image.contains(x)) {
            return Ok(e.id);
        }
        let c = self.ambient.compactify(x);
        self.images
            .iter()
            .find(|e| c >= e.c_lo - PARTITION_TOL && c <= e.c_hi + PARTITION_TOL)
            .map(|e| e.id)
            .ok_or_else(|| Error::Unlocatable(format!("{x} lies in no piece image")))
    }

    /// Sum of the compactified lengths of all piece images.
    pub fn image_measure(&self) -> f64 {
        self.images.iter().map(|e| e.c_hi - e.c_lo).sum()
    }

    fn targets(&self, kind: PieceKind) -> Vec<(f64, f64)> {
        let (a0, a1) = self.ambient.chart_range();
        let c = |x| self.ambient.compactify(x);
        match (kind, &self.core) {
            (PieceKind::Bounded, Some(k)) => vec![(c(k.lo), c(k.hi))],
            (PieceKind::Bounded, None) => vec![],
            (PieceKind::Unbounded, None) => vec![(a0, a1)],
            (PieceKind::Unbounded, Some(k)) => match self.ambient {
                Ambient::Compact { .. } => vec![],
                Ambient::HalfLine => vec![(c(k.hi), a1)],
                Ambient::RealLine => vec![(a0, c(k.lo)), (c(k.hi), a1)],
            },
        }
    }
}

fn mid(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

/// Checks the cover conditions: the bounded images tile `K`, the unbounded
/// images tile the complement of `K`, both without gaps and with disjoint
/// interiors (tolerance [`PARTITION_TOL`] in compactified coordinates).
/// Every piece is additionally probed on a grid of `resolution + 1` points
/// for images leaving their target and for monotonicity failures.
pub fn validate_partition(scheme: &PartitionScheme, resolution: usize) -> Result<ValidationReport> {
    for id in scheme.piece_ids() {
        let p = scheme.piece(id);
        if !p.map.domain().approx_eq(&p.domain, 1e-12) {
            return Err(Error::Structural(format!(
                "{id}: map domain {} differs from the declared piece {}",
                p.map.domain(),
                p.domain
            )));
        }
    }
    let amb = scheme.ambient;
    let mut report = ValidationReport::default();
    let tol = PARTITION_TOL;
    for kind in [PieceKind::Bounded, PieceKind::Unbounded] {
        let targets = scheme.targets(kind);
        let mut spans: Vec<(f64, f64, PieceId)> = scheme
            .images
            .iter()
            .filter(|e| e.id.kind == kind)
            .map(|e| (e.c_lo, e.c_hi, e.id))
            .collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for &(lo, hi, id) in &spans {
            if !targets.iter().any(|&(t0, t1)| lo >= t0 - tol && hi <= t1 + tol) {
                report.push(
                    "image outside target",
                    amb.decompactify(mid(lo, hi)),
                    format!("{id} image [{lo}, {hi}] (compactified) is not inside its target"),
                );
            }
        }
        for &(t0, t1) in &targets {
            let mut cursor = t0;
            let mut started = false;
            for &(lo, hi, id) in spans.iter().filter(|s| s.1 > t0 + tol && s.0 < t1 - tol) {
                if lo > cursor + tol {
                    report.push(
                        "cover gap",
                        amb.decompactify(mid(cursor, lo)),
                        format!("({cursor}, {lo}) is not covered before {id}"),
                    );
                } else if started && lo < cursor - tol {
                    let end = cursor.min(hi);
                    report.push(
                        "interior overlap",
                        amb.decompactify(mid(lo, end)),
                        format!("{id} overlaps a previous image on ({lo}, {end})"),
                    );
                }
                cursor = cursor.max(hi);
                started = true;
            }
            if cursor < t1 - tol {
                report.push("cover gap", amb.decompactify(mid(cursor, t1)), format!("({cursor}, {t1}) is not covered"));
            }
        }
        // probe grids
        for e in scheme.images.iter().filter(|e| e.id.kind == kind) {
            let piece = scheme.piece(e.id);
            let mut prev: Option<f64> = None;
            for x in piece.domain.grid(resolution.max(1)) {
                let Some(y) = piece.map.forward_raw(x) else {
                    report.push("not monotone", x, format!("{} is singular here", e.id));
                    continue;
                };
                let c = amb.compactify(y);
                if !targets.iter().any(|&(t0, t1)| c >= t0 - tol && c <= t1 + tol) {
                    report.push("image outside target", x, format!("{} sends {x} to {y}", e.id));
                }
                if let Some(p) = prev {
                    let ordered = if piece.map.is_increasing() { c >= p } else { c <= p };
                    if !ordered {
                        report.push("not monotone", x, format!("{} reverses order near {x}", e.id));
                    }
                }
                prev = Some(c);
            }
        }
    }
    Ok(report)
}
