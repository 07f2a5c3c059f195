//! Ready-made operators and the pullback construction.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::{FnKind, ScalarFunction};
use crate::maps::{compose, Homeomorphism1D};
use crate::partition::{Ambient, PartitionScheme, Piece};
use crate::point::{ExtendedPoint, Interval};
use crate::rb::{build_rb, Conjugacy, FractalFunction, RBOperator, VerticalKind, VerticalMap};

use ExtendedPoint::{Finite, PosInf};

#[derive(Debug, Clone)]
pub enum Provenance {
    Direct,
    Pullback { source: Arc<RBOperator>, chart: Homeomorphism1D },
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub operator: Arc<RBOperator>,
    pub provenance: Provenance,
    pub notes: String,
}

impl Scenario {
    /// The fixed point in recursive (certified) mode.
    pub fn fixed_point(&self) -> FractalFunction {
        FractalFunction::recursive(self.operator.clone())
    }
}

fn unit() -> Interval {
    Interval::closed(0.0, 1.0).expect("unit interval")
}

/// The hat `(1/2 - |x - 1/2|)_+` on `[0, 1]`.
pub fn example1_offset() -> ScalarFunction {
    ScalarFunction::hat(0.5, 0.5, unit()).expect("hat on [0,1]")
}

/// Operator on `[0, 1]` with maps `x/2`, `(x+1)/2`, offset `g∘b_j` for the
/// hat `g`, and scales `4/5`, `-3/5`.
pub fn build_example1() -> Scenario {
    build_example1_with(0.8, -0.6).expect("example data is valid")
}

/// Same partition and offset as [`build_example1`] with other constant scales.
pub fn build_example1_with(s1: f64, s2: f64) -> Result<Scenario> {
    let i = unit();
    let g = example1_offset();
    let maps = [
        Homeomorphism1D::affine(0.5, 0.0, i)?,
        Homeomorphism1D::affine(0.5, 0.5, i)?,
    ];
    let mut vmaps = Vec::new();
    for (b, s) in maps.iter().zip([s1, s2]) {
        vmaps.push(VerticalMap::affine(ScalarFunction::composed(&g, b)?, ScalarFunction::constant(s, i)?)?);
    }
    let pieces = maps.into_iter().map(|b| Piece::new(i, b)).collect();
    let scheme = PartitionScheme::new(Ambient::Compact { lo: 0.0, hi: 1.0 }, Some(i), pieces, vec![], vec![], false)?;
    Ok(Scenario {
        name: "example1".into(),
        operator: Arc::new(build_rb(scheme, vmaps, vec![])?),
        provenance: Provenance::Direct,
        notes: "hat offset on [0,1], maps x/2 and (x+1)/2, scales 4/5 and -3/5".into(),
    })
}

/// The compactifying map `j(x) = 1/(x+1)` from `[0, inf]` onto `[0, 1]`.
pub fn standard_chart() -> Homeomorphism1D {
    Homeomorphism1D::mobius(0.0, 1.0, 1.0, 1.0, Interval::half_line(0.0, true).expect("half-line"))
        .expect("j is a valid Mobius map")
}

/// Transports an operator on a compact interval to the compactified
/// half-line through `j`: pieces `j⁻¹(K_i)`, maps `j⁻¹∘b_i∘j`, offsets and
/// scales composed with `j`. The fixed point of the result is `f∘j`.
pub fn pullback_scenario(source: &Scenario, j: &Homeomorphism1D) -> Result<Scenario> {
    let src = &source.operator;
    let Ambient::Compact { lo, hi } = src.ambient() else {
        return Err(Error::Structural("pullback needs a source on a compact interval".into()));
    };
    if !j.codomain().approx_eq(&Interval::closed(lo, hi)?, 1e-12) {
        return Err(Error::Structural(format!(
            "chart codomain {} differs from the source domain [{lo}, {hi}]",
            j.codomain()
        )));
    }
    let dom = j.domain();
    if dom.lo != Finite(0.0) || dom.hi != PosInf || !dom.closed_hi {
        return Err(Error::Structural(format!("chart must be defined on [0, inf], got {dom}")));
    }
    let jinv = j.inverted();
    let mut pieces = Vec::new();
    let mut vmaps = Vec::new();
    let mut ids = Vec::new();
    for id in src.scheme().piece_ids() {
        let piece = src.scheme().piece(id);
        let (a, b) = (jinv.forward_raw(piece.domain.lo), jinv.forward_raw(piece.domain.hi));
        let (Some(a), Some(b)) = (a, b) else {
            return Err(Error::Singular(format!("chart inverse undefined on {}", piece.domain)));
        };
        let pulled = Interval::new(a.min(b), a.max(b), true, true)?;
        let jr = j.restricted(pulled)?;
        let map = compose(&jinv, &compose(&piece.map, &jr)?)?;
        let v = src.vmap(id);
        let pv = match v.kind() {
            VerticalKind::Affine { offset, scale } => {
                VerticalMap::affine(ScalarFunction::composed(offset, &jr)?, ScalarFunction::composed(scale, &jr)?)?
            }
            VerticalKind::General { rule, lip_y } => {
                let rule = rule.clone();
                let chart = jr.clone();
                VerticalMap::general(
                    Arc::new(move |x, y| {
                        let t = chart.forward_raw(ExtendedPoint::of(x)).map(|p| p.to_f64()).unwrap_or(f64::NAN);
                        rule(t, y)
                    }),
                    *lip_y,
                    pulled,
                )?
            }
        };
        pieces.push(Piece::new(pulled, map));
        vmaps.push(pv);
        ids.push(id);
    }
    let n = pieces.len();
    let scheme = PartitionScheme::new(Ambient::HalfLine, None, vec![], pieces, (1..=n).collect(), true)?;
    let op = build_rb(scheme, vec![], vmaps)?.with_conjugacy(Conjugacy {
        chart: j.clone(),
        source: src.clone(),
        pieces: ids,
    });
    Ok(Scenario {
        name: format!("{}-pullback", source.name),
        operator: Arc::new(op),
        provenance: Provenance::Pullback { source: src.clone(), chart: j.clone() },
        notes: format!("pullback of {} through j", source.name),
    })
}

/// The offset on the half-line: `|x - 1/2| - 1/2` on `[0, 2]`, `2/x` beyond.
pub fn halfline_offset() -> ScalarFunction {
    let rules = vec![
        FnKind::Polynomial(vec![0.0, -1.0]),
        FnKind::Polynomial(vec![-1.0, 1.0]),
        FnKind::RationalTail { numerator: 2.0 },
    ];
    ScalarFunction::new(
        FnKind::Piecewise { breakpoints: vec![0.5, 2.0], rules },
        Interval::half_line(0.0, false).expect("half-line"),
    )
    .expect("offset is bounded")
}

/// Direct construction on the half-line with `u₁ = (2/π) atan` onto `[0,1)`,
/// `u₂ = x + 1` onto `[1, inf)`, scales `3/4`, `7/10`.
pub fn build_halfline_global() -> Scenario {
    build_halfline_with(halfline_offset(), 0.75, 0.7).expect("half-line data is valid")
}

/// [`build_halfline_global`] with another offset `g` on `[0, inf)` and scales.
pub fn build_halfline_with(g: ScalarFunction, s1: f64, s2: f64) -> Result<Scenario> {
    let h = Interval::half_line(0.0, false)?;
    let maps = [Homeomorphism1D::atan_scaled(h)?, Homeomorphism1D::translation(1.0, h)?];
    let mut vmaps = Vec::new();
    for (u, s) in maps.iter().zip([s1, s2]) {
        vmaps.push(VerticalMap::affine(ScalarFunction::composed(&g, u)?, ScalarFunction::constant(s, h)?)?);
    }
    let pieces = maps.into_iter().map(|u| Piece::new(h, u)).collect();
    let scheme = PartitionScheme::new(Ambient::HalfLine, None, vec![], pieces, vec![1, 2], false)?;
    Ok(Scenario {
        name: "halfline".into(),
        operator: Arc::new(build_rb(scheme, vec![], vmaps)?),
        provenance: Provenance::Direct,
        notes: "maps (2/pi) atan x and x + 1 on the half-line, scales 3/4 and 7/10".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    pub sup: f64,
    pub argmax: f64,
}

/// `sup |x f(x)|` over `probes` log-spaced points of `[x_lo, x_hi]`.
pub fn decay_report(f: &FractalFunction, x_lo: f64, x_hi: f64, probes: usize) -> Result<DecayReport> {
    if f.operator().ambient().unbounded_components() == 0 {
        return Err(Error::Argument("decay needs an unbounded ambient domain".into()));
    }
    if !(x_lo >= 1.0 && x_hi > x_lo && probes >= 2) {
        return Err(Error::Argument(format!("need 1 <= x_lo < x_hi and 2+ probes, got [{x_lo}, {x_hi}], {probes}")));
    }
    let ratio = (x_hi / x_lo).ln();
    let values = (0..probes)
        .into_par_iter()
        .map(|k| {
            let x = x_lo * (ratio * k as f64 / (probes - 1) as f64).exp();
            Ok((x, (x * f.certified(Finite(x), 1e-10)?.value).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (argmax, sup) = values
        .into_iter()
        .fold((x_lo, 0.0), |best, (x, v)| if v > best.1 { (x, v) } else { best });
    Ok(DecayReport { sup, argmax })
}
