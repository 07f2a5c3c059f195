//! TOML scenario files.
//!
//! A scenario lists the ambient domain, the bounded and unbounded pieces
//! (domain, map, scale, offset), an optional global offset `g` that piece
//! offsets may reference as `g∘map`, and an optional chart through which
//! the resulting operator is pulled back to the half-line. Unknown keys are
//! rejected.
//!
//! ```toml
//! name = "example1"
//!
//! [ambient]
//! kind = "compact"
//! lo = 0.0
//! hi = 1.0
//!
//! [offset]
//! kind = "hat"
//! center = 0.5
//! height = 0.5
//!
//! [[bounded]]
//! domain = { lo = 0.0, hi = 1.0 }
//! map = { kind = "affine", a = 0.5, b = 0.0 }
//! scale = { kind = "constant", value = 0.8 }
//! offset = { kind = "global" }
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{FnKind, ScalarFunction};
use crate::maps::Homeomorphism1D;
use crate::partition::{validate_partition, Ambient, PartitionScheme, Piece};
use crate::point::{ExtendedPoint, Interval};
use crate::rb::{build_rb, VerticalMap, VALIDATION_RESOLUTION};
use crate::report::ValidationReport;
use crate::scenario::{pullback_scenario, Provenance, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpec {
    pub lo: f64,
    pub hi: f64,
    /// Defaults to closed at finite ends and at infinite ends of a
    /// compactified scheme.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_lo: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_hi: Option<bool>,
}

impl IntervalSpec {
    pub fn closed(lo: f64, hi: f64) -> Self {
        IntervalSpec { lo, hi, closed_lo: None, closed_hi: None }
    }

    pub fn to_interval(&self, compactified: bool) -> Result<Interval> {
        let lo = ExtendedPoint::new(self.lo)?;
        let hi = ExtendedPoint::new(self.hi)?;
        let cl = self.closed_lo.unwrap_or(lo.is_finite() || compactified);
        let ch = self.closed_hi.unwrap_or(hi.is_finite() || compactified);
        Interval::new(lo, hi, cl, ch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum MapSpec {
    Affine { a: f64, b: f64 },
    Mobius { a: f64, b: f64, c: f64, d: f64 },
    AtanScaled,
    TanScaled,
    Translation { t: f64 },
}

impl MapSpec {
    pub fn build(&self, domain: Interval) -> Result<Homeomorphism1D> {
        match *self {
            MapSpec::Affine { a, b } => Homeomorphism1D::affine(a, b, domain),
            MapSpec::Mobius { a, b, c, d } => Homeomorphism1D::mobius(a, b, c, d, domain),
            MapSpec::AtanScaled => Homeomorphism1D::atan_scaled(domain),
            MapSpec::TanScaled => Homeomorphism1D::tan_scaled(domain),
            MapSpec::Translation { t } => Homeomorphism1D::translation(t, domain),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum FunctionSpec {
    Zero,
    Constant { value: f64 },
    /// Ascending coefficients.
    Polynomial { coeffs: Vec<f64> },
    Hat { center: f64, height: f64 },
    Piecewise { breakpoints: Vec<f64>, rules: Vec<FunctionSpec> },
    RationalTail { numerator: f64 },
    /// The global offset composed with the piece map; only valid as a
    /// piece offset.
    Global,
}

impl FunctionSpec {
    pub fn kind(&self) -> Result<FnKind> {
        Ok(match self {
            FunctionSpec::Zero => FnKind::Constant(0.0),
            FunctionSpec::Constant { value } => FnKind::Constant(*value),
            FunctionSpec::Polynomial { coeffs } => FnKind::Polynomial(coeffs.clone()),
            FunctionSpec::Hat { center, height } => FnKind::Hat { center: *center, height: *height },
            FunctionSpec::Piecewise { breakpoints, rules } => {
                if rules.len() != breakpoints.len() + 1 {
                    return Err(Error::Config(format!(
                        "piecewise: {} breakpoints need {} rules, got {}",
                        breakpoints.len(),
                        breakpoints.len() + 1,
                        rules.len()
                    )));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::Config("piecewise: breakpoints must increase".into()));
                }
                FnKind::Piecewise {
                    breakpoints: breakpoints.clone(),
                    rules: rules.iter().map(|r| r.kind()).collect::<Result<_>>()?,
                }
            }
            FunctionSpec::RationalTail { numerator } => FnKind::RationalTail { numerator: *numerator },
            FunctionSpec::Global => {
                return Err(Error::Config("'global' is only allowed as a piece offset".into()))
            }
        })
    }

    pub fn build(&self, domain: Interval) -> Result<ScalarFunction> {
        ScalarFunction::new(self.kind()?, domain)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub domain: IntervalSpec,
    pub map: MapSpec,
    pub scale: FunctionSpec,
    pub offset: FunctionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PullbackSpec {
    /// Map from `[0, inf]` onto the compact ambient interval.
    pub chart: MapSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationSpec {
    pub tol: f64,
    pub grid: usize,
    pub max_depth: usize,
}

impl Default for EvaluationSpec {
    fn default() -> Self {
        EvaluationSpec { tol: 1e-10, grid: 4096, max_depth: crate::rb::DEFAULT_MAX_DEPTH }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    pub p: Vec<f64>,
    pub subdivisions: usize,
    /// `[x_lo, x_hi, y_lo, y_hi]` in compactified x.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 4]>,
    pub resolution: [usize; 2],
    pub iterations: usize,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        AnalysisSpec {
            p: vec![1.0, f64::INFINITY],
            subdivisions: 256,
            window: None,
            resolution: [512, 512],
            iterations: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub compactified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
    pub ambient: Ambient,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core: Option<IntervalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bounded: Vec<PieceSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unbounded: Vec<PieceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pullback: Option<PullbackSpec>,
    #[serde(default)]
    pub evaluation: EvaluationSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn pieces(&self, specs: &[PieceSpec], family: &str) -> Result<(Vec<Piece>, Vec<VerticalMap>)> {
        let mut pieces = Vec::new();
        let mut vmaps = Vec::new();
        for (i, p) in specs.iter().enumerate() {
            let ctx = |e: Error| match e {
                Error::Config(m) => Error::Config(format!("{family}[{i}]: {m}")),
                other => other,
            };
            let domain = p.domain.to_interval(self.compactified)?;
            let map = p.map.build(domain)?;
            let offset = match &p.offset {
                FunctionSpec::Global => {
                    let g = self
                        .offset
                        .as_ref()
                        .ok_or_else(|| Error::Config(format!("{family}[{i}]: offset 'global' needs a top-level [offset]")))?;
                    let g = g.build(self.ambient.interval(self.compactified)).map_err(ctx)?;
                    ScalarFunction::composed(&g, &map)?
                }
                other => other.build(domain).map_err(ctx)?,
            };
            let scale = p.scale.build(domain).map_err(ctx)?;
            vmaps.push(VerticalMap::affine(offset, scale)?);
            pieces.push(Piece::new(domain, map));
        }
        Ok((pieces, vmaps))
    }

    /// The partition scheme with its vertical maps, before validation.
    pub fn scheme(&self) -> Result<(PartitionScheme, Vec<VerticalMap>, Vec<VerticalMap>)> {
        let (bounded, vb) = self.pieces(&self.bounded, "bounded")?;
        let (unbounded, vu) = self.pieces(&self.unbounded, "unbounded")?;
        let core = self.core.as_ref().map(|c| c.to_interval(self.compactified)).transpose()?;
        let permutation = self.permutation.clone().unwrap_or_else(|| (1..=unbounded.len()).collect());
        let scheme = PartitionScheme::new(self.ambient, core, bounded, unbounded, permutation, self.compactified)?;
        Ok((scheme, vb, vu))
    }

    /// Partition report of the scheme as declared (before any pullback).
    pub fn validate(&self) -> Result<ValidationReport> {
        let (scheme, _, _) = self.scheme()?;
        validate_partition(&scheme, VALIDATION_RESOLUTION)
    }

    pub fn build(&self) -> Result<Scenario> {
        let (scheme, vb, vu) = self.scheme()?;
        let base = Scenario {
            name: self.name.clone(),
            operator: Arc::new(build_rb(scheme, vb, vu)?),
            provenance: Provenance::Direct,
            notes: String::new(),
        };
        match &self.pullback {
            None => Ok(base),
            Some(pb) => {
                let chart = pb.chart.build(Interval::half_line(0.0, true)?)?;
                let mut s = pullback_scenario(&base, &chart)?;
                s.name = self.name.clone();
                Ok(s)
            }
        }
    }
}

/// The compact-interval example: hat offset, halving maps, scales 4/5, -3/5.
pub fn example1_config() -> ScenarioConfig {
    let piece = |b: f64, s: f64| PieceSpec {
        domain: IntervalSpec::closed(0.0, 1.0),
        map: MapSpec::Affine { a: 0.5, b },
        scale: FunctionSpec::Constant { value: s },
        offset: FunctionSpec::Global,
    };
    ScenarioConfig {
        name: "example1".into(),
        compactified: false,
        permutation: None,
        ambient: Ambient::Compact { lo: 0.0, hi: 1.0 },
        core: Some(IntervalSpec::closed(0.0, 1.0)),
        offset: Some(FunctionSpec::Hat { center: 0.5, height: 0.5 }),
        bounded: vec![piece(0.0, 0.8), piece(0.5, -0.6)],
        unbounded: vec![],
        pullback: None,
        evaluation: EvaluationSpec::default(),
        analysis: AnalysisSpec { window: Some([0.0, 1.0, -1.5, 1.5]), ..AnalysisSpec::default() },
    }
}

/// [`example1_config`] pulled back to the half-line through `1/(x+1)`.
pub fn pullback_config() -> ScenarioConfig {
    ScenarioConfig {
        name: "example1-pullback".into(),
        pullback: Some(PullbackSpec { chart: MapSpec::Mobius { a: 0.0, b: 1.0, c: 1.0, d: 1.0 } }),
        ..example1_config()
    }
}

/// The direct half-line construction.
pub fn halfline_config() -> ScenarioConfig {
    let piece = |map: MapSpec, s: f64| PieceSpec {
        domain: IntervalSpec::closed(0.0, f64::INFINITY),
        map,
        scale: FunctionSpec::Constant { value: s },
        offset: FunctionSpec::Global,
    };
    ScenarioConfig {
        name: "halfline".into(),
        compactified: false,
        permutation: Some(vec![1, 2]),
        ambient: Ambient::HalfLine,
        core: None,
        offset: Some(FunctionSpec::Piecewise {
            breakpoints: vec![0.5, 2.0],
            rules: vec![
                FunctionSpec::Polynomial { coeffs: vec![0.0, -1.0] },
                FunctionSpec::Polynomial { coeffs: vec![-1.0, 1.0] },
                FunctionSpec::RationalTail { numerator: 2.0 },
            ],
        }),
        bounded: vec![],
        unbounded: vec![
            piece(MapSpec::AtanScaled, 0.75),
            piece(MapSpec::Translation { t: 1.0 }, 0.7),
        ],
        pullback: None,
        evaluation: EvaluationSpec::default(),
        analysis: AnalysisSpec::default(),
    }
}
