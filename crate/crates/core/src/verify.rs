//! Invariant suites run by `fraxterp verify`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::local_ifs::{apply_floc, build_local_ifs, graph_invariance, CellSet, Window};
use crate::lp::{lp_contractivity, QuadratureRule};
use crate::maps::verify_homeomorphism;
use crate::point::ExtendedPoint;
use crate::rb::{fixed_point, successive_differences, FractalFunction, RBOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// Reported quantity without a pass/fail meaning for the scenario.
    Info,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        let outcome = if passed { Outcome::Pass } else { Outcome::Fail };
        Check { name: name.into(), outcome, detail }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.outcome != Outcome::Fail)
}

pub fn format_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    checks
        .iter()
        .map(|c| format!("{:<width$}  {}  {}\n", c.name, c.outcome, c.detail))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityDefect {
    /// `sup |f(map(x)) - v(x, f(x))|` over the probes.
    pub defect: f64,
    /// Change of the same expression when both arguments move by a few
    /// units in the last place.
    pub rounding: f64,
}

fn nudge(v: f64) -> f64 {
    v + 4.0 * f64::EPSILON * v.abs().max(f64::MIN_POSITIVE)
}

/// Self-referential defect over interior probes of every piece, with the
/// sensitivity of `f` to last-place changes of its arguments.
pub fn self_referential_defect(f: &FractalFunction, probes: usize, tol: f64) -> Result<IdentityDefect> {
    let op = f.operator();
    let scheme = op.scheme();
    let mut out = IdentityDefect { defect: 0.0, rounding: 0.0 };
    for id in scheme.piece_ids() {
        let piece = scheme.piece(id);
        let v = op.vmap(id);
        let parts = piece
            .domain
            .interior_probes(probes)
            .par_iter()
            .map(|&x| -> Result<(f64, f64)> {
                let Some(y) = piece.map.forward_raw(x) else { return Ok((0.0, 0.0)) };
                let fy = f.certified(y, tol)?.value;
                let fx = f.certified(x, tol)?.value;
                let mut rounding = 0.0;
                if let (ExtendedPoint::Finite(a), ExtendedPoint::Finite(b)) = (x, y) {
                    let fy2 = f.certified(ExtendedPoint::Finite(nudge(b)), tol)?.value;
                    let fx2 = f.certified(ExtendedPoint::Finite(nudge(a)), tol)?.value;
                    rounding = (fy2 - fy).abs() + v.gain_at(x) * (fx2 - fx).abs();
                }
                Ok(((fy - v.eval(x, fx)).abs(), rounding))
            })
            .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0.max(b.0), a.1.max(b.1))))?;
        out.defect = out.defect.max(parts.0);
        out.rounding = out.rounding.max(parts.1);
    }
    Ok(out)
}

/// Largest ratio of successive sup-distances of Picard iterates from zero,
/// over iterations `from..=to`.
pub fn worst_rate(op: &RBOperator, n: usize, from: usize, to: usize) -> Result<f64> {
    let d = successive_differences(op, n, to + 1)?;
    Ok((from..=to)
        .filter(|&k| d[k - 1] > 1e-13)
        .map(|k| d[k] / d[k - 1])
        .fold(0.0, f64::max))
}

pub fn verify_config(cfg: &ScenarioConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let report = cfg.validate()?;
    checks.push(Check::new(
        "partition conditions",
        report.ok(),
        if report.ok() { "no violations".into() } else { report.to_string().trim().to_string() },
    ));
    let (scheme, _, _) = cfg.scheme()?;
    let mut bad = Vec::new();
    for id in scheme.piece_ids() {
        let r = verify_homeomorphism(&scheme.piece(id).map, 256);
        if !r.ok() {
            bad.push(format!("{id}: {}", r.to_string().trim()));
        }
    }
    checks.push(Check::new(
        "maps are homeomorphisms",
        bad.is_empty(),
        if bad.is_empty() { format!("{} maps", scheme.piece_count()) } else { bad.join("; ") },
    ));
    if !report.ok() {
        return Ok(checks);
    }

    let scenario = match cfg.build() {
        Ok(s) => s,
        Err(e) => {
            checks.push(Check::new("operator contractive", false, e.to_string()));
            return Ok(checks);
        }
    };
    let op = scenario.operator.clone();
    let ell = op.contraction();
    checks.push(Check::new("operator contractive", ell < 1.0, format!("contraction {ell}")));

    let tol = cfg.evaluation.tol;
    let f = FractalFunction::recursive(op.clone())
        .with_tolerance(tol)
        .with_max_depth(cfg.evaluation.max_depth);
    let residual = f.fixed_point_residual(1024)?;
    checks.push(Check::new("fixed-point residual", residual <= 3.0 * tol, format!("{residual:.3e}")));

    let d = self_referential_defect(&f, 100, tol)?;
    let allowed = 3.0 * tol + 2.0 * d.rounding;
    checks.push(Check::new(
        "self-referential identity",
        d.defect <= allowed,
        format!("{:.3e} (allowed {allowed:.3e}: 3 tol plus last-place sensitivity {:.3e})", d.defect, d.rounding),
    ));

    let grid_tol = 1e-8;
    let grid = fixed_point(op.clone(), grid_tol, cfg.evaluation.grid.min(4096))?;
    let crate::rb::EvalMode::Grid { grid: g, .. } = grid.mode() else {
        unreachable!("fixed_point returns grid mode")
    };
    let mismatch = g
        .grid()
        .par_iter()
        .zip(g.values())
        .map(|(&x, &v)| -> Result<f64> { Ok((f.certified(x, 1e-12)?.value - v).abs()) })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    let bound = grid.grid_error_bound().unwrap_or(f64::INFINITY) + tol;
    checks.push(Check {
        name: "grid vs recursive values".into(),
        outcome: Outcome::Info,
        detail: format!("{mismatch:.3e} at grid nodes (iteration bound {bound:.3e}; interpolation error is not certified)"),
    });

    let rate = worst_rate(&op, 1024, 3, 20)?;
    checks.push(Check::new(
        "convergence rate",
        rate <= ell + 0.05,
        format!("worst successive ratio {rate:.4} vs contraction {ell}"),
    ));

    checks.extend(local_ifs_checks(cfg, &op, &f)?);

    let rule = QuadratureRule::gauss(cfg.analysis.subdivisions);
    for &p in &cfg.analysis.p {
        let detail = match lp_contractivity(&op, p, &rule) {
            Ok(r) => format!(
                "criterion {:.6} ({}){}",
                r.criterion,
                if r.passes { "contractive" } else { "not certified" },
                r.reason.map(|m| format!(": {m}")).unwrap_or_default()
            ),
            Err(e) => e.to_string(),
        };
        checks.push(Check { name: format!("Lp criterion p={p}"), outcome: Outcome::Info, detail });
    }
    Ok(checks)
}

fn local_ifs_checks(cfg: &ScenarioConfig, op: &Arc<RBOperator>, f: &FractalFunction) -> Result<Vec<Check>> {
    let ifs = build_local_ifs(op);
    let window = match cfg.analysis.window {
        Some([a, b, c, d]) => Window::new(a, b, c, d)?,
        None => Window::for_operator(op, 1.05)?,
    };
    let [nx, ny] = cfg.analysis.resolution;
    let empty = CellSet::empty(window, nx, ny)?;
    let mut out = vec![Check::new(
        "F_loc of the empty set",
        apply_floc(&ifs, &empty).is_empty(),
        "empty".into(),
    )];
    let r = graph_invariance(&ifs, f, window, nx, ny)?;
    out.push(Check::new(
        "graph invariance",
        r.in_diagonals() <= 2.0,
        format!(
            "Hausdorff {:.3e} = {:.3} cell diagonals at {nx}x{ny}, {} clipped{}",
            r.hausdorff.distance,
            r.in_diagonals(),
            r.clipped,
            if ifs.is_continuous() { "" } else { ", vertical maps discontinuous" }
        ),
    ));
    Ok(out)
}
