//! The local IFS on `X × Y` associated with an operator, discretized on
//! cell grids: the set operator, attractor iteration, Hausdorff distances
//! and the graph-invariance check.

use std::fmt;
use std::io::{self, Write};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::maps::Homeomorphism1D;
use crate::partition::{Ambient, PieceId};
use crate::point::{ExtendedPoint, Interval};
use crate::rb::{FractalFunction, RBOperator, VerticalMap};

/// One map `h(x, y) = (f(x), g(x, y))` defined on `domain × Y`.
#[derive(Debug, Clone)]
pub struct LocalMap {
    pub id: Option<PieceId>,
    pub domain: Interval,
    pub map: Homeomorphism1D,
    pub vertical: VerticalMap,
}

impl LocalMap {
    pub fn new(domain: Interval, map: Homeomorphism1D, vertical: VerticalMap) -> Self {
        LocalMap { id: None, domain, map, vertical }
    }

    /// `h(x, y)`, or `None` when `x` lies outside the domain.
    pub fn apply(&self, x: ExtendedPoint, y: f64) -> Option<(ExtendedPoint, f64)> {
        if !self.domain.contains(x) {
            return None;
        }
        let fx = self.map.forward_raw(x)?;
        Some((fx, self.vertical.eval(x, y)))
    }
}

#[derive(Debug, Clone)]
pub struct LocalIFS {
    ambient: Ambient,
    maps: Vec<LocalMap>,
    discontinuities: Vec<(usize, Vec<f64>)>,
}

impl LocalIFS {
    pub fn new(ambient: Ambient, maps: Vec<LocalMap>) -> Self {
        let discontinuities = maps
            .iter()
            .enumerate()
            .filter_map(|(k, m)| {
                let j = m.vertical.jumps();
                (!j.is_empty()).then_some((k, j))
            })
            .collect();
        LocalIFS { ambient, maps, discontinuities }
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn maps(&self) -> &[LocalMap] {
        &self.maps
    }

    /// Maps whose vertical part jumps in `x`, with the jump locations. Such
    /// maps are kept, but continuity of the graph is then not guaranteed.
    pub fn discontinuities(&self) -> &[(usize, Vec<f64>)] {
        &self.discontinuities
    }

    pub fn is_continuous(&self) -> bool {
        self.discontinuities.is_empty()
    }
}

/// The local IFS of an operator: bounded pieces first, then unbounded ones.
pub fn build_local_ifs(op: &RBOperator) -> LocalIFS {
    let scheme = op.scheme();
    let maps = scheme
        .piece_ids()
        .map(|id| {
            let piece = scheme.piece(id);
            LocalMap {
                id: Some(id),
                domain: piece.domain,
                map: piece.map.clone(),
                vertical: op.vmap(id).clone(),
            }
        })
        .collect();
    LocalIFS::new(op.ambient(), maps)
}

/// Rectangle in compactified-x and y coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Window {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        let ok = [x_lo, x_hi, y_lo, y_hi].iter().all(|v| v.is_finite()) && x_lo < x_hi && y_lo < y_hi;
        if !ok {
            return Err(Error::Argument(format!("bad window [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}]")));
        }
        Ok(Window { x_lo, x_hi, y_lo, y_hi })
    }

    /// The full chart range in x and `±margin·value_bound` in y.
    pub fn for_operator(op: &RBOperator, margin: f64) -> Result<Self> {
        let (a, b) = op.ambient().chart_range();
        let h = margin * op.value_bound().max(f64::MIN_POSITIVE);
        Window::new(a, b, -h, h)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.x_lo, self.x_hi, self.y_lo, self.y_hi)
    }
}

/// A finite set of cells of a `nx × ny` grid over a window. Cell `(i, j)`
/// has index `j·nx + i`, with `j = 0` the bottom row.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSet {
    window: Window,
    nx: usize,
    ny: usize,
    bits: FixedBitSet,
}

impl CellSet {
    pub fn empty(window: Window, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Argument(format!("resolution {nx}x{ny} is empty")));
        }
        Ok(CellSet { window, nx, ny, bits: FixedBitSet::with_capacity(nx * ny) })
    }

    pub fn full(window: Window, nx: usize, ny: usize) -> Result<Self> {
        let mut s = Self::empty(window, nx, ny)?;
        s.bits.insert_range(..);
        Ok(s)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn cell_size(&self) -> (f64, f64) {
        let w = &self.window;
        ((w.x_hi - w.x_lo) / self.nx as f64, (w.y_hi - w.y_lo) / self.ny as f64)
    }

    pub fn cell_diagonal(&self) -> f64 {
        let (dx, dy) = self.cell_size();
        dx.hypot(dy)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        assert!(i < self.nx && j < self.ny, "cell ({i}, {j}) outside {}x{}", self.nx, self.ny);
        self.bits.insert(j * self.nx + i);
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.nx && j < self.ny && self.bits.contains(j * self.nx + i)
    }

    /// Occupied cells in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits.ones().map(|k| (k % self.nx, k / self.nx))
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        let (dx, dy) = self.cell_size();
        (self.window.x_lo + dx * (i as f64 + 0.5), self.window.y_lo + dy * (j as f64 + 0.5))
    }

    /// The cell containing the chart point `(c, y)`; the upper window edges
    /// belong to the last cells.
    pub fn cell_of(&self, c: f64, y: f64) -> Option<(usize, usize)> {
        Some((self.column_of(c)?, self.row_of(y)?))
    }

    fn column_of(&self, c: f64) -> Option<usize> {
        let w = &self.window;
        if !(c >= w.x_lo && c <= w.x_hi) {
            return None;
        }
        let (dx, _) = self.cell_size();
        Some((((c - w.x_lo) / dx) as usize).min(self.nx - 1))
    }

    fn row_of(&self, y: f64) -> Option<usize> {
        let w = &self.window;
        if !(y >= w.y_lo && y <= w.y_hi) {
            return None;
        }
        let (_, dy) = self.cell_size();
        Some((((y - w.y_lo) / dy) as usize).min(self.ny - 1))
    }

    fn same_grid(&self, other: &CellSet) -> Result<()> {
        if self.window != other.window || self.nx != other.nx || self.ny != other.ny {
            return Err(Error::Structural(format!(
                "cell sets differ: {} at {}x{} vs {} at {}x{}",
                self.window, self.nx, self.ny, other.window, other.nx, other.ny
            )));
        }
        Ok(())
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        self.same_grid(other)?;
        let mut out = self.clone();
        out.bits.union_with(&other.bits);
        Ok(out)
    }

    pub fn is_subset(&self, other: &CellSet) -> Result<bool> {
        self.same_grid(other)?;
        Ok(self.bits.is_subset(&other.bits))
    }

    /// Plain PGM (`P2`, maxval 1), top row first, 1 for occupied cells.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "P2\n{} {}\n1", self.nx, self.ny)?;
        for j in (0..self.ny).rev() {
            let row: Vec<&str> = (0..self.nx)
                .map(|i| if self.contains(i, j) { "1" } else { "0" })
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClipReport {
    /// Images that fell outside the window.
    pub clipped: usize,
}

/// `F_loc(S) = ∪ h_ℓ(S ∩ X_ℓ × Y)` by cell-center mapping.
pub fn apply_floc(ifs: &LocalIFS, s: &CellSet) -> CellSet {
    apply_floc_counted(ifs, s).0
}

/// [`apply_floc`] together with the number of clipped images.
pub fn apply_floc_counted(ifs: &LocalIFS, s: &CellSet) -> (CellSet, ClipReport) {
    let ambient = ifs.ambient;
    let cells: Vec<(usize, usize)> = s.iter().collect();
    let (dx, _) = s.cell_size();
    let per_map: Vec<(Vec<usize>, usize)> = ifs
        .maps
        .par_iter()
        .map(|m| {
            let (a, b) = (ambient.compactify(m.domain.lo), ambient.compactify(m.domain.hi));
            let hits: Vec<Option<usize>> = cells
                .par_iter()
                .filter_map(|&(i, j)| {
                    let (c, y) = s.center(i, j);
                    if c + 0.5 * dx < a || c - 0.5 * dx > b {
                        return None;
                    }
                    let x = ambient.decompactify(c.clamp(a, b));
                    let (fx, gy) = m.apply(x, y)?;
                    Some(s.cell_of(ambient.compactify(fx), gy).map(|(p, q)| q * s.nx + p))
                })
                .collect();
            let clipped = hits.iter().filter(|h| h.is_none()).count();
            (hits.into_iter().flatten().collect(), clipped)
        })
        .collect();
    let mut out = CellSet { bits: FixedBitSet::with_capacity(s.nx * s.ny), ..s.clone() };
    let mut clipped = 0;
    for (hits, c) in per_map {
        clipped += c;
        for k in hits {
            out.bits.insert(k);
        }
    }
    (out, ClipReport { clipped })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HausdorffReport {
    pub distance: f64,
    /// `sup_{a ∈ A} d(a, B)`
    pub a_to_b: f64,
    /// `sup_{b ∈ B} d(b, A)`
    pub b_to_a: f64,
    /// The cell of `A` farthest from `B`.
    pub witness_a: Option<(usize, usize)>,
    /// The cell of `B` farthest from `A`.
    pub witness_b: Option<(usize, usize)>,
}

const FAR: f64 = 1e30;

/// Squared distance transform along one line with sample spacing `h`.
fn transform_line(f: &[f64], h: f64, out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let key = |q: usize| f[q] + (q as f64 * h).powi(2);
    for q in 1..n {
        let mut s = (key(q) - key(v[k])) / (2.0 * h * (q - v[k]) as f64);
        while s <= z[k] {
            k -= 1;
            s = (key(q) - key(v[k])) / (2.0 * h * (q - v[k]) as f64);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        let x = q as f64 * h;
        while z[k + 1] < x {
            k += 1;
        }
        let p = v[k] as f64 * h;
        *o = (x - p).powi(2) + f[v[k]];
    }
}

/// Squared Euclidean distance from every cell center to the nearest
/// occupied cell center.
fn distance_field(s: &CellSet) -> Vec<f64> {
    let (nx, ny) = (s.nx, s.ny);
    let (dx, dy) = s.cell_size();
    let mut grid: Vec<f64> = (0..nx * ny).map(|k| if s.bits.contains(k) { 0.0 } else { FAR }).collect();
    // columns
    let mut cols: Vec<Vec<f64>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let f: Vec<f64> = (0..ny).map(|j| grid[j * nx + i]).collect();
            let mut out = vec![0.0; ny];
            let (mut v, mut z) = (vec![0; ny], vec![0.0; ny + 1]);
            transform_line(&f, dy, &mut out, &mut v, &mut z);
            out
        })
        .collect();
    for (i, col) in cols.iter_mut().enumerate() {
        for (j, val) in col.iter().enumerate() {
            grid[j * nx + i] = *val;
        }
    }
    grid.par_chunks_mut(nx).for_each(|row| {
        let f = row.to_vec();
        let (mut v, mut z) = (vec![0; nx], vec![0.0; nx + 1]);
        transform_line(&f, dx, row, &mut v, &mut z);
    });
    grid
}

fn directed(a: &CellSet, field: &[f64]) -> (f64, Option<(usize, usize)>) {
    let mut best = (0.0f64, None);
    for k in a.bits.ones() {
        if best.1.is_none() || field[k] > best.0 {
            best = (field[k], Some((k % a.nx, k / a.nx)));
        }
    }
    (best.0.sqrt(), best.1)
}

/// Exact discrete Hausdorff distance between the cell centers of `a` and
/// `b`, in window units. Infinite when exactly one set is empty.
pub fn hausdorff_distance(a: &CellSet, b: &CellSet) -> Result<HausdorffReport> {
    a.same_grid(b)?;
    match (a.is_empty(), b.is_empty()) {
        (true, true) => {
            return Ok(HausdorffReport { distance: 0.0, a_to_b: 0.0, b_to_a: 0.0, witness_a: None, witness_b: None })
        }
        (true, false) | (false, true) => {
            return Ok(HausdorffReport {
                distance: f64::INFINITY,
                a_to_b: if a.is_empty() { 0.0 } else { f64::INFINITY },
                b_to_a: if b.is_empty() { 0.0 } else { f64::INFINITY },
                witness_a: None,
                witness_b: None,
            })
        }
        _ => {}
    }
    let (fa, fb) = rayon::join(|| distance_field(a), || distance_field(b));
    let (a_to_b, witness_a) = directed(a, &fb);
    let (b_to_a, witness_b) = directed(b, &fa);
    Ok(HausdorffReport { distance: a_to_b.max(b_to_a), a_to_b, b_to_a, witness_a, witness_b })
}

/// Iterates `F_loc` from `seed` until successive sets are within
/// `stop_tol` or `max_iters` steps were taken.
pub fn attractor_iterate(
    ifs: &LocalIFS,
    seed: &CellSet,
    max_iters: usize,
    stop_tol: f64,
) -> Result<(CellSet, Vec<HausdorffReport>)> {
    if max_iters == 0 {
        return Err(Error::Argument("max_iters must be at least 1".into()));
    }
    let mut current = seed.clone();
    let mut trace = Vec::new();
    for _ in 0..max_iters {
        let next = apply_floc(ifs, &current);
        let d = hausdorff_distance(&current, &next)?;
        trace.push(d);
        current = next;
        if d.distance <= stop_tol {
            break;
        }
    }
    Ok((current, trace))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RasterSettings {
    /// Certified samples per cell column.
    pub samples_per_column: usize,
    /// Rounds of forward images of the samples under the local maps.
    pub image_levels: usize,
}

impl Default for RasterSettings {
    fn default() -> Self {
        RasterSettings { samples_per_column: 64, image_levels: 4 }
    }
}

/// Raster of the graph of `f` over `window`. Graph points are certified
/// samples plus their forward images under the local maps; consecutive
/// points in x are joined by segments, so each column holds the range of
/// the function over it.
pub fn rasterize_graph(
    ifs: &LocalIFS,
    f: &FractalFunction,
    window: Window,
    nx: usize,
    ny: usize,
    settings: RasterSettings,
) -> Result<CellSet> {
    let mut set = CellSet::empty(window, nx, ny)?;
    let ambient = ifs.ambient;
    let domain = f.operator().scheme().domain();
    let (_, dy) = set.cell_size();
    let tol = 1e-3 * dy;
    let n = nx * settings.samples_per_column.max(1);
    let width = window.x_hi - window.x_lo;
    let base: Vec<(ExtendedPoint, f64)> = (0..=n)
        .into_par_iter()
        .filter_map(|k| {
            let x = ambient.decompactify(window.x_lo + width * k as f64 / n as f64);
            domain.contains(x).then(|| f.certified(x, tol).map(|e| (x, e.value)))
        })
        .collect::<Result<_>>()?;
    let mut points = base.clone();
    let mut frontier = base;
    for _ in 0..settings.image_levels {
        frontier = frontier
            .par_iter()
            .flat_map_iter(|&(x, y)| ifs.maps.iter().filter_map(move |m| m.apply(x, y)))
            .collect();
        points.extend_from_slice(&frontier);
    }
    let mut chart: Vec<(f64, f64)> = points
        .into_iter()
        .map(|(x, y)| (ambient.compactify(x), y))
        .filter(|(c, y)| c.is_finite() && y.is_finite())
        .collect();
    chart.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    for w in chart.windows(2) {
        mark_segment(&mut set, w[0], w[1]);
    }
    if let [only] = chart[..] {
        mark_segment(&mut set, only, only);
    }
    Ok(set)
}

fn mark_segment(set: &mut CellSet, (c0, y0): (f64, f64), (c1, y1): (f64, f64)) {
    let w = set.window;
    let (lo, hi) = (c0.max(w.x_lo), c1.min(w.x_hi));
    if lo > hi {
        return;
    }
    let (Some(i0), Some(i1)) = (set.column_of(lo), set.column_of(hi)) else {
        return;
    };
    let (dx, _) = set.cell_size();
    let y_at = |c: f64| if c1 > c0 { y0 + (y1 - y0) * (c - c0) / (c1 - c0) } else { y0 };
    for i in i0..=i1 {
        let left = (w.x_lo + dx * i as f64).max(lo);
        let right = (w.x_lo + dx * (i + 1) as f64).min(hi);
        let (ya, yb) = (y_at(left), y_at(right));
        let (ya, yb) = (ya.min(yb).max(w.y_lo), ya.max(yb).min(w.y_hi));
        if ya > yb {
            continue;
        }
        let (Some(j0), Some(j1)) = (set.row_of(ya), set.row_of(yb)) else {
            continue;
        };
        for j in j0..=j1 {
            set.insert(i, j);
        }
    }
}

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub hausdorff: HausdorffReport,
    pub cell_diagonal: f64,
    pub graph_cells: usize,
    pub clipped: usize,
}

impl InvarianceReport {
    /// The distance in units of the cell diagonal.
    pub fn in_diagonals(&self) -> f64 {
        self.hausdorff.distance / self.cell_diagonal
    }
}

/// Rasterizes the graph `G` of `f`, applies `F_loc` once and measures the
/// Hausdorff distance between `F_loc(G)` and `G`.
pub fn graph_invariance(
    ifs: &LocalIFS,
    f: &FractalFunction,
    window: Window,
    nx: usize,
    ny: usize,
) -> Result<InvarianceReport> {
    let g = rasterize_graph(ifs, f, window, nx, ny, RasterSettings::default())?;
    let (image, clips) = apply_floc_counted(ifs, &g);
    Ok(InvarianceReport {
        hausdorff: hausdorff_distance(&image, &g)?,
        cell_diagonal: g.cell_diagonal(),
        graph_cells: g.len(),
        clipped: clips.clipped,
    })
}
