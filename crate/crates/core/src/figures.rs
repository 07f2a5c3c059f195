//! Datasets for the three reference plots: the compact-interval example,
//! its pullback to the half-line, and the direct half-line construction.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{example1_config, halfline_config, pullback_config, ScenarioConfig};
use crate::error::Result;
use crate::output::{svg_plot, write_samples};
use crate::point::ExtendedPoint;
use crate::rb::sample_certified;

/// Default number of grid cells per figure (uniform in compactified x).
pub const FIGURE_POINTS: usize = 1 << 12;

#[derive(Debug, Clone)]
pub struct Figure {
    pub name: &'static str,
    pub title: &'static str,
    pub config: ScenarioConfig,
}

pub fn figures() -> Vec<Figure> {
    vec![
        Figure { name: "fig1_left", title: "fixed point on [0, 1]", config: example1_config() },
        Figure { name: "fig1_right", title: "pullback to [0, inf)", config: pullback_config() },
        Figure { name: "fig2", title: "direct construction on [0, inf)", config: halfline_config() },
    ]
}

/// `points + 1` certified samples of the scenario's fixed point.
pub fn figure_samples(config: &ScenarioConfig, points: usize) -> Result<Vec<(ExtendedPoint, f64)>> {
    let s = config.build()?;
    let f = s.fixed_point().with_max_depth(config.evaluation.max_depth);
    sample_certified(&f, points, config.evaluation.tol)
}

/// Writes `<name>.csv` and `<name>.svg` for every figure, plus `<name>.toml`
/// with the scenario when `dump_config` is set. Returns the written paths.
pub fn write_figures(outdir: &Path, points: usize, dump_config: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(outdir)?;
    let mut written = Vec::new();
    for fig in figures() {
        let samples = figure_samples(&fig.config, points)?;
        let csv = outdir.join(format!("{}.csv", fig.name));
        let mut buf = Vec::new();
        write_samples(&mut buf, &samples)?;
        fs::write(&csv, buf)?;
        written.push(csv);
        let svg = outdir.join(format!("{}.svg", fig.name));
        let ambient = fig.config.build()?.operator.ambient();
        fs::write(&svg, svg_plot(&samples, ambient, fig.title))?;
        written.push(svg);
        if dump_config {
            let toml = outdir.join(format!("{}.toml", fig.name));
            fs::write(&toml, fig.config.to_toml()?)?;
            written.push(toml);
        }
    }
    Ok(written)
}
