use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use fraxterp::algebra::{evaluate_tensor, lagrange_basis, tensor, NodeSet, OffsetTuple, Orders};
use fraxterp::config::ScenarioConfig;
use fraxterp::figures::{write_figures, FIGURE_POINTS};
use fraxterp::local_ifs::{attractor_iterate, build_local_ifs, rasterize_graph, CellSet, RasterSettings, Window};
use fraxterp::lp::{lp_contractivity, QuadratureRule};
use fraxterp::output::{format_g, format_point, svg_plot, write_csv, write_samples};
use fraxterp::rb::{sample_certified, GridFunction};
use fraxterp::scenario::Scenario;
use fraxterp::verify::{all_passed, format_table, verify_config};
use fraxterp::{Error, ExtendedPoint, FractalFunction, PieceKind};

#[derive(Parser)]
#[command(name = "fraxterp", version, about = "Fractal functions on half-lines, the real line and intervals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the partition conditions and contractivity of a scenario.
    Validate { config: PathBuf },
    /// Sample the fixed point on a grid uniform in compactified x.
    Sample {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Number of grid cells; `points + 1` rows are written.
        #[arg(long, default_value_t = FIGURE_POINTS)]
        points: usize,
    },
    /// Certified evaluation of the fixed point at one point.
    Evaluate {
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Lp contractivity report.
    Lpcheck {
        config: PathBuf,
        /// Exponent; `inf` for the sup norm.
        #[arg(long)]
        p: f64,
        #[arg(long)]
        subdivisions: Option<usize>,
    },
    /// Fractal Lagrange basis sampled on a grid.
    Basis {
        config: PathBuf,
        /// One order per piece, bounded pieces first: `2,2`.
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
        /// Nodes per piece separated by `;`, values by `,`: `0,1;0,1`.
        #[arg(long)]
        nodes: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1024)]
        points: usize,
    },
    /// Samples of the tensor product of two fixed points.
    TensorSample {
        config_a: PathBuf,
        config_b: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Grid cells per axis.
        #[arg(long, default_value_t = 64)]
        points: usize,
    },
    /// Iterates the set operator of the local IFS from a seed.
    Attractor {
        config: PathBuf,
        /// `x_lo,x_hi,y_lo,y_hi` with x in compactified coordinates.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        window: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
        res: Option<Vec<usize>>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, value_enum, default_value_t = Seed::Full)]
        seed: Seed,
        #[arg(long, default_value_t = 0.0)]
        stop_tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant suites on a scenario and print a table.
    Verify { config: PathBuf },
    /// Regenerate the reference datasets.
    Figures {
        #[arg(long)]
        outdir: PathBuf,
        #[arg(long, default_value_t = FIGURE_POINTS)]
        points: usize,
        /// Also write the scenario files used for each figure.
        #[arg(long)]
        dump_config: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Seed {
    Full,
    Empty,
    Graph,
}

enum Failure {
    Check(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotContractive { .. } | Error::DepthExceeded { .. } => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("FRAXTERP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("FRAXTERP_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("FRAXTERP_THREADS must be a positive integer, got 0".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { config } => validate(&config),
        Command::Sample { config, out, svg, points } => sample(&config, &out, svg.as_deref(), points),
        Command::Evaluate { config, x, tol } => evaluate(&config, x, tol),
        Command::Lpcheck { config, p, subdivisions } => lpcheck(&config, p, subdivisions),
        Command::Basis { config, orders, nodes, out, points } => basis(&config, &orders, &nodes, &out, points),
        Command::TensorSample { config_a, config_b, out, points } => tensor_sample(&config_a, &config_b, &out, points),
        Command::Attractor { config, window, res, iters, seed, stop_tol, out } => {
            attractor(&config, window, res, iters, seed, stop_tol, &out)
        }
        Command::Verify { config } => verify(&config),
        Command::Figures { outdir, points, dump_config } => {
            for p in write_figures(&outdir, points, dump_config)? {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<(ScenarioConfig, Scenario), Failure> {
    let cfg = ScenarioConfig::load(path)?;
    let scenario = cfg.build()?;
    Ok((cfg, scenario))
}

fn fixed_point(cfg: &ScenarioConfig, s: &Scenario) -> FractalFunction {
    s.fixed_point()
        .with_tolerance(cfg.evaluation.tol)
        .with_max_depth(cfg.evaluation.max_depth)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn validate(path: &Path) -> Outcome {
    let cfg = ScenarioConfig::load(path)?;
    let report = cfg.validate()?;
    if !report.ok() {
        println!("partition conditions violated:");
        print!("{report}");
        return Err(Failure::Check(String::new()));
    }
    let s = cfg.build()?;
    let op = &s.operator;
    println!(
        "partition conditions satisfied, contraction {}",
        format_g(op.contraction())
    );
    println!(
        "{} bounded and {} unbounded pieces, offset sup {}, value bound {}",
        op.scheme().bounded().len(),
        op.scheme().unbounded().len(),
        format_g(op.offset_sup()),
        format_g(op.value_bound())
    );
    Ok(())
}

fn sample(path: &Path, out: &Path, svg: Option<&Path>, points: usize) -> Outcome {
    let (cfg, s) = load(path)?;
    let f = fixed_point(&cfg, &s);
    let samples = sample_certified(&f, points.max(1), cfg.evaluation.tol)?;
    let mut w = create(out)?;
    write_samples(&mut w, &samples)?;
    w.flush()?;
    if let Some(svg) = svg {
        fs::write(svg, svg_plot(&samples, s.operator.ambient(), &cfg.name))?;
    }
    Ok(())
}

fn evaluate(path: &Path, x: f64, tol: Option<f64>) -> Outcome {
    let (cfg, s) = load(path)?;
    let tol = tol.unwrap_or(cfg.evaluation.tol);
    let x = ExtendedPoint::new(x)?;
    let f = fixed_point(&cfg, &s);
    let digits = (-tol.log10()).ceil().clamp(1.0, 17.0) as usize;
    match f.certified(x, tol) {
        Ok(e) => {
            println!("{:.digits$} ± {}", e.value, format_g(tol));
            Ok(())
        }
        Err(Error::DepthExceeded { partial, bound }) => {
            println!("{partial:.digits$} ± {} (depth limit reached)", format_g(bound));
            Err(Failure::Check(format!("requested tolerance {} not reached", format_g(tol))))
        }
        Err(e) => Err(e.into()),
    }
}

fn lpcheck(path: &Path, p: f64, subdivisions: Option<usize>) -> Outcome {
    let (cfg, s) = load(path)?;
    let rule = QuadratureRule::gauss(subdivisions.unwrap_or(cfg.analysis.subdivisions));
    let r = lp_contractivity(&s.operator, p, &rule)?;
    println!("p = {}, regime {}", format_g(p), r.regime);
    for q in &r.pieces {
        println!("  {}: J = {}, scale norm {}", q.piece, q.jacobian, format_g(q.scale_norm));
    }
    println!("criterion {}", format_g(r.criterion));
    println!("sup-norm contraction {}", format_g(r.sup_norm_factor));
    match &r.reason {
        None => {
            println!("contractive in Lp");
            Ok(())
        }
        Some(reason) => {
            println!("not certified: {reason}");
            Err(Failure::Check(String::new()))
        }
    }
}

fn parse_nodes(spec: &str) -> Result<Vec<Vec<f64>>, Failure> {
    spec.split(';')
        .map(|group| {
            group
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Failure::Usage(format!("bad node {t:?}")))
                })
                .collect()
        })
        .collect()
}

fn basis(path: &Path, orders: &[usize], nodes: &str, out: &Path, points: usize) -> Outcome {
    let (cfg, s) = load(path)?;
    let scheme = s.operator.scheme();
    let (nb, nu) = (scheme.bounded().len(), scheme.unbounded().len());
    let nodes = parse_nodes(nodes)?;
    if orders.len() != nb + nu || nodes.len() != nb + nu {
        return Err(Failure::Usage(format!(
            "need {} orders and node groups (bounded pieces first), got {} and {}",
            nb + nu,
            orders.len(),
            nodes.len()
        )));
    }
    let orders = Orders { bounded: orders[..nb].to_vec(), unbounded: orders[nb..].to_vec() };
    let nodes = NodeSet { bounded: nodes[..nb].to_vec(), unbounded: nodes[nb..].to_vec() };
    let mut scales = OffsetTuple::zeros(scheme);
    for id in scheme.piece_ids() {
        let sc = s
            .operator
            .vmap(id)
            .scale()
            .ok_or_else(|| Failure::Usage(format!("{id}: basis needs the affine form")))?
            .clone();
        match id.kind {
            PieceKind::Bounded => scales.bounded[id.index - 1] = sc,
            PieceKind::Unbounded => scales.unbounded[id.index - 1] = sc,
        }
    }
    let tol = cfg.evaluation.tol;
    let b = lagrange_basis(scheme, &scales, &orders, &nodes, tol)?;
    println!("dimension {}", b.dimension);
    let mut header = vec!["x".to_string()];
    for (k, e) in b.elements.iter().enumerate() {
        println!("  L{}: piece {}, node {}", k + 1, e.piece, format_g(e.node));
        header.push(format!("L{}", k + 1));
    }
    let grid = GridFunction::zeros(s.operator.ambient(), &scheme.domain(), points.max(1))?;
    let rows = grid
        .grid()
        .iter()
        .map(|&x| {
            let vals = b
                .elements
                .iter()
                .map(|e| Ok(e.function.certified(x, tol)?.value))
                .collect::<Result<Vec<_>, Error>>()?;
            Ok((x, vals))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut w = create(out)?;
    write_csv(&mut w, &header, &rows)?;
    w.flush()?;
    Ok(())
}

fn tensor_sample(a: &Path, b: &Path, out: &Path, points: usize) -> Outcome {
    let (ca, sa) = load(a)?;
    let (cb, sb) = load(b)?;
    let tol = ca.evaluation.tol.max(cb.evaluation.tol);
    let ga = GridFunction::zeros(sa.operator.ambient(), &sa.operator.scheme().domain(), points.max(1))?;
    let gb = GridFunction::zeros(sb.operator.ambient(), &sb.operator.scheme().domain(), points.max(1))?;
    let t = tensor(fixed_point(&ca, &sa), fixed_point(&cb, &sb));
    let mut w = create(out)?;
    writeln!(w, "x,xt,f")?;
    for &x in ga.grid() {
        for &xt in gb.grid() {
            let v = evaluate_tensor(&t, x, xt, tol)?.value;
            writeln!(w, "{},{},{}", format_point(x), format_point(xt), format_g(v))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn attractor(
    path: &Path,
    window: Option<Vec<f64>>,
    res: Option<Vec<usize>>,
    iters: Option<usize>,
    seed: Seed,
    stop_tol: f64,
    out: &Path,
) -> Outcome {
    let (cfg, s) = load(path)?;
    let op: &Arc<_> = &s.operator;
    let window = match window.as_deref().or(cfg.analysis.window.as_ref().map(|w| &w[..])) {
        Some(&[a, b, c, d]) => Window::new(a, b, c, d)?,
        Some(w) => return Err(Failure::Usage(format!("--window needs 4 values, got {}", w.len()))),
        None => Window::for_operator(op, 1.05)?,
    };
    let [nx, ny] = match res.as_deref() {
        Some(&[nx, ny]) => [nx, ny],
        _ => cfg.analysis.resolution,
    };
    let ifs = build_local_ifs(op);
    if !ifs.is_continuous() {
        println!("warning: vertical maps jump in x; the graph need not be continuous");
    }
    let f = fixed_point(&cfg, &s);
    let graph = rasterize_graph(&ifs, &f, window, nx, ny, RasterSettings::default())?;
    let start = match seed {
        Seed::Full => CellSet::full(window, nx, ny)?,
        Seed::Empty => CellSet::empty(window, nx, ny)?,
        Seed::Graph => graph.clone(),
    };
    let (set, trace) = attractor_iterate(&ifs, &start, iters.unwrap_or(cfg.analysis.iterations).max(1), stop_tol)?;
    for (k, d) in trace.iter().enumerate() {
        println!("iteration {}: hausdorff {}", k + 1, format_g(d.distance));
    }
    let to_graph = fraxterp::local_ifs::hausdorff_distance(&set, &graph)?;
    println!(
        "final set: {} cells, distance to graph {} ({} cell diagonals)",
        set.len(),
        format_g(to_graph.distance),
        format_g(to_graph.distance / set.cell_diagonal())
    );
    let mut w = create(out)?;
    set.write_pgm(&mut w)?;
    w.flush()?;
    Ok(())
}

fn verify(path: &Path) -> Outcome {
    let cfg = ScenarioConfig::load(path)?;
    let checks = verify_config(&cfg)?;
    print!("{}", format_table(&checks));
    if all_passed(&checks) {
        Ok(())
    } else {
        Err(Failure::Check("some checks failed".into()))
    }
}
