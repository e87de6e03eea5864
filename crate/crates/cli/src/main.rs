use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use hermite_qi::convergence::problem_names;
use hermite_qi::{
    default_fd_order, lookup, qi2d_approx, qi2d_hermite, qi3d_approx, qi_approx, qi_hermite,
    run_study, Axis, GridFile, GridSample2D, GridSample3D, HermiteData, Mesh, QiError, Spline,
    StudyConfig,
};

#[derive(Parser)]
#[command(name = "hqi", version, about = "Hermite B-spline quasi-interpolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a spline to a grid file and write it as JSON.
    Fit(FitArgs),
    /// Evaluate a spline at points or on a grid, writing CSV.
    Eval(EvalArgs),
    /// Refinement study on a builtin test function, writing CSV.
    Convergence(ConvergenceArgs),
    /// Error of a spline against the values of a reference grid.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Input grid file.
    input: PathBuf,
    /// Output spline JSON.
    #[arg(short, long)]
    output: PathBuf,
    /// Degree, one value for all axes or one per axis.
    #[arg(short, long, value_delimiter = ',', default_value = "3")]
    degree: Vec<usize>,
    /// Finite-difference order(s); defaults to d+1 (odd d) or d+2 (even d).
    #[arg(short = 'l', long, value_delimiter = ',')]
    fd_order: Vec<usize>,
    /// Use the derivative blocks of the grid instead of finite differences.
    #[arg(long)]
    hermite: bool,
    /// Axes (0-based) to treat as periodic. Their last sample is the seam
    /// and is dropped.
    #[arg(long, value_delimiter = ',')]
    periodic: Vec<usize>,
}

#[derive(Args)]
struct EvalArgs {
    /// Spline JSON.
    spline: PathBuf,
    /// File of query points, one per line, coordinates separated by commas.
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    points: Option<PathBuf>,
    /// Query grid `a:b:n` per axis (n points), axes separated by commas.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Derivative order, one value for all axes or one per axis.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    deriv: Vec<usize>,
    /// Write CSV here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Builtin function name.
    name: String,
    #[arg(short, long, default_value_t = 3)]
    degree: usize,
    #[arg(short = 'l', long)]
    fd_order: Option<usize>,
    /// Interval counts per axis.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    /// Use exact derivatives instead of finite differences.
    #[arg(long)]
    hermite: bool,
    /// Graded mesh clustered at both ends.
    #[arg(long)]
    nonuniform: bool,
    /// Grading strength of the non-uniform mesh.
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    grading: f64,
    /// Timed repetitions per row; the median is reported.
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    /// Error sample points per axis.
    #[arg(long)]
    eval_points: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    spline: PathBuf,
    reference: PathBuf,
}

/// A failure and the exit code it maps to.
#[derive(Debug)]
enum Failure {
    /// I/O or malformed input (exit 2).
    Input(String),
    /// Valid input that violates a constraint (exit 3).
    Constraint(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Constraint(_) => 3,
        }
    }
}

impl From<QiError> for Failure {
    fn from(e: QiError) -> Self {
        match e {
            QiError::Format(_) => Failure::Input(e.to_string()),
            _ => Failure::Constraint(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn read_grid(path: &Path) -> Outcome<GridFile> {
    let g = GridFile::read(path).map_err(|e| io_error(path, e))?;
    g.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_spline(path: &Path) -> Outcome<Spline> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Spline::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_error(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

/// One value per axis from a list of length 1 or `dims`.
fn per_axis(what: &str, v: &[usize], dims: usize) -> Outcome<Vec<usize>> {
    match v.len() {
        1 => Ok(vec![v[0]; dims]),
        n if n == dims => Ok(v.to_vec()),
        n if dims == 1 => Err(Failure::Constraint(format!(
            "{what}: expected a single value for a 1D grid, got {n}"
        ))),
        n => Err(Failure::Constraint(format!(
            "{what}: expected 1 or {dims} values, got {n}"
        ))),
    }
}

/// Turns axis `k` periodic, dropping its seam sample from every block.
fn close_axis(grid: GridFile, k: usize) -> Outcome<GridFile> {
    if k >= grid.dims() {
        return Err(Failure::Constraint(format!(
            "--periodic {k}: the grid has {} axes",
            grid.dims()
        )));
    }
    if grid.axes[k].is_periodic() {
        return Ok(grid);
    }
    let x = grid.axes[k].samples();
    let n = x.len() - 1;
    if n < 1 {
        return Err(Failure::Constraint(format!(
            "--periodic {k}: axis needs at least two samples"
        )));
    }
    let axis = Axis::periodic(x[..n].to_vec(), x[n] - x[0])?;
    let shape = grid.shape();
    let stride: usize = shape[..k].iter().product();
    let f = grid.block("f").expect("validated grid has f");
    let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut blocks = Vec::with_capacity(grid.blocks.len());
    for (name, values) in &grid.blocks {
        let mut kept = Vec::with_capacity(values.len() / (n + 1) * n);
        for (flat, &v) in values.iter().enumerate() {
            let idx = (flat / stride) % (n + 1);
            if idx < n {
                kept.push(v);
            } else if name == "f" {
                let first = values[flat - n * stride];
                if (v - first).abs() > 1e-9 * scale {
                    return Err(Failure::Constraint(format!(
                        "--periodic {k}: values at the two ends of the axis differ ({first} vs {v})"
                    )));
                }
            }
        }
        blocks.push((name.clone(), kept));
    }
    let mut axes = grid.axes.clone();
    axes[k] = axis;
    Ok(GridFile::new(axes, grid.components, blocks)?)
}

fn need_block<'a>(grid: &'a GridFile, name: &str) -> Outcome<&'a [f64]> {
    grid.block(name).ok_or_else(|| {
        Failure::Constraint(format!("--hermite requires a `{name}` block in the grid"))
    })
}

fn fit(args: &FitArgs) -> Outcome<String> {
    let mut grid = read_grid(&args.input)?;
    for &k in &args.periodic {
        grid = close_axis(grid, k)?;
    }
    let dims = grid.dims();
    let degrees = per_axis("--degree", &args.degree, dims)?;
    let orders = if args.fd_order.is_empty() {
        degrees.iter().map(|&d| default_fd_order(d)).collect()
    } else {
        per_axis("--fd-order", &args.fd_order, dims)?
    };
    let f = grid.block("f").expect("validated grid has f").to_vec();
    let start = Instant::now();
    let spline: Spline = match (dims, args.hermite) {
        (1, true) => {
            let data = HermiteData {
                axis: grid.axes[0].clone(),
                dim: grid.components,
                values: f,
                derivatives: Some(need_block(&grid, "df")?.to_vec()),
            };
            qi_hermite(&data, degrees[0])?.into()
        }
        (1, false) => qi_approx(&grid.axes[0], &f, grid.components, degrees[0], orders[0])?.into(),
        (2, _) => {
            let g = GridSample2D::new(grid.axes[0].clone(), grid.axes[1].clone(), f)?;
            if args.hermite {
                let g = g.with_derivatives(
                    need_block(&grid, "fx")?.to_vec(),
                    need_block(&grid, "fy")?.to_vec(),
                    need_block(&grid, "fxy")?.to_vec(),
                )?;
                qi2d_hermite(&g, [degrees[0], degrees[1]])?.into()
            } else {
                qi2d_approx(&g, [degrees[0], degrees[1]], [orders[0], orders[1]])?.into()
            }
        }
        (_, true) => {
            return Err(Failure::Constraint(
                "--hermite is available for 1D and 2D grids only".into(),
            ))
        }
        _ => {
            let axes = [
                grid.axes[0].clone(),
                grid.axes[1].clone(),
                grid.axes[2].clone(),
            ];
            let g = GridSample3D::new(axes, f)?;
            qi3d_approx(
                &g,
                [degrees[0], degrees[1], degrees[2]],
                [orders[0], orders[1], orders[2]],
            )?
            .into()
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    std::fs::write(&args.output, spline.to_json()).map_err(|e| io_error(&args.output, e))?;
    let knots: Vec<usize> = spline
        .knot_vectors()
        .iter()
        .map(|k| k.knots().len())
        .collect();
    Ok(format!(
        "knots: {knots:?}\ncoefficients: {:?}\nfit time: {elapsed:.6} s\n",
        spline.coefficient_shape()
    ))
}

fn parse_points(path: &Path, dims: usize) -> Outcome<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| {
                Failure::Input(format!(
                    "{}:{}: cannot parse `{line}`",
                    path.display(),
                    lineno + 1
                ))
            })?;
        if coords.len() != dims {
            return Err(Failure::Input(format!(
                "{}:{}: expected {dims} coordinates, got {}",
                path.display(),
                lineno + 1,
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Failure::Input(format!(
                "{}:{}: non-finite coordinate",
                path.display(),
                lineno + 1
            )));
        }
        points.push(coords);
    }
    Ok(points)
}

/// Points of `a:b:n,...` with the first axis fastest.
fn parse_grid_spec(spec: &str, dims: usize) -> Outcome<Vec<Vec<f64>>> {
    let bad = || Failure::Input(format!("--grid: expected `a:b:n` per axis, got `{spec}`"));
    let axes = spec
        .split(',')
        .map(|part| {
            let f: Vec<&str> = part.trim().split(':').collect();
            if f.len() != 3 {
                return Err(bad());
            }
            let a: f64 = f[0].parse().map_err(|_| bad())?;
            let b: f64 = f[1].parse().map_err(|_| bad())?;
            let n: usize = f[2].parse().map_err(|_| bad())?;
            if n == 0 || !a.is_finite() || !b.is_finite() {
                return Err(bad());
            }
            Ok(hermite_qi::linspace(a, b, n))
        })
        .collect::<Outcome<Vec<_>>>()?;
    if axes.len() != dims {
        return Err(Failure::Input(format!(
            "--grid: the spline has {dims} parameters, got {} axes",
            axes.len()
        )));
    }
    let total: usize = axes.iter().map(Vec::len).product();
    let mut points = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rest = flat;
        let p = axes
            .iter()
            .map(|ax| {
                let v = ax[rest % ax.len()];
                rest /= ax.len();
                v
            })
            .collect();
        points.push(p);
    }
    Ok(points)
}

fn eval(args: &EvalArgs) -> Outcome<String> {
    let spline = read_spline(&args.spline)?;
    let dims = spline.params();
    let orders = per_axis("--deriv", &args.deriv, dims)?;
    let points = match (&args.points, &args.grid) {
        (Some(p), _) => parse_points(p, dims)?,
        (None, Some(g)) => parse_grid_spec(g, dims)?,
        (None, None) => unreachable!("clap requires one of --points or --grid"),
    };
    let kvs = spline.knot_vectors();
    let outside: Vec<&Vec<f64>> = points
        .iter()
        .filter(|p| {
            p.iter().zip(&kvs).any(|(&x, kv)| {
                let (a, b) = kv.domain();
                !kv.is_periodic() && !(a..=b).contains(&x)
            })
        })
        .collect();
    if !outside.is_empty() {
        let mut msg = format!(
            "{} point(s) outside the spline domain {:?}:",
            outside.len(),
            spline.domain()
        );
        for p in outside.iter().take(20) {
            let _ = write!(msg, "\n  {}", join(p));
        }
        if outside.len() > 20 {
            let _ = write!(msg, "\n  ...");
        }
        return Err(Failure::Constraint(msg));
    }
    let names = ["x", "y", "z"];
    let p = spline.components();
    let mut out = names[..dims].join(",");
    if p == 1 {
        out.push_str(",value");
    } else {
        for k in 0..p {
            let _ = write!(out, ",value{k}");
        }
    }
    out.push('\n');
    for pt in &points {
        let v = spline.eval(pt, &orders)?;
        let _ = writeln!(out, "{},{}", join(pt), join(&v));
    }
    write_out(args.output.as_deref(), &out)?;
    Ok(String::new())
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn convergence(args: &ConvergenceArgs) -> Outcome<String> {
    let problem = lookup(&args.name).ok_or_else(|| {
        Failure::Input(format!(
            "unknown builtin `{}` (available: {})",
            args.name,
            problem_names().join(", ")
        ))
    })?;
    let ns = args.ns.clone().unwrap_or_else(|| match problem.dim() {
        3 => vec![8, 16, 32, 64],
        2 => vec![16, 32, 64, 128, 256],
        _ => vec![16, 32, 64, 128, 256, 512, 1024],
    });
    if args.repetitions == 0 {
        return Err(Failure::Constraint(
            "--repetitions must be at least 1".into(),
        ));
    }
    if args.nonuniform && !(args.grading.is_finite() && args.grading > 0.0) {
        return Err(Failure::Constraint(format!(
            "--grading must be positive, got {}",
            args.grading
        )));
    }
    let mut cfg = StudyConfig::new(args.degree, ns);
    cfg.fd_order = args.fd_order;
    cfg.hermite = args.hermite;
    cfg.repetitions = args.repetitions;
    cfg.eval_points = args.eval_points;
    if args.nonuniform {
        cfg.mesh = Mesh::Graded(args.grading);
    }
    let rows = run_study(problem.as_ref(), &cfg)?;
    let mut out = String::from("N,error,order,time\n");
    for r in rows {
        let order = r.order.map(|o| o.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", r.n, r.error, order, r.seconds);
    }
    write_out(args.output.as_deref(), &out)?;
    Ok(String::new())
}

fn metrics(args: &MetricsArgs) -> Outcome<String> {
    let spline = read_spline(&args.spline)?;
    let grid = read_grid(&args.reference)?;
    let m = hermite_qi::metrics::spline_vs_grid(&spline, &grid)?;
    let json = serde_json::json!({
        "count": m.count,
        "max_err": m.max_err,
        "rmse": m.rmse,
        "nrmse": m.nrmse,
    });
    let mut s = json.to_string();
    s.push('\n');
    if m.nrmse.is_none() {
        eprintln!("note: the reference values have zero range, so NRMSE is undefined");
    }
    Ok(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(a) => fit(a),
        Command::Eval(a) => eval(a),
        Command::Convergence(a) => convergence(a),
        Command::Metrics(a) => metrics(a),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            let (Failure::Input(msg) | Failure::Constraint(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
