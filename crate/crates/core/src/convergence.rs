//! Convergence studies on builtin test functions.
//!
//! Test functions implement [`TestProblem`] and are looked up by name in a
//! registry, so studies, the CLI and the acceptance harness share one list.

use std::f64::consts::PI;
use std::time::Instant;

use crate::error::{QiError, Result};
use crate::knots::{linspace, Axis};
use crate::qi1d::{default_fd_order, qi_approx, qi_hermite, HermiteData};
use crate::qi_tensor::{qi2d_approx, qi2d_hermite, qi3d_approx, GridSample2D, GridSample3D};

/// A smooth function on a box with optional exact partials.
pub trait TestProblem: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn dim(&self) -> usize;
    /// `(a, b)` per axis.
    fn domain(&self) -> Vec<(f64, f64)>;
    fn value(&self, x: &[f64]) -> f64;
    /// 1D: `[f']`; 2D: `[f_x, f_y, f_xy]`. `None` when not available.
    fn partials(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

struct F1;

impl TestProblem for F1 {
    fn name(&self) -> &'static str {
        "f1"
    }
    fn description(&self) -> &'static str {
        "exp(-x) sin(5 pi x) on [-1, 1]"
    }
    fn dim(&self) -> usize {
        1
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        vec![(-1.0, 1.0)]
    }
    fn value(&self, x: &[f64]) -> f64 {
        (-x[0]).exp() * (5.0 * PI * x[0]).sin()
    }
    fn partials(&self, x: &[f64]) -> Option<Vec<f64>> {
        let x = x[0];
        let e = (-x).exp();
        Some(vec![
            e * (5.0 * PI * (5.0 * PI * x).cos() - (5.0 * PI * x).sin()),
        ])
    }
}

/// Boundary-layer function with layers of width `s` at both ends of [0, 2].
struct F2 {
    s: f64,
}

impl TestProblem for F2 {
    fn name(&self) -> &'static str {
        "f2"
    }
    fn description(&self) -> &'static str {
        "(exp(-x/s) - exp((x-2)/s)) / (1 - exp(-2/s)), s = 10^-1.5, on [0, 2]"
    }
    fn dim(&self) -> usize {
        1
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 2.0)]
    }
    fn value(&self, x: &[f64]) -> f64 {
        let s = self.s;
        ((-x[0] / s).exp() - ((x[0] - 2.0) / s).exp()) / (1.0 - (-2.0 / s).exp())
    }
    fn partials(&self, x: &[f64]) -> Option<Vec<f64>> {
        let s = self.s;
        let d = (-(-x[0] / s).exp() - ((x[0] - 2.0) / s).exp()) / (s * (1.0 - (-2.0 / s).exp()));
        Some(vec![d])
    }
}

struct Sin;

impl TestProblem for Sin {
    fn name(&self) -> &'static str {
        "sin"
    }
    fn description(&self) -> &'static str {
        "sin(x) on [0, 2 pi]"
    }
    fn dim(&self) -> usize {
        1
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 2.0 * PI)]
    }
    fn value(&self, x: &[f64]) -> f64 {
        x[0].sin()
    }
    fn partials(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![x[0].cos()])
    }
}

struct Franke;

impl Franke {
    // (coefficient, ax, bx, ay, by, sq) for each Gaussian-like term
    // c * exp(-(ax x - bx)^2 / sx - (ay y - by)^2 / sy)
    const TERMS: [(f64, f64, f64, f64, f64, f64, f64); 3] = [
        (0.75, 9.0, 2.0, 4.0, 9.0, 2.0, 4.0),
        (0.5, 9.0, 7.0, 4.0, 9.0, 3.0, 4.0),
        (-0.2, 9.0, 4.0, 1.0, 9.0, 7.0, 1.0),
    ];

    fn term(t: (f64, f64, f64, f64, f64, f64, f64), x: f64, y: f64) -> [f64; 4] {
        let (c, ax, bx, sx, ay, by, sy) = t;
        let u = ax * x - bx;
        let v = ay * y - by;
        let e = c * (-(u * u) / sx - (v * v) / sy).exp();
        let gx = -2.0 * u * ax / sx;
        let gy = -2.0 * v * ay / sy;
        [e, e * gx, e * gy, e * gx * gy]
    }

    // 0.75 exp(-(9x+1)^2/49 - (9y+1)/10)
    fn linear_term(x: f64, y: f64) -> [f64; 4] {
        let u = 9.0 * x + 1.0;
        let e = 0.75 * (-(u * u) / 49.0 - (9.0 * y + 1.0) / 10.0).exp();
        let gx = -2.0 * u * 9.0 / 49.0;
        let gy = -0.9;
        [e, e * gx, e * gy, e * gx * gy]
    }

    fn all(x: f64, y: f64) -> [f64; 4] {
        let mut acc = Self::linear_term(x, y);
        for t in Self::TERMS {
            let v = Self::term(t, x, y);
            for k in 0..4 {
                acc[k] += v[k];
            }
        }
        acc
    }
}

impl TestProblem for Franke {
    fn name(&self) -> &'static str {
        "franke"
    }
    fn description(&self) -> &'static str {
        "Franke's function on the unit square"
    }
    fn dim(&self) -> usize {
        2
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 1.0), (0.0, 1.0)]
    }
    fn value(&self, x: &[f64]) -> f64 {
        Self::all(x[0], x[1])[0]
    }
    fn partials(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(Self::all(x[0], x[1])[1..].to_vec())
    }
}

/// Scherk's minimal surface `log(cos y / cos x)` away from its poles.
struct Scherk {
    eta: f64,
}

impl TestProblem for Scherk {
    fn name(&self) -> &'static str {
        "scherk"
    }
    fn description(&self) -> &'static str {
        "Scherk surface log(cos y / cos x) on [-pi/2 + 0.01, pi/2 - 0.01]^2"
    }
    fn dim(&self) -> usize {
        2
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        let r = PI / 2.0 - self.eta;
        vec![(-r, r), (-r, r)]
    }
    fn value(&self, x: &[f64]) -> f64 {
        (x[1].cos() / x[0].cos()).ln()
    }
    fn partials(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![x[0].tan(), -x[1].tan(), 0.0])
    }
}

/// Upper cap of a sphere over the unit cube.
struct Ball3d;

impl TestProblem for Ball3d {
    fn name(&self) -> &'static str {
        "ball3d"
    }
    fn description(&self) -> &'static str {
        "sqrt(64 - 81 |x - c|^2) / 9 - 1/2 on [0, 1]^3, c = (1/2, 1/2, 1/2)"
    }
    fn dim(&self) -> usize {
        3
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 1.0); 3]
    }
    fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum();
        (64.0 - 81.0 * r2).sqrt() / 9.0 - 0.5
    }
}

/// All builtin problems, in a stable order.
pub fn registry() -> Vec<Box<dyn TestProblem>> {
    vec![
        Box::new(F1),
        Box::new(F2 {
            s: 10f64.powf(-1.5),
        }),
        Box::new(Sin),
        Box::new(Franke),
        Box::new(Scherk { eta: 1e-2 }),
        Box::new(Ball3d),
    ]
}

pub fn lookup(name: &str) -> Option<Box<dyn TestProblem>> {
    registry().into_iter().find(|p| p.name() == name)
}

pub fn problem_names() -> Vec<&'static str> {
    registry().iter().map(|p| p.name()).collect()
}

/// Two-sided graded mesh clustering nodes at both ends:
/// `x = a + (b - a) (1 + tanh(β (2t - 1)) / tanh β) / 2`.
pub fn graded_mesh(a: f64, b: f64, n: usize, beta: f64) -> Vec<f64> {
    let tb = beta.tanh();
    let mut v: Vec<f64> = (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            a + (b - a) * 0.5 * (1.0 + (beta * (2.0 * t - 1.0)).tanh() / tb)
        })
        .collect();
    v[0] = a;
    v[n] = b;
    v
}

/// `log(e_k / e_{k+1}) / log(N_{k+1} / N_k)` for each refinement step.
pub fn estimate_order(errors: &[f64], ns: &[usize]) -> Vec<f64> {
    errors
        .windows(2)
        .zip(ns.windows(2))
        .map(|(e, n)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect()
}

/// Least-squares slope of `-log e` against `log N`.
pub fn loglog_slope(ns: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| -e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mesh {
    Uniform,
    /// Graded with the given `β`.
    Graded(f64),
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub degree: usize,
    /// Finite-difference order; defaults to [`default_fd_order`].
    pub fd_order: Option<usize>,
    pub ns: Vec<usize>,
    pub hermite: bool,
    pub mesh: Mesh,
    pub repetitions: usize,
    /// Error sample points per axis; defaults to 1000 (1D) or 101 (2D, 3D).
    pub eval_points: Option<usize>,
}

impl StudyConfig {
    pub fn new(degree: usize, ns: Vec<usize>) -> Self {
        Self {
            degree,
            fd_order: None,
            ns,
            hermite: false,
            mesh: Mesh::Uniform,
            repetitions: 5,
            eval_points: None,
        }
    }

    pub fn fd_order(&self) -> usize {
        self.fd_order
            .unwrap_or_else(|| default_fd_order(self.degree))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub error: f64,
    /// Order estimated from the previous row.
    pub order: Option<f64>,
    /// Median fit wall time in seconds.
    pub seconds: f64,
}

fn axis_nodes(a: f64, b: f64, n: usize, mesh: Mesh) -> Vec<f64> {
    match mesh {
        Mesh::Uniform => linspace(a, b, n + 1),
        Mesh::Graded(beta) => graded_mesh(a, b, n, beta),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn timed<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut times = Vec::with_capacity(reps.max(1));
    let mut out = None;
    for _ in 0..reps.max(1) {
        let t0 = Instant::now();
        let v = f()?;
        times.push(t0.elapsed().as_secs_f64());
        out = Some(v);
    }
    Ok((out.unwrap(), median(times)))
}

/// Fits at one resolution and returns `(max error, median fit seconds)`.
pub fn run_single(problem: &dyn TestProblem, cfg: &StudyConfig, n: usize) -> Result<(f64, f64)> {
    let dom = problem.domain();
    let d = cfg.degree;
    let l = cfg.fd_order();
    let axes: Vec<Axis> = dom
        .iter()
        .map(|&(a, b)| Axis::new(axis_nodes(a, b, n, cfg.mesh)))
        .collect::<Result<_>>()?;
    if cfg.hermite && problem.partials(&vec![dom[0].0; problem.dim()]).is_none() {
        return Err(QiError::MissingData("this problem has no exact partials"));
    }
    match problem.dim() {
        1 => {
            let xs = axes[0].samples();
            let f: Vec<f64> = xs.iter().map(|&x| problem.value(&[x])).collect();
            let (s, secs) = if cfg.hermite {
                let df = xs
                    .iter()
                    .map(|&x| problem.partials(&[x]).unwrap()[0])
                    .collect();
                let data = HermiteData::scalar(axes[0].clone(), f, df);
                timed(cfg.repetitions, || qi_hermite(&data, d))?
            } else {
                timed(cfg.repetitions, || qi_approx(&axes[0], &f, 1, d, l))?
            };
            let m = cfg.eval_points.unwrap_or(1000);
            let (a, b) = dom[0];
            let mut err: f64 = 0.0;
            for x in linspace(a, b, m) {
                err = err.max((s.eval1(x, 0)? - problem.value(&[x])).abs());
            }
            Ok((err, secs))
        }
        2 => {
            let (xs, ys) = (axes[0].samples(), axes[1].samples());
            let mut f = Vec::with_capacity(xs.len() * ys.len());
            for &y in ys {
                for &x in xs {
                    f.push(problem.value(&[x, y]));
                }
            }
            let mut g = GridSample2D::new(axes[0].clone(), axes[1].clone(), f)?;
            let (s, secs) = if cfg.hermite {
                let mut p = [Vec::new(), Vec::new(), Vec::new()];
                for &y in ys {
                    for &x in xs {
                        let v = problem.partials(&[x, y]).unwrap();
                        for k in 0..3 {
                            p[k].push(v[k]);
                        }
                    }
                }
                let [fx, fy, fxy] = p;
                g = g.with_derivatives(fx, fy, fxy)?;
                timed(cfg.repetitions, || qi2d_hermite(&g, [d, d]))?
            } else {
                timed(cfg.repetitions, || qi2d_approx(&g, [d, d], [l, l]))?
            };
            let m = cfg.eval_points.unwrap_or(101);
            let ex = linspace(dom[0].0, dom[0].1, m);
            let ey = linspace(dom[1].0, dom[1].1, m);
            let vals = s.eval_grid(&ex, &ey, 0, 0)?;
            let mut err: f64 = 0.0;
            for (j, &y) in ey.iter().enumerate() {
                for (i, &x) in ex.iter().enumerate() {
                    err = err.max((vals[i + m * j] - problem.value(&[x, y])).abs());
                }
            }
            Ok((err, secs))
        }
        3 => {
            if cfg.hermite {
                return Err(QiError::InvalidInput(
                    "Hermite fits are available in one and two dimensions only".into(),
                ));
            }
            let shape: Vec<usize> = axes.iter().map(Axis::sample_count).collect();
            let mut f = Vec::with_capacity(shape.iter().product());
            for &z in axes[2].samples() {
                for &y in axes[1].samples() {
                    for &x in axes[0].samples() {
                        f.push(problem.value(&[x, y, z]));
                    }
                }
            }
            let axes3: [Axis; 3] = [axes[0].clone(), axes[1].clone(), axes[2].clone()];
            let g = GridSample3D::new(axes3, f)?;
            let (v, secs) = timed(cfg.repetitions, || qi3d_approx(&g, [d, d, d], [l, l, l]))?;
            drop(g);
            let m = cfg.eval_points.unwrap_or(101);
            let e: Vec<Vec<f64>> = dom.iter().map(|&(a, b)| linspace(a, b, m)).collect();
            let vals = v.eval_grid([&e[0], &e[1], &e[2]], [0, 0, 0])?;
            let mut err: f64 = 0.0;
            for (k, &z) in e[2].iter().enumerate() {
                for (j, &y) in e[1].iter().enumerate() {
                    for (i, &x) in e[0].iter().enumerate() {
                        let r = vals[i + m * (j + m * k)];
                        err = err.max((r - problem.value(&[x, y, z])).abs());
                    }
                }
            }
            Ok((err, secs))
        }
        k => Err(QiError::InvalidInput(format!("unsupported dimension {k}"))),
    }
}

/// Runs a refinement study over `cfg.ns`.
pub fn run_study(problem: &dyn TestProblem, cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    if cfg.ns.is_empty() {
        return Err(QiError::InvalidInput("empty list of resolutions".into()));
    }
    let mut rows: Vec<StudyRow> = Vec::with_capacity(cfg.ns.len());
    for &n in &cfg.ns {
        let (error, seconds) = run_single(problem, cfg, n)?;
        let order = rows
            .last()
            .map(|p| estimate_order(&[p.error, error], &[p.n, n])[0]);
        rows.push(StudyRow {
            n,
            error,
            order,
            seconds,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_estimates() {
        assert_eq!(estimate_order(&[1.0, 1.0 / 16.0], &[16, 32]), vec![4.0]);
        assert_eq!(estimate_order(&[0.3, 0.3], &[16, 32]), vec![0.0]);
        let o = estimate_order(&[7.5e-8, 4.2e-9], &[512, 1024])[0];
        assert!((o - 4.16).abs() < 0.01, "{o}");
    }

    #[test]
    fn slope_of_exact_power_law() {
        let ns = [16, 32, 64, 128];
        let e: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powi(-5)).collect();
        assert!((loglog_slope(&ns, &e) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn registry_names_are_unique() {
        let names = problem_names();
        assert_eq!(names, ["f1", "f2", "sin", "franke", "scherk", "ball3d"]);
        assert!(lookup("nope").is_none());
    }

    #[test]
    fn partials_match_finite_differences() {
        let h = 1e-6;
        for p in registry() {
            let dom = p.domain();
            let x: Vec<f64> = dom.iter().map(|(a, b)| a + 0.37 * (b - a)).collect();
            let Some(g) = p.partials(&x) else { continue };
            let shifted = |k: usize, s: f64| {
                let mut y = x.clone();
                y[k] += s;
                y
            };
            for (k, gk) in g.iter().enumerate().take(p.dim()) {
                let fd = (p.value(&shifted(k, h)) - p.value(&shifted(k, -h))) / (2.0 * h);
                assert!(
                    (fd - gk).abs() < 1e-5 * (1.0 + fd.abs()),
                    "{} d{k}",
                    p.name()
                );
            }
            if p.dim() == 2 {
                let gy = |x: &[f64]| p.partials(x).unwrap()[1];
                let fd = (gy(&shifted(0, h)) - gy(&shifted(0, -h))) / (2.0 * h);
                assert!(
                    (fd - g[2]).abs() < 1e-5 * (1.0 + fd.abs()),
                    "{} dxy",
                    p.name()
                );
            }
        }
    }

    #[test]
    fn graded_mesh_is_symmetric_and_clustered() {
        let x = graded_mesh(0.0, 2.0, 32, 3.0);
        assert_eq!(x[0], 0.0);
        assert_eq!(x[32], 2.0);
        for i in 0..=32 {
            assert!((x[i] + x[32 - i] - 2.0).abs() < 1e-14);
        }
        assert!(x[1] - x[0] < x[17] - x[16]);
    }
}
