//! One-dimensional Hermite B-spline quasi-interpolation.
//!
//! Coefficient `i` of the quasi-interpolant is the local functional
//!
//! ```text
//! μ_i(f) = Σ_r α_r f(x_{s+r}) - ĥ_i Σ_r β_r f'(x_{s+r}),   r = 0..d-1
//! ```
//!
//! on `d` consecutive nodes starting at `s = clamp(i - d + 1, 0, N - d + 1)`
//! (cyclic `s = i - d + 1` on periodic axes). The weights solve a `2d x 2d`
//! system: the functional must return `δ_{m,i}` for each of the `2d - 1`
//! B-splines `B_m` that do not vanish on the stencil, and the derivative
//! weights must sum to zero. The first `2d - 1` rows make the operator
//! reproduce every spline in the space; the last row closes the system and
//! keeps uniform interior stencils symmetric.

use crate::basis::ders_basis_funs;
use crate::error::{QiError, Result};
use crate::fd::FdOperator;
use crate::knots::{Axis, KnotVector};
use crate::linalg::lu_solve;
use crate::spline::SplineCurve;

/// Default finite-difference order for degree `d`: `d + 1` for odd `d`,
/// `d + 2` for even `d`.
pub fn default_fd_order(degree: usize) -> usize {
    if degree % 2 == 1 {
        degree + 1
    } else {
        degree + 2
    }
}

/// Weights of a single coefficient functional.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalWeights {
    /// First stencil node (may be negative or exceed `N` on periodic axes).
    pub start: isize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Step scale `ĥ_i`.
    pub hhat: f64,
    /// Combined derivative weights `ĥ_i β`.
    pub w: Vec<f64>,
}

/// `τ_q` of the extended knot vector for any integer `q`, unwrapped by whole
/// periods on periodic vectors.
fn knot_at(kv: &KnotVector, q: isize) -> f64 {
    let d = kv.degree() as isize;
    if kv.is_periodic() {
        let bp = kv.breakpoints();
        let n = (bp.len() - 1) as isize;
        let idx = q - d;
        let t = bp[n as usize] - bp[0];
        bp[idx.rem_euclid(n) as usize] + idx.div_euclid(n) as f64 * t
    } else {
        kv.knots()[q as usize]
    }
}

fn mesh_step(kv: &KnotVector, k: isize) -> f64 {
    // h_k = x_k - x_{k-1}
    if kv.is_periodic() {
        knot_at(kv, k + kv.degree() as isize) - knot_at(kv, k - 1 + kv.degree() as isize)
    } else {
        let bp = kv.breakpoints();
        let k = k.clamp(1, (bp.len() - 1) as isize) as usize;
        bp[k] - bp[k - 1]
    }
}

fn stencil_start(kv: &KnotVector, i: usize) -> isize {
    let d = kv.degree() as isize;
    let s = i as isize - d + 1;
    if kv.is_periodic() {
        s
    } else {
        s.clamp(0, kv.intervals() as isize - d + 1)
    }
}

/// Step scale `ĥ_i` for 0-based coefficient `i` and split `(k1, k2)`.
fn step_scale(kv: &KnotVector, i: usize, k1: usize, k2: usize) -> f64 {
    let d = kv.degree() as isize;
    let n = kv.intervals() as isize;
    let i1 = i as isize + 1;
    let (k1, k2) = (k1 as isize, k2 as isize);
    if kv.is_periodic() {
        return mesh_step(kv, k1 + i1 - d);
    }
    if i1 <= d {
        mesh_step(kv, k1)
    } else if i1 <= n {
        mesh_step(kv, k1 + i1 - d)
    } else {
        mesh_step(kv, n - k2)
    }
}

/// The standard split `k1 = k2 = ⌈d/2⌉`.
pub fn default_split(degree: usize) -> (usize, usize) {
    let k = degree.div_ceil(2);
    (k, k)
}

/// Weights of the functional for coefficient `i` (0-based).
pub fn local_weights(kv: &KnotVector, i: usize) -> Result<LocalWeights> {
    let (k1, k2) = default_split(kv.degree());
    local_weights_with_split(kv, i, k1, k2)
}

/// As [`local_weights`] with an explicit `(k1, k2)` choice for `ĥ_i`.
pub fn local_weights_with_split(
    kv: &KnotVector,
    i: usize,
    k1: usize,
    k2: usize,
) -> Result<LocalWeights> {
    let n = kv.num_coefficients();
    if i >= n {
        return Err(QiError::DimensionMismatch {
            what: "coefficient index",
            expected: n,
            got: i,
        });
    }
    let d = kv.degree();
    let start = stencil_start(kv, i);
    let hhat = step_scale(kv, i, k1, k2);
    if d == 1 {
        return Ok(LocalWeights {
            start,
            alpha: vec![1.0],
            beta: vec![0.0],
            hhat,
            w: vec![0.0],
        });
    }
    // Local knots τ_{s}..τ_{s+3d-1}: they carry exactly the 2d - 1
    // B-splines B_s..B_{s+2d-2} that are non-zero on the stencil, and the
    // stencil nodes are local knots d..2d-1.
    let local: Vec<f64> = (0..3 * d as isize)
        .map(|q| knot_at(kv, start + q))
        .collect();
    let target = (i as isize - start) as usize;
    let (alpha, beta) = solve_local(&local, d, target, hhat)?;
    let w = beta.iter().map(|b| b * hhat).collect();
    Ok(LocalWeights {
        start,
        alpha,
        beta,
        hhat,
        w,
    })
}

/// Solves the local exactness system on a `3d`-knot window for the
/// functional that extracts local B-spline `target`.
fn solve_local(local: &[f64], d: usize, target: usize, hhat: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = 2 * d;
    let w = d + 1;
    let mut a = vec![0.0; m * m];
    let mut ders = vec![0.0; 2 * w];
    for r in 0..d {
        let x = local[d + r];
        let span = d + r.min(d - 2);
        ders_basis_funs(local, d, span, x, 1, &mut ders);
        for k in 0..=d {
            let bspl = span - d + k;
            a[bspl * m + r] = ders[k];
            a[bspl * m + d + r] = -hhat * ders[w + k];
        }
    }
    for r in 0..d {
        a[(m - 1) * m + d + r] = 1.0;
    }
    let mut rhs = vec![0.0; m];
    rhs[target] = 1.0;
    lu_solve(&mut a, &mut rhs, m).ok_or(QiError::Singular("quasi-interpolant weights"))?;
    let beta = rhs.split_off(d);
    Ok((rhs, beta))
}

/// All coefficient functionals of a spline space, i.e. the banded matrices
/// `Â`, `B̂` and the diagonal `Ĥ`.
#[derive(Debug, Clone)]
pub struct QiWeights {
    degree: usize,
    split: (usize, usize),
    starts: Vec<isize>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    hhat: Vec<f64>,
    w: Vec<f64>,
}

impl QiWeights {
    pub fn new(kv: &KnotVector) -> Result<Self> {
        let (k1, k2) = default_split(kv.degree());
        Self::with_split(kv, k1, k2)
    }

    /// Builds every functional; on uniform meshes the stencils away from
    /// the clamped ends share one solved weight set.
    pub fn with_split(kv: &KnotVector, k1: usize, k2: usize) -> Result<Self> {
        let d = kv.degree();
        let n = kv.num_coefficients();
        let bp = kv.breakpoints();
        let big_n = kv.intervals() as isize;
        let h = (bp[bp.len() - 1] - bp[0]) / big_n as f64;
        let uniform = bp
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h);
        let mut out = Self {
            degree: d,
            split: (k1, k2),
            starts: Vec::with_capacity(n),
            alpha: Vec::with_capacity(n * d),
            beta: Vec::with_capacity(n * d),
            hhat: Vec::with_capacity(n),
            w: Vec::with_capacity(n * d),
        };
        let mut cached: Option<(Vec<f64>, Vec<f64>)> = None;
        let di = d as isize;
        for i in 0..n {
            let s = stencil_start(kv, i);
            let shift_invariant =
                uniform && (kv.is_periodic() || (s >= di && s + 2 * di - 1 <= big_n));
            let lw = if shift_invariant && d > 1 {
                let hhat = step_scale(kv, i, k1, k2);
                let (alpha, beta) = match &cached {
                    Some(c) => c.clone(),
                    None => {
                        let lw = local_weights_with_split(kv, i, k1, k2)?;
                        cached = Some((lw.alpha.clone(), lw.beta.clone()));
                        (lw.alpha, lw.beta)
                    }
                };
                let w = beta.iter().map(|b| b * hhat).collect();
                LocalWeights {
                    start: s,
                    alpha,
                    beta,
                    hhat,
                    w,
                }
            } else {
                local_weights_with_split(kv, i, k1, k2)?
            };
            out.starts.push(lw.start);
            out.alpha.extend_from_slice(&lw.alpha);
            out.beta.extend_from_slice(&lw.beta);
            out.w.extend_from_slice(&lw.w);
            out.hhat.push(lw.hhat);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn split(&self) -> (usize, usize) {
        self.split
    }

    pub fn start(&self, i: usize) -> isize {
        self.starts[i]
    }

    pub fn alpha(&self, i: usize) -> &[f64] {
        &self.alpha[i * self.degree..(i + 1) * self.degree]
    }

    pub fn beta(&self, i: usize) -> &[f64] {
        &self.beta[i * self.degree..(i + 1) * self.degree]
    }

    pub fn hhat(&self, i: usize) -> f64 {
        self.hhat[i]
    }

    /// Combined derivative weights `ĥ_i β`.
    pub fn w(&self, i: usize) -> &[f64] {
        &self.w[i * self.degree..(i + 1) * self.degree]
    }
}

/// Quasi-interpolation operator of fixed degree on an axis.
#[derive(Debug, Clone)]
pub struct QiOperator {
    axis: Axis,
    kv: KnotVector,
    weights: QiWeights,
}

impl QiOperator {
    pub fn new(axis: &Axis, degree: usize) -> Result<Self> {
        let (k1, k2) = default_split(degree.max(1));
        Self::with_split(axis, degree, k1, k2)
    }

    pub fn with_split(axis: &Axis, degree: usize, k1: usize, k2: usize) -> Result<Self> {
        let kv = KnotVector::from_axis(degree, axis)?;
        if axis.is_periodic() && axis.intervals() < degree + 1 {
            return Err(QiError::TooFewIntervals {
                what: "a periodic quasi-interpolant",
                needed: degree + 1,
                got: axis.intervals(),
            });
        }
        let weights = QiWeights::with_split(&kv, k1, k2)?;
        Ok(Self {
            axis: axis.clone(),
            kv,
            weights,
        })
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn knots(&self) -> &KnotVector {
        &self.kv
    }

    pub fn weights(&self) -> &QiWeights {
        &self.weights
    }

    pub fn num_coefficients(&self) -> usize {
        self.weights.len()
    }

    pub fn num_samples(&self) -> usize {
        self.axis.sample_count()
    }

    /// `μ = Â f - Ĥ B̂ f'` for one column of samples.
    pub(crate) fn apply_unchecked(&self, f: &[f64], df: &[f64], out: &mut [f64]) {
        let d = self.weights.degree;
        let periodic = self.axis.is_periodic();
        for (i, o) in out.iter_mut().enumerate() {
            let s = self.weights.starts[i];
            let alpha = &self.weights.alpha[i * d..(i + 1) * d];
            let w = &self.weights.w[i * d..(i + 1) * d];
            let mut acc = 0.0;
            if periodic {
                for r in 0..d {
                    let k = self.axis.sample_slot(s + r as isize);
                    acc += alpha[r] * f[k] - w[r] * df[k];
                }
            } else {
                let s = s as usize;
                for r in 0..d {
                    acc += alpha[r] * f[s + r] - w[r] * df[s + r];
                }
            }
            *o = acc;
        }
    }

    /// Coefficients from values and derivatives of one scalar column.
    pub fn apply(&self, f: &[f64], df: &[f64]) -> Result<Vec<f64>> {
        let m = self.num_samples();
        for (what, v) in [("sample values", f), ("sample derivatives", df)] {
            if v.len() != m {
                return Err(QiError::DimensionMismatch {
                    what,
                    expected: m,
                    got: v.len(),
                });
            }
        }
        let mut out = vec![0.0; self.num_coefficients()];
        self.apply_unchecked(f, df, &mut out);
        Ok(out)
    }

    /// Fits a `p`-component curve from column-major value/derivative blocks.
    pub fn fit(&self, f: &[f64], df: &[f64], p: usize) -> Result<SplineCurve> {
        let m = self.num_samples();
        if p == 0 || f.len() != m * p || df.len() != m * p {
            return Err(QiError::DimensionMismatch {
                what: "Hermite data",
                expected: m * p.max(1),
                got: if f.len() != m * p { f.len() } else { df.len() },
            });
        }
        let n = self.num_coefficients();
        let mut coefs = vec![0.0; n * p];
        for k in 0..p {
            self.apply_unchecked(
                &f[k * m..(k + 1) * m],
                &df[k * m..(k + 1) * m],
                &mut coefs[k * n..(k + 1) * n],
            );
        }
        SplineCurve::new(self.kv.clone(), p, coefs)
    }
}

/// Quasi-interpolant with derivatives replaced by an order-`l` finite
/// difference: the operator `W = Â - Ĥ B̂ Γ`.
#[derive(Debug, Clone)]
pub struct ApproxQi {
    qi: QiOperator,
    fd: FdOperator,
}

impl ApproxQi {
    pub fn new(axis: &Axis, degree: usize, fd_order: usize) -> Result<Self> {
        let qi = QiOperator::new(axis, degree)?;
        let fd = FdOperator::new(axis, fd_order)?;
        Ok(Self { qi, fd })
    }

    pub fn qi(&self) -> &QiOperator {
        &self.qi
    }

    pub fn fd(&self) -> &FdOperator {
        &self.fd
    }

    pub fn num_coefficients(&self) -> usize {
        self.qi.num_coefficients()
    }

    pub fn num_samples(&self) -> usize {
        self.qi.num_samples()
    }

    pub(crate) fn apply_with_scratch(&self, f: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        self.fd.apply_unchecked(f, scratch);
        self.qi.apply_unchecked(f, scratch, out);
    }

    /// Coefficients `W f` of one column of samples.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let m = self.num_samples();
        if f.len() != m {
            return Err(QiError::DimensionMismatch {
                what: "sample values",
                expected: m,
                got: f.len(),
            });
        }
        let mut scratch = vec![0.0; m];
        let mut out = vec![0.0; self.num_coefficients()];
        self.apply_with_scratch(f, &mut scratch, &mut out);
        Ok(out)
    }

    pub fn fit(&self, f: &[f64], p: usize) -> Result<SplineCurve> {
        let df = self.fd.apply(f, p)?;
        self.qi.fit(f, &df, p)
    }

    /// Dense row-major `(coefficients x samples)` matrix of `W`.
    pub fn matrix(&self) -> Vec<f64> {
        let m = self.num_samples();
        let n = self.num_coefficients();
        let mut out = vec![0.0; n * m];
        let mut e = vec![0.0; m];
        let mut scratch = vec![0.0; m];
        let mut col = vec![0.0; n];
        for j in 0..m {
            e[j] = 1.0;
            self.apply_with_scratch(&e, &mut scratch, &mut col);
            for i in 0..n {
                out[i * m + j] = col[i];
            }
            e[j] = 0.0;
        }
        out
    }
}

/// Hermite samples on an axis; `values` and `derivatives` are column-major
/// `(samples x dim)` blocks.
#[derive(Debug, Clone)]
pub struct HermiteData {
    pub axis: Axis,
    pub dim: usize,
    pub values: Vec<f64>,
    pub derivatives: Option<Vec<f64>>,
}

impl HermiteData {
    pub fn scalar(axis: Axis, values: Vec<f64>, derivatives: Vec<f64>) -> Self {
        Self {
            axis,
            dim: 1,
            values,
            derivatives: Some(derivatives),
        }
    }
}

/// Hermite quasi-interpolant of degree `d` from values and exact derivatives.
pub fn qi_hermite(data: &HermiteData, degree: usize) -> Result<SplineCurve> {
    let df = data.derivatives.as_ref().ok_or(QiError::MissingData(
        "Hermite fit requires derivative samples",
    ))?;
    QiOperator::new(&data.axis, degree)?.fit(&data.values, df, data.dim)
}

/// Quasi-interpolant from values only, derivatives approximated by an
/// order-`fd_order` finite difference.
pub fn qi_approx(
    axis: &Axis,
    values: &[f64],
    dim: usize,
    degree: usize,
    fd_order: usize,
) -> Result<SplineCurve> {
    ApproxQi::new(axis, degree, fd_order)?.fit(values, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knots::linspace;

    fn axis(n: usize) -> Axis {
        Axis::uniform(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn linear_degree_is_nodal() {
        let kv = KnotVector::new(1, &linspace(0.0, 1.0, 6), false).unwrap();
        for i in 0..kv.num_coefficients() {
            let lw = local_weights(&kv, i).unwrap();
            assert_eq!(lw.alpha, vec![1.0]);
            assert_eq!(lw.w, vec![0.0]);
            assert_eq!(lw.start, i as isize);
        }
    }

    #[test]
    fn alphas_sum_to_one() {
        let bps = [0.0, 0.1, 0.3, 0.35, 0.6, 0.61, 0.8, 1.0, 1.2, 1.5, 2.0, 2.4];
        for d in 1..=5 {
            for periodic in [false, true] {
                let kv = KnotVector::new(d, &bps, periodic).unwrap();
                for i in 0..kv.num_coefficients() {
                    let lw = local_weights(&kv, i).unwrap();
                    let s: f64 = lw.alpha.iter().sum();
                    assert!((s - 1.0).abs() < 1e-12, "d={d} i={i} sum={s}");
                    let ws: f64 = lw.beta.iter().sum();
                    assert!(ws.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn quadratic_uniform_interior_by_hand() {
        // For d = 2 on a uniform mesh the functional on nodes (x_1, x_2) of a
        // cardinal quadratic is (f_1 + f_2)/2 + h (f'_1 - f'_2)/4: the unique
        // solution of the three exactness rows plus Σβ = 0.
        let h = 0.125;
        let kv = KnotVector::new(2, &linspace(0.0, 1.0, 9), false).unwrap();
        let lw = local_weights(&kv, 4).unwrap();
        assert!((lw.alpha[0] - 0.5).abs() < 1e-14 && (lw.alpha[1] - 0.5).abs() < 1e-14);
        assert!((lw.w[0] + h / 4.0).abs() < 1e-15 && (lw.w[1] - h / 4.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_uniform_interior_independent_of_index() {
        let kv = KnotVector::new(3, &linspace(-1.0, 1.0, 41), false).unwrap();
        let d = 3;
        // stencils touching no clamped knot: d <= s <= N - 2d + 1
        let reference = local_weights(&kv, 2 * d - 1).unwrap();
        for i in 2 * d - 1..=40 - d {
            let lw = local_weights(&kv, i).unwrap();
            for r in 0..d {
                assert!((lw.alpha[r] - reference.alpha[r]).abs() < 1e-13);
                assert!((lw.w[r] - reference.w[r]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn weights_are_banded_windows() {
        let kv = KnotVector::new(4, &linspace(0.0, 1.0, 11), false).unwrap();
        let w = QiWeights::new(&kv).unwrap();
        assert_eq!(w.len(), 14);
        assert_eq!(w.start(0), 0);
        assert_eq!(w.start(3), 0);
        assert_eq!(w.start(4), 1);
        assert_eq!(w.start(10), 7);
        assert_eq!(w.start(13), 7);
    }

    #[test]
    fn constant_data_gives_constant_coefficients() {
        for d in 1..=5 {
            let ax = axis(12);
            let m = ax.sample_count();
            let s = qi_hermite(&HermiteData::scalar(ax, vec![3.5; m], vec![0.0; m]), d).unwrap();
            for c in s.coefficients() {
                assert!((c - 3.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn missing_derivatives_rejected() {
        let ax = axis(8);
        let data = HermiteData {
            axis: ax,
            dim: 1,
            values: vec![0.0; 9],
            derivatives: None,
        };
        assert!(matches!(qi_hermite(&data, 3), Err(QiError::MissingData(_))));
    }

    #[test]
    fn undersized_axes_rejected() {
        let ax = axis(3);
        assert!(qi_approx(&ax, &[0.0; 4], 1, 4, 4).is_err());
        assert!(qi_approx(&ax, &[0.0; 4], 1, 3, 4).is_err());
        assert!(qi_approx(&ax, &[0.0; 4], 1, 3, 3).is_ok());
        assert!(qi_approx(&ax, &[0.0; 5], 1, 3, 3).is_err());
    }

    #[test]
    fn default_orders() {
        assert_eq!(default_fd_order(2), 4);
        assert_eq!(default_fd_order(3), 4);
        assert_eq!(default_fd_order(4), 6);
        assert_eq!(default_fd_order(5), 6);
    }
}
