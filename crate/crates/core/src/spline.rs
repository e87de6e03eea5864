//! Spline curves, tensor-product surfaces and volumes in B-spline form.

use crate::basis::ders_basis_funs;
use crate::error::{QiError, Result};
use crate::knots::{span_in, KnotVector};

/// A (possibly vector-valued) spline curve.
///
/// Coefficients are stored component by component: component `k` of
/// coefficient `i` lives at `k * n + i` with `n = kv.num_coefficients()`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineCurve {
    kv: KnotVector,
    dim: usize,
    coefs: Vec<f64>,
}

impl SplineCurve {
    pub fn new(kv: KnotVector, dim: usize, coefs: Vec<f64>) -> Result<Self> {
        let n = kv.num_coefficients();
        if dim == 0 || coefs.len() != n * dim {
            return Err(QiError::DimensionMismatch {
                what: "curve coefficients",
                expected: n * dim.max(1),
                got: coefs.len(),
            });
        }
        Ok(Self { kv, dim, coefs })
    }

    /// Scalar curve from one coefficient per B-spline.
    pub fn scalar(kv: KnotVector, coefs: Vec<f64>) -> Result<Self> {
        Self::new(kv, 1, coefs)
    }

    pub fn knots(&self) -> &KnotVector {
        &self.kv
    }

    pub fn degree(&self) -> usize {
        self.kv.degree()
    }

    /// Codomain dimension `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefs
    }

    /// Coefficients of component `k`.
    pub fn component(&self, k: usize) -> &[f64] {
        let n = self.kv.num_coefficients();
        &self.coefs[k * n..(k + 1) * n]
    }

    pub fn domain(&self) -> (f64, f64) {
        self.kv.domain()
    }

    /// Value (or derivative of order `deriv_order`) at `x`, one entry per component.
    pub fn eval(&self, x: f64, deriv_order: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, deriv_order, &mut out)?;
        Ok(out)
    }

    /// Scalar convenience for `dim() == 1`.
    pub fn eval1(&self, x: f64, deriv_order: usize) -> Result<f64> {
        let mut out = [0.0];
        self.eval_into(x, deriv_order, &mut out[..1.min(self.dim)])?;
        Ok(out[0])
    }

    pub fn eval_into(&self, x: f64, deriv_order: usize, out: &mut [f64]) -> Result<()> {
        let d = self.kv.degree();
        let (span, x) = self.kv.locate(x)?;
        let mut buf = vec![0.0; (deriv_order + 1) * (d + 1)];
        ders_basis_funs(self.kv.knots(), d, span, x, deriv_order, &mut buf);
        let vals = &buf[deriv_order * (d + 1)..];
        let n = self.kv.num_coefficients();
        for (k, o) in out.iter_mut().enumerate().take(self.dim) {
            let c = &self.coefs[k * n..(k + 1) * n];
            *o = vals
                .iter()
                .enumerate()
                .map(|(r, b)| b * c[self.kv.coefficient_index(span - d + r)])
                .sum();
        }
        Ok(())
    }

    /// Exact antiderivative vanishing at the left end of the domain.
    pub fn antiderivative(&self) -> Antiderivative {
        Antiderivative::new(self)
    }

    /// `∫_{x0}^{x1} s(x) dx`, component-wise.
    pub fn integral(&self, x0: f64, x1: f64) -> Result<Vec<f64>> {
        let (a, b) = self.domain();
        for x in [x0, x1] {
            if !(a..=b).contains(&x) {
                return Err(QiError::OutOfDomain { x, a, b });
            }
        }
        let anti = self.antiderivative();
        let hi = anti.eval(x1)?;
        let lo = anti.eval(x0)?;
        Ok(hi.iter().zip(&lo).map(|(h, l)| h - l).collect())
    }
}

/// Degree `d + 1` antiderivative of a curve on the knots extended by one
/// extra end knot on each side.
///
/// `∫ B_{i,d} = (t_{i+d+1} - t_i)/(d+1) Σ_{m >= i} B_{m,d+1}`, so the
/// antiderivative coefficients are running sums of scaled curve coefficients.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    degree: usize,
    knots: Vec<f64>,
    breakpoints: Vec<f64>,
    dim: usize,
    /// per component, `num_basis + 1` coefficients
    coefs: Vec<f64>,
    offset: Vec<f64>,
}

impl Antiderivative {
    fn new(s: &SplineCurve) -> Self {
        let kv = &s.kv;
        let d = kv.degree();
        let t = kv.knots();
        let nb = kv.num_basis();
        let mut knots = Vec::with_capacity(t.len() + 2);
        knots.push(t[0]);
        knots.extend_from_slice(t);
        knots.push(*t.last().unwrap());
        let m = nb + 1;
        let n = kv.num_coefficients();
        let mut coefs = vec![0.0; m * s.dim];
        for k in 0..s.dim {
            let c = &s.coefs[k * n..(k + 1) * n];
            let mut acc = 0.0;
            for i in 0..nb {
                acc += c[kv.coefficient_index(i)] * (t[i + d + 1] - t[i]) / (d + 1) as f64;
                coefs[k * m + i + 1] = acc;
            }
        }
        let mut anti = Self {
            degree: d + 1,
            knots,
            breakpoints: kv.breakpoints().to_vec(),
            dim: s.dim,
            coefs,
            offset: vec![0.0; s.dim],
        };
        // Periodic knots start left of the domain; shift so F(a) = 0.
        let a = anti.breakpoints[0];
        let fa = anti.raw_eval(a);
        anti.offset = fa;
        anti
    }

    fn raw_eval(&self, x: f64) -> Vec<f64> {
        let p = self.degree;
        let span = (p - 1) + 1 + span_in(&self.breakpoints, x);
        let mut buf = vec![0.0; p + 1];
        ders_basis_funs(&self.knots, p, span, x, 0, &mut buf);
        let m = self.knots.len() - p - 1;
        (0..self.dim)
            .map(|k| {
                buf.iter()
                    .enumerate()
                    .map(|(r, b)| b * self.coefs[k * m + span - p + r])
                    .sum()
            })
            .collect()
    }

    /// `∫_a^x s`, component-wise.
    pub fn eval(&self, x: f64) -> Result<Vec<f64>> {
        let a = self.breakpoints[0];
        let b = *self.breakpoints.last().unwrap();
        if !(a..=b).contains(&x) {
            return Err(QiError::OutOfDomain { x, a, b });
        }
        Ok(self
            .raw_eval(x)
            .iter()
            .zip(&self.offset)
            .map(|(v, o)| v - o)
            .collect())
    }
}

/// Per-axis evaluation plan: active spans and basis derivatives at a list
/// of coordinates, shared by the grid evaluators.
struct AxisPlan {
    first: Vec<usize>,
    vals: Vec<f64>,
    width: usize,
}

impl AxisPlan {
    fn new(kv: &KnotVector, xs: &[f64], order: usize) -> Result<Self> {
        let d = kv.degree();
        let w = d + 1;
        let mut first = Vec::with_capacity(xs.len());
        let mut vals = vec![0.0; xs.len() * w];
        let mut scratch = Vec::new();
        for (q, &x) in xs.iter().enumerate() {
            first.push(kv.basis_into(x, order, &mut scratch, &mut vals[q * w..(q + 1) * w])?);
        }
        Ok(Self {
            first,
            vals,
            width: w,
        })
    }

    fn row(&self, q: usize) -> &[f64] {
        &self.vals[q * self.width..(q + 1) * self.width]
    }
}

/// Tensor-product spline surface `s(x, y) = Σ_p Σ_q c_pq φ_p(x) ψ_q(y)`.
///
/// Coefficients are stored with the x index fastest: `c_pq` at `p + n1 * q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSurface {
    kx: KnotVector,
    ky: KnotVector,
    coefs: Vec<f64>,
}

impl SplineSurface {
    pub fn new(kx: KnotVector, ky: KnotVector, coefs: Vec<f64>) -> Result<Self> {
        let n = kx.num_coefficients() * ky.num_coefficients();
        if coefs.len() != n {
            return Err(QiError::DimensionMismatch {
                what: "surface coefficients",
                expected: n,
                got: coefs.len(),
            });
        }
        Ok(Self { kx, ky, coefs })
    }

    pub fn knots_x(&self) -> &KnotVector {
        &self.kx
    }

    pub fn knots_y(&self) -> &KnotVector {
        &self.ky
    }

    /// Coefficient matrix, x index fastest.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefs
    }

    pub fn shape(&self) -> [usize; 2] {
        [self.kx.num_coefficients(), self.ky.num_coefficients()]
    }

    pub fn coef(&self, p: usize, q: usize) -> f64 {
        self.coefs[p + self.kx.num_coefficients() * q]
    }

    pub fn eval(&self, x: f64, y: f64, dx_order: usize, dy_order: usize) -> Result<f64> {
        let px = AxisPlan::new(&self.kx, &[x], dx_order)?;
        let py = AxisPlan::new(&self.ky, &[y], dy_order)?;
        Ok(self.contract(&px, 0, &py, 0))
    }

    fn contract(&self, px: &AxisPlan, qx: usize, py: &AxisPlan, qy: usize) -> f64 {
        let n1 = self.kx.num_coefficients();
        let (fx, fy) = (px.first[qx], py.first[qy]);
        let mut acc = 0.0;
        for (s, by) in py.row(qy).iter().enumerate() {
            let col = self.ky.coefficient_index(fy + s) * n1;
            let mut inner = 0.0;
            for (r, bx) in px.row(qx).iter().enumerate() {
                inner += bx * self.coefs[col + self.kx.coefficient_index(fx + r)];
            }
            acc += by * inner;
        }
        acc
    }

    /// Values on the rectilinear grid `xs × ys`, x index fastest.
    pub fn eval_grid(
        &self,
        xs: &[f64],
        ys: &[f64],
        dx_order: usize,
        dy_order: usize,
    ) -> Result<Vec<f64>> {
        let px = AxisPlan::new(&self.kx, xs, dx_order)?;
        let py = AxisPlan::new(&self.ky, ys, dy_order)?;
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for qy in 0..ys.len() {
            for qx in 0..xs.len() {
                out.push(self.contract(&px, qx, &py, qy));
            }
        }
        Ok(out)
    }
}

/// Trivariate tensor-product spline; coefficients stored x fastest, then y, then z.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineVolume {
    kv: [KnotVector; 3],
    coefs: Vec<f64>,
}

impl SplineVolume {
    pub fn new(kv: [KnotVector; 3], coefs: Vec<f64>) -> Result<Self> {
        let n: usize = kv.iter().map(KnotVector::num_coefficients).product();
        if coefs.len() != n {
            return Err(QiError::DimensionMismatch {
                what: "volume coefficients",
                expected: n,
                got: coefs.len(),
            });
        }
        Ok(Self { kv, coefs })
    }

    pub fn knots(&self) -> &[KnotVector; 3] {
        &self.kv
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefs
    }

    pub fn shape(&self) -> [usize; 3] {
        [
            self.kv[0].num_coefficients(),
            self.kv[1].num_coefficients(),
            self.kv[2].num_coefficients(),
        ]
    }

    pub fn eval(&self, x: f64, y: f64, z: f64, orders: [usize; 3]) -> Result<f64> {
        let plans = [
            AxisPlan::new(&self.kv[0], &[x], orders[0])?,
            AxisPlan::new(&self.kv[1], &[y], orders[1])?,
            AxisPlan::new(&self.kv[2], &[z], orders[2])?,
        ];
        Ok(self.contract(&plans, [0, 0, 0]))
    }

    fn contract(&self, plans: &[AxisPlan; 3], q: [usize; 3]) -> f64 {
        let [n0, n1, _] = self.shape();
        let f = [
            plans[0].first[q[0]],
            plans[1].first[q[1]],
            plans[2].first[q[2]],
        ];
        let mut acc = 0.0;
        for (t, bz) in plans[2].row(q[2]).iter().enumerate() {
            let kz = self.kv[2].coefficient_index(f[2] + t) * n0 * n1;
            let mut plane = 0.0;
            for (s, by) in plans[1].row(q[1]).iter().enumerate() {
                let ky = kz + self.kv[1].coefficient_index(f[1] + s) * n0;
                let mut line = 0.0;
                for (r, bx) in plans[0].row(q[0]).iter().enumerate() {
                    line += bx * self.coefs[ky + self.kv[0].coefficient_index(f[0] + r)];
                }
                plane += by * line;
            }
            acc += bz * plane;
        }
        acc
    }

    /// Values on the grid `xs × ys × zs`, x index fastest.
    pub fn eval_grid(&self, axes: [&[f64]; 3], orders: [usize; 3]) -> Result<Vec<f64>> {
        let plans = [
            AxisPlan::new(&self.kv[0], axes[0], orders[0])?,
            AxisPlan::new(&self.kv[1], axes[1], orders[1])?,
            AxisPlan::new(&self.kv[2], axes[2], orders[2])?,
        ];
        let mut out = Vec::with_capacity(axes.iter().map(|a| a.len()).product());
        for k in 0..axes[2].len() {
            for j in 0..axes[1].len() {
                for i in 0..axes[0].len() {
                    out.push(self.contract(&plans, [i, j, k]));
                }
            }
        }
        Ok(out)
    }
}
