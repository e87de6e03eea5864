//! Tensor-product quasi-interpolation of gridded data in two and three
//! dimensions.
//!
//! Grid values are stored with the x index fastest: `F[i + m1 * j]` is
//! `f(x_i, y_j)`. With `W = Â - Ĥ B̂ Γ` per axis, the approximate surface has
//! coefficients `C = W_x F W_yᵀ` and the volume `𝒞 = 𝓕 ×₁ W_x ×₂ W_y ×₃ W_z`.
//! Both are evaluated as successive 1D fits along one axis at a time; along
//! the second axis the finite differences act on the x-fitted coefficients
//! `D`, never on a third derivative grid.

use crate::error::{QiError, Result};
use crate::knots::{Axis, KnotVector};
use crate::qi1d::{ApproxQi, QiOperator};
use crate::spline::{SplineSurface, SplineVolume};
use crate::tensor::Tensor;

/// Samples of `f` (and optionally its partials) on a rectilinear 2D grid.
#[derive(Debug, Clone)]
pub struct GridSample2D {
    pub x: Axis,
    pub y: Axis,
    pub f: Vec<f64>,
    pub fx: Option<Vec<f64>>,
    pub fy: Option<Vec<f64>>,
    pub fxy: Option<Vec<f64>>,
}

impl GridSample2D {
    pub fn new(x: Axis, y: Axis, f: Vec<f64>) -> Result<Self> {
        let g = Self {
            x,
            y,
            f,
            fx: None,
            fy: None,
            fxy: None,
        };
        g.check_block("F", &g.f)?;
        Ok(g)
    }

    pub fn with_derivatives(mut self, fx: Vec<f64>, fy: Vec<f64>, fxy: Vec<f64>) -> Result<Self> {
        self.check_block("F_x", &fx)?;
        self.check_block("F_y", &fy)?;
        self.check_block("F_xy", &fxy)?;
        self.fx = Some(fx);
        self.fy = Some(fy);
        self.fxy = Some(fxy);
        Ok(self)
    }

    /// `[m1, m2]` sample counts.
    pub fn shape(&self) -> [usize; 2] {
        [self.x.sample_count(), self.y.sample_count()]
    }

    fn check_block(&self, what: &'static str, v: &[f64]) -> Result<()> {
        let n = self.x.sample_count() * self.y.sample_count();
        if v.len() != n {
            return Err(QiError::DimensionMismatch {
                what,
                expected: n,
                got: v.len(),
            });
        }
        if let Some(k) = v.iter().position(|v| !v.is_finite()) {
            return Err(QiError::NonFinite { what, index: k });
        }
        Ok(())
    }
}

/// Samples of `f` on a rectilinear 3D grid, x fastest.
#[derive(Debug, Clone)]
pub struct GridSample3D {
    pub axes: [Axis; 3],
    pub f: Vec<f64>,
}

impl GridSample3D {
    pub fn new(axes: [Axis; 3], f: Vec<f64>) -> Result<Self> {
        let n: usize = axes.iter().map(Axis::sample_count).product();
        if f.len() != n {
            return Err(QiError::DimensionMismatch {
                what: "F",
                expected: n,
                got: f.len(),
            });
        }
        if let Some(k) = f.iter().position(|v| !v.is_finite()) {
            return Err(QiError::NonFinite {
                what: "F",
                index: k,
            });
        }
        Ok(Self { axes, f })
    }

    pub fn shape(&self) -> [usize; 3] {
        [
            self.axes[0].sample_count(),
            self.axes[1].sample_count(),
            self.axes[2].sample_count(),
        ]
    }
}

/// Applies the approximate operator of each axis along its mode in turn.
pub fn qi_nd_approx(
    axes: &[Axis],
    values: Tensor,
    degrees: &[usize],
    orders: &[usize],
) -> Result<(Vec<KnotVector>, Tensor)> {
    if degrees.len() != axes.len() || orders.len() != axes.len() || values.order() != axes.len() {
        return Err(QiError::InvalidInput(format!(
            "expected {} degrees, orders and tensor modes",
            axes.len()
        )));
    }
    for (k, ax) in axes.iter().enumerate() {
        if values.shape()[k] != ax.sample_count() {
            return Err(QiError::DimensionMismatch {
                what: "grid extent",
                expected: ax.sample_count(),
                got: values.shape()[k],
            });
        }
    }
    let ops = axes
        .iter()
        .zip(degrees.iter().zip(orders))
        .map(|(ax, (&d, &l))| ApproxQi::new(ax, d, l))
        .collect::<Result<Vec<_>>>()?;
    let mut t = values;
    for (mode, op) in ops.iter().enumerate() {
        let mut scratch = vec![0.0; op.num_samples()];
        t = t.map_fibers(mode, op.num_coefficients(), |f, c| {
            op.apply_with_scratch(f, &mut scratch, c)
        });
    }
    let kvs = ops.iter().map(|op| op.qi().knots().clone()).collect();
    Ok((kvs, t))
}

/// Surface from values and exact partials `F_x`, `F_y`, `F_xy`.
pub fn qi2d_hermite(g: &GridSample2D, degrees: [usize; 2]) -> Result<SplineSurface> {
    let (fx, fy, fxy) = match (&g.fx, &g.fy, &g.fxy) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            return Err(QiError::MissingData(
                "Hermite surface fit requires F_x, F_y and F_xy",
            ))
        }
    };
    let qx = QiOperator::new(&g.x, degrees[0])?;
    let qy = QiOperator::new(&g.y, degrees[1])?;
    let shape = vec![g.x.sample_count(), g.y.sample_count()];
    let t = |v: &Vec<f64>| Tensor::new(shape.clone(), v.clone());
    let n1 = qx.num_coefficients();
    let fit_x = |a: &[f64], b: &[f64], out: &mut [f64]| qx.apply_unchecked(a, b, out);
    // D = x-fits of (F, F_x), D' = x-fits of (F_y, F_xy)
    let d = t(&g.f)?.map_fiber_pairs(&t(fx)?, 0, n1, fit_x)?;
    let dp = t(fy)?.map_fiber_pairs(&t(fxy)?, 0, n1, fit_x)?;
    let c = d.map_fiber_pairs(&dp, 1, qy.num_coefficients(), |a, b, out| {
        qy.apply_unchecked(a, b, out)
    })?;
    SplineSurface::new(qx.knots().clone(), qy.knots().clone(), c.into_data())
}

/// Surface from values only, partials replaced by finite differences of
/// orders `orders` along x and y.
pub fn qi2d_approx(
    g: &GridSample2D,
    degrees: [usize; 2],
    orders: [usize; 2],
) -> Result<SplineSurface> {
    let f = Tensor::new(g.shape().to_vec(), g.f.clone())?;
    let (kvs, c) = qi_nd_approx(&[g.x.clone(), g.y.clone()], f, &degrees, &orders)?;
    let mut kvs = kvs.into_iter();
    SplineSurface::new(kvs.next().unwrap(), kvs.next().unwrap(), c.into_data())
}

/// Volume from values only.
pub fn qi3d_approx(
    g: &GridSample3D,
    degrees: [usize; 3],
    orders: [usize; 3],
) -> Result<SplineVolume> {
    let f = Tensor::new(g.shape().to_vec(), g.f.clone())?;
    let (kvs, c) = qi_nd_approx(&g.axes, f, &degrees, &orders)?;
    let kv: [KnotVector; 3] = kvs
        .try_into()
        .map_err(|_| QiError::InvalidInput("three knot vectors expected".into()))?;
    SplineVolume::new(kv, c.into_data())
}

/// Surface over polar coordinates `(ρ, θ)`: clamped in `ρ`, periodic of
/// period `period` in `θ`. `theta` lists one period of samples without the
/// seam; `f` is `ρ`-fastest.
pub fn qi2d_polar(
    rho: &[f64],
    theta: &[f64],
    period: f64,
    f: Vec<f64>,
    degrees: [usize; 2],
    orders: [usize; 2],
) -> Result<SplineSurface> {
    let r = Axis::new(rho.to_vec())?;
    let t = Axis::periodic(theta.to_vec(), period)?;
    let g = GridSample2D::new(r, t, f)?;
    qi2d_approx(&g, degrees, orders)
}
