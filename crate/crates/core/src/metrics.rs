//! Error metrics against reference grids and a multilinear baseline.

use serde::Serialize;

use crate::error::{QiError, Result};
use crate::grid::GridFile;
use crate::knots::span_in;
use crate::serialize::Spline;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub count: usize,
    pub max_err: f64,
    pub rmse: f64,
    /// RMSE over the reference range; `None` when the range is zero.
    pub nrmse: Option<f64>,
}

pub fn compare(predicted: &[f64], reference: &[f64]) -> Result<Metrics> {
    if predicted.len() != reference.len() || reference.is_empty() {
        return Err(QiError::DimensionMismatch {
            what: "metric inputs",
            expected: reference.len(),
            got: predicted.len(),
        });
    }
    let mut max_err: f64 = 0.0;
    let mut sq = 0.0;
    for (p, r) in predicted.iter().zip(reference) {
        let e = (p - r).abs();
        max_err = max_err.max(e);
        sq += e * e;
    }
    let rmse = (sq / reference.len() as f64).sqrt();
    let (lo, hi) = reference
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let range = hi - lo;
    Ok(Metrics {
        count: reference.len(),
        max_err,
        rmse,
        nrmse: (range > 0.0).then(|| rmse / range),
    })
}

/// Values of `spline` at every node of `grid`, laid out like its `f` block.
pub fn eval_on_grid(spline: &Spline, grid: &GridFile) -> Result<Vec<f64>> {
    if grid.dims() != spline.params() || grid.components != spline.components() {
        return Err(QiError::InvalidInput(format!(
            "a {}D grid with {} component(s) cannot be compared with a {}D spline with {}",
            grid.dims(),
            grid.components,
            spline.params(),
            spline.components()
        )));
    }
    let nodes: Vec<&[f64]> = grid.axes.iter().map(|a| a.samples()).collect();
    let shape = grid.shape();
    let total: usize = shape.iter().product();
    let p = grid.components;
    let mut out = vec![0.0; total * p];
    let zeros = vec![0; shape.len()];
    let mut point = vec![0.0; shape.len()];
    for flat in 0..total {
        let mut rest = flat;
        for (k, n) in shape.iter().enumerate() {
            point[k] = nodes[k][rest % n];
            rest /= n;
        }
        let v = spline.eval(&point, &zeros)?;
        for c in 0..p {
            out[c * total + flat] = v[c];
        }
    }
    Ok(out)
}

/// Metrics of `spline` against the `f` block of `grid`.
pub fn spline_vs_grid(spline: &Spline, grid: &GridFile) -> Result<Metrics> {
    let predicted = eval_on_grid(spline, grid)?;
    compare(&predicted, grid.block("f").expect("validated grid has f"))
}

/// Multilinear interpolation of x-fastest `values` on a rectilinear grid.
pub fn multilinear(nodes: &[&[f64]], values: &[f64], point: &[f64]) -> Result<f64> {
    let k = nodes.len();
    let mut base = vec![0usize; k];
    let mut frac = vec![0.0; k];
    for a in 0..k {
        let x = nodes[a];
        let (lo, hi) = (x[0], x[x.len() - 1]);
        if !(point[a] >= lo && point[a] <= hi) || x.len() < 2 {
            return Err(QiError::OutOfDomain {
                x: point[a],
                a: lo,
                b: hi,
            });
        }
        let i = span_in(x, point[a]);
        base[a] = i;
        frac[a] = (point[a] - x[i]) / (x[i + 1] - x[i]);
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << k) {
        let mut w = 1.0;
        let mut off = 0;
        let mut stride = 1;
        for a in 0..k {
            let up = (corner >> a) & 1;
            w *= if up == 1 { frac[a] } else { 1.0 - frac[a] };
            off += (base[a] + up) * stride;
            stride *= nodes[a].len();
        }
        if w != 0.0 {
            acc += w * values[off];
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_inputs_have_zero_error() {
        let m = compare(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.nrmse, Some(0.0));
    }

    #[test]
    fn constant_shift() {
        let m = compare(&[1.5, 2.5, 4.5], &[1.0, 2.0, 4.0]).unwrap();
        assert!((m.rmse - 0.5).abs() < 1e-15);
        assert!((m.max_err - 0.5).abs() < 1e-15);
        assert!((m.nrmse.unwrap() - 0.5 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn flat_reference_has_no_nrmse() {
        let m = compare(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert_eq!(m.nrmse, None);
        assert_eq!(m.rmse, 1.0);
    }

    #[test]
    fn multilinear_reproduces_bilinear() {
        let x = [0.0, 0.5, 2.0];
        let y = [-1.0, 1.0];
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - y + 0.5 * x * y;
        let mut v = Vec::new();
        for &yj in &y {
            for &xi in &x {
                v.push(f(xi, yj));
            }
        }
        for (px, py) in [(0.2, 0.3), (1.7, -0.9), (2.0, 1.0), (0.0, -1.0)] {
            let got = multilinear(&[&x, &y], &v, &[px, py]).unwrap();
            assert!((got - f(px, py)).abs() < 1e-14);
        }
        assert!(multilinear(&[&x, &y], &v, &[2.5, 0.0]).is_err());
    }
}
