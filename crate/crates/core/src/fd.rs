//! First-derivative finite differences on arbitrary node sets and the banded
//! global operator built from them.
//!
//! Row `n` of the non-periodic operator uses `l + 1` consecutive nodes:
//! `x_0..x_l` for `n < l1`, `x_{n-l1}..x_{n+l2}` in the interior and
//! `x_{N-l}..x_N` for `n > N - l2`, with `l1 = ⌊l/2⌋`, `l2 = l - l1`.
//! Rows in the right half of the grid (`2n > N`) are built as the sign-flipped
//! mirror image of the corresponding left-half row on the reversed grid, so a
//! grid and its reflection produce operators related by `Γ' = -J Γ J`.

use crate::error::{QiError, Result};
use crate::knots::Axis;
use crate::linalg::lu_solve;

/// Weights `w` with `Σ w_i q(x_i) = q'(target)` for every polynomial of
/// degree `<= nodes.len() - 1`.
///
/// The exactness system is solved in local coordinates centred at `target`
/// and scaled by the node spread.
pub fn fd_weights(nodes: &[f64], target: f64) -> Result<Vec<f64>> {
    let m = nodes.len();
    if m < 2 {
        return Err(QiError::TooFewIntervals {
            what: "a finite-difference stencil",
            needed: 1,
            got: m.saturating_sub(1),
        });
    }
    if let Some(index) = nodes.iter().position(|v| !v.is_finite()) {
        return Err(QiError::NonFinite {
            what: "stencil nodes",
            index,
        });
    }
    for i in 0..m {
        for j in 0..i {
            if nodes[i] == nodes[j] {
                return Err(QiError::InvalidInput(format!(
                    "duplicate stencil node {} at positions {j} and {i}",
                    nodes[i]
                )));
            }
        }
    }
    let scale = nodes.iter().fold(0.0_f64, |s, x| s.max((x - target).abs()));
    let z: Vec<f64> = nodes.iter().map(|x| (x - target) / scale).collect();
    // Row k: Σ_i w_i z_i^k = δ_{k,1}
    let mut a = vec![0.0; m * m];
    for (i, zi) in z.iter().enumerate() {
        let mut p = 1.0;
        for k in 0..m {
            a[k * m + i] = p;
            p *= zi;
        }
    }
    let mut rhs = vec![0.0; m];
    rhs[1] = 1.0;
    lu_solve(&mut a, &mut rhs, m).ok_or(QiError::Singular("finite-difference stencil"))?;
    for w in rhs.iter_mut() {
        *w /= scale;
    }
    Ok(rhs)
}

/// One row of the operator: `l + 1` weights applied to nodes `start..=start+l`
/// (indices wrap on periodic axes).
#[derive(Debug, Clone, PartialEq)]
pub struct FdStencil {
    pub start: isize,
    pub target: usize,
    pub weights: Vec<f64>,
}

/// Banded first-derivative operator of order `l` on an axis.
#[derive(Debug, Clone)]
pub struct FdOperator {
    axis: Axis,
    order: usize,
    rows: Vec<FdStencil>,
}

fn eq_start(n: usize, big_n: usize, l: usize) -> usize {
    let l1 = l / 2;
    let l2 = l - l1;
    if n < l1 {
        0
    } else if n <= big_n - l2 {
        n - l1
    } else {
        big_n - l
    }
}

impl FdOperator {
    /// Builds the order-`l` operator; uses the precomputed-stencil path
    /// when the axis is uniform.
    pub fn new(axis: &Axis, l: usize) -> Result<Self> {
        Self::check(axis, l)?;
        if axis.uniform_step(1e-12).is_some() {
            Self::build_uniform(axis, l)
        } else {
            Self::build_general(axis, l)
        }
    }

    fn check(axis: &Axis, l: usize) -> Result<()> {
        if l == 0 {
            return Err(QiError::InvalidOrder(l));
        }
        let n = axis.intervals();
        if axis.is_periodic() {
            // l + 1 distinct samples per stencil
            if n < l + 1 {
                return Err(QiError::TooFewIntervals {
                    what: "a periodic finite-difference operator",
                    needed: l + 1,
                    got: n,
                });
            }
        } else if n < l {
            return Err(QiError::TooFewIntervals {
                what: "the finite-difference operator",
                needed: l,
                got: n,
            });
        }
        Ok(())
    }

    /// Row-by-row construction from the actual node coordinates.
    pub fn build_general(axis: &Axis, l: usize) -> Result<Self> {
        Self::check(axis, l)?;
        let m = axis.sample_count();
        let mut rows = Vec::with_capacity(m);
        if axis.is_periodic() {
            let l1 = (l / 2) as isize;
            for n in 0..m {
                let start = n as isize - l1;
                let nodes: Vec<f64> = (0..=l as isize).map(|r| axis.node(start + r)).collect();
                let weights = fd_weights(&nodes, axis.node(n as isize))?;
                rows.push(FdStencil {
                    start,
                    target: n,
                    weights,
                });
            }
        } else {
            let big_n = axis.intervals();
            let x = axis.breakpoints();
            for n in 0..=big_n {
                if 2 * n <= big_n {
                    let s = eq_start(n, big_n, l);
                    let weights = fd_weights(&x[s..=s + l], x[n])?;
                    rows.push(FdStencil {
                        start: s as isize,
                        target: n,
                        weights,
                    });
                } else {
                    // mirror of row N - n on the reflected grid y_i = -x_{N-i}
                    let mirror = big_n - n;
                    let s = eq_start(mirror, big_n, l);
                    let nodes: Vec<f64> = (0..=l).map(|k| -x[big_n - s - k]).collect();
                    let w = fd_weights(&nodes, -x[n])?;
                    rows.push(FdStencil {
                        start: (big_n - s - l) as isize,
                        target: n,
                        weights: w.iter().rev().map(|v| -v).collect(),
                    });
                }
            }
        }
        Ok(Self {
            axis: axis.clone(),
            order: l,
            rows,
        })
    }

    /// Uniform grids: one interior stencil and the boundary stencils are
    /// computed once on integer offsets and scaled by the step.
    pub fn build_uniform(axis: &Axis, l: usize) -> Result<Self> {
        Self::check(axis, l)?;
        let h = (axis.b() - axis.a()) / axis.intervals() as f64;
        let m = axis.sample_count();
        let unit = |offsets: Vec<f64>, target: f64| -> Result<Vec<f64>> {
            Ok(fd_weights(&offsets, target)?
                .into_iter()
                .map(|w| w / h)
                .collect())
        };
        let l1 = l / 2;
        let offsets =
            |from: isize| -> Vec<f64> { (0..=l as isize).map(|k| (from + k) as f64).collect() };
        let mut rows = Vec::with_capacity(m);
        if axis.is_periodic() {
            let w = unit(offsets(-(l1 as isize)), 0.0)?;
            for n in 0..m {
                rows.push(FdStencil {
                    start: n as isize - l1 as isize,
                    target: n,
                    weights: w.clone(),
                });
            }
        } else {
            let big_n = axis.intervals();
            let interior = unit(offsets(-(l1 as isize)), 0.0)?;
            let mirrored_interior: Vec<f64> = interior.iter().rev().map(|v| -v).collect();
            // left boundary rows n < l1 use nodes 0..=l with target n
            let left: Vec<Vec<f64>> = (0..l1)
                .map(|n| unit(offsets(0), n as f64))
                .collect::<Result<_>>()?;
            for n in 0..=big_n {
                if 2 * n <= big_n {
                    let s = eq_start(n, big_n, l);
                    let weights = if n < l1 {
                        left[n].clone()
                    } else if s == n - l1 {
                        interior.clone()
                    } else {
                        unit(offsets(0), (n - s) as f64)?
                    };
                    rows.push(FdStencil {
                        start: s as isize,
                        target: n,
                        weights,
                    });
                } else {
                    let mirror = big_n - n;
                    let s = eq_start(mirror, big_n, l);
                    let weights = if mirror < l1 {
                        left[mirror].iter().rev().map(|v| -v).collect()
                    } else if s == mirror - l1 {
                        mirrored_interior.clone()
                    } else {
                        unit(offsets(0), (mirror - s) as f64)?
                            .iter()
                            .rev()
                            .map(|v| -v)
                            .collect()
                    };
                    rows.push(FdStencil {
                        start: (big_n - s - l) as isize,
                        target: n,
                        weights,
                    });
                }
            }
        }
        Ok(Self {
            axis: axis.clone(),
            order: l,
            rows,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn rows(&self) -> &[FdStencil] {
        &self.rows
    }

    /// Number of samples (rows and columns).
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// Dense `(size x size)` row-major matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let m = self.size();
        let mut out = vec![0.0; m * m];
        for (n, row) in self.rows.iter().enumerate() {
            for (r, w) in row.weights.iter().enumerate() {
                out[n * m + self.axis.sample_slot(row.start + r as isize)] += w;
            }
        }
        out
    }

    /// Applies the operator to one column of samples.
    pub fn apply_vec(&self, values: &[f64], out: &mut [f64]) -> Result<()> {
        let m = self.size();
        if values.len() != m || out.len() != m {
            return Err(QiError::DimensionMismatch {
                what: "finite-difference input",
                expected: m,
                got: values.len().min(out.len()),
            });
        }
        self.apply_unchecked(values, out);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&self, values: &[f64], out: &mut [f64]) {
        if self.axis.is_periodic() {
            for (o, row) in out.iter_mut().zip(&self.rows) {
                *o = row
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(r, w)| w * values[self.axis.sample_slot(row.start + r as isize)])
                    .sum();
            }
        } else {
            for (o, row) in out.iter_mut().zip(&self.rows) {
                let s = row.start as usize;
                *o = row
                    .weights
                    .iter()
                    .zip(&values[s..s + row.weights.len()])
                    .map(|(w, v)| w * v)
                    .sum();
            }
        }
    }

    /// `(Γ ⊗ I_p) f` for a column-major `(size x p)` block: each of the `p`
    /// contiguous columns is differentiated independently.
    pub fn apply(&self, values: &[f64], p: usize) -> Result<Vec<f64>> {
        let m = self.size();
        if p == 0 || values.len() != m * p {
            return Err(QiError::DimensionMismatch {
                what: "finite-difference input",
                expected: m * p.max(1),
                got: values.len(),
            });
        }
        let mut out = vec![0.0; m * p];
        for (src, dst) in values.chunks(m).zip(out.chunks_mut(m)) {
            self.apply_unchecked(src, dst);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knots::linspace;

    #[test]
    fn centered_three_point() {
        let h = 0.1;
        let x = 0.7;
        let w = fd_weights(&[x - h, x, x + h], x).unwrap();
        // exactness on 1, x, x^2 about the centre gives [-1/(2h), 0, 1/(2h)]
        let e = [-1.0 / (2.0 * h), 0.0, 1.0 / (2.0 * h)];
        for (a, b) in w.iter().zip(e) {
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn two_point_slope() {
        let w = fd_weights(&[2.0, 2.5], 2.0).unwrap();
        assert!((w[0] + 2.0).abs() < 1e-14 && (w[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn weights_annihilate_constants() {
        let nodes = [0.0, 0.1, 0.35, 0.4, 0.9, 1.0];
        for &t in &nodes {
            let w = fd_weights(&nodes, t).unwrap();
            let l1: f64 = w.iter().map(|v| v.abs()).sum();
            assert!(w.iter().sum::<f64>().abs() <= 1e-13 * l1);
        }
    }

    #[test]
    fn duplicate_nodes_rejected() {
        assert!(fd_weights(&[0.0, 1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn quadratic_on_five_nodes() {
        let ax = Axis::new(linspace(0.0, 1.0, 5)).unwrap();
        let op = FdOperator::new(&ax, 2).unwrap();
        let f: Vec<f64> = ax.samples().iter().map(|x| x * x).collect();
        let mut out = vec![0.0; 5];
        op.apply_vec(&f, &mut out).unwrap();
        for (o, e) in out.iter().zip([0.0, 0.5, 1.0, 1.5, 2.0]) {
            assert!((o - e).abs() < 1e-12);
        }
    }

    #[test]
    fn band_structure() {
        for l in 1..=6 {
            let ax = Axis::new(linspace(0.0, 1.0, 12)).unwrap();
            let op = FdOperator::new(&ax, l).unwrap();
            let m = op.size();
            let dense = op.to_dense();
            assert_eq!(dense.len(), m * m);
            for (n, row) in op.rows().iter().enumerate() {
                assert_eq!(row.weights.len(), l + 1);
                let nz: Vec<usize> = (0..m).filter(|&c| dense[n * m + c] != 0.0).collect();
                assert!(nz.last().unwrap() - nz.first().unwrap() <= l);
                assert!((row.start..=row.start + l as isize).contains(&(n as isize)));
            }
            // first and last rows are the one-sided boundary stencils
            assert_eq!(op.rows()[0].start, 0);
            assert_eq!(op.rows()[m - 1].start as usize, m - 1 - l);
        }
    }

    #[test]
    fn size_checks() {
        let ax = Axis::new(linspace(0.0, 1.0, 4)).unwrap();
        assert!(FdOperator::new(&ax, 4).is_err());
        assert!(FdOperator::new(&ax, 0).is_err());
        let op = FdOperator::new(&ax, 3).unwrap();
        assert!(op.apply(&[0.0; 5], 1).is_err());
        let p = Axis::uniform_periodic(0.0, 1.0, 4).unwrap();
        assert!(FdOperator::new(&p, 4).is_err());
    }

    #[test]
    fn kronecker_columns() {
        let ax = Axis::new(linspace(-1.0, 1.0, 9)).unwrap();
        let op = FdOperator::new(&ax, 3).unwrap();
        let q: Vec<f64> = ax.samples().iter().map(|x| x.sin()).collect();
        let r: Vec<f64> = ax.samples().iter().map(|x| x.exp()).collect();
        let both: Vec<f64> = q.iter().chain(&r).copied().collect();
        let out = op.apply(&both, 2).unwrap();
        assert_eq!(&out[..9], &op.apply(&q, 1).unwrap()[..]);
        assert_eq!(&out[9..], &op.apply(&r, 1).unwrap()[..]);
    }
}
