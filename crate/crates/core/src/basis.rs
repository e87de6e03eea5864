//! B-spline basis evaluation by the Cox–de Boor recurrence.

use crate::error::Result;
use crate::knots::KnotVector;

/// Values and derivatives of the `d + 1` B-splines of degree `d` that are
/// non-zero on knot span `span` (`knots[span] <= x < knots[span + 1]`).
///
/// `out` receives `(nder + 1) * (d + 1)` entries: row `k` holds the `k`-th
/// derivatives of `B_{span-d}, ..., B_span`. Derivative rows above `d` are zero.
pub(crate) fn ders_basis_funs(
    knots: &[f64],
    d: usize,
    span: usize,
    x: f64,
    nder: usize,
    out: &mut [f64],
) {
    let p = d;
    let w = p + 1;
    debug_assert!(out.len() >= (nder + 1) * w);
    // ndu[j][r]: basis values (upper triangle incl. diagonal) and knot
    // differences (lower triangle), stored row-major w x w.
    let mut ndu = [0.0_f64; 64];
    let mut left = [0.0_f64; 8];
    let mut right = [0.0_f64; 8];
    let mut ndu_vec;
    let mut left_vec;
    let mut right_vec;
    let (ndu, left, right): (&mut [f64], &mut [f64], &mut [f64]) = if w <= 8 {
        (&mut ndu[..w * w], &mut left[..w], &mut right[..w])
    } else {
        ndu_vec = vec![0.0; w * w];
        left_vec = vec![0.0; w];
        right_vec = vec![0.0; w];
        (&mut ndu_vec, &mut left_vec, &mut right_vec)
    };

    ndu[0] = 1.0;
    for j in 1..=p {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            // lower triangle
            ndu[j * w + r] = right[r + 1] + left[j - r];
            let temp = if ndu[j * w + r] != 0.0 {
                ndu[r * w + j - 1] / ndu[j * w + r]
            } else {
                0.0
            };
            // upper triangle
            ndu[r * w + j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j * w + j] = saved;
    }

    for v in out[..(nder + 1) * w].iter_mut() {
        *v = 0.0;
    }
    for j in 0..=p {
        out[j] = ndu[j * w + p];
    }
    let top = nder.min(p);
    if top == 0 {
        return;
    }

    let mut a = vec![0.0_f64; 2 * w];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        for v in a.iter_mut() {
            *v = 0.0;
        }
        a[0] = 1.0;
        for k in 1..=top {
            let mut dsum = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                let rk = rk as usize;
                let den = ndu[(pk + 1) * w + rk];
                a[s2 * w] = if den != 0.0 { a[s1 * w] / den } else { 0.0 };
                dsum = a[s2 * w] * ndu[rk * w + pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize {
                k - 1
            } else {
                p - r
            };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                let den = ndu[(pk + 1) * w + idx];
                a[s2 * w + j] = if den != 0.0 {
                    (a[s1 * w + j] - a[s1 * w + j - 1]) / den
                } else {
                    0.0
                };
                dsum += a[s2 * w + j] * ndu[idx * w + pk];
            }
            if r <= pk {
                let den = ndu[(pk + 1) * w + r];
                a[s2 * w + k] = if den != 0.0 {
                    -a[s1 * w + k - 1] / den
                } else {
                    0.0
                };
                dsum += a[s2 * w + k] * ndu[r * w + pk];
            }
            out[k * w + r] = dsum;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut fac = p as f64;
    for k in 1..=top {
        for j in 0..=p {
            out[k * w + j] *= fac;
        }
        fac *= (p - k) as f64;
    }
}

/// Active B-splines at a point: index of the first one and the
/// `deriv_order`-th derivatives of all `d + 1` of them.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveBasis {
    pub first: usize,
    pub values: Vec<f64>,
}

impl KnotVector {
    /// The `d + 1` B-splines (or their derivatives) that are non-zero at `x`.
    ///
    /// Indices refer to the `N + d` B-splines of the extended knots; use
    /// [`KnotVector::coefficient_index`] to reach periodic coefficient slots.
    pub fn basis_eval(&self, x: f64, deriv_order: usize) -> Result<ActiveBasis> {
        let d = self.degree();
        let (span, x) = self.locate(x)?;
        let mut buf = vec![0.0; (deriv_order + 1) * (d + 1)];
        ders_basis_funs(self.knots(), d, span, x, deriv_order, &mut buf);
        Ok(ActiveBasis {
            first: span - d,
            values: buf[deriv_order * (d + 1)..].to_vec(),
        })
    }

    /// Writes the `deriv_order`-th derivatives of the active B-splines into
    /// `out` (length `d + 1`) and returns the first active index.
    pub(crate) fn basis_into(
        &self,
        x: f64,
        deriv_order: usize,
        scratch: &mut Vec<f64>,
        out: &mut [f64],
    ) -> Result<usize> {
        let d = self.degree();
        let (span, x) = self.locate(x)?;
        scratch.resize((deriv_order + 1) * (d + 1), 0.0);
        ders_basis_funs(self.knots(), d, span, x, deriv_order, scratch);
        out.copy_from_slice(&scratch[deriv_order * (d + 1)..]);
        Ok(span - d)
    }
}
