//! Dense tensors stored with the first index fastest, and mode products.

use crate::error::{QiError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if data.len() != n {
            return Err(QiError::DimensionMismatch {
                what: "tensor data",
                expected: n,
                got: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    fn offset(&self, idx: &[usize]) -> usize {
        let mut off = 0;
        let mut stride = 1;
        for (i, n) in idx.iter().zip(&self.shape) {
            off += i * stride;
            stride *= n;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    /// Applies `f(fiber_in, fiber_out)` to every mode-`mode` fiber, producing
    /// a tensor whose extent along `mode` is `out_len`.
    pub fn map_fibers<F>(&self, mode: usize, out_len: usize, f: F) -> Tensor
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        map_fibers_n(&[self], mode, out_len, f_adapter(f))
    }

    /// Like [`Tensor::map_fibers`] with two congruent inputs read in lockstep.
    pub fn map_fiber_pairs<F>(
        &self,
        other: &Tensor,
        mode: usize,
        out_len: usize,
        mut f: F,
    ) -> Result<Tensor>
    where
        F: FnMut(&[f64], &[f64], &mut [f64]),
    {
        if self.shape != other.shape {
            return Err(QiError::InvalidInput(format!(
                "tensor shapes differ: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(map_fibers_n(
            &[self, other],
            mode,
            out_len,
            |ins: &[&[f64]], out: &mut [f64]| f(ins[0], ins[1], out),
        ))
    }

    /// `Y = X ×_mode A` for a row-major `rows x cols` matrix `A` (0-based mode).
    pub fn n_mode_product(&self, a: &[f64], rows: usize, mode: usize) -> Result<Tensor> {
        if mode >= self.order() {
            return Err(QiError::InvalidInput(format!(
                "mode {mode} out of range for an order-{} tensor",
                self.order()
            )));
        }
        let cols = self.shape[mode];
        if a.len() != rows * cols {
            return Err(QiError::DimensionMismatch {
                what: "n-mode product matrix",
                expected: rows * cols,
                got: a.len(),
            });
        }
        Ok(self.map_fibers(mode, rows, |x, y| {
            for (r, yr) in y.iter_mut().enumerate() {
                let row = &a[r * cols..(r + 1) * cols];
                *yr = row.iter().zip(x).map(|(p, q)| p * q).sum();
            }
        }))
    }
}

fn f_adapter<F: FnMut(&[f64], &mut [f64])>(mut f: F) -> impl FnMut(&[&[f64]], &mut [f64]) {
    move |ins, out| f(ins[0], out)
}

fn map_fibers_n<F>(inputs: &[&Tensor], mode: usize, out_len: usize, mut f: F) -> Tensor
where
    F: FnMut(&[&[f64]], &mut [f64]),
{
    let shape = &inputs[0].shape;
    let n = shape[mode];
    let inner: usize = shape[..mode].iter().product();
    let outer: usize = shape[mode + 1..].iter().product();
    let mut out_shape = shape.clone();
    out_shape[mode] = out_len;
    let mut out = Tensor::zeros(out_shape);

    if inner == 1 {
        // fibers are contiguous
        for o in 0..outer {
            let ins: Vec<&[f64]> = inputs.iter().map(|t| &t.data[o * n..(o + 1) * n]).collect();
            f(&ins, &mut out.data[o * out_len..(o + 1) * out_len]);
        }
        return out;
    }

    let mut bufs = vec![vec![0.0; n]; inputs.len()];
    let mut obuf = vec![0.0; out_len];
    for o in 0..outer {
        for i in 0..inner {
            for (t, b) in inputs.iter().zip(bufs.iter_mut()) {
                for (j, v) in b.iter_mut().enumerate() {
                    *v = t.data[i + inner * (j + n * o)];
                }
            }
            let ins: Vec<&[f64]> = bufs.iter().map(|b| b.as_slice()).collect();
            f(&ins, &mut obuf);
            for (j, v) in obuf.iter().enumerate() {
                out.data[i + inner * (j + out_len * o)] = *v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(shape: &[usize]) -> Tensor {
        let n: usize = shape.iter().product();
        let data = (0..n)
            .map(|k| ((k * 37 % 11) as f64 - 5.0) * 0.3 + k as f64 * 0.01)
            .collect();
        Tensor::new(shape.to_vec(), data).unwrap()
    }

    #[test]
    fn identity_leaves_tensor_unchanged() {
        let t = sample(&[4, 3, 2]);
        for mode in 0..3 {
            let n = t.shape()[mode];
            let mut id = vec![0.0; n * n];
            for i in 0..n {
                id[i * n + i] = 1.0;
            }
            assert_eq!(t.n_mode_product(&id, n, mode).unwrap(), t);
        }
    }

    #[test]
    fn mode_zero_on_matrix_is_matrix_product() {
        // X is 3x2 with X[i][j] at i + 3j; A is 2x3.
        let x = sample(&[3, 2]);
        let a = [1.0, 2.0, -1.0, 0.5, 0.0, 3.0];
        let y = x.n_mode_product(&a, 2, 0).unwrap();
        assert_eq!(y.shape(), &[2, 2]);
        for r in 0..2 {
            for j in 0..2 {
                let e: f64 = (0..3).map(|k| a[r * 3 + k] * x.get(&[k, j])).sum();
                assert!((y.get(&[r, j]) - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mode_one_on_matrix_is_right_product() {
        let x = sample(&[3, 4]);
        let b: Vec<f64> = (0..8).map(|k| k as f64 * 0.5 - 1.0).collect();
        let y = x.n_mode_product(&b, 2, 1).unwrap();
        for i in 0..3 {
            for r in 0..2 {
                let e: f64 = (0..4).map(|k| x.get(&[i, k]) * b[r * 4 + k]).sum();
                assert!((y.get(&[i, r]) - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn distinct_mode_products_commute() {
        let x = sample(&[4, 3, 2]);
        let a: Vec<f64> = (0..20).map(|k| (k as f64).sin()).collect(); // 5x4
        let b: Vec<f64> = (0..6).map(|k| (k as f64).cos()).collect(); // 2x3
        let c: Vec<f64> = (0..6).map(|k| 1.0 / (1.0 + k as f64)).collect(); // 3x2
        let ab = x
            .n_mode_product(&a, 5, 0)
            .unwrap()
            .n_mode_product(&b, 2, 1)
            .unwrap();
        let ba = x
            .n_mode_product(&b, 2, 1)
            .unwrap()
            .n_mode_product(&a, 5, 0)
            .unwrap();
        for (p, q) in ab.data().iter().zip(ba.data()) {
            assert!((p - q).abs() < 1e-13);
        }
        let ac = x
            .n_mode_product(&a, 5, 0)
            .unwrap()
            .n_mode_product(&c, 3, 2)
            .unwrap();
        let ca = x
            .n_mode_product(&c, 3, 2)
            .unwrap()
            .n_mode_product(&a, 5, 0)
            .unwrap();
        for (p, q) in ac.data().iter().zip(ca.data()) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn mismatched_matrix_rejected() {
        let x = sample(&[4, 3]);
        assert!(x.n_mode_product(&[1.0; 6], 2, 0).is_err());
        assert!(x.n_mode_product(&[1.0; 6], 2, 2).is_err());
        assert!(Tensor::new(vec![2, 2], vec![0.0; 3]).is_err());
    }
}
