//! Small dense linear algebra used by the local weight systems.

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
///
/// `a` is row-major `n x n` and is destroyed; on success `b` holds the
/// solution. Returns `None` when a pivot vanishes relative to the largest
/// entry of its column.
pub(crate) fn lu_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|r| (r, a[r * n + k].abs()))
            .fold(
                (k, -1.0),
                |acc, (r, v)| if v > acc.1 { (r, v) } else { acc },
            );
        if pmax <= scale * 1e-14 {
            return None;
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            b.swap(k, piv);
        }
        let d = a[k * n + k];
        for r in k + 1..n {
            let f = a[r * n + k] / d;
            if f == 0.0 {
                continue;
            }
            a[r * n + k] = 0.0;
            for c in k + 1..n {
                a[r * n + c] -= f * a[k * n + c];
            }
            b[r] -= f * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for c in k + 1..n {
            s -= a[k * n + c] * b[c];
        }
        b[k] = s / a[k * n + k];
    }
    Some(())
}
