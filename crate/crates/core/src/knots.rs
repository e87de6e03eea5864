//! Sample axes and extended knot vectors.
//!
//! Coefficient indexing is 0-based throughout: B-spline `i` is supported on
//! `[knots[i], knots[i + degree + 1]]`, so the classical index `j = -d..N-1`
//! maps to `i = j + d` (and the 1-based `j + d + 1` of the matrix form).

use crate::error::{QiError, Result};

/// A one-dimensional sample axis.
///
/// A clamped axis holds the breakpoints `x_0 < ... < x_N` and carries one
/// sample per breakpoint. A periodic axis holds `N` samples covering one
/// period without repeating the seam; its breakpoints are the samples plus
/// `x_0 + period`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    breakpoints: Vec<f64>,
    periodic: bool,
}

fn check_increasing(values: &[f64], what: &'static str) -> Result<()> {
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(QiError::NonFinite { what, index });
    }
    if let Some(w) = values.windows(2).position(|w| w[1] <= w[0]) {
        return Err(QiError::NonMonotone { index: w + 1 });
    }
    Ok(())
}

impl Axis {
    /// Clamped axis with the given breakpoints.
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        check_increasing(&nodes, "axis nodes")?;
        if nodes.len() < 2 {
            return Err(QiError::TooFewIntervals {
                what: "an axis",
                needed: 1,
                got: nodes.len().saturating_sub(1),
            });
        }
        Ok(Self {
            breakpoints: nodes,
            periodic: false,
        })
    }

    /// Periodic axis from one period of samples (seam excluded).
    pub fn periodic(samples: Vec<f64>, period: f64) -> Result<Self> {
        check_increasing(&samples, "axis samples")?;
        if samples.is_empty() {
            return Err(QiError::TooFewIntervals {
                what: "a periodic axis",
                needed: 1,
                got: 0,
            });
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(QiError::InvalidPeriod(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        let first = samples[0];
        let last = *samples.last().unwrap();
        let seam = first + period;
        if seam <= last {
            return Err(QiError::InvalidPeriod(format!(
                "samples span [{first}, {last}] which does not fit strictly inside one period {period} (the seam sample must not be repeated)"
            )));
        }
        let mut breakpoints = samples;
        breakpoints.push(seam);
        Ok(Self {
            breakpoints,
            periodic: true,
        })
    }

    /// `n + 1` equally spaced clamped nodes on `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(linspace(a, b, n + 1))
    }

    /// `n` equally spaced periodic samples starting at `a` with the given period.
    pub fn uniform_periodic(a: f64, period: f64, n: usize) -> Result<Self> {
        let samples = (0..n).map(|i| a + period * i as f64 / n as f64).collect();
        Self::periodic(samples, period)
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn period(&self) -> Option<f64> {
        self.periodic.then(|| self.b() - self.a())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Number of mesh intervals `N`.
    pub fn intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Number of data samples carried by the axis.
    pub fn sample_count(&self) -> usize {
        if self.periodic {
            self.intervals()
        } else {
            self.breakpoints.len()
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.breakpoints[..self.sample_count()]
    }

    pub fn a(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn b(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Coordinate of node `idx`, unwrapped by whole periods on a periodic axis.
    pub(crate) fn node(&self, idx: isize) -> f64 {
        if self.periodic {
            let n = self.intervals() as isize;
            let wraps = idx.div_euclid(n);
            let base = self.breakpoints[idx.rem_euclid(n) as usize];
            base + wraps as f64 * (self.b() - self.a())
        } else {
            self.breakpoints[idx as usize]
        }
    }

    /// Sample slot holding node `idx` (wrapped on periodic axes).
    pub(crate) fn sample_slot(&self, idx: isize) -> usize {
        if self.periodic {
            idx.rem_euclid(self.intervals() as isize) as usize
        } else {
            idx as usize
        }
    }

    /// Common step when all mesh intervals agree to `rel_tol`.
    pub fn uniform_step(&self, rel_tol: f64) -> Option<f64> {
        let n = self.intervals();
        let h = (self.b() - self.a()) / n as f64;
        self.breakpoints
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= rel_tol * h)
            .then_some(h)
    }
}

/// `n` equally spaced points on `[a, b]` with both endpoints exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let mut v: Vec<f64> = (0..n)
                .map(|i| a + (b - a) * (i as f64 / (n - 1) as f64))
                .collect();
            v[n - 1] = b;
            v
        }
    }
}

/// Extended knot vector of a spline space of degree `d` on breakpoints
/// `x_0..x_N`: `N + 2d + 1` knots with the breakpoints at positions `d..=d+N`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    breakpoints: Vec<f64>,
    knots: Vec<f64>,
    periodic: bool,
}

impl KnotVector {
    /// Clamped (non-periodic) or wrap-around (periodic) extension of `breakpoints`.
    ///
    /// For a periodic vector the last breakpoint is the seam `x_0 + period`.
    pub fn new(degree: usize, breakpoints: &[f64], periodic: bool) -> Result<Self> {
        if degree == 0 {
            return Err(QiError::InvalidDegree(degree));
        }
        check_increasing(breakpoints, "breakpoints")?;
        let n = breakpoints.len().saturating_sub(1);
        if n < degree || n == 0 {
            return Err(QiError::TooFewIntervals {
                what: "the spline space",
                needed: degree,
                got: n,
            });
        }
        let a = breakpoints[0];
        let b = breakpoints[n];
        let mut knots = Vec::with_capacity(n + 2 * degree + 1);
        if periodic {
            for k in (1..=degree).rev() {
                knots.push(a - (b - breakpoints[n - k]));
            }
            knots.extend_from_slice(breakpoints);
            knots.extend(breakpoints[1..=degree].iter().map(|&t| b + (t - a)));
        } else {
            knots.extend(std::iter::repeat_n(a, degree));
            knots.extend_from_slice(breakpoints);
            knots.extend(std::iter::repeat_n(b, degree));
        }
        Ok(Self {
            degree,
            breakpoints: breakpoints.to_vec(),
            knots,
            periodic,
        })
    }

    pub fn from_axis(degree: usize, axis: &Axis) -> Result<Self> {
        Self::new(degree, axis.breakpoints(), axis.is_periodic())
    }

    /// Rebuilds a knot vector from its full extended form, checking that it
    /// is exactly what [`KnotVector::new`] produces for its breakpoints.
    pub fn from_extended(degree: usize, knots: &[f64], periodic: bool) -> Result<Self> {
        if degree == 0 {
            return Err(QiError::InvalidDegree(degree));
        }
        if knots.len() < 2 * degree + 2 {
            return Err(QiError::Format(format!(
                "knot vector of length {} is too short for degree {degree}",
                knots.len()
            )));
        }
        let kv = Self::new(degree, &knots[degree..knots.len() - degree], periodic)?;
        let same = kv
            .knots
            .iter()
            .zip(knots)
            .all(|(u, v)| u.to_bits() == v.to_bits());
        if !same {
            return Err(QiError::Format(
                "auxiliary knots do not match the clamped/periodic construction".into(),
            ));
        }
        Ok(kv)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    /// Number of mesh intervals `N`.
    pub fn intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Number of B-splines on the extended knots, `N + d`.
    pub fn num_basis(&self) -> usize {
        self.intervals() + self.degree
    }

    /// Independent coefficients: `N + d`, or `N` when periodic.
    pub fn num_coefficients(&self) -> usize {
        if self.periodic {
            self.intervals()
        } else {
            self.num_basis()
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    /// Coefficient slot used by B-spline `basis` (cyclic when periodic).
    pub fn coefficient_index(&self, basis: usize) -> usize {
        if self.periodic {
            basis % self.intervals()
        } else {
            basis
        }
    }

    /// Greville abscissa of B-spline `i`.
    pub fn greville(&self, i: usize) -> f64 {
        let d = self.degree;
        self.knots[i + 1..=i + d].iter().sum::<f64>() / d as f64
    }

    /// Maps `x` into the evaluation domain and returns it with its knot span.
    ///
    /// Spans are half-open except the last, so `x = b` is the left limit.
    /// Periodic vectors accept any real `x` and wrap it by whole periods.
    pub fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let (a, b) = self.domain();
        let x = if self.periodic && !(a..=b).contains(&x) && x.is_finite() {
            let t = b - a;
            let w = a + (x - a).rem_euclid(t);
            if w >= b {
                a
            } else {
                w
            }
        } else {
            x
        };
        if !(a..=b).contains(&x) {
            return Err(QiError::OutOfDomain { x, a, b });
        }
        let span = self.degree + span_in(&self.breakpoints, x);
        Ok((span, x))
    }
}

/// Index `k` with `nodes[k] <= x < nodes[k + 1]`, clamped to the last interval.
pub(crate) fn span_in(nodes: &[f64], x: f64) -> usize {
    let last = nodes.len() - 2;
    let k = nodes.partition_point(|&v| v <= x);
    k.saturating_sub(1).min(last)
}
