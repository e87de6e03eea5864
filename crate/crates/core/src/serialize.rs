//! JSON form of fitted splines.
//!
//! ```json
//! {"format_version": 1, "degrees": [3], "knots": [[...]], "periodic": [false],
//!  "shape": [n] , "coefficients": [...]}
//! ```
//!
//! `knots` holds the full extended knot vector of each axis. Coefficients are
//! flattened with the first index fastest; a curve with `p > 1` components
//! has shape `[n, p]`. Floats are printed in shortest round-trip form and
//! parsed exactly, so a write/read cycle is bit-exact.

use serde::{Deserialize, Serialize};

use crate::error::{QiError, Result};
use crate::knots::KnotVector;
use crate::spline::{SplineCurve, SplineSurface, SplineVolume};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineJson {
    pub format_version: u32,
    pub degrees: Vec<usize>,
    pub knots: Vec<Vec<f64>>,
    pub periodic: Vec<bool>,
    pub shape: Vec<usize>,
    pub coefficients: Vec<f64>,
}

/// A fitted spline of any supported dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub enum Spline {
    Curve(SplineCurve),
    Surface(SplineSurface),
    Volume(SplineVolume),
}

impl Spline {
    /// Number of parameters (1, 2 or 3).
    pub fn params(&self) -> usize {
        match self {
            Spline::Curve(_) => 1,
            Spline::Surface(_) => 2,
            Spline::Volume(_) => 3,
        }
    }

    /// Number of output components.
    pub fn components(&self) -> usize {
        match self {
            Spline::Curve(c) => c.dim(),
            _ => 1,
        }
    }

    pub fn knot_vectors(&self) -> Vec<&KnotVector> {
        match self {
            Spline::Curve(c) => vec![c.knots()],
            Spline::Surface(s) => vec![s.knots_x(), s.knots_y()],
            Spline::Volume(v) => v.knots().iter().collect(),
        }
    }

    pub fn coefficient_shape(&self) -> Vec<usize> {
        match self {
            Spline::Curve(c) if c.dim() > 1 => vec![c.knots().num_coefficients(), c.dim()],
            Spline::Curve(c) => vec![c.knots().num_coefficients()],
            Spline::Surface(s) => s.shape().to_vec(),
            Spline::Volume(v) => v.shape().to_vec(),
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        match self {
            Spline::Curve(c) => c.coefficients(),
            Spline::Surface(s) => s.coefficients(),
            Spline::Volume(v) => v.coefficients(),
        }
    }

    /// `(a, b)` per parameter.
    pub fn domain(&self) -> Vec<(f64, f64)> {
        self.knot_vectors().iter().map(|k| k.domain()).collect()
    }

    /// Value (or partial derivative) at `point`, one entry per component.
    pub fn eval(&self, point: &[f64], orders: &[usize]) -> Result<Vec<f64>> {
        let k = self.params();
        if point.len() != k || orders.len() != k {
            return Err(QiError::DimensionMismatch {
                what: "evaluation point",
                expected: k,
                got: point.len(),
            });
        }
        match self {
            Spline::Curve(c) => c.eval(point[0], orders[0]),
            Spline::Surface(s) => Ok(vec![s.eval(point[0], point[1], orders[0], orders[1])?]),
            Spline::Volume(v) => Ok(vec![v.eval(
                point[0],
                point[1],
                point[2],
                [orders[0], orders[1], orders[2]],
            )?]),
        }
    }

    pub fn to_json_value(&self) -> SplineJson {
        let kvs = self.knot_vectors();
        SplineJson {
            format_version: FORMAT_VERSION,
            degrees: kvs.iter().map(|k| k.degree()).collect(),
            knots: kvs.iter().map(|k| k.knots().to_vec()).collect(),
            periodic: kvs.iter().map(|k| k.is_periodic()).collect(),
            shape: self.coefficient_shape(),
            coefficients: self.coefficients().to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("spline JSON is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: SplineJson =
            serde_json::from_str(text).map_err(|e| QiError::Format(e.to_string()))?;
        Self::from_json_value(v)
    }

    pub fn from_json_value(v: SplineJson) -> Result<Self> {
        if v.format_version != FORMAT_VERSION {
            return Err(QiError::Format(format!(
                "unsupported format_version {}",
                v.format_version
            )));
        }
        let k = v.degrees.len();
        if !(1..=3).contains(&k) || v.knots.len() != k || v.periodic.len() != k {
            return Err(QiError::Format(
                "degrees, knots and periodic must have one entry per parameter (1 to 3)".into(),
            ));
        }
        let kvs = (0..k)
            .map(|i| KnotVector::from_extended(v.degrees[i], &v.knots[i], v.periodic[i]))
            .collect::<Result<Vec<_>>>()?;
        let counts: Vec<usize> = kvs.iter().map(KnotVector::num_coefficients).collect();
        let shape_ok = match k {
            1 => {
                v.shape.len() == 1 && v.shape[0] == counts[0]
                    || v.shape.len() == 2 && v.shape[0] == counts[0] && v.shape[1] >= 1
            }
            _ => v.shape == counts,
        };
        if !shape_ok {
            return Err(QiError::Format(format!(
                "shape {:?} does not match the knot vectors ({counts:?})",
                v.shape
            )));
        }
        let spline = match k {
            1 => {
                let p = v.shape.get(1).copied().unwrap_or(1);
                Spline::Curve(SplineCurve::new(kvs[0].clone(), p, v.coefficients)?)
            }
            2 => Spline::Surface(SplineSurface::new(
                kvs[0].clone(),
                kvs[1].clone(),
                v.coefficients,
            )?),
            _ => {
                let [a, b, c]: [KnotVector; 3] = kvs.try_into().expect("three knot vectors");
                Spline::Volume(SplineVolume::new([a, b, c], v.coefficients)?)
            }
        };
        Ok(spline)
    }
}

impl From<SplineCurve> for Spline {
    fn from(c: SplineCurve) -> Self {
        Spline::Curve(c)
    }
}

impl From<SplineSurface> for Spline {
    fn from(s: SplineSurface) -> Self {
        Spline::Surface(s)
    }
}

impl From<SplineVolume> for Spline {
    fn from(v: SplineVolume) -> Self {
        Spline::Volume(v)
    }
}
