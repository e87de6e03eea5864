//! Gridded sample files.
//!
//! The first line is `#` followed by a JSON header; the payload follows.
//!
//! ```text
//! # {"axes":[{"uniform":[0,1,4]},{"nodes":[0,0.5,2]}],"blocks":["f"],"encoding":"csv"}
//! 0.1,0.2,0.3,0.4,0.5
//! ...
//! ```
//!
//! Each axis gives either explicit `nodes` or `uniform: [a, b, N]` (`N`
//! intervals). A periodic axis sets `"periodic": true` and lists one period
//! of samples without the seam; `period` defaults to `b - a` for uniform
//! axes and is required for explicit nodes. Every block holds
//! `components x Π(samples)` values, x fastest, then components. CSV lines
//! are conventionally one x-line each, but any separator of commas and
//! whitespace is accepted. With `"encoding": "f64le"` the payload is raw
//! little-endian doubles.

use serde::{Deserialize, Serialize};

use crate::error::{QiError, Result};
use crate::knots::{linspace, Axis};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<(f64, f64, usize)>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub periodic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

impl AxisSpec {
    pub fn to_axis(&self) -> Result<Axis> {
        match (&self.nodes, self.uniform, self.periodic) {
            (Some(_), Some(_), _) | (None, None, _) => Err(QiError::Format(
                "each axis needs exactly one of `nodes` or `uniform`".into(),
            )),
            (Some(n), None, false) => Axis::new(n.clone()),
            (Some(n), None, true) => {
                let t = self.period.ok_or_else(|| {
                    QiError::InvalidPeriod("periodic axis without `period`".into())
                })?;
                Axis::periodic(n.clone(), t)
            }
            (None, Some((a, b, n)), false) => Axis::new(linspace(a, b, n + 1)),
            (None, Some((a, b, n)), true) => {
                let t = self.period.unwrap_or(b - a);
                Axis::uniform_periodic(a, t, n)
            }
        }
    }

    pub fn from_axis(axis: &Axis) -> Self {
        Self {
            nodes: Some(axis.samples().to_vec()),
            uniform: None,
            periodic: axis.is_periodic(),
            period: axis.period(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    #[default]
    Csv,
    F64le,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub axes: Vec<AxisSpec>,
    #[serde(default = "one")]
    pub components: usize,
    #[serde(default = "default_blocks")]
    pub blocks: Vec<String>,
    #[serde(default)]
    pub encoding: Encoding,
}

fn one() -> usize {
    1
}

fn default_blocks() -> Vec<String> {
    vec!["f".into()]
}

/// Names of the value and derivative blocks accepted per dimensionality.
pub fn allowed_blocks(dims: usize) -> &'static [&'static str] {
    match dims {
        1 => &["f", "df"],
        2 => &["f", "fx", "fy", "fxy"],
        _ => &["f"],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub axes: Vec<Axis>,
    pub components: usize,
    /// `(name, values)` in file order.
    pub blocks: Vec<(String, Vec<f64>)>,
}

impl GridFile {
    pub fn new(
        axes: Vec<Axis>,
        components: usize,
        blocks: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        let g = Self {
            axes,
            components,
            blocks,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::sample_count).collect()
    }

    /// Values per block.
    pub fn block_len(&self) -> usize {
        self.shape().iter().product::<usize>() * self.components
    }

    pub fn block(&self, name: &str) -> Option<&[f64]> {
        self.blocks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dims()) {
            return Err(QiError::Format(format!(
                "grids must have 1 to 3 axes, got {}",
                self.dims()
            )));
        }
        if self.components == 0 || (self.components > 1 && self.dims() > 1) {
            return Err(QiError::Format(
                "`components` must be 1, or larger only for 1D grids".into(),
            ));
        }
        let allowed = allowed_blocks(self.dims());
        let n = self.block_len();
        for (k, (name, v)) in self.blocks.iter().enumerate() {
            if !allowed.contains(&name.as_str()) {
                return Err(QiError::Format(format!(
                    "unknown block `{name}` for a {}D grid (allowed: {allowed:?})",
                    self.dims()
                )));
            }
            if self.blocks[..k].iter().any(|(m, _)| m == name) {
                return Err(QiError::Format(format!("duplicate block `{name}`")));
            }
            if v.len() != n {
                return Err(QiError::Format(format!(
                    "block `{name}` has {} values, expected {n}",
                    v.len()
                )));
            }
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(QiError::Format(format!(
                    "non-finite value in block `{name}` at position {i}"
                )));
            }
        }
        if self.block("f").is_none() {
            return Err(QiError::Format("grid has no `f` block".into()));
        }
        Ok(())
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .unwrap_or(bytes.len());
        let first = std::str::from_utf8(&bytes[..nl])
            .map_err(|_| QiError::Format("header is not UTF-8".into()))?;
        let json = first
            .trim_end_matches('\r')
            .strip_prefix('#')
            .ok_or_else(|| {
                QiError::Format("first line must be `#` followed by a JSON header".into())
            })?;
        let header: GridHeader = serde_json::from_str(json.trim())
            .map_err(|e| QiError::Format(format!("header: {e}")))?;
        let axes = header
            .axes
            .iter()
            .enumerate()
            .map(|(k, a)| {
                a.to_axis()
                    .map_err(|e| QiError::Format(format!("axis {k}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let payload = if nl < bytes.len() {
            &bytes[nl + 1..]
        } else {
            &[][..]
        };
        let values: Vec<f64> = match header.encoding {
            Encoding::Csv => {
                let text = std::str::from_utf8(payload)
                    .map_err(|_| QiError::Format("CSV payload is not UTF-8".into()))?;
                text.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| QiError::Format(format!("cannot parse `{t}` as a number")))
                    })
                    .collect::<Result<_>>()?
            }
            Encoding::F64le => {
                if payload.len() % 8 != 0 {
                    return Err(QiError::Format(
                        "binary payload length is not a multiple of 8".into(),
                    ));
                }
                payload
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect()
            }
        };
        let per: usize = axes.iter().map(Axis::sample_count).product::<usize>() * header.components;
        let expected = per * header.blocks.len();
        if values.len() != expected {
            return Err(QiError::Format(format!(
                "payload has {} values, expected {expected} ({} block(s) of {per})",
                values.len(),
                header.blocks.len()
            )));
        }
        let blocks = header
            .blocks
            .iter()
            .zip(values.chunks(per.max(1)))
            .map(|(n, v)| (n.clone(), v.to_vec()))
            .collect();
        Self::new(axes, header.components, blocks)
    }

    pub fn read(path: &std::path::Path) -> std::io::Result<Result<Self>> {
        Ok(Self::parse(&std::fs::read(path)?))
    }

    pub fn header(&self, encoding: Encoding) -> GridHeader {
        GridHeader {
            axes: self.axes.iter().map(AxisSpec::from_axis).collect(),
            components: self.components,
            blocks: self.blocks.iter().map(|(n, _)| n.clone()).collect(),
            encoding,
        }
    }

    pub fn to_bytes(&self, encoding: Encoding) -> Vec<u8> {
        let header = serde_json::to_string(&self.header(encoding)).expect("header serializes");
        let mut out = format!("# {header}\n").into_bytes();
        match encoding {
            Encoding::Csv => {
                let line = self.axes[0].sample_count();
                for (_, v) in &self.blocks {
                    for row in v.chunks(line) {
                        for (k, x) in row.iter().enumerate() {
                            if k > 0 {
                                out.push(b',');
                            }
                            out.extend_from_slice(x.to_string().as_bytes());
                        }
                        out.push(b'\n');
                    }
                }
            }
            Encoding::F64le => {
                for (_, v) in &self.blocks {
                    for x in v {
                        out.extend_from_slice(&x.to_le_bytes());
                    }
                }
            }
        }
        out
    }
}
