use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::DType;

/// Uncompressed field. Values are held as `f64`; for `F32` arrays every value
/// is exactly representable in `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawArray {
    values: Vec<f64>,
    dims: Vec<usize>,
    dtype: DType,
}

impl RawArray {
    /// Rounds each value to `dtype` and rejects NaN/Inf.
    pub fn new(mut values: Vec<f64>, dims: Vec<usize>, dtype: DType) -> Result<Self> {
        let n = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
        if dims.is_empty() || n != Some(values.len()) {
            return Err(Error::InvalidParams(format!("dims {dims:?} do not match {} values", values.len())));
        }
        for (index, v) in values.iter_mut().enumerate() {
            *v = dtype.round(*v);
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self { values, dims, dtype })
    }

    /// Callers guarantee finiteness and dtype rounding.
    pub(crate) fn from_trusted(values: Vec<f64>, dims: Vec<usize>, dtype: DType) -> Self {
        Self { values, dims, dtype }
    }

    /// Decodes a headerless little-endian IEEE-754 buffer.
    pub fn from_le_bytes(bytes: &[u8], dims: Vec<usize>, dtype: DType) -> Result<Self> {
        let n: usize = dims.iter().product();
        if bytes.len() != n * dtype.size() {
            return Err(Error::InvalidParams(format!("{} bytes cannot hold {dims:?} {dtype} values", bytes.len())));
        }
        let values = match dtype {
            DType::F32 => {
                bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")) as f64).collect()
            }
            DType::F64 => {
                bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect()
            }
        };
        Self::new(values, dims, dtype)
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.values.len() * self.dtype.size());
        match self.dtype {
            DType::F32 => self.values.iter().for_each(|&v| out.extend_from_slice(&(v as f32).to_le_bytes())),
            DType::F64 => self.values.iter().for_each(|&v| out.extend_from_slice(&v.to_le_bytes())),
        }
        out
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(min, max)` of the values.
    pub fn min_max(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Largest absolute element-wise difference to `other`.
    pub fn max_abs_diff(&self, other: &RawArray) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// How the user states the error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum ErrorBound {
    Abs(f64),
    /// Fraction of the input's value range.
    Rel(f64),
}

impl ErrorBound {
    /// Absolute bound for `raw`. A relative bound on a constant field is
    /// taken as absolute, since the range is zero.
    pub fn resolve(self, raw: &RawArray) -> Result<f64> {
        let eps = match self {
            ErrorBound::Abs(e) => e,
            ErrorBound::Rel(r) => {
                let (lo, hi) = raw.min_max();
                let range = hi - lo;
                if range > 0.0 {
                    r * range
                } else {
                    r
                }
            }
        };
        if eps.is_finite() && eps > 0.0 {
            Ok(eps)
        } else {
            Err(Error::InvalidParams(format!("error bound resolves to {eps}")))
        }
    }
}
