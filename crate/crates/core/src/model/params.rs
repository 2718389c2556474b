use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default number of elements per block.
pub const DEFAULT_BLOCK_LEN: usize = 32;

/// Element type of the uncompressed field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    F32,
    F64,
}

impl DType {
    pub fn size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::F64 => 8,
        }
    }

    /// Rounds `v` to the nearest value representable in this dtype.
    #[inline]
    pub fn round(self, v: f64) -> f64 {
        match self {
            DType::F32 => v as f32 as f64,
            DType::F64 => v,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            DType::F32 => 0,
            DType::F64 => 1,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(DType::F32),
            1 => Some(DType::F64),
            _ => None,
        }
    }
}

impl std::str::FromStr for DType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" | "float" => Ok(DType::F32),
            "f64" | "double" => Ok(DType::F64),
            other => Err(Error::InvalidParams(format!("unknown dtype `{other}`"))),
        }
    }
}

impl std::fmt::Display for DType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DType::F32 => "f32",
            DType::F64 => "f64",
        })
    }
}

/// Error bound and geometry shared by every lossy step.
///
/// Blocks are cut from the row-major linearization of `dims`; the last
/// block may be shorter than `block_len`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantParams {
    eps: f64,
    element_count: usize,
    dims: Vec<usize>,
    block_len: usize,
    dtype: DType,
}

impl QuantParams {
    pub fn new(eps: f64, dims: Vec<usize>, block_len: usize, dtype: DType) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParams(format!("error bound must be positive and finite, got {eps}")));
        }
        if dims.is_empty() {
            return Err(Error::InvalidParams("dims must not be empty".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidParams(format!("dims must be positive, got {dims:?}")));
        }
        let element_count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidParams("element count overflows".into()))?;
        if block_len == 0 || block_len > u32::MAX as usize {
            return Err(Error::InvalidParams(format!("block length must be in 1..=2^32-1, got {block_len}")));
        }
        Ok(Self { eps, element_count, dims, block_len, dtype })
    }

    /// Same geometry with a different error bound.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(eps, self.dims.clone(), self.block_len, self.dtype)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Width of one quantization bin.
    #[inline]
    pub fn bin_width(&self) -> f64 {
        2.0 * self.eps
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn block_count(&self) -> usize {
        self.element_count.div_ceil(self.block_len)
    }

    /// Element index range covered by block `j`.
    #[inline]
    pub fn block_range(&self, j: usize) -> Range<usize> {
        let start = j * self.block_len;
        start..(start + self.block_len).min(self.element_count)
    }

    /// Raw (uncompressed) size in bytes.
    pub fn raw_bytes(&self) -> usize {
        self.element_count * self.dtype.size()
    }

    /// Checks that two operands can be combined element-wise.
    pub fn ensure_compatible(&self, other: &QuantParams) -> Result<()> {
        if self.eps.to_bits() != other.eps.to_bits() {
            return Err(Error::ParamsMismatch(format!("eps {} vs {}", self.eps, other.eps)));
        }
        if self.dims != other.dims {
            return Err(Error::ParamsMismatch(format!("dims {:?} vs {:?}", self.dims, other.dims)));
        }
        if self.block_len != other.block_len {
            return Err(Error::ParamsMismatch(format!("block_len {} vs {}", self.block_len, other.block_len)));
        }
        if self.dtype != other.dtype {
            return Err(Error::ParamsMismatch(format!("dtype {} vs {}", self.dtype, other.dtype)));
        }
        Ok(())
    }
}

/// Parses `AxBxC` into a dimension list.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    s.split(['x', 'X', ','])
        .map(|part| {
            part.trim().parse::<usize>().map_err(|_| Error::InvalidParams(format!("bad dimension `{part}` in `{s}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_eps() {
        for eps in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(QuantParams::new(eps, vec![4], 32, DType::F32).is_err());
        }
    }

    #[test]
    fn rejects_empty_or_zero_dims() {
        assert!(QuantParams::new(0.1, vec![], 32, DType::F32).is_err());
        assert!(QuantParams::new(0.1, vec![3, 0], 32, DType::F32).is_err());
        assert!(QuantParams::new(0.1, vec![3], 0, DType::F32).is_err());
    }

    #[test]
    fn partial_last_block() {
        let p = QuantParams::new(0.1, vec![10, 7], 32, DType::F64).unwrap();
        assert_eq!(p.element_count(), 70);
        assert_eq!(p.block_count(), 3);
        assert_eq!(p.block_range(2), 64..70);
    }

    #[test]
    fn block_len_may_exceed_element_count() {
        let p = QuantParams::new(0.1, vec![5], 32, DType::F64).unwrap();
        assert_eq!(p.block_count(), 1);
        assert_eq!(p.block_range(0), 0..5);
    }

    #[test]
    fn dims_parse() {
        assert_eq!(parse_dims("500x500x100").unwrap(), vec![500, 500, 100]);
        assert!(parse_dims("5xx").is_err());
    }

    #[test]
    fn mismatch_detection() {
        let a = QuantParams::new(0.1, vec![8], 4, DType::F32).unwrap();
        let b = QuantParams::new(0.2, vec![8], 4, DType::F32).unwrap();
        assert!(matches!(a.ensure_compatible(&b), Err(Error::ParamsMismatch(_))));
        assert!(a.ensure_compatible(&a.clone()).is_ok());
    }
}
