use crate::error::{Error, Result};
use crate::model::QuantParams;

/// Largest admissible bin magnitude (63 bits).
pub const MAX_BIN: i64 = i64::MAX;

/// Array of quantization bins: element `i` reconstructs to `2·eps·bins[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantArray {
    bins: Vec<i64>,
    params: QuantParams,
}

impl QuantArray {
    pub fn new(bins: Vec<i64>, params: QuantParams) -> Result<Self> {
        if bins.len() != params.element_count() {
            return Err(Error::GeometryMismatch(format!(
                "{} bins for {} elements",
                bins.len(),
                params.element_count()
            )));
        }
        if bins.contains(&i64::MIN) {
            return Err(Error::QuantOverflow);
        }
        Ok(Self { bins, params })
    }

    /// Skips validation; callers guarantee length and range.
    pub(crate) fn from_trusted(bins: Vec<i64>, params: QuantParams) -> Self {
        debug_assert_eq!(bins.len(), params.element_count());
        Self { bins, params }
    }

    pub fn bins(&self) -> &[i64] {
        &self.bins
    }

    pub fn params(&self) -> &QuantParams {
        &self.params
    }

    pub fn into_parts(self) -> (Vec<i64>, QuantParams) {
        (self.bins, self.params)
    }

    pub fn block(&self, j: usize) -> &[i64] {
        &self.bins[self.params.block_range(j)]
    }
}

/// Narrows an exact intermediate to a valid bin.
#[inline]
pub(crate) fn bin_from_i128(v: i128) -> Result<i64> {
    if v > MAX_BIN as i128 || v < -(MAX_BIN as i128) {
        Err(Error::QuantOverflow)
    } else {
        Ok(v as i64)
    }
}
