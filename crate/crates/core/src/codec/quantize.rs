//! Value <-> bin conversions.
//!
//! A bin `b` reconstructs to `2·eps·b`, rounded to the stream dtype. All bin
//! arithmetic is done in `f64` with direct division by the bin width.

use rayon::prelude::*;

use crate::codec::RawArray;
use crate::error::{Error, Result};
use crate::model::{DType, QuantArray, QuantParams};

const TWO_POW_63: f64 = 9_223_372_036_854_775_808.0;

/// Reconstructed value of `bin`.
#[inline]
pub fn reconstruct(bin: i64, bin_width: f64, dtype: DType) -> f64 {
    dtype.round(bin_width * bin as f64)
}

#[inline]
fn to_bin(q: f64) -> Result<i64> {
    // excludes NaN, ±inf and i64::MIN
    if q > -TWO_POW_63 && q < TWO_POW_63 {
        let b = q as i64;
        if b != i64::MIN {
            return Ok(b);
        }
    }
    Err(Error::QuantOverflow)
}

/// Keeps `bin` unless its reconstruction misses `x` by more than `eps` after
/// rounding, in which case the neighbour that meets the bound is taken.
#[inline]
fn settle(x: f64, bin: i64, eps: f64, bin_width: f64, dtype: DType) -> i64 {
    if (x - reconstruct(bin, bin_width, dtype)).abs() <= eps {
        return bin;
    }
    settle_slow(x, bin, eps, bin_width, dtype)
}

#[cold]
fn settle_slow(x: f64, bin: i64, eps: f64, bin_width: f64, dtype: DType) -> i64 {
    [bin.checked_sub(1), bin.checked_add(1)]
        .into_iter()
        .flatten()
        .filter(|&b| b != i64::MIN)
        .map(|b| (b, (x - reconstruct(b, bin_width, dtype)).abs()))
        .filter(|&(_, err)| err <= eps)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map_or(bin, |(b, _)| b)
}

/// Bin of a single value: `floor((x + eps) / (2·eps))`.
#[inline]
pub fn quantize_value(x: f64, eps: f64, bin_width: f64, dtype: DType) -> Result<i64> {
    let bin = to_bin(((x + eps) / bin_width).floor())?;
    Ok(settle(x, bin, eps, bin_width, dtype))
}

/// Bin nearest to `v`, ties away from zero. Used to bring products back onto
/// the bin grid.
#[inline]
pub fn requantize_nearest(v: f64, eps: f64, bin_width: f64, dtype: DType) -> Result<i64> {
    let bin = to_bin((v / bin_width).round())?;
    Ok(settle(v, bin, eps, bin_width, dtype))
}

/// Same as [`requantize_nearest`] for a whole array of values.
pub fn requantize_nearest_all(values: &[f64], params: &QuantParams) -> Result<Vec<i64>> {
    let (eps, w, dt) = (params.eps(), params.bin_width(), params.dtype());
    values.par_iter().map(|&v| requantize_nearest(v, eps, w, dt)).collect()
}

/// Quantizes a raw array onto the bin grid of `params`.
pub fn quantize(raw: &RawArray, params: &QuantParams) -> Result<QuantArray> {
    if raw.dims() != params.dims() || raw.dtype() != params.dtype() {
        return Err(Error::ParamsMismatch(format!(
            "raw array {:?}/{} vs params {:?}/{}",
            raw.dims(),
            raw.dtype(),
            params.dims(),
            params.dtype()
        )));
    }
    let (eps, w, dt) = (params.eps(), params.bin_width(), params.dtype());
    let bins = raw.values().par_iter().map(|&x| quantize_value(x, eps, w, dt)).collect::<Result<Vec<_>>>()?;
    Ok(QuantArray::from_trusted(bins, params.clone()))
}

/// Reconstructs values from bins.
pub fn dequantize(q: &QuantArray) -> RawArray {
    let p = q.params();
    let (w, dt) = (p.bin_width(), p.dtype());
    let values = q.bins().par_iter().map(|&b| reconstruct(b, w, dt)).collect();
    RawArray::from_trusted(values, p.dims().to_vec(), dt)
}
