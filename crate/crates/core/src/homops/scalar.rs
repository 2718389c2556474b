use crate::bitpack::last_byte_mask;
use crate::codec::kernel::{check_outlier, decode_bins, encode_bins, encode_par};
use crate::codec::{reconstruct, requantize_nearest};
use crate::error::{Error, Result};
use crate::model::CompressedStream;

/// A scalar operand mapped onto a stream's bin grid by truncation toward zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarBin {
    pub value: f64,
    pub bin: i64,
    pub eps: f64,
}

impl ScalarBin {
    pub fn new(value: f64, eps: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidParams(format!("scalar must be finite, got {value}")));
        }
        let q = (value / (2.0 * eps)).trunc();
        // 2^63; q is finite here since value and eps are
        if q.abs() >= 9.223_372_036_854_776e18 {
            return Err(Error::QuantOverflow);
        }
        Ok(Self { value, bin: q as i64, eps })
    }

    /// The value the operation actually applies: `2·eps·bin`.
    pub fn applied(&self) -> f64 {
        2.0 * self.eps * self.bin as f64
    }
}

/// Negates every element by flipping sign bits and negating outliers.
/// Widths and payload are untouched.
pub fn negate(c: &CompressedStream) -> CompressedStream {
    let p = c.params();
    let mut signs = c.sign_section().to_vec();
    let offsets = c.sign_offsets();
    for j in 0..c.block_count() {
        if c.is_constant(j) {
            continue;
        }
        let plane = &mut signs[offsets[j]..offsets[j + 1]];
        for b in plane.iter_mut() {
            *b = !*b;
        }
        if let Some(last) = plane.last_mut() {
            *last &= last_byte_mask(p.block_range(j).len());
        }
    }
    let outliers = c.outliers().iter().map(|&o| -o).collect();
    c.with_outliers_and_signs(outliers, signs)
}

fn shift_outliers(c: &CompressedStream, delta: i128) -> Result<CompressedStream> {
    let outliers = c.outliers().iter().map(|&o| check_outlier(o as i128 + delta)).collect::<Result<Vec<_>>>()?;
    Ok(c.with_outliers(outliers))
}

/// Adds `s` (as its bin) to every element by shifting each block outlier.
pub fn scalar_add(c: &CompressedStream, s: f64) -> Result<CompressedStream> {
    let sb = ScalarBin::new(s, c.params().eps())?;
    shift_outliers(c, sb.bin as i128)
}

/// Subtracts `s` (as its bin) from every element.
pub fn scalar_sub(c: &CompressedStream, s: f64) -> Result<CompressedStream> {
    let sb = ScalarBin::new(s, c.params().eps())?;
    shift_outliers(c, -(sb.bin as i128))
}

/// Multiplies every element by the quantized scalar `2·eps·bin(s)` on the bin
/// grid, rounding each product to the nearest bin (ties away from zero).
///
/// The product is evaluated as `(2·eps·ρ) · (2·eps·ρ_s) / (2·eps)` in the
/// stream's dtype, the same expression a decompress/multiply/requantize
/// round trip evaluates, so both agree bit for bit.
pub fn scalar_mul(c: &CompressedStream, s: f64) -> Result<CompressedStream> {
    let p = c.params();
    let sb = ScalarBin::new(s, p.eps())?;
    let (eps, w, dt) = (p.eps(), p.bin_width(), p.dtype());
    let factor = reconstruct(sb.bin, w, dt);
    let rescale = |b: i64| requantize_nearest(reconstruct(b, w, dt) * factor, eps, w, dt);
    encode_par(p, |blocks, run| {
        let mut bins = vec![0i64; p.block_len()];
        let mut mags = Vec::with_capacity(p.block_len());
        for j in blocks {
            let n = p.block_range(j).len();
            let bins = &mut bins[..n];
            if c.is_constant(j) {
                bins.fill(rescale(c.outliers()[j])?);
            } else {
                decode_bins(c, j, bins)?;
                for b in bins.iter_mut() {
                    *b = rescale(*b)?;
                }
            }
            encode_bins(bins, run, &mut mags)?;
        }
        Ok(())
    })
}
