use crate::codec::kernel::{
    add_residuals_i64, check_outlier, decode_bins, decode_residuals, encode_bins, encode_par, encode_residuals,
    encode_residuals_i64,
};
use crate::codec::{reconstruct, requantize_nearest};
use crate::error::{Error, Result};
use crate::model::CompressedStream;

fn combine(a: &CompressedStream, b: &CompressedStream, sign: i128) -> Result<CompressedStream> {
    a.params().ensure_compatible(b.params())?;
    let p = a.params();
    encode_par(p, |blocks, run| {
        let mut ra = vec![0i128; p.block_len()];
        let mut rb = vec![0i128; p.block_len()];
        let mut mags = Vec::with_capacity(p.block_len());
        for j in blocks {
            let outlier = a.outliers()[j] as i128 + sign * b.outliers()[j] as i128;
            if a.is_constant(j) && b.is_constant(j) {
                run.widths.push(0);
                run.outliers.push(check_outlier(outlier)?);
                continue;
            }
            let n = p.block_range(j).len();
            let (ra, rb) = (&mut ra[..n], &mut rb[..n]);
            decode_residuals(a, j, ra);
            decode_residuals(b, j, rb);
            for (x, &y) in ra.iter_mut().zip(rb.iter()) {
                *x += sign * y;
            }
            encode_residuals(outlier, ra, run, &mut mags)?;
        }
        Ok(())
    })
}

/// Element-wise sum, computed on outliers and signed residuals without
/// undoing the Lorenzo step.
pub fn elementwise_add(a: &CompressedStream, b: &CompressedStream) -> Result<CompressedStream> {
    combine(a, b, 1)
}

/// Element-wise difference `a - b`.
pub fn elementwise_sub(a: &CompressedStream, b: &CompressedStream) -> Result<CompressedStream> {
    combine(a, b, -1)
}

/// Element-wise sum of any number of streams in one pass: per block, the
/// outliers and signed residuals of every operand are added in operand order
/// and the block is encoded once.
///
/// Gives the same stream as folding [`elementwise_add`] left to right,
/// except that only the final outliers are range-checked.
pub fn elementwise_sum(streams: &[&CompressedStream]) -> Result<CompressedStream> {
    let (first, rest) = streams.split_first().ok_or_else(|| Error::InvalidParams("no streams to sum".into()))?;
    for s in rest {
        first.params().ensure_compatible(s.params())?;
    }
    let p = first.params();
    // residual sums stay below 2^63 when every width is at most this
    let narrow = 62 - (usize::BITS - streams.len().leading_zeros()).min(62) as u8;
    encode_par(p, |blocks, run| {
        let mut acc = vec![0i64; p.block_len()];
        let mut wide = vec![0i128; p.block_len()];
        let mut tmp = vec![0i128; p.block_len()];
        let mut mags = Vec::with_capacity(p.block_len());
        for j in blocks {
            let outlier: i128 = streams.iter().map(|s| s.outliers()[j] as i128).sum();
            let n = p.block_range(j).len();
            let max_width = streams.iter().map(|s| s.widths()[j]).max().unwrap_or(0);
            if max_width == 0 {
                run.widths.push(0);
                run.outliers.push(check_outlier(outlier)?);
            } else if max_width <= narrow {
                let acc = &mut acc[..n];
                acc.fill(0);
                streams.iter().for_each(|s| add_residuals_i64(s, j, acc));
                encode_residuals_i64(outlier, acc, run, &mut mags)?;
            } else {
                let wide = &mut wide[..n];
                wide.fill(0);
                for s in streams {
                    decode_residuals(s, j, &mut tmp[..n]);
                    wide.iter_mut().zip(&tmp[..n]).for_each(|(x, &y)| *x += y);
                }
                encode_residuals(outlier, wide, run, &mut mags)?;
            }
        }
        Ok(())
    })
}

/// Element-wise product on the bin grid, rounding each product to the
/// nearest bin (same rule as [`super::scalar_mul`]).
pub fn hadamard(a: &CompressedStream, b: &CompressedStream) -> Result<CompressedStream> {
    a.params().ensure_compatible(b.params())?;
    let p = a.params();
    let (eps, w, dt) = (p.eps(), p.bin_width(), p.dtype());
    let rescale = |x: i64, y: i64| requantize_nearest(reconstruct(x, w, dt) * reconstruct(y, w, dt), eps, w, dt);
    encode_par(p, |blocks, run| {
        let mut ba = vec![0i64; p.block_len()];
        let mut bb = vec![0i64; p.block_len()];
        let mut mags = Vec::with_capacity(p.block_len());
        for j in blocks {
            let n = p.block_range(j).len();
            let (ba, bb) = (&mut ba[..n], &mut bb[..n]);
            if a.is_constant(j) && b.is_constant(j) {
                ba.fill(rescale(a.outliers()[j], b.outliers()[j])?);
            } else {
                decode_bins(a, j, ba)?;
                decode_bins(b, j, bb)?;
                for (x, &y) in ba.iter_mut().zip(bb.iter()) {
                    *x = rescale(*x, y)?;
                }
            }
            encode_bins(ba, run, &mut mags)?;
        }
        Ok(())
    })
}
