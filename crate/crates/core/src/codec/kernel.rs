//! Fused per-block encode/decode kernels and the block-parallel driver.

use std::ops::Range;

use rayon::prelude::*;

use crate::bitpack::{bit_width, get_field, pack, pack_signs, sign_bit};
use crate::error::{Error, Result};
use crate::model::{bin_from_i128, CompressedStream, EncodedRun, QuantParams};

/// Elements handled by one parallel task.
const CHUNK_ELEMENTS: usize = 1 << 15;

/// Block ranges processed as one parallel task.
pub(crate) fn block_chunks(params: &QuantParams) -> (usize, Vec<Range<usize>>) {
    let per = (CHUNK_ELEMENTS / params.block_len()).max(1);
    let blocks = params.block_count();
    let chunks = (0..blocks.div_ceil(per)).map(|c| c * per..((c + 1) * per).min(blocks)).collect();
    (per, chunks)
}

/// Runs `f` over block chunks in parallel. Results keep block order and the
/// first error in block order wins, independent of scheduling.
pub(crate) fn par_block_chunks<T, F>(params: &QuantParams, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<usize>) -> Result<T> + Sync,
{
    let (_, chunks) = block_chunks(params);
    let results: Vec<Result<T>> = chunks.into_par_iter().map(&f).collect();
    results.into_iter().collect()
}

/// Encodes chunks of blocks in parallel and assembles the stream.
pub(crate) fn encode_par<F>(params: &QuantParams, f: F) -> Result<CompressedStream>
where
    F: Fn(Range<usize>, &mut EncodedRun) -> Result<()> + Sync,
{
    let runs = par_block_chunks(params, |blocks| {
        let mut run = EncodedRun::default();
        f(blocks, &mut run)?;
        Ok(run)
    })?;
    Ok(CompressedStream::assemble(params.clone(), runs))
}

#[inline]
pub(crate) fn check_outlier(o: i128) -> Result<i64> {
    i32::try_from(o).map(i64::from).map_err(|_| Error::OutlierOverflow {
        value: i64::try_from(o).unwrap_or(if o < 0 { i64::MIN } else { i64::MAX }),
    })
}

/// Appends one block, given its bins, to `run`.
#[inline]
pub(crate) fn encode_bins(bins: &[i64], run: &mut EncodedRun, mags: &mut Vec<u64>) -> Result<()> {
    let outlier = check_outlier(bins[0] as i128)?;
    mags.clear();
    mags.push(0);
    let mut or = 0u64;
    for k in 1..bins.len() {
        // |b| <= 2^63 - 1 so the difference magnitude fits in u64
        let m = (bins[k] as i128 - bins[k - 1] as i128).unsigned_abs() as u64;
        or |= m;
        mags.push(m);
    }
    let width = bit_width(or);
    run.widths.push(width);
    run.outliers.push(outlier);
    if width > 0 {
        pack_signs((0..bins.len()).map(|k| k > 0 && bins[k] < bins[k - 1]), &mut run.signs);
        pack(mags, width, &mut run.payload);
    }
    Ok(())
}

/// Appends one block given its outlier and signed residuals (`residuals[0]`
/// ignored). Zero residuals get a clear sign bit.
#[inline]
pub(crate) fn encode_residuals(
    outlier: i128,
    residuals: &[i128],
    run: &mut EncodedRun,
    mags: &mut Vec<u64>,
) -> Result<()> {
    let outlier = check_outlier(outlier)?;
    mags.clear();
    mags.push(0);
    let mut or = 0u64;
    for &r in &residuals[1..] {
        let m = u64::try_from(r.unsigned_abs()).map_err(|_| Error::QuantOverflow)?;
        or |= m;
        mags.push(m);
    }
    let width = bit_width(or);
    run.widths.push(width);
    run.outliers.push(outlier);
    if width > 0 {
        pack_signs(residuals.iter().enumerate().map(|(k, &r)| k > 0 && r < 0), &mut run.signs);
        pack(mags, width, &mut run.payload);
    }
    Ok(())
}

/// Decodes block `j` into bins (prefix sum over signed residuals).
#[inline]
pub(crate) fn decode_bins(stream: &CompressedStream, j: usize, out: &mut [i64]) -> Result<()> {
    let outlier = stream.outliers()[j];
    let first = bin_from_i128(outlier as i128)?;
    let width = stream.widths()[j];
    if width == 0 {
        out.fill(first);
        return Ok(());
    }
    let plane = stream.block_signs(j);
    let payload = stream.block_payload(j);
    out[0] = first;
    let mut acc = first as i128;
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let m = get_field(payload, k, width) as i128;
        acc += if sign_bit(plane, k) { -m } else { m };
        *slot = bin_from_i128(acc)?;
    }
    Ok(())
}

/// Decodes block `j` into signed residuals; `out[0]` is set to 0.
#[inline]
pub(crate) fn decode_residuals(stream: &CompressedStream, j: usize, out: &mut [i128]) {
    let width = stream.widths()[j];
    out[0] = 0;
    if width == 0 {
        out.fill(0);
        return;
    }
    let plane = stream.block_signs(j);
    let payload = stream.block_payload(j);
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let m = get_field(payload, k, width) as i128;
        *slot = if sign_bit(plane, k) { -m } else { m };
    }
}

/// Adds block `j`'s signed residuals into `acc`. Callers ensure the sums fit
/// in `i64`.
#[inline]
pub(crate) fn add_residuals_i64(stream: &CompressedStream, j: usize, acc: &mut [i64]) {
    let width = stream.widths()[j];
    if width == 0 {
        return;
    }
    let plane = stream.block_signs(j);
    let payload = stream.block_payload(j);
    for (k, slot) in acc.iter_mut().enumerate().skip(1) {
        let m = get_field(payload, k, width) as i64;
        *slot += if sign_bit(plane, k) { -m } else { m };
    }
}

/// Appends one block from `i64` residuals (see [`encode_residuals`]).
#[inline]
pub(crate) fn encode_residuals_i64(
    outlier: i128,
    residuals: &[i64],
    run: &mut EncodedRun,
    mags: &mut Vec<u64>,
) -> Result<()> {
    let outlier = check_outlier(outlier)?;
    mags.clear();
    mags.push(0);
    let mut or = 0u64;
    for &r in &residuals[1..] {
        let m = r.unsigned_abs();
        or |= m;
        mags.push(m);
    }
    let width = bit_width(or);
    run.widths.push(width);
    run.outliers.push(outlier);
    if width > 0 {
        pack_signs(residuals.iter().enumerate().map(|(k, &r)| k > 0 && r < 0), &mut run.signs);
        pack(mags, width, &mut run.payload);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DType;

    #[test]
    fn chunking_covers_all_blocks() {
        let p = QuantParams::new(0.1, vec![100_003], 7, DType::F32).unwrap();
        let (_, chunks) = block_chunks(&p);
        assert_eq!(chunks.first().unwrap().start, 0);
        assert_eq!(chunks.last().unwrap().end, p.block_count());
        assert!(chunks.windows(2).all(|w| w[0].end == w[1].start));
    }

    #[test]
    fn outlier_range() {
        assert_eq!(check_outlier(i32::MAX as i128), Ok(i32::MAX as i64));
        assert!(matches!(check_outlier(i32::MIN as i128 - 1), Err(Error::OutlierOverflow { .. })));
    }

    #[test]
    fn encode_example_block() {
        let mut run = EncodedRun::default();
        encode_bins(&[-1, -1, -3, -3], &mut run, &mut Vec::new()).unwrap();
        assert_eq!(run.widths, vec![2]);
        assert_eq!(run.outliers, vec![-1]);
        assert_eq!(run.signs, vec![0x20]);
        assert_eq!(run.payload, vec![0x08]);
    }
}
