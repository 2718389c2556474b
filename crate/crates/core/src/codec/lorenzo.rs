//! Staged pipeline steps: 1-D Lorenzo decorrelation per block and the
//! blockwise fixed-length packing of the resulting views.
//!
//! [`crate::codec::compress`] fuses these steps per block; the staged forms
//! exist so each stage can be inspected and tested on its own.

use crate::bitpack::{pack, pack_signs};
use crate::error::{Error, Result};
use crate::model::{bin_from_i128, BlockView, CompressedStream, QuantArray, QuantParams};

/// Splits bins into blocks of outlier plus consecutive differences.
pub fn lorenzo_encode(q: &QuantArray) -> Vec<BlockView> {
    let p = q.params();
    (0..p.block_count())
        .map(|j| {
            let bins = q.block(j);
            let residuals: Vec<i128> =
                std::iter::once(0).chain(bins.windows(2).map(|w| w[1] as i128 - w[0] as i128)).collect();
            BlockView::from_signed(bins[0], &residuals).expect("bin differences fit in 64 bits")
        })
        .collect()
}

/// Prefix-sums each block back into bins.
pub fn lorenzo_decode(blocks: &[BlockView], params: &QuantParams) -> Result<QuantArray> {
    if blocks.len() != params.block_count() {
        return Err(Error::GeometryMismatch(format!("{} blocks for {} expected", blocks.len(), params.block_count())));
    }
    let mut bins = Vec::with_capacity(params.element_count());
    for (j, block) in blocks.iter().enumerate() {
        if block.len() != params.block_range(j).len() || block.signs.len() != block.len() {
            return Err(Error::GeometryMismatch(format!("block {j} has {} elements", block.len())));
        }
        let mut acc = bin_from_i128(block.outlier as i128)? as i128;
        bins.push(acc as i64);
        for i in 1..block.len() {
            acc += block.residual(i);
            bins.push(bin_from_i128(acc)?);
        }
    }
    Ok(QuantArray::from_trusted(bins, params.clone()))
}

/// Blockwise fixed-length encoding of already decorrelated blocks.
pub fn pack_blocks(params: &QuantParams, blocks: &[BlockView]) -> Result<CompressedStream> {
    if blocks.len() != params.block_count() {
        return Err(Error::GeometryMismatch(format!("{} blocks for {} expected", blocks.len(), params.block_count())));
    }
    let mut widths = Vec::with_capacity(blocks.len());
    let mut outliers = Vec::with_capacity(blocks.len());
    let mut signs = Vec::new();
    let mut payload = Vec::new();
    for (j, b) in blocks.iter().enumerate() {
        b.validate()?;
        if b.len() != params.block_range(j).len() {
            return Err(Error::GeometryMismatch(format!("block {j} has {} elements", b.len())));
        }
        widths.push(b.width);
        outliers.push(b.outlier);
        if !b.is_constant {
            pack_signs(b.signs.iter().copied(), &mut signs);
            pack(&b.residual_mags, b.width, &mut payload);
        }
    }
    CompressedStream::from_parts(params.clone(), widths, outliers, signs, payload)
}
