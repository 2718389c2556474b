use crate::bitpack::{packed_len, sign_bit, sign_plane_len, BitReader};
use crate::error::{Error, Result};
use crate::model::{BlockView, QuantParams};

/// Bytes per block in the fixed sections: one width byte plus a 32-bit outlier.
pub const FIXED_BYTES_PER_BLOCK: usize = 1 + 4;

/// A compressed field, laid out section by section:
/// per-block widths, per-block outliers, sign planes of the non-constant
/// blocks, then their bit-packed residual magnitudes.
///
/// Sign planes and payload runs are byte aligned per block; constant blocks
/// (width 0) contribute to neither section.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedStream {
    params: QuantParams,
    widths: Vec<u8>,
    outliers: Vec<i64>,
    signs: Vec<u8>,
    payload: Vec<u8>,
    sign_offsets: Vec<usize>,
    payload_offsets: Vec<usize>,
}

/// Section offsets implied by a width table: `(sign_offsets, payload_offsets)`,
/// each with `block_count + 1` entries.
fn offsets(params: &QuantParams, widths: &[u8]) -> (Vec<usize>, Vec<usize>) {
    let mut sign_offsets = Vec::with_capacity(widths.len() + 1);
    let mut payload_offsets = Vec::with_capacity(widths.len() + 1);
    let (mut s, mut p) = (0usize, 0usize);
    for (j, &w) in widths.iter().enumerate() {
        sign_offsets.push(s);
        payload_offsets.push(p);
        if w > 0 {
            let len = params.block_range(j).len();
            s += sign_plane_len(len);
            p += packed_len(len, w);
        }
    }
    sign_offsets.push(s);
    payload_offsets.push(p);
    (sign_offsets, payload_offsets)
}

/// Output of encoding a contiguous run of blocks.
#[derive(Debug, Default)]
pub(crate) struct EncodedRun {
    pub widths: Vec<u8>,
    pub outliers: Vec<i64>,
    pub signs: Vec<u8>,
    pub payload: Vec<u8>,
}

impl CompressedStream {
    /// Assembles a stream from its four sections, checking every length
    /// against the width table.
    pub fn from_parts(
        params: QuantParams,
        widths: Vec<u8>,
        outliers: Vec<i64>,
        signs: Vec<u8>,
        payload: Vec<u8>,
    ) -> Result<Self> {
        let blocks = params.block_count();
        if widths.len() != blocks || outliers.len() != blocks {
            return Err(Error::GeometryMismatch(format!(
                "{} widths / {} outliers for {blocks} blocks",
                widths.len(),
                outliers.len()
            )));
        }
        if let Some(w) = widths.iter().find(|&&w| w > 64) {
            return Err(Error::GeometryMismatch(format!("block width {w} exceeds 64")));
        }
        let (sign_offsets, payload_offsets) = offsets(&params, &widths);
        if signs.len() != sign_offsets[blocks] {
            return Err(Error::GeometryMismatch(format!(
                "sign section is {} bytes, widths imply {}",
                signs.len(),
                sign_offsets[blocks]
            )));
        }
        if payload.len() != payload_offsets[blocks] {
            return Err(Error::GeometryMismatch(format!(
                "payload section is {} bytes, widths imply {}",
                payload.len(),
                payload_offsets[blocks]
            )));
        }
        Ok(Self { params, widths, outliers, signs, payload, sign_offsets, payload_offsets })
    }

    /// Concatenates runs produced in block order.
    pub(crate) fn assemble(params: QuantParams, runs: Vec<EncodedRun>) -> Self {
        let blocks = params.block_count();
        let mut widths = Vec::with_capacity(blocks);
        let mut outliers = Vec::with_capacity(blocks);
        let mut signs = Vec::with_capacity(runs.iter().map(|r| r.signs.len()).sum());
        let mut payload = Vec::with_capacity(runs.iter().map(|r| r.payload.len()).sum());
        for r in runs {
            widths.extend_from_slice(&r.widths);
            outliers.extend_from_slice(&r.outliers);
            signs.extend_from_slice(&r.signs);
            payload.extend_from_slice(&r.payload);
        }
        let (sign_offsets, payload_offsets) = offsets(&params, &widths);
        debug_assert_eq!(signs.len(), sign_offsets[blocks]);
        debug_assert_eq!(payload.len(), payload_offsets[blocks]);
        Self { params, widths, outliers, signs, payload, sign_offsets, payload_offsets }
    }

    /// Same layout with replaced outliers.
    pub(crate) fn with_outliers(&self, outliers: Vec<i64>) -> Self {
        debug_assert_eq!(outliers.len(), self.outliers.len());
        Self { outliers, ..self.clone() }
    }

    /// Same widths and payload with replaced outliers and sign section.
    pub(crate) fn with_outliers_and_signs(&self, outliers: Vec<i64>, signs: Vec<u8>) -> Self {
        debug_assert_eq!(signs.len(), self.signs.len());
        Self {
            params: self.params.clone(),
            widths: self.widths.clone(),
            outliers,
            signs,
            payload: self.payload.clone(),
            sign_offsets: self.sign_offsets.clone(),
            payload_offsets: self.payload_offsets.clone(),
        }
    }

    pub fn params(&self) -> &QuantParams {
        &self.params
    }

    pub fn block_count(&self) -> usize {
        self.widths.len()
    }

    pub fn widths(&self) -> &[u8] {
        &self.widths
    }

    pub fn outliers(&self) -> &[i64] {
        &self.outliers
    }

    pub fn sign_section(&self) -> &[u8] {
        &self.signs
    }

    pub fn payload_section(&self) -> &[u8] {
        &self.payload
    }

    #[inline]
    pub fn is_constant(&self, j: usize) -> bool {
        self.widths[j] == 0
    }

    pub fn constant_block_count(&self) -> usize {
        self.widths.iter().filter(|&&w| w == 0).count()
    }

    /// Sign plane of block `j` (empty for constant blocks).
    #[inline]
    pub fn block_signs(&self, j: usize) -> &[u8] {
        &self.signs[self.sign_offsets[j]..self.sign_offsets[j + 1]]
    }

    /// Packed magnitudes of block `j` (empty for constant blocks).
    #[inline]
    pub fn block_payload(&self, j: usize) -> &[u8] {
        &self.payload[self.payload_offsets[j]..self.payload_offsets[j + 1]]
    }

    pub(crate) fn sign_offsets(&self) -> &[usize] {
        &self.sign_offsets
    }

    /// Unpacks block `j` into its sign/magnitude view.
    pub fn block_view(&self, j: usize) -> BlockView {
        let len = self.params.block_range(j).len();
        let width = self.widths[j];
        let outlier = self.outliers[j];
        if width == 0 {
            return BlockView::constant(outlier, len);
        }
        let plane = self.block_signs(j);
        let mut reader = BitReader::new(self.block_payload(j));
        let residual_mags = (0..len).map(|_| reader.read(width)).collect();
        let signs = (0..len).map(|i| sign_bit(plane, i)).collect();
        BlockView { outlier, residual_mags, signs, is_constant: false, width }
    }

    pub fn block_views(&self) -> Vec<BlockView> {
        (0..self.block_count()).map(|j| self.block_view(j)).collect()
    }

    /// Exact serialized size.
    pub fn serialized_len(&self) -> usize {
        crate::model::format::header_len(self.params.dims().len())
            + self.block_count() * FIXED_BYTES_PER_BLOCK
            + self.signs.len()
            + self.payload.len()
    }

    /// Raw size over serialized size.
    pub fn compression_ratio(&self) -> f64 {
        self.params.raw_bytes() as f64 / self.serialized_len() as f64
    }
}
