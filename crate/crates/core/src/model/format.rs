//! Byte layout of a serialized [`CompressedStream`]. All multi-byte fields are
//! little-endian.
//!
//! ```text
//! offset  size      field
//! 0       4         magic "HSZP"
//! 4       2         format version
//! 6       1         dtype (0 = f32, 1 = f64)
//! 7       1         reserved, must be zero
//! 8       8         absolute error bound, IEEE-754 binary64
//! 16      4         block length
//! 20      4         number of dimensions d
//! 24      8         element count
//! 32      8·d       dims, row-major order
//! ...     B         block widths, one byte per block
//! ...     4·B       block outliers, i32
//! ...               sign planes of non-constant blocks
//! ...               packed magnitudes of non-constant blocks
//! ```

use crate::error::{Error, Result};
use crate::model::{CompressedStream, DType, QuantParams};

pub const MAGIC: [u8; 4] = *b"HSZP";
pub const VERSION: u16 = 1;
const FIXED_HEADER: usize = 32;

pub fn header_len(ndims: usize) -> usize {
    FIXED_HEADER + 8 * ndims
}

/// Serializes a stream. Fails if an outlier does not fit in 32 bits.
pub fn serialize(stream: &CompressedStream) -> Result<Vec<u8>> {
    let params = stream.params();
    let mut out = Vec::with_capacity(stream.serialized_len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(params.dtype().tag());
    out.push(0);
    out.extend_from_slice(&params.eps().to_le_bytes());
    out.extend_from_slice(&(params.block_len() as u32).to_le_bytes());
    out.extend_from_slice(&(params.dims().len() as u32).to_le_bytes());
    out.extend_from_slice(&(params.element_count() as u64).to_le_bytes());
    for &d in params.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    out.extend_from_slice(stream.widths());
    for &o in stream.outliers() {
        let o32 = i32::try_from(o).map_err(|_| Error::OutlierOverflow { value: o })?;
        out.extend_from_slice(&o32.to_le_bytes());
    }
    out.extend_from_slice(stream.sign_section());
    out.extend_from_slice(stream.payload_section());
    debug_assert_eq!(out.len(), stream.serialized_len());
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(Error::TruncatedStream { needed: self.pos.saturating_add(n), available: self.bytes.len() })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
}

/// Parses and validates a serialized stream.
pub fn deserialize(bytes: &[u8]) -> Result<CompressedStream> {
    let prefix = &bytes[..bytes.len().min(4)];
    if prefix != &MAGIC[..prefix.len()] {
        return Err(Error::BadMagic);
    }
    let mut cur = Cursor { bytes, pos: 0 };
    cur.take(4)?;
    let version = u16::from_le_bytes(cur.array()?);
    if version != VERSION {
        return Err(Error::VersionMismatch { found: version, expected: VERSION });
    }
    let [tag, reserved] = cur.array()?;
    let dtype = DType::from_tag(tag).ok_or_else(|| Error::InvalidParams(format!("unknown dtype tag {tag}")))?;
    if reserved != 0 {
        return Err(Error::InvalidParams(format!("reserved header byte is {reserved}, expected 0")));
    }
    let eps = f64::from_le_bytes(cur.array()?);
    let block_len = cur.u32()? as usize;
    let ndims = cur.u32()? as usize;
    let element_count = cur.u64()?;
    let dims_bytes =
        cur.take(ndims.checked_mul(8).ok_or(Error::TruncatedStream { needed: usize::MAX, available: bytes.len() })?)?;
    let dims: Vec<usize> =
        dims_bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().expect("chunk of 8")) as usize).collect();
    let params = QuantParams::new(eps, dims, block_len, dtype)?;
    if params.element_count() as u64 != element_count {
        return Err(Error::GeometryMismatch(format!(
            "dims {:?} hold {} elements, header says {element_count}",
            params.dims(),
            params.element_count()
        )));
    }

    let blocks = params.block_count();
    let widths = cur.take(blocks)?.to_vec();
    let outliers: Vec<i64> = cur
        .take(blocks.checked_mul(4).ok_or(Error::TruncatedStream { needed: usize::MAX, available: bytes.len() })?)?
        .chunks_exact(4)
        .map(|c| i32::from_le_bytes(c.try_into().expect("chunk of 4")) as i64)
        .collect();
    if let Some(w) = widths.iter().find(|&&w| w > 64) {
        return Err(Error::GeometryMismatch(format!("block width {w} exceeds 64")));
    }

    let (mut sign_len, mut payload_len) = (0usize, 0usize);
    for (j, &w) in widths.iter().enumerate() {
        if w > 0 {
            let len = params.block_range(j).len();
            sign_len += crate::bitpack::sign_plane_len(len);
            payload_len += crate::bitpack::packed_len(len, w);
        }
    }
    let signs = cur.take(sign_len)?.to_vec();
    let payload = cur.take(payload_len)?.to_vec();
    if cur.pos != bytes.len() {
        return Err(Error::GeometryMismatch(format!("{} trailing bytes after payload", bytes.len() - cur.pos)));
    }
    CompressedStream::from_parts(params, widths, outliers, signs, payload)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> CompressedStream {
        let p = QuantParams::new(0.01, vec![2, 2], 4, DType::F32).unwrap();
        CompressedStream::from_parts(p, vec![2], vec![-1], vec![0x20], vec![0x08]).unwrap()
    }

    #[test]
    fn example_layout() {
        let bytes = serialize(&example()).unwrap();
        assert_eq!(bytes.len(), header_len(2) + 5 + 1 + 1);
        assert_eq!(&bytes[..4], b"HSZP");
        let body = &bytes[header_len(2)..];
        assert_eq!(body, &[0x02, 0xFF, 0xFF, 0xFF, 0xFF, 0x20, 0x08]);
        assert_eq!(deserialize(&bytes).unwrap(), example());
    }

    #[test]
    fn rejects_nonzero_reserved_byte() {
        let mut bytes = serialize(&example()).unwrap();
        bytes[7] = 0x55;
        assert!(matches!(deserialize(&bytes), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn all_zero_stream_has_empty_sections() {
        let p = QuantParams::new(0.5, vec![64], 32, DType::F32).unwrap();
        let s = CompressedStream::from_parts(p, vec![0, 0], vec![0, 0], vec![], vec![]).unwrap();
        let bytes = serialize(&s).unwrap();
        assert_eq!(bytes.len(), header_len(1) + 10);
        assert_eq!(deserialize(&bytes).unwrap(), s);
    }

    #[test]
    fn outlier_overflow() {
        let p = QuantParams::new(0.01, vec![4], 4, DType::F32).unwrap();
        let s = CompressedStream::from_parts(p, vec![0], vec![1 << 40], vec![], vec![]).unwrap();
        assert_eq!(serialize(&s), Err(Error::OutlierOverflow { value: 1 << 40 }));
    }

    #[test]
    fn truncated_payload() {
        let bytes = serialize(&example()).unwrap();
        for cut in 0..bytes.len() {
            let err = deserialize(&bytes[..cut]).unwrap_err();
            assert!(matches!(err, Error::TruncatedStream { .. }), "cut {cut}: {err:?}");
        }
    }

    #[test]
    fn bad_magic_and_version() {
        let mut bytes = serialize(&example()).unwrap();
        bytes[4] = 9;
        assert!(matches!(deserialize(&bytes), Err(Error::VersionMismatch { found: 9, .. })));
        bytes[0] = b'X';
        assert_eq!(deserialize(&bytes), Err(Error::BadMagic));
        assert_eq!(deserialize(b"ZZ"), Err(Error::BadMagic));
    }

    #[test]
    fn edited_dim_is_geometry_mismatch() {
        let mut bytes = serialize(&example()).unwrap();
        // first dim lives at offset 32
        bytes[32] = 3;
        assert!(matches!(deserialize(&bytes), Err(Error::GeometryMismatch(_))));
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut bytes = serialize(&example()).unwrap();
        bytes.push(0);
        assert!(matches!(deserialize(&bytes), Err(Error::GeometryMismatch(_))));
    }
}
