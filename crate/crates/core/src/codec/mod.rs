//! Quantize -> Lorenzo -> blockwise fixed-length pipeline and its inverse,
//! plus the partial decode/encode entry points used by the compressed-domain
//! operations.

pub(crate) mod kernel;
mod lorenzo;
mod quantize;
mod raw;

use rayon::prelude::*;

pub use lorenzo::{lorenzo_decode, lorenzo_encode, pack_blocks};
pub use quantize::{dequantize, quantize, quantize_value, reconstruct, requantize_nearest, requantize_nearest_all};
pub use raw::{ErrorBound, RawArray};

use crate::error::{Error, Result};
use crate::model::{CompressedStream, QuantArray, QuantParams};
use kernel::{block_chunks, decode_bins, encode_bins, encode_par};

fn ensure_raw_matches(raw: &RawArray, params: &QuantParams) -> Result<()> {
    if raw.dims() != params.dims() || raw.dtype() != params.dtype() {
        return Err(Error::ParamsMismatch(format!(
            "raw array {:?}/{} vs params {:?}/{}",
            raw.dims(),
            raw.dtype(),
            params.dims(),
            params.dtype()
        )));
    }
    Ok(())
}

/// Compresses `raw` with the error bound and geometry in `params`.
pub fn compress(raw: &RawArray, params: &QuantParams) -> Result<CompressedStream> {
    ensure_raw_matches(raw, params)?;
    let (eps, w, dt) = (params.eps(), params.bin_width(), params.dtype());
    let values = raw.values();
    encode_par(params, |blocks, run| {
        let mut bins = Vec::with_capacity(params.block_len());
        let mut mags = Vec::with_capacity(params.block_len());
        for j in blocks {
            bins.clear();
            for &x in &values[params.block_range(j)] {
                bins.push(quantize_value(x, eps, w, dt)?);
            }
            encode_bins(&bins, run, &mut mags)?;
        }
        Ok(())
    })
}

/// Resolves `bound` against `raw` and compresses.
pub fn compress_with_bound(raw: &RawArray, bound: ErrorBound, block_len: usize) -> Result<CompressedStream> {
    let eps = bound.resolve(raw)?;
    let params = QuantParams::new(eps, raw.dims().to_vec(), block_len, raw.dtype())?;
    compress(raw, &params)
}

/// Decodes every block into `out` (one slot per element), chunk-parallel.
fn decode_into<T, F>(stream: &CompressedStream, out: &mut [T], emit: F) -> Result<()>
where
    T: Send,
    F: Fn(&[i64], &mut [T]) + Sync,
{
    let params = stream.params();
    let (per, chunks) = block_chunks(params);
    let span = per * params.block_len();
    let results: Vec<Result<()>> = out
        .par_chunks_mut(span)
        .zip(chunks)
        .map(|(dst, blocks)| {
            let mut bins = vec![0i64; params.block_len()];
            let base = blocks.start * params.block_len();
            for j in blocks {
                let r = params.block_range(j);
                let n = r.len();
                decode_bins(stream, j, &mut bins[..n])?;
                emit(&bins[..n], &mut dst[r.start - base..r.end - base]);
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect()
}

/// Full decompression: unpack, undo Lorenzo, reconstruct.
pub fn decompress(stream: &CompressedStream) -> Result<RawArray> {
    let p = stream.params();
    let (w, dt) = (p.bin_width(), p.dtype());
    let mut values = vec![0f64; p.element_count()];
    decode_into(stream, &mut values, |bins, dst| {
        for (d, &b) in dst.iter_mut().zip(bins) {
            *d = reconstruct(b, w, dt);
        }
    })?;
    Ok(RawArray::from_trusted(values, p.dims().to_vec(), dt))
}

/// Partial decompression to bins; reconstruction is never applied.
pub fn decode_to_quant(stream: &CompressedStream) -> Result<QuantArray> {
    let p = stream.params();
    let mut bins = vec![0i64; p.element_count()];
    decode_into(stream, &mut bins, |src, dst| dst.copy_from_slice(src))?;
    Ok(QuantArray::from_trusted(bins, p.clone()))
}

/// Lorenzo plus fixed-length encoding of bins.
pub fn encode_from_quant(q: &QuantArray) -> Result<CompressedStream> {
    let params = q.params();
    encode_par(params, |blocks, run| {
        let mut mags = Vec::with_capacity(params.block_len());
        for j in blocks {
            encode_bins(q.block(j), run, &mut mags)?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{serialize, DType};

    fn example() -> (RawArray, QuantParams) {
        let raw = RawArray::new(vec![-0.025, -0.025, -0.051, -0.052], vec![2, 2], DType::F64).unwrap();
        let p = QuantParams::new(0.01, vec![2, 2], 4, DType::F64).unwrap();
        (raw, p)
    }

    #[test]
    fn example_stream() {
        let (raw, p) = example();
        let s = compress(&raw, &p).unwrap();
        assert_eq!(s.widths(), &[2]);
        assert_eq!(s.outliers(), &[-1]);
        assert_eq!(s.sign_section(), &[0x20]);
        assert_eq!(s.payload_section(), &[0x08]);
        assert_eq!(decompress(&s).unwrap().values(), &[-0.02, -0.02, -0.06, -0.06]);
        assert_eq!(decode_to_quant(&s).unwrap().bins(), &[-1, -1, -3, -3]);
    }

    #[test]
    fn staged_matches_fused() {
        let (raw, p) = example();
        let q = quantize(&raw, &p).unwrap();
        let staged = pack_blocks(&p, &lorenzo_encode(&q)).unwrap();
        assert_eq!(staged, compress(&raw, &p).unwrap());
        assert_eq!(staged.block_views(), lorenzo_encode(&q));
    }

    #[test]
    fn scaled_example_from_bins() {
        let p = QuantParams::new(0.01, vec![4], 4, DType::F64).unwrap();
        let s = encode_from_quant(&QuantArray::new(vec![-3, -3, -9, -9], p).unwrap()).unwrap();
        let v = s.block_view(0);
        assert_eq!(v.outlier, -3);
        assert_eq!(v.residual_mags, vec![0, 0, 6, 0]);
        assert_eq!(v.signs, vec![false, false, true, false]);
    }

    #[test]
    fn zeros_are_constant_blocks() {
        let p = QuantParams::new(0.01, vec![100], 32, DType::F32).unwrap();
        let s = encode_from_quant(&QuantArray::new(vec![0; 100], p).unwrap()).unwrap();
        assert_eq!(s.constant_block_count(), 4);
        assert!(decode_to_quant(&s).unwrap().bins().iter().all(|&b| b == 0));
    }

    #[test]
    fn constant_field() {
        let raw = RawArray::new(vec![1.0; 4096], vec![16, 256], DType::F32).unwrap();
        let p = QuantParams::new(1e-2, vec![16, 256], 32, DType::F32).unwrap();
        let s = compress(&raw, &p).unwrap();
        assert_eq!(s.constant_block_count(), s.block_count());
        assert_eq!(serialize(&s).unwrap().len(), crate::model::format::header_len(2) + 5 * 128);
        let back = decompress(&s).unwrap();
        assert!(back.values().iter().all(|&v| v == back.values()[0]));
        assert!((back.values()[0] - 1.0).abs() <= 1e-2);
    }

    #[test]
    fn outlier_overflow_on_compress() {
        let raw = RawArray::new(vec![1e3; 4], vec![4], DType::F64).unwrap();
        let p = QuantParams::new(1e-8, vec![4], 4, DType::F64).unwrap();
        assert!(matches!(compress(&raw, &p), Err(Error::OutlierOverflow { .. })));
    }

    #[test]
    fn rel_bound_resolution() {
        let raw = RawArray::new((0..64).map(|i| i as f64).collect(), vec![64], DType::F64).unwrap();
        let s = compress_with_bound(&raw, ErrorBound::Rel(1e-2), 32).unwrap();
        assert!((s.params().eps() - 0.63).abs() < 1e-12);
        assert!(raw.max_abs_diff(&decompress(&s).unwrap()) <= 0.63);
    }

    #[test]
    fn compress_rejects_mismatched_geometry() {
        let (raw, _) = example();
        let p = QuantParams::new(0.01, vec![4], 4, DType::F64).unwrap();
        assert!(matches!(compress(&raw, &p), Err(Error::ParamsMismatch(_))));
    }
}
