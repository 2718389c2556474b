//! Error-bounded lossy compression of floating-point fields with arithmetic
//! carried out on the compressed representation.
//!
//! A field is quantized onto bins of width `2·eps`, decorrelated block by
//! block with a 1-D Lorenzo operator, and stored with one fixed bit width per
//! block. Because outliers, signs and residual magnitudes are kept apart,
//! negation and scalar offsets touch only metadata, element-wise sums work on
//! the unpacked residuals, and products and reductions work on bins, never on
//! reconstructed values. [`homops::oracle`] runs the same operations through a
//! full decompress/operate/recompress cycle for comparison.

// the worked example multiplies by 3.14
#![cfg_attr(test, allow(clippy::approx_constant))]

pub mod bitpack;
pub mod codec;
pub mod distsim;
pub mod error;
pub mod homops;
pub mod model;
pub mod synth;

pub use codec::{compress, decode_to_quant, decompress, encode_from_quant, ErrorBound, RawArray};
pub use error::{Error, Result};
pub use model::{deserialize, serialize, BlockView, CompressedStream, DType, OpReport, QuantArray, QuantParams};
