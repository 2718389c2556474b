//! Shared data model: parameters, quantized arrays, block views and the
//! compressed stream with its serialized form.

mod block;
pub mod format;
mod params;
mod quant;
mod report;
mod stream;

pub use block::BlockView;
pub use format::{deserialize, serialize};
pub use params::{parse_dims, DType, QuantParams, DEFAULT_BLOCK_LEN};
pub(crate) use quant::bin_from_i128;
pub use quant::{QuantArray, MAX_BIN};
pub use report::OpReport;
pub(crate) use stream::EncodedRun;
pub use stream::{CompressedStream, FIXED_BYTES_PER_BLOCK};
