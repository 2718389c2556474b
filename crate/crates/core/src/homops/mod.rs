//! Operations on compressed streams.
//!
//! Each operation works in the shallowest representation that suffices:
//! negation and scalar shifts touch only signs and outliers, element-wise
//! add/sub work on outliers and signed residuals, and products and reductions
//! work on bins. None of them reconstruct values from their inputs except
//! where a product needs them for rounding back onto the bin grid.

mod elementwise;
pub mod oracle;
mod reduce;
mod scalar;

pub use elementwise::{elementwise_add, elementwise_sub, elementwise_sum, hadamard};
pub use oracle::{homomorphic_apply, oracle_apply, Op, Outcome};
pub use reduce::{
    block_means, covariance, covariance_with, cross_moments, mean, mean_with, moments, ssim_global, ssim_global_with,
    stddev, variance, variance_with, CrossMoments, Moments, Shortcut, Wide,
};
pub use scalar::{negate, scalar_add, scalar_mul, scalar_sub, ScalarBin};
