//! Deterministic synthetic fields for tests, benchmarks and the simulator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codec::RawArray;
use crate::error::Result;
use crate::model::DType;

/// Row-major strides for `dims`.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Smooth field: a sum of one low-frequency sinusoid per axis, amplitude ≤ 1
/// overall. `seed` shifts phases and frequencies.
pub fn smooth_field(dims: &[usize], dtype: DType, seed: u64) -> Result<RawArray> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = dims.len() as f64;
    let tables: Vec<Vec<f64>> = dims
        .iter()
        .map(|&n| {
            let freq = rng.random_range(0.5..3.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            (0..n).map(|i| (std::f64::consts::TAU * freq * i as f64 / n as f64 + phase).sin() / d).collect()
        })
        .collect();
    let st = strides(dims);
    let n: usize = dims.iter().product();
    let values = (0..n)
        .into_par_iter()
        .map(|idx| {
            let mut v = 0.0;
            for (k, t) in tables.iter().enumerate() {
                v += t[(idx / st[k]) % dims[k]];
            }
            v
        })
        .collect();
    RawArray::new(values, dims.to_vec(), dtype)
}

/// Independent uniform values in `[-amplitude, amplitude)`.
pub fn random_field(dims: &[usize], dtype: DType, amplitude: f64, seed: u64) -> Result<RawArray> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = dims.iter().product();
    let values = (0..n).map(|_| rng.random_range(-amplitude..amplitude)).collect();
    RawArray::new(values, dims.to_vec(), dtype)
}

/// Every element equal to `value`.
pub fn uniform_field(dims: &[usize], dtype: DType, value: f64) -> Result<RawArray> {
    RawArray::new(vec![value; dims.iter().product()], dims.to_vec(), dtype)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = smooth_field(&[8, 9, 10], DType::F32, 3).unwrap();
        assert_eq!(a, smooth_field(&[8, 9, 10], DType::F32, 3).unwrap());
        assert_ne!(a, smooth_field(&[8, 9, 10], DType::F32, 4).unwrap());
        let r = random_field(&[100], DType::F64, 2.0, 1).unwrap();
        assert_eq!(r, random_field(&[100], DType::F64, 2.0, 1).unwrap());
        assert!(r.values().iter().all(|v| v.abs() <= 2.0));
    }

    #[test]
    fn smooth_is_bounded_and_smooth() {
        let a = smooth_field(&[64, 64], DType::F64, 0).unwrap();
        assert!(a.values().iter().all(|v| v.abs() <= 1.0));
        let max_step = a.values().windows(2).step_by(64).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        assert!(max_step < 0.2);
    }

    #[test]
    fn strides_row_major() {
        assert_eq!(strides(&[2, 3, 4]), vec![12, 4, 1]);
        assert_eq!(strides(&[5]), vec![1]);
    }
}
