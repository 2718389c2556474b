#![allow(dead_code)]

use hoszp::synth::{random_field, smooth_field};
use hoszp::{compress, CompressedStream, DType, QuantParams, RawArray};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const EPS_CHOICES: [f64; 6] = [1e-1, 3e-2, 1e-2, 1e-3, 2.5e-4, 1e-4];

pub fn random_params(rng: &mut ChaCha8Rng) -> QuantParams {
    let ndims = rng.random_range(1..=3);
    let dims: Vec<usize> = match ndims {
        1 => vec![rng.random_range(1..3000)],
        2 => vec![rng.random_range(1..60), rng.random_range(1..60)],
        _ => vec![rng.random_range(1..16), rng.random_range(1..16), rng.random_range(1..16)],
    };
    let eps = *EPS_CHOICES.choose(rng).unwrap();
    let block_len = *[1, 3, 8, 16, 32, 32, 33, 64, 256].choose(rng).unwrap();
    let dtype = if rng.random_bool(0.5) { DType::F32 } else { DType::F64 };
    QuantParams::new(eps, dims, block_len, dtype).unwrap()
}

/// Mix of smooth, noisy and piecewise-constant content so that streams carry
/// both constant and varying blocks.
pub fn random_raw(rng: &mut ChaCha8Rng, p: &QuantParams) -> RawArray {
    let seed = rng.random();
    let amp = rng.random_range(0.5..50.0);
    let smooth = smooth_field(p.dims(), p.dtype(), seed).unwrap();
    let noise = random_field(p.dims(), p.dtype(), amp * 0.05, seed ^ 1).unwrap();
    let mut level = 0.0;
    let values = smooth
        .values()
        .iter()
        .zip(noise.values())
        .enumerate()
        .map(|(i, (s, n))| {
            if i % 97 == 0 {
                level = rng.random_range(-amp..amp);
            }
            match (i / 97) % 3 {
                0 => amp * s,
                1 => amp * s + n,
                _ => level,
            }
        })
        .collect();
    RawArray::new(values, p.dims().to_vec(), p.dtype()).unwrap()
}

pub fn random_stream(rng: &mut ChaCha8Rng, p: &QuantParams) -> CompressedStream {
    compress(&random_raw(rng, p), p).unwrap()
}

/// Arbitrary scalar including values small enough to quantize to zero.
pub fn random_scalar(rng: &mut ChaCha8Rng, eps: f64) -> f64 {
    match rng.random_range(0..4) {
        0 => rng.random_range(-2.0 * eps..2.0 * eps),
        _ => rng.random_range(-10.0..10.0),
    }
}
