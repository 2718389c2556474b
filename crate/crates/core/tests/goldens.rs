//! Byte-level goldens produced by the independent reference encoder in
//! `tools/golden_oracle.py`.

#![allow(clippy::approx_constant)]

use hoszp::homops::{block_means, mean, scalar_add, scalar_mul, stddev, variance};
use hoszp::{compress, decode_to_quant, decompress, deserialize, serialize, DType, QuantParams, RawArray};

fn hex(s: &str) -> Vec<u8> {
    (0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap()).collect()
}

struct Golden {
    values: Vec<f64>,
    dims: Vec<usize>,
    eps: f64,
    block_len: usize,
    dtype: DType,
    bins: Vec<i64>,
    stream: &'static str,
    mean: f64,
    variance: f64,
}

fn goldens() -> Vec<Golden> {
    vec![
        Golden {
            values: vec![-0.025, -0.025, -0.051, -0.052],
            dims: vec![2, 2],
            eps: 0.01,
            block_len: 4,
            dtype: DType::F64,
            bins: vec![-1, -1, -3, -3],
            stream: "48535a50010001007b14ae47e17a843f04000000020000000400000000000000020000000000000002000000\
                     0000000002ffffffff2008",
            mean: -0.04,
            variance: 0.0004,
        },
        Golden {
            values: (0..15).map(|i| 0.1 * i as f64 - 0.7).collect(),
            dims: vec![3, 5],
            eps: 0.05,
            block_len: 4,
            dtype: DType::F32,
            bins: (-7..=7).collect(),
            stream: "48535a50010000009a9999999999a93f04000000020000000f000000000000000300000000000000050000000000\
                     000001010101f9fffffffdffffff01000000050000000000000070707060",
            mean: 0.0,
            variance: 0.18666666666666668,
        },
        Golden {
            values: vec![1.0, 1.0, 1.0, 1.0, 3.3, -2.2, 0.004, 9.75, 9.75, -0.5],
            dims: vec![10],
            eps: 0.125,
            block_len: 4,
            dtype: DType::F64,
            bins: vec![4, 4, 4, 4, 13, -9, 0, 39, 39, -2],
            stream: "48535a5001000100000000000000c03f04000000010000000a000000000000000a00000000000000000606040000\
                     000d0000002700000040400162670290",
            mean: 2.4,
            variance: 15.24,
        },
    ]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn streams_match_reference_encoder() {
    for g in goldens() {
        let raw = RawArray::new(g.values.clone(), g.dims.clone(), g.dtype).unwrap();
        let p = QuantParams::new(g.eps, g.dims.clone(), g.block_len, g.dtype).unwrap();
        let s = compress(&raw, &p).unwrap();
        let expected = hex(&g.stream.replace(' ', ""));
        assert_eq!(serialize(&s).unwrap(), expected);
        assert_eq!(deserialize(&expected).unwrap(), s);
        assert_eq!(decode_to_quant(&s).unwrap().bins(), &g.bins[..]);
    }
}

#[test]
fn statistics_match_exact_rationals() {
    for g in goldens() {
        let s = deserialize(&hex(&g.stream.replace(' ', ""))).unwrap();
        assert!(close(mean(&s).unwrap(), g.mean), "mean {} vs {}", mean(&s).unwrap(), g.mean);
        assert!(close(variance(&s).unwrap(), g.variance), "var {} vs {}", variance(&s).unwrap(), g.variance);
        assert!(close(stddev(&s).unwrap(), g.variance.sqrt()));
    }
}

#[test]
fn worked_example_operations() {
    let s = deserialize(&hex(&goldens()[0].stream.replace(' ', ""))).unwrap();
    assert_eq!(mean(&s).unwrap(), -0.04);
    assert_eq!(block_means(&s).unwrap(), vec![-0.04]);
    assert_eq!(decompress(&s).unwrap().values(), &[-0.02, -0.02, -0.06, -0.06]);
    let added = scalar_add(&s, 0.67).unwrap();
    assert_eq!(added.outliers(), &[32]);
    assert_eq!(decode_to_quant(&added).unwrap().bins(), &[32, 32, 30, 30]);
    let scaled = scalar_mul(&s, 3.14).unwrap();
    assert_eq!(decode_to_quant(&scaled).unwrap().bins(), &[-3, -3, -9, -9]);
    // width 3, signs 0010...., magnitudes 000 000 110 000
    assert_eq!(scaled.widths(), &[3]);
    assert_eq!(scaled.sign_section(), &[0x20]);
    assert_eq!(scaled.payload_section(), &[0x03, 0x00]);
}
