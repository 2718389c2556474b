//! Operation descriptors and the decompress/operate/recompress reference path.

use std::fmt;

use crate::codec::{compress, decompress, encode_from_quant, reconstruct, requantize_nearest_all, RawArray};
use crate::error::{Error, Result};
use crate::model::{CompressedStream, QuantArray, QuantParams};

use super::{
    covariance, elementwise_add, elementwise_sub, hadamard, mean, negate, reduce::ssim_formula, scalar_add, scalar_mul,
    scalar_sub, ssim_global, stddev, variance, ScalarBin,
};

/// One supported operation, with its scalar operand where it takes one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Negate,
    ScalarAdd(f64),
    ScalarSub(f64),
    ScalarMul(f64),
    Add,
    Sub,
    Hadamard,
    Mean,
    Variance,
    Stddev,
    Covariance,
    Ssim,
}

impl Op {
    /// Accepted names, canonical first within each group.
    pub const NAMES: &'static [&'static str] =
        &["neg", "sadd", "ssub", "smul", "add", "sub", "mul", "mean", "var", "std", "cov", "ssim"];

    /// Parses an operation name; scalar ops require `scalar`.
    pub fn parse(name: &str, scalar: Option<f64>) -> Result<Op> {
        let need = |f: fn(f64) -> Op| {
            scalar.map(f).ok_or_else(|| Error::InvalidParams(format!("operation `{name}` needs a scalar")))
        };
        Ok(match name {
            "neg" | "negate" => Op::Negate,
            "sadd" | "scalar_add" => need(Op::ScalarAdd)?,
            "ssub" | "scalar_sub" => need(Op::ScalarSub)?,
            "smul" | "scalar_mul" => need(Op::ScalarMul)?,
            "add" => Op::Add,
            "sub" => Op::Sub,
            "mul" | "hadamard" => Op::Hadamard,
            "mean" => Op::Mean,
            "var" | "variance" => Op::Variance,
            "std" | "stddev" => Op::Stddev,
            "cov" | "covariance" => Op::Covariance,
            "ssim" => Op::Ssim,
            _ => return Err(Error::InvalidParams(format!("unknown operation `{name}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Op::Negate => "neg",
            Op::ScalarAdd(_) => "sadd",
            Op::ScalarSub(_) => "ssub",
            Op::ScalarMul(_) => "smul",
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Hadamard => "mul",
            Op::Mean => "mean",
            Op::Variance => "var",
            Op::Stddev => "std",
            Op::Covariance => "cov",
            Op::Ssim => "ssim",
        }
    }

    /// Number of stream operands.
    pub fn arity(&self) -> usize {
        match self {
            Op::Add | Op::Sub | Op::Hadamard | Op::Covariance | Op::Ssim => 2,
            _ => 1,
        }
    }

    /// True for operations that return a stream rather than a number.
    pub fn is_compression_as_output(&self) -> bool {
        !matches!(self, Op::Mean | Op::Variance | Op::Stddev | Op::Covariance | Op::Ssim)
    }

    pub fn scalar(&self) -> Option<f64> {
        match *self {
            Op::ScalarAdd(s) | Op::ScalarSub(s) | Op::ScalarMul(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scalar() {
            Some(s) => write!(f, "{}({s})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

/// Result of applying an operation.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Stream(CompressedStream),
    Value(f64),
}

impl Outcome {
    pub fn stream(&self) -> Option<&CompressedStream> {
        match self {
            Outcome::Stream(s) => Some(s),
            Outcome::Value(_) => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Outcome::Value(v) => Some(*v),
            Outcome::Stream(_) => None,
        }
    }
}

fn operands<'a>(op: Op, ops: &[&'a CompressedStream]) -> Result<(&'a CompressedStream, Option<&'a CompressedStream>)> {
    if ops.len() != op.arity() {
        return Err(Error::InvalidParams(format!(
            "operation `{}` takes {} operand(s), got {}",
            op.name(),
            op.arity(),
            ops.len()
        )));
    }
    Ok((ops[0], ops.get(1).copied()))
}

/// Applies `op` directly to compressed operands.
pub fn homomorphic_apply(op: Op, ops: &[&CompressedStream]) -> Result<Outcome> {
    let (a, b) = operands(op, ops)?;
    let b = || b.expect("arity checked");
    Ok(match op {
        Op::Negate => Outcome::Stream(negate(a)),
        Op::ScalarAdd(s) => Outcome::Stream(scalar_add(a, s)?),
        Op::ScalarSub(s) => Outcome::Stream(scalar_sub(a, s)?),
        Op::ScalarMul(s) => Outcome::Stream(scalar_mul(a, s)?),
        Op::Add => Outcome::Stream(elementwise_add(a, b())?),
        Op::Sub => Outcome::Stream(elementwise_sub(a, b())?),
        Op::Hadamard => Outcome::Stream(hadamard(a, b())?),
        Op::Mean => Outcome::Value(mean(a)?),
        Op::Variance => Outcome::Value(variance(a)?),
        Op::Stddev => Outcome::Value(stddev(a)?),
        Op::Covariance => Outcome::Value(covariance(a, b())?),
        Op::Ssim => Outcome::Value(ssim_global(a, b())?),
    })
}

/// Compensated (Neumaier) sum.
fn sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    s + c
}

fn mean_of(x: &[f64]) -> f64 {
    sum(x.iter().copied()) / x.len() as f64
}

fn cov_of(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean_of(x), mean_of(y));
    sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my))) / x.len() as f64
}

fn range_of(x: &RawArray) -> f64 {
    let (lo, hi) = x.min_max();
    hi - lo
}

fn recompress(values: Vec<f64>, params: &QuantParams) -> Result<CompressedStream> {
    compress(&RawArray::new(values, params.dims().to_vec(), params.dtype())?, params)
}

fn requantize(values: Vec<f64>, params: &QuantParams) -> Result<CompressedStream> {
    let bins = requantize_nearest_all(&values, params)?;
    encode_from_quant(&QuantArray::new(bins, params.clone())?)
}

/// Reference path: fully decompress every operand, apply `op` to values, and
/// recompress stream results.
///
/// Scalars enter as their quantized value `2·eps·bin(s)`. Products are brought
/// back onto the bin grid with the same nearest rounding the compressed-domain
/// operations use.
pub fn oracle_apply(op: Op, ops: &[&CompressedStream]) -> Result<Outcome> {
    let (a, b) = operands(op, ops)?;
    let p = a.params();
    if let Some(b) = b {
        p.ensure_compatible(b.params())?;
    }
    let xa = decompress(a)?;
    let xb = b.map(decompress).transpose()?;
    let x = xa.values();
    let y = || xb.as_ref().expect("arity checked").values();
    let quantized =
        |s: f64| -> Result<f64> { Ok(reconstruct(ScalarBin::new(s, p.eps())?.bin, p.bin_width(), p.dtype())) };
    let zip = |f: fn(f64, f64) -> f64| x.iter().zip(y()).map(|(&u, &v)| f(u, v)).collect::<Vec<_>>();
    Ok(match op {
        Op::Negate => Outcome::Stream(recompress(x.iter().map(|v| -v).collect(), p)?),
        Op::ScalarAdd(s) => {
            let s = quantized(s)?;
            Outcome::Stream(recompress(x.iter().map(|v| v + s).collect(), p)?)
        }
        Op::ScalarSub(s) => {
            let s = quantized(s)?;
            Outcome::Stream(recompress(x.iter().map(|v| v - s).collect(), p)?)
        }
        Op::ScalarMul(s) => {
            let s = quantized(s)?;
            Outcome::Stream(requantize(x.iter().map(|v| v * s).collect(), p)?)
        }
        Op::Add => Outcome::Stream(recompress(zip(|u, v| u + v), p)?),
        Op::Sub => Outcome::Stream(recompress(zip(|u, v| u - v), p)?),
        Op::Hadamard => Outcome::Stream(requantize(zip(|u, v| u * v), p)?),
        Op::Mean => Outcome::Value(mean_of(x)),
        Op::Variance => Outcome::Value(cov_of(x, x)),
        Op::Stddev => Outcome::Value(cov_of(x, x).sqrt()),
        Op::Covariance => Outcome::Value(cov_of(x, y())),
        Op::Ssim => {
            let range = range_of(&xa).max(range_of(xb.as_ref().expect("arity checked")));
            let v = ssim_formula(mean_of(x), mean_of(y()), cov_of(x, x), cov_of(y(), y()), cov_of(x, y()), range)?;
            Outcome::Value(v)
        }
    })
}

/// `|a − b| / max(|a|, |b|, scale)`; `scale` keeps values near zero from
/// inflating the ratio.
pub fn relative_difference(a: f64, b: f64, scale: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        return 0.0;
    }
    d / a.abs().max(b.abs()).max(scale)
}

/// Natural magnitude of `op`'s result on operands with value range `range`,
/// used as the floor of the relative-difference denominator.
pub fn reduction_scale(op: Op, range: f64) -> f64 {
    match op {
        Op::Variance | Op::Covariance => range * range,
        Op::Ssim => 1.0,
        _ => range,
    }
    .max(f64::MIN_POSITIVE)
}

/// Largest element-wise difference between the decompressed results, or the
/// absolute difference of scalar results.
pub fn outcome_difference(x: &Outcome, y: &Outcome) -> Result<f64> {
    match (x, y) {
        (Outcome::Stream(s), Outcome::Stream(t)) => Ok(decompress(s)?.max_abs_diff(&decompress(t)?)),
        (Outcome::Value(u), Outcome::Value(v)) => Ok((u - v).abs()),
        _ => Err(Error::InvalidParams("outcomes of different kinds".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DType;

    fn example_stream() -> CompressedStream {
        let raw = RawArray::new(vec![-0.025, -0.025, -0.051, -0.052], vec![4], DType::F64).unwrap();
        compress(&raw, &QuantParams::new(0.01, vec![4], 4, DType::F64).unwrap()).unwrap()
    }

    #[test]
    fn parse_names() {
        for &n in Op::NAMES {
            let op = Op::parse(n, Some(1.0)).unwrap();
            assert_eq!(op.name(), n);
        }
        assert!(Op::parse("sadd", None).is_err());
        assert!(Op::parse("bogus", None).is_err());
        assert_eq!(Op::parse("hadamard", None).unwrap(), Op::Hadamard);
        assert_eq!(Op::ScalarAdd(0.5).to_string(), "sadd(0.5)");
    }

    #[test]
    fn oracle_agrees_on_example_stream() {
        let c = example_stream();
        for op in [Op::Negate, Op::ScalarAdd(0.67), Op::ScalarSub(0.67), Op::ScalarMul(3.14)] {
            let h = homomorphic_apply(op, &[&c]).unwrap();
            let o = oracle_apply(op, &[&c]).unwrap();
            assert_eq!(outcome_difference(&h, &o).unwrap(), 0.0, "{op}");
        }
        for op in [Op::Add, Op::Sub, Op::Hadamard] {
            let h = homomorphic_apply(op, &[&c, &c]).unwrap();
            let o = oracle_apply(op, &[&c, &c]).unwrap();
            assert_eq!(decompress(h.stream().unwrap()).unwrap(), decompress(o.stream().unwrap()).unwrap());
        }
        let m = oracle_apply(Op::Mean, &[&c]).unwrap().value().unwrap();
        assert!((m - -0.04).abs() <= 1e-12 * 0.04);
        let v = oracle_apply(Op::Variance, &[&c]).unwrap().value().unwrap();
        assert!(relative_difference(v, 4e-4, 0.0) < 1e-12);
        let s = oracle_apply(Op::Ssim, &[&c, &c]).unwrap().value().unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn arity_checked() {
        let c = example_stream();
        assert!(homomorphic_apply(Op::Add, &[&c]).is_err());
        assert!(oracle_apply(Op::Mean, &[&c, &c]).is_err());
    }

    #[test]
    fn relative_difference_floor() {
        assert_eq!(relative_difference(1.0, 1.0, 0.0), 0.0);
        assert_eq!(relative_difference(1e-20, 0.0, 1.0), 1e-20);
        assert_eq!(relative_difference(2.0, 1.0, 0.0), 0.5);
    }
}
