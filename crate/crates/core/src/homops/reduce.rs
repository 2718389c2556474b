//! Computation-as-output reductions over bins.
//!
//! All sums are exact integers; only the final scaling by `2·eps` and the
//! division by `N` are done in floating point.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::codec::kernel::{decode_bins, par_block_chunks};
use crate::codec::reconstruct;
use crate::error::{Error, Result};
use crate::model::CompressedStream;

/// Exact integer accumulator: `i128` until it would overflow, then `BigInt`.
/// Equality compares values, not representations.
#[derive(Debug, Clone)]
pub enum Wide {
    Small(i128),
    Big(BigInt),
}

impl Default for Wide {
    fn default() -> Self {
        Wide::Small(0)
    }
}

impl PartialEq for Wide {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Wide::Small(a), Wide::Small(b)) => a == b,
            _ => self.to_big() == other.to_big(),
        }
    }
}

impl Eq for Wide {}

impl From<i128> for Wide {
    fn from(v: i128) -> Self {
        Wide::Small(v)
    }
}

impl Wide {
    fn from_big(b: BigInt) -> Self {
        match b.to_i128() {
            Some(v) => Wide::Small(v),
            None => Wide::Big(b),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match self {
            Wide::Small(v) => BigInt::from(*v),
            Wide::Big(b) => b.clone(),
        }
    }

    #[inline]
    pub fn add(&mut self, v: i128) {
        match self {
            Wide::Small(s) => match s.checked_add(v) {
                Some(t) => *s = t,
                None => *self = Wide::Big(BigInt::from(*s) + v),
            },
            Wide::Big(b) => *b += v,
        }
    }

    pub fn merge(&mut self, other: &Wide) {
        match other {
            Wide::Small(v) => self.add(*v),
            Wide::Big(b) => *self = Wide::from_big(self.to_big() + b),
        }
    }

    pub fn mul(&self, other: &Wide) -> Wide {
        if let (Wide::Small(a), Wide::Small(b)) = (self, other) {
            if let Some(v) = a.checked_mul(*b) {
                return Wide::Small(v);
            }
        }
        Wide::from_big(self.to_big() * other.to_big())
    }

    pub fn sub(&self, other: &Wide) -> Wide {
        if let (Wide::Small(a), Wide::Small(b)) = (self, other) {
            if let Some(v) = a.checked_sub(*b) {
                return Wide::Small(v);
            }
        }
        Wide::from_big(self.to_big() - other.to_big())
    }

    /// `self / den` rounded to `f64`, splitting off the integer quotient first
    /// so that large sums keep their fractional part.
    pub fn ratio(&self, den: u64) -> f64 {
        match self {
            Wide::Small(v) => {
                let d = den as i128;
                (v / d) as f64 + (v % d) as f64 / den as f64
            }
            Wide::Big(b) => {
                let d = BigInt::from(den);
                let (q, r) = (b / &d, b % &d);
                q.to_f64().unwrap_or(f64::NAN) + r.to_f64().unwrap_or(f64::NAN) / den as f64
            }
        }
    }
}

/// Integer moments of one stream's bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Moments {
    pub count: u64,
    pub sum: Wide,
    pub sum_sq: Wide,
    pub min_bin: i64,
    pub max_bin: i64,
}

impl Default for Moments {
    fn default() -> Self {
        Self { count: 0, sum: Wide::default(), sum_sq: Wide::default(), min_bin: i64::MAX, max_bin: i64::MIN }
    }
}

impl Moments {
    #[inline]
    fn push(&mut self, b: i64) {
        let v = b as i128;
        self.sum.add(v);
        self.sum_sq.add(v * v);
        self.min_bin = self.min_bin.min(b);
        self.max_bin = self.max_bin.max(b);
    }

    fn push_constant(&mut self, o: i64, len: usize) {
        let (v, n) = (o as i128, len as i128);
        self.sum.merge(&Wide::Small(v).mul(&Wide::Small(n)));
        self.sum_sq.merge(&Wide::Small(v * v).mul(&Wide::Small(n)));
        self.min_bin = self.min_bin.min(o);
        self.max_bin = self.max_bin.max(o);
    }

    fn merge(&mut self, o: &Moments) {
        self.count += o.count;
        self.sum.merge(&o.sum);
        self.sum_sq.merge(&o.sum_sq);
        self.min_bin = self.min_bin.min(o.min_bin);
        self.max_bin = self.max_bin.max(o.max_bin);
    }

    /// Mean bin `Σρ / N`.
    pub fn mean_bin(&self) -> f64 {
        self.sum.ratio(self.count)
    }

    /// `N·Σρ² − (Σρ)²`.
    fn central_numerator(&self) -> Wide {
        self.sum_sq.mul(&Wide::Small(self.count as i128)).sub(&self.sum.mul(&self.sum))
    }
}

/// Integer moments of a pair of streams, including the cross sum.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrossMoments {
    pub a: Moments,
    pub b: Moments,
    pub sum_ab: Wide,
}

/// Whether reductions treat constant blocks as `len` copies of the outlier
/// instead of decoding them. Both give identical sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shortcut {
    #[default]
    On,
    Off,
}

/// Integer moments of `c`, block-parallel, combined in block order.
pub fn moments(c: &CompressedStream, shortcut: Shortcut) -> Result<Moments> {
    let p = c.params();
    let parts = par_block_chunks(p, |blocks| {
        let mut m = Moments::default();
        let mut bins = vec![0i64; p.block_len()];
        for j in blocks {
            let n = p.block_range(j).len();
            m.count += n as u64;
            if shortcut == Shortcut::On && c.is_constant(j) {
                m.push_constant(c.outliers()[j], n);
                continue;
            }
            decode_bins(c, j, &mut bins[..n])?;
            bins[..n].iter().for_each(|&b| m.push(b));
        }
        Ok(m)
    })?;
    Ok(parts.iter().fold(Moments::default(), |mut acc, m| {
        acc.merge(m);
        acc
    }))
}

/// Moments of both streams and their cross sum.
pub fn cross_moments(a: &CompressedStream, b: &CompressedStream, shortcut: Shortcut) -> Result<CrossMoments> {
    a.params().ensure_compatible(b.params())?;
    let p = a.params();
    let parts = par_block_chunks(p, |blocks| {
        let mut m = CrossMoments::default();
        let mut ba = vec![0i64; p.block_len()];
        let mut bb = vec![0i64; p.block_len()];
        for j in blocks {
            let n = p.block_range(j).len();
            m.a.count += n as u64;
            m.b.count += n as u64;
            let (ca, cb) = (a.is_constant(j), b.is_constant(j));
            if shortcut == Shortcut::On && ca && cb {
                let (oa, ob) = (a.outliers()[j], b.outliers()[j]);
                m.a.push_constant(oa, n);
                m.b.push_constant(ob, n);
                m.sum_ab.merge(&Wide::Small(oa as i128 * ob as i128).mul(&Wide::Small(n as i128)));
                continue;
            }
            decode_bins(a, j, &mut ba[..n])?;
            decode_bins(b, j, &mut bb[..n])?;
            for (&x, &y) in ba[..n].iter().zip(&bb[..n]) {
                m.a.push(x);
                m.b.push(y);
                m.sum_ab.add(x as i128 * y as i128);
            }
        }
        Ok(m)
    })?;
    Ok(parts.iter().fold(CrossMoments::default(), |mut acc, m| {
        acc.a.merge(&m.a);
        acc.b.merge(&m.b);
        acc.sum_ab.merge(&m.sum_ab);
        acc
    }))
}

/// `(2·eps)² · (N·Σxy − Σx·Σy) / N²`; the shared formula keeps
/// `covariance(a, a)` identical to `variance(a)`.
fn scaled_central(numerator: &Wide, n: u64, bin_width: f64) -> f64 {
    numerator.ratio(n) / n as f64 * bin_width * bin_width
}

fn variance_of(m: &Moments, bin_width: f64) -> f64 {
    scaled_central(&m.central_numerator(), m.count, bin_width)
}

fn covariance_of(m: &CrossMoments, bin_width: f64) -> f64 {
    let num = m.sum_ab.mul(&Wide::Small(m.a.count as i128)).sub(&m.a.sum.mul(&m.b.sum));
    scaled_central(&num, m.a.count, bin_width)
}

/// Mean of the decompressed values.
pub fn mean(c: &CompressedStream) -> Result<f64> {
    mean_with(c, Shortcut::On)
}

pub fn mean_with(c: &CompressedStream, shortcut: Shortcut) -> Result<f64> {
    Ok(c.params().bin_width() * moments(c, shortcut)?.mean_bin())
}

/// Per-block means `2·eps·Σ_block ρ / len`, in block order.
pub fn block_means(c: &CompressedStream) -> Result<Vec<f64>> {
    let p = c.params();
    let w = p.bin_width();
    let parts = par_block_chunks(p, |blocks| {
        let mut bins = vec![0i64; p.block_len()];
        let mut out = Vec::with_capacity(blocks.len());
        for j in blocks {
            let n = p.block_range(j).len();
            if c.is_constant(j) {
                out.push(w * c.outliers()[j] as f64);
                continue;
            }
            decode_bins(c, j, &mut bins[..n])?;
            let s: i128 = bins[..n].iter().map(|&b| b as i128).sum();
            out.push(w * Wide::Small(s).ratio(n as u64));
        }
        Ok(out)
    })?;
    Ok(parts.concat())
}

/// Population variance of the decompressed values.
pub fn variance(c: &CompressedStream) -> Result<f64> {
    variance_with(c, Shortcut::On)
}

pub fn variance_with(c: &CompressedStream, shortcut: Shortcut) -> Result<f64> {
    Ok(variance_of(&moments(c, shortcut)?, c.params().bin_width()))
}

pub fn stddev(c: &CompressedStream) -> Result<f64> {
    Ok(variance(c)?.sqrt())
}

/// Population covariance of two streams with identical parameters.
pub fn covariance(a: &CompressedStream, b: &CompressedStream) -> Result<f64> {
    covariance_with(a, b, Shortcut::On)
}

pub fn covariance_with(a: &CompressedStream, b: &CompressedStream, shortcut: Shortcut) -> Result<f64> {
    Ok(covariance_of(&cross_moments(a, b, shortcut)?, a.params().bin_width()))
}

/// Global SSIM from the given means, variances, covariance and dynamic range.
pub fn ssim_formula(mu_a: f64, mu_b: f64, var_a: f64, var_b: f64, cov: f64, range: f64) -> Result<f64> {
    if range.is_nan() || range <= 0.0 {
        return Err(Error::DegenerateSsim);
    }
    let c1 = (0.01 * range).powi(2);
    let c2 = (0.03 * range).powi(2);
    Ok(((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)))
}

/// Single SSIM over the whole arrays; the dynamic range is the larger of the
/// two decompressed value ranges.
pub fn ssim_global(a: &CompressedStream, b: &CompressedStream) -> Result<f64> {
    ssim_global_with(a, b, Shortcut::On)
}

pub fn ssim_global_with(a: &CompressedStream, b: &CompressedStream, shortcut: Shortcut) -> Result<f64> {
    let m = cross_moments(a, b, shortcut)?;
    let p = a.params();
    let (w, dt) = (p.bin_width(), p.dtype());
    let range = |m: &Moments| reconstruct(m.max_bin, w, dt) - reconstruct(m.min_bin, w, dt);
    ssim_formula(
        w * m.a.mean_bin(),
        w * m.b.mean_bin(),
        variance_of(&m.a, w),
        variance_of(&m.b, w),
        covariance_of(&m, w),
        range(&m.a).max(range(&m.b)),
    )
}
