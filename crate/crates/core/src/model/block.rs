use crate::bitpack::bit_width;
use crate::error::{Error, Result};

/// Decoded working set of one block: outlier plus sign/magnitude residuals.
///
/// `residual_mags[0]` is always zero because the first bin is carried by
/// `outlier`. Sign bits attached to zero magnitudes are allowed to be set
/// (a negated block keeps its payload but has every sign flipped).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockView {
    pub outlier: i64,
    pub residual_mags: Vec<u64>,
    pub signs: Vec<bool>,
    pub is_constant: bool,
    pub width: u8,
}

impl BlockView {
    /// Builds a canonical view from signed residuals (`residuals[0]` must be 0).
    /// Zero residuals always get a clear sign bit.
    pub fn from_signed(outlier: i64, residuals: &[i128]) -> Result<Self> {
        if residuals.first().is_some_and(|&r| r != 0) {
            return Err(Error::GeometryMismatch("first residual of a block must be zero".into()));
        }
        let mut residual_mags = Vec::with_capacity(residuals.len());
        let mut signs = Vec::with_capacity(residuals.len());
        let mut or = 0u64;
        for &r in residuals {
            let mag = u64::try_from(r.unsigned_abs()).map_err(|_| Error::QuantOverflow)?;
            or |= mag;
            residual_mags.push(mag);
            signs.push(r < 0);
        }
        let width = bit_width(or);
        Ok(Self { outlier, residual_mags, signs, is_constant: width == 0, width })
    }

    /// A block of `len` copies of `outlier`.
    pub fn constant(outlier: i64, len: usize) -> Self {
        Self { outlier, residual_mags: vec![0; len], signs: vec![false; len], is_constant: true, width: 0 }
    }

    pub fn len(&self) -> usize {
        self.residual_mags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residual_mags.is_empty()
    }

    /// Signed residual at `i`.
    #[inline]
    pub fn residual(&self, i: usize) -> i128 {
        let m = self.residual_mags[i] as i128;
        if self.signs[i] {
            -m
        } else {
            m
        }
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.signs.len() != self.residual_mags.len() {
            return Err(Error::GeometryMismatch("sign and magnitude lengths differ".into()));
        }
        if self.residual_mags.first().is_some_and(|&m| m != 0) {
            return Err(Error::GeometryMismatch("first residual magnitude must be zero".into()));
        }
        let w = bit_width(self.residual_mags.iter().fold(0, |a, &m| a | m));
        if w != self.width {
            return Err(Error::GeometryMismatch(format!("width {} but residuals need {w}", self.width)));
        }
        if self.is_constant != (w == 0) {
            return Err(Error::GeometryMismatch("constancy flag disagrees with width".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_signed_example_residuals() {
        let b = BlockView::from_signed(-1, &[0, 0, -2, 0]).unwrap();
        assert_eq!(b.residual_mags, vec![0, 0, 2, 0]);
        assert_eq!(b.signs, vec![false, false, true, false]);
        assert_eq!(b.width, 2);
        assert!(!b.is_constant);
        b.validate().unwrap();
    }

    #[test]
    fn constant_block() {
        let b = BlockView::constant(5, 4);
        assert!(b.is_constant);
        assert_eq!(b.width, 0);
        b.validate().unwrap();
        assert_eq!(BlockView::from_signed(5, &[0, 0, 0, 0]).unwrap(), b);
    }

    #[test]
    fn rejects_nonzero_leading_residual() {
        assert!(BlockView::from_signed(0, &[1, 0]).is_err());
    }

    #[test]
    fn validate_catches_bad_width() {
        let mut b = BlockView::from_signed(0, &[0, 3]).unwrap();
        b.width = 3;
        assert!(b.validate().is_err());
    }
}
