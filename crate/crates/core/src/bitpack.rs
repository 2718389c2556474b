//! Fixed-width, MSB-first bit packing.
//!
//! Every field is written most-significant bit first and fields are
//! concatenated without gaps. A packed run is padded with zero bits to the
//! next byte boundary.

/// Number of bits needed to represent `v` (0 for `v == 0`).
#[inline]
pub fn bit_width(v: u64) -> u8 {
    (64 - v.leading_zeros()) as u8
}

/// Bytes occupied by `count` fields of `width` bits.
#[inline]
pub fn packed_len(count: usize, width: u8) -> usize {
    (count * width as usize).div_ceil(8)
}

/// Bytes occupied by a sign plane of `count` bits.
#[inline]
pub fn sign_plane_len(count: usize) -> usize {
    count.div_ceil(8)
}

/// Accumulating MSB-first writer.
pub struct BitWriter<'a> {
    out: &'a mut Vec<u8>,
    acc: u128,
    nbits: u32,
}

impl<'a> BitWriter<'a> {
    pub fn new(out: &'a mut Vec<u8>) -> Self {
        Self { out, acc: 0, nbits: 0 }
    }

    /// Appends the low `width` bits of `value`; `width` is at most 64.
    #[inline]
    pub fn write(&mut self, value: u64, width: u8) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value >> width == 0);
        if width == 0 {
            return;
        }
        self.acc = (self.acc << width) | value as u128;
        self.nbits += width as u32;
        while self.nbits >= 8 {
            self.nbits -= 8;
            self.out.push((self.acc >> self.nbits) as u8);
        }
        self.acc &= (1u128 << self.nbits) - 1;
    }

    /// Flushes the partial byte, zero padded.
    pub fn finish(self) {
        if self.nbits > 0 {
            self.out.push((self.acc << (8 - self.nbits)) as u8);
        }
    }
}

/// MSB-first reader over a byte slice. Reads past the end yield zero bits.
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    acc: u128,
    nbits: u32,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0, acc: 0, nbits: 0 }
    }

    #[inline]
    pub fn read(&mut self, width: u8) -> u64 {
        if width == 0 {
            return 0;
        }
        let width = width as u32;
        while self.nbits < width {
            let byte = self.bytes.get(self.pos).copied().unwrap_or(0);
            self.pos += 1;
            self.acc = (self.acc << 8) | byte as u128;
            self.nbits += 8;
        }
        self.nbits -= width;
        let v = (self.acc >> self.nbits) as u64;
        self.acc &= (1u128 << self.nbits) - 1;
        if width == 64 {
            v
        } else {
            v & ((1u64 << width) - 1)
        }
    }
}

/// Field `index` of a run packed at `width` bits. Bits past the end of
/// `bytes` read as zero.
#[inline]
pub fn get_field(bytes: &[u8], index: usize, width: u8) -> u64 {
    if width == 0 {
        return 0;
    }
    let bit = index * width as usize;
    let (start, shift) = (bit >> 3, (bit & 7) as u32);
    if width as u32 + shift > 64 {
        let mut r = BitReader::new(bytes.get(start..).unwrap_or(&[]));
        r.read(shift as u8);
        return r.read(width);
    }
    let word = match bytes.get(start..start + 8) {
        Some(b) => u64::from_be_bytes(b.try_into().expect("8 bytes")),
        None => {
            let mut buf = [0u8; 8];
            let tail = bytes.get(start..).unwrap_or(&[]);
            buf[..tail.len()].copy_from_slice(tail);
            u64::from_be_bytes(buf)
        }
    };
    (word << shift) >> (64 - width as u32)
}

/// Packs `values` at `width` bits each, appending a byte-padded run to `out`.
pub fn pack(values: &[u64], width: u8, out: &mut Vec<u8>) {
    if width == 0 {
        return;
    }
    out.reserve(packed_len(values.len(), width));
    let mut w = BitWriter::new(out);
    for &v in values {
        w.write(v, width);
    }
    w.finish();
}

/// Inverse of [`pack`]: fills `out` with `out.len()` fields.
pub fn unpack(bytes: &[u8], width: u8, out: &mut [u64]) {
    if width == 0 {
        out.fill(0);
        return;
    }
    let mut r = BitReader::new(bytes);
    for v in out.iter_mut() {
        *v = r.read(width);
    }
}

/// Packs one bit per element (1 = negative), MSB-first, byte padded.
pub fn pack_signs<I: IntoIterator<Item = bool>>(signs: I, out: &mut Vec<u8>) {
    let mut cur = 0u8;
    let mut n = 0u32;
    for s in signs {
        cur |= (s as u8) << (7 - n);
        n += 1;
        if n == 8 {
            out.push(cur);
            cur = 0;
            n = 0;
        }
    }
    if n > 0 {
        out.push(cur);
    }
}

#[inline]
pub fn sign_bit(plane: &[u8], i: usize) -> bool {
    (plane[i >> 3] >> (7 - (i & 7))) & 1 == 1
}

/// Mask of the bits of the final plane byte that belong to real elements.
#[inline]
pub fn last_byte_mask(count: usize) -> u8 {
    match count % 8 {
        0 => 0xFF,
        r => 0xFFu8 << (8 - r),
    }
}
