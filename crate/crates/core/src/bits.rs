//! Packed bit storage shared by bitmaps, rasters and masks.
//!
//! Bits are stored least-significant-bit first in 64-bit words; byte
//! serialization emits the words little-endian, so bit `i` always lands in
//! byte `i / 8` at bit position `i % 8`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PackedBits {
    words: Vec<u64>,
    len: usize,
}

impl PackedBits {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut bits = Self {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        bits.clear_tail();
        bits
    }

    /// Builds from raw words; bits past `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(64), 0);
        let mut bits = Self { words, len };
        bits.clear_tail();
        bits
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut out = Self::default();
        for b in iter {
            out.push(b);
        }
        out
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        if value {
            self.set(self.len - 1, true);
        }
    }

    /// Appends the first `len` bits of `other`.
    pub fn extend_from(&mut self, other: &PackedBits) {
        let shift = self.len % 64;
        if shift == 0 {
            self.words.truncate(self.len / 64);
            self.words.extend_from_slice(&other.words);
        } else {
            for &w in &other.words {
                *self.words.last_mut().expect("non-empty when shift > 0") |= w << shift;
                self.words.push(w >> (64 - shift));
            }
        }
        self.len += other.len;
        self.words.truncate(self.len.div_ceil(64));
        self.clear_tail();
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(n);
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() < len.div_ceil(8) {
            return Err(Error::format(
                "packed bits",
                format!("{} bytes cannot hold {len} bits", bytes.len()),
            ));
        }
        let words = bytes[..len.div_ceil(8)]
            .chunks(8)
            .map(|c| {
                let mut buf = [0u8; 8];
                buf[..c.len()].copy_from_slice(c);
                u64::from_le_bytes(buf)
            })
            .collect();
        Ok(Self::from_words(words, len))
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

/// A width×height binary image, row-major, 1 = white (prime / revealed).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryRaster {
    width: usize,
    height: usize,
    bits: PackedBits,
}

impl BinaryRaster {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: PackedBits::zeros(width * height),
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: PackedBits) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::format(
                "raster",
                format!("{} bits for a {width}x{height} raster", bits.len()),
            ));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = PackedBits::zeros(width * height);
        for row in 0..height {
            for col in 0..width {
                if f(col, row) {
                    bits.set(row * width + col, true);
                }
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits.get(row * self.width + col)
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, value: bool) {
        self.bits.set(row * self.width + col, value)
    }

    pub fn bits(&self) -> &PackedBits {
        &self.bits
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.count_ones()
    }

    pub(crate) fn check_shape(&self, other: (usize, usize)) -> Result<()> {
        if self.shape() != other {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                actual: other,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ones_clears_tail() {
        let b = PackedBits::ones(70);
        assert_eq!(b.count_ones(), 70);
        assert_eq!(b.words()[1], (1 << 6) - 1);
    }

    #[test]
    fn byte_order_is_lsb_first() {
        let mut b = PackedBits::zeros(16);
        b.set(0, true);
        b.set(9, true);
        assert_eq!(b.to_bytes(), vec![0b0000_0001, 0b0000_0010]);
    }

    proptest! {
        #[test]
        fn extend_matches_push(a in proptest::collection::vec(any::<bool>(), 0..200),
                               b in proptest::collection::vec(any::<bool>(), 0..200)) {
            let mut joined = PackedBits::from_bools(a.iter().copied());
            joined.extend_from(&PackedBits::from_bools(b.iter().copied()));
            let expected = PackedBits::from_bools(a.iter().chain(b.iter()).copied());
            prop_assert_eq!(joined, expected);
        }

        #[test]
        fn bytes_roundtrip(v in proptest::collection::vec(any::<bool>(), 0..300)) {
            let bits = PackedBits::from_bools(v.iter().copied());
            let back = PackedBits::from_bytes(&bits.to_bytes(), v.len()).unwrap();
            prop_assert_eq!(back, bits);
        }
    }
}
