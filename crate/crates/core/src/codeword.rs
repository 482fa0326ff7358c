//! Fixed-length binary words and the Hamming metric.
//!
//! A [`Codeword`] packs up to [`MAX_BLOCKLENGTH`] bits into a `u128`. Position
//! 1 (the first character of the textual form) is the most significant bit,
//! so `"1000"` has integer value 8.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MAX_BLOCKLENGTH: usize = 128;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Codeword {
    bits: u128,
    len: u32,
}

#[inline]
fn mask(len: usize) -> u128 {
    if len >= 128 {
        u128::MAX
    } else {
        (1u128 << len) - 1
    }
}

impl Codeword {
    /// Builds a word of `len` bits from its integer value (first position is the MSB).
    pub fn new(bits: u128, len: usize) -> Result<Self> {
        if len == 0 || len > MAX_BLOCKLENGTH {
            return Err(Error::InvalidBlocklength(len));
        }
        if bits & !mask(len) != 0 {
            return Err(Error::Overflow { len });
        }
        Ok(Self {
            bits,
            len: len as u32,
        })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(0, len)
    }

    pub fn ones(len: usize) -> Result<Self> {
        Self::new(mask(len), len)
    }

    /// Builds a word from a slice of 0/1 symbols, first symbol at position 1.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut value = 0u128;
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 | 1 => value = (value << 1) | b as u128,
                other => {
                    return Err(Error::InvalidBit {
                        position: i + 1,
                        found: char::from_digit(other as u32 % 36, 36).unwrap_or('?'),
                    })
                }
            }
        }
        Self::new(value, bits.len())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    /// Always false: a codeword has at least one symbol.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn value(&self) -> u128 {
        self.bits
    }

    /// Symbol at 0-based position `i` counted from the first (leftmost) bit.
    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len(), "bit index {i} out of range for length {}", self.len);
        (self.bits >> (self.len() - 1 - i)) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(move |i| self.bit(i) as u8)
    }

    #[inline]
    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn xor(&self, other: &Codeword) -> Result<Codeword> {
        check_len(self, other)?;
        Ok(self.xor_unchecked(other))
    }

    #[inline]
    pub(crate) fn xor_unchecked(&self, other: &Codeword) -> Codeword {
        Codeword {
            bits: self.bits ^ other.bits,
            len: self.len,
        }
    }

    /// Flips the symbol at 0-based position `i`.
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len(), "bit index {i} out of range for length {}", self.len);
        self.bits ^= 1u128 << (self.len() - 1 - i);
    }

    /// Concatenates `self` followed by `tail`.
    pub fn concat(&self, tail: &Codeword) -> Result<Codeword> {
        let len = self.len() + tail.len();
        if len > MAX_BLOCKLENGTH {
            return Err(Error::InvalidBlocklength(len));
        }
        Codeword::new((self.bits << tail.len()) | tail.bits, len)
    }

    /// Splits into the first `head` symbols and the rest.
    pub fn split_at(&self, head: usize) -> Result<(Codeword, Codeword)> {
        if head == 0 || head >= self.len() {
            return Err(Error::Invalid(format!(
                "cannot split a {}-bit word at {head}",
                self.len
            )));
        }
        let tail = self.len() - head;
        Ok((
            Codeword::new(self.bits >> tail, head)?,
            Codeword::new(self.bits & mask(tail), tail)?,
        ))
    }

    /// Distance without the length check; callers guarantee equal lengths.
    #[inline]
    pub(crate) fn distance_unchecked(&self, other: &Codeword) -> usize {
        debug_assert_eq!(self.len, other.len);
        (self.bits ^ other.bits).count_ones() as usize
    }
}

#[inline]
pub(crate) fn check_len(a: &Codeword, b: &Codeword) -> Result<()> {
    if a.len != b.len {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Number of positions where `a` and `b` differ.
pub fn hamming_distance(a: &Codeword, b: &Codeword) -> Result<usize> {
    check_len(a, b)?;
    Ok(a.distance_unchecked(b))
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Codeword({self})")
    }
}

impl FromStr for Codeword {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                found => {
                    return Err(Error::InvalidBit {
                        position: i + 1,
                        found,
                    })
                }
            }
        }
        Codeword::from_bits(&bits)
    }
}
