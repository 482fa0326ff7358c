//! Narrow-sense binary BCH codes of length 31.
//!
//! The field is GF(2^5) built on the primitive polynomial `x^5 + x^2 + 1`.
//! A codeword of length 31 is held as a `u32` polynomial where bit `i` is the
//! coefficient of `x^i`; the first (leftmost) symbol of the corresponding
//! [`Codeword`] is `x^30`. Encoding is systematic with the message in the
//! high-order positions. Decoding computes `2t` syndromes, runs
//! Berlekamp-Massey and locates errors with a Chien search.

use crate::codeword::Codeword;
use crate::error::{Error, Result};

pub const BCH_LENGTH: usize = 31;
const FIELD_ORDER: usize = 31;
const PRIMITIVE_POLY: u32 = 0b100101;

struct Gf32 {
    exp: [u8; 62],
    log: [u8; 32],
}

const fn build_field() -> Gf32 {
    let mut exp = [0u8; 62];
    let mut log = [0u8; 32];
    let mut x: u32 = 1;
    let mut i = 0;
    while i < FIELD_ORDER {
        exp[i] = x as u8;
        exp[i + FIELD_ORDER] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0b100000 != 0 {
            x ^= PRIMITIVE_POLY;
        }
        i += 1;
    }
    Gf32 { exp, log }
}

static GF: Gf32 = build_field();

#[inline]
fn gf_mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        0
    } else {
        GF.exp[GF.log[a as usize] as usize + GF.log[b as usize] as usize]
    }
}

#[inline]
fn gf_inv(a: u8) -> u8 {
    debug_assert!(a != 0);
    GF.exp[(FIELD_ORDER - GF.log[a as usize] as usize) % FIELD_ORDER]
}

#[inline]
fn alpha_pow(e: usize) -> u8 {
    GF.exp[e % FIELD_ORDER]
}

/// Binary polynomial product (bit i = coefficient of x^i).
fn poly_mul(a: u64, b: u64) -> u64 {
    let mut out = 0;
    for i in 0..64 {
        if (b >> i) & 1 == 1 {
            out ^= a << i;
        }
    }
    out
}

/// Remainder of binary polynomial division.
fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = 63 - b.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= db {
        a ^= b << (63 - a.leading_zeros() - db);
    }
    a
}

/// Minimal polynomial over GF(2) of `alpha^j`.
fn minimal_polynomial(j: usize) -> u64 {
    // Coefficients in GF(32), low degree first.
    let mut coeffs: Vec<u8> = vec![1];
    let mut e = j % FIELD_ORDER;
    loop {
        let root = alpha_pow(e);
        // Multiply by (x + root).
        let mut next = vec![0u8; coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] ^= c;
            next[i] ^= gf_mul(c, root);
        }
        coeffs = next;
        e = (e * 2) % FIELD_ORDER;
        if e == j % FIELD_ORDER {
            break;
        }
    }
    coeffs.iter().enumerate().fold(0u64, |acc, (i, &c)| {
        debug_assert!(c <= 1, "minimal polynomial must be binary");
        acc | ((c as u64) << i)
    })
}

fn generator_polynomial(t: usize) -> u64 {
    let mut seen = Vec::new();
    let mut g = 1u64;
    for j in (1..2 * t).step_by(2) {
        let m = minimal_polynomial(j);
        if !seen.contains(&m) {
            seen.push(m);
            g = poly_mul(g, m);
        }
    }
    g
}

/// A member of the length-31 BCH family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BchCode {
    k: usize,
    t: usize,
    generator: u64,
}

/// `(n, k, t)` of the family members.
pub const BCH_FAMILY: [(usize, usize, usize); 5] =
    [(31, 26, 1), (31, 21, 2), (31, 16, 3), (31, 11, 5), (31, 6, 7)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BchDecoded {
    /// Message bits (best effort: the raw systematic part when decoding failed).
    pub message: u32,
    /// Number of corrected positions, `None` when the syndrome was uncorrectable.
    pub corrected: Option<usize>,
}

impl BchDecoded {
    pub fn failed(&self) -> bool {
        self.corrected.is_none()
    }
}

impl BchCode {
    /// The family member with designed correction capability `t`.
    pub fn new(t: usize) -> Result<Self> {
        let &(_, k, _) = BCH_FAMILY.iter().find(|f| f.2 == t).ok_or_else(|| {
            Error::Invalid(format!(
                "no length-31 BCH code with t={t} (available: 1, 2, 3, 5, 7)"
            ))
        })?;
        let generator = generator_polynomial(t);
        debug_assert_eq!(63 - generator.leading_zeros() as usize, BCH_LENGTH - k);
        Ok(Self { k, t, generator })
    }

    pub fn family() -> Vec<BchCode> {
        BCH_FAMILY.iter().map(|f| BchCode::new(f.2).expect("family member")).collect()
    }

    pub fn n(&self) -> usize {
        BCH_LENGTH
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Generator polynomial, bit i = coefficient of x^i.
    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// Does the generator divide `x^31 + 1`?
    pub fn generator_divides_x31_plus_1(&self) -> bool {
        poly_rem((1u64 << 31) | 1, self.generator) == 0
    }

    fn parity_bits(&self) -> usize {
        BCH_LENGTH - self.k
    }

    /// Systematic encoding of the low `k` bits of `message`.
    pub fn encode_value(&self, message: u32) -> Result<u32> {
        if self.k < 32 && message >> self.k != 0 {
            return Err(Error::Overflow { len: self.k });
        }
        let shifted = (message as u64) << self.parity_bits();
        Ok((shifted | poly_rem(shifted, self.generator)) as u32)
    }

    /// Encodes a `k`-bit message word into a 31-bit codeword.
    pub fn encode(&self, message: &Codeword) -> Result<Codeword> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch {
                left: message.len(),
                right: self.k,
            });
        }
        let value = self.encode_value(message.value() as u32)?;
        Codeword::new(value as u128, BCH_LENGTH)
    }

    /// Is `word` divisible by the generator?
    pub fn is_codeword(&self, word: u32) -> bool {
        poly_rem(word as u64, self.generator) == 0
    }

    fn syndromes(&self, r: u32) -> Vec<u8> {
        (1..=2 * self.t)
            .map(|j| {
                let mut s = 0u8;
                let mut bits = r;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    s ^= alpha_pow(i * j);
                    bits &= bits - 1;
                }
                s
            })
            .collect()
    }

    /// Error-locator polynomial from the syndromes, low degree first.
    fn berlekamp_massey(syndromes: &[u8]) -> Vec<u8> {
        let mut c = vec![1u8];
        let mut b = vec![1u8];
        let mut l = 0usize;
        let mut shift = 1usize;
        let mut last = 1u8;
        for step in 0..syndromes.len() {
            let mut d = syndromes[step];
            for i in 1..=l.min(c.len() - 1) {
                d ^= gf_mul(c[i], syndromes[step - i]);
            }
            if d == 0 {
                shift += 1;
                continue;
            }
            let coef = gf_mul(d, gf_inv(last));
            let prev = c.clone();
            if c.len() < b.len() + shift {
                c.resize(b.len() + shift, 0);
            }
            for (i, &bi) in b.iter().enumerate() {
                c[i + shift] ^= gf_mul(coef, bi);
            }
            if 2 * l <= step {
                l = step + 1 - l;
                b = prev;
                last = d;
                shift = 1;
            } else {
                shift += 1;
            }
        }
        c.truncate(l + 1);
        c
    }

    /// Decodes a received 31-bit polynomial.
    pub fn decode_value(&self, r: u32) -> BchDecoded {
        let r = r & ((1u32 << BCH_LENGTH) - 1);
        let raw = r >> self.parity_bits();
        let syndromes = self.syndromes(r);
        if syndromes.iter().all(|&s| s == 0) {
            return BchDecoded {
                message: raw,
                corrected: Some(0),
            };
        }
        let locator = Self::berlekamp_massey(&syndromes);
        let degree = locator.len() - 1;
        if degree == 0 || degree > self.t {
            return BchDecoded {
                message: raw,
                corrected: None,
            };
        }
        // Chien search: position i is in error iff locator(alpha^-i) = 0.
        let mut fixed = r;
        let mut roots = 0;
        for i in 0..BCH_LENGTH {
            let x = alpha_pow(FIELD_ORDER - i);
            let mut acc = 0u8;
            let mut pow = 1u8;
            for &coef in &locator {
                acc ^= gf_mul(coef, pow);
                pow = gf_mul(pow, x);
            }
            if acc == 0 {
                fixed ^= 1 << i;
                roots += 1;
            }
        }
        if roots != degree || !self.is_codeword(fixed) {
            return BchDecoded {
                message: raw,
                corrected: None,
            };
        }
        BchDecoded {
            message: fixed >> self.parity_bits(),
            corrected: Some(roots),
        }
    }

    /// Decodes a received 31-bit word.
    pub fn decode(&self, received: &Codeword) -> Result<BchDecoded> {
        if received.len() != BCH_LENGTH {
            return Err(Error::LengthMismatch {
                left: received.len(),
                right: BCH_LENGTH,
            });
        }
        Ok(self.decode_value(received.value() as u32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn field_tables_are_consistent() {
        for a in 1u8..32 {
            assert_eq!(gf_mul(a, gf_inv(a)), 1);
        }
        assert_eq!(alpha_pow(31), 1);
    }

    #[test]
    fn known_generators() {
        // g(x) for t=1 is the primitive polynomial itself; t=2 multiplies in
        // m_3(x) = x^5 + x^4 + x^3 + x^2 + 1.
        assert_eq!(BchCode::new(1).unwrap().generator(), 0b100101);
        assert_eq!(
            BchCode::new(2).unwrap().generator(),
            poly_mul(0b100101, 0b111101)
        );
        for code in BchCode::family() {
            assert!(code.generator_divides_x31_plus_1(), "t={}", code.t());
            assert_eq!(63 - code.generator().leading_zeros() as usize, 31 - code.k());
        }
    }

    #[test]
    fn unsupported_t_is_rejected() {
        assert!(BchCode::new(4).is_err());
        assert!(BchCode::new(0).is_err());
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        for code in BchCode::family() {
            assert_eq!(code.encode_value(0).unwrap(), 0);
        }
    }

    #[test]
    fn encoding_is_linear_and_systematic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for code in BchCode::family() {
            let mask = (1u32 << code.k()) - 1;
            for _ in 0..200 {
                let (a, b) = (rng.random::<u32>() & mask, rng.random::<u32>() & mask);
                let (ca, cb) = (code.encode_value(a).unwrap(), code.encode_value(b).unwrap());
                assert_eq!(ca ^ cb, code.encode_value(a ^ b).unwrap());
                assert_eq!(ca >> (31 - code.k()), a);
                assert!(code.is_codeword(ca));
            }
        }
    }

    #[test]
    fn encode_checks_lengths() {
        let code = BchCode::new(3).unwrap();
        assert!(code.encode(&Codeword::zeros(15).unwrap()).is_err());
        assert!(code.encode_value(1 << 16).is_err());
        assert!(code.decode(&Codeword::zeros(30).unwrap()).is_err());
    }

    #[test]
    fn clean_and_single_errors() {
        let code = BchCode::new(1).unwrap();
        let c = code.encode_value(0x2ABCDEF & ((1 << 26) - 1)).unwrap();
        assert_eq!(code.decode_value(c).corrected, Some(0));
        for i in 0..31 {
            let out = code.decode_value(c ^ (1 << i));
            assert_eq!(out.corrected, Some(1));
            assert_eq!(out.message, c >> 5);
        }
    }

    #[test]
    fn weight_two_on_hamming_member_is_never_a_silent_success() {
        // (31,26) is perfect: every weight-2 pattern miscorrects to a third
        // position. The weight-3 difference cannot fit in the 5 parity
        // positions, so the message always changes.
        let code = BchCode::new(1).unwrap();
        let c = code.encode_value(12345).unwrap();
        for i in 0..31 {
            for j in i + 1..31 {
                let out = code.decode_value(c ^ (1 << i) ^ (1 << j));
                assert!(out.failed() || out.message != 12345);
            }
        }
    }

    #[test]
    fn nonzero_codewords_of_hamming_member_have_weight_three() {
        let code = BchCode::new(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let m = rng.random::<u32>() & ((1 << 26) - 1);
            if m != 0 {
                assert!(code.encode_value(m).unwrap().count_ones() >= 3);
            }
        }
        // Every weight-1 and weight-2 word has a non-zero syndrome, and the
        // 31 single-error syndromes are distinct: d_min >= 3.
        let mut seen = std::collections::HashSet::new();
        for i in 0..31 {
            let s = code.syndromes(1 << i);
            assert!(s.iter().any(|&v| v != 0));
            assert!(seen.insert(s));
        }
    }
}
