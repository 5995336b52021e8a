//! Fixed-length bit strings, the scalars of the OR/AND semiring.
//!
//! A `BitString` holds `k` bits packed least-significant-first into `u64`
//! words. Positions are 1-based in documentation and serialized forms to
//! match the usual way the strings are written; the in-memory index is
//! 0-based, so written position `j` lives at index `j - 1`. Addition is
//! bitwise OR, multiplication is bitwise AND; there are no additive
//! inverses.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::Error;

const WORD_BITS: usize = u64::BITS as usize;

/// A bit string of fixed positive length. Immutable length, value-type
/// semantics; unused bits of the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    /// The all-zeros string of length `len` (the additive identity).
    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "bit string length must be positive");
        BitString {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    /// The all-ones string of length `len` (the multiplicative identity).
    pub fn ones(len: usize) -> Self {
        let mut s = Self::zeros(len);
        for w in &mut s.words {
            *w = u64::MAX;
        }
        s.mask_tail();
        s
    }

    /// Independent Bernoulli(`p`) draw for each bit, in index order.
    pub fn random<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Self {
        let mut s = Self::zeros(len);
        for i in 0..len {
            if rng.gen_bool(p) {
                s.set(i, true);
            }
        }
        s
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // length is always positive
    }

    /// Bit at 0-based index `i`.
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range 0..{}", self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range 0..{}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    /// Bitwise OR (semiring addition). Lengths must agree.
    pub fn or(&self, other: &BitString) -> BitString {
        self.check_len(other);
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
        out
    }

    /// Bitwise AND (semiring multiplication). Lengths must agree.
    pub fn and(&self, other: &BitString) -> BitString {
        self.check_len(other);
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
        out
    }

    pub fn or_assign(&mut self, other: &BitString) {
        self.check_len(other);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    /// `self |= a & b`, the fused step of a matrix product row.
    pub(crate) fn acc_and(&mut self, a: &BitString, b: &BitString) {
        debug_assert_eq!(self.len, a.len);
        debug_assert_eq!(self.len, b.len);
        for ((w, x), y) in self.words.iter_mut().zip(&a.words).zip(&b.words) {
            *w |= x & y;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.count_ones()
    }

    /// Indices of the set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            std::iter::successors(
                if word == 0 { None } else { Some(word) },
                |w| {
                    let w = w & (w - 1);
                    if w == 0 {
                        None
                    } else {
                        Some(w)
                    }
                },
            )
            .map(move |w| wi * WORD_BITS + w.trailing_zeros() as usize)
        })
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        assert!(len > 0);
        assert_eq!(words.len(), len.div_ceil(WORD_BITS));
        let mut s = BitString { len, words };
        s.mask_tail();
        s
    }

    fn mask_tail(&mut self) {
        let used = self.len % WORD_BITS;
        if used != 0 {
            *self.words.last_mut().unwrap() &= (1u64 << used) - 1;
        }
    }

    fn check_len(&self, other: &BitString) {
        assert_eq!(
            self.len, other.len,
            "bit strings of lengths {} and {} cannot be combined",
            self.len, other.len
        );
    }
}

impl fmt::Display for BitString {
    /// Written position 1 first: the string the constructor `"110"` parses
    /// displays as `110`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s.is_empty() {
            return Err(Error::parameter("bit string literal is empty"));
        }
        let mut out = BitString::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => out.set(i, true),
                '0' => {}
                other => {
                    return Err(Error::parameter(format!(
                        "bit string literal may contain only 0 and 1, found {other:?}"
                    )))
                }
            }
        }
        Ok(out)
    }
}
