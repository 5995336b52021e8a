//! Square matrices over bit strings with OR as addition and AND as
//! multiplication.
//!
//! With the dimension `n` and the entry length `k` fixed, these matrices
//! form a monoid: `identity` (all-ones strings on the diagonal) is neutral
//! and `zero` (all-zeros strings everywhere) is absorbing. Because OR and
//! AND act coordinatewise, the monoid splits into `k` independent
//! single-bit layers; [`BoolMatrix::slices`] exposes that splitting.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// An `n`×`n` matrix whose entries are bit strings of length `k`.
/// Immutable value type; every operation returns a fresh matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    n: usize,
    k: usize,
    entries: Vec<BitString>, // row-major, n * n entries of length k
}

impl BoolMatrix {
    fn validate_shape(n: usize, k: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::parameter("matrix dimension n must be positive"));
        }
        if k == 0 {
            return Err(Error::parameter("entry bit length k must be positive"));
        }
        Ok(())
    }

    /// All entries the zero string; the absorbing element.
    pub fn zero(n: usize, k: usize) -> Result<Self> {
        Self::validate_shape(n, k)?;
        Ok(BoolMatrix {
            n,
            k,
            entries: vec![BitString::zeros(k); n * n],
        })
    }

    /// All-ones strings on the diagonal, zeros elsewhere; the unit element.
    pub fn identity(n: usize, k: usize) -> Result<Self> {
        let mut m = Self::zero(n, k)?;
        for i in 0..n {
            m.entries[i * n + i] = BitString::ones(k);
        }
        Ok(m)
    }

    /// Every entry the all-ones string.
    pub fn all_ones(n: usize, k: usize) -> Result<Self> {
        Self::validate_shape(n, k)?;
        Ok(BoolMatrix {
            n,
            k,
            entries: vec![BitString::ones(k); n * n],
        })
    }

    /// Each of the `n * n * k` bits is an independent Bernoulli(`p`) draw,
    /// taken entry by entry in row-major order and bit-index order within
    /// an entry. Same rng state and arguments give the same matrix.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, p: f64, rng: &mut R) -> Result<Self> {
        Self::validate_shape(n, k)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::parameter(format!(
                "bit probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(BoolMatrix {
            n,
            k,
            entries: (0..n * n).map(|_| BitString::random(k, p, rng)).collect(),
        })
    }

    /// Build from row-major entries; all must share one length.
    pub fn from_entries(n: usize, entries: Vec<BitString>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::dimension(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        Self::validate_shape(n, entries[0].len())?;
        let k = entries[0].len();
        if let Some(bad) = entries.iter().find(|e| e.len() != k) {
            return Err(Error::dimension(format!(
                "entry of length {} in a matrix with k = {k}",
                bad.len()
            )));
        }
        Ok(BoolMatrix { n, k, entries })
    }

    /// Convenience constructor from string literals, e.g.
    /// `BoolMatrix::parse(&[&["110", "101"], &["001", "100"]])`.
    pub fn parse(rows: &[&[&str]]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::dimension("matrix literal is not square".to_string()));
            }
            for cell in *row {
                entries.push(cell.parse()?);
            }
        }
        Self::from_entries(n, entries)
    }

    /// Single-bit matrix (`k = 1`) from 0/1 rows.
    pub fn from_single_bits(rows: &[&[u8]]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::dimension("matrix literal is not square".to_string()));
            }
            for &cell in *row {
                entries.push(BitString::from_bools(&[cell != 0]));
            }
        }
        Self::from_entries(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, row: usize, col: usize) -> &BitString {
        &self.entries[row * self.n + col]
    }

    pub fn entries(&self) -> &[BitString] {
        &self.entries
    }

    pub(crate) fn set_entry(&mut self, row: usize, col: usize, value: BitString) {
        assert_eq!(value.len(), self.k);
        self.entries[row * self.n + col] = value;
    }

    pub fn same_shape(&self, other: &BoolMatrix) -> bool {
        self.n == other.n && self.k == other.k
    }

    pub(crate) fn check_same_shape(&self, other: &BoolMatrix) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::dimension(format!(
                "{}x{} over k={} vs {}x{} over k={}",
                self.n, self.n, self.k, other.n, other.n, other.k
            )));
        }
        Ok(())
    }

    /// Semiring product: `out[i][j] = OR over t of (self[i][t] AND rhs[t][j])`.
    pub fn mul(&self, rhs: &BoolMatrix) -> Result<BoolMatrix> {
        self.check_same_shape(rhs)?;
        Ok(self.mul_unchecked(rhs))
    }

    pub(crate) fn mul_unchecked(&self, rhs: &BoolMatrix) -> BoolMatrix {
        debug_assert!(self.same_shape(rhs));
        let n = self.n;
        let mut out = BoolMatrix {
            n,
            k: self.k,
            entries: vec![BitString::zeros(self.k); n * n],
        };
        for i in 0..n {
            for t in 0..n {
                let a = self.entry(i, t);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j].acc_and(a, rhs.entry(t, j));
                }
            }
        }
        out
    }

    /// `self` raised to `e` by square-and-multiply; `e = 0` gives the
    /// identity. Exponents far beyond word width are expected.
    pub fn pow(&self, e: &BigUint) -> BoolMatrix {
        let mut result = BoolMatrix::identity(self.n, self.k).expect("shape already valid");
        if e.is_zero() {
            return result;
        }
        let mut base = self.clone();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                result = result.mul_unchecked(&base);
            }
            if i + 1 < bits {
                base = base.mul_unchecked(&base);
            }
        }
        result
    }

    pub fn pow_u64(&self, e: u64) -> BoolMatrix {
        self.pow(&BigUint::from(e))
    }

    /// The `k` single-bit layers: slice `j` (0-based; written position
    /// `j + 1`) collects bit `j` of every entry.
    pub fn slices(&self) -> Vec<BoolMatrix> {
        (0..self.k)
            .map(|j| {
                let entries = self
                    .entries
                    .iter()
                    .map(|e| BitString::from_bools(&[e.get(j)]))
                    .collect();
                BoolMatrix {
                    n: self.n,
                    k: 1,
                    entries,
                }
            })
            .collect()
    }

    /// Inverse of [`slices`](Self::slices): reassemble `k` single-bit
    /// matrices of equal dimension into one matrix over length-`k` strings.
    pub fn from_slices(slices: &[BoolMatrix]) -> Result<BoolMatrix> {
        if slices.is_empty() {
            return Err(Error::parameter("cannot compose zero slices"));
        }
        let n = slices[0].n;
        for s in slices {
            if s.k != 1 {
                return Err(Error::dimension(format!(
                    "slice has k = {}, expected single-bit slices",
                    s.k
                )));
            }
            if s.n != n {
                return Err(Error::dimension(format!(
                    "slice dimension {} differs from {}",
                    s.n, n
                )));
            }
        }
        let k = slices.len();
        let mut out = BoolMatrix::zero(n, k)?;
        for (j, s) in slices.iter().enumerate() {
            for idx in 0..n * n {
                if s.entries[idx].get(0) {
                    out.entries[idx].set(j, true);
                }
            }
        }
        Ok(out)
    }

    pub fn total_bits(&self) -> usize {
        self.n * self.n * self.k
    }

    pub fn count_ones(&self) -> usize {
        self.entries.iter().map(BitString::count_ones).sum()
    }

    /// Fraction of zero bits among all `n * n * k` bits.
    pub fn zero_bit_ratio(&self) -> f64 {
        1.0 - self.count_ones() as f64 / self.total_bits() as f64
    }
}

impl fmt::Display for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str("[")?;
            for j in 0..self.n {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "({})", self.entry(i, j))?;
            }
            f.write_str("]")?;
            if i + 1 < self.n {
                f.write_str("\n")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoolMatrix(n={}, k={})\n{}", self.n, self.k, self)
    }
}
