//! The platform semigroup: matrix/permutation pairs multiplied by
//! `(g, h)(g', h') = (h'(g) * g', h * h')`.
//!
//! Powers of a pair telescope into the product the key exchange rests on:
//! the matrix part of `(M, h)^a` equals
//! `h^(a-1)(M) * h^(a-2)(M) * ... * h(M) * M`. Exponents are arbitrary
//! big integers and powers run in `O(log e)` pair products, which is what
//! makes 500-bit private exponents practical.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::BoolMatrix;
use crate::perm::Permutation;

/// A pair `(matrix, perm)` with the permutation degree equal to the
/// matrix entry length.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SemidirectElement {
    matrix: BoolMatrix,
    perm: Permutation,
}

impl SemidirectElement {
    pub fn new(matrix: BoolMatrix, perm: Permutation) -> Result<Self> {
        if perm.degree() != matrix.k() {
            return Err(Error::dimension(format!(
                "permutation degree {} does not match entry length {}",
                perm.degree(),
                matrix.k()
            )));
        }
        Ok(SemidirectElement { matrix, perm })
    }

    /// The matrix component; the only part a protocol party transmits.
    pub fn matrix(&self) -> &BoolMatrix {
        &self.matrix
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn into_matrix(self) -> BoolMatrix {
        self.matrix
    }

    /// Pair product: the right factor's permutation twists the left
    /// factor's matrix before the matrices multiply.
    pub fn mul(&self, rhs: &SemidirectElement) -> Result<SemidirectElement> {
        if !self.matrix.same_shape(&rhs.matrix) || self.perm.degree() != rhs.perm.degree() {
            return Err(Error::dimension(
                "semidirect elements have incompatible shapes".to_string(),
            ));
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &SemidirectElement) -> SemidirectElement {
        let twisted = rhs
            .perm
            .apply_matrix(&self.matrix)
            .expect("degree checked at construction");
        SemidirectElement {
            matrix: twisted.mul_unchecked(&rhs.matrix),
            perm: self.perm.compose_unchecked(&rhs.perm),
        }
    }

    /// `self^e` by square-and-multiply. The semigroup has no neutral pair,
    /// so `e = 0` is rejected.
    pub fn pow(&self, e: &BigUint) -> Result<SemidirectElement> {
        if e.is_zero() {
            return Err(Error::parameter(
                "semidirect power requires a positive exponent".to_string(),
            ));
        }
        let bits = e.bits();
        let mut base = self.clone();
        let mut result: Option<SemidirectElement> = None;
        for i in 0..bits {
            if e.bit(i) {
                result = Some(match result {
                    None => base.clone(),
                    Some(acc) => acc.mul_unchecked(&base),
                });
            }
            if i + 1 < bits {
                base = base.mul_unchecked(&base);
            }
        }
        Ok(result.expect("a positive exponent has a set bit"))
    }

    pub fn pow_u64(&self, e: u64) -> Result<SemidirectElement> {
        self.pow(&BigUint::from(e))
    }
}
