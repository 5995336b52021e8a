//! Single-bit matrices of dimension up to 5 packed into one `u32`:
//! entry `(i, j)` sits at bit `i*n + j`. The exhaustive searches and the
//! brute-force solver run on these masks and convert to [`BoolMatrix`]
//! only at their boundaries.

use crate::error::{Error, Result};
use crate::matrix::BoolMatrix;

pub(crate) const MAX_N: usize = 5;

pub(crate) fn check_n(n: usize) -> Result<()> {
    if !(1..=MAX_N).contains(&n) {
        return Err(Error::parameter(format!(
            "dense single-bit matrices support n in 1..={MAX_N}, got {n}"
        )));
    }
    Ok(())
}

pub(crate) fn all_ones(n: usize) -> u32 {
    (1u32 << (n * n)) - 1
}

fn row(mask: u32, i: usize, n: usize) -> u32 {
    (mask >> (i * n)) & ((1 << n) - 1)
}

/// OR/AND product of two packed matrices.
pub(crate) fn mul(a: u32, b: u32, n: usize) -> u32 {
    let mut out = 0u32;
    for i in 0..n {
        let mut arow = row(a, i, n);
        let mut orow = 0u32;
        while arow != 0 {
            let t = arow.trailing_zeros() as usize;
            orow |= row(b, t, n);
            arow &= arow - 1;
        }
        out |= orow << (i * n);
    }
    out
}

/// Read the row-major bits as one binary numeral, entry `(0,0)` most
/// significant. Counting this value up from zero enumerates all matrices
/// in a canonical order.
pub(crate) fn counter_from_mask(mask: u32, n: usize) -> u32 {
    let bits = n * n;
    let mut c = 0u32;
    for idx in 0..bits {
        if mask >> idx & 1 == 1 {
            c |= 1 << (bits - 1 - idx);
        }
    }
    c
}

pub(crate) fn mask_from_counter(counter: u32, n: usize) -> u32 {
    counter_from_mask(counter, n) // the bit reversal is its own inverse
}

pub(crate) fn from_bool_matrix(m: &BoolMatrix) -> Result<u32> {
    check_n(m.n())?;
    if m.k() != 1 {
        return Err(Error::dimension(format!(
            "expected a single-bit matrix, got k = {}",
            m.k()
        )));
    }
    let n = m.n();
    let mut mask = 0u32;
    for i in 0..n {
        for j in 0..n {
            if m.entry(i, j).get(0) {
                mask |= 1 << (i * n + j);
            }
        }
    }
    Ok(mask)
}

pub(crate) fn to_bool_matrix(mask: u32, n: usize) -> BoolMatrix {
    let mut m = BoolMatrix::zero(n, 1).expect("n validated by callers");
    for i in 0..n {
        for j in 0..n {
            if mask >> (i * n + j) & 1 == 1 {
                let mut one = crate::bits::BitString::zeros(1);
                one.set(0, true);
                m.set_entry(i, j, one);
            }
        }
    }
    m
}

/// Row-major 0/1 characters, written order.
pub(crate) fn bits_string(mask: u32, n: usize) -> String {
    (0..n * n)
        .map(|idx| if mask >> idx & 1 == 1 { '1' } else { '0' })
        .collect()
}
