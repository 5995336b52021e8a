//! Permutations of bit positions and their action on strings and matrices.
//!
//! A permutation of degree `k` moves the bit at position `i` to position
//! `sigma(i)`; applied to a matrix it rearranges the bits of every entry
//! the same way, which makes it an endomorphism of the matrix semiring.
//! Products compose left to right: `a.compose(&b)` applies `a` first.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::matrix::BoolMatrix;

/// A bijection on `{0, .., degree-1}`; serialized forms use 1-based
/// positions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Permutation {
    map: Vec<usize>, // map[i] = image of position i
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        assert!(degree > 0, "permutation degree must be positive");
        Permutation {
            map: (0..degree).collect(),
        }
    }

    /// From 0-based images; validates bijectivity.
    pub fn from_images(map: Vec<usize>) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::parameter("permutation degree must be positive"));
        }
        let mut seen = vec![false; map.len()];
        for &v in &map {
            if v >= map.len() || seen[v] {
                return Err(Error::parameter(format!(
                    "images are not a bijection on 0..{}",
                    map.len()
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    /// From 1-based images as written in cycle tables and files.
    pub fn from_one_based(map: &[usize]) -> Result<Self> {
        if map.contains(&0) {
            return Err(Error::parameter("1-based image cannot be 0"));
        }
        Self::from_images(map.iter().map(|&v| v - 1).collect())
    }

    pub fn degree(&self) -> usize {
        self.map.len()
    }

    /// Image of 0-based position `i`.
    pub fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// Move every bit of `s`: input position `i` lands at `sigma(i)`.
    pub fn apply_bits(&self, s: &BitString) -> Result<BitString> {
        if s.len() != self.degree() {
            return Err(Error::dimension(format!(
                "permutation of degree {} applied to a string of length {}",
                self.degree(),
                s.len()
            )));
        }
        let mut out = BitString::zeros(s.len());
        for i in s.iter_ones() {
            out.set(self.map[i], true);
        }
        Ok(out)
    }

    /// Apply to every entry of `m` independently.
    pub fn apply_matrix(&self, m: &BoolMatrix) -> Result<BoolMatrix> {
        if m.k() != self.degree() {
            return Err(Error::dimension(format!(
                "permutation of degree {} applied to a matrix with k = {}",
                self.degree(),
                m.k()
            )));
        }
        let mut out = m.clone();
        for i in 0..m.n() {
            for j in 0..m.n() {
                out.set_entry(i, j, self.apply_bits(m.entry(i, j))?);
            }
        }
        Ok(out)
    }

    /// `self` followed by `other`: the product `self * other` with the
    /// left factor applied first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::dimension(format!(
                "cannot compose permutations of degrees {} and {}",
                self.degree(),
                other.degree()
            )));
        }
        Ok(Permutation {
            map: self.map.iter().map(|&v| other.map[v]).collect(),
        })
    }

    pub(crate) fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation {
            map: self.map.iter().map(|&v| other.map[v]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            map[v] = i;
        }
        Permutation { map }
    }

    /// Square-and-multiply power; `e = 0` gives the identity.
    pub fn pow(&self, e: &BigUint) -> Permutation {
        let mut result = Permutation::identity(self.degree());
        if e.is_zero() {
            return result;
        }
        let mut base = self.clone();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                result = result.compose_unchecked(&base);
            }
            if i + 1 < bits {
                base = base.compose_unchecked(&base);
            }
        }
        result
    }

    pub fn pow_u64(&self, e: u64) -> Permutation {
        self.pow(&BigUint::from(e))
    }

    /// Lengths of the disjoint cycles, fixed points included, in order of
    /// their smallest element.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let mut seen = vec![false; self.map.len()];
        let mut lengths = Vec::new();
        for start in 0..self.map.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut pos = start;
            while !seen[pos] {
                seen[pos] = true;
                pos = self.map[pos];
                len += 1;
            }
            lengths.push(len);
        }
        lengths
    }

    /// Least positive `e` with `self^e` the identity: the lcm of the cycle
    /// lengths.
    pub fn order(&self) -> BigUint {
        self.cycle_lengths()
            .into_iter()
            .fold(BigUint::one(), |acc, len| acc.lcm(&BigUint::from(len)))
    }
}

/// A large-order permutation built from consecutive prime-length cycles,
/// together with the construction record.
#[derive(Clone, Debug)]
pub struct LandauPermutation {
    pub perm: Permutation,
    /// Prime cycle lengths actually used, ascending.
    pub cycle_lengths: Vec<usize>,
    /// Trailing positions no prime block could cover; they stay fixed.
    pub fixed_points: usize,
    pub order: BigUint,
}

/// Build a permutation of `{1..k}` as a product of cycles
/// `(1 2), (3 4 5), (6 7 8 9 10), ...` of increasing prime lengths, taking
/// consecutive blocks of positions until no further prime fits. Leftover
/// positions are fixed points; when any exist a warning reports the order
/// actually achieved.
pub fn landau_permutation(k: usize) -> Result<LandauPermutation> {
    if k < 2 {
        return Err(Error::parameter(format!(
            "need k >= 2 to place at least one cycle, got {k}"
        )));
    }
    let mut map: Vec<usize> = (0..k).collect();
    let mut cycle_lengths = Vec::new();
    let mut start = 0usize;
    let mut prime = 2usize;
    while start + prime <= k {
        // block start..start+prime becomes one cycle, each position
        // stepping forward and the last wrapping to the front
        for offset in 0..prime {
            map[start + offset] = start + (offset + 1) % prime;
        }
        cycle_lengths.push(prime);
        start += prime;
        prime = next_prime(prime);
    }
    let fixed_points = k - start;
    let perm = Permutation { map };
    let order = cycle_lengths
        .iter()
        .fold(BigUint::one(), |acc, &len| acc.lcm(&BigUint::from(len)));
    if fixed_points > 0 {
        log::warn!(
            "k = {k} is not a sum of consecutive primes; {fixed_points} trailing \
             position(s) stay fixed and the order achieved is {order}"
        );
    }
    Ok(LandauPermutation {
        perm,
        cycle_lengths,
        fixed_points,
        order,
    })
}

fn next_prime(after: usize) -> usize {
    let mut candidate = after + 1;
    loop {
        if is_prime(candidate) {
            return candidate;
        }
        candidate += 1;
    }
}

fn is_prime(v: usize) -> bool {
    if v < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= v {
        if v.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
