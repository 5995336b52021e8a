//! MOBS: a Diffie-Hellman-style key exchange over matrices of bit
//! strings.
//!
//! Matrix entries are fixed-length bit strings combined with Boolean OR
//! in place of addition and AND in place of multiplication, which makes
//! the matrices a semiring with very cheap arithmetic. The exchange
//! itself runs in the semidirect product of that matrix monoid with a
//! group of permutations of the bit positions: both parties raise the
//! public pair `(M, h)` to private exponents and transmit only matrix
//! components.
//!
//! Alongside the protocol ([`protocol`]) the crate carries the
//! supporting investigations: orbit dynamics of matrix powers and the
//! exhaustive saturation searches ([`dynamics`]), zero-bit statistics of
//! the shared key ([`stats`]), and the telescoping attack with its
//! slice-wise brute-force solver ([`attack`]).

pub mod attack;
pub mod bits;
pub mod codec;
pub mod dynamics;
mod error;
pub mod matrix;
pub mod perm;
pub mod protocol;
pub mod semidirect;
mod smallmat;
pub mod stats;

pub use bits::BitString;
pub use error::{Error, Result};
pub use matrix::BoolMatrix;
pub use perm::{landau_permutation, LandauPermutation, Permutation};
pub use protocol::{
    derive_shared, keygen, keygen_with_exponent, rng_from_seed, KeyPair, ParamSpec,
    ProtocolParams, SharedKey,
};
pub use semidirect::SemidirectElement;

// the exponent type used throughout the public API
pub use num_bigint::BigUint;

/// Cap the worker threads behind the parallel operations (searches,
/// slice solving, experiment trials). Must run before any parallel work
/// starts; errors if a pool already exists.
pub fn configure_workers(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Parameter(format!("cannot configure worker pool: {e}")))
}
