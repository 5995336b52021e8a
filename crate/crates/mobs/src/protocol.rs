//! The key exchange itself.
//!
//! Both parties share public parameters `(M, h)`: a random matrix over
//! length-`k` bit strings and a high-order permutation of the `k`
//! positions. Each side raises the pair `(M, h)` to a private exponent and
//! transmits only the matrix component of the result. The shared key is
//! the matrix component of `(M, h)^(a+b)`, which either side reaches by
//! permuting the peer's value with its own exponent and multiplying by its
//! own public matrix:
//!
//! ```text
//! Alice:  K = h^a(B) * A        Bob:  K = h^b(A) * B
//! ```
//!
//! Raw key matrices are biased toward zero bits, so consumers should key
//! off [`SharedKey::digest`] rather than the matrix bits themselves.

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::codec;
use crate::error::{Error, Result};
use crate::matrix::BoolMatrix;
use crate::perm::{landau_permutation, Permutation};
use crate::semidirect::SemidirectElement;

/// Sizes and sampling knobs; the generated public values live in
/// [`ProtocolParams`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamSpec {
    /// Matrix dimension.
    pub n: usize,
    /// Entry bit length and permutation degree.
    pub k: usize,
    /// Probability of a 1 bit when sampling the public matrix.
    pub p: f64,
    /// Exact bit length of private exponents.
    pub exponent_bits: usize,
}

impl Default for ParamSpec {
    fn default() -> Self {
        ParamSpec {
            n: 3,
            k: 381,
            p: 0.5,
            exponent_bits: 500,
        }
    }
}

/// Public parameters of one exchange: the spec values plus the shared
/// matrix `M` and permutation `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolParams {
    pub spec: ParamSpec,
    matrix: BoolMatrix,
    perm: Permutation,
}

impl ProtocolParams {
    /// Sample `M` with the spec's bit probability and build `h` from
    /// consecutive prime-length cycles. Deterministic for a fixed rng
    /// state.
    pub fn generate<R: Rng + ?Sized>(spec: ParamSpec, rng: &mut R) -> Result<Self> {
        if spec.k < 2 {
            return Err(Error::parameter(format!(
                "k must be at least 2, got {}",
                spec.k
            )));
        }
        if spec.exponent_bits == 0 {
            return Err(Error::parameter(
                "exponent_bits must be positive".to_string(),
            ));
        }
        let matrix = BoolMatrix::random(spec.n, spec.k, spec.p, rng)?;
        let perm = landau_permutation(spec.k)?.perm;
        Ok(ProtocolParams { spec, matrix, perm })
    }

    /// Assemble from explicit public values, e.g. read back from a file.
    pub fn from_parts(spec: ParamSpec, matrix: BoolMatrix, perm: Permutation) -> Result<Self> {
        if matrix.n() != spec.n || matrix.k() != spec.k {
            return Err(Error::dimension(format!(
                "matrix is {}x{} over k={}, spec says n={}, k={}",
                matrix.n(),
                matrix.n(),
                matrix.k(),
                spec.n,
                spec.k
            )));
        }
        if perm.degree() != spec.k {
            return Err(Error::dimension(format!(
                "permutation degree {} does not match k={}",
                perm.degree(),
                spec.k
            )));
        }
        Ok(ProtocolParams { spec, matrix, perm })
    }

    pub fn matrix(&self) -> &BoolMatrix {
        &self.matrix
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn generator(&self) -> SemidirectElement {
        SemidirectElement::new(self.matrix.clone(), self.perm.clone())
            .expect("params invariant: degree equals k")
    }
}

/// One party's private exponent and the matrix it publishes.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyPair {
    private_exponent: BigUint,
    public_value: BoolMatrix,
}

impl KeyPair {
    pub fn private_exponent(&self) -> &BigUint {
        &self.private_exponent
    }

    pub fn public_value(&self) -> &BoolMatrix {
        &self.public_value
    }
}

/// The two rng roles: a seeded deterministic stream for tests and
/// experiments, or OS entropy for real key material.
pub fn rng_from_seed(seed: Option<u64>) -> rand_chacha::ChaCha12Rng {
    use rand::SeedableRng;
    match seed {
        Some(s) => rand_chacha::ChaCha12Rng::seed_from_u64(s),
        None => rand_chacha::ChaCha12Rng::from_rng(rand::rngs::OsRng)
            .expect("OS entropy source is available"),
    }
}

/// Sample a private exponent of bit length exactly `spec.exponent_bits`
/// (top bit set) and compute the public matrix.
pub fn keygen<R: Rng + ?Sized>(params: &ProtocolParams, rng: &mut R) -> Result<KeyPair> {
    let bits = params.spec.exponent_bits as u64;
    let exponent = if bits == 1 {
        BigUint::one()
    } else {
        rng.gen_biguint(bits - 1) | (BigUint::one() << (bits - 1))
    };
    keygen_with_exponent(params, exponent)
}

/// Deterministic variant for tests and replays: use the given exponent.
pub fn keygen_with_exponent(params: &ProtocolParams, exponent: BigUint) -> Result<KeyPair> {
    let public_value = params.generator().pow(&exponent)?.into_matrix();
    Ok(KeyPair {
        private_exponent: exponent,
        public_value,
    })
}

/// The derived key matrix, plus a digest hook for downstream use.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedKey {
    key_matrix: BoolMatrix,
}

impl SharedKey {
    pub fn matrix(&self) -> &BoolMatrix {
        &self.key_matrix
    }

    /// SHA-256 of the canonical binary encoding of the key matrix.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(codec::encode_matrix(&self.key_matrix)).into()
    }

    pub fn digest_hex(&self) -> String {
        hex::encode(self.digest())
    }
}

/// Combine the peer's public matrix with our own key pair:
/// `K = h^own(peer) * own_public`.
pub fn derive_shared(
    params: &ProtocolParams,
    own: &KeyPair,
    peer_public: &BoolMatrix,
) -> Result<SharedKey> {
    params.matrix.check_same_shape(peer_public)?;
    let twisted = params
        .perm
        .pow(&own.private_exponent)
        .apply_matrix(peer_public)?;
    Ok(SharedKey {
        key_matrix: twisted.mul(&own.public_value)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn toy_params(seed: u64) -> ProtocolParams {
        let spec = ParamSpec {
            n: 2,
            k: 5,
            p: 0.5,
            exponent_bits: 16,
        };
        ProtocolParams::generate(spec, &mut ChaCha12Rng::seed_from_u64(seed)).unwrap()
    }

    fn known_params() -> ProtocolParams {
        let spec = ParamSpec {
            n: 2,
            k: 3,
            p: 0.5,
            exponent_bits: 4,
        };
        ProtocolParams::from_parts(
            spec,
            BoolMatrix::parse(&[&["110", "101"], &["001", "100"]]).unwrap(),
            Permutation::from_one_based(&[2, 3, 1]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn default_spec_sizes() {
        let params = ProtocolParams::generate(
            ParamSpec::default(),
            &mut ChaCha12Rng::seed_from_u64(0),
        )
        .unwrap();
        assert_eq!(params.matrix().n(), 3);
        assert_eq!(params.matrix().k(), 381);
        assert_eq!(params.matrix().total_bits(), 3429);
        assert_eq!(params.perm().degree(), 381);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = toy_params(9);
        let b = toy_params(9);
        assert_eq!(a, b);
    }

    #[test]
    fn p_one_gives_all_ones_matrix_and_prime_cycles() {
        let spec = ParamSpec {
            n: 3,
            k: 5,
            p: 1.0,
            exponent_bits: 8,
        };
        let params =
            ProtocolParams::generate(spec, &mut ChaCha12Rng::seed_from_u64(1)).unwrap();
        assert_eq!(params.matrix(), &BoolMatrix::all_ones(3, 5).unwrap());
        assert_eq!(params.perm().cycle_lengths(), vec![2, 3]);
    }

    #[test]
    fn forced_exponent_two_reproduces_known_square() {
        let params = known_params();
        let kp = keygen_with_exponent(&params, BigUint::from(2u8)).unwrap();
        assert_eq!(
            kp.public_value(),
            &BoolMatrix::parse(&[&["010", "101"], &["100", "100"]]).unwrap()
        );
    }

    #[test]
    fn exponent_one_publishes_the_matrix_itself() {
        let params = known_params();
        let kp = keygen_with_exponent(&params, BigUint::one()).unwrap();
        assert_eq!(kp.public_value(), params.matrix());
    }

    #[test]
    fn forced_exponent_matches_telescoped_product() {
        let params = toy_params(14);
        let (m, h) = (params.matrix().clone(), params.perm().clone());
        let a = 5u64;
        let kp = keygen_with_exponent(&params, BigUint::from(a)).unwrap();
        let mut direct = h.pow_u64(a - 1).apply_matrix(&m).unwrap();
        for i in (0..a - 1).rev() {
            direct = direct.mul(&h.pow_u64(i).apply_matrix(&m).unwrap()).unwrap();
        }
        assert_eq!(kp.public_value(), &direct);
    }

    #[test]
    fn sampled_exponents_have_exact_bit_length() {
        let params = toy_params(2);
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for _ in 0..50 {
            let kp = keygen(&params, &mut rng).unwrap();
            assert_eq!(kp.private_exponent().bits(), 16);
        }
    }

    #[test]
    fn smallest_exchange_agrees_on_h_of_m_times_m() {
        let params = known_params();
        let alice = keygen_with_exponent(&params, BigUint::one()).unwrap();
        let bob = keygen_with_exponent(&params, BigUint::one()).unwrap();
        let ka = derive_shared(&params, &alice, bob.public_value()).unwrap();
        let kb = derive_shared(&params, &bob, alice.public_value()).unwrap();
        let expected = params
            .perm()
            .apply_matrix(params.matrix())
            .unwrap()
            .mul(params.matrix())
            .unwrap();
        assert_eq!(ka.matrix(), &expected);
        assert_eq!(kb.matrix(), &expected);
    }

    #[test]
    fn toy_exchanges_agree() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for seed in 0..20 {
            let params = toy_params(seed);
            let alice = keygen(&params, &mut rng).unwrap();
            let bob = keygen(&params, &mut rng).unwrap();
            let ka = derive_shared(&params, &alice, bob.public_value()).unwrap();
            let kb = derive_shared(&params, &bob, alice.public_value()).unwrap();
            assert_eq!(ka, kb);
            // the shared key is the matrix part of the (a+b)-th power
            let sum = alice.private_exponent() + bob.private_exponent();
            assert_eq!(
                ka.matrix(),
                params.generator().pow(&sum).unwrap().matrix()
            );
        }
    }

    #[test]
    fn full_size_exchange_agrees() {
        let mut rng = ChaCha12Rng::seed_from_u64(5150);
        let params = ProtocolParams::generate(ParamSpec::default(), &mut rng).unwrap();
        let alice = keygen(&params, &mut rng).unwrap();
        let bob = keygen(&params, &mut rng).unwrap();
        let ka = derive_shared(&params, &alice, bob.public_value()).unwrap();
        let kb = derive_shared(&params, &bob, alice.public_value()).unwrap();
        assert_eq!(ka, kb);
        assert_eq!(ka.digest_hex(), kb.digest_hex());
    }

    #[test]
    fn mismatched_peer_matrix_rejected() {
        let params = toy_params(1);
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let own = keygen(&params, &mut rng).unwrap();
        let wrong = BoolMatrix::zero(2, 6).unwrap();
        assert!(derive_shared(&params, &own, &wrong).is_err());
    }
}
