//! Arithmetic contract over a pairing-friendly group pair.
//!
//! The scheme is written against a symmetric pairing `e: G1 × G1 → G2` with
//! `G1` additive and `G2` multiplicative, both of prime order `q`. A backend
//! implements [`PairingSuite`]; everything above this module is generic over
//! it. Two backends ship:
//!
//! * [`Bls12`]: the default profile. BLS12-381 is asymmetric, so a source
//!   group element is carried as its image in both BLS groups (see the
//!   module docs of [`bls`]).
//! * [`ToyTypeA`]: a tiny supersingular curve `y² = x³ + x` with a
//!   distortion-map Tate pairing, small enough for exhaustive checks.
//!
//! The trait methods are raw and uncounted. The free functions in this module
//! ([`g1_scalar_mul`], [`pairing`], [`pairing_product`], [`g2_exp`],
//! [`hash_to_scalar`]) are the instrumented entry points the scheme uses.

pub mod bls;
pub mod toy;

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha512};
use thiserror::Error;

use crate::counters::{Op, Recorder};

pub use bls::Bls12;
pub use toy::ToyTypeA;

/// Static description of a concrete parameter set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteProfile {
    /// Recorded in every serialized artifact.
    pub name: &'static str,
    /// `l` such that `q > 2^l`.
    pub security_level_bits: u32,
    /// Group order `q`, big-endian hex without prefix.
    pub order_hex: &'static str,
    pub scalar_len: usize,
    pub g1_len: usize,
    pub g2_len: usize,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum DecodeError {
    #[error("malformed encoding: {0}")]
    MalformedEncoding(&'static str),
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("element is outside the prime-order subgroup")]
    WrongSubgroup,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("division by zero")]
pub struct DivisionByZero;

/// Residues modulo the group order `q`.
pub trait FieldScalar:
    Copy
    + Eq
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(v: u64) -> Self;
    fn is_zero(&self) -> bool;
    fn invert(&self) -> Result<Self, DivisionByZero>;
    /// Uniform over `[0, q)`.
    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self;
}

/// A concrete pairing backend. Implementors are zero-sized marker types.
pub trait PairingSuite: Copy + Debug + Default + Eq + Send + Sync + 'static {
    type Scalar: FieldScalar;
    /// Additive source group.
    type G1: Copy + Eq + Debug + Send + Sync + 'static;
    /// Multiplicative target group.
    type G2: Copy + Eq + Debug + Send + Sync + 'static;

    fn profile() -> &'static SuiteProfile;

    /// The generator `P`.
    fn generator() -> Self::G1;
    fn g1_identity() -> Self::G1;
    fn g1_is_identity(p: &Self::G1) -> bool {
        *p == Self::g1_identity()
    }
    fn g1_add(a: &Self::G1, b: &Self::G1) -> Self::G1;
    fn g1_neg(a: &Self::G1) -> Self::G1;
    fn g1_mul(k: &Self::Scalar, p: &Self::G1) -> Self::G1;

    fn pairing(a: &Self::G1, b: &Self::G1) -> Self::G2;
    /// `Π e(a_i, b_i)`. Backends may share work across terms.
    fn multi_pairing(terms: &[(Self::G1, Self::G1)]) -> Self::G2 {
        terms
            .iter()
            .fold(Self::g2_identity(), |acc, (a, b)| Self::g2_mul(&acc, &Self::pairing(a, b)))
    }

    fn g2_identity() -> Self::G2;
    fn g2_mul(a: &Self::G2, b: &Self::G2) -> Self::G2;
    fn g2_exp(base: &Self::G2, k: &Self::Scalar) -> Self::G2;

    fn encode_scalar(k: &Self::Scalar, out: &mut Vec<u8>);
    fn decode_scalar(bytes: &[u8]) -> Result<Self::Scalar, DecodeError>;
    /// Compressed form with an explicit infinity flag.
    fn encode_g1(p: &Self::G1, out: &mut Vec<u8>);
    /// Performs on-curve and subgroup checks.
    fn decode_g1(bytes: &[u8]) -> Result<Self::G1, DecodeError>;
    fn encode_g2(z: &Self::G2, out: &mut Vec<u8>);
    fn decode_g2(bytes: &[u8]) -> Result<Self::G2, DecodeError>;
}

pub type Scalar<S> = <S as PairingSuite>::Scalar;
pub type G1<S> = <S as PairingSuite>::G1;
pub type G2<S> = <S as PairingSuite>::G2;

pub fn g1_bytes<S: PairingSuite>(p: &S::G1) -> Vec<u8> {
    let mut out = Vec::with_capacity(S::profile().g1_len);
    S::encode_g1(p, &mut out);
    out
}

pub fn g2_bytes<S: PairingSuite>(z: &S::G2) -> Vec<u8> {
    let mut out = Vec::with_capacity(S::profile().g2_len);
    S::encode_g2(z, &mut out);
    out
}

pub fn scalar_bytes<S: PairingSuite>(k: &S::Scalar) -> Vec<u8> {
    let mut out = Vec::with_capacity(S::profile().scalar_len);
    S::encode_scalar(k, &mut out);
    out
}

/// Uniform draw from `Z_q^*`, resampling on zero.
pub fn random_nonzero_scalar<S, R>(rng: &mut R) -> S::Scalar
where
    S: PairingSuite,
    R: RngCore + CryptoRng + ?Sized,
{
    loop {
        let k = S::Scalar::random(rng);
        if !k.is_zero() {
            return k;
        }
    }
}

/// `k·U`, counted as one SM.
pub fn g1_scalar_mul<S: PairingSuite>(
    k: &S::Scalar,
    u: &S::G1,
    rec: &mut impl Recorder,
) -> S::G1 {
    rec.record(Op::ScalarMul, 1);
    S::g1_mul(k, u)
}

/// `e(U, V)`, counted as one BP.
pub fn pairing<S: PairingSuite>(u: &S::G1, v: &S::G1, rec: &mut impl Recorder) -> S::G2 {
    rec.record(Op::Pairing, 1);
    S::pairing(u, v)
}

/// `Π e(U_i, V_i)`, counted as one BP per term whatever the backend does
/// internally.
pub fn pairing_product<S: PairingSuite>(
    terms: &[(S::G1, S::G1)],
    rec: &mut impl Recorder,
) -> S::G2 {
    rec.record(Op::Pairing, terms.len() as u64);
    S::multi_pairing(terms)
}

/// `base^k`, counted as one EXP.
pub fn g2_exp<S: PairingSuite>(base: &S::G2, k: &S::Scalar, rec: &mut impl Recorder) -> S::G2 {
    rec.record(Op::Exp, 1);
    S::g2_exp(base, k)
}

/// Deterministic hash onto `Z_q^*`, counted as one Hash.
///
/// SHA-512 over `len(tag) ‖ tag ‖ payload ‖ counter`, reduced mod `q`. A zero
/// reduction bumps the counter and retries.
pub fn hash_to_scalar<S: PairingSuite>(
    domain_tag: &[u8],
    payload: &[u8],
    rec: &mut impl Recorder,
) -> S::Scalar {
    rec.record(Op::Hash, 1);
    let mut prefix = Sha512::new();
    prefix.update((domain_tag.len() as u32).to_be_bytes());
    prefix.update(domain_tag);
    prefix.update(payload);
    for counter in 0u32.. {
        let mut h = prefix.clone();
        h.update(counter.to_be_bytes());
        let k = reduce_wide::<S>(&h.finalize());
        if !k.is_zero() {
            return k;
        }
    }
    unreachable!("hash_to_scalar exhausted its retry counter")
}

/// Big-endian bytes interpreted as an integer, reduced mod `q`.
pub(crate) fn reduce_wide<S: PairingSuite>(bytes: &[u8]) -> S::Scalar {
    bytes.chunks(4).fold(S::Scalar::zero(), |acc, chunk| {
        let limb = chunk.iter().fold(0u64, |l, &b| (l << 8) | u64::from(b));
        acc * S::Scalar::from_u64(1 << (8 * chunk.len())) + S::Scalar::from_u64(limb)
    })
}
