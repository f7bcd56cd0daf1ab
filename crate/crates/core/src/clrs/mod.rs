//! Certificateless ring signatures over a symmetric pairing.
//!
//! Roles and flow:
//!
//! 1. The network manager runs [`setup`], keeping `s` and publishing
//!    `P_pub = s·P` and `g = e(P, P)`.
//! 2. For each identity it issues a partial key `D = (s + q_ID)^{-1}·P` with
//!    `q_ID = h(ID)` ([`extract_partial_key`]).
//! 3. The client validates `D`, draws its own secret `x` and derives the full
//!    private key `S = (x / q_ID)·D`, public key `R = x^{-1}·(P_pub + q_ID·P)`
//!    and index `IND = q_ID·R` ([`client_keygen`]). By construction
//!    `e(S, IND) = g`.
//! 4. Any member of a [`Ring`] can [`sign`]; anyone holding the ring can
//!    [`verify`] by checking `g^h · u = Π e(V_i, IND_i)`.
//!
//! Every operation that touches a counted primitive takes a
//! [`Recorder`](crate::counters::Recorder).

mod keys;
mod ring;
mod signature;

use std::fmt;

use thiserror::Error;

use crate::codec::CodecError;

pub use keys::{
    client_keygen, extract_partial_key, identity_scalar, setup, ClientKeyMaterial,
    ClientPublicKey, NmSecret, PartialKey, SystemParams,
};
pub use ring::{Ring, RingMember};
pub use signature::{message_digest, sign, verify, RingSignature};

/// Domain tag for `q_ID = h(ID)`.
pub const IDENTITY_TAG: &[u8] = b"EPDA-v1/identity";
/// Domain tag for `h(data, t, u, L, I)`.
pub const MESSAGE_TAG: &[u8] = b"EPDA-v1/message";

/// Client identity as an opaque byte string. Orders lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Identity(Vec<u8>);

impl Identity {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        Self(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl From<&str> for Identity {
    fn from(s: &str) -> Self {
        Self(s.as_bytes().to_vec())
    }
}

impl From<String> for Identity {
    fn from(s: String) -> Self {
        Self(s.into_bytes())
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match std::str::from_utf8(&self.0) {
            Ok(s) if !s.chars().any(char::is_control) => f.write_str(s),
            _ => self.0.iter().try_for_each(|b| write!(f, "{b:02x}")),
        }
    }
}

impl fmt::Debug for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Identity({self})")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("identity {0} hashes to -s; it cannot be registered")]
    DegenerateIdentity(Identity),
    #[error("partial key fails the pairing validity check")]
    InvalidPartialKey,
    #[error("key material is inconsistent with the system parameters")]
    InconsistentKey,
    #[error("system parameters are inconsistent: {0}")]
    InvalidParams(&'static str),
    #[error("signer position {pos} is out of range for a ring of {n}")]
    IndexOutOfRange { pos: usize, n: usize },
    #[error("signing key does not belong to ring position {0}")]
    KeyRingMismatch(usize),
    #[error("signature carries {found} components for a ring of {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("signature equation does not hold")]
    BadSignature,
    #[error("a ring needs at least one member")]
    EmptyRing,
    #[error("identity {0} appears more than once in the ring")]
    DuplicateMember(Identity),
    #[error("ring member {0} has the identity point as index")]
    DegenerateIndex(Identity),
    #[error(transparent)]
    Codec(#[from] CodecError),
}
