use std::fmt;

use rand_core::{CryptoRng, RngCore};

use super::{Error, Identity, IDENTITY_TAG};
use crate::codec::{put_bytes, put_profile, CodecError, Reader};
use crate::counters::{NoRecord, Recorder};
use crate::pairing_suite::{
    g1_scalar_mul, hash_to_scalar, pairing, random_nonzero_scalar, FieldScalar, PairingSuite,
};

/// Public system parameters `⟨P, P_pub, g⟩` for one profile.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SystemParams<S: PairingSuite> {
    pub generator: S::G1,
    /// `P_pub = s·P`, the network manager's public key.
    pub nm_public: S::G1,
    /// `g = e(P, P)`.
    pub g: S::G2,
}

impl<S: PairingSuite> fmt::Debug for SystemParams<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemParams")
            .field("profile", &S::profile().name)
            .field("nm_public", &self.nm_public)
            .finish_non_exhaustive()
    }
}

impl<S: PairingSuite> SystemParams<S> {
    /// Checks the fixed generator, a non-trivial `P_pub` and `g = e(P, P)`.
    pub fn validate(&self) -> Result<(), Error> {
        if self.generator != S::generator() {
            return Err(Error::InvalidParams("generator differs from the profile generator"));
        }
        if S::g1_is_identity(&self.nm_public) {
            return Err(Error::InvalidParams("P_pub is the identity"));
        }
        if self.g != S::pairing(&self.generator, &self.generator) {
            return Err(Error::InvalidParams("g != e(P, P)"));
        }
        Ok(())
    }

    /// `profile ‖ P ‖ P_pub ‖ g`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_profile::<S>(&mut out);
        S::encode_g1(&self.generator, &mut out);
        S::encode_g1(&self.nm_public, &mut out);
        S::encode_g2(&self.g, &mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        r.profile::<S>()?;
        let params = Self { generator: r.g1::<S>()?, nm_public: r.g1::<S>()?, g: r.g2::<S>()? };
        r.finish()?;
        params.validate()?;
        Ok(params)
    }
}

/// The network manager's master secret `s`.
#[derive(Clone, Copy)]
pub struct NmSecret<S: PairingSuite> {
    s: S::Scalar,
}

impl<S: PairingSuite> fmt::Debug for NmSecret<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("NmSecret(..)")
    }
}

impl<S: PairingSuite> NmSecret<S> {
    pub fn from_scalar(s: S::Scalar) -> Result<Self, Error> {
        if s.is_zero() {
            return Err(Error::InvalidParams("master secret is zero"));
        }
        Ok(Self { s })
    }

    pub fn scalar(&self) -> &S::Scalar {
        &self.s
    }

    /// `s·P`.
    pub fn public(&self) -> S::G1 {
        S::g1_mul(&self.s, &S::generator())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_profile::<S>(&mut out);
        S::encode_scalar(&self.s, &mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        r.profile::<S>()?;
        let s = r.scalar::<S>()?;
        r.finish()?;
        Self::from_scalar(s)
    }
}

/// Draws `s ∈ Z_q^*` and derives the public parameters.
pub fn setup<S, R>(rng: &mut R) -> (SystemParams<S>, NmSecret<S>)
where
    S: PairingSuite,
    R: RngCore + CryptoRng + ?Sized,
{
    let secret = NmSecret { s: random_nonzero_scalar::<S, _>(rng) };
    let generator = S::generator();
    let params = SystemParams {
        generator,
        nm_public: secret.public(),
        g: S::pairing(&generator, &generator),
    };
    (params, secret)
}

/// `q_ID = h(ID)`, never zero.
pub fn identity_scalar<S: PairingSuite>(id: &Identity, rec: &mut impl Recorder) -> S::Scalar {
    hash_to_scalar::<S>(IDENTITY_TAG, id.as_bytes(), rec)
}

/// NM-issued partial private key `D = (s + q_ID)^{-1}·P`.
#[derive(Clone, PartialEq, Eq)]
pub struct PartialKey<S: PairingSuite> {
    pub id: Identity,
    pub point: S::G1,
}

impl<S: PairingSuite> fmt::Debug for PartialKey<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartialKey").field("id", &self.id).finish_non_exhaustive()
    }
}

impl<S: PairingSuite> PartialKey<S> {
    /// `e(D, P_pub + q_ID·P) = g`. Returns `P_pub + q_ID·P` and `q_ID` on
    /// success so key generation can reuse them.
    fn check(
        &self,
        params: &SystemParams<S>,
        rec: &mut impl Recorder,
    ) -> Result<(S::G1, S::Scalar), Error> {
        let q_id = identity_scalar::<S>(&self.id, rec);
        let shifted =
            S::g1_add(&params.nm_public, &g1_scalar_mul::<S>(&q_id, &params.generator, rec));
        if pairing::<S>(&self.point, &shifted, rec) != params.g {
            return Err(Error::InvalidPartialKey);
        }
        Ok((shifted, q_id))
    }

    pub fn validate(&self, params: &SystemParams<S>) -> Result<(), Error> {
        self.check(params, &mut NoRecord).map(|_| ())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_profile::<S>(&mut out);
        put_bytes(&mut out, self.id.as_bytes());
        S::encode_g1(&self.point, &mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        r.profile::<S>()?;
        let id = Identity::new(r.bytes()?);
        let point = r.g1::<S>()?;
        r.finish()?;
        Ok(Self { id, point })
    }
}

/// Computes `D = (s + q_ID)^{-1}·P`.
pub fn extract_partial_key<S: PairingSuite>(
    nm: &NmSecret<S>,
    params: &SystemParams<S>,
    id: &Identity,
    rec: &mut impl Recorder,
) -> Result<PartialKey<S>, Error> {
    let q_id = identity_scalar::<S>(id, rec);
    let inv = (nm.s + q_id).invert().map_err(|_| Error::DegenerateIdentity(id.clone()))?;
    Ok(PartialKey { id: id.clone(), point: g1_scalar_mul::<S>(&inv, &params.generator, rec) })
}

/// A client's full key material. `secret` and `signing_key` never leave the
/// client; [`ClientKeyMaterial::public`] is what gets shared.
#[derive(Clone, PartialEq, Eq)]
pub struct ClientKeyMaterial<S: PairingSuite> {
    pub id: Identity,
    secret: S::Scalar,
    signing_key: S::G1,
    /// `R = x^{-1}·(P_pub + q_ID·P)`.
    pub public_key: S::G1,
    /// `IND = q_ID·R`.
    pub index: S::G1,
}

impl<S: PairingSuite> fmt::Debug for ClientKeyMaterial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClientKeyMaterial")
            .field("id", &self.id)
            .field("public_key", &self.public_key)
            .field("index", &self.index)
            .finish_non_exhaustive()
    }
}

impl<S: PairingSuite> ClientKeyMaterial<S> {
    /// The full private key `S`.
    pub fn signing_key(&self) -> &S::G1 {
        &self.signing_key
    }

    pub fn public(&self) -> ClientPublicKey<S> {
        ClientPublicKey { id: self.id.clone(), public_key: self.public_key, index: self.index }
    }

    /// Checks `e(S, IND) = g`, `IND = q_ID·R` and `x·R = P_pub + q_ID·P`.
    pub fn validate(&self, params: &SystemParams<S>) -> Result<(), Error> {
        let q_id = identity_scalar::<S>(&self.id, &mut NoRecord);
        let shifted = S::g1_add(&params.nm_public, &S::g1_mul(&q_id, &params.generator));
        let consistent = S::pairing(&self.signing_key, &self.index) == params.g
            && S::g1_mul(&q_id, &self.public_key) == self.index
            && S::g1_mul(&self.secret, &self.public_key) == shifted;
        if consistent {
            Ok(())
        } else {
            Err(Error::InconsistentKey)
        }
    }

    /// `profile ‖ id ‖ x ‖ S ‖ R ‖ IND`. Contains secrets.
    pub fn to_secret_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_profile::<S>(&mut out);
        put_bytes(&mut out, self.id.as_bytes());
        S::encode_scalar(&self.secret, &mut out);
        S::encode_g1(&self.signing_key, &mut out);
        S::encode_g1(&self.public_key, &mut out);
        S::encode_g1(&self.index, &mut out);
        out
    }

    /// Decodes and re-validates against `params`.
    pub fn from_secret_bytes(bytes: &[u8], params: &SystemParams<S>) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        r.profile::<S>()?;
        let id = Identity::new(r.bytes()?);
        let secret = r.scalar::<S>()?;
        let key = Self {
            id,
            secret,
            signing_key: r.g1::<S>()?,
            public_key: r.g1::<S>()?,
            index: r.g1::<S>()?,
        };
        r.finish()?;
        key.validate(params)?;
        Ok(key)
    }
}

/// The shareable half of [`ClientKeyMaterial`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientPublicKey<S: PairingSuite> {
    pub id: Identity,
    pub public_key: S::G1,
    pub index: S::G1,
}

impl<S: PairingSuite> ClientPublicKey<S> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_profile::<S>(&mut out);
        put_bytes(&mut out, self.id.as_bytes());
        S::encode_g1(&self.public_key, &mut out);
        S::encode_g1(&self.index, &mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        r.profile::<S>()?;
        let id = Identity::new(r.bytes()?);
        let key = Self { id, public_key: r.g1::<S>()?, index: r.g1::<S>()? };
        r.finish()?;
        Ok(key)
    }
}

/// Validates `D`, draws `x ∈ Z_q^*` and derives `S`, `R` and `IND`.
pub fn client_keygen<S, R>(
    params: &SystemParams<S>,
    partial: &PartialKey<S>,
    rng: &mut R,
    rec: &mut impl Recorder,
) -> Result<ClientKeyMaterial<S>, Error>
where
    S: PairingSuite,
    R: RngCore + CryptoRng + ?Sized,
{
    let (shifted, q_id) = partial.check(params, rec)?;
    let secret = random_nonzero_scalar::<S, _>(rng);
    let q_inv = q_id.invert().expect("h(ID) is never zero");
    let x_inv = secret.invert().expect("x is drawn nonzero");
    let signing_key = g1_scalar_mul::<S>(&(secret * q_inv), &partial.point, rec);
    let public_key = g1_scalar_mul::<S>(&x_inv, &shifted, rec);
    let index = g1_scalar_mul::<S>(&q_id, &public_key, rec);
    Ok(ClientKeyMaterial { id: partial.id.clone(), secret, signing_key, public_key, index })
}
