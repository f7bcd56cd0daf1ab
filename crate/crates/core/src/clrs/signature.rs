use std::fmt;

use rand_core::{CryptoRng, RngCore};

use super::{ClientKeyMaterial, Error, Ring, SystemParams, MESSAGE_TAG};
use crate::codec::{put_profile, put_u32, put_u64, CodecError, Reader};
use crate::counters::Recorder;
use crate::pairing_suite::{
    g1_scalar_mul, g2_exp, hash_to_scalar, pairing, pairing_product, random_nonzero_scalar,
    FieldScalar, PairingSuite,
};

/// `σ = {u, V_1..V_n}` together with the timestamp it binds.
#[derive(Clone, PartialEq, Eq)]
pub struct RingSignature<S: PairingSuite> {
    pub u: S::G2,
    /// Aligned with the ring's canonical order.
    pub v: Vec<S::G1>,
    /// Seconds since the Unix epoch, UTC.
    pub t: u64,
}

impl<S: PairingSuite> fmt::Debug for RingSignature<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RingSignature").field("t", &self.t).field("n", &self.v.len()).finish()
    }
}

impl<S: PairingSuite> RingSignature<S> {
    /// `profile ‖ t ‖ encode(u) ‖ n ‖ encode(V_1) … encode(V_n)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let p = S::profile();
        let mut out = Vec::with_capacity(32 + p.g2_len + self.v.len() * p.g1_len);
        put_profile::<S>(&mut out);
        put_u64(&mut out, self.t);
        S::encode_g2(&self.u, &mut out);
        put_u32(&mut out, self.v.len() as u32);
        for v in &self.v {
            S::encode_g1(v, &mut out);
        }
        out
    }

    /// Every `V_i` passes the curve and subgroup checks on the way in.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        r.profile::<S>()?;
        let t = r.u64()?;
        let u = r.g2::<S>()?;
        let n = r.u32()? as usize;
        let mut v = Vec::new();
        for _ in 0..n {
            v.push(r.g1::<S>()?);
        }
        r.finish()?;
        Ok(Self { u, v, t })
    }
}

/// `h(data, t, u, L, I)` over
/// `len(data) ‖ data ‖ t ‖ encode(u) ‖ n ‖ (len(ID_i) ‖ ID_i ‖ encode(IND_i))*`.
pub fn message_digest<S: PairingSuite>(
    data: &[u8],
    t: u64,
    u: &S::G2,
    ring: &Ring<S>,
    rec: &mut impl Recorder,
) -> S::Scalar {
    let members = ring.encoded_members();
    let mut payload = Vec::with_capacity(data.len() + members.len() + S::profile().g2_len + 16);
    put_u64(&mut payload, data.len() as u64);
    payload.extend_from_slice(data);
    put_u64(&mut payload, t);
    S::encode_g2(u, &mut payload);
    payload.extend_from_slice(members);
    hash_to_scalar::<S>(MESSAGE_TAG, &payload, rec)
}

/// Signs `data` at time `t` on behalf of `ring`, as the member at
/// `signer_pos` holding `key`.
///
/// Costs exactly 1 BP, `2n − 1` SM, 1 EXP and 1 Hash: the decoy terms are
/// folded into a single pairing `e(P, Σ v_i·IND_i)`.
#[allow(clippy::too_many_arguments)]
pub fn sign<S, R>(
    params: &SystemParams<S>,
    ring: &Ring<S>,
    signer_pos: usize,
    key: &ClientKeyMaterial<S>,
    data: &[u8],
    t: u64,
    rng: &mut R,
    rec: &mut impl Recorder,
) -> Result<RingSignature<S>, Error>
where
    S: PairingSuite,
    R: RngCore + CryptoRng + ?Sized,
{
    let n = ring.len();
    let signer = ring.members().get(signer_pos).ok_or(Error::IndexOutOfRange { pos: signer_pos, n })?;
    if signer.id != key.id || signer.index != key.index {
        return Err(Error::KeyRingMismatch(signer_pos));
    }

    let mut v = Vec::with_capacity(n);
    let mut decoys = S::g1_identity();
    for (i, member) in ring.members().iter().enumerate() {
        if i == signer_pos {
            // filled in once h is known
            v.push(S::g1_identity());
            continue;
        }
        let v_i = random_nonzero_scalar::<S, _>(rng);
        v.push(g1_scalar_mul::<S>(&v_i, &params.generator, rec));
        decoys = S::g1_add(&decoys, &g1_scalar_mul::<S>(&v_i, &member.index, rec));
    }
    let masked = pairing::<S>(&params.generator, &decoys, rec);

    loop {
        let r = random_nonzero_scalar::<S, _>(rng);
        let u = S::g2_mul(&g2_exp::<S>(&params.g, &r, rec), &masked);
        let h = message_digest(data, t, &u, ring, rec);
        let exponent = h + r;
        // h + r = 0 would make V_â the identity and expose the signer slot.
        if exponent.is_zero() {
            continue;
        }
        v[signer_pos] = g1_scalar_mul::<S>(&exponent, key.signing_key(), rec);
        return Ok(RingSignature { u, v, t });
    }
}

/// Accepts iff `g^h · u = Π e(V_i, IND_i)`.
///
/// Costs exactly `n` BP, 1 EXP and 1 Hash. The timestamp is only bound into
/// `h`; freshness is the caller's policy.
pub fn verify<S: PairingSuite>(
    params: &SystemParams<S>,
    ring: &Ring<S>,
    data: &[u8],
    sig: &RingSignature<S>,
    rec: &mut impl Recorder,
) -> Result<(), Error> {
    if sig.v.len() != ring.len() {
        return Err(Error::LengthMismatch { expected: ring.len(), found: sig.v.len() });
    }
    let h = message_digest(data, sig.t, &sig.u, ring, rec);
    let lhs = S::g2_mul(&g2_exp::<S>(&params.g, &h, rec), &sig.u);
    let terms: Vec<(S::G1, S::G1)> =
        sig.v.iter().zip(ring.members()).map(|(v, m)| (*v, m.index)).collect();
    let rhs = pairing_product::<S>(&terms, rec);
    if lhs == rhs {
        Ok(())
    } else {
        Err(Error::BadSignature)
    }
}
