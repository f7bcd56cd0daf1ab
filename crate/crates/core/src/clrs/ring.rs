use std::collections::BTreeMap;
use std::fmt;

use super::{Error, Identity};
use crate::codec::{put_bytes, put_profile, put_u32, CodecError, Reader};
use crate::pairing_suite::PairingSuite;

#[derive(Clone, PartialEq, Eq)]
pub struct RingMember<S: PairingSuite> {
    pub id: Identity,
    pub index: S::G1,
}

impl<S: PairingSuite> fmt::Debug for RingMember<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)
    }
}

/// The anonymity set: identities `L` and indexes `I`, position-aligned and
/// sorted by identity bytes.
///
/// Sorting makes the ring's serialization independent of who assembled it
/// and in what order, so signer and verifier hash the same bytes.
#[derive(Clone, PartialEq, Eq)]
pub struct Ring<S: PairingSuite> {
    members: Vec<RingMember<S>>,
    /// `n ‖ (len(ID_i) ‖ ID_i ‖ encode(IND_i))*`, shared by the digest and the
    /// ring codec.
    encoded: Vec<u8>,
}

impl<S: PairingSuite> fmt::Debug for Ring<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.members).finish()
    }
}

impl<S: PairingSuite> Ring<S> {
    pub fn new(members: impl IntoIterator<Item = (Identity, S::G1)>) -> Result<Self, Error> {
        let mut sorted = BTreeMap::new();
        for (id, index) in members {
            if S::g1_is_identity(&index) {
                return Err(Error::DegenerateIndex(id));
            }
            if sorted.contains_key(&id) {
                return Err(Error::DuplicateMember(id));
            }
            sorted.insert(id, index);
        }
        if sorted.is_empty() {
            return Err(Error::EmptyRing);
        }
        let members: Vec<RingMember<S>> =
            sorted.into_iter().map(|(id, index)| RingMember { id, index }).collect();
        let mut encoded = Vec::new();
        put_u32(&mut encoded, members.len() as u32);
        for m in &members {
            put_bytes(&mut encoded, m.id.as_bytes());
            S::encode_g1(&m.index, &mut encoded);
        }
        Ok(Self { members, encoded })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[RingMember<S>] {
        &self.members
    }

    pub fn identities(&self) -> impl Iterator<Item = &Identity> {
        self.members.iter().map(|m| &m.id)
    }

    pub fn position(&self, id: &Identity) -> Option<usize> {
        self.members.binary_search_by(|m| m.id.cmp(id)).ok()
    }

    pub(crate) fn encoded_members(&self) -> &[u8] {
        &self.encoded
    }

    /// `profile ‖ n ‖ (len(ID_i) ‖ ID_i ‖ encode(IND_i))*`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded.len() + 32);
        put_profile::<S>(&mut out);
        out.extend_from_slice(&self.encoded);
        out
    }

    /// Rejects encodings that are not in canonical order.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        r.profile::<S>()?;
        let n = r.u32()? as usize;
        let mut members = Vec::new();
        for _ in 0..n {
            if r.is_empty() {
                return Err(CodecError::Truncated.into());
            }
            let id = Identity::new(r.bytes()?);
            members.push((id, r.g1::<S>()?));
        }
        r.finish()?;
        if !members.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(CodecError::Invalid("ring members not in canonical order").into());
        }
        Self::new(members)
    }
}
