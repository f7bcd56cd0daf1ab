use rand::seq::SliceRandom;
use rand_core::{CryptoRng, RngCore};
use thiserror::Error;

use super::roster::RosterSnapshot;
use super::sp::SensingReport;
use super::transport::{Transport, TransportError};
use super::wire::{Decision, Message, WireError};
use super::RejectReason;
use crate::clrs::{self, client_keygen, sign, ClientKeyMaterial, Identity, Ring, SystemParams};
use crate::counters::NoRecord;
use crate::pairing_suite::PairingSuite;

#[derive(Debug, Error)]
pub enum ClientError {
    /// The request never got a well-formed answer.
    #[error(transparent)]
    Transport(#[from] TransportError),
    /// The peer answered and said no.
    #[error("rejected: {0}")]
    Rejected(RejectReason),
    /// Local key or signature handling failed; nothing was sent.
    #[error(transparent)]
    Scheme(#[from] clrs::Error),
    #[error("unexpected reply: {0}")]
    UnexpectedReply(&'static str),
    #[error("roster has {available} other members, ring of {requested} requested")]
    RosterTooSmall { requested: usize, available: usize },
    #[error("own identity is not on the roster with the expected index")]
    NotOnRoster,
}

impl From<WireError> for ClientError {
    fn from(e: WireError) -> Self {
        ClientError::Transport(TransportError::Malformed(e))
    }
}

fn call<S: PairingSuite>(peer: &dyn Transport, msg: Message<S>) -> Result<Message<S>, ClientError> {
    let reply = peer.exchange(&msg.to_frame())?;
    Ok(Message::from_frame(&reply)?)
}

fn expect_accept<S: PairingSuite>(reply: Message<S>) -> Result<(), ClientError> {
    match reply {
        Message::Decision(Decision::Accept) => Ok(()),
        Message::Decision(Decision::Reject(r)) => Err(ClientError::Rejected(r)),
        _ => Err(ClientError::UnexpectedReply("expected a decision")),
    }
}

/// Runs both registration phases against the network manager.
pub fn register<S, R>(
    nm: &dyn Transport,
    params: &SystemParams<S>,
    id: &Identity,
    rng: &mut R,
) -> Result<ClientKeyMaterial<S>, ClientError>
where
    S: PairingSuite,
    R: RngCore + CryptoRng + ?Sized,
{
    let partial = match call::<S>(nm, Message::RegisterId(id.clone()))? {
        Message::PartialKey(d) if d.id == *id => d,
        Message::PartialKey(_) => return Err(ClientError::UnexpectedReply("partial key for another identity")),
        Message::Decision(Decision::Reject(r)) => return Err(ClientError::Rejected(r)),
        _ => return Err(ClientError::UnexpectedReply("expected a partial key")),
    };
    let key = client_keygen(params, &partial, rng, &mut NoRecord)?;
    expect_accept(call::<S>(nm, Message::PublicKey { id: id.clone(), public_key: key.public_key })?)?;
    Ok(key)
}

/// Reads the provider's published roster.
pub fn fetch_roster<S: PairingSuite>(sp: &dyn Transport) -> Result<RosterSnapshot<S>, ClientError> {
    match call::<S>(sp, Message::RosterQuery)? {
        Message::Roster(snapshot) => Ok(snapshot),
        Message::Decision(Decision::Reject(r)) => Err(ClientError::Rejected(r)),
        _ => Err(ClientError::UnexpectedReply("expected a roster")),
    }
}

/// Builds a ring of `n` members: `key`'s own entry plus `n − 1` others drawn
/// uniformly from the roster.
pub fn select_ring<S, R>(
    roster: &RosterSnapshot<S>,
    key: &ClientKeyMaterial<S>,
    n: usize,
    rng: &mut R,
) -> Result<Ring<S>, ClientError>
where
    S: PairingSuite,
    R: RngCore + ?Sized,
{
    if roster.get(&key.id) != Some(&key.index) {
        return Err(ClientError::NotOnRoster);
    }
    let others: Vec<&(Identity, S::G1)> = roster.entries.iter().filter(|(id, _)| *id != key.id).collect();
    let wanted = n.saturating_sub(1);
    if others.len() < wanted {
        return Err(ClientError::RosterTooSmall { requested: n, available: others.len() });
    }
    let chosen = others.choose_multiple(rng, wanted).map(|e| (e.0.clone(), e.1));
    Ok(Ring::new(std::iter::once((key.id.clone(), key.index)).chain(chosen))?)
}

/// Signs `data` at time `t` and submits it. A ring that does not contain
/// `key` fails locally with `KeyRingMismatch` before anything is sent.
#[allow(clippy::too_many_arguments)]
pub fn upload<S, R>(
    sp: &dyn Transport,
    params: &SystemParams<S>,
    ring: &Ring<S>,
    key: &ClientKeyMaterial<S>,
    data: &[u8],
    t: u64,
    rng: &mut R,
) -> Result<(), ClientError>
where
    S: PairingSuite,
    R: RngCore + CryptoRng + ?Sized,
{
    let pos = ring
        .members()
        .binary_search_by(|m| m.id.cmp(&key.id))
        .map_err(clrs::Error::KeyRingMismatch)?;
    let signature = sign(params, ring, pos, key, data, t, rng, &mut NoRecord)?;
    let report = SensingReport { ring: ring.clone(), data: data.to_vec(), signature };
    expect_accept(call::<S>(sp, Message::Upload(report))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clrs::setup;
    use crate::pairing_suite::ToyTypeA;
    use crate::protocol::{FreshnessPolicy, InProcess, NetworkManager, ServiceProvider};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::sync::Arc;

    type S = ToyTypeA;

    struct Net {
        params: SystemParams<S>,
        nm: InProcess<NetworkManager<S>>,
        sp: Arc<ServiceProvider<S>>,
        sp_link: InProcess<ServiceProvider<S>>,
    }

    fn net(seed: u64) -> Net {
        let (params, secret) = setup::<S, _>(&mut ChaCha20Rng::seed_from_u64(seed));
        let sp = Arc::new(ServiceProvider::new(params, FreshnessPolicy::default()).with_clock(|| 500));
        let nm = Arc::new(NetworkManager::new(params, secret));
        nm.subscribe(Arc::new(InProcess::new(Arc::clone(&sp))));
        Net { params, nm: InProcess::new(nm), sp_link: InProcess::new(Arc::clone(&sp)), sp }
    }

    #[test]
    fn register_select_upload() {
        let n = net(1);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let keys: Vec<_> = (0..6)
            .map(|i| register::<S, _>(&n.nm, &n.params, &format!("dev{i}").into(), &mut rng).unwrap())
            .collect();
        assert_eq!(n.sp.roster_version(), 6);
        let roster = fetch_roster::<S>(&n.sp_link).unwrap();
        let ring = select_ring(&roster, &keys[2], 5, &mut rng).unwrap();
        assert_eq!(ring.len(), 5);
        assert!(ring.position(&keys[2].id).is_some());
        upload(&n.sp_link, &n.params, &ring, &keys[2], b"temp=21", 500, &mut rng).unwrap();
        assert_eq!(n.sp.accepted_count(), 1);

        let err = select_ring(&roster, &keys[2], 7, &mut rng).unwrap_err();
        assert!(matches!(err, ClientError::RosterTooSmall { requested: 7, available: 5 }));
    }

    #[test]
    fn ring_without_self_fails_before_sending() {
        let n = net(3);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let a = register::<S, _>(&n.nm, &n.params, &"a".into(), &mut rng).unwrap();
        let b = register::<S, _>(&n.nm, &n.params, &"b".into(), &mut rng).unwrap();
        let ring = Ring::new([(b.id.clone(), b.index)]).unwrap();
        let err = upload(&n.sp_link, &n.params, &ring, &a, b"x", 500, &mut rng).unwrap_err();
        assert!(matches!(err, ClientError::Scheme(clrs::Error::KeyRingMismatch(_))));
        assert_eq!(n.sp.accepted_count(), 0);
    }

    #[test]
    fn rejections_surface_distinctly() {
        let n = net(5);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        register::<S, _>(&n.nm, &n.params, &"a".into(), &mut rng).unwrap();
        let err = register::<S, _>(&n.nm, &n.params, &"a".into(), &mut rng).unwrap_err();
        assert!(matches!(err, ClientError::Rejected(RejectReason::DuplicateIdentity)));
    }
}
