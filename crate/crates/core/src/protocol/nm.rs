use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use parking_lot::Mutex;

use super::roster::RosterPush;
use super::transport::{Service, Transport};
use super::wire::{Decision, Frame, Message, WireError};
use super::RejectReason;
use crate::clrs::{self, extract_partial_key, identity_scalar, Identity, NmSecret, PartialKey, SystemParams};
use crate::codec::CodecError;
use crate::counters::NoRecord;
use crate::pairing_suite::PairingSuite;

/// What the manager keeps per registered client.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NmRecord<S: PairingSuite> {
    pub id: Identity,
    pub public_key: S::G1,
    /// Always recomputed as `q_ID·R` here, never taken from the client.
    pub index: S::G1,
}

#[derive(Default)]
struct State<S: PairingSuite> {
    pending: HashSet<Identity>,
    records: BTreeMap<Identity, NmRecord<S>>,
}

/// Registration authority.
///
/// Re-registration of an identity, including one whose first phase is
/// still pending, is refused; key rotation means a new identity.
pub struct NetworkManager<S: PairingSuite> {
    params: SystemParams<S>,
    secret: NmSecret<S>,
    state: Mutex<State<S>>,
    subscribers: Mutex<Vec<Arc<dyn Transport>>>,
}

impl<S: PairingSuite> NetworkManager<S> {
    pub fn new(params: SystemParams<S>, secret: NmSecret<S>) -> Self {
        Self {
            params,
            secret,
            state: Mutex::new(State { pending: HashSet::new(), records: BTreeMap::new() }),
            subscribers: Mutex::new(Vec::new()),
        }
    }

    pub fn params(&self) -> &SystemParams<S> {
        &self.params
    }

    /// Adds a provider to push to, first bringing it up to date with every
    /// existing record.
    pub fn subscribe(&self, sp: Arc<dyn Transport>) {
        let backlog: Vec<RosterPush<S>> = self
            .state
            .lock()
            .records
            .values()
            .map(|r| RosterPush { id: r.id.clone(), index: r.index })
            .collect();
        for push in &backlog {
            deliver(sp.as_ref(), push);
        }
        self.subscribers.lock().push(sp);
    }

    /// Issues `D` for a new identity.
    pub fn register_phase1(&self, id: &Identity) -> Result<PartialKey<S>, RejectReason> {
        let mut state = self.state.lock();
        if state.records.contains_key(id) || state.pending.contains(id) {
            return Err(RejectReason::DuplicateIdentity);
        }
        let partial = extract_partial_key(&self.secret, &self.params, id, &mut NoRecord).map_err(|e| match e {
            clrs::Error::DegenerateIdentity(_) => RejectReason::DegenerateIdentity,
            _ => RejectReason::MalformedElement,
        })?;
        state.pending.insert(id.clone());
        Ok(partial)
    }

    /// Accepts `R`, derives `IND = q_ID·R`, records the client and pushes
    /// `⟨ID, IND⟩` to every subscriber.
    pub fn register_phase2(&self, id: &Identity, public_key: &S::G1) -> Result<RosterPush<S>, RejectReason> {
        if S::g1_is_identity(public_key) {
            return Err(RejectReason::MalformedElement);
        }
        let push = {
            let mut state = self.state.lock();
            if !state.pending.contains(id) {
                return Err(if state.records.contains_key(id) {
                    RejectReason::DuplicateIdentity
                } else {
                    RejectReason::UnknownIdentity
                });
            }
            let q_id = identity_scalar::<S>(id, &mut NoRecord);
            let index = S::g1_mul(&q_id, public_key);
            state.pending.remove(id);
            state
                .records
                .insert(id.clone(), NmRecord { id: id.clone(), public_key: *public_key, index });
            RosterPush { id: id.clone(), index }
        };
        log::info!("registered {}", push.id);
        let subscribers: Vec<Arc<dyn Transport>> = self.subscribers.lock().clone();
        for sp in &subscribers {
            deliver(sp.as_ref(), &push);
        }
        Ok(push)
    }

    pub fn record(&self, id: &Identity) -> Option<NmRecord<S>> {
        self.state.lock().records.get(id).cloned()
    }

    pub fn records(&self) -> Vec<NmRecord<S>> {
        self.state.lock().records.values().cloned().collect()
    }
}

fn deliver<S: PairingSuite>(sp: &dyn Transport, push: &RosterPush<S>) {
    match sp.exchange(&Message::RosterPush(push.clone()).to_frame()).map(|f| Message::<S>::from_frame(&f)) {
        Ok(Ok(Message::Decision(Decision::Accept))) => {}
        Ok(Ok(Message::Decision(Decision::Reject(r)))) => log::warn!("push of {} refused: {r}", push.id),
        Ok(other) => log::warn!("push of {} got an unexpected reply: {other:?}", push.id),
        Err(e) => log::warn!("push of {} failed: {e}", push.id),
    }
}

/// Maps a frame decode failure to the reason reported back.
pub(super) fn malformed(e: &WireError, otherwise: RejectReason) -> RejectReason {
    match e {
        WireError::Codec(CodecError::Element(_)) | WireError::Scheme(clrs::Error::Codec(CodecError::Element(_))) => {
            RejectReason::MalformedElement
        }
        _ => otherwise,
    }
}

impl<S: PairingSuite> Service for NetworkManager<S> {
    fn handle(&self, request: Frame) -> Frame {
        let reply = match Message::<S>::from_frame(&request) {
            Ok(Message::RegisterId(id)) => match self.register_phase1(&id) {
                Ok(partial) => Message::PartialKey(partial),
                Err(r) => Message::Decision(Decision::Reject(r)),
            },
            Ok(Message::PublicKey { id, public_key }) => {
                Message::Decision(self.register_phase2(&id, &public_key).map(|_| ()).into())
            }
            Ok(_) => Message::Decision(Decision::Reject(RejectReason::UnexpectedMessage)),
            Err(e) => {
                log::debug!("malformed {:?} frame: {e}", request.kind);
                Message::Decision(Decision::Reject(malformed(&e, RejectReason::MalformedReport)))
            }
        };
        reply.to_frame()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clrs::{client_keygen, setup};
    use crate::pairing_suite::{FieldScalar, ToyTypeA};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    type S = ToyTypeA;

    fn manager(seed: u64) -> NetworkManager<S> {
        let (params, secret) = setup(&mut ChaCha20Rng::seed_from_u64(seed));
        NetworkManager::new(params, secret)
    }

    #[test]
    fn two_phase_registration_recomputes_index() {
        let nm = manager(1);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let id = Identity::from("alice");
        let d = nm.register_phase1(&id).unwrap();
        d.validate(nm.params()).unwrap();
        let key = client_keygen(nm.params(), &d, &mut rng, &mut NoRecord).unwrap();
        let push = nm.register_phase2(&id, &key.public_key).unwrap();
        assert_eq!(push.index, key.index);
        assert_eq!(nm.record(&id).unwrap().index, key.index);
    }

    #[test]
    fn registration_policy_rejections() {
        let nm = manager(3);
        let id = Identity::from("bob");
        let r = S::g1_mul(&FieldScalar::from_u64(5), &S::generator());
        assert_eq!(nm.register_phase2(&id, &r), Err(RejectReason::UnknownIdentity));
        nm.register_phase1(&id).unwrap();
        assert_eq!(nm.register_phase1(&id).unwrap_err(), RejectReason::DuplicateIdentity);
        assert_eq!(nm.register_phase2(&id, &S::g1_identity()), Err(RejectReason::MalformedElement));
        nm.register_phase2(&id, &r).unwrap();
        assert_eq!(nm.register_phase1(&id).unwrap_err(), RejectReason::DuplicateIdentity);
        assert_eq!(nm.register_phase2(&id, &r), Err(RejectReason::DuplicateIdentity));
    }

    #[test]
    fn degenerate_identity_is_reported() {
        // Pick s = -h(ID) for one identity so that s + q_ID = 0.
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (mut params, _) = setup::<S, _>(&mut rng);
        let id = Identity::from("unlucky");
        let q = identity_scalar::<S>(&id, &mut NoRecord);
        let s = -q;
        let secret = NmSecret::from_scalar(s).unwrap();
        params.nm_public = secret.public();
        let nm = NetworkManager::new(params, secret);
        assert_eq!(nm.register_phase1(&id).unwrap_err(), RejectReason::DegenerateIdentity);
    }

    #[test]
    fn unexpected_messages_are_refused() {
        let nm = manager(5);
        let reply = nm.handle(Message::<S>::RosterQuery.to_frame());
        assert_eq!(
            Message::<S>::from_frame(&reply).unwrap(),
            Message::Decision(Decision::Reject(RejectReason::UnexpectedMessage))
        );
    }
}
