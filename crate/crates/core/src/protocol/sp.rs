use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};

use super::freshness::{replay_key, FreshnessPolicy};
use super::nm::malformed;
use super::roster::{RosterPush, RosterSnapshot, RosterStore, SpRoster, StoreError};
use super::transport::Service;
use super::wire::{Decision, Frame, Message};
use super::{unix_now, RejectReason};
use crate::clrs::{self, verify, Ring, RingSignature, SystemParams};
use crate::codec::{put_bytes, Reader};
use crate::counters::NoRecord;
use crate::pairing_suite::PairingSuite;

/// An upload: the ring the client chose, the opaque payload and its
/// signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensingReport<S: PairingSuite> {
    pub ring: Ring<S>,
    pub data: Vec<u8>,
    pub signature: RingSignature<S>,
}

impl<S: PairingSuite> SensingReport<S> {
    /// `len ‖ ring ‖ len ‖ data ‖ len ‖ signature`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_bytes(&mut out, &self.ring.to_bytes());
        put_bytes(&mut out, &self.data);
        put_bytes(&mut out, &self.signature.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, clrs::Error> {
        let mut r = Reader::new(bytes);
        let ring = Ring::from_bytes(r.bytes()?)?;
        let data = r.bytes()?.to_vec();
        let signature = RingSignature::from_bytes(r.bytes()?)?;
        r.finish()?;
        Ok(Self { ring, data, signature })
    }
}

type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

/// Collector that verifies uploads against its roster.
///
/// The roster sits behind a reader/writer lock; the replay cache behind a
/// mutex that is only taken for the final check-and-insert, so signature
/// verification runs in parallel. The roster only ever grows, so a ring that
/// passed the membership check stays valid for the rest of the request.
pub struct ServiceProvider<S: PairingSuite> {
    params: SystemParams<S>,
    roster: RwLock<SpRoster<S>>,
    freshness: Mutex<FreshnessPolicy>,
    accepted: Mutex<Vec<SensingReport<S>>>,
    store: Mutex<Option<RosterStore>>,
    report_log: Mutex<Option<File>>,
    clock: Clock,
}

impl<S: PairingSuite> ServiceProvider<S> {
    pub fn new(params: SystemParams<S>, policy: FreshnessPolicy) -> Self {
        Self {
            params,
            roster: RwLock::new(SpRoster::default()),
            freshness: Mutex::new(policy),
            accepted: Mutex::new(Vec::new()),
            store: Mutex::new(None),
            report_log: Mutex::new(None),
            clock: Arc::new(unix_now),
        }
    }

    /// Backs the roster with a snapshot file and log, loading whatever is
    /// already there.
    pub fn with_store(self, snapshot_path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let (store, roster) = RosterStore::open::<S>(snapshot_path)?;
        *self.roster.write() = roster;
        *self.store.lock() = Some(store);
        Ok(self)
    }

    /// Appends every accepted report, length-prefixed, to `path`.
    pub fn with_report_log(self, path: impl AsRef<Path>) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        *self.report_log.lock() = Some(file);
        Ok(self)
    }

    pub fn with_clock(mut self, clock: impl Fn() -> u64 + Send + Sync + 'static) -> Self {
        self.clock = Arc::new(clock);
        self
    }

    pub fn params(&self) -> &SystemParams<S> {
        &self.params
    }

    pub fn now(&self) -> u64 {
        (self.clock)()
    }

    pub fn roster(&self) -> RosterSnapshot<S> {
        self.roster.read().snapshot()
    }

    pub fn roster_version(&self) -> u64 {
        self.roster.read().version()
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted.lock().len()
    }

    pub fn accepted_reports(&self) -> Vec<SensingReport<S>> {
        self.accepted.lock().clone()
    }

    pub fn replay_cache_len(&self) -> usize {
        self.freshness.lock().cache().len()
    }

    pub fn apply_push(&self, push: &RosterPush<S>) -> Result<(), RejectReason> {
        let mut roster = self.roster.write();
        if let Some(version) = roster.apply(push)? {
            if let Some(store) = self.store.lock().as_mut() {
                if let Err(e) = store.record(version, push, &roster) {
                    log::error!("failed to persist roster entry {}: {e}", push.id);
                }
            }
            log::info!("roster v{version}: added {}", push.id);
        }
        Ok(())
    }

    /// Freshness, replay, ring membership, then the signature equation. On
    /// accept the report is cached and retained.
    pub fn handle_upload(&self, report: &SensingReport<S>, now: u64) -> Result<(), RejectReason> {
        let sig = &report.signature;
        let key = replay_key::<S>(&sig.u, sig.t);
        {
            let freshness = self.freshness.lock();
            if !freshness.is_fresh(sig.t, now) {
                return Err(RejectReason::StaleTimestamp);
            }
            if freshness.seen(&key) {
                return Err(RejectReason::Replay);
            }
        }
        {
            let roster = self.roster.read();
            let known = report.ring.members().iter().all(|m| roster.get(&m.id) == Some(&m.index));
            if !known {
                return Err(RejectReason::UnknownRingMember);
            }
        }
        verify(&self.params, &report.ring, &report.data, sig, &mut NoRecord).map_err(|e| match e {
            clrs::Error::BadSignature => RejectReason::BadSignature,
            _ => RejectReason::MalformedReport,
        })?;
        if !self.freshness.lock().admit(key, sig.t, now) {
            // a concurrent copy of the same report won the race
            return Err(RejectReason::Replay);
        }
        if let Some(log) = self.report_log.lock().as_mut() {
            let mut rec = Vec::new();
            put_bytes(&mut rec, &report.to_bytes());
            if let Err(e) = log.write_all(&rec) {
                log::error!("failed to persist report: {e}");
            }
        }
        self.accepted.lock().push(report.clone());
        Ok(())
    }
}

impl<S: PairingSuite> Service for ServiceProvider<S> {
    fn handle(&self, request: Frame) -> Frame {
        let reply = match Message::<S>::from_frame(&request) {
            Ok(Message::Upload(report)) => {
                let decision = self.handle_upload(&report, self.now());
                if let Err(r) = decision {
                    log::info!("upload rejected: {r}");
                }
                Message::Decision(decision.into())
            }
            Ok(Message::RosterPush(push)) => Message::Decision(self.apply_push(&push).into()),
            Ok(Message::RosterQuery) => Message::Roster(self.roster()),
            Ok(_) => Message::Decision(Decision::Reject(RejectReason::UnexpectedMessage)),
            Err(e) => {
                log::debug!("malformed {:?} frame: {e}", request.kind);
                let fallback = RejectReason::MalformedReport;
                let reason = if request.kind == super::MessageType::Upload { fallback } else { malformed(&e, fallback) };
                Message::Decision(Decision::Reject(reason))
            }
        };
        reply.to_frame()
    }
}
