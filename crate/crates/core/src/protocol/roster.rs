//! Provider-side roster of `⟨ID, IND⟩` and its on-disk form.
//!
//! Snapshot file: `version (u64) ‖ count (u32) ‖ (len(ID) (u32) ‖ ID ‖ encode(IND))*`.
//! Log file (`<snapshot>.log`): repeated `version ‖ len(ID) ‖ ID ‖ encode(IND)`
//! records, one per applied push since the last snapshot.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::RejectReason;
use crate::clrs::Identity;
use crate::codec::{put_bytes, put_u32, put_u64, CodecError, Reader};
use crate::pairing_suite::PairingSuite;

/// NM → SP announcement of a newly registered member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RosterPush<S: PairingSuite> {
    pub id: Identity,
    pub index: S::G1,
}

/// Point-in-time copy of a roster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RosterSnapshot<S: PairingSuite> {
    pub version: u64,
    pub entries: Vec<(Identity, S::G1)>,
}

impl<S: PairingSuite> RosterSnapshot<S> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_u64(&mut out, self.version);
        put_u32(&mut out, self.entries.len() as u32);
        for (id, index) in &self.entries {
            put_bytes(&mut out, id.as_bytes());
            S::encode_g1(index, &mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let version = r.u64()?;
        let count = r.u32()?;
        let mut entries = Vec::new();
        for _ in 0..count {
            let id = Identity::new(r.bytes()?);
            entries.push((id, r.g1::<S>()?));
        }
        r.finish()?;
        Ok(Self { version, entries })
    }

    pub fn get(&self, id: &Identity) -> Option<&S::G1> {
        self.entries.iter().find(|(e, _)| e == id).map(|(_, ind)| ind)
    }
}

/// The provider's lists `L` and `I`, keyed by identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpRoster<S: PairingSuite> {
    version: u64,
    entries: BTreeMap<Identity, S::G1>,
}

impl<S: PairingSuite> Default for SpRoster<S> {
    fn default() -> Self {
        Self { version: 0, entries: BTreeMap::new() }
    }
}

impl<S: PairingSuite> SpRoster<S> {
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &Identity) -> Option<&S::G1> {
        self.entries.get(id)
    }

    /// Applies a push. Re-delivery of an identical entry is a no-op; a
    /// different index for a known identity is a conflict. Returns the new
    /// version when the roster changed.
    pub fn apply(&mut self, push: &RosterPush<S>) -> Result<Option<u64>, RejectReason> {
        match self.entries.get(&push.id) {
            Some(existing) if *existing == push.index => Ok(None),
            Some(_) => Err(RejectReason::RosterConflict),
            None => {
                self.entries.insert(push.id.clone(), push.index);
                self.version += 1;
                Ok(Some(self.version))
            }
        }
    }

    pub fn snapshot(&self) -> RosterSnapshot<S> {
        RosterSnapshot {
            version: self.version,
            entries: self.entries.iter().map(|(id, ind)| (id.clone(), *ind)).collect(),
        }
    }

    pub fn from_snapshot(snapshot: RosterSnapshot<S>) -> Self {
        Self { version: snapshot.version, entries: snapshot.entries.into_iter().collect() }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("roster store I/O: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt roster snapshot: {0}")]
    Corrupt(#[from] CodecError),
}

/// Append-only log plus periodic snapshot.
#[derive(Debug)]
pub struct RosterStore {
    snapshot_path: PathBuf,
    log_path: PathBuf,
    log: File,
    pending: usize,
    snapshot_every: usize,
}

impl RosterStore {
    pub const DEFAULT_SNAPSHOT_EVERY: usize = 64;

    /// Opens (or creates) the store and rebuilds the roster from the
    /// snapshot followed by any newer log records. A torn final log record
    /// is dropped.
    pub fn open<S: PairingSuite>(snapshot_path: impl AsRef<Path>) -> Result<(Self, SpRoster<S>), StoreError> {
        let snapshot_path = snapshot_path.as_ref().to_path_buf();
        let log_path = log_path_for(&snapshot_path);
        let (roster, pending) = read_state::<S>(&snapshot_path, &log_path)?;
        let log = OpenOptions::new().create(true).append(true).open(&log_path)?;
        let mut store = Self {
            snapshot_path,
            log_path,
            log,
            pending,
            snapshot_every: Self::DEFAULT_SNAPSHOT_EVERY,
        };
        if pending > 0 || !store.snapshot_path.exists() {
            store.write_snapshot(&roster)?;
        }
        Ok((store, roster))
    }

    /// Reads the roster a store at `snapshot_path` would hold, without
    /// creating or modifying any file. A missing snapshot reads as empty.
    pub fn load<S: PairingSuite>(snapshot_path: impl AsRef<Path>) -> Result<SpRoster<S>, StoreError> {
        let snapshot_path = snapshot_path.as_ref();
        read_state::<S>(snapshot_path, &log_path_for(snapshot_path)).map(|(roster, _)| roster)
    }

    pub fn with_snapshot_every(mut self, n: usize) -> Self {
        self.snapshot_every = n.max(1);
        self
    }

    pub fn snapshot_path(&self) -> &Path {
        &self.snapshot_path
    }

    /// Logs one applied push, snapshotting when enough records accumulate.
    pub fn record<S: PairingSuite>(
        &mut self,
        version: u64,
        push: &RosterPush<S>,
        roster: &SpRoster<S>,
    ) -> Result<(), StoreError> {
        let mut rec = Vec::new();
        put_u64(&mut rec, version);
        put_bytes(&mut rec, push.id.as_bytes());
        S::encode_g1(&push.index, &mut rec);
        self.log.write_all(&rec)?;
        self.log.flush()?;
        self.pending += 1;
        if self.pending >= self.snapshot_every {
            self.write_snapshot(roster)?;
        }
        Ok(())
    }

    /// Atomically replaces the snapshot and truncates the log.
    pub fn write_snapshot<S: PairingSuite>(&mut self, roster: &SpRoster<S>) -> Result<(), StoreError> {
        let mut tmp_name = self.snapshot_path.clone().into_os_string();
        tmp_name.push(".tmp");
        let tmp = PathBuf::from(tmp_name);
        {
            let mut f = File::create(&tmp)?;
            f.write_all(&roster.snapshot().to_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &self.snapshot_path)?;
        self.log = OpenOptions::new().create(true).write(true).truncate(true).open(&self.log_path)?;
        self.log = OpenOptions::new().append(true).open(&self.log_path)?;
        self.pending = 0;
        Ok(())
    }
}

fn log_path_for(snapshot_path: &Path) -> PathBuf {
    let mut name = snapshot_path.as_os_str().to_owned();
    name.push(".log");
    PathBuf::from(name)
}

/// Snapshot plus newer log records, and how many records were applied.
fn read_state<S: PairingSuite>(snapshot_path: &Path, log_path: &Path) -> Result<(SpRoster<S>, usize), StoreError> {
    let mut roster = match fs::read(snapshot_path) {
        Ok(bytes) => SpRoster::from_snapshot(RosterSnapshot::<S>::from_bytes(&bytes)?),
        Err(e) if e.kind() == io::ErrorKind::NotFound => SpRoster::default(),
        Err(e) => return Err(e.into()),
    };
    let bytes = match fs::read(log_path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((roster, 0)),
        Err(e) => return Err(e.into()),
    };
    let mut pending = 0;
    let mut r = Reader::new(&bytes);
    while !r.is_empty() {
        let record = (|| -> Result<(u64, RosterPush<S>), CodecError> {
            let version = r.u64()?;
            let id = Identity::new(r.bytes()?);
            Ok((version, RosterPush { id, index: r.g1::<S>()? }))
        })();
        match record {
            Ok((version, push)) if version > roster.version() => {
                if roster.apply(&push).is_err() {
                    return Err(CodecError::Invalid("conflicting roster log record").into());
                }
                pending += 1;
            }
            Ok(_) => {}
            Err(CodecError::Truncated) => {
                log::warn!("dropping torn record at the end of {}", log_path.display());
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((roster, pending))
}
