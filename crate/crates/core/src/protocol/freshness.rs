use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::pairing_suite::PairingSuite;

pub const DEFAULT_WINDOW_SECONDS: u64 = 60;

/// `SHA-256(encode(u) ‖ t)`.
pub fn replay_key<S: PairingSuite>(u: &S::G2, t: u64) -> [u8; 32] {
    let mut enc = Vec::with_capacity(S::profile().g2_len + 8);
    S::encode_g2(u, &mut enc);
    enc.extend_from_slice(&t.to_be_bytes());
    Sha256::digest(&enc).into()
}

/// Keys of accepted reports, each kept until `t + retention`.
#[derive(Debug, Default)]
pub struct ReplayCache {
    seen: HashMap<[u8; 32], u64>,
    retention: u64,
}

impl ReplayCache {
    pub fn new(retention: u64) -> Self {
        Self { seen: HashMap::new(), retention }
    }

    pub fn contains(&self, key: &[u8; 32]) -> bool {
        self.seen.contains_key(key)
    }

    /// Returns `false` if the key was already present.
    pub fn insert(&mut self, key: [u8; 32], t: u64) -> bool {
        use std::collections::hash_map::Entry;
        match self.seen.entry(key) {
            Entry::Occupied(_) => false,
            Entry::Vacant(slot) => {
                slot.insert(t);
                true
            }
        }
    }

    pub fn purge(&mut self, now: u64) {
        let retention = self.retention;
        self.seen.retain(|_, t| t.saturating_add(retention) >= now);
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// Freshness window plus the replay cache it governs.
///
/// A report is fresh when `|now − t| ≤ window`. Cache entries live for twice
/// the window, so anything purged is already stale and can never be admitted
/// a second time.
#[derive(Debug)]
pub struct FreshnessPolicy {
    window_seconds: u64,
    cache: ReplayCache,
}

impl Default for FreshnessPolicy {
    fn default() -> Self {
        Self::new(DEFAULT_WINDOW_SECONDS)
    }
}

impl FreshnessPolicy {
    pub fn new(window_seconds: u64) -> Self {
        assert!(window_seconds > 0, "freshness window must be positive");
        Self { window_seconds, cache: ReplayCache::new(2 * window_seconds) }
    }

    pub fn window_seconds(&self) -> u64 {
        self.window_seconds
    }

    pub fn is_fresh(&self, t: u64, now: u64) -> bool {
        t.abs_diff(now) <= self.window_seconds
    }

    pub fn seen(&self, key: &[u8; 32]) -> bool {
        self.cache.contains(key)
    }

    /// Records an accepted report. `false` if it was already recorded.
    pub fn admit(&mut self, key: [u8; 32], t: u64, now: u64) -> bool {
        self.cache.purge(now);
        self.cache.insert(key, t)
    }

    pub fn cache(&self) -> &ReplayCache {
        &self.cache
    }
}
