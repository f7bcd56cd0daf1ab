//! Client / network-manager / service-provider protocol.
//!
//! Registration runs in two phases against the [`NetworkManager`]: the client
//! sends its identity and receives a partial key, then returns its public key
//! `R`. The manager derives `IND = q_ID·R` itself and pushes `⟨ID, IND⟩` to
//! every subscribed [`ServiceProvider`]. Uploads go straight to a provider,
//! which checks freshness, replay, ring membership and finally the signature.
//!
//! Messages travel as [`Frame`]s over a [`Transport`]; the same frames are
//! used in-process and over TCP. The registration channel is assumed to be
//! confidential and mutually authenticated; no channel security is provided
//! here.

mod client;
mod freshness;
mod nm;
mod roster;
mod sp;
mod transport;
mod wire;

use thiserror::Error;

pub use client::{fetch_roster, register, select_ring, upload, ClientError};
pub use freshness::{replay_key, FreshnessPolicy, ReplayCache, DEFAULT_WINDOW_SECONDS};
pub use nm::{NetworkManager, NmRecord};
pub use roster::{RosterPush, RosterSnapshot, RosterStore, SpRoster, StoreError};
pub use sp::{SensingReport, ServiceProvider};
pub use transport::{serve_tcp, InProcess, Service, TcpTransport, Transport, TransportError};
pub use wire::{read_frame, write_frame, Decision, Frame, Message, MessageType, WireError};

/// Why a request was turned down. The discriminant is the wire code.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum RejectReason {
    #[error("timestamp outside the freshness window")]
    StaleTimestamp = 1,
    #[error("report already accepted")]
    Replay = 2,
    #[error("ring contains an identity or index not on the roster")]
    UnknownRingMember = 3,
    #[error("signature does not verify")]
    BadSignature = 4,
    #[error("report is malformed")]
    MalformedReport = 5,
    #[error("identity already registered")]
    DuplicateIdentity = 6,
    #[error("identity has no pending registration")]
    UnknownIdentity = 7,
    #[error("group element rejected")]
    MalformedElement = 8,
    #[error("identity cannot be keyed under this master secret")]
    DegenerateIdentity = 9,
    #[error("message type not handled by this role")]
    UnexpectedMessage = 10,
    #[error("roster push conflicts with an existing entry")]
    RosterConflict = 11,
}

impl RejectReason {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        use RejectReason::*;
        Some(match code {
            1 => StaleTimestamp,
            2 => Replay,
            3 => UnknownRingMember,
            4 => BadSignature,
            5 => MalformedReport,
            6 => DuplicateIdentity,
            7 => UnknownIdentity,
            8 => MalformedElement,
            9 => DegenerateIdentity,
            10 => UnexpectedMessage,
            11 => RosterConflict,
            _ => return None,
        })
    }
}

/// Wall-clock seconds since the Unix epoch.
pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
