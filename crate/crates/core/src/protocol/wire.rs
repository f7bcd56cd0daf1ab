//! Frame layout and message bodies.
//!
//! On a stream each frame is prefixed with its length as a big-endian `u32`.
//! A frame is `type (1 byte) ‖ body`:
//!
//! | type | name          | body                                             |
//! |------|---------------|--------------------------------------------------|
//! | 0x01 | REGISTER_ID   | `len ‖ id`                                       |
//! | 0x02 | PARTIAL_KEY   | partial-key artifact (`profile ‖ len ‖ id ‖ D`)  |
//! | 0x03 | PUBLIC_KEY    | `len ‖ id ‖ encode(R)`                           |
//! | 0x04 | ROSTER_PUSH   | `len ‖ id ‖ encode(IND)`                         |
//! | 0x05 | UPLOAD        | `len ‖ ring ‖ len ‖ data ‖ len ‖ signature`      |
//! | 0x06 | DECISION      | `status ‖ len ‖ detail` (status 0 = accept)      |
//! | 0x07 | ROSTER_QUERY  | empty                                            |
//! | 0x08 | ROSTER        | roster snapshot                                  |

use std::io::{self, Read, Write};

use thiserror::Error;

use super::roster::{RosterPush, RosterSnapshot};
use super::sp::SensingReport;
use super::RejectReason;
use crate::clrs::{self, Identity, PartialKey};
use crate::codec::{put_bytes, put_u8, CodecError, Reader};
use crate::pairing_suite::PairingSuite;

/// Upper bound on a single frame; an upload with a 1000-member ring on the
/// default profile is well under 1 MiB.
pub const MAX_FRAME_LEN: usize = 16 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageType {
    RegisterId = 0x01,
    PartialKey = 0x02,
    PublicKey = 0x03,
    RosterPush = 0x04,
    Upload = 0x05,
    Decision = 0x06,
    RosterQuery = 0x07,
    Roster = 0x08,
}

impl MessageType {
    pub fn from_byte(b: u8) -> Option<Self> {
        use MessageType::*;
        Some(match b {
            0x01 => RegisterId,
            0x02 => PartialKey,
            0x03 => PublicKey,
            0x04 => RosterPush,
            0x05 => Upload,
            0x06 => Decision,
            0x07 => RosterQuery,
            0x08 => Roster,
            _ => return None,
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("empty frame")]
    Empty,
    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),
    #[error("frame of {0} bytes exceeds the limit")]
    TooLarge(usize),
    #[error("unknown decision status {0}")]
    UnknownStatus(u8),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Scheme(#[from] clrs::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: MessageType,
    pub body: Vec<u8>,
}

impl Frame {
    pub fn new(kind: MessageType, body: Vec<u8>) -> Self {
        Self { kind, body }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(1 + self.body.len());
        out.push(self.kind as u8);
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        let (&kind, body) = bytes.split_first().ok_or(WireError::Empty)?;
        let kind = MessageType::from_byte(kind).ok_or(WireError::UnknownType(kind))?;
        Ok(Self { kind, body: body.to_vec() })
    }
}

/// Writes `u32 length ‖ frame`.
pub fn write_frame(w: &mut impl Write, frame: &Frame) -> io::Result<()> {
    let bytes = frame.to_bytes();
    w.write_all(&(bytes.len() as u32).to_be_bytes())?;
    w.write_all(&bytes)?;
    w.flush()
}

/// Reads one length-prefixed frame. `Ok(None)` on a clean end of stream.
pub fn read_frame(r: &mut impl Read) -> io::Result<Option<Frame>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME_LEN {
        return Err(io::Error::new(io::ErrorKind::InvalidData, WireError::TooLarge(len)));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Frame::from_bytes(&buf).map(Some).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject(RejectReason),
}

impl From<Result<(), RejectReason>> for Decision {
    fn from(r: Result<(), RejectReason>) -> Self {
        match r {
            Ok(()) => Decision::Accept,
            Err(reason) => Decision::Reject(reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message<S: PairingSuite> {
    RegisterId(Identity),
    PartialKey(PartialKey<S>),
    PublicKey { id: Identity, public_key: S::G1 },
    RosterPush(RosterPush<S>),
    Upload(SensingReport<S>),
    Decision(Decision),
    RosterQuery,
    Roster(RosterSnapshot<S>),
}

impl<S: PairingSuite> Message<S> {
    pub fn to_frame(&self) -> Frame {
        let mut body = Vec::new();
        let kind = match self {
            Message::RegisterId(id) => {
                put_bytes(&mut body, id.as_bytes());
                MessageType::RegisterId
            }
            Message::PartialKey(pk) => {
                body = pk.to_bytes();
                MessageType::PartialKey
            }
            Message::PublicKey { id, public_key } => {
                put_bytes(&mut body, id.as_bytes());
                S::encode_g1(public_key, &mut body);
                MessageType::PublicKey
            }
            Message::RosterPush(push) => {
                put_bytes(&mut body, push.id.as_bytes());
                S::encode_g1(&push.index, &mut body);
                MessageType::RosterPush
            }
            Message::Upload(report) => {
                body = report.to_bytes();
                MessageType::Upload
            }
            Message::Decision(d) => {
                let (status, detail) = match d {
                    Decision::Accept => (0, String::new()),
                    Decision::Reject(r) => (r.code(), r.to_string()),
                };
                put_u8(&mut body, status);
                put_bytes(&mut body, detail.as_bytes());
                MessageType::Decision
            }
            Message::RosterQuery => MessageType::RosterQuery,
            Message::Roster(snapshot) => {
                body = snapshot.to_bytes();
                MessageType::Roster
            }
        };
        Frame { kind, body }
    }

    pub fn from_frame(frame: &Frame) -> Result<Self, WireError> {
        let mut r = Reader::new(&frame.body);
        let msg = match frame.kind {
            MessageType::RegisterId => Message::RegisterId(Identity::new(r.bytes()?)),
            MessageType::PartialKey => return Ok(Message::PartialKey(PartialKey::from_bytes(&frame.body)?)),
            MessageType::PublicKey => {
                let id = Identity::new(r.bytes()?);
                Message::PublicKey { id, public_key: r.g1::<S>()? }
            }
            MessageType::RosterPush => {
                let id = Identity::new(r.bytes()?);
                Message::RosterPush(RosterPush { id, index: r.g1::<S>()? })
            }
            MessageType::Upload => return Ok(Message::Upload(SensingReport::from_bytes(&frame.body)?)),
            MessageType::Decision => {
                let status = r.u8()?;
                let _detail = r.bytes()?;
                match status {
                    0 => Message::Decision(Decision::Accept),
                    code => Message::Decision(Decision::Reject(
                        RejectReason::from_code(code).ok_or(WireError::UnknownStatus(code))?,
                    )),
                }
            }
            MessageType::RosterQuery => Message::RosterQuery,
            MessageType::Roster => return Ok(Message::Roster(RosterSnapshot::from_bytes(&frame.body)?)),
        };
        r.finish()?;
        Ok(msg)
    }
}
