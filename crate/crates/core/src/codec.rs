//! Fixed-layout big-endian binary encoding shared by every artifact.

use thiserror::Error;

use crate::pairing_suite::{DecodeError, PairingSuite};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("input truncated")]
    Truncated,
    #[error("{0} trailing bytes after artifact")]
    TrailingBytes(usize),
    #[error("profile mismatch: expected {expected}, found {found}")]
    ProfileMismatch { expected: String, found: String },
    #[error("invalid field: {0}")]
    Invalid(&'static str),
    #[error(transparent)]
    Element(#[from] DecodeError),
}

pub(crate) fn put_u8(out: &mut Vec<u8>, v: u8) {
    out.push(v);
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_be_bytes());
}

pub(crate) fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_be_bytes());
}

/// `u32 length ‖ bytes`.
pub(crate) fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    put_u32(out, u32::try_from(bytes.len()).expect("field longer than 4 GiB"));
    out.extend_from_slice(bytes);
}

/// `u8 length ‖ ASCII name`.
pub(crate) fn put_profile<S: PairingSuite>(out: &mut Vec<u8>) {
    let name = S::profile().name.as_bytes();
    put_u8(out, name.len() as u8);
    out.extend_from_slice(name);
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self { buf }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.buf.len() < n {
            return Err(CodecError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub(crate) fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub(crate) fn bytes(&mut self) -> Result<&'a [u8], CodecError> {
        let len = self.u32()? as usize;
        self.take(len)
    }

    pub(crate) fn profile<S: PairingSuite>(&mut self) -> Result<(), CodecError> {
        let len = self.u8()? as usize;
        let found = self.take(len)?;
        let expected = S::profile().name;
        if found != expected.as_bytes() {
            return Err(CodecError::ProfileMismatch {
                expected: expected.to_owned(),
                found: String::from_utf8_lossy(found).into_owned(),
            });
        }
        Ok(())
    }

    pub(crate) fn scalar<S: PairingSuite>(&mut self) -> Result<S::Scalar, CodecError> {
        Ok(S::decode_scalar(self.take(S::profile().scalar_len)?)?)
    }

    pub(crate) fn g1<S: PairingSuite>(&mut self) -> Result<S::G1, CodecError> {
        Ok(S::decode_g1(self.take(S::profile().g1_len)?)?)
    }

    pub(crate) fn g2<S: PairingSuite>(&mut self) -> Result<S::G2, CodecError> {
        Ok(S::decode_g2(self.take(S::profile().g2_len)?)?)
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub(crate) fn finish(self) -> Result<(), CodecError> {
        match self.buf.len() {
            0 => Ok(()),
            n => Err(CodecError::TrailingBytes(n)),
        }
    }
}

/// Reads the profile name prefix of an artifact without decoding the rest.
pub fn peek_profile_name(bytes: &[u8]) -> Result<String, CodecError> {
    let mut r = Reader::new(bytes);
    let len = r.u8()? as usize;
    let name = r.take(len)?;
    String::from_utf8(name.to_vec()).map_err(|_| CodecError::Invalid("profile name"))
}
