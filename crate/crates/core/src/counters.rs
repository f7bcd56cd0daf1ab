//! Operation accounting for the four costed primitives.
//!
//! Instrumented operations take a [`Recorder`] by explicit `&mut` argument, so
//! a measurement region owns its counters and concurrent regions never share
//! state. Pass [`NoRecord`] when counts are not wanted.

use serde::Serialize;

/// The costed primitive operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    /// Bilinear pairing evaluation.
    Pairing,
    /// Scalar multiplication in the source group.
    ScalarMul,
    /// Exponentiation in the target group.
    Exp,
    /// Hash onto the scalar field.
    Hash,
}

pub trait Recorder {
    fn record(&mut self, op: Op, count: u64);
}

/// Recorder that discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoRecord;

impl Recorder for NoRecord {
    #[inline(always)]
    fn record(&mut self, _op: Op, _count: u64) {}
}

/// Tallies of BP / SM / EXP / Hash operations within one measured region.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct OpCounters {
    pub bp: u64,
    pub sm: u64,
    pub exp: u64,
    pub hash: u64,
}

impl OpCounters {
    pub const fn new(bp: u64, sm: u64, exp: u64, hash: u64) -> Self {
        Self { bp, sm, exp, hash }
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

impl Recorder for OpCounters {
    #[inline]
    fn record(&mut self, op: Op, count: u64) {
        let slot = match op {
            Op::Pairing => &mut self.bp,
            Op::ScalarMul => &mut self.sm,
            Op::Exp => &mut self.exp,
            Op::Hash => &mut self.hash,
        };
        *slot += count;
    }
}

impl<R: Recorder + ?Sized> Recorder for &mut R {
    #[inline]
    fn record(&mut self, op: Op, count: u64) {
        (**self).record(op, count)
    }
}
