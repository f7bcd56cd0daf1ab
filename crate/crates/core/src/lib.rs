pub mod clrs;
pub mod bench;
pub mod codec;
pub mod counters;
pub mod pairing_suite;
pub mod protocol;
