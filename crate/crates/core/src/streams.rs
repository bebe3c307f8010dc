//! Counter-based random streams.
//!
//! A stream is addressed by `(seed, domain, index)`: the ChaCha key holds the
//! seed and the domain, and the 64-bit ChaCha stream id holds the index. Any
//! replicate can therefore be regenerated on its own, in any order, on any
//! thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Namespaces that keep unrelated uses of one master seed apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Namespace {
    SizeData = 1,
    PowerData = 2,
    NullCalibration = 3,
    Bootstrap = 4,
    DesignScaling = 5,
    DesignPermutation = 6,
    Single = 7,
}

/// Compose a domain word from a namespace and a caller-chosen experiment id.
pub fn domain(ns: Namespace, experiment: u32) -> u64 {
    ((ns as u64) << 32) | experiment as u64
}

pub fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key[16..].copy_from_slice(b"covthresh-stream");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
