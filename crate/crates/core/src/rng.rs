//! Reproducible random streams.
//!
//! Every realization gets its own ChaCha20 stream. The 256-bit key is the
//! master seed (little-endian, bytes 0..8) followed by a namespace tag
//! (little-endian, bytes 8..16) and zeros; the 64-bit ChaCha stream id is
//! the realization index. Streams therefore never depend on how work is
//! scheduled, and distinct namespaces never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

/// Independent families of streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Namespace {
    /// Plane-wave coefficients of the field ensemble.
    Field,
    /// The i.i.d. Rayleigh companion ensemble.
    Baseline,
}

impl Namespace {
    fn tag(self) -> u64 {
        match self {
            Namespace::Field => 0x6669_656c_6400_0001,
            Namespace::Baseline => 0x6261_7365_6c00_0002,
        }
    }
}

/// Where a stream came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StreamId {
    pub master_seed: u64,
    pub namespace: Namespace,
    pub index: u64,
}

impl StreamId {
    pub fn new(master_seed: u64, namespace: Namespace, index: u64) -> Self {
        StreamId {
            master_seed,
            namespace,
            index,
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.namespace.tag().to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(self.index);
        rng
    }
}
