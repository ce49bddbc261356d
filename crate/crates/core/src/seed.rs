//! Deterministic randomness: every consumer draws from its own ChaCha20
//! stream keyed by SHA-256(seed || 0 || label).

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedStreams {
    seed: Vec<u8>,
}

impl SeedStreams {
    pub fn new(seed: &[u8]) -> Self {
        SeedStreams { seed: seed.to_vec() }
    }

    pub fn seed(&self) -> &[u8] {
        &self.seed
    }

    pub fn rng(&self, label: &str) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.key(label))
    }

    /// Stream for the i-th member of an indexed family (trials, workers).
    pub fn indexed(&self, label: &str, i: u64) -> ChaCha20Rng {
        self.rng(&format!("{label}#{i}"))
    }

    /// Derived seed for a nested consumer.
    pub fn child(&self, label: &str) -> SeedStreams {
        SeedStreams::new(&self.key(label))
    }

    fn key(&self, label: &str) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(&self.seed);
        h.update([0u8]);
        h.update(label.as_bytes());
        h.finalize().into()
    }
}

/// Parses a hex seed, accepting an optional 0x prefix.
pub fn parse_hex_seed(s: &str) -> Result<Vec<u8>, hex::FromHexError> {
    let s = s.trim();
    let s = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    if s.len() % 2 == 1 {
        hex::decode(format!("0{s}"))
    } else {
        hex::decode(s)
    }
}
