//! Counter-mode pseudorandom streams standing in for PRF keys.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrfKey([u8; 32]);

impl PrfKey {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        PrfKey(bytes)
    }

    /// Derive a key from a master seed and a label.
    pub fn derive(seed: u64, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(b"fedcheck/key");
        h.update(seed.to_le_bytes());
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        PrfKey(h.finalize().into())
    }

    /// Stream for `(tag, counter)`. Same key, tag and counter give the same
    /// stream on every holder of the key.
    pub fn stream(&self, tag: &str, counter: u64) -> ChaCha20Rng {
        let mut h = Sha256::new();
        h.update(self.0);
        h.update((tag.len() as u64).to_le_bytes());
        h.update(tag.as_bytes());
        h.update(counter.to_le_bytes());
        ChaCha20Rng::from_seed(h.finalize().into())
    }
}

/// Derive an independent `u64` seed for a labelled substream.
pub fn substream_seed(master: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(b"fedcheck/substream");
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}
