//! Forkable deterministic random streams.
//!
//! Every stream is identified by a master seed plus an ordered lineage of
//! labels. The generator state is a ChaCha8 stream keyed by the SHA-256 of
//! that identity, so a child depends only on `(master, lineage, label)` and
//! never on how much the parent has been consumed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct Rng {
    master: u64,
    lineage: Vec<String>,
    inner: ChaCha8Rng,
}

fn derive_seed(master: u64, lineage: &[String]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"himforge-rng-v1");
    hasher.update(master.to_le_bytes());
    for label in lineage {
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
    }
    hasher.finalize().into()
}

impl Rng {
    /// Root stream for a master seed.
    pub fn new(master: u64) -> Self {
        Self::from_lineage(master, Vec::new())
    }

    /// Rebuilds the stream reached by forking `master` through `lineage`.
    pub fn from_lineage(master: u64, lineage: Vec<String>) -> Self {
        let inner = ChaCha8Rng::from_seed(derive_seed(master, &lineage));
        Self {
            master,
            lineage,
            inner,
        }
    }

    /// Child stream labelled `label`. The parent is left untouched.
    ///
    /// # Panics
    /// If `label` is empty.
    pub fn fork(&self, label: &str) -> Self {
        assert!(!label.is_empty(), "fork label must be nonempty");
        let mut lineage = self.lineage.clone();
        lineage.push(label.to_owned());
        Self::from_lineage(self.master, lineage)
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn lineage(&self) -> &[String] {
        &self.lineage
    }

    /// Uniform sample in `[-amplitude, amplitude)`.
    pub fn symmetric(&mut self, amplitude: f64) -> f64 {
        amplitude * (2.0 * self.unit() - 1.0)
    }

    /// Uniform sample in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        // 53 random mantissa bits.
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform sample in `[lo, hi]`; returns `lo` when the range is degenerate.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.unit();
        if hi <= lo {
            lo
        } else {
            lo + (hi - lo) * u
        }
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
